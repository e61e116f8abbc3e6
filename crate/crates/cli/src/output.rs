//! CSV and JSON emission. Every file starts with a `# key = value` header
//! block holding the fully resolved configuration, so any output can be
//! reproduced (and `diagnose` can recover parameters from snapshots).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ionshock_core::error::Result;

pub struct CsvWriter {
    header: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: String,
}

impl CsvWriter {
    pub fn new(command: &str, columns: Vec<&'static str>) -> Self {
        Self {
            header: vec![("command".into(), command.into())],
            columns,
            rows: String::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.header.push((key.into(), value.to_string()));
        self
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns.len());
        let mut line = String::new();
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            // shortest round-trip representation keeps files deterministic
            let _ = write!(line, "{v}");
        }
        self.rows.push_str(&line);
        self.rows.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        out.push_str(&self.rows);
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Read a CSV written by [`CsvWriter`]: returns (metadata, column names, rows).
pub fn read_csv(path: &Path) -> Result<(Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut meta = Vec::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if columns.is_empty() {
            columns = line.split(',').map(|s| s.trim().to_string()).collect();
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(ionshock_core::error::Error::InvalidParameter(format!(
                    "bad CSV row in {}: {e}",
                    path.display()
                )))
            }
        }
    }
    Ok((meta, columns, rows))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, serde_json::to_string_pretty(value).expect("serializable") + "\n")?;
    Ok(())
}
