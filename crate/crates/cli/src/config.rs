//! TOML run configuration for the time-dependent experiment.
//!
//! Exactly one of `[physical]` / `[scaled]` is required; when both appear
//! they must agree through mu = eps mu_bar, lambda = sqrt(eps) lambda_bar.

use serde::Deserialize;

use ionshock_core::error::{Error, Result};
use ionshock_core::evolution::{PerturbationShape, PerturbationSpec};
use ionshock_core::rankine_hugoniot::PlasmaParams;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: Option<PhysicalBlock>,
    pub scaled: Option<ScaledBlock>,
    pub shock: ShockBlock,
    pub profile_grid: GridBlock,
    pub frame_grid: GridBlock,
    pub perturbation: PerturbationBlock,
    pub time: TimeBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    pub temperature: f64,
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledBlock {
    pub temperature: f64,
    pub mu_bar: f64,
    pub lambda_bar: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockBlock {
    pub eps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub half_length: f64,
    pub nodes: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationBlock {
    /// "derivative-of-bump" | "dipole" | "slow-family-bump"
    pub shape: String,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t_end: f64,
    /// Fraction of the acoustic time-step budget, in (0, 1].
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_sample")]
    pub sample_every: usize,
}

fn default_cfl() -> f64 {
    0.95
}
fn default_sample() -> usize {
    200
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<String>,
    /// Number of evenly spaced field snapshots to write (besides t = 0).
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

fn default_snapshots() -> usize {
    4
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        match (&self.physical, &self.scaled) {
            (None, None) => Err(Error::InvalidParameter(
                "config needs a [physical] or [scaled] parameter block".into(),
            )),
            (Some(p), Some(s)) => {
                let mu = self.shock.eps * s.mu_bar;
                let lambda = self.shock.eps.sqrt() * s.lambda_bar;
                if (p.mu - mu).abs() > 1e-12 * mu.abs().max(1.0)
                    || (p.lambda - lambda).abs() > 1e-12 * lambda.abs().max(1.0)
                    || (p.temperature - s.temperature).abs() > 0.0
                {
                    return Err(Error::InvalidParameter(format!(
                        "[physical] and [scaled] disagree: mu {} vs eps*mu_bar {}, lambda {} vs sqrt(eps)*lambda_bar {}",
                        p.mu, mu, p.lambda, lambda
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn plasma_params(&self) -> Result<PlasmaParams> {
        if let Some(p) = &self.physical {
            PlasmaParams::new(p.temperature, p.mu, p.lambda)
        } else {
            let s = self.scaled.as_ref().unwrap();
            PlasmaParams::new(
                s.temperature,
                self.shock.eps * s.mu_bar,
                self.shock.eps.sqrt() * s.lambda_bar,
            )
        }
    }

    pub fn perturbation(&self) -> Result<PerturbationSpec> {
        let shape = match self.perturbation.shape.as_str() {
            "derivative-of-bump" => PerturbationShape::DerivativeOfBump,
            "dipole" => PerturbationShape::Dipole,
            "slow-family-bump" => PerturbationShape::SlowFamilyBump,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown perturbation shape '{other}'"
                )))
            }
        };
        Ok(PerturbationSpec {
            shape,
            amplitude: self.perturbation.amplitude,
            center: self.perturbation.center,
            width: self.perturbation.width,
        })
    }
}
