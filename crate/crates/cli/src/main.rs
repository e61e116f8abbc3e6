//! `ionshock` — traveling-wave shock profiles of the one-dimensional
//! Navier-Stokes-Poisson plasma model, their first-order (KdV-Burgers)
//! description, and time-dependent stability experiments.
//!
//! Exit codes: 0 success, 1 solver failure (a machine-readable error record
//! goes to stderr), 2 usage error.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ionshock_core::approximation as apx;
use ionshock_core::energy;
use ionshock_core::error::Result;
use ionshock_core::evolution as evo;
use ionshock_core::grid::GridSpec;
use ionshock_core::kdv_burgers as kdvb;
use ionshock_core::profile_ode as prof;
use ionshock_core::rankine_hugoniot as rh;

use output::{read_csv, write_json, CsvWriter};

/// Environment variable naming the default output root.
const OUT_ENV: &str = "IONSHOCK_OUT";

#[derive(Parser)]
#[command(name = "ionshock", version, about = "Ion-acoustic shock laboratory", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Far-field jump algebra: wave speed and downstream state for (T, eps)
    Rh {
        #[arg(long = "T")]
        temperature: f64,
        #[arg(long)]
        eps: f64,
        /// Amplitude cap as a fraction of the sound speed
        #[arg(long, default_value_t = rh::DEFAULT_MAX_EPS_FRACTION)]
        max_eps_fraction: f64,
        #[arg(long)]
        json: bool,
    },
    /// Solve the full traveling-wave profile and its diagnostics
    Profile {
        #[arg(long = "T")]
        temperature: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        eps: f64,
        /// Domain half-length (defaults to 40 / g where g is the reduced-flow
        /// rate estimate)
        #[arg(long = "L")]
        half_length: Option<f64>,
        #[arg(long, default_value_t = 4001)]
        nodes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a first-order (KdV-Burgers) profile
    Kdvb {
        #[arg(long = "T")]
        temperature: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        kind: String,
        /// Solve the amplitude-modified variant at this eps
        #[arg(long)]
        modified: bool,
        #[arg(long, required_if_eq("modified", "true"))]
        eps: Option<f64>,
        #[arg(long = "L", default_value_t = 14.0)]
        half_length: f64,
        #[arg(long, default_value_t = 2801)]
        nodes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monotonicity / tail-rate table over a list of dispersion ratios
    KdvbSweep {
        #[arg(long = "T")]
        temperature: f64,
        #[arg(long, value_delimiter = ',')]
        delta_list: Vec<f64>,
        #[arg(long, default_value = "n1")]
        kind: String,
        #[arg(long = "L", default_value_t = 14.0)]
        half_length: f64,
        #[arg(long, default_value_t = 2801)]
        nodes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// First-order approximation study: remainders, weighted norms, orders
    Validate {
        #[arg(long = "T")]
        temperature: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_delimiter = ',')]
        eps_list: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long = "L", default_value_t = 60.0)]
        half_length: f64,
        #[arg(long, default_value_t = 8001)]
        nodes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time-dependent stability experiment driven by a TOML config
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides config and IONSHOCK_OUT)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy diagnostics of a stored snapshot against a stored profile
    Diagnose {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Run several evolve configurations in parallel
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({
                "error": e.to_string(),
                "kind": format!("{e:?}").split([' ', '(', '{']).next().unwrap_or("Error"),
            });
            eprintln!("{record}");
            ExitCode::from(1)
        }
    }
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_root().join(path)
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Rh { temperature, eps, max_eps_fraction, json } => {
            let d = rh::parametrize_downstream(temperature, eps, max_eps_fraction)?;
            let up = rh::EquilibriumState::upstream();
            let (r1, r2) = rh::rh_residual_eulerian(&up, &d.state, temperature, d.s);
            if json {
                println!(
                    "{}",
                    json!({
                        "T": temperature, "eps": eps,
                        "s": d.s, "n_plus": d.state.n, "u_plus": d.state.u,
                        "phi_plus": d.state.phi, "a_eps": d.a_eps,
                        "residual_mass": r1, "residual_momentum": r2,
                    })
                );
            } else {
                println!("s       = {}", d.s);
                println!("n_plus  = {}", d.state.n);
                println!("u_plus  = {}", d.state.u);
                println!("phi_plus= {}", d.state.phi);
                println!("a_eps   = {}", d.a_eps);
                println!("jump residuals = ({r1:.3e}, {r2:.3e})");
            }
            Ok(())
        }

        Command::Profile { temperature, mu, lambda, eps, half_length, nodes, out } => {
            let params = rh::PlasmaParams::new(temperature, mu, lambda)?;
            let d = rh::parametrize_downstream_default(temperature, eps)?;
            let l = half_length
                .unwrap_or_else(|| 40.0 / prof::g_dot_zero(&params, d.state.n).max(1e-8));
            let sol = prof::solve_profile(
                &params,
                eps,
                &GridSpec::new(l, nodes)?,
                &prof::SolverOptions::default(),
            )?;
            let out = resolve_out(&out);

            let mut csv = CsvWriter::new("profile", vec!["xi", "n", "u", "phi"]);
            csv.meta("T", temperature)
                .meta("mu", mu)
                .meta("lambda", lambda)
                .meta("eps", eps)
                .meta("L", l)
                .meta("nodes", nodes)
                .meta("s", sol.s);
            for j in 0..sol.n.len() {
                csv.row(&[sol.grid.point(j), sol.n[j], sol.u[j], sol.phi[j]]);
            }
            csv.write(&out)?;

            let fit_left = prof::decay_rate_estimate(&sol, prof::Side::Left).ok();
            let fit_right = prof::decay_rate_estimate(&sol, prof::Side::Right).ok();
            let (c_lo, c_hi) = sol.slope_ratio_bounds();
            let sidecar = json!({
                "s": sol.s,
                "n_plus": sol.right.n,
                "residual_norm": sol.residual_norm,
                "first_integral_residual": prof::first_integral_residual(&sol),
                "mass_integral_defect": sol.mass_integral_defect(),
                "boundary_defect": sol.boundary_defect,
                "integral_constant": sol.integral_constant,
                "newton_iterations": sol.newton_iterations,
                "monotone": sol.is_monotone(),
                "monotonicity_defect": sol.monotonicity_defect(),
                "decay": {
                    "left_fit": fit_left,
                    "right_fit": fit_right,
                    "g_dot_zero": prof::g_dot_zero(&params, sol.right.n),
                    "upstream_slow_rate": prof::upstream_slow_rate(&params, sol.s),
                    "downstream_slow_rate": prof::downstream_slow_rate(&params, sol.s, sol.right.n),
                },
                "slope_ratio_bounds": { "lower": c_lo, "upper": c_hi },
            });
            write_json(&out.with_extension("csv.json"), &sidecar)?;
            println!("profile written to {}", out.display());
            Ok(())
        }

        Command::Kdvb { temperature, delta, kind, modified, eps, half_length, nodes, out } => {
            let kind = kdvb::FieldKind::parse(&kind)?;
            let variant = if modified {
                let e = eps.ok_or_else(|| {
                    ionshock_core::error::Error::InvalidParameter(
                        "--modified requires --eps".into(),
                    )
                })?;
                let d = rh::parametrize_downstream_default(temperature, e)?;
                kdvb::Variant::Modified { eps: e, a_eps: d.a_eps }
            } else {
                kdvb::Variant::Classic
            };
            let p = kdvb::solve_kdvb(
                temperature,
                delta,
                kind,
                variant,
                &GridSpec::new(half_length, nodes)?,
            )?;
            let out = resolve_out(&out);
            let mut csv = CsvWriter::new("kdvb", vec!["z", "field"]);
            csv.meta("T", temperature)
                .meta("delta", delta)
                .meta("kind", format!("{kind:?}"))
                .meta("variant", format!("{variant:?}"))
                .meta("L", half_length)
                .meta("nodes", nodes);
            for j in 0..p.field.len() {
                csv.row(&[p.grid.point(j), p.field[j]]);
            }
            csv.write(&out)?;

            let report = kdvb::monotonicity_report(&p);
            let sidecar = json!({
                "far_left": p.far_left,
                "far_right": p.far_right,
                "residual_norm": p.residual_norm,
                "integral_constant": p.integral_constant,
                "newton_iterations": p.newton_iterations,
                "monotone": report.monotone,
                "overshoot": report.overshoot,
                "tail_rate_left": kdvb::tail_rate(&p, true).ok(),
                "tail_rate_right": kdvb::tail_rate(&p, false).ok(),
            });
            write_json(&out.with_extension("csv.json"), &sidecar)?;
            println!("kdvb profile written to {}", out.display());
            Ok(())
        }

        Command::KdvbSweep { temperature, delta_list, kind, half_length, nodes, out } => {
            let kind = kdvb::FieldKind::parse(&kind)?;
            let mut rows = Vec::new();
            for &delta in &delta_list {
                let entry = match kdvb::solve_kdvb(
                    temperature,
                    delta,
                    kind,
                    kdvb::Variant::Classic,
                    &GridSpec::new(half_length, nodes)?,
                ) {
                    Ok(p) => {
                        let rep = kdvb::monotonicity_report(&p);
                        let rates = kdvb::kdvb_phase_eigenvalues(temperature, delta).ok();
                        json!({
                            "delta": delta,
                            "monotone": rep.monotone,
                            "overshoot": rep.overshoot,
                            "tail_rate_left": kdvb::tail_rate(&p, true).ok(),
                            "tail_rate_right": kdvb::tail_rate(&p, false).ok(),
                            "phase_rates": rates,
                        })
                    }
                    Err(e) => json!({ "delta": delta, "error": e.to_string() }),
                };
                rows.push(entry);
            }
            let doc = json!({
                "T": temperature,
                "oscillatory_threshold": kdvb::oscillatory_threshold(temperature),
                "runs": rows,
            });
            write_json(&resolve_out(&out), &doc)?;
            println!("sweep written to {}", resolve_out(&out).display());
            Ok(())
        }

        Command::Validate { temperature, delta, eps_list, alpha, k, half_length, nodes, out } => {
            let spec = apx::WeightedNormSpec::new(alpha, k)?;
            if spec.beyond_smoothness_budget() {
                eprintln!(
                    "warning: k = {k} exceeds the derivative budget of the grid; high-order norms will be noise-dominated"
                );
            }
            let gspec = GridSpec::new(half_length, nodes)?;
            let mut per_eps = Vec::new();
            let mut first_order_sups: Vec<[f64; 3]> = Vec::new();
            for &eps in &eps_list {
                let scaling = rh::ScalingParams::from_delta(eps, delta)?;
                let sp = apx::build_scaled_profile(&scaling, temperature, &gspec)?;
                let basis = apx::build_first_order_set(temperature, delta, eps, &gspec)?;
                let (rem, aligned) = apx::compute_remainder_direct(&sp, &basis)?;
                let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let e_n: Vec<f64> =
                    sp.n().iter().zip(&aligned.n1e).map(|(a, m)| a - 1.0 - eps * m).collect();
                let e_u: Vec<f64> =
                    sp.u().iter().zip(&aligned.u1e).map(|(a, m)| a - eps * m).collect();
                let e_p: Vec<f64> =
                    sp.phi().iter().zip(&aligned.phi1e).map(|(a, m)| a - eps * m).collect();
                let src = apx::compute_r_terms(&aligned, &rem.n_r, &rem.phi_r);
                let (res1, res2) = apx::remainder_equation_residual(&rem, &src, &aligned);
                let xnorm = apx::x_norm_signal(&rem.n_r, &rem.phi_r, &rem.grid, &spec, eps, delta);
                let pair_norm = (apx::h_norm(&rem.n_r, &rem.grid, alpha, k).powi(2)
                    + apx::h_norm(&rem.phi_r, &rem.grid, alpha, k).powi(2))
                .sqrt();
                let r2_ratio = sup(&src.r2) / (eps.sqrt() * xnorm.max(1e-300));
                first_order_sups.push([sup(&e_n), sup(&e_u), sup(&e_p)]);
                per_eps.push(json!({
                    "eps": eps,
                    "first_order_error": { "n": sup(&e_n), "u": sup(&e_u), "phi": sup(&e_p) },
                    "sup_remainder": { "n": rem.sup_n(), "u": rem.sup_u(), "phi": rem.sup_phi() },
                    "x_norm_signal": xnorm,
                    "h_norm_pair_full": pair_norm,
                    "remainder_equation_residuals": [res1, res2],
                    "r2_order_ratio": r2_ratio,
                    "alignment_shift": aligned.shift,
                }));
            }
            let mut orders = Vec::new();
            for w in first_order_sups.windows(2) {
                orders.push(json!({
                    "n": w[0][0] / w[1][0],
                    "u": w[0][1] / w[1][1],
                    "phi": w[0][2] / w[1][2],
                }));
            }
            // fixed point at the middle eps
            let mid = eps_list[eps_list.len() / 2];
            let basis = apx::build_first_order_set(temperature, delta, mid, &gspec)?;
            let fp = apx::solve_remainder_fixed_point(&basis, &spec, 40, 1e-6)?;
            let doc = json!({
                "T": temperature, "delta": delta, "alpha": alpha, "k": k,
                "L": half_length, "nodes": nodes,
                "per_eps": per_eps,
                "error_reduction_per_halving": orders,
                "fixed_point": {
                    "eps": mid,
                    "updates": fp.updates,
                    "contraction_ratios": fp.ratios,
                    "iterations": fp.iterations,
                },
            });
            write_json(&resolve_out(&out), &doc)?;
            println!("validation report written to {}", resolve_out(&out).display());
            Ok(())
        }

        Command::Evolve { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = config::RunConfig::parse(&text)?;
            let dir = out
                .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("traj"));
            let dir = resolve_out(&dir);
            run_evolve(&cfg, &dir)
        }

        Command::Diagnose { state, profile } => {
            let report = diagnose(&state, &profile)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            Ok(())
        }

        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let doc: toml::Value = toml::from_str(&text).map_err(|e| {
                ionshock_core::error::Error::InvalidParameter(format!("sweep config: {e}"))
            })?;
            let runs = doc
                .get("runs")
                .and_then(|r| r.as_array())
                .ok_or_else(|| {
                    ionshock_core::error::Error::InvalidParameter(
                        "sweep config needs a [[runs]] array with name + inline run config".into(),
                    )
                })?
                .clone();
            let root = out.unwrap_or_else(|| PathBuf::from("sweep"));
            let root = resolve_out(&root);
            let mut handles = Vec::new();
            for (i, entry) in runs.into_iter().enumerate() {
                let name = entry
                    .get("name")
                    .and_then(|n| n.as_str())
                    .map(String::from)
                    .unwrap_or_else(|| format!("run{i}"));
                let dir = root.join(&name);
                handles.push(std::thread::spawn(move || -> (String, Result<()>) {
                    let run = (|| -> Result<()> {
                        let text = toml::to_string(&entry).map_err(|e| {
                            ionshock_core::error::Error::InvalidParameter(e.to_string())
                        })?;
                        let cfg = config::RunConfig::parse(&text)?;
                        run_evolve(&cfg, &dir)
                    })();
                    (name, run)
                }));
            }
            let mut failed = false;
            for h in handles {
                let (name, res) = h.join().expect("worker panicked");
                match res {
                    Ok(()) => println!("run '{name}' ok"),
                    Err(e) => {
                        failed = true;
                        eprintln!("run '{name}' failed: {e}");
                    }
                }
            }
            if failed {
                Err(ionshock_core::error::Error::InvalidParameter(
                    "one or more sweep runs failed".into(),
                ))
            } else {
                Ok(())
            }
        }
    }
}

fn run_evolve(cfg: &config::RunConfig, dir: &Path) -> Result<()> {
    let params = cfg.plasma_params()?;
    let pert = cfg.perturbation()?;
    let sol = prof::solve_profile(
        &params,
        cfg.shock.eps,
        &GridSpec::new(cfg.profile_grid.half_length, cfg.profile_grid.nodes)?,
        &prof::SolverOptions::default(),
    )?;
    let profile = evo::to_lagrangian_profile(
        &sol,
        &GridSpec::new(cfg.frame_grid.half_length, cfg.frame_grid.nodes)?,
    )?;
    let state = evo::make_initial(&profile, &pert)?;
    let e0 = energy::initial_energy(&state, &profile).max(1e-300);
    let dt = evo::dt_budget(&state) * cfg.time.cfl.clamp(1e-3, 1.0);

    // snapshot schedule
    let n_snap = cfg.output.snapshots.max(1);
    let snap_times: Vec<f64> =
        (0..=n_snap).map(|i| cfg.time.t_end * i as f64 / n_snap as f64).collect();
    let mut next_snap = 0usize;

    let write_snapshot = |state: &evo::LagrangianState, tag: &str| -> Result<()> {
        let mut csv = CsvWriter::new("evolve-snapshot", vec!["y", "v", "u", "phi"]);
        csv.meta("T", params.temperature)
            .meta("mu", params.mu)
            .meta("lambda", params.lambda)
            .meta("s", state.s)
            .meta("t", state.t)
            .meta("eps", cfg.shock.eps);
        for j in 0..state.v.len() {
            csv.row(&[state.grid.point(j), state.v[j], state.u[j], state.phi[j]]);
        }
        csv.write(&dir.join(format!("snapshot_{tag}.csv")))
    };

    // profile reference for post-hoc diagnosis
    {
        let mut csv = CsvWriter::new("evolve-profile", vec!["y", "v", "u", "phi"]);
        csv.meta("T", params.temperature)
            .meta("mu", params.mu)
            .meta("lambda", params.lambda)
            .meta("s", profile.s)
            .meta("eps", cfg.shock.eps);
        for j in 0..profile.v.len() {
            csv.row(&[profile.grid.point(j), profile.v[j], profile.u[j], profile.phi[j]]);
        }
        csv.write(&dir.join("profile.csv"))?;
    }
    write_snapshot(&state, "t0")?;

    // march in chunks between snapshot times so intermediate fields land on
    // disk; diagnostics accumulate across the chunks
    let mut s = state;
    let mut times = Vec::new();
    let mut reports = Vec::new();
    let mut warning: Option<String> = None;
    while next_snap <= n_snap {
        let target = snap_times[next_snap];
        if s.t < target - 1e-9 {
            let traj = evo::evolve(s, &profile, target, dt, cfg.time.sample_every)?;
            // drop the duplicated first sample on continuation chunks
            let skip = usize::from(!times.is_empty());
            times.extend(traj.times.into_iter().skip(skip));
            reports.extend(traj.reports.into_iter().skip(skip));
            if warning.is_none() {
                warning = traj.boundary_warning;
            }
            s = traj.final_state;
        }
        write_snapshot(&s, &format!("t{}", target.round() as i64))?;
        next_snap += 1;
    }

    let mut csv = CsvWriter::new(
        "evolve-diagnostics",
        vec!["t", "E", "D", "E1", "E1_margin", "sup_perturbation", "mass_v", "mass_u", "leak_Phi", "leak_Psi"],
    );
    csv.meta("T", params.temperature)
        .meta("mu", params.mu)
        .meta("lambda", params.lambda)
        .meta("eps", cfg.shock.eps)
        .meta("E0", e0)
        .meta("dt", dt);
    for r in &reports {
        csv.row(&[
            r.t,
            r.e,
            r.d,
            r.e1,
            r.e1_margin,
            r.sup_perturbation,
            r.mass_v,
            r.mass_u,
            r.leak_phi_big,
            r.leak_psi_big,
        ]);
    }
    csv.write(&dir.join("diagnostics.csv"))?;

    let verdict = energy::stability_verdict(&times, &reports, e0, 1e-6);
    let summary = json!({
        "E0": e0,
        "dt": dt,
        "t_end": cfg.time.t_end,
        "steps": (cfg.time.t_end / dt).round(),
        "verdict": verdict,
        "boundary_warning": warning,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "evolve finished: verdict {} (terminal/peak {:.3}, bounded ratio {:.3}); outputs in {}",
        if verdict.pass { "PASS" } else { "FAIL" },
        verdict.terminal_over_peak,
        verdict.gronwall_max,
        dir.display()
    );
    Ok(())
}

fn diagnose(state_path: &Path, profile_path: &Path) -> Result<serde_json::Value> {
    let (meta_s, cols_s, rows_s) = read_csv(state_path)?;
    let (_, cols_p, rows_p) = read_csv(profile_path)?;
    let want = ["y", "v", "u", "phi"];
    if cols_s != want || cols_p != want {
        return Err(ionshock_core::error::Error::InvalidParameter(format!(
            "snapshot CSVs need columns y,v,u,phi; got {cols_s:?} / {cols_p:?}"
        )));
    }
    if rows_s.len() != rows_p.len() {
        return Err(ionshock_core::error::Error::GridMismatch(format!(
            "state has {} rows, profile {}",
            rows_s.len(),
            rows_p.len()
        )));
    }
    let get = |k: &str| -> Result<f64> {
        meta_s
            .iter()
            .find(|(key, _)| key == k)
            .and_then(|(_, v)| v.parse().ok())
            .ok_or_else(|| {
                ionshock_core::error::Error::InvalidParameter(format!(
                    "snapshot header lacks '{k}'"
                ))
            })
    };
    let params = rh::PlasmaParams::new(get("T")?, get("mu")?, get("lambda")?)?;
    let s = get("s")?;
    let t = get("t").unwrap_or(0.0);
    let n = rows_s.len();
    let half = (rows_s[n - 1][0] - rows_s[0][0]) / 2.0;
    let grid = ionshock_core::grid::Grid::uniform(half, n);

    let col = |rows: &[Vec<f64>], i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let profile = evo::LagrangianProfile {
        grid: grid.clone(),
        v: col(&rows_p, 1),
        u: col(&rows_p, 2),
        phi: col(&rows_p, 3),
        phi_resampled: col(&rows_p, 3),
        s,
        left: rh::LagrangianEquilibrium { v: rows_p[0][1], u: rows_p[0][2], phi: rows_p[0][3] },
        right: rh::LagrangianEquilibrium {
            v: rows_p[n - 1][1],
            u: rows_p[n - 1][2],
            phi: rows_p[n - 1][3],
        },
        params,
    };
    let state = evo::LagrangianState {
        grid,
        v: col(&rows_s, 1),
        u: col(&rows_s, 2),
        phi: col(&rows_s, 3),
        t,
        s,
        params,
        comp_v: vec![0.0; n],
        comp_u: vec![0.0; n],
    };
    let rep = energy::report(&state, &profile, None);
    Ok(serde_json::to_value(&rep).expect("serializable"))
}
