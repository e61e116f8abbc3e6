//! One-shot probe printing every number the acceptance suite pins.
use ionshock_core::approximation::*;
use ionshock_core::energy::*;
use ionshock_core::evolution::*;
use ionshock_core::grid::GridSpec;
use ionshock_core::profile_ode::{solve_profile, SolverOptions};
use ionshock_core::rankine_hugoniot::{PlasmaParams, ScalingParams};
use std::time::Instant;

fn sup(v: &[f64]) -> f64 { v.iter().fold(0.0f64, |m, x| m.max(x.abs())) }

#[test]
fn pin_c6_c7_c8() {
    let g = GridSpec::new(60.0, 8001).unwrap();
    let t = 0.0;
    // C6
    for &delta in &[0.01] {
        let mut sups = vec![];
        let mut firsts = vec![];
        for &eps in &[0.04, 0.02, 0.01] {
            let sp = build_scaled_profile(&ScalingParams::from_delta(eps, delta).unwrap(), t, &g).unwrap();
            let basis = build_first_order_set(t, delta, eps, &g).unwrap();
            let (rem, al) = compute_remainder_direct(&sp, &basis).unwrap();
            let e1n: Vec<f64> = sp.n().iter().zip(&al.n1e).map(|(a, m)| a - 1.0 - eps * m).collect();
            let e1u: Vec<f64> = sp.u().iter().zip(&al.u1e).map(|(a, m)| a - eps * m).collect();
            let e1p: Vec<f64> = sp.phi().iter().zip(&al.phi1e).map(|(a, m)| a - eps * m).collect();
            println!("C6 eps={eps}: first-order err n={:.4e} u={:.4e} phi={:.4e}; sup nR={:.4e} uR={:.4e} phiR={:.4e}",
                sup(&e1n), sup(&e1u), sup(&e1p), rem.sup_n(), rem.sup_u(), rem.sup_phi());
            firsts.push([sup(&e1n), sup(&e1u), sup(&e1p)]);
            sups.push([rem.sup_n(), rem.sup_u(), rem.sup_phi()]);
        }
        for f in 0..3 {
            println!("C6 field {f}: ratios {:.3} {:.3}; sup variation {:.3}",
                firsts[0][f]/firsts[1][f], firsts[1][f]/firsts[2][f],
                (sups.iter().map(|s| s[f]).fold(0.0f64, f64::max) - sups.iter().map(|s| s[f]).fold(f64::INFINITY, f64::min)) / sups.iter().map(|s| s[f]).fold(0.0f64, f64::max));
        }
    }
    // C7
    let eps = 0.02;
    let b0 = ionshock_core::kdv_burgers::solve_kdvb(
        t, 0.0, ionshock_core::kdv_burgers::FieldKind::N1,
        ionshock_core::kdv_burgers::Variant::Modified { eps, a_eps: ionshock_core::rankine_hugoniot::parametrize_downstream_default(t, eps).unwrap().a_eps },
        &g).unwrap();
    let mut sups7 = vec![];
    for &delta in &[1e-2, 1e-3, 1e-4] {
        let sp = build_scaled_profile(&ScalingParams::from_delta(eps, delta).unwrap(), t, &g).unwrap();
        let basis = build_first_order_set(t, delta, eps, &g).unwrap();
        let (rem, _) = compute_remainder_direct(&sp, &basis).unwrap();
        sups7.push(rem.sup_n());
        // Burgers-based deviation: shift-align b0 against this profile center
        let dev: Vec<f64> = sp.n().iter().zip(&b0.field).map(|(a, m)| a - 1.0 - eps * m).collect();
        let e_proper: Vec<f64> = {
            let (r2, al2) = compute_remainder_direct(&sp, &basis).unwrap();
            let _ = r2;
            sp.n().iter().zip(&al2.n1e).map(|(a, m)| a - 1.0 - eps * m).collect()
        };
        println!("C7 delta={delta}: sup nR={:.4e}; burgers-dev={:.4e}; proper-dev={:.4e}", sups7.last().unwrap(), sup(&dev), sup(&e_proper));
    }
    println!("C7 sup nR variation: {:.3}", (sups7.iter().cloned().fold(0.0f64, f64::max) - sups7.iter().cloned().fold(f64::INFINITY, f64::min)) / sups7.iter().cloned().fold(0.0f64, f64::max));
    // C8: fixed point at default tuple + comparison budget
    let sp = build_scaled_profile(&ScalingParams::from_delta(0.02, 0.01).unwrap(), t, &g).unwrap();
    let basis = build_first_order_set(t, 0.01, 0.02, &g).unwrap();
    let (rem, al) = compute_remainder_direct(&sp, &basis).unwrap();
    let spec = WeightedNormSpec::new(1.0, 2). unwrap();
    let fp = solve_remainder_fixed_point(&al, &spec, 40, 1e-6).unwrap();
    println!("C8 ratios: {:?}", fp.ratios);
    let worst = fp.n_r.iter().zip(&rem.n_r).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    println!("C8 fp-vs-direct sup: {:.4e}", worst);
}

#[test]
fn pin_c9_c10() {
    let params = PlasmaParams::new(1.0, 1.0, 1.0).unwrap();
    let sol = solve_profile(&params, 0.034, &GridSpec::new(500.0, 8001).unwrap(), &SolverOptions::default()).unwrap();
    let profile = to_lagrangian_profile(&sol, &GridSpec::new(400.0, 4001).unwrap()).unwrap();
    // C10 first (quick): unperturbed 1e4 steps
    let zero = PerturbationSpec { shape: PerturbationShape::SlowFamilyBump, amplitude: 0.0, center: 0.0, width: 1.0 };
    let s0 = make_initial(&profile, &zero).unwrap();
    let dt = dt_budget(&s0) * 0.95;
    let one = step(&s0, dt).unwrap();
    let ch = |a: &LagrangianState, b: &LagrangianState| {
        let mut m: f64 = 0.0;
        for j in 0..a.v.len() { m = m.max((a.v[j]-b.v[j]).abs()).max((a.u[j]-b.u[j]).abs()); }
        m
    };
    let one_step = ch(&one, &s0);
    println!("C10 one-step change: {one_step:.4e}");
    let mut s = one;
    let mut done = 1usize;
    for k in [10usize, 100, 1000, 10000] {
        while done < k {
            s = step(&s, dt).unwrap();
            done += 1;
        }
        println!("C10 change after {k} steps: {:.4e} (ratio to one-step {:.2})", ch(&s, &s0), ch(&s, &s0) / one_step);
    }

    // C9 full run
    let mk = |amp: f64| make_initial(&profile, &PerturbationSpec {
        shape: PerturbationShape::SlowFamilyBump, amplitude: amp, center: 40.0, width: 10.0 }).unwrap();
    let probe = mk(0.004);
    let amp = 0.004 * (1e-3 / initial_energy(&probe, &profile)).sqrt();
    let state = mk(amp);
    let e0 = initial_energy(&state, &profile);
    let dt = dt_budget(&state) * 0.95;
    println!("C9 amp={amp:.5} E0={e0:.4e} dt={dt:.4}");
    let t0 = Instant::now();
    let traj = evolve(state, &profile, 4000.0, dt, 400).unwrap();
    println!("C9 t=4000 wall {:?}; warning: {:?}", t0.elapsed(), traj.boundary_warning);
    let mut int_d = 0.0;
    let mut worst_mass: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut g_at = std::collections::BTreeMap::new();
    for i in 0..traj.reports.len() {
        let r = &traj.reports[i];
        if i > 0 { int_d += 0.5 * (r.d + traj.reports[i-1].d) * (traj.times[i] - traj.times[i-1]); }
        worst_mass = worst_mass.max(r.mass_v.abs()).max(r.mass_u.abs());
        min_margin = min_margin.min(r.e1_margin);
        for &tt in &[1000.0, 2000.0, 3000.0, 4000.0f64] {
            if (r.t - tt).abs() < 6.0 { g_at.insert(tt as i64, (r.e + int_d) / e0); }
        }
    }
    println!("C9 worst mass {worst_mass:.3e}; min margin {min_margin:.4}");
    println!("C9 gronwall at 1000/2000/3000/4000: {:?}", g_at);
    let verdict = stability_verdict(&traj.times, &traj.reports, e0, 1e-6);
    println!("C9 verdict {verdict:?}");
}
