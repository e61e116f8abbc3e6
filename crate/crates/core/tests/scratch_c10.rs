use ionshock_core::evolution::*;
use ionshock_core::grid::GridSpec;
use ionshock_core::profile_ode::{solve_profile, SolverOptions};
use ionshock_core::rankine_hugoniot::PlasmaParams;

#[test]
fn c10_after_resample_fix() {
    let params = PlasmaParams::new(1.0, 1.0, 1.0).unwrap();
    let sol = solve_profile(&params, 0.034, &GridSpec::new(500.0, 8001).unwrap(), &SolverOptions::default()).unwrap();
    let profile = to_lagrangian_profile(&sol, &GridSpec::new(400.0, 4001).unwrap()).unwrap();
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
    let rate = one_step / dt;
    println!("one-step change: {one_step:.4e}; rate: {rate:.4e}");
    let mut s = one;
    let mut done = 1usize;
    for k in [100usize, 1000, 10000] {
        while done < k { s = step(&s, dt).unwrap(); done += 1; }
        let c = ch(&s, &s0);
        println!("after {k} steps: {c:.4e}  (x one-step {:.1}; x rate {:.2})", c / one_step, c / rate);
    }
}
