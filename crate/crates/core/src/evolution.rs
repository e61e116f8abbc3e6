//! Time-dependent solver for the Lagrangian system in the shock frame.
//!
//! In the frame coordinate y = x - s t both equations are conservation laws,
//!
//! ```text
//! v_t = d/dy ( s v + u )
//! u_t = d/dy ( s u - (T+1)/v + mu u_y / v
//!              + lambda^2 [ (phi_y / v)^2 / 2 - (phi_y / v)_y / v ] )
//! -lambda^2 (phi_y / v)_y = 1 - v e^phi
//! ```
//!
//! and the scheme keeps them in flux form so the perturbation masses are
//! conserved to round-off: Strang splitting with a Heun (2nd-order explicit)
//! substep for transport, pressure and electric forces — the frame advection
//! upwind-biased — around a Crank-Nicolson tridiagonal solve for the viscous
//! flux. The nonlinear Poisson equation is re-solved by Newton (warm start)
//! whenever the potential is needed.

use serde::Serialize;

use crate::calculus;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};

use crate::profile_ode::ProfileSolution;
use crate::rankine_hugoniot::{LagrangianEquilibrium, PlasmaParams};

/// Nodes held at the far-field equilibria on each side; wide enough for the
/// upwind-biased stencils.
const CLAMP: usize = 2;

/// CFL safety factor for the acoustic time-step budget.
pub const CFL_SAFETY: f64 = 0.4;

/// The stationary base profile resampled on the uniform frame grid.
#[derive(Debug, Clone)]
pub struct LagrangianProfile {
    pub grid: Grid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// Potential of the base state, re-solved on this grid so the profile is
    /// self-consistent with the discrete Poisson operator.
    pub phi: Vec<f64>,
    /// Potential carried over from the traveling-wave solve by resampling;
    /// agrees with `phi` to discretization order.
    pub phi_resampled: Vec<f64>,
    pub s: f64,
    pub left: LagrangianEquilibrium,
    pub right: LagrangianEquilibrium,
    pub params: PlasmaParams,
}

/// Transform an Eulerian traveling-wave solution to the mass coordinate
/// (dy = n dxi, anchored at the wave center) and resample it on a uniform
/// frame grid.
pub fn to_lagrangian_profile(sol: &ProfileSolution, grid_spec: &GridSpec) -> Result<LagrangianProfile> {
    let h = sol.grid.h();
    // mass coordinate y(xi), strictly increasing since n > 0; the corrected
    // cumulative keeps the map error at the same order as the cubic field
    // interpolation below
    let mut y_of = calculus::cumtrapz4(&sol.n, h);
    let y_center = y_of[sol.grid.center()];
    for v in &mut y_of {
        *v -= y_center;
    }
    let grid = grid_spec.build();
    if grid.half_length() >= -y_of[0].min(*y_of.last().unwrap()) {
        return Err(Error::InvalidParameter(format!(
            "frame half-length {} exceeds the mass-coordinate span [{:.1}, {:.1}] of the profile",
            grid.half_length(),
            y_of[0],
            y_of.last().unwrap()
        )));
    }
    let mut v = Vec::with_capacity(grid.len());
    let mut u = Vec::with_capacity(grid.len());
    let mut phi = Vec::with_capacity(grid.len());
    let xi0 = sol.grid.point(0);
    let mut lo = 0usize;
    for &y in grid.points() {
        // locate the bracketing xi-interval (y_of is monotone), then polish
        // the inverse map with one Newton step (dy/dxi = n) and sample the
        // fields with local cubics so the base state sits well below the
        // stepper's own truncation error
        while lo + 2 < y_of.len() && y_of[lo + 1] < y {
            lo += 1;
        }
        let t = (y - y_of[lo]) / (y_of[lo + 1] - y_of[lo]);
        let mut xi = sol.grid.point(lo) + t * h;
        for _ in 0..2 {
            let y_here = calculus::interp_cubic(&y_of, xi0, h, xi);
            let n_here = calculus::interp_cubic(&sol.n, xi0, h, xi);
            xi -= (y_here - y) / n_here;
        }
        v.push(1.0 / calculus::interp_cubic(&sol.n, xi0, h, xi));
        u.push(calculus::interp_cubic(&sol.u, xi0, h, xi));
        phi.push(calculus::interp_cubic(&sol.phi, xi0, h, xi));
    }
    let left = LagrangianEquilibrium { v: 1.0 / sol.left.n, u: sol.left.u, phi: sol.left.phi };
    let right = LagrangianEquilibrium { v: 1.0 / sol.right.n, u: sol.right.u, phi: sol.right.phi };
    // pin the clamped zone to the exact far-field states (the resampled tail
    // sits ~1e-12 off them, which would leave a tiny flux imbalance across
    // the domain and a secular drift of the conserved sums)
    let nn = grid.len();
    for j in 0..CLAMP {
        v[j] = left.v;
        u[j] = left.u;
        phi[j] = left.phi;
        v[nn - 1 - j] = right.v;
        u[nn - 1 - j] = right.u;
        phi[nn - 1 - j] = right.phi;
    }
    let (phi_solved, _) = poisson_solve(&v, sol.params.lambda, &phi, (left.phi, right.phi), &grid)?;
    Ok(LagrangianProfile {
        grid,
        v,
        u,
        phi: phi_solved,
        phi_resampled: phi,
        s: sol.s,
        left,
        right,
        params: sol.params,
    })
}

/// Instantaneous simulation state on the frame grid.
///
/// The compensation arrays carry the sub-ulp residue of the time updates
/// (Kahan accumulation): in the profile tails the per-step tendencies sit
/// below one ulp of v, and naive accumulation would shed them with a
/// coherent sign, bleeding the conserved sums over long runs.
#[derive(Debug, Clone, Serialize)]
pub struct LagrangianState {
    #[serde(skip)]
    pub grid: Grid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub t: f64,
    pub s: f64,
    pub params: PlasmaParams,
    #[serde(skip)]
    pub comp_v: Vec<f64>,
    #[serde(skip)]
    pub comp_u: Vec<f64>,
}

/// Compensated x[j] += dx with carry c[j] (Kahan/Neumaier two-sum).
#[inline]
fn kahan_add(x: &mut f64, c: &mut f64, dx: f64) {
    let y = dx + *c;
    let t = *x + y;
    *c = if x.abs() >= y.abs() { (*x - t) + y } else { (y - t) + *x };
    *x = t;
}

/// Shape family for zero-mass initial perturbations.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum PerturbationShape {
    /// amplitude * B'(y) on both v and u, with a Gaussian bump B:
    /// analytically zero mass.
    DerivativeOfBump,
    /// Two opposite bumps at center +- width, on both v and u.
    Dipole,
    /// amplitude * B'(y) on v with u projected onto the slow characteristic
    /// family (du = -sqrt(T+1)/vbar * dv). The fast family leaves the shock
    /// frame at speed s + c and reaches any feasible boundary early in a
    /// long run; a slow-family perturbation (frame speed s - c, barely
    /// positive for a weak shock) stays interior for the whole experiment,
    /// which keeps the truncated-domain masses conserved to round-off.
    SlowFamilyBump,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerturbationSpec {
    pub shape: PerturbationShape,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl PerturbationSpec {
    fn eval(&self, y: f64) -> f64 {
        let r = (y - self.center) / self.width;
        match self.shape {
            PerturbationShape::DerivativeOfBump | PerturbationShape::SlowFamilyBump => {
                self.amplitude * (-2.0 * r / self.width) * (-r * r).exp()
            }
            PerturbationShape::Dipole => {
                let rm = (y - self.center + self.width) / (0.5 * self.width);
                let rp = (y - self.center - self.width) / (0.5 * self.width);
                self.amplitude * ((-rm * rm).exp() - (-rp * rp).exp())
            }
        }
    }
}

/// Newton solve of the nonlinear Poisson equation
/// `-lambda^2 (phi_y / v)_y = 1 - v e^phi` with Dirichlet far-field values.
/// Returns the potential and the residual history.
pub fn poisson_solve(
    v: &[f64],
    lambda: f64,
    phi_guess: &[f64],
    bc: (f64, f64),
    grid: &Grid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = grid.len();
    let h = grid.h();
    let l2 = lambda * lambda;
    let mut phi = phi_guess.to_vec();
    phi[0] = bc.0;
    phi[nn - 1] = bc.1;

    // the Newton matrix is tridiagonal and strictly diagonally dominant for
    // v > 0, so the Thomas algorithm applies; face conductivities are fixed
    // during the iteration and one exp() pass per iteration is shared
    // between the residual and the Jacobian
    let ih2 = l2 / (h * h);
    let mut cond = vec![0.0; nn]; // cond[j] = l2 / (h^2 v_{j+1/2})
    for j in 0..nn - 1 {
        cond[j] = ih2 * 2.0 / (v[j] + v[j + 1]);
    }
    let mut ex: Vec<f64> = phi.iter().map(|p| p.exp()).collect();
    let mut r = vec![0.0; nn];
    let mut lower = vec![0.0; nn];
    let mut diag = vec![1.0; nn];
    let mut upper = vec![0.0; nn];
    let mut scratch = Vec::new();

    let eval_residual = |phi: &[f64], ex: &[f64], r: &mut [f64]| -> f64 {
        r[0] = 0.0;
        r[nn - 1] = 0.0;
        let mut rn = 0.0f64;
        for j in 1..nn - 1 {
            let flux = cond[j] * (phi[j + 1] - phi[j]) - cond[j - 1] * (phi[j] - phi[j - 1]);
            let val = flux + 1.0 - v[j] * ex[j];
            r[j] = val;
            rn = rn.max(val.abs());
        }
        rn
    };

    let mut history = Vec::new();
    let mut rn = eval_residual(&phi, &ex, &mut r);
    history.push(rn);
    for it in 0..30 {
        if rn < 1e-10 {
            return Ok((phi, history));
        }
        diag[0] = 1.0;
        diag[nn - 1] = 1.0;
        for j in 1..nn - 1 {
            upper[j] = cond[j];
            lower[j] = cond[j - 1];
            diag[j] = -(cond[j] + cond[j - 1]) - v[j] * ex[j];
        }
        let mut dphi = r.clone();
        crate::linalg::solve_tridiagonal(&lower, &diag, &upper, &mut dphi, &mut scratch);
        for j in 1..nn - 1 {
            phi[j] -= dphi[j];
            ex[j] = phi[j].exp();
        }
        rn = eval_residual(&phi, &ex, &mut r);
        history.push(rn);
        if !rn.is_finite() {
            return Err(Error::NewtonDiverged { iterations: it + 1, residual: rn });
        }
    }
    if rn < 1e-10 {
        Ok((phi, history))
    } else {
        Err(Error::NewtonDiverged { iterations: 30, residual: rn })
    }
}

/// Build the initial state: profile plus a zero-mass perturbation on v and u,
/// the discrete sums projected to exact zero, and the potential solved.
pub fn make_initial(profile: &LagrangianProfile, pert: &PerturbationSpec) -> Result<LagrangianState> {
    let grid = &profile.grid;
    let l = grid.half_length();
    if pert.amplitude != 0.0 && (l - pert.center.abs()) < 6.0 * pert.width.abs().max(1e-12) {
        return Err(Error::PerturbationTooWide(format!(
            "center {} width {} against half-length {l}",
            pert.center, pert.width
        )));
    }
    let mut dv: Vec<f64> = grid.points().iter().map(|&y| pert.eval(y)).collect();
    let du: Vec<f64> = match pert.shape {
        PerturbationShape::SlowFamilyBump => {
            let c = (profile.params.temperature + 1.0).sqrt();
            dv.iter()
                .zip(&profile.v)
                .map(|(d, vb)| -c / vb * d)
                .collect()
        }
        _ => dv.clone(),
    };
    // rank-1 projection to exact discrete zero mass: subtract c * g with a
    // unit-mass bump g localized at the perturbation
    let g: Vec<f64> = grid
        .points()
        .iter()
        .map(|&y| {
            let r = (y - pert.center) / (1.5 * pert.width.abs().max(1e-12));
            (-r * r).exp()
        })
        .collect();
    let gm = calculus::trapz(&g, grid.h());
    let project = |f: &mut Vec<f64>| {
        let m = calculus::trapz(f, grid.h());
        let c = m / gm;
        for (fi, gi) in f.iter_mut().zip(&g) {
            *fi -= c * gi;
        }
    };
    let mut du = du;
    project(&mut dv);
    project(&mut du);

    let v: Vec<f64> = profile.v.iter().zip(&dv).map(|(a, b)| a + b).collect();
    let u: Vec<f64> = profile.u.iter().zip(&du).map(|(a, b)| a + b).collect();
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidParameter(
            "perturbation drives the specific volume non-positive".into(),
        ));
    }
    let (phi, _) = poisson_solve(
        &v,
        profile.params.lambda,
        &profile.phi,
        (profile.left.phi, profile.right.phi),
        grid,
    )?;
    let nn = grid.len();
    Ok(LagrangianState {
        grid: grid.clone(),
        v,
        u,
        phi,
        t: 0.0,
        s: profile.s,
        params: profile.params,
        comp_v: vec![0.0; nn],
        comp_u: vec![0.0; nn],
    })
}

/// Acoustic time-step budget of a state.
pub fn dt_budget(state: &LagrangianState) -> f64 {
    let umax = state.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let vmin = state.v.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let c = (state.params.temperature + 1.0).sqrt() / vmin;
    CFL_SAFETY * state.grid.h() / (state.s + umax + c)
}

/// Nodal electric-force potential: lambda^2 [ w^2/2 - w_y / v ] with
/// w = phi_y / v; its y-derivative is the electric term of the momentum flux.
fn electric_nodal(v: &[f64], phi: &[f64], l2: f64, h: f64) -> Vec<f64> {
    let n = v.len();
    let dphi = calculus::d1(phi, h);
    let w: Vec<f64> = dphi.iter().zip(v).map(|(a, b)| a / b).collect();
    let dw = calculus::d1(&w, h);
    (0..n)
        .map(|j| l2 * (0.5 * w[j] * w[j] - dw[j] / v[j]))
        .collect()
}

/// One explicit transport/pressure/electric right-hand side in flux form.
/// Returns d(v)/dt and d(u)/dt on the interior update range.
fn explicit_rhs(
    v: &[f64],
    u: &[f64],
    phi: &[f64],
    s: f64,
    t1: f64,
    l2: f64,
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    // advective parts upwinded from the right (frame velocity is -s < 0),
    // second-order biased reconstruction at faces j+1/2
    let upwind = |q: &[f64], j: usize| 1.5 * q[j + 1] - 0.5 * q[j + 2];
    let e = electric_nodal(v, phi, l2, h);
    // face fluxes for faces j+1/2, j = 1..n-3
    let mut fv = vec![0.0; n]; // indexed by left node of the face
    let mut fu = vec![0.0; n];
    for j in 1..n - 2 {
        fv[j] = s * upwind(v, j) + 0.5 * (u[j] + u[j + 1]);
        fu[j] = s * upwind(u, j) - t1 * 0.5 * (1.0 / v[j] + 1.0 / v[j + 1])
            + 0.5 * (e[j] + e[j + 1]);
    }
    // the faces bounding the update region carry the equilibrium fluxes of
    // the clamped end states, which the jump conditions make equal across
    // the domain: the total masses are then invariant to round-off and
    // outgoing waves reflect instead of puncturing the budget
    fv[CLAMP - 1] = s * v[0] + u[0];
    fu[CLAMP - 1] = s * u[0] - t1 / v[0];
    fv[n - CLAMP - 1] = s * v[n - 1] + u[n - 1];
    fu[n - CLAMP - 1] = s * u[n - 1] - t1 / v[n - 1];
    let mut dv = vec![0.0; n];
    let mut du = vec![0.0; n];
    for j in CLAMP..n - CLAMP {
        dv[j] = (fv[j] - fv[j - 1]) / h;
        du[j] = (fu[j] - fu[j - 1]) / h;
    }
    (dv, du)
}

/// One full IMEX step of size dt (Strang: explicit half, implicit viscous
/// full, explicit half), with the Poisson equation re-solved after the
/// update. Optional forcing terms support convergence studies.
pub fn step(state: &LagrangianState, dt: f64) -> Result<LagrangianState> {
    let budget = dt_budget(state) * 1.000001;
    if dt > budget {
        return Err(Error::CflViolation { dt, budget });
    }
    let grid = &state.grid;
    let h = grid.h();
    let n = grid.len();
    let t1 = state.params.temperature + 1.0;
    let l2 = state.params.lambda * state.params.lambda;
    let bc = (state.phi[0], state.phi[n - 1]);

    let mut v = state.v.clone();
    let mut u = state.u.clone();
    let mut phi = state.phi.clone();
    let mut comp_v = if state.comp_v.len() == n { state.comp_v.clone() } else { vec![0.0; n] };
    let mut comp_u = if state.comp_u.len() == n { state.comp_u.clone() } else { vec![0.0; n] };

    // `trend` extrapolates the potential to the predictor state using the
    // drift seen so far in this step; good stage guesses keep the Poisson
    // Newton at one iteration
    let half_explicit = |v: &mut Vec<f64>,
                         u: &mut Vec<f64>,
                         phi: &mut Vec<f64>,
                         comp_v: &mut [f64],
                         comp_u: &mut [f64],
                         trend: Option<&[f64]>|
     -> Result<()> {
        let tau = 0.5 * dt;
        // Heun: full predictor then trapezoidal corrector
        let (k1v, k1u) = explicit_rhs(v, u, phi, state.s, t1, l2, h);
        let vp: Vec<f64> = v.iter().zip(&k1v).map(|(a, k)| a + tau * k).collect();
        let up: Vec<f64> = u.iter().zip(&k1u).map(|(a, k)| a + tau * k).collect();
        let guess_p: Vec<f64> = match trend {
            Some(old) => phi.iter().zip(old).map(|(a, b)| 2.0 * a - b).collect(),
            None => phi.clone(),
        };
        let (phip, _) = poisson_solve(&vp, state.params.lambda, &guess_p, bc, grid)?;
        let (k2v, k2u) = explicit_rhs(&vp, &up, &phip, state.s, t1, l2, h);
        for j in CLAMP..n - CLAMP {
            kahan_add(&mut v[j], &mut comp_v[j], 0.5 * tau * (k1v[j] + k2v[j]));
            kahan_add(&mut u[j], &mut comp_u[j], 0.5 * tau * (k1u[j] + k2u[j]));
        }
        // the corrected state is close to the predictor/current average
        let guess_c: Vec<f64> = phi.iter().zip(&phip).map(|(a, b)| 0.5 * (a + b)).collect();
        let (phin, _) = poisson_solve(v, state.params.lambda, &guess_c, bc, grid)?;
        *phi = phin;
        Ok(())
    };

    let phi0 = phi.clone();
    half_explicit(&mut v, &mut u, &mut phi, &mut comp_v, &mut comp_u, None)?;
    check_positivity(&v, state.t)?;

    // Crank-Nicolson viscous solve on u with v frozen; the operator is
    // tridiagonal and diagonally dominant, so Thomas applies
    {
        let mu = state.params.mu;
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut scratch = Vec::new();
        for j in 0..n {
            if j < CLAMP || j >= n - CLAMP {
                diag[j] = 1.0;
                rhs[j] = u[j];
            } else {
                // zero viscous flux through the update-region edge faces
                // keeps the momentum sum exactly invariant
                let kp = if j == n - CLAMP - 1 {
                    0.0
                } else {
                    mu / (0.5 * (v[j] + v[j + 1]))
                };
                let km = if j == CLAMP {
                    0.0
                } else {
                    mu / (0.5 * (v[j] + v[j - 1]))
                };
                let lap = (kp * (u[j + 1] - u[j]) - km * (u[j] - u[j - 1])) / (h * h);
                lower[j] = -0.5 * dt * km / (h * h);
                upper[j] = -0.5 * dt * kp / (h * h);
                diag[j] = 1.0 + 0.5 * dt * (kp + km) / (h * h);
                rhs[j] = u[j] + 0.5 * dt * lap;
            }
        }
        crate::linalg::solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
        // fold the viscous update through the compensated accumulator too
        for j in CLAMP..n - CLAMP {
            let delta = rhs[j] - u[j];
            kahan_add(&mut u[j], &mut comp_u[j], delta);
        }
    }

    half_explicit(&mut v, &mut u, &mut phi, &mut comp_v, &mut comp_u, Some(&phi0))?;
    check_positivity(&v, state.t)?;

    Ok(LagrangianState {
        grid: grid.clone(),
        v,
        u,
        phi,
        t: state.t + dt,
        s: state.s,
        params: state.params,
        comp_v,
        comp_u,
    })
}

fn check_positivity(v: &[f64], t: f64) -> Result<()> {
    if let Some((node, &min_v)) = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
    {
        if min_v <= 0.0 {
            return Err(Error::PositivityLost { t, min_v, node });
        }
    }
    Ok(())
}

/// Time series of diagnostics produced by [`evolve`].
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub reports: Vec<crate::energy::EnergyReport>,
    #[serde(skip)]
    pub final_state: LagrangianState,
    /// Largest perturbation magnitude seen in the outer 20% of the domain.
    pub boundary_clearance_defect: f64,
    /// Set when outgoing waves visibly crossed into the outer zone: the
    /// fast characteristic family leaves the shock at speed s + c, so this
    /// happens within t of order L/(s+c) on any feasible domain. The run
    /// aborts only when the arrival is large enough to corrupt the data.
    pub boundary_warning: Option<String>,
}

/// March the state to t_end, sampling energy diagnostics every
/// `sample_every` steps against the base profile.
pub fn evolve(
    state: LagrangianState,
    profile: &LagrangianProfile,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let mut s = state;
    let mut times = Vec::new();
    let mut reports = Vec::new();
    let mut prev_phi: Option<(f64, Vec<f64>)> = None;
    let mut clearance: f64 = 0.0;
    let mut warning: Option<String> = None;
    let zone = s.grid.len() / 5;

    // v,u only: the potential carries a small systematic solve-vs-profile
    // offset, not transported signal
    let initial_sup = s
        .v
        .iter()
        .zip(&profile.v)
        .chain(s.u.iter().zip(&profile.u))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let sample = |s: &LagrangianState,
                      prev_phi: &mut Option<(f64, Vec<f64>)>,
                      times: &mut Vec<f64>,
                      reports: &mut Vec<crate::energy::EnergyReport>| {
        let phi_t = prev_phi.as_ref().map(|(t0, p0)| {
            let dt = s.t - t0;
            s.phi
                .iter()
                .zip(p0)
                .map(|(a, b)| (a - b) / dt)
                .collect::<Vec<f64>>()
        });
        let rep = crate::energy::report(s, profile, phi_t.as_deref());
        times.push(s.t);
        reports.push(rep);
        *prev_phi = Some((s.t, s.phi.clone()));
    };

    sample(&s, &mut prev_phi, &mut times, &mut reports);
    let mut step_count = 0usize;
    while s.t < t_end - 1e-12 {
        let dt_now = dt.min(t_end - s.t);
        s = step(&s, dt_now)?;
        step_count += 1;
        if step_count % sample_every == 0 || s.t >= t_end - 1e-12 {
            sample(&s, &mut prev_phi, &mut times, &mut reports);
            // boundary clearance monitor
            let n = s.grid.len();
            let mut outer: f64 = 0.0;
            for j in (0..zone).chain(n - zone..n) {
                outer = outer
                    .max((s.v[j] - profile.v[j]).abs())
                    .max((s.u[j] - profile.u[j]).abs());
            }
            clearance = clearance.max(outer);
            // genuine wave arrival: well above the steady-state drift floor
            // and a visible fraction of the initial signal
            if outer > (1e-2 * initial_sup).max(1e-7) && warning.is_none() {
                warning = Some(format!(
                    "outgoing waves reached the boundary zone at t = {:.2} (level {outer:.3e})",
                    s.t
                ));
            }
            // abort only when the boundary zone carries a disturbance of the
            // order of the shock jump itself (clamping then fabricates state)
            let jump = (profile.right.v - profile.left.v).abs();
            if outer > 0.1 * jump {
                return Err(Error::PerturbationTooWide(format!(
                    "boundary-zone signal {outer:.3e} at t = {:.2} invalidates the run",
                    s.t
                )));
            }
        }
    }
    Ok(Trajectory {
        times,
        reports,
        final_state: s,
        boundary_clearance_defect: clearance,
        boundary_warning: warning,
    })
}

/// Max over the grid of the perturbation magnitude in all three fields.
pub fn sup_perturbation(state: &LagrangianState, profile: &LagrangianProfile) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..state.v.len() {
        m = m
            .max((state.v[j] - profile.v[j]).abs())
            .max((state.u[j] - profile.u[j]).abs())
            .max((state.phi[j] - profile.phi[j]).abs());
    }
    m
}

