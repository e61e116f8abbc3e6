//! Traveling-wave shock profiles of the full Navier-Stokes-Poisson system.
//!
//! The steady profile in the wave coordinate xi = x - s t satisfies, after
//! integrating the mass and momentum equations from the upstream state and
//! writing Z = exp(phi), W = dphi/dxi,
//!
//! ```text
//! dn/dxi = n^2/(mu s) { (T - s^2)(n-1) + s^2 (n-1)^2 / n - lambda^2 W^2 / 2 + Z - 1 }
//! dZ/dxi = Z W
//! dW/dxi = -(n - Z)/lambda^2
//! ```
//!
//! The boundary-value solver below discretizes the equivalent two-field form
//! (n and phi; u is recovered exactly from the mass integral u = s(1 - 1/n))
//! with second-order centered collocation and damped Newton. All four
//! boundary values are clamped to the far-field equilibria, translation is
//! pinned by the phase condition n(0) = (n_- + n_+)/2, and one scalar float
//! (a constant absorbed into the momentum integral, zero in the continuum
//! limit) keeps the truncated system square. The float enters every
//! collocation row, so each Newton step is a bordered banded solve.

use serde::Serialize;

use crate::calculus;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::linalg::{solve_bordered, BandedMatrix};
use crate::rankine_hugoniot::{
    parametrize_downstream_default, EquilibriumState, PlasmaParams,
};

/// Point value of the three-field phase-space representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    /// Ion density, > 0.
    pub n: f64,
    /// Exponentiated potential e^phi, > 0.
    pub z: f64,
    /// Potential slope dphi/dxi.
    pub w: f64,
}

impl ProfileState {
    pub fn new(n: f64, z: f64, w: f64) -> Result<Self> {
        if !(n > 0.0) || !(z > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "profile state needs n > 0 and Z > 0, got n = {n}, Z = {z}"
            )));
        }
        Ok(Self { n, z, w })
    }
}

/// Right-hand side of the first-order profile system at one phase point.
pub fn profile_rhs(state: &ProfileState, params: &PlasmaParams, s: f64) -> Result<[f64; 3]> {
    if !(state.n > 0.0) || !(state.z > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile_rhs needs n > 0 and Z > 0, got n = {}, Z = {}",
            state.n, state.z
        )));
    }
    if s == 0.0 {
        return Err(Error::InvalidParameter("wave speed must be nonzero".into()));
    }
    let t = params.temperature;
    let (n, z, w) = (state.n, state.z, state.w);
    let l2 = params.lambda * params.lambda;
    let g = (t - s * s) * (n - 1.0) + s * s * (n - 1.0) * (n - 1.0) / n - 0.5 * l2 * w * w + z
        - 1.0;
    Ok([n * n / (params.mu * s) * g, z * w, -(n - z) / l2])
}

/// Closed-form eigenvalues of the extended-system Jacobian at the sonic
/// reference state: (sigma1, 0, 0, sigma4) with sigma1 < 0 < sigma4.
pub fn jacobian_eigenvalues_reference(params: &PlasmaParams) -> [f64; 4] {
    let c = (params.temperature + 1.0).sqrt();
    let k = 1.0 / (2.0 * params.mu * c);
    let r = (k * k + 1.0 / (params.lambda * params.lambda)).sqrt();
    [-k - r, 0.0, 0.0, -k + r]
}

/// The 4x4 Jacobian of the extended system at the sonic reference state,
/// assembled numerically for cross-checks.
pub fn extended_jacobian(params: &PlasmaParams) -> [[f64; 4]; 4] {
    let a = 1.0 / (params.mu * (params.temperature + 1.0).sqrt());
    let b = 1.0 / (params.lambda * params.lambda);
    [
        [-a, a, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [-b, b, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ]
}

/// det(M) of a 4x4 by Gaussian elimination with partial pivoting.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for k in 0..4 {
        let mut p = k;
        for i in k + 1..4 {
            if a[i][k].abs() > a[p][k].abs() {
                p = i;
            }
        }
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..4 {
            let f = a[i][k] / a[k][k];
            for j in k..4 {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Leading term of the reduced-flow derivative at the upstream critical
/// point: sqrt(T+1) (1 - n_+) / (2 mu).
pub fn g_dot_zero(params: &PlasmaParams, n_plus: f64) -> f64 {
    (params.temperature + 1.0).sqrt() * (1.0 - n_plus) / (2.0 * params.mu)
}

/// Slow (center-direction) linearized rate at the upstream state for wave
/// speed `s`: the small positive root of
/// (a - sigma)(sigma^2 - c) = b c, a = (T - s^2)/(mu s), b = 1/(mu s),
/// c = 1/lambda^2.
///
/// This is the rate at which the profile actually leaves the upstream state;
/// its leading small-amplitude form is (T+1-s^2)/(mu s).
pub fn upstream_slow_rate(params: &PlasmaParams, s: f64) -> f64 {
    let t = params.temperature;
    let a = (t - s * s) / (params.mu * s);
    let b = 1.0 / (params.mu * s);
    let c = 1.0 / (params.lambda * params.lambda);
    let chi = |sig: f64| (a - sig) * (sig * sig - c) - b * c;
    let guess = a + b;
    calculus::bisect(chi, 1e-14, 3.0 * guess.max(1e-12), 1e-15).unwrap_or(guess)
}

/// Slow linearized rate at the downstream state (negative: the profile decays
/// onto it); computed from the three-field Jacobian at (n_+, n_+, 0).
pub fn downstream_slow_rate(params: &PlasmaParams, s: f64, n_plus: f64) -> f64 {
    let t = params.temperature;
    let l2 = params.lambda * params.lambda;
    let dgdn = (t - s * s)
        + s * s * (2.0 * (n_plus - 1.0) / n_plus
            - (n_plus - 1.0) * (n_plus - 1.0) / (n_plus * n_plus));
    let a = n_plus * n_plus * dgdn / (params.mu * s);
    let b = n_plus * n_plus / (params.mu * s);
    let chi = |sig: f64| (a - sig) * (sig * sig - n_plus / l2) - b * n_plus / l2;
    let guess = a + b; // < 0 for a compressive 2-shock
    calculus::bisect(chi, 3.0 * guess.min(-1e-12), -1e-14, 1e-15).unwrap_or(guess)
}

/// Options for [`solve_profile`].
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Newton converges when the update max-norm drops below this.
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    /// Relative boundary flatness above which DomainTooShort is raised.
    pub boundary_tol: f64,
    /// Amplitude cap as a fraction of the sound speed.
    pub max_eps_fraction: f64,
    /// Continuation ladder depth when the direct solve fails.
    pub max_continuation_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iter: 25,
            boundary_tol: 1e-5,
            max_eps_fraction: crate::rankine_hugoniot::DEFAULT_MAX_EPS_FRACTION,
            max_continuation_halvings: 6,
        }
    }
}

/// A converged traveling-wave profile on a truncated symmetric grid.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSolution {
    #[serde(skip)]
    pub grid: Grid,
    pub n: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub s: f64,
    pub left: EquilibriumState,
    pub right: EquilibriumState,
    pub params: PlasmaParams,
    /// Max residual of the momentum and Poisson collocation equations at
    /// convergence (the float constant excluded, so this measures the
    /// distance to the true equations).
    pub residual_norm: f64,
    /// Relative flatness defect next to the clamped boundaries.
    pub boundary_defect: f64,
    /// Constant absorbed into the momentum integral by the truncated
    /// boundaries; vanishes with the mesh and the truncation error.
    pub integral_constant: f64,
    pub newton_iterations: usize,
}

impl ProfileSolution {
    /// Node-to-node decrease of n, u and phi, allowing ties only at the
    /// round-off floor: in the far tails the analytic decrement shrinks below
    /// one ulp of the density (which is O(1)), where strict `<` is not
    /// representable in f64.
    pub fn is_monotone(&self) -> bool {
        self.monotonicity_defect() <= 8.0 * f64::EPSILON
    }

    /// Largest node-to-node increase of any field (absolute; all three
    /// fields are O(1) here). Zero or a few ulps for a structurally
    /// monotone profile.
    pub fn monotonicity_defect(&self) -> f64 {
        let defect = |f: &[f64]| {
            f.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        defect(&self.n).max(defect(&self.u)).max(defect(&self.phi)).max(0.0)
    }

    /// max_i |u_i - s (1 - 1/n_i)|; zero to round-off by construction.
    pub fn mass_integral_defect(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.n)
            .map(|(&u, &n)| (u - self.s * (1.0 - 1.0 / n)).abs())
            .fold(0.0, f64::max)
    }

    /// Empirical constants (min, max) of the ratio phi' / n' over interior
    /// nodes where the slope is resolved above the round-off floor; both must
    /// be positive for a structurally sound 2-shock.
    pub fn slope_ratio_bounds(&self) -> (f64, f64) {
        let h = self.grid.h();
        let dn = calculus::d1(&self.n, h);
        let dphi = calculus::d1(&self.phi, h);
        // centered differences of ulp-level tail values are pure noise;
        // 1e-12 sits far above eps_mach/h and far below the interior slope
        let floor = 1e-12;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 1..self.n.len() - 1 {
            if dn[i] < -floor && dphi[i] < 0.0 {
                let r = dphi[i] / dn[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }
}

struct Discretization<'a> {
    grid: &'a Grid,
    params: &'a PlasmaParams,
    s: f64,
    n_plus: f64,
    phi_plus: f64,
}

impl Discretization<'_> {
    fn n_of(x: &[f64], j: usize) -> f64 {
        x[2 * j]
    }
    fn phi_of(x: &[f64], j: usize) -> f64 {
        x[2 * j + 1]
    }

    /// Momentum collocation residual at interior node j (with the float
    /// constant `kappa` folded into the integral).
    fn e1(&self, x: &[f64], kappa: f64, j: usize) -> f64 {
        let h = self.grid.h();
        let t = self.params.temperature;
        let s = self.s;
        let l2 = self.params.lambda * self.params.lambda;
        let n = Self::n_of(x, j);
        let np = (Self::n_of(x, j + 1) - Self::n_of(x, j - 1)) / (2.0 * h);
        let pp = (Self::phi_of(x, j + 1) - Self::phi_of(x, j - 1)) / (2.0 * h);
        let g = (t - s * s) * (n - 1.0) + s * s * (n - 1.0) * (n - 1.0) / n
            + Self::phi_of(x, j).exp()
            - 1.0
            - 0.5 * l2 * pp * pp;
        np - n * n / (self.params.mu * s) * (g + kappa)
    }

    /// Poisson collocation residual at interior node j.
    fn e2(&self, x: &[f64], j: usize) -> f64 {
        let h = self.grid.h();
        let l2 = self.params.lambda * self.params.lambda;
        let pdd = (Self::phi_of(x, j + 1) - 2.0 * Self::phi_of(x, j) + Self::phi_of(x, j - 1))
            / (h * h);
        l2 * pdd + Self::n_of(x, j) - Self::phi_of(x, j).exp()
    }

    /// Residual of the clamped block; the phase condition is the border row.
    fn residual(&self, x: &[f64], kappa: f64) -> Vec<f64> {
        let nn = self.grid.len();
        let mut f = vec![0.0; 2 * nn];
        f[0] = Self::n_of(x, 0) - 1.0;
        f[1] = Self::phi_of(x, 0);
        f[2 * (nn - 1)] = Self::n_of(x, nn - 1) - self.n_plus;
        f[2 * (nn - 1) + 1] = Self::phi_of(x, nn - 1) - self.phi_plus;
        for j in 1..nn - 1 {
            f[2 * j] = self.e1(x, kappa, j);
            f[2 * j + 1] = self.e2(x, j);
        }
        f
    }

    fn phase_residual(&self, x: &[f64]) -> f64 {
        Self::n_of(x, self.grid.center()) - 0.5 * (1.0 + self.n_plus)
    }

    /// Sensitivity of the clamped block to the float constant.
    fn border_column(&self, x: &[f64]) -> Vec<f64> {
        let nn = self.grid.len();
        let mut u = vec![0.0; 2 * nn];
        for j in 1..nn - 1 {
            let n = Self::n_of(x, j);
            u[2 * j] = -n * n / (self.params.mu * self.s);
        }
        u
    }

    fn jacobian(&self, x: &[f64]) -> BandedMatrix {
        let nn = self.grid.len();
        let h = self.grid.h();
        let t = self.params.temperature;
        let s = self.s;
        let mu = self.params.mu;
        let l2 = self.params.lambda * self.params.lambda;
        // interleaved layout [n_j, phi_j]: stencils reach one node out
        let mut a = BandedMatrix::zeros(2 * nn, 3, 3);

        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        a.set(2 * (nn - 1), 2 * (nn - 1), 1.0);
        a.set(2 * (nn - 1) + 1, 2 * (nn - 1) + 1, 1.0);

        for j in 1..nn - 1 {
            let row = 2 * j;
            let n = Self::n_of(x, j);
            let pp = (Self::phi_of(x, j + 1) - Self::phi_of(x, j - 1)) / (2.0 * h);
            let g = (t - s * s) * (n - 1.0) + s * s * (n - 1.0) * (n - 1.0) / n
                + Self::phi_of(x, j).exp()
                - 1.0
                - 0.5 * l2 * pp * pp;
            let dg_dn = (t - s * s)
                + s * s * (2.0 * (n - 1.0) / n - (n - 1.0) * (n - 1.0) / (n * n));
            a.add(row, 2 * (j + 1), 1.0 / (2.0 * h));
            a.add(row, 2 * (j - 1), -1.0 / (2.0 * h));
            a.add(row, 2 * j, -(2.0 * n * g + n * n * dg_dn) / (mu * s));
            a.add(row, 2 * j + 1, -n * n * Self::phi_of(x, j).exp() / (mu * s));
            let dpp = n * n * l2 * pp / (mu * s) / (2.0 * h);
            a.add(row, 2 * (j + 1) + 1, dpp);
            a.add(row, 2 * (j - 1) + 1, -dpp);

            let row_p = 2 * j + 1;
            a.add(row_p, 2 * (j + 1) + 1, l2 / (h * h));
            a.add(row_p, 2 * (j - 1) + 1, l2 / (h * h));
            a.add(row_p, 2 * j + 1, -2.0 * l2 / (h * h) - Self::phi_of(x, j).exp());
            a.add(row_p, 2 * j, 1.0);
        }
        a
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Initial guess: tanh front of width 1/g for n, quasi-neutral phi.
fn tanh_guess(grid: &Grid, n_plus: f64, rate: f64) -> Vec<f64> {
    let mid = 0.5 * (1.0 + n_plus);
    let half = 0.5 * (n_plus - 1.0);
    let mut x = vec![0.0; 2 * grid.len()];
    for (j, &xi) in grid.points().iter().enumerate() {
        let n = mid + half * (rate * xi).tanh();
        x[2 * j] = n;
        x[2 * j + 1] = n.ln();
    }
    x
}

fn newton_solve(
    disc: &Discretization,
    mut x: Vec<f64>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let c = disc.grid.center();
    let mut kappa = 0.0;
    let mut f = disc.residual(&x, kappa);
    let mut fres = norm_inf(&f).max(disc.phase_residual(&x).abs());
    for it in 0..opts.max_newton_iter {
        let lu = disc.jacobian(&x).factor()?;
        let u = disc.border_column(&x);
        let (dx, dk) = solve_bordered(&lu, &u, 2 * c, &f, disc.phase_residual(&x))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let xt: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - alpha * d).collect();
            let kt = kappa - alpha * dk;
            if xt.iter().step_by(2).all(|&n| n > 0.0) {
                let ft = disc.residual(&xt, kt);
                let ftres = norm_inf(&ft).max(disc.phase_residual(&xt).abs());
                if ftres < fres || ftres < opts.newton_tol {
                    x = xt;
                    kappa = kt;
                    f = ft;
                    fres = ftres;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDiverged { iterations: it + 1, residual: fres });
        }
        if alpha * norm_inf(&dx).max(dk.abs()) < opts.newton_tol {
            return Ok((x, kappa, it + 1));
        }
    }
    Err(Error::NewtonDiverged { iterations: opts.max_newton_iter, residual: fres })
}

/// Solve the traveling-wave problem for amplitude `eps` on the given grid.
///
/// The wave speed and downstream state come from the canonical downstream
/// parametrization; Newton starts from a tanh front and falls back to
/// continuation in eps when the direct solve fails.
pub fn solve_profile(
    params: &PlasmaParams,
    eps: f64,
    grid_spec: &GridSpec,
    opts: &SolverOptions,
) -> Result<ProfileSolution> {
    let grid = grid_spec.build();
    let target = parametrize_downstream(params, eps, opts)?;

    let disc_for = |e: f64| -> Result<(Discretization, f64)> {
        let d = parametrize_downstream_default(params.temperature, e)?;
        Ok((
            Discretization {
                grid: &grid,
                params,
                s: d.s,
                n_plus: d.state.n,
                phi_plus: d.state.phi,
            },
            d.state.n,
        ))
    };

    let (disc, _) = disc_for(eps)?;
    let direct = tanh_guess(&grid, target.1, g_dot_zero(params, target.1).max(1e-8));
    let mut converged: Option<(Vec<f64>, f64, usize)> = None;
    match newton_solve(&disc, direct, opts) {
        Ok(sol) => converged = Some(sol),
        Err(Error::NewtonDiverged { .. }) => {
            // continuation: walk an eps ladder upward from a small amplitude
            let mut ladder = Vec::new();
            let mut e = eps;
            for _ in 0..opts.max_continuation_halvings {
                e *= 0.5;
                ladder.push(e);
            }
            ladder.reverse();
            let mut best: Option<(Vec<f64>, f64)> = None;
            for &e in ladder.iter().chain(std::iter::once(&eps)) {
                let (d, npl) = disc_for(e)?;
                let guess = match &best {
                    None => tanh_guess(&grid, npl, g_dot_zero(params, npl).max(1e-8)),
                    Some((prev, pe)) => rescale_guess(&grid, prev, *pe, e, params),
                };
                match newton_solve(&d, guess, opts) {
                    Ok((sol, kap, its)) => {
                        if e == eps {
                            converged = Some((sol, kap, its));
                        } else {
                            best = Some((sol, e));
                        }
                    }
                    Err(_) => {
                        return Err(Error::AmplitudeTooLarge {
                            target: eps,
                            max_converged: best.map(|(_, e)| e).unwrap_or(0.0),
                        })
                    }
                }
            }
            if converged.is_none() {
                return Err(Error::AmplitudeTooLarge {
                    target: eps,
                    max_converged: best.map(|(_, e)| e).unwrap_or(0.0),
                });
            }
        }
        Err(e) => return Err(e),
    }

    let (x, kappa, iterations) = converged.unwrap();

    // diagnostics and packaging
    let nn = grid.len();
    let n: Vec<f64> = (0..nn).map(|j| x[2 * j]).collect();
    let phi: Vec<f64> = (0..nn).map(|j| x[2 * j + 1]).collect();
    let u: Vec<f64> = n.iter().map(|&nj| target.2 * (1.0 - 1.0 / nj)).collect();

    // residual against the true equations: kappa excluded
    let mut residual_norm: f64 = 0.0;
    for j in 1..nn - 1 {
        residual_norm = residual_norm
            .max(disc.e1(&x, 0.0, j).abs())
            .max(disc.e2(&x, j).abs());
    }
    let amp = 1.0 - target.1;
    let defect_left = ((n[1] - 1.0).abs()).max(phi[1].abs()) / amp;
    let defect_right = ((n[nn - 1] - target.1).abs())
        .max((n[nn - 2] - target.1).abs())
        .max((phi[nn - 2] - target.3).abs())
        / amp;
    let boundary_defect = defect_left.max(defect_right);
    if boundary_defect > opts.boundary_tol {
        return Err(Error::DomainTooShort {
            mismatch: boundary_defect,
            tolerance: opts.boundary_tol,
        });
    }

    Ok(ProfileSolution {
        grid,
        n,
        u,
        phi,
        s: target.2,
        left: EquilibriumState::upstream(),
        right: EquilibriumState {
            n: target.1,
            u: target.0,
            phi: target.3,
        },
        params: *params,
        residual_norm,
        boundary_defect,
        integral_constant: kappa,
        newton_iterations: iterations,
    })
}

/// (u_plus, n_plus, s, phi_plus) with the configured amplitude cap.
fn parametrize_downstream(
    params: &PlasmaParams,
    eps: f64,
    opts: &SolverOptions,
) -> Result<(f64, f64, f64, f64)> {
    let d = crate::rankine_hugoniot::parametrize_downstream(
        params.temperature,
        eps,
        opts.max_eps_fraction,
    )?;
    Ok((d.state.u, d.state.n, d.s, d.state.phi))
}

/// Map a converged solution at amplitude `from` to an initial guess at
/// amplitude `to` by rescaling the front width and jump.
fn rescale_guess(grid: &Grid, x: &[f64], from: f64, to: f64, params: &PlasmaParams) -> Vec<f64> {
    let d_from = parametrize_downstream_default(params.temperature, from).unwrap();
    let d_to = parametrize_downstream_default(params.temperature, to).unwrap();
    let amp_ratio = (1.0 - d_to.state.n) / (1.0 - d_from.state.n);
    let stretch = from / to; // widths scale like 1/eps
    let nn = grid.len();
    let n_from: Vec<f64> = (0..nn).map(|j| x[2 * j]).collect();
    let mut out = vec![0.0; 2 * nn];
    let z0 = grid.point(0);
    for (j, &xi) in grid.points().iter().enumerate() {
        let src = xi / stretch;
        let n_src = if src <= z0 {
            1.0
        } else if src >= grid.point(nn - 1) {
            d_from.state.n
        } else {
            calculus::interp_cubic(&n_from, z0, grid.h(), src)
        };
        let n_new = (1.0 + amp_ratio * (n_src - 1.0)).max(0.1 * d_to.state.n);
        out[2 * j] = n_new;
        out[2 * j + 1] = n_new.ln();
    }
    out
}

/// Residual of the once-integrated momentum equation evaluated with
/// higher-order finite differences, so it measures the discretization error
/// of the computed profile rather than the Newton floor.
pub fn first_integral_residual(sol: &ProfileSolution) -> f64 {
    let h = sol.grid.h();
    let t = sol.params.temperature;
    let s = sol.s;
    let l2 = sol.params.lambda * sol.params.lambda;
    let np = calculus::derivative(&sol.n, h, 1, 4);
    let pp = calculus::derivative(&sol.phi, h, 1, 4);
    let pdd = calculus::derivative(&sol.phi, h, 2, 4);
    let mut worst: f64 = 0.0;
    let nn = sol.n.len();
    for j in 4..nn - 4 {
        let n = sol.n[j];
        let lhs = sol.params.mu * s * np[j] / (n * n);
        let rhs = (t + 1.0 - s * s) * (n - 1.0) + s * s * (n - 1.0) * (n - 1.0) / n
            - 0.5 * l2 * pp[j] * pp[j]
            + l2 * pdd[j];
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Which tail of the profile to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Window for tail fits: |n - n_inf| must lie in this band over >= 20 nodes.
pub const TAIL_WINDOW: (f64, f64) = (1e-9, 1e-3);

/// Least-squares exponential decay rate of |n - n_inf| over the tail window.
/// Returns the positive rate (e-folding per unit xi).
pub fn decay_rate_estimate(sol: &ProfileSolution, side: Side) -> Result<f64> {
    let n_inf = match side {
        Side::Left => sol.left.n,
        Side::Right => sol.right.n,
    };
    match calculus::exp_decay_rate(
        sol.grid.points(),
        &sol.n,
        n_inf,
        side == Side::Left,
        TAIL_WINDOW,
        20,
    ) {
        Some((rate, _)) => Ok(rate),
        None => Err(Error::TailUnresolved(format!(
            "fewer than 20 nodes inside the window [{:.0e}, {:.0e}]",
            TAIL_WINDOW.0, TAIL_WINDOW.1
        ))),
    }
}
