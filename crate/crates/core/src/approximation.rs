//! Quantitative comparison of the full profile against its first-order
//! description in the scaled regime.
//!
//! The exact profile n_eps = 1 + eps*n1e + eps^2*n_R is resolved here: the
//! scaled profile is the full traveling-wave solve with mu = eps, lambda^2 =
//! eps*delta (coordinates already in the stretched variable z), the modified
//! first-order fields come from the KdV-Burgers solver, and the remainder
//! [n_R, u_R, phi_R] is extracted by direct subtraction. The remainder also
//! satisfies a coupled first-order/Poisson system with source terms r1..r6;
//! a discretized linear solver plus a fixed-point iteration reproduce it
//! independently, which cross-validates the extraction.

use serde::Serialize;

use crate::calculus;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::kdv_burgers::{solve_kdvb, FieldKind, Variant};
use crate::linalg::BandedMatrix;
use crate::profile_ode::{solve_profile, ProfileSolution, SolverOptions};
use crate::rankine_hugoniot::{parametrize_downstream_default, PlasmaParams, ScalingParams};

// ---------------------------------------------------------------------------
// weighted norms
// ---------------------------------------------------------------------------

/// Exponential weight w_alpha(z) = exp(alpha sqrt(1 + z^2)).
pub fn weight(alpha: f64, z: f64) -> f64 {
    (alpha * (1.0 + z * z).sqrt()).exp()
}

/// Parameters of the weighted Sobolev norms used for remainder estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedNormSpec {
    /// Weight exponent, 0 < alpha < 2.
    pub alpha: f64,
    /// Derivative order, >= 2.
    pub k: usize,
}

impl WeightedNormSpec {
    pub fn new(alpha: f64, k: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 2), got {alpha}"
            )));
        }
        if k < 2 {
            return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
        }
        Ok(Self { alpha, k })
    }

    /// Norms beyond 4 derivatives are dominated by grid noise on the
    /// resolutions this crate targets.
    pub fn beyond_smoothness_budget(&self) -> bool {
        self.k > 4
    }
}

/// Absolute level below which a double-precision field extracted from O(1)
/// arithmetic (differences divided by eps^2) is round-off plateau, not data.
/// The exponential weight blows such plateau values up catastrophically, so
/// windowed norms clip there.
pub const NORM_NOISE_FLOOR: f64 = 1e-11;

/// Outermost index range where |f| reaches `floor`; the span of genuine
/// signal for a field that decays into a round-off plateau.
fn signal_window(field: &[f64], floor: f64) -> (usize, usize) {
    let lo = field.iter().position(|v| v.abs() >= floor).unwrap_or(0);
    let hi = field
        .iter()
        .rposition(|v| v.abs() >= floor)
        .unwrap_or(field.len().saturating_sub(1));
    (lo, hi.max(lo))
}

fn weighted_l2_window(field: &[f64], grid: &Grid, alpha: f64, window: (usize, usize)) -> f64 {
    let (lo, hi) = window;
    let sq: Vec<f64> = field[lo..=hi]
        .iter()
        .zip(&grid.points()[lo..=hi])
        .map(|(&f, &z)| {
            let w = weight(alpha, z);
            w * w * f * f
        })
        .collect();
    calculus::trapz(&sq, grid.h()).sqrt()
}

/// Weighted L2 norm on the truncated grid (trapezoidal quadrature).
pub fn weighted_l2(field: &[f64], grid: &Grid, alpha: f64) -> f64 {
    weighted_l2_window(field, grid, alpha, (0, field.len() - 1))
}

fn h_norm_window(
    field: &[f64],
    grid: &Grid,
    alpha: f64,
    k: usize,
    window: (usize, usize),
) -> f64 {
    let mut total = 0.0;
    for i in 0..=k {
        let v = if i == 0 {
            weighted_l2_window(field, grid, alpha, window)
        } else {
            let d = calculus::derivative(field, grid.h(), i, 2);
            weighted_l2_window(&d, grid, alpha, window)
        };
        total += v * v;
    }
    total.sqrt()
}

/// Weighted Sobolev norm H^k_alpha: derivatives by centered differences.
pub fn h_norm(field: &[f64], grid: &Grid, alpha: f64, k: usize) -> f64 {
    h_norm_window(field, grid, alpha, k, (0, field.len() - 1))
}

fn x_norm_window(
    n: &[f64],
    phi: &[f64],
    grid: &Grid,
    spec: &WeightedNormSpec,
    eps: f64,
    delta: f64,
    window: (usize, usize),
) -> f64 {
    let base = (h_norm_window(n, grid, spec.alpha, spec.k, window).powi(2)
        + h_norm_window(phi, grid, spec.alpha, spec.k, window).powi(2))
    .sqrt();
    let d1 = calculus::derivative(phi, grid.h(), spec.k + 1, 2);
    let d2 = calculus::derivative(phi, grid.h(), spec.k + 2, 2);
    base + (eps * delta).sqrt() * weighted_l2_window(&d1, grid, spec.alpha, window)
        + eps * delta * weighted_l2_window(&d2, grid, spec.alpha, window)
}

/// Norm of a remainder pair [n, phi]: the H^k_alpha part plus the scaled
/// high-derivative terms sqrt(eps delta) |phi^(k+1)| + eps delta |phi^(k+2)|.
pub fn x_norm(
    n: &[f64],
    phi: &[f64],
    grid: &Grid,
    spec: &WeightedNormSpec,
    eps: f64,
    delta: f64,
) -> f64 {
    x_norm_window(n, phi, grid, spec, eps, delta, (0, n.len() - 1))
}

/// Same norm with the quadrature clipped to the span where either field
/// rises above the round-off plateau: beyond it the exponential weight only
/// amplifies noise. The clipped tail contribution is bounded by
/// floor^2 * w(z_cut)^2 * (domain length), far below the signal.
pub fn x_norm_signal(
    n: &[f64],
    phi: &[f64],
    grid: &Grid,
    spec: &WeightedNormSpec,
    eps: f64,
    delta: f64,
) -> f64 {
    // the plateau scales with the field (differences of O(1) numbers divided
    // by small parameters), so the floor is relative with an absolute cap;
    // for fields decaying faster than the weight grows the clipped tail is
    // a O(1e-9) relative perturbation of the norm
    let sup = n
        .iter()
        .chain(phi)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = NORM_NOISE_FLOOR.max(1e-6 * sup);
    if sup < floor {
        return 0.0; // numerically zero pair
    }
    let (lo_n, hi_n) = signal_window(n, floor);
    let (lo_p, hi_p) = signal_window(phi, floor);
    let window = (lo_n.min(lo_p), hi_n.max(hi_p));
    x_norm_window(n, phi, grid, spec, eps, delta, window)
}

// ---------------------------------------------------------------------------
// the exact profile in scaled coordinates
// ---------------------------------------------------------------------------

/// The full traveling wave in the stretched coordinate z, carrying its
/// scaling parameters.
#[derive(Debug, Clone)]
pub struct ScaledProfile {
    pub scaling: ScalingParams,
    pub temperature: f64,
    pub sol: ProfileSolution,
}

impl ScaledProfile {
    pub fn grid(&self) -> &Grid {
        &self.sol.grid
    }
    pub fn n(&self) -> &[f64] {
        &self.sol.n
    }
    pub fn u(&self) -> &[f64] {
        &self.sol.u
    }
    pub fn phi(&self) -> &[f64] {
        &self.sol.phi
    }
    pub fn s(&self) -> f64 {
        self.sol.s
    }
}

/// Solve the full profile in the stretched coordinate: the scaled system is
/// the physical one with mu = eps and lambda = sqrt(eps delta).
pub fn build_scaled_profile(
    scaling: &ScalingParams,
    temperature: f64,
    grid_spec: &GridSpec,
) -> Result<ScaledProfile> {
    let delta = scaling.delta();
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(
            "scaled profile needs delta > 0 (the Poisson term degenerates at 0)".into(),
        ));
    }
    let params = PlasmaParams::new(
        temperature,
        scaling.epsilon,
        (scaling.epsilon * delta).sqrt(),
    )?;
    let sol = solve_profile(&params, scaling.epsilon, grid_spec, &SolverOptions::default())?;
    Ok(ScaledProfile { scaling: *scaling, temperature, sol })
}

/// Sup-residuals of the three scaled equations (mass, momentum, Poisson)
/// evaluated with independent finite differences.
pub fn scaled_system_residuals(p: &ScaledProfile) -> (f64, f64, f64) {
    let h = p.grid().h();
    let eps = p.scaling.epsilon;
    let delta = p.scaling.delta();
    let t = p.temperature;
    let s = p.s();
    let n = p.n();
    let u = p.u();
    let phi = p.phi();
    let nu: Vec<f64> = n.iter().zip(u).map(|(a, b)| a * b).collect();
    let nu2: Vec<f64> = n
        .iter()
        .zip(u)
        .map(|(&a, &b)| a * b * b + t * a)
        .collect();
    // 4th-order stencils keep the diagnostics independent of the solver's
    // own discretization, so they report genuine O(h^2) solution error
    let dnu = calculus::derivative(&nu, h, 1, 4);
    let dn = calculus::derivative(n, h, 1, 4);
    let dnu2 = calculus::derivative(&nu2, h, 1, 4);
    let du2 = calculus::derivative(u, h, 2, 4);
    let dphi = calculus::derivative(phi, h, 1, 4);
    let ddphi = calculus::derivative(phi, h, 2, 4);
    let mut rm: f64 = 0.0;
    let mut rmo: f64 = 0.0;
    let mut rp: f64 = 0.0;
    for j in 4..n.len() - 4 {
        rm = rm.max((-s * dn[j] + dnu[j]).abs());
        rmo = rmo.max((-s * dnu[j] + dnu2[j] - eps * du2[j] + n[j] * dphi[j]).abs());
        rp = rp.max((-eps * delta * ddphi[j] - (n[j] - phi[j].exp())).abs());
    }
    (rm, rmo, rp)
}

// ---------------------------------------------------------------------------
// first-order basis
// ---------------------------------------------------------------------------

/// The first-order fields needed by the remainder machinery: the classic n1
/// (used by the linear coefficient A) and the amplitude-modified triple, all
/// on one grid with one common translation.
#[derive(Debug, Clone)]
pub struct FirstOrderSet {
    pub grid: Grid,
    pub n1: Vec<f64>,
    pub n1e: Vec<f64>,
    pub u1e: Vec<f64>,
    pub phi1e: Vec<f64>,
    pub temperature: f64,
    pub delta: f64,
    pub eps: f64,
    pub a_eps: f64,
    /// Translation applied to align with an exact profile.
    pub shift: f64,
}

/// Solve the classic n1 and the modified triple on the given grid (their
/// phase pins sit at each field's own midpoint; use
/// [`compute_remainder_direct`] to align against an exact profile).
pub fn build_first_order_set(
    temperature: f64,
    delta: f64,
    eps: f64,
    grid_spec: &GridSpec,
) -> Result<FirstOrderSet> {
    let d = parametrize_downstream_default(temperature, eps)?;
    let variant = Variant::Modified { eps, a_eps: d.a_eps };
    let n1 = solve_kdvb(temperature, delta, FieldKind::N1, Variant::Classic, grid_spec)?;
    let n1e = solve_kdvb(temperature, delta, FieldKind::N1, variant, grid_spec)?;
    let u1e = solve_kdvb(temperature, delta, FieldKind::U1, variant, grid_spec)?;
    let phi1e = solve_kdvb(temperature, delta, FieldKind::Phi1, variant, grid_spec)?;
    Ok(FirstOrderSet {
        grid: n1.grid.clone(),
        n1: n1.field,
        n1e: n1e.field,
        u1e: u1e.field,
        phi1e: phi1e.field,
        temperature,
        delta,
        eps,
        a_eps: d.a_eps,
        shift: 0.0,
    })
}

impl FirstOrderSet {
    /// Rigid translation of the whole basis by `tau` (cubic resampling,
    /// far-field clamping outside the stored domain).
    pub fn shifted(&self, tau: f64) -> FirstOrderSet {
        let resample = |f: &[f64], far_l: f64, far_r: f64| -> Vec<f64> {
            let z0 = self.grid.point(0);
            let zl = self.grid.point(self.grid.len() - 1);
            self.grid
                .points()
                .iter()
                .map(|&z| {
                    let src = z - tau;
                    if src <= z0 {
                        far_l
                    } else if src >= zl {
                        far_r
                    } else {
                        calculus::interp_cubic(f, z0, self.grid.h(), src)
                    }
                })
                .collect()
        };
        let c = (self.temperature + 1.0).sqrt();
        let t1 = self.temperature + 1.0;
        FirstOrderSet {
            grid: self.grid.clone(),
            n1: resample(&self.n1, 0.0, -2.0 / c),
            n1e: resample(&self.n1e, 0.0, -2.0 / c + self.eps / t1),
            u1e: resample(&self.u1e, 0.0, -2.0 - self.eps / (c - self.eps)),
            phi1e: resample(&self.phi1e, 0.0, -2.0 / c + self.a_eps),
            shift: self.shift + tau,
            ..*self
        }
    }

    /// Linear coefficient A(z) = 2 (1 + sqrt(T+1) n1(z)) of the remainder
    /// equation, built from the classic first-order profile.
    pub fn coefficient_a(&self) -> Vec<f64> {
        let c = (self.temperature + 1.0).sqrt();
        self.n1.iter().map(|&v| 2.0 * (1.0 + c * v)).collect()
    }
}

// ---------------------------------------------------------------------------
// remainder extraction
// ---------------------------------------------------------------------------

/// Second-order remainder of the expansion n = 1 + eps n1e + eps^2 n_R.
#[derive(Debug, Clone, Serialize)]
pub struct RemainderFields {
    #[serde(skip)]
    pub grid: Grid,
    pub n_r: Vec<f64>,
    pub u_r: Vec<f64>,
    pub phi_r: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
}

impl RemainderFields {
    pub fn sup_n(&self) -> f64 {
        self.n_r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
    pub fn sup_u(&self) -> f64 {
        self.u_r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
    pub fn sup_phi(&self) -> f64 {
        self.phi_r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Extract the remainder by direct subtraction.
///
/// The basis is first translated so that n_R(0) = 0 (a one-parameter shift
/// of the modified profile; the same shift is applied rigidly to all basis
/// fields), then the remainder is the pointwise scaled difference. Returns
/// the remainder together with the aligned basis.
pub fn compute_remainder_direct(
    exact: &ScaledProfile,
    basis: &FirstOrderSet,
) -> Result<(RemainderFields, FirstOrderSet)> {
    if exact.grid() != &basis.grid {
        return Err(Error::GridMismatch(
            "exact profile and first-order basis need a common grid".into(),
        ));
    }
    if (exact.scaling.epsilon - basis.eps).abs() > 1e-14 {
        return Err(Error::GridMismatch("eps differs between profile and basis".into()));
    }
    let eps = basis.eps;
    let c = basis.grid.center();
    let target = (exact.n()[c] - 1.0) / eps;

    // n1e is monotone decreasing, so g(tau) = n1e(-tau) - target is monotone
    // increasing in tau; bracket around zero and widen if needed
    let z0 = basis.grid.point(0);
    let h = basis.grid.h();
    let eval = |tau: f64| calculus::interp_cubic(&basis.n1e, z0, h, -tau) - target;
    let mut half = 5.0 * h;
    let tau = loop {
        if let Some(t) = calculus::bisect(eval, -half, half, 1e-14) {
            break t;
        }
        half *= 4.0;
        if half > basis.grid.half_length() {
            return Err(Error::GridMismatch(
                "could not align first-order basis with the exact profile".into(),
            ));
        }
    };
    let aligned = basis.shifted(tau);

    let e2 = eps * eps;
    let mut n_r: Vec<f64> = exact
        .n()
        .iter()
        .zip(&aligned.n1e)
        .map(|(&n, &m)| (n - 1.0 - eps * m) / e2)
        .collect();
    n_r[c] = 0.0; // pinned by the alignment; remove the round-off leftover
    let u_r: Vec<f64> = exact
        .u()
        .iter()
        .zip(&aligned.u1e)
        .map(|(&u, &m)| (u - eps * m) / e2)
        .collect();
    let phi_r: Vec<f64> = exact
        .phi()
        .iter()
        .zip(&aligned.phi1e)
        .map(|(&p, &m)| (p - eps * m) / e2)
        .collect();
    Ok((
        RemainderFields {
            grid: basis.grid.clone(),
            n_r,
            u_r,
            phi_r,
            epsilon: eps,
            delta: basis.delta,
        },
        aligned,
    ))
}

/// u_R from n_R through the exact mass integral:
/// u_R = (s - eps u1e) n_R / n_eps + (s n1e - u1e - eps n1e u1e)/(eps n_eps).
pub fn compute_u_remainder(
    n_r: &[f64],
    exact: &ScaledProfile,
    basis: &FirstOrderSet,
) -> Vec<f64> {
    let eps = basis.eps;
    let s = exact.s();
    exact
        .n()
        .iter()
        .zip(n_r)
        .zip(basis.n1e.iter().zip(&basis.u1e))
        .map(|((&n, &nr), (&n1e, &u1e))| {
            (s - eps * u1e) * nr / n + (s * n1e - u1e - eps * n1e * u1e) / (eps * n)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// source terms
// ---------------------------------------------------------------------------

/// The six inhomogeneous terms of the remainder system, plus the first-order
/// Poisson curvature delta * phi1e'' that the expansion of the Poisson
/// equation leaves on the remainder's right-hand side (it plays the same
/// role as r4: order one, exponentially decaying).
#[derive(Debug, Clone)]
pub struct SourceTerms {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub r3: Vec<f64>,
    pub r4: Vec<f64>,
    pub r5: Vec<f64>,
    pub r6: Vec<f64>,
    pub poisson_first_order: Vec<f64>,
}

impl SourceTerms {
    pub fn h1(&self) -> Vec<f64> {
        self.r1
            .iter()
            .zip(&self.r2)
            .zip(&self.r3)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }
    pub fn h2(&self) -> Vec<f64> {
        self.r4
            .iter()
            .zip(&self.r5)
            .zip(&self.r6)
            .zip(&self.poisson_first_order)
            .map(|(((a, b), c), d)| a + b + c + d)
            .collect()
    }
}

/// Evaluate r1..r6 for a given remainder iterate (r1 and r4 do not depend on
/// the remainder; r2, r3 are linear/nonlinear in [n_R, phi_R]; r5, r6 are
/// multiplicative in phi_R).
pub fn compute_r_terms(basis: &FirstOrderSet, n_r: &[f64], phi_r: &[f64]) -> SourceTerms {
    let h = basis.grid.h();
    let nn = basis.grid.len();
    let eps = basis.eps;
    let delta = basis.delta;
    let t1 = basis.temperature + 1.0;
    let c = t1.sqrt();
    let s = c - eps;

    let dn1e = calculus::derivative(&basis.n1e, h, 1, 4);
    let ddn1e = calculus::derivative(&basis.n1e, h, 2, 4);
    let dphi1e = calculus::derivative(&basis.phi1e, h, 1, 4);
    let ddphi1e = calculus::derivative(&basis.phi1e, h, 2, 4);
    let dn_r = calculus::derivative(n_r, h, 1, 4);
    let dphi_r = calculus::derivative(phi_r, h, 1, 4);
    let ddphi_r = calculus::derivative(phi_r, h, 2, 4);

    let mut out = SourceTerms {
        r1: vec![0.0; nn],
        r2: vec![0.0; nn],
        r3: vec![0.0; nn],
        r4: vec![0.0; nn],
        r5: vec![0.0; nn],
        r6: vec![0.0; nn],
        poisson_first_order: vec![0.0; nn],
    };

    for j in 0..nn {
        let n1e = basis.n1e[j];
        let n1 = basis.n1[j];
        let p1e = basis.phi1e[j];
        let one_en = 1.0 + eps * n1e;
        let nr = n_r[j];
        let pr = phi_r[j];

        out.r1[j] = (1.0 / c + n1e) * dn1e[j]
            + delta * one_en / (eps * c) * (one_en * ddphi1e[j] - ddn1e[j])
            - delta * one_en * one_en / (2.0 * c) * dphi1e[j] * dphi1e[j];

        out.r2[j] = eps * nr / c
            * (2.0 * t1 * (n1e - n1) / eps - 1.0
                + 2.0 * (2.0 * c - eps) * n1e
                + 3.0 * t1 * n1e * n1e
                + 2.0 * delta * one_en * ddphi1e[j]
                - eps * delta * one_en * dphi1e[j] * dphi1e[j])
            + eps * delta * (2.0 * n1e + eps * n1e * n1e) / c * ddphi_r[j]
            + eps * dn_r[j] / c
            - eps * delta * dphi1e[j] * one_en * one_en / c * dphi_r[j];

        out.r3[j] = eps
            * (t1 * (2.0 + 3.0 * eps * n1e) - s * s + eps * eps * delta * ddphi1e[j]
                - 0.5 * delta * eps.powi(3) * dphi1e[j] * dphi1e[j])
            * nr
            * nr
            / c
            + t1.powf(1.5) * eps.powi(3) * nr.powi(3)
            + 2.0 * eps * eps * delta * one_en * nr * ddphi_r[j] / c
            + eps.powi(4) * delta * nr * nr * ddphi_r[j] / c
            - eps.powi(3) * delta * dphi1e[j] * dphi_r[j]
                * (2.0 * nr * one_en + eps * eps * nr * nr)
                / c
            - eps * eps * delta * dphi_r[j] * dphi_r[j]
                * (1.0 + eps * n1e + eps * eps * nr).powi(2)
                / (2.0 * c);

        out.r4[j] = (1.0 + eps * n1e - (eps * p1e).exp()) / (eps * eps);
        out.r5[j] = (1.0 - (eps * p1e).exp()) * pr;
        out.r6[j] = (eps * p1e).exp() * (1.0 - (eps * eps * pr).exp() + eps * eps * pr)
            / (eps * eps);
        out.poisson_first_order[j] = delta * ddphi1e[j];
    }
    out
}

/// Max residuals of the two remainder equations, evaluated with 4th-order
/// finite differences (independent of any solver stencil).
pub fn remainder_equation_residual(
    rem: &RemainderFields,
    sources: &SourceTerms,
    basis: &FirstOrderSet,
) -> (f64, f64) {
    let h = rem.grid.h();
    let c = (basis.temperature + 1.0).sqrt();
    let a = basis.coefficient_a();
    let dn_r = calculus::derivative(&rem.n_r, h, 1, 4);
    let ddphi_r = calculus::derivative(&rem.phi_r, h, 2, 4);
    let mut w1: f64 = 0.0;
    let mut w2: f64 = 0.0;
    let nn = rem.grid.len();
    for j in 4..nn - 4 {
        let e1 = dn_r[j]
            - a[j] * rem.n_r[j]
            - basis.delta / c * ddphi_r[j]
            - sources.r1[j]
            - sources.r2[j]
            - sources.r3[j];
        let e2 = -rem.epsilon * basis.delta * ddphi_r[j]
            - (rem.n_r[j] - rem.phi_r[j]
                + sources.r4[j]
                + sources.r5[j]
                + sources.r6[j]
                + sources.poisson_first_order[j]);
        w1 = w1.max(e1.abs());
        w2 = w2.max(e2.abs());
    }
    (w1, w2)
}

// ---------------------------------------------------------------------------
// linear solver and fixed point
// ---------------------------------------------------------------------------

/// Solve the linear remainder system
/// `n' = A(z) n + (delta/sqrt(T+1)) phi'' + h1`,
/// `-eps delta phi'' = n - phi + h2`, `n(0) = 0`,
/// with homogeneous potential boundary values. Returns (n, phi).
pub fn solve_linear_remainder(
    a: &[f64],
    h1: &[f64],
    h2: &[f64],
    grid: &Grid,
    temperature: f64,
    eps: f64,
    delta: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = grid.len();
    let cidx = grid.center();
    let h = grid.h();
    let cs = (temperature + 1.0).sqrt();
    let ed = eps * delta;

    // Implicit-midpoint (box) discretization of the first-order system
    //   n'   = A n + (1/(eps cs)) (phi - n - h2) + h1
    //   phi' = psi
    //   eps delta psi' = -(n - phi + h2)
    // where the first row used (delta/cs) phi'' = (1/(eps cs)) (phi - n - h2).
    // Conditions: n pinned at the origin, phi clamped at both ends. Box rows
    // keep the factorization stable through the stiff Poisson layers.
    //
    // Unknowns interleaved [n_j, phi_j, psi_j]; row slots per node hold the
    // previous interval's psi-equation plus this interval's n/phi equations,
    // with the phase pin displacing the n-equation slots by one node past
    // the center.
    let mut m = BandedMatrix::zeros(3 * nn, 8, 8);
    let mut rhs = vec![0.0; 3 * nn];
    let idx_n = |j: usize| 3 * j;
    let idx_p = |j: usize| 3 * j + 1;
    let idx_q = |j: usize| 3 * j + 2;

    // n-equation of interval i at row `row`
    let eq_n = |m: &mut BandedMatrix, rhs: &mut [f64], row: usize, i: usize| {
        let am = 0.5 * (a[i] + a[i + 1]);
        let g = 1.0 / (eps * cs);
        m.add(row, idx_n(i), -1.0 / h - 0.5 * (am - g));
        m.add(row, idx_n(i + 1), 1.0 / h - 0.5 * (am - g));
        m.add(row, idx_p(i), -0.5 * g);
        m.add(row, idx_p(i + 1), -0.5 * g);
        rhs[row] = 0.5 * (h1[i] + h1[i + 1]) - 0.5 * g * (h2[i] + h2[i + 1]);
    };

    for j in 0..nn {
        // n-slot: pin at the center; intervals shift by one node beyond it
        let row_n = idx_n(j);
        if j == cidx {
            m.set(row_n, idx_n(j), 1.0);
            rhs[row_n] = 0.0;
        } else if j < cidx {
            eq_n(&mut m, &mut rhs, row_n, j);
        } else {
            eq_n(&mut m, &mut rhs, row_n, j - 1);
        }

        // phi-slot: clamp at the left end, else phi-equation of interval j-1
        let row_p = idx_p(j);
        if j == 0 {
            m.set(row_p, idx_p(0), 1.0);
            rhs[row_p] = 0.0;
        } else {
            let i = j - 1;
            m.add(row_p, idx_p(i), -1.0 / h);
            m.add(row_p, idx_p(i + 1), 1.0 / h);
            m.add(row_p, idx_q(i), -0.5);
            m.add(row_p, idx_q(i + 1), -0.5);
            rhs[row_p] = 0.0;
        }

        // psi-slot: clamp phi at the right end, else psi-equation of interval j
        let row_q = idx_q(j);
        if j == nn - 1 {
            m.set(row_q, idx_p(nn - 1), 1.0);
            rhs[row_q] = 0.0;
        } else {
            let i = j;
            m.add(row_q, idx_q(i), -ed / h);
            m.add(row_q, idx_q(i + 1), ed / h);
            m.add(row_q, idx_n(i), 0.5);
            m.add(row_q, idx_n(i + 1), 0.5);
            m.add(row_q, idx_p(i), -0.5);
            m.add(row_q, idx_p(i + 1), -0.5);
            rhs[row_q] = -0.5 * (h2[i] + h2[i + 1]);
        }
    }

    let lu = m.factor()?;
    lu.solve(&mut rhs);
    let n = (0..nn).map(|j| rhs[3 * j]).collect();
    let phi = (0..nn).map(|j| rhs[3 * j + 1]).collect();
    Ok((n, phi))
}

/// Trace of the fixed-point construction of the remainder.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointResult {
    #[serde(skip)]
    pub n_r: Vec<f64>,
    #[serde(skip)]
    pub phi_r: Vec<f64>,
    /// Successive update norms in X_{alpha,k}.
    pub updates: Vec<f64>,
    /// updates[i+1]/updates[i]; all should sit below 1/2 in the small regime.
    pub ratios: Vec<f64>,
    pub iterations: usize,
}

/// Iterate the remainder map starting from [0, 0]: each step solves the
/// linear system with source terms evaluated at the previous iterate.
pub fn solve_remainder_fixed_point(
    basis: &FirstOrderSet,
    norm_spec: &WeightedNormSpec,
    max_iter: usize,
    tol: f64,
) -> Result<FixedPointResult> {
    let a = basis.coefficient_a();
    let nn = basis.grid.len();
    let mut n_r = vec![0.0; nn];
    let mut phi_r = vec![0.0; nn];
    let mut updates = Vec::new();
    let mut ratios = Vec::new();

    for it in 0..max_iter {
        let src = compute_r_terms(basis, &n_r, &phi_r);
        let (n_next, phi_next) = solve_linear_remainder(
            &a,
            &src.h1(),
            &src.h2(),
            &basis.grid,
            basis.temperature,
            basis.eps,
            basis.delta,
        )?;
        let dn: Vec<f64> = n_next.iter().zip(&n_r).map(|(a, b)| a - b).collect();
        let dphi: Vec<f64> = phi_next.iter().zip(&phi_r).map(|(a, b)| a - b).collect();
        let step = x_norm_signal(&dn, &dphi, &basis.grid, norm_spec, basis.eps, basis.delta);
        // an upward jump after contracting far below the first update means
        // the iteration reached the round-off floor of the weighted norm;
        // report convergence with the previous iterate
        if let (Some(&prev), Some(&first)) = (updates.last(), updates.first()) {
            if step > prev && prev < 1e-4 * first {
                return Ok(FixedPointResult { n_r, phi_r, updates, ratios, iterations: it + 1 });
            }
        }
        n_r = n_next;
        phi_r = phi_next;
        if let Some(&prev) = updates.last() {
            ratios.push(step / prev);
        }
        updates.push(step);
        if step < tol {
            return Ok(FixedPointResult { n_r, phi_r, updates, ratios, iterations: it + 1 });
        }
        if ratios.len() >= 3 && ratios.iter().rev().take(3).all(|&r| r >= 1.0) {
            return Err(Error::NotContracting { ratios });
        }
    }
    Err(Error::NotContracting { ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_scaling(eps: f64, delta: f64) -> ScalingParams {
        ScalingParams::from_delta(eps, delta).unwrap()
    }

    fn grid60() -> GridSpec {
        GridSpec::new(60.0, 8001).unwrap()
    }

    #[test]
    fn weighted_norm_zero_and_alpha_monotonicity() {
        let g = Grid::uniform(10.0, 401);
        let zero = vec![0.0; g.len()];
        assert_eq!(weighted_l2(&zero, &g, 1.0), 0.0);

        let f: Vec<f64> = g.points().iter().map(|&z| (-z * z).exp()).collect();
        let mut prev = 0.0;
        for &alpha in &[0.2, 0.6, 1.0, 1.5, 1.9] {
            let v = weighted_l2(&f, &g, alpha);
            assert!(v > prev, "norm must grow with alpha");
            prev = v;
        }
    }

    #[test]
    fn weighted_norm_matches_quadrature_oracle() {
        // || e^{-z^2} ||_{L2_1}: independent fine Simpson quadrature of
        // exp(2 sqrt(1+z^2) - 2 z^2) on a domain where the integrand is dead
        let simpson = |m: usize| {
            let (a, b) = (-12.0f64, 12.0f64);
            let h = (b - a) / m as f64;
            let f = |z: f64| (2.0 * (1.0 + z * z).sqrt() - 2.0 * z * z).exp();
            let mut s = f(a) + f(b);
            for i in 1..m {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            (s * h / 3.0).sqrt()
        };
        let oracle = simpson(200_000);
        assert!((simpson(100_000) - oracle).abs() / oracle < 1e-12, "oracle converged");

        let g = Grid::uniform(12.0, 48001);
        let f: Vec<f64> = g.points().iter().map(|&z| (-z * z).exp()).collect();
        let v = weighted_l2(&f, &g, 1.0);
        assert!(
            (v - oracle).abs() / oracle < 1e-6,
            "trapezoid {v} vs oracle {oracle}"
        );
    }

    #[test]
    fn norm_spec_validation() {
        assert!(WeightedNormSpec::new(0.0, 2).is_err());
        assert!(WeightedNormSpec::new(2.0, 2).is_err());
        assert!(WeightedNormSpec::new(1.0, 1).is_err());
        let s = WeightedNormSpec::new(1.0, 2).unwrap();
        assert!(!s.beyond_smoothness_budget());
        assert!(WeightedNormSpec::new(1.0, 5).unwrap().beyond_smoothness_budget());
    }

    #[test]
    fn scaled_profile_identities() {
        let sp = build_scaled_profile(&default_scaling(0.02, 0.01), 0.0, &grid60()).unwrap();
        // u = s (n - 1)/n holds exactly by construction
        let worst = sp
            .n()
            .iter()
            .zip(sp.u())
            .map(|(&n, &u)| (u - sp.s() * (n - 1.0) / n).abs())
            .fold(0.0f64, f64::max)
            ;
        assert!(worst < 1e-8, "mass identity defect {worst:.2e}");

        // amplitude: sup |n - 1| = (2/sqrt(T+1)) eps within 20%
        for &eps in &[0.02, 0.01] {
            let sp = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &grid60()).unwrap();
            let sup = sp.n().iter().map(|&n| (n - 1.0).abs()).fold(0.0f64, f64::max);
            let expect = 2.0 * eps;
            assert!(
                (sup - expect).abs() / expect < 0.2,
                "eps={eps}: sup|n-1| = {sup} vs {expect}"
            );
        }
    }

    #[test]
    fn scaled_residuals_refine_at_second_order() {
        let coarse = build_scaled_profile(&default_scaling(0.02, 0.01), 0.0, &grid60()).unwrap();
        let fine = build_scaled_profile(
            &default_scaling(0.02, 0.01),
            0.0,
            &grid60().refined(),
        )
        .unwrap();
        let (m1, mo1, p1) = scaled_system_residuals(&coarse);
        let (m2, mo2, p2) = scaled_system_residuals(&fine);
        // mass is an exact identity (u is built from the mass integral), so
        // its residual sits at round-off on any grid
        assert!(m1 < 1e-12 && m2 < 1e-12, "mass residuals {m1:.2e}, {m2:.2e}");
        for (c, f, name) in [(mo1, mo2, "momentum"), (p1, p2, "poisson")] {
            let ratio = c / f;
            assert!(
                ratio > 3.0 && ratio < 5.5,
                "{name}: refinement ratio {ratio} ({c:.2e} -> {f:.2e})"
            );
        }
    }

    #[test]
    fn remainder_direct_properties() {
        let eps = 0.02;
        let sp = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &grid60()).unwrap();
        let basis = build_first_order_set(0.0, 0.01, eps, &grid60()).unwrap();
        let (rem, aligned) = compute_remainder_direct(&sp, &basis).unwrap();

        assert_eq!(rem.n_r[rem.grid.center()], 0.0);
        assert!(aligned.shift.abs() < 0.1, "alignment shift {}", aligned.shift);

        // far fields vanish relative to the interior magnitude
        let sup = rem.sup_n();
        let edge = rem.n_r[1].abs().max(rem.n_r[rem.n_r.len() - 2].abs());
        assert!(edge < 1e-3 * sup, "edge {edge:.2e} vs sup {sup:.2e}");
        let sup_u = rem.sup_u();
        let edge_u = rem.u_r[1].abs().max(rem.u_r[rem.u_r.len() - 2].abs());
        assert!(edge_u < 1e-3 * sup_u);

        // cross-check the closed-form u_R against direct subtraction
        let u_formula = compute_u_remainder(&rem.n_r, &sp, &aligned);
        let worst = u_formula
            .iter()
            .zip(&rem.u_r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "u_R formula vs direct: {worst:.2e}");
    }

    #[test]
    fn u_remainder_second_term_isolated() {
        // with n_R = 0 only the eps^{-1}(...) term survives
        let eps = 0.02;
        let sp = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &grid60()).unwrap();
        let basis = build_first_order_set(0.0, 0.01, eps, &grid60()).unwrap();
        let (_, aligned) = compute_remainder_direct(&sp, &basis).unwrap();
        let zeros = vec![0.0; sp.grid().len()];
        let u = compute_u_remainder(&zeros, &sp, &aligned);
        for (j, &v) in u.iter().enumerate().step_by(997) {
            let n = sp.n()[j];
            let expect = (sp.s() * aligned.n1e[j]
                - aligned.u1e[j]
                - eps * aligned.n1e[j] * aligned.u1e[j])
                / (eps * n);
            assert!((v - expect).abs() < 1e-12, "node {j}");
        }
    }

    #[test]
    fn r_terms_structure() {
        let eps = 0.02;
        let sp = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &grid60()).unwrap();
        let basis = build_first_order_set(0.0, 0.01, eps, &grid60()).unwrap();
        let (rem, aligned) = compute_remainder_direct(&sp, &basis).unwrap();
        let zeros = vec![0.0; rem.grid.len()];

        // r5 and r6 are multiplicative in phi_R
        let src0 = compute_r_terms(&aligned, &rem.n_r, &zeros);
        assert!(src0.r5.iter().all(|&v| v == 0.0));
        assert!(src0.r6.iter().all(|&v| v == 0.0));

        // r4 vanishes at the far fields (the modified construction matches
        // 1 + eps n1e = exp(eps phi1e) there)
        let src = compute_r_terms(&aligned, &rem.n_r, &rem.phi_r);
        let sup4 = src.r4.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let edge4 = src.r4[1].abs().max(src.r4[src.r4.len() - 2].abs());
        assert!(edge4 < 1e-3 * sup4, "r4 edge {edge4:.2e} vs sup {sup4:.2e}");
    }

    #[test]
    fn remainder_satisfies_its_equations() {
        let eps = 0.02;
        let sp = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &grid60()).unwrap();
        let basis = build_first_order_set(0.0, 0.01, eps, &grid60()).unwrap();
        let (rem, aligned) = compute_remainder_direct(&sp, &basis).unwrap();
        let src = compute_r_terms(&aligned, &rem.n_r, &rem.phi_r);

        // A(z) tends to 2 on the left and -2 on the right
        let a = aligned.coefficient_a();
        assert!((a[0] - 2.0).abs() < 1e-9);
        assert!((a[a.len() - 1] + 2.0).abs() < 1e-6);

        let (r1, r2) = remainder_equation_residual(&rem, &src, &aligned);

        // refined run: both residuals drop at the discretization order
        let eps_g = grid60().refined();
        let spf = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &eps_g).unwrap();
        let basisf = build_first_order_set(0.0, 0.01, eps, &eps_g).unwrap();
        let (remf, alignedf) = compute_remainder_direct(&spf, &basisf).unwrap();
        let srcf = compute_r_terms(&alignedf, &remf.n_r, &remf.phi_r);
        let (r1f, r2f) = remainder_equation_residual(&remf, &srcf, &alignedf);
        let ratio1 = r1 / r1f;
        let ratio2 = r2 / r2f;
        assert!(ratio1 > 2.5 && ratio1 < 6.5, "eq1 ratio {ratio1} ({r1:.2e} -> {r1f:.2e})");
        assert!(ratio2 > 2.5 && ratio2 < 6.5, "eq2 ratio {ratio2} ({r2:.2e} -> {r2f:.2e})");
    }

    #[test]
    fn zero_remainder_zero_sources_zero_residual() {
        let basis = build_first_order_set(0.0, 0.01, 0.02, &GridSpec::new(30.0, 2001).unwrap())
            .unwrap();
        let zeros = vec![0.0; basis.grid.len()];
        let src = SourceTerms {
            r1: zeros.clone(),
            r2: zeros.clone(),
            r3: zeros.clone(),
            r4: zeros.clone(),
            r5: zeros.clone(),
            r6: zeros.clone(),
            poisson_first_order: zeros.clone(),
        };
        let rem = RemainderFields {
            grid: basis.grid.clone(),
            n_r: zeros.clone(),
            u_r: zeros.clone(),
            phi_r: zeros,
            epsilon: 0.02,
            delta: 0.01,
        };
        let (a, b) = remainder_equation_residual(&rem, &src, &basis);
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn linear_solver_trivial_and_manufactured() {
        let basis = build_first_order_set(0.0, 0.01, 0.02, &GridSpec::new(30.0, 2001).unwrap())
            .unwrap();
        let a = basis.coefficient_a();
        let zeros = vec![0.0; basis.grid.len()];
        let (n, phi) = solve_linear_remainder(&a, &zeros, &zeros, &basis.grid, 0.0, 0.02, 0.01)
            .unwrap();
        assert!(n.iter().all(|&v| v.abs() < 1e-13));
        assert!(phi.iter().all(|&v| v.abs() < 1e-13));

        // manufactured solution: n* = z e^{-z^2}, phi* = z^2 e^{-z^2}
        let mms = |spec: &GridSpec| -> f64 {
            let basis = build_first_order_set(0.0, 0.01, 0.02, spec).unwrap();
            let g = basis.grid.clone();
            let a = basis.coefficient_a();
            let (eps, delta, cs) = (0.02, 0.01, 1.0f64);
            let nstar: Vec<f64> = g.points().iter().map(|&z| z * (-z * z).exp()).collect();
            let pstar: Vec<f64> = g.points().iter().map(|&z| z * z * (-z * z).exp()).collect();
            // analytic derivatives
            let dn: Vec<f64> = g
                .points()
                .iter()
                .map(|&z| (1.0 - 2.0 * z * z) * (-z * z).exp())
                .collect();
            let ddp: Vec<f64> = g
                .points()
                .iter()
                .map(|&z| (2.0 - 10.0 * z * z + 4.0 * z * z * z * z) * (-z * z).exp())
                .collect();
            let h1: Vec<f64> = (0..g.len())
                .map(|j| dn[j] - a[j] * nstar[j] - delta / cs * ddp[j])
                .collect();
            let h2: Vec<f64> = (0..g.len())
                .map(|j| -eps * delta * ddp[j] - nstar[j] + pstar[j])
                .collect();
            let (n, phi) =
                solve_linear_remainder(&a, &h1, &h2, &g, 0.0, eps, delta).unwrap();
            let mut worst: f64 = 0.0;
            for j in 0..g.len() {
                worst = worst.max((n[j] - nstar[j]).abs()).max((phi[j] - pstar[j]).abs());
            }
            worst
        };
        let coarse = mms(&GridSpec::new(30.0, 2001).unwrap());
        let fine = mms(&GridSpec::new(30.0, 4001).unwrap());
        let ratio = coarse / fine;
        assert!(
            ratio > 3.0 && ratio < 5.5,
            "manufactured recovery ratio {ratio} ({coarse:.2e} -> {fine:.2e})"
        );
    }

    #[test]
    fn linear_solver_uniform_in_delta() {
        // fixed smooth sources, delta sweep: solution norm stays bounded
        let mut norms = Vec::new();
        for &delta in &[1e-2, 1e-3, 1e-4] {
            let basis =
                build_first_order_set(0.0, delta, 0.02, &GridSpec::new(30.0, 2001).unwrap())
                    .unwrap();
            let g = basis.grid.clone();
            let a = basis.coefficient_a();
            let h1: Vec<f64> = g.points().iter().map(|&z| (-z * z).exp()).collect();
            let h2: Vec<f64> = g.points().iter().map(|&z| z * (-z * z).exp()).collect();
            let (n, phi) =
                solve_linear_remainder(&a, &h1, &h2, &g, 0.0, 0.02, delta).unwrap();
            let sup = n
                .iter()
                .chain(&phi)
                .fold(0.0f64, |m, &v| m.max(v.abs()));
            norms.push(sup);
        }
        let hi = norms.iter().fold(0.0f64, |m, &v| m.max(v));
        let lo = norms.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        assert!(
            (hi - lo) / hi < 0.5,
            "solution norms vary too much across delta: {norms:?}"
        );
    }

    #[test]
    fn fixed_point_contracts_and_matches_direct() {
        let eps = 0.02;
        let gspec = grid60();
        let sp = build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &gspec).unwrap();
        let basis = build_first_order_set(0.0, 0.01, eps, &gspec).unwrap();
        let (rem, aligned) = compute_remainder_direct(&sp, &basis).unwrap();

        let spec = WeightedNormSpec::new(1.0, 2).unwrap();
        let fp = solve_remainder_fixed_point(&aligned, &spec, 40, 1e-6).unwrap();
        assert!(
            fp.ratios.iter().skip(1).all(|&r| r < 0.5),
            "contraction ratios {:?}",
            fp.ratios
        );

        // agreement with the direct extraction within the larger of the two
        // discretization-error estimates (Richardson on the direct route)
        let spf =
            build_scaled_profile(&default_scaling(eps, 0.01), 0.0, &gspec.refined()).unwrap();
        let basisf = build_first_order_set(0.0, 0.01, eps, &gspec.refined()).unwrap();
        let (remf, _) = compute_remainder_direct(&spf, &basisf).unwrap();
        let interp_err = rem
            .n_r
            .iter()
            .step_by(1)
            .zip(remf.n_r.iter().step_by(2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            * 4.0
            / 3.0;

        let worst = fp
            .n_r
            .iter()
            .zip(&rem.n_r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let budget = 3.0 * interp_err.max(1e-6);
        assert!(
            worst < budget,
            "fixed point vs direct: {worst:.3e} (budget {budget:.3e})"
        );
    }
}
