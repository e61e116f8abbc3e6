//! First-order (KdV-Burgers) traveling-wave profiles.
//!
//! In the scaled regime the leading-order wave n1 solves, after one
//! integration with the zero left far field fixing the constant,
//!
//! ```text
//! 2 sqrt(T+1) n1 + (T+1) n1^2 - sqrt(T+1) n1' + delta n1'' = 0
//! ```
//!
//! with far fields n1(-inf) = 0, n1(+inf) = -2/sqrt(T+1); u1 and phi1 solve
//! the same structure with rescaled coefficients, and the eps-modified
//! variants shift only the linear coefficient so their far fields match the
//! downstream parametrization at finite amplitude. All of these are handled
//! by one collocation solver over the generic form
//! `c1 f + c2 f^2 - c3 f' + c4 f'' = 0`.

use serde::Serialize;

use crate::calculus;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::linalg::{solve_bordered, BandedMatrix};
use crate::rankine_hugoniot::sound_speed;

/// Which field the profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    N1,
    U1,
    Phi1,
}

impl FieldKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "n1" => Ok(Self::N1),
            "u1" => Ok(Self::U1),
            "phi1" => Ok(Self::Phi1),
            other => Err(Error::InvalidParameter(format!(
                "unknown field kind '{other}', expected n1|u1|phi1"
            ))),
        }
    }
}

/// Classic first-order profile or the amplitude-modified variant whose far
/// fields match the downstream state at finite eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Variant {
    Classic,
    /// Carries (eps, a_eps) from the downstream parametrization.
    Modified { eps: f64, a_eps: f64 },
}

/// Coefficients of the integrated profile equation
/// `c1 f + c2 f^2 - c3 f' + c4 f'' = 0`.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
}

impl Coefficients {
    fn build(t: f64, delta: f64, kind: FieldKind, variant: Variant) -> Result<Self> {
        let c = sound_speed(t)?;
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
        }
        let (c1, c2, c3, c4) = match (kind, variant) {
            (FieldKind::N1, Variant::Classic) => (2.0 * c, t + 1.0, c, delta),
            (FieldKind::N1, Variant::Modified { eps, .. }) => (2.0 * c - eps, t + 1.0, c, delta),
            (FieldKind::U1, Variant::Classic) => (2.0, 1.0, 1.0, delta / c),
            (FieldKind::U1, Variant::Modified { eps, .. }) => {
                (2.0 + eps / (c - eps), 1.0, 1.0, delta / c)
            }
            // phi1 satisfies the n1 equation (phi1 = n1 at leading order);
            // the modified linear coefficient carries the a_eps correction
            (FieldKind::Phi1, Variant::Classic) => (2.0 * c, t + 1.0, c, delta),
            (FieldKind::Phi1, Variant::Modified { a_eps, .. }) => {
                (2.0 * c - a_eps * (t + 1.0), t + 1.0, c, delta)
            }
        };
        Ok(Self { c1, c2, c3, c4 })
    }

    /// Nonzero root of c1 f + c2 f^2 = 0: the right far field.
    fn far_right(&self) -> f64 {
        -self.c1 / self.c2
    }
}

/// A converged first-order profile on a symmetric grid.
#[derive(Debug, Clone, Serialize)]
pub struct KdvbProfile {
    #[serde(skip)]
    pub grid: Grid,
    pub field: Vec<f64>,
    pub delta: f64,
    pub temperature: f64,
    pub kind: FieldKind,
    pub variant: Variant,
    pub far_left: f64,
    pub far_right: f64,
    /// Max residual of the integrated equation at convergence.
    pub residual_norm: f64,
    /// Constant absorbed by the truncated boundaries (delta > 0 only).
    pub integral_constant: f64,
    pub newton_iterations: usize,
}

/// Monotonicity and overshoot diagnostics of a profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityReport {
    pub monotone: bool,
    /// Largest excursion beyond the far-field band.
    pub overshoot: f64,
    /// Largest node-to-node increase (round-off level when monotone).
    pub max_increment: f64,
}

/// Dissipation-dominated closed form: at delta = 0 the integrated equation
/// is first order and solved exactly by the logistic front
/// `n1(z) = n1_plus / (1 + exp(-2z))` with `n1_plus = -2/sqrt(T+1)`.
///
/// Check it satisfies `sqrt(T+1) n1' = 2 sqrt(T+1) n1 + (T+1) n1^2`:
/// with a = n1_plus, f = a/(1+e^{-2z}) one has f' = 2f(1 - f/a), so
/// sqrt(T+1) f' = 2 sqrt(T+1) f - 2 sqrt(T+1) f^2/a = 2 sqrt(T+1) f + (T+1) f^2.
pub fn kdvb_logistic_limit(temperature: f64, z: f64) -> f64 {
    let a = -2.0 / (temperature + 1.0).sqrt();
    a / (1.0 + (-2.0 * z).exp())
}

/// Linearized rates at the two far fields of the integrated equation,
/// `(lambda_m1, lambda_m2, lambda_p1, lambda_p2)`:
/// `lambda_{±,1/2} = (sqrt(T+1) ∓/± sqrt(T+1 ± 8 sqrt(T+1) delta)) / (2 delta)`
/// with sign pattern (+, +, -, +). Fails with `ComplexRates` when
/// `T+1 - 8 sqrt(T+1) delta < 0` (the oscillatory-tail regime).
pub fn kdvb_phase_eigenvalues(temperature: f64, delta: f64) -> Result<[f64; 4]> {
    let c = sound_speed(temperature)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    let t1 = temperature + 1.0;
    let disc_minus = t1 - 8.0 * c * delta;
    if disc_minus < 0.0 {
        return Err(Error::ComplexRates { discriminant: disc_minus });
    }
    let disc_plus = t1 + 8.0 * c * delta;
    let lm1 = (c - disc_minus.sqrt()) / (2.0 * delta);
    let lm2 = (c + disc_minus.sqrt()) / (2.0 * delta);
    let lp1 = (c - disc_plus.sqrt()) / (2.0 * delta);
    let lp2 = (c + disc_plus.sqrt()) / (2.0 * delta);
    Ok([lm1, lm2, lp1, lp2])
}

/// Threshold delta* where the left-state rates turn complex:
/// T+1 = 8 sqrt(T+1) delta*.
pub fn oscillatory_threshold(temperature: f64) -> f64 {
    (temperature + 1.0).sqrt() / 8.0
}

/// Newton tolerance on the update norm.
const NEWTON_TOL: f64 = 1e-11;
const MAX_NEWTON: usize = 40;

/// Solve the first-order profile equation on the given grid.
///
/// Phase condition: field(0) = (far_left + far_right)/2. For delta > 0 the
/// boundary values are clamped to the far fields and one scalar float keeps
/// the truncated system square; at delta = 0 the equation is first order and
/// an implicit-midpoint (box) discretization marches from the phase node with
/// free ends.
pub fn solve_kdvb(
    temperature: f64,
    delta: f64,
    kind: FieldKind,
    variant: Variant,
    grid_spec: &GridSpec,
) -> Result<KdvbProfile> {
    if let Variant::Modified { eps, .. } = variant {
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
        }
    }
    let co = Coefficients::build(temperature, delta, kind, variant)?;
    let grid = grid_spec.build();
    let (field, residual_norm, kappa, iters) = if delta == 0.0 {
        let (f, r, i) = solve_box(&co, &grid)?;
        (f, r, 0.0, i)
    } else {
        solve_second_order(&co, &grid)?
    };

    // truncated far-field drift check
    let fr = co.far_right();
    let mismatch = (field[1] - 0.0)
        .abs()
        .max((field[field.len() - 2] - fr).abs())
        / fr.abs();
    if mismatch > 1e-5 {
        return Err(Error::FarFieldMismatch { mismatch, tolerance: 1e-5 });
    }

    Ok(KdvbProfile {
        grid,
        field,
        delta,
        temperature,
        kind,
        variant,
        far_left: 0.0,
        far_right: fr,
        residual_norm,
        integral_constant: kappa,
        newton_iterations: iters,
    })
}

/// delta > 0: implicit-midpoint (box) discretization of the first-order
/// system f' = q, c4 q' = -c1 f - c2 f^2 + c3 q - kappa, with both ends
/// clamped, the midpoint phase pin, and the float kappa keeping the system
/// square. The A-stable box rows stay well-behaved when the dispersive layer
/// width c4/c3 is below the mesh size.
fn solve_second_order(co: &Coefficients, grid: &Grid) -> Result<(Vec<f64>, f64, f64, usize)> {
    let nn = grid.len();
    let c = grid.center();
    let h = grid.h();
    let fr = co.far_right();
    let phase = 0.5 * fr;

    // logistic initial guess with the delta = 0 rate c1/c3; q from its
    // analytic derivative
    let rate = co.c1 / co.c3;
    let mut x = vec![0.0; 2 * nn];
    for (j, &z) in grid.points().iter().enumerate() {
        let f = fr / (1.0 + (-rate * z).exp());
        x[2 * j] = f;
        x[2 * j + 1] = rate * f * (1.0 - f / fr);
    }
    let mut kappa = 0.0;

    // row slots: node 0 = (pin f_0, f-eq of interval 0);
    // node j = (q-eq of interval j-1, f-eq of interval j);
    // node nn-1 = (q-eq of interval nn-2, pin f_{nn-1})
    let residual = |x: &[f64], kappa: f64| -> Vec<f64> {
        let mut r = vec![0.0; 2 * nn];
        r[0] = x[0];
        r[2 * (nn - 1) + 1] = x[2 * (nn - 1)] - fr;
        for i in 0..nn - 1 {
            let (f0, q0, f1, q1) = (x[2 * i], x[2 * i + 1], x[2 * i + 2], x[2 * i + 3]);
            let fm = 0.5 * (f0 + f1);
            let qm = 0.5 * (q0 + q1);
            r[2 * i + 1] = (f1 - f0) / h - qm;
            r[2 * (i + 1)] =
                co.c4 * (q1 - q0) / h + co.c1 * fm + co.c2 * fm * fm - co.c3 * qm + kappa;
        }
        r
    };

    let mut f = residual(&x, kappa);
    let mut fres = norm_inf(&f).max((x[2 * c] - phase).abs());
    let mut iters = 0;
    for it in 0..MAX_NEWTON {
        iters = it + 1;
        let mut a = BandedMatrix::zeros(2 * nn, 3, 3);
        a.set(0, 0, 1.0);
        a.set(2 * (nn - 1) + 1, 2 * (nn - 1), 1.0);
        for i in 0..nn - 1 {
            let fm = 0.5 * (x[2 * i] + x[2 * i + 2]);
            let row_f = 2 * i + 1;
            a.set(row_f, 2 * i, -1.0 / h);
            a.set(row_f, 2 * i + 2, 1.0 / h);
            a.set(row_f, 2 * i + 1, -0.5);
            a.set(row_f, 2 * i + 3, -0.5);
            let row_q = 2 * (i + 1);
            let dfm = 0.5 * (co.c1 + 2.0 * co.c2 * fm);
            a.set(row_q, 2 * i, dfm);
            a.set(row_q, 2 * i + 2, dfm);
            a.set(row_q, 2 * i + 1, -co.c4 / h - 0.5 * co.c3);
            a.set(row_q, 2 * i + 3, co.c4 / h - 0.5 * co.c3);
        }
        let lu = a.factor()?;
        let mut u = vec![0.0; 2 * nn];
        for i in 0..nn - 1 {
            u[2 * (i + 1)] = 1.0;
        }
        let (dx, dk) = solve_bordered(&lu, &u, 2 * c, &f, x[2 * c] - phase)?;

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let xt: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - alpha * d).collect();
            let kt = kappa - alpha * dk;
            let ft = residual(&xt, kt);
            let ftres = norm_inf(&ft).max((xt[2 * c] - phase).abs());
            if ftres < fres || ftres < NEWTON_TOL {
                x = xt;
                kappa = kt;
                f = ft;
                fres = ftres;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDiverged { iterations: iters, residual: fres });
        }
        if norm_inf(&dx).max(dk.abs()) < NEWTON_TOL {
            break;
        }
        if iters == MAX_NEWTON {
            return Err(Error::NewtonDiverged { iterations: iters, residual: fres });
        }
    }

    // residual of the true integrated equation (float excluded)
    let clean = residual(&x, 0.0);
    let residual_norm = clean
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 0 && *i != 2 * (nn - 1) + 1)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let field: Vec<f64> = (0..nn).map(|j| x[2 * j]).collect();
    Ok((field, residual_norm, kappa, iters))
}

/// delta = 0: the integrated equation is first order,
/// f' = (c1 f + c2 f^2)/c3; implicit-midpoint intervals with a phase pin.
fn solve_box(co: &Coefficients, grid: &Grid) -> Result<(Vec<f64>, f64, usize)> {
    let nn = grid.len();
    let c = grid.center();
    let h = grid.h();
    let fr = co.far_right();
    let phase = 0.5 * fr;
    let rr = |f: f64| (co.c1 * f + co.c2 * f * f) / co.c3;
    let drr = |f: f64| (co.c1 + 2.0 * co.c2 * f) / co.c3;

    let rate = co.c1 / co.c3;
    let mut x: Vec<f64> = grid
        .points()
        .iter()
        .map(|&z| fr / (1.0 + (-rate * z).exp()))
        .collect();

    // rows: interval i at slot i (i < c) or i+1 (i >= c); phase at slot c
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut f = vec![0.0; nn];
        for i in 0..nn - 1 {
            let slot = if i < c { i } else { i + 1 };
            let mid = 0.5 * (x[i] + x[i + 1]);
            f[slot] = (x[i + 1] - x[i]) / h - rr(mid);
        }
        f[c] = x[c] - phase;
        f
    };

    let mut f = residual(&x);
    let mut fres = norm_inf(&f);
    let mut iters = 0;
    for it in 0..MAX_NEWTON {
        iters = it + 1;
        let mut a = BandedMatrix::zeros(nn, 1, 1);
        for i in 0..nn - 1 {
            let slot = if i < c { i } else { i + 1 };
            let mid = 0.5 * (x[i] + x[i + 1]);
            let dr = 0.5 * drr(mid);
            a.set(slot, i, -1.0 / h - dr);
            a.set(slot, i + 1, 1.0 / h - dr);
        }
        a.set(c, c, 1.0);
        let lu = a.factor()?;
        let mut dx = f.clone();
        lu.solve(&mut dx);

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let xt: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - alpha * d).collect();
            let ft = residual(&xt);
            let ftres = norm_inf(&ft);
            if ftres < fres || ftres < NEWTON_TOL {
                x = xt;
                f = ft;
                fres = ftres;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDiverged { iterations: iters, residual: fres });
        }
        if norm_inf(&dx) < NEWTON_TOL {
            break;
        }
        if iters == MAX_NEWTON {
            return Err(Error::NewtonDiverged { iterations: iters, residual: fres });
        }
    }
    let residual_norm = fres;
    Ok((x, residual_norm, iters))
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Recover u1 = sqrt(T+1) n1 and phi1 = n1 from a classic n1 profile.
pub fn first_order_fields(n1: &KdvbProfile) -> Result<(KdvbProfile, KdvbProfile)> {
    if n1.kind != FieldKind::N1 || n1.variant != Variant::Classic {
        return Err(Error::InvalidParameter(
            "first_order_fields needs the classic n1 profile".into(),
        ));
    }
    let c = (n1.temperature + 1.0).sqrt();
    let mut u1 = n1.clone();
    u1.kind = FieldKind::U1;
    u1.field = n1.field.iter().map(|v| c * v).collect();
    u1.far_right = c * n1.far_right;
    let mut phi1 = n1.clone();
    phi1.kind = FieldKind::Phi1;
    Ok((u1, phi1))
}

/// Pointwise scaled difference (modified - classic)/eps for one field pair;
/// the second-order correction implied by the modified far fields.
pub fn second_order_correction(
    classic: &KdvbProfile,
    modified: &KdvbProfile,
    eps: f64,
) -> Result<Vec<f64>> {
    if classic.grid != modified.grid {
        return Err(Error::GridMismatch(
            "classic and modified profiles live on different grids".into(),
        ));
    }
    if classic.kind != modified.kind {
        return Err(Error::GridMismatch("field kinds differ".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    Ok(classic
        .field
        .iter()
        .zip(&modified.field)
        .map(|(c, m)| (m - c) / eps)
        .collect())
}

/// Monotonicity scan: all interior finite differences negative (up to the
/// round-off floor) and the excursion beyond the far-field band.
pub fn monotonicity_report(profile: &KdvbProfile) -> MonotonicityReport {
    let f = &profile.field;
    let max_increment = f
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let monotone = max_increment <= 8.0 * f64::EPSILON * scale;
    let hi_far = profile.far_left.max(profile.far_right);
    let lo_far = profile.far_left.min(profile.far_right);
    let hi = f.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lo = f.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let overshoot = (hi - hi_far).max(lo_far - lo).max(0.0);
    MonotonicityReport { monotone, overshoot, max_increment }
}

/// Fitted tail decay rate of the profile on one side, against its far field.
pub fn tail_rate(profile: &KdvbProfile, left: bool) -> Result<f64> {
    let f_inf = if left { profile.far_left } else { profile.far_right };
    match calculus::exp_decay_rate(
        profile.grid.points(),
        &profile.field,
        f_inf,
        left,
        (1e-9, 1e-3),
        20,
    ) {
        Some((rate, _)) => Ok(rate),
        None => Err(Error::TailUnresolved(
            "fewer than 20 nodes inside the fit window".into(),
        )),
    }
}
