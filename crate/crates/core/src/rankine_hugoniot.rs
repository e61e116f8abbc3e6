//! Far-field algebra for 2-shocks: quasi-neutral equilibria, jump conditions
//! in the Eulerian and Lagrangian frames, and the amplitude-parametrized
//! downstream state.
//!
//! Conventions used throughout the crate: the upstream state is
//! [n, u, phi] = [1, 0, 0], wave speed `s > 0`, and the downstream state is
//! generated from the amplitude parameter `eps` via `s = sqrt(T+1) - eps`.
//! Arbitrary state triples are accepted only by the residual checkers; the
//! canonical construction is [`parametrize_downstream`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the sound speed the amplitude parameter may not exceed by
/// default; the construction is a small-amplitude theory.
pub const DEFAULT_MAX_EPS_FRACTION: f64 = 0.5;

/// Physical constants of the ion fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaParams {
    /// Absolute temperature, dimensionless, >= 0.
    pub temperature: f64,
    /// Viscosity coefficient, > 0.
    pub mu: f64,
    /// Debye length, > 0.
    pub lambda: f64,
}

impl PlasmaParams {
    pub fn new(temperature: f64, mu: f64, lambda: f64) -> Result<Self> {
        if !(temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        Ok(Self { temperature, mu, lambda })
    }
}

/// Scaled regime: mu = eps * mu_bar, lambda = sqrt(eps) * lambda_bar, and
/// delta = lambda_bar^2 / mu_bar^2 measures dispersion against dissipation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub epsilon: f64,
    pub mu_bar: f64,
    pub lambda_bar: f64,
}

impl ScalingParams {
    pub fn new(epsilon: f64, mu_bar: f64, lambda_bar: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if !(mu_bar > 0.0) || !(lambda_bar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu_bar and lambda_bar must be > 0, got {mu_bar}, {lambda_bar}"
            )));
        }
        Ok(Self { epsilon, mu_bar, lambda_bar })
    }

    /// From a target dispersion/dissipation ratio with mu_bar = 1.
    pub fn from_delta(epsilon: f64, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be >= 0, got {delta}"
            )));
        }
        Self::new(epsilon, 1.0, delta.sqrt().max(f64::MIN_POSITIVE))
    }

    /// delta = lambda_bar^2 / mu_bar^2, exactly.
    pub fn delta(&self) -> f64 {
        (self.lambda_bar / self.mu_bar) * (self.lambda_bar / self.mu_bar)
    }

    /// Induced physical parameters (mu, lambda).
    pub fn physical(&self, temperature: f64) -> Result<PlasmaParams> {
        PlasmaParams::new(
            temperature,
            self.epsilon * self.mu_bar,
            self.epsilon.sqrt() * self.lambda_bar,
        )
    }
}

/// Constant far-field state in Eulerian variables, quasi-neutral by
/// construction: phi = log(n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState {
    pub n: f64,
    pub u: f64,
    pub phi: f64,
}

impl EquilibriumState {
    /// Quasi-neutral equilibrium: phi is forced to log(n).
    pub fn quasi_neutral(n: f64, u: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::InvalidParameter(format!("density must be > 0, got {n}")));
        }
        Ok(Self { n, u, phi: n.ln() })
    }

    /// The upstream reference state [1, 0, 0].
    pub fn upstream() -> Self {
        Self { n: 1.0, u: 0.0, phi: 0.0 }
    }
}

/// Constant far-field state in Lagrangian variables (specific volume v = 1/n),
/// quasi-neutral: phi = -log(v).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianEquilibrium {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
}

/// Acoustic speed of the second characteristic family at the upstream state:
/// sqrt(T + 1).
pub fn sound_speed(temperature: f64) -> Result<f64> {
    if !(temperature >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    Ok((temperature + 1.0).sqrt())
}

/// The two Eulerian jump conditions evaluated at (left, right, s); both vanish
/// iff the triple is an admissible jump.
pub fn rh_residual_eulerian(
    left: &EquilibriumState,
    right: &EquilibriumState,
    temperature: f64,
    s: f64,
) -> (f64, f64) {
    let mass = -s * (right.n - left.n) + right.n * right.u - left.n * left.u;
    let momentum = -s * (right.n * right.u - left.n * left.u)
        + right.n * right.u * right.u
        - left.n * left.u * left.u
        + (temperature + 1.0) * (right.n - left.n);
    (mass, momentum)
}

/// The two Lagrangian jump conditions at (left, right, s).
pub fn rh_residual_lagrangian(
    left: &LagrangianEquilibrium,
    right: &LagrangianEquilibrium,
    temperature: f64,
    s: f64,
) -> (f64, f64) {
    let mass = -s * (right.v - left.v) - (right.u - left.u);
    let momentum =
        -s * (right.u - left.u) + (temperature + 1.0) * (1.0 / right.v - 1.0 / left.v);
    (mass, momentum)
}

/// Downstream state of the 2-shock with amplitude parameter `eps`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DownstreamData {
    /// Wave speed s = sqrt(T+1) - eps.
    pub s: f64,
    pub state: EquilibriumState,
    /// Correction scalar a_eps = log(s^2/(T+1))/eps + 2/sqrt(T+1).
    pub a_eps: f64,
}

/// Generate the downstream equilibrium from (T, eps):
/// s = sqrt(T+1) - eps, n+ = s^2/(T+1), u+ = s(1 - 1/n+), phi+ = log n+.
///
/// `eps` must lie in (0, max_fraction * sqrt(T+1)); the result satisfies both
/// Eulerian jump conditions to round-off.
pub fn parametrize_downstream(temperature: f64, eps: f64, max_fraction: f64) -> Result<DownstreamData> {
    let c = sound_speed(temperature)?;
    if !(eps > 0.0) || !(eps < max_fraction * c) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, {:.4}) for T = {temperature}, got {eps}",
            max_fraction * c
        )));
    }
    let s = c - eps;
    let n_plus = s * s / (temperature + 1.0);
    let u_plus = s * (1.0 - 1.0 / n_plus);
    let a_eps = (s * s / (temperature + 1.0)).ln() / eps + 2.0 / c;
    Ok(DownstreamData {
        s,
        state: EquilibriumState { n: n_plus, u: u_plus, phi: n_plus.ln() },
        a_eps,
    })
}

/// Same with the default amplitude cap.
pub fn parametrize_downstream_default(temperature: f64, eps: f64) -> Result<DownstreamData> {
    parametrize_downstream(temperature, eps, DEFAULT_MAX_EPS_FRACTION)
}

/// Map an Eulerian equilibrium to Lagrangian variables: v = 1/n, u and phi
/// preserved.
pub fn eulerian_to_lagrangian(state: &EquilibriumState) -> LagrangianEquilibrium {
    LagrangianEquilibrium {
        v: 1.0 / state.n,
        u: state.u,
        phi: state.phi,
    }
}

/// Inverse of [`eulerian_to_lagrangian`].
pub fn lagrangian_to_eulerian(state: &LagrangianEquilibrium) -> EquilibriumState {
    EquilibriumState {
        n: 1.0 / state.v,
        u: state.u,
        phi: state.phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sound_speed_values() {
        assert_eq!(sound_speed(0.0).unwrap(), 1.0);
        assert_eq!(sound_speed(3.0).unwrap(), 2.0);
        assert!((sound_speed(1.0).unwrap() - 1.4142135623730951).abs() < 1e-15);
        assert!(sound_speed(-0.5).is_err());
    }

    #[test]
    fn downstream_t0_eps01() {
        let d = parametrize_downstream_default(0.0, 0.1).unwrap();
        assert!((d.s - 0.9).abs() < 1e-15);
        assert!((d.state.n - 0.81).abs() < 1e-15);
        // u+ = -eps*(2 + eps/(sqrt(T+1)-eps)) = -0.1*(2 + 0.1/0.9)
        assert!((d.state.u - (-0.1 * (2.0 + 0.1 / 0.9))).abs() < 1e-15);
        assert!((d.state.u - (-0.21111111111111111)).abs() < 1e-14);
        assert!((d.state.phi - (-0.21072103131565256)).abs() < 1e-14);
        // a_eps = 10*ln(0.81) + 2
        assert!((d.a_eps - (-0.10721031315652556)).abs() < 1e-13);
    }

    #[test]
    fn a_eps_expansion() {
        // a_eps = -eps/(T+1) - O(eps^2); the quadratic coefficient is
        // 2/(3 (T+1)^{3/2}), so |a_eps + eps/(T+1)| <= eps^2 is generous here.
        let d = parametrize_downstream_default(0.0, 0.1).unwrap();
        assert!((d.a_eps + 0.1).abs() <= 1.0 * 0.1 * 0.1);
        let d = parametrize_downstream_default(3.0, 0.1).unwrap();
        assert!((d.a_eps + 0.1 / 4.0).abs() <= 1.0 * 0.1 * 0.1);
    }

    #[test]
    fn downstream_eps_limit() {
        // eps -> 0+ recovers the sonic constant state
        let d = parametrize_downstream_default(0.0, 1e-9).unwrap();
        assert!((d.s - 1.0).abs() < 2e-9);
        assert!((d.state.n - 1.0).abs() < 3e-9);
        assert!(d.state.u.abs() < 3e-9);
        assert!(d.state.phi.abs() < 3e-9);
    }

    #[test]
    fn eps_out_of_range_rejected() {
        assert!(parametrize_downstream_default(0.0, 0.0).is_err());
        assert!(parametrize_downstream_default(0.0, 0.6).is_err());
        assert!(parametrize_downstream_default(0.0, -0.1).is_err());
        // configurable cap
        assert!(parametrize_downstream(0.0, 0.6, 0.9).is_ok());
    }

    #[test]
    fn eulerian_residuals() {
        let up = EquilibriumState::upstream();
        let (r1, r2) = rh_residual_eulerian(&up, &up, 0.0, 0.37);
        assert_eq!((r1, r2), (0.0, 0.0));

        let d = parametrize_downstream_default(0.0, 0.1).unwrap();
        let (r1, r2) = rh_residual_eulerian(&up, &d.state, 0.0, d.s);
        assert!(r1.abs() < 1e-12, "mass residual {r1}");
        assert!(r2.abs() < 1e-12, "momentum residual {r2}");

        // perturb u+ off the jump locus
        let bad = EquilibriumState { u: -0.2, ..d.state };
        let (_, r2) = rh_residual_eulerian(&up, &bad, 0.0, d.s);
        assert!(r2.abs() > 1e-3, "momentum residual should be visibly nonzero, got {r2}");
    }

    #[test]
    fn lagrangian_residuals_from_eulerian_pair() {
        let up = EquilibriumState::upstream();
        let d = parametrize_downstream_default(0.0, 0.1).unwrap();
        let l = eulerian_to_lagrangian(&up);
        let r = eulerian_to_lagrangian(&d.state);
        let (r1, r2) = rh_residual_lagrangian(&l, &r, 0.0, d.s);
        assert!(r1.abs() < 1e-12, "mass residual {r1}");
        assert!(r2.abs() < 1e-12, "momentum residual {r2}");

        let same = LagrangianEquilibrium { v: 1.3, u: -0.4, phi: 0.2 };
        assert_eq!(rh_residual_lagrangian(&same, &same, 1.0, 2.2), (0.0, 0.0));
    }

    #[test]
    fn lagrangian_mass_condition_forces_positive_speed() {
        // v+ > v- and u+ < u-: the mass condition -s(v+-v-) = (u+-u-) gives
        // s = -(u+-u-)/(v+-v-) > 0.
        for &(dv, du) in &[(0.1, -0.05), (0.5, -0.9), (0.02, -1e-4)] {
            let s = -du / dv;
            assert!(s > 0.0);
            let left = LagrangianEquilibrium { v: 1.0, u: 0.0, phi: 0.0 };
            let right = LagrangianEquilibrium { v: 1.0 + dv, u: du, phi: 0.0 };
            let (r1, _) = rh_residual_lagrangian(&left, &right, 0.0, s);
            assert!(r1.abs() < 1e-15);
        }
    }

    #[test]
    fn eulerian_lagrangian_reciprocal() {
        let e = EquilibriumState {
            n: 0.81,
            u: -0.21111111111111111,
            phi: -0.21072103131565256,
        };
        let l = eulerian_to_lagrangian(&e);
        assert!((l.v - 1.2345679012345678).abs() < 1e-15);
        assert_eq!(l.u, e.u);
        assert_eq!(l.phi, e.phi);
    }

    proptest! {
        /// Over the valid (T, eps) range the parametrized downstream state
        /// satisfies the jump conditions to round-off, is compressive, and is
        /// quasi-neutral by construction.
        #[test]
        fn downstream_invariants(t in 0.0f64..5.0, frac in 0.01f64..0.99) {
            let c = (t + 1.0).sqrt();
            let eps = frac * DEFAULT_MAX_EPS_FRACTION * c;
            let d = parametrize_downstream_default(t, eps).unwrap();
            let up = EquilibriumState::upstream();
            let (r1, r2) = rh_residual_eulerian(&up, &d.state, t, d.s);
            prop_assert!(r1.abs() < 1e-12);
            prop_assert!(r2.abs() < 1e-12);
            prop_assert!(d.state.n < 1.0);
            prop_assert!(d.s < c);
            prop_assert!(d.state.phi == d.state.n.ln());
        }

        /// The coordinate transform is an exact involution on equilibria.
        #[test]
        fn transform_involution(n in 0.05f64..20.0, u in -3.0f64..3.0) {
            let e = EquilibriumState::quasi_neutral(n, u).unwrap();
            let back = lagrangian_to_eulerian(&eulerian_to_lagrangian(&e));
            prop_assert!((back.n - e.n).abs() < 1e-15 * e.n.max(1.0));
            prop_assert!(back.u == e.u);
            prop_assert!(back.phi == e.phi);
        }
    }
}
