use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cap on exponent magnitudes fed to `exp` inside diagonal multipliers,
/// in natural-log units. Double precision overflows near 709; the margin
/// keeps downstream products finite.
pub const OVERFLOW_GUARD: f64 = 600.0;

/// Parameter bundle for the dissipative/Gevrey setup.
///
/// * `nu`     — diffusion constant, > 0
/// * `s`      — differentiability index, 0 < s <= 1
/// * `sigma`  — Sobolev/Gevrey index (norms live in `H^{sigma*s}`)
/// * `alpha`  — initial analyticity radius in `|grad|^s` units, > 0
/// * `beta`   — radius growth rate per unit time, 0 < beta < nu^2/2
/// * `epsilon`— regularity margin, 0 < epsilon < alpha
///
/// The weight schedule is `phi(t) = alpha + beta*t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub nu: f64,
    pub s: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl GevreyParams {
    pub fn new(nu: f64, s: f64, sigma: f64, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let p = GevreyParams {
            nu,
            s,
            sigma,
            alpha,
            beta,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidParams(format!("nu must be > 0, got {}", self.nu)));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "s must lie in (0, 1], got {}",
                self.s
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta < 0.5 * self.nu * self.nu) {
            return Err(Error::InvalidParams(format!(
                "beta must lie in (0, nu^2/2) = (0, {}), got {}",
                0.5 * self.nu * self.nu,
                self.beta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.alpha) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, alpha) = (0, {}), got {}",
                self.alpha, self.epsilon
            )));
        }
        Ok(())
    }

    /// Radius schedule `phi(t) = alpha + beta*t`.
    pub fn phi(&self, t: f64) -> f64 {
        self.alpha + self.beta * t
    }

    /// Whether `sigma` sits in the window `(1/s, 2)` required by the
    /// contraction-mapping analysis. The window is empty for s <= 1/2,
    /// so this is advisory: norms, integration and diagnostics are well
    /// defined for any sigma > 0 and several verification suites run
    /// outside the window on purpose.
    pub fn sigma_in_analysis_window(&self) -> bool {
        self.sigma > 1.0 / self.s && self.sigma < 2.0
    }

    /// Admissibility threshold `nu^2/2 - beta` for the small-data condition.
    pub fn admissibility_threshold(&self) -> f64 {
        0.5 * self.nu * self.nu - self.beta
    }

    /// Infinite-horizon probability that `nu*W_t - beta*t` ever exceeds
    /// `level`, i.e. `exp(-2*level*beta/nu^2)`.
    pub fn crossing_probability(&self, level: f64) -> f64 {
        (-2.0 * level * self.beta / (self.nu * self.nu)).exp()
    }

    /// Checks a diagonal-exponential magnitude against the overflow guard.
    pub fn guard_exponent(&self, exponent: f64) -> Result<()> {
        if exponent.abs() > OVERFLOW_GUARD {
            Err(Error::OverflowGuard {
                exponent: exponent.abs(),
                cap: OVERFLOW_GUARD,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> GevreyParams {
        GevreyParams::new(1.0, 0.75, 1.5, 1.0, 0.25, 0.5).unwrap()
    }

    #[test]
    fn phi_is_affine() {
        let p = base();
        assert_eq!(p.phi(0.0), 1.0);
        assert_eq!(p.phi(2.0), 1.5);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(GevreyParams::new(-1.0, 0.75, 1.5, 1.0, 0.25, 0.5).is_err());
        assert!(GevreyParams::new(1.0, 1.5, 1.5, 1.0, 0.25, 0.5).is_err());
        assert!(GevreyParams::new(1.0, 0.75, 1.5, 1.0, 0.6, 0.5).is_err());
        assert!(GevreyParams::new(1.0, 0.75, 1.5, 1.0, 0.25, 1.5).is_err());
        assert!(GevreyParams::new(1.0, 0.75, -0.5, 1.0, 0.25, 0.5).is_err());
    }

    #[test]
    fn analysis_window_is_advisory() {
        // s = 0.5 makes the window (2, 2) empty; construction still succeeds.
        let p = GevreyParams::new(1.0, 0.5, 1.5, 1.0, 0.25, 0.5).unwrap();
        assert!(!p.sigma_in_analysis_window());
        let q = base();
        assert!(q.sigma_in_analysis_window());
    }

    #[test]
    fn threshold_matches_arithmetic() {
        let p = GevreyParams::new(2.0, 0.75, 1.5, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(p.admissibility_threshold(), 1.0);
    }
}
