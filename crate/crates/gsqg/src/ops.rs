//! Diagonal multiplier calculus (Riesz transforms, fractional derivatives,
//! exponential propagators) and the Gevrey/Sobolev norms.
//!
//! Every operation here is a pure function of its inputs; symbols are
//! evaluated per wavevector with the zero-mode convention `|0|^r := 0`,
//! so the mean is annihilated by all of them.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::FourierField;
use crate::grid::{wavenumber, wavenumber_pow};
use crate::params::GevreyParams;

/// Compensated (Kahan) accumulator; norm sums run in fixed row-major
/// order so results are bit-reproducible across runs and worker counts.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn map_symbol(f: &FourierField, symbol: impl Fn((i32, i32)) -> Complex64) -> FourierField {
    let mut out = f.clone();
    let grid = f.grid();
    for (idx, k) in grid.iter_modes() {
        let c = out.coeffs_mut();
        if k == (0, 0) {
            c[idx] = Complex64::new(0.0, 0.0);
        } else {
            c[idx] *= symbol(k);
        }
    }
    out
}

/// Perpendicular Riesz transform pair `(-R_2, R_1)`: component symbols
/// `i(-k_2)/|k|` and `i k_1/|k|`. Both outputs are Hermitian (the physical
/// velocity components are real) and divergence-free as a vector field.
pub fn riesz_perp(f: &FourierField) -> (FourierField, FourierField) {
    let vx = map_symbol(f, |k| Complex64::new(0.0, -(k.1 as f64) / wavenumber(k)));
    let vy = map_symbol(f, |k| Complex64::new(0.0, (k.0 as f64) / wavenumber(k)));
    (vx, vy)
}

/// Gradient pair with symbols `i k_1`, `i k_2`.
pub fn gradient(f: &FourierField) -> (FourierField, FourierField) {
    let gx = map_symbol(f, |k| Complex64::new(0.0, k.0 as f64));
    let gy = map_symbol(f, |k| Complex64::new(0.0, k.1 as f64));
    (gx, gy)
}

/// Fractional derivative `|grad|^r`: multiplies by `|k|^r`.
pub fn frac_deriv(f: &FourierField, r: f64) -> FourierField {
    map_symbol(f, |k| Complex64::new(wavenumber_pow(k, r), 0.0))
}

/// Exponential propagator: multiplies by `e^{-tau * nu |k|^s}`.
///
/// `tau = W_t` realizes the conjugation propagator, `tau = -W_t` its
/// inverse. Guarded: `nu |tau| max(|k|)^s` must stay under the overflow
/// cap, else the factorized bilinear path should fall back to the
/// direct-convolution form.
pub fn gamma_apply(f: &FourierField, tau: f64, params: &GevreyParams) -> Result<FourierField> {
    let max_exp = params.nu * tau.abs() * f.grid().max_wavenumber().powf(params.s);
    params.guard_exponent(max_exp)?;
    Ok(map_symbol(f, |k| {
        Complex64::new((-tau * params.nu * wavenumber_pow(k, params.s)).exp(), 0.0)
    }))
}

/// Weighted norm `( sum_{k != 0} |k|^{2 gamma s} e^{2 phi |k|^s} |u_hat(k)|^2 )^{1/2}`.
pub fn gevrey_norm(
    f: &FourierField,
    phi_val: f64,
    params: &GevreyParams,
    gamma_index: f64,
) -> Result<f64> {
    if phi_val < 0.0 {
        return Err(crate::error::Error::InvalidParams(format!(
            "gevrey_norm requires phi >= 0, got {phi_val}"
        )));
    }
    let max_exp = 2.0 * phi_val * f.grid().max_wavenumber().powf(params.s);
    params.guard_exponent(max_exp)?;
    let mut acc = KahanSum::default();
    let r = gamma_index * params.s;
    for (idx, k) in f.grid().iter_modes() {
        if k == (0, 0) {
            continue;
        }
        let kn = wavenumber(k);
        let weight = kn.powf(2.0 * r) * (2.0 * phi_val * kn.powf(params.s)).exp();
        acc.add(weight * f.coeffs()[idx].norm_sqr());
    }
    Ok(acc.value().sqrt())
}

/// Homogeneous Sobolev norm `( sum |k|^{2r} |u_hat|^2 )^{1/2}`; the
/// unweighted specialization of `gevrey_norm`.
pub fn sobolev_norm(f: &FourierField, r: f64) -> f64 {
    let mut acc = KahanSum::default();
    for (idx, k) in f.grid().iter_modes() {
        if k == (0, 0) {
            continue;
        }
        acc.add(wavenumber_pow(k, 2.0 * r) * f.coeffs()[idx].norm_sqr());
    }
    acc.value().sqrt()
}

/// `l2` norm of the coefficients (`sobolev_norm` with r = 0).
pub fn l2_norm(f: &FourierField) -> f64 {
    sobolev_norm(f, 0.0)
}

/// Real L2 pairing `<f, g> = Re sum f_hat(k) conj(g_hat(k))`.
pub fn pairing(f: &FourierField, g: &FourierField) -> f64 {
    assert_eq!(f.grid(), g.grid(), "grid mismatch in pairing");
    let mut acc = KahanSum::default();
    for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
        acc.add((a * b.conj()).re);
    }
    acc.value()
}
