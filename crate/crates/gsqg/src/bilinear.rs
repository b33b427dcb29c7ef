//! The quadratic transport operator of the conjugated equation,
//! `B(f, g) = Gamma (R_perp Gamma^{-1} f . grad Gamma^{-1} g)`,
//! in two forms with distinct conditioning:
//!
//! * [`b_fft`] — dealiased pseudo-spectral evaluation. Applies the two
//!   opposing exponential propagators in factorized form, so large
//!   `nu W` costs precision/range; guarded.
//! * [`b_direct`] — `O(N^4)` lattice convolution with the combined
//!   exponent evaluated per pair. The combined exponent is bounded by
//!   `2 nu |W| min(|j|, |k-j|)^s`, which keeps it well conditioned where
//!   the factorized path is not. Grids are soft-capped at N = 64.
//!
//! Sign bookkeeping: the gradient on the second slot contributes
//! `i(k - j)`, the Riesz factor `i j_perp / |j|`; the product of the two
//! `i`s yields the leading minus sign in
//! `B_hat(k) = -sum_j e^{-nu W (|k|^s - |j|^s - |k-j|^s)} (j_perp.(k-j) / |j|) f_hat(j) g_hat(k-j)`.
//! The convention is pinned by a hand-computed cross-shell case in the
//! tests below.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::{wavenumber, wavenumber_pow};
use crate::ops::{gradient, riesz_perp};
use crate::params::GevreyParams;
use crate::transform::dft2_inplace;

/// Largest grid accepted by the direct convolution.
pub const DIRECT_SOFT_CAP: usize = 64;

fn check_grids(f: &FourierField, g: &FourierField) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(format!(
            "bilinear inputs on different grids: N = {} vs {}",
            f.grid().n(),
            g.grid().n()
        )));
    }
    Ok(())
}

/// Multiplies `e^{expo_sign * nu * W |k|^s}` over the dealias-retained modes.
/// Content outside the cutoff must already be zero.
fn retained_exponential(f: &mut FourierField, coef: f64, s: f64) {
    let grid = f.grid();
    for (idx, k) in grid.iter_modes() {
        if k == (0, 0) {
            continue;
        }
        let c = &mut f.coeffs_mut()[idx];
        if *c != Complex64::new(0.0, 0.0) {
            *c *= (coef * wavenumber_pow(k, s)).exp();
        }
    }
}

/// Inverse transform for internal intermediates that are Hermitian by
/// construction; skips the public reality check.
fn to_physical_unchecked(f: &FourierField) -> Vec<f64> {
    let n = f.grid().n();
    let mut buf = f.coeffs().to_vec();
    dft2_inplace(&mut buf, n, false);
    buf.into_iter().map(|c| c.re).collect()
}

/// Fast dealiased pseudo-spectral evaluation of `B(f, g)` at Wiener value
/// `w_val`.
///
/// Inputs are truncated to the 2/3-rule square before the product, so the
/// retained output coefficients equal the exact lattice convolution of the
/// truncated inputs; the output is dealiased, Hermitian, and has an exactly
/// vanishing zero mode.
pub fn b_fft(
    f: &FourierField,
    g: &FourierField,
    w_val: f64,
    params: &GevreyParams,
) -> Result<FourierField> {
    check_grids(f, g)?;
    let grid = f.grid();
    let max_exp = params.nu * w_val.abs() * grid.max_retained_wavenumber().powf(params.s);
    params.guard_exponent(max_exp)?;

    let mut ft = f.clone();
    ft.dealias();
    let mut gt = g.clone();
    gt.dealias();
    // Gamma^{-1} = e^{+nu W |k|^s} on both inputs.
    let amp = params.nu * w_val;
    retained_exponential(&mut ft, amp, params.s);
    retained_exponential(&mut gt, amp, params.s);

    let (vx, vy) = riesz_perp(&ft);
    let (gx, gy) = gradient(&gt);
    let vx = to_physical_unchecked(&vx);
    let vy = to_physical_unchecked(&vy);
    let gx = to_physical_unchecked(&gx);
    let gy = to_physical_unchecked(&gy);

    let n = grid.n();
    let mut prod: Vec<Complex64> = (0..n * n)
        .map(|i| Complex64::new(vx[i] * gx[i] + vy[i] * gy[i], 0.0))
        .collect();
    dft2_inplace(&mut prod, n, true);
    let scale = 1.0 / (n * n) as f64;
    for c in &mut prod {
        *c *= scale;
    }

    let mut out = FourierField::zero(grid);
    out.coeffs_mut().copy_from_slice(&prod);
    out.enforce_reality();
    out.dealias();
    out.set_coeff((0, 0), Complex64::new(0.0, 0.0));
    // Gamma = e^{-nu W |k|^s} on the output.
    retained_exponential(&mut out, -amp, params.s);
    Ok(out)
}

/// Exact truncated-lattice convolution oracle for `B(f, g)`.
///
/// Evaluates the combined exponent `|k|^s - |j|^s - |k-j|^s` per pair.
/// Output modes land on the representable set `|k_i| <= N/2 - 1`; the
/// zero mode vanishes termwise (`j_perp . (-j) = 0`).
pub fn b_direct(
    f: &FourierField,
    g: &FourierField,
    w_val: f64,
    params: &GevreyParams,
) -> Result<FourierField> {
    check_grids(f, g)?;
    let grid = f.grid();
    if grid.n() > DIRECT_SOFT_CAP {
        return Err(Error::SoftCapExceeded {
            n: grid.n(),
            cap: DIRECT_SOFT_CAP,
        });
    }
    let fs = f.nonzero_modes();
    let gs = g.nonzero_modes();
    let s = params.s;
    let nu_w = params.nu * w_val;
    let mut out = FourierField::zero(grid);
    for &(j, fj) in &fs {
        let jn = wavenumber(j);
        let jns = jn.powf(s);
        for &(m, gm) in &gs {
            let k = (j.0 + m.0, j.1 + m.1);
            if k == (0, 0) || !grid.contains_mode(k) {
                continue;
            }
            // j_perp . m with j_perp = (-j2, j1)
            let kernel = (j.0 as f64) * (m.1 as f64) - (j.1 as f64) * (m.0 as f64);
            if kernel == 0.0 {
                continue;
            }
            let expo = -nu_w * (wavenumber(k).powf(s) - jns - wavenumber(m).powf(s));
            let term = fj * gm * (-kernel / jn * expo.exp());
            let idx = grid.index_of(k);
            out.coeffs_mut()[idx] += term;
        }
    }
    out.enforce_reality();
    Ok(out)
}
