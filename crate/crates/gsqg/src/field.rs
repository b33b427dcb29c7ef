//! Mean-zero real scalar fields on the 2-torus, stored as truncated
//! Fourier coefficients with Hermitian symmetry.
//!
//! Convention: `u_hat(k) = (2pi)^{-2} \int u e^{-ik.x} dx`, so the physical
//! field is the plain sum `u(x) = sum_k u_hat(k) e^{ik.x}` and all norms are
//! coefficient-space l2 sums. A single conjugate pair `u_hat(+-(1,0)) = 1`
//! is the physical field `2 cos(x_1)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{wavenumber_pow, SpectralGrid};
use crate::ops;
use crate::params::GevreyParams;
use crate::transform::dft2_inplace;

/// Relative imaginary-residue tolerance for the inverse transform.
pub const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zero(grid: SpectralGrid) -> Self {
        FourierField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Builds a field from explicitly listed modes; Hermitian mirrors are
    /// auto-filled as conjugates.
    ///
    /// Rejects: a nonzero amplitude at `k = 0`, wavevectors outside the
    /// representable set (including the mirror-less Nyquist row/column),
    /// and conflicting amplitudes at `k` and `-k` that are not conjugate.
    pub fn from_modes(grid: SpectralGrid, modes: &[((i32, i32), Complex64)]) -> Result<Self> {
        let mut field = FourierField::zero(grid);
        let mut assigned: Vec<((i32, i32), Complex64)> = Vec::with_capacity(2 * modes.len());
        for &(k, amp) in modes {
            if k == (0, 0) {
                if amp != Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidMode {
                        k,
                        reason: "zero mode must vanish (mean-zero field)".into(),
                    });
                }
                continue;
            }
            if !grid.contains_mode(k) {
                return Err(Error::InvalidMode {
                    k,
                    reason: format!(
                        "outside representable set |k_i| <= {} (Nyquist modes have no Hermitian mirror)",
                        grid.max_component()
                    ),
                });
            }
            for &(k2, amp2) in &[(k, amp), ((-k.0, -k.1), amp.conj())] {
                if let Some(&(_, prev)) = assigned.iter().find(|(kk, _)| *kk == k2) {
                    if prev != amp2 {
                        return Err(Error::InvalidMode {
                            k: k2,
                            reason: format!(
                                "conflicting amplitudes: {prev} vs {amp2} (k and -k must be conjugate)"
                            ),
                        });
                    }
                } else {
                    assigned.push((k2, amp2));
                    field.coeffs[grid.index_of(k2)] = amp2;
                }
            }
        }
        Ok(field)
    }

    /// Seeded Gaussian field with profile `|k|^{-slope} e^{-(alpha+eps)|k|^s}`
    /// on the dealias-retained half-lattice, rescaled so that the Gevrey
    /// norm at radius `alpha + epsilon` and index `sigma` equals `target_norm`.
    pub fn random(
        seed: u64,
        grid: SpectralGrid,
        params: &GevreyParams,
        target_norm: f64,
        spectral_slope: f64,
    ) -> Result<Self> {
        if target_norm < 0.0 || !target_norm.is_finite() {
            return Err(Error::InvalidParams(format!(
                "target norm must be finite and >= 0, got {target_norm}"
            )));
        }
        let mut field = FourierField::zero(grid);
        if target_norm == 0.0 {
            return Ok(field);
        }
        let radius = params.alpha + params.epsilon;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in grid.iter_half_lattice() {
            // Fixed draw order keeps fields bit-identical across cutoffs.
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if !grid.retained(k) {
                continue;
            }
            let profile =
                wavenumber_pow(k, -spectral_slope) * (-radius * wavenumber_pow(k, params.s)).exp();
            let amp = Complex64::new(re, im) * profile;
            field.coeffs[grid.index_of(k)] = amp;
            field.coeffs[grid.index_of((-k.0, -k.1))] = amp.conj();
        }
        let current = ops::gevrey_norm(&field, radius, params, params.sigma)?;
        if current == 0.0 {
            return Err(Error::InvalidParams(
                "random field degenerated to zero; cannot normalize".into(),
            ));
        }
        field.scale(target_norm / current);
        Ok(field)
    }

    pub fn grid(&self) -> SpectralGrid {
        self.grid
    }

    pub fn coeff(&self, k: (i32, i32)) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn set_coeff(&mut self, k: (i32, i32), value: Complex64) {
        let idx = self.grid.index_of(k);
        self.coeffs[idx] = value;
    }

    /// Nonzero coefficients in row-major order.
    pub fn nonzero_modes(&self) -> Vec<((i32, i32), Complex64)> {
        self.grid
            .iter_modes()
            .filter_map(|(idx, k)| {
                let c = self.coeffs[idx];
                (c != Complex64::new(0.0, 0.0)).then_some((k, c))
            })
            .collect()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn add_scaled(&mut self, other: &FourierField, factor: f64) {
        assert_eq!(self.grid, other.grid, "grid mismatch in add_scaled");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
    }

    pub fn sub(&self, other: &FourierField) -> FourierField {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn has_nan(&self) -> bool {
        self.coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
    }

    /// Max Hermitian-symmetry defect `|u_hat(-k) - conj(u_hat(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in self.grid.iter_half_lattice() {
            let defect = (self.coeff((-k.0, -k.1)) - self.coeff(k).conj()).norm();
            worst = worst.max(defect);
        }
        worst = worst.max(self.coeff((0, 0)).im.abs());
        worst
    }

    /// Projects exactly onto the representable Hermitian mean-zero set:
    /// conjugate-averages each `{k, -k}` pair, zeroes the mean and the
    /// Nyquist row/column. Changes coefficients by at most the current
    /// symmetry defect.
    pub fn enforce_reality(&mut self) {
        let n = self.grid.n();
        let nyq = n / 2;
        for i1 in 0..n {
            for i2 in 0..n {
                if i1 == nyq || i2 == nyq {
                    self.coeffs[i1 * n + i2] = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        let grid = self.grid;
        for k in grid.iter_half_lattice() {
            let a = self.coeff(k);
            let b = self.coeff((-k.0, -k.1));
            let avg = 0.5 * (a + b.conj());
            self.set_coeff(k, avg);
            self.set_coeff((-k.0, -k.1), avg.conj());
        }
    }

    /// Applies the 2/3-rule square mask in place.
    pub fn dealias(&mut self) {
        for (idx, k) in self.grid.iter_modes() {
            if !self.grid.retained(k) {
                self.coeffs[idx] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Real samples on the uniform `N x N` grid, `x = (2pi i1/N, 2pi i2/N)`,
    /// row-major in `(i1, i2)`.
    ///
    /// Errors with `NonRealResidue` if the imaginary part left by a
    /// Hermitian-symmetry violation exceeds `REALITY_TOL` relative to the
    /// field amplitude.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        let n = self.grid.n();
        let mut buf = self.coeffs.clone();
        dft2_inplace(&mut buf, n, false);
        let mut max_re: f64 = 0.0;
        let mut max_im: f64 = 0.0;
        for c in &buf {
            max_re = max_re.max(c.re.abs());
            max_im = max_im.max(c.im.abs());
        }
        let tol = REALITY_TOL * max_re.max(1e-300);
        if max_im > tol {
            return Err(Error::NonRealResidue {
                residue: max_im,
                tol,
            });
        }
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Recovers coefficients from real samples (forward DFT / N^2), then
    /// projects onto the mean-zero Hermitian representable set. The sample
    /// mean and any Nyquist content are discarded.
    pub fn from_physical(grid: SpectralGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let n = grid.n();
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        dft2_inplace(&mut buf, n, true);
        let scale = 1.0 / (n * n) as f64;
        for c in &mut buf {
            *c *= scale;
        }
        let mut field = FourierField { grid, coeffs: buf };
        field.enforce_reality();
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid8() -> SpectralGrid {
        SpectralGrid::new(8).unwrap()
    }

    fn params() -> GevreyParams {
        GevreyParams::new(1.0, 0.75, 1.5, 1.0, 0.25, 0.5).unwrap()
    }

    /// Brute-force Fourier sum, independent of the FFT path.
    fn eval_sum(field: &FourierField, x1: f64, x2: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, k) in field.grid().iter_modes() {
            let phase = (k.0 as f64) * x1 + (k.1 as f64) * x2;
            acc += field.coeffs()[idx] * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    #[test]
    fn empty_mode_list_is_zero_field() {
        let f = FourierField::from_modes(grid8(), &[]).unwrap();
        assert_eq!(f.max_abs_coeff(), 0.0);
        assert!(f.to_physical().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_cosine_pair() {
        let f =
            FourierField::from_modes(grid8(), &[((1, 0), Complex64::new(1.0, 0.0))]).unwrap();
        assert_eq!(f.coeff((-1, 0)), Complex64::new(1.0, 0.0));
        let phys = f.to_physical().unwrap();
        let n = 8;
        for i1 in 0..n {
            let x1 = 2.0 * std::f64::consts::PI * i1 as f64 / n as f64;
            for i2 in 0..n {
                assert!((phys[i1 * n + i2] - 2.0 * x1.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn imaginary_amplitude_gives_minus_two_sine() {
        // Oracle: direct Fourier sum at 16 sample points.
        let f =
            FourierField::from_modes(grid8(), &[((1, 0), Complex64::new(0.0, 1.0))]).unwrap();
        for i in 0..16 {
            let x1 = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
            let x2 = 0.37 * i as f64;
            let v = eval_sum(&f, x1, x2);
            assert!(v.im.abs() < 1e-12);
            assert!((v.re - (-2.0 * x1.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_zero_mode_and_nyquist_and_conflicts() {
        let g = grid8();
        assert!(FourierField::from_modes(g, &[((0, 0), Complex64::new(1.0, 0.0))]).is_err());
        assert!(FourierField::from_modes(g, &[((-4, 0), Complex64::new(1.0, 0.0))]).is_err());
        assert!(FourierField::from_modes(g, &[((9, 0), Complex64::new(1.0, 0.0))]).is_err());
        // k and -k listed with non-conjugate amplitudes
        let conflict = [
            ((1, 1), Complex64::new(1.0, 2.0)),
            ((-1, -1), Complex64::new(1.0, 2.0)),
        ];
        assert!(FourierField::from_modes(g, &conflict).is_err());
        // conjugate listing is fine
        let ok = [
            ((1, 1), Complex64::new(1.0, 2.0)),
            ((-1, -1), Complex64::new(1.0, -2.0)),
        ];
        assert!(FourierField::from_modes(g, &ok).is_ok());
        // zero mode listed with zero amplitude is a no-op
        assert!(FourierField::from_modes(g, &[((0, 0), Complex64::new(0.0, 0.0))]).is_ok());
    }

    #[test]
    fn random_field_is_deterministic_and_normalized() {
        let g = SpectralGrid::new(16).unwrap();
        let p = params();
        let f1 = FourierField::random(7, g, &p, 0.5, 2.0).unwrap();
        let f2 = FourierField::random(7, g, &p, 0.5, 2.0).unwrap();
        assert_eq!(f1.coeffs(), f2.coeffs());

        // Independent norm recomputation (plain summation oracle).
        let radius = p.alpha + p.epsilon;
        let mut sum = 0.0;
        for (_, (k, c)) in f1
            .grid()
            .iter_modes()
            .map(|(i, k)| (i, (k, f1.coeffs()[i])))
        {
            let kn = wavenumber_pow(k, 1.0);
            if kn > 0.0 {
                sum += kn.powf(2.0 * p.sigma * p.s)
                    * (2.0 * radius * kn.powf(p.s)).exp()
                    * c.norm_sqr();
            }
        }
        assert!((sum.sqrt() - 0.5).abs() < 1e-12 * 0.5);

        let zero = FourierField::random(7, g, &p, 0.0, 2.0).unwrap();
        assert_eq!(zero.max_abs_coeff(), 0.0);
    }

    #[test]
    fn random_field_stays_within_cutoff_and_hermitian() {
        let g = SpectralGrid::new(16).unwrap();
        let f = FourierField::random(3, g, &params(), 1.0, 1.0).unwrap();
        assert_eq!(f.hermitian_defect(), 0.0);
        for (idx, k) in g.iter_modes() {
            if !g.retained(k) {
                assert_eq!(f.coeffs()[idx], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn physical_roundtrip_identity() {
        let g = SpectralGrid::new(16).unwrap();
        let f = FourierField::random(11, g, &params(), 1.0, 1.5).unwrap();
        let back = FourierField::from_physical(g, &f.to_physical().unwrap()).unwrap();
        let scale = f.max_abs_coeff();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn non_real_residue_detected() {
        let g = grid8();
        let mut f = FourierField::zero(g);
        // Hermitian violation planted directly.
        f.set_coeff((1, 0), Complex64::new(1.0, 0.0));
        f.set_coeff((-1, 0), Complex64::new(0.0, 1.0));
        match f.to_physical() {
            Err(Error::NonRealResidue { .. }) => {}
            other => panic!("expected NonRealResidue, got {other:?}"),
        }
    }
}
