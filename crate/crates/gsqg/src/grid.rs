use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated Fourier lattice for mean-zero real fields on the 2-torus.
///
/// Modes are `k = (k1, k2)` with `-N/2 <= k_i < N/2`, stored in FFT order
/// (row-major over the frequency indices). The Nyquist row/column
/// `k_i = -N/2` has no Hermitian mirror inside the lattice and is kept
/// identically zero; field content lives in `|k_i| <= N/2 - 1`, which is
/// a superset of the dealias-retained square for every legal cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    n: usize,
    dealias_cutoff: f64,
}

impl SpectralGrid {
    /// Grid with the default 2/3-rule cutoff `floor(N/3)`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cutoff(n, (n / 3) as f64)
    }

    pub fn with_cutoff(n: usize, dealias_cutoff: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "N must be even and >= 4, got {n}"
            )));
        }
        if !(dealias_cutoff > 0.0) || dealias_cutoff > (n / 2) as f64 {
            return Err(Error::InvalidGrid(format!(
                "dealias cutoff must lie in (0, N/2], got {dealias_cutoff}"
            )));
        }
        Ok(SpectralGrid { n, dealias_cutoff })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_cutoff
    }

    /// Number of stored coefficients (N^2, FFT layout).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed frequency for a storage index along one axis.
    pub fn freq_of_index(&self, i: usize) -> i32 {
        let n = self.n as i32;
        let i = i as i32;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index for a signed frequency along one axis.
    pub fn index_of_freq(&self, k: i32) -> usize {
        let n = self.n as i32;
        (k.rem_euclid(n)) as usize
    }

    /// Flat row-major index of the wavevector `k`.
    pub fn index_of(&self, k: (i32, i32)) -> usize {
        self.index_of_freq(k.0) * self.n + self.index_of_freq(k.1)
    }

    /// Wavevector of the flat index `idx`.
    pub fn wavevector_of(&self, idx: usize) -> (i32, i32) {
        let i1 = idx / self.n;
        let i2 = idx % self.n;
        (self.freq_of_index(i1), self.freq_of_index(i2))
    }

    /// Largest representable frequency magnitude per axis (`N/2 - 1`).
    pub fn max_component(&self) -> i32 {
        (self.n / 2 - 1) as i32
    }

    /// Largest `|k|` over the representable (non-Nyquist) mode set.
    pub fn max_wavenumber(&self) -> f64 {
        let m = self.max_component() as f64;
        (2.0 * m * m).sqrt()
    }

    /// Largest `|k|` over the dealias-retained square.
    pub fn max_retained_wavenumber(&self) -> f64 {
        let c = self.dealias_cutoff.floor();
        (2.0 * c * c).sqrt()
    }

    /// Whether `k` is representable field content: inside the lattice,
    /// not the zero mode, not on the Nyquist row/column.
    pub fn contains_mode(&self, k: (i32, i32)) -> bool {
        let m = self.max_component();
        k != (0, 0) && k.0.abs() <= m && k.1.abs() <= m
    }

    /// Whether `k` survives the 2/3-rule square mask.
    pub fn retained(&self, k: (i32, i32)) -> bool {
        (k.0.abs() as f64) <= self.dealias_cutoff && (k.1.abs() as f64) <= self.dealias_cutoff
    }

    /// Row-major iteration over all stored wavevectors.
    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, (i32, i32))> + '_ {
        (0..self.len()).map(move |idx| (idx, self.wavevector_of(idx)))
    }

    /// Canonical Hermitian half-lattice: one representative per `{k, -k}`
    /// pair of representable modes (`k1 > 0`, or `k1 == 0 && k2 > 0`).
    pub fn iter_half_lattice(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let m = self.max_component();
        (0..=m).flat_map(move |k1| {
            let lo = if k1 == 0 { 1 } else { -m };
            (lo..=m).map(move |k2| (k1, k2))
        })
    }
}

/// `|k|` for a lattice wavevector.
pub fn wavenumber(k: (i32, i32)) -> f64 {
    let (a, b) = (k.0 as f64, k.1 as f64);
    (a * a + b * b).sqrt()
}

/// `|k|^r` with the zero-mode convention `|0|^r := 0`.
pub fn wavenumber_pow(k: (i32, i32), r: f64) -> f64 {
    if k == (0, 0) {
        0.0
    } else {
        wavenumber(k).powf(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(SpectralGrid::new(2).is_err());
        assert!(SpectralGrid::new(7).is_err());
        assert!(SpectralGrid::with_cutoff(8, 5.0).is_err());
        assert!(SpectralGrid::new(8).is_ok());
    }

    #[test]
    fn default_cutoff_is_two_thirds_rule() {
        assert_eq!(SpectralGrid::new(16).unwrap().dealias_cutoff(), 5.0);
        assert_eq!(SpectralGrid::new(64).unwrap().dealias_cutoff(), 21.0);
    }

    #[test]
    fn index_freq_roundtrip() {
        let g = SpectralGrid::new(8).unwrap();
        for idx in 0..g.len() {
            let k = g.wavevector_of(idx);
            assert_eq!(g.index_of(k), idx);
        }
        assert_eq!(g.freq_of_index(0), 0);
        assert_eq!(g.freq_of_index(3), 3);
        assert_eq!(g.freq_of_index(4), -4);
        assert_eq!(g.freq_of_index(7), -1);
    }

    #[test]
    fn half_lattice_covers_mode_set_once() {
        let g = SpectralGrid::new(8).unwrap();
        let mut seen = std::collections::HashSet::new();
        for k in g.iter_half_lattice() {
            assert!(g.contains_mode(k));
            assert!(seen.insert(k), "duplicate {k:?}");
            assert!(
                !seen.contains(&(-k.0, -k.1)),
                "mirror of {k:?} already listed"
            );
        }
        // m = 3: pairs = ((2m+1)^2 - 1)/2 = 24
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn zero_mode_power_convention() {
        assert_eq!(wavenumber_pow((0, 0), -2.0), 0.0);
        assert_eq!(wavenumber_pow((3, 4), 1.0), 5.0);
        assert_eq!(wavenumber_pow((0, 2), 1.0), 2.0);
    }
}
