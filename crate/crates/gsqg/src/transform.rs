//! Thin 2D DFT layer over rustfft with per-thread plan caching.
//!
//! Forward = `sum u(x) e^{-ik.x}` (unnormalized), inverse = `sum c(k) e^{+ik.x}`.
//! Normalization conventions live in `field.rs`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// In-place unnormalized 2D DFT of a row-major `n x n` array.
pub fn dft2_inplace(data: &mut [Complex64], n: usize, forward: bool) {
    assert_eq!(data.len(), n * n, "dft2 buffer size mismatch");
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_plane_wave_sum() {
        // 4x4 delta at x-index (1, 2): forward DFT gives e^{-i 2pi (k1*1 + k2*2)/4}.
        let n = 4;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data[n + 2] = Complex64::new(1.0, 0.0);
        dft2_inplace(&mut data, n, true);
        for i1 in 0..n {
            for i2 in 0..n {
                let phase = -2.0 * std::f64::consts::PI * ((i1 + 2 * i2) as f64) / n as f64;
                let expect = Complex64::from_polar(1.0, phase);
                let got = data[i1 * n + i2];
                assert!((got - expect).norm() < 1e-12, "at ({i1},{i2})");
            }
        }
    }

    #[test]
    fn roundtrip_scales_by_n_squared() {
        let n = 8;
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let orig = data.clone();
        dft2_inplace(&mut data, n, true);
        dft2_inplace(&mut data, n, false);
        let scale = (n * n) as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }
}
