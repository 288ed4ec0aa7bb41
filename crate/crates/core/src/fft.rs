//! Cached FFT plans shared across threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Scratch buffer large enough for both directions.
    pub fn scratch(&self) -> Vec<Complex64> {
        let len = self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len]
    }

    pub fn forward_with(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub fn inverse_with(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }
}

static PLANS: OnceLock<Mutex<HashMap<usize, FftPair>>> = OnceLock::new();

pub(crate) fn plan(n: usize) -> FftPair {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::<f64>::new();
            FftPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

/// Frequency of FFT bin `k` (standard ordering) for a transform of length
/// `n` over a period `extent`. Bin `n/2` maps to the negative Nyquist
/// frequency so that the range matches the centered grid `[-n/2L, n/2L)`.
pub(crate) fn bin_frequency(k: usize, n: usize, extent: f64) -> f64 {
    if k < n / 2 {
        k as f64 / extent
    } else {
        (k as f64 - n as f64) / extent
    }
}

/// In-place 2-D transform of a row-major `rows x cols` buffer.
pub(crate) fn fft2(buf: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let row_plan = plan(cols);
    for row in buf.chunks_exact_mut(cols) {
        if inverse {
            row_plan.inverse(row);
        } else {
            row_plan.forward(row);
        }
    }
    let col_plan = plan(rows);
    let mut col = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = buf[r * cols + c];
        }
        if inverse {
            col_plan.inverse(&mut col);
        } else {
            col_plan.forward(&mut col);
        }
        for r in 0..rows {
            buf[r * cols + c] = col[r];
        }
    }
}
