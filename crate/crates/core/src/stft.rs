//! Short-time Fourier transform on phase-space lattices.
//!
//! `V_g f(x, xi) = int f(v) conj(g(v - x)) exp(-2 pi i xi v) dv`, evaluated
//! one lattice row at a time. Each row only touches the samples under the
//! window, so the FFT length is the smallest power of two that covers the
//! window support and still lands on the lattice frequencies.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{inverse_fourier, GridSpec, SampledSignal, Window};
use crate::io::complex_to_le_bytes;

/// Sampling lattice: subsets of the grid's spatial and frequency points,
/// stored as sorted grid indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TFLattice {
    grid: GridSpec,
    x_idx: Vec<usize>,
    xi_idx: Vec<usize>,
}

impl TFLattice {
    pub fn full(grid: GridSpec) -> Self {
        let n = grid.n_points();
        Self { grid, x_idx: (0..n).collect(), xi_idx: (0..n).collect() }
    }

    /// Points `|x| <= x_radius`, `|xi| <= xi_radius` on strides snapped to
    /// whole multiples of the grid spacings (at least one).
    pub fn centered_box(grid: GridSpec, x_radius: f64, xi_radius: f64, x_step: f64, xi_step: f64) -> Result<Self> {
        let sx = ((x_step / grid.dx()).round() as usize).max(1);
        let sk = ((xi_step / grid.dxi()).round() as usize).max(1);
        let x_idx = centered_indices(grid.n_points(), sx, x_radius / grid.dx());
        let xi_idx = centered_indices(grid.n_points(), sk, xi_radius / grid.dxi());
        Self::from_indices(grid, x_idx, xi_idx)
    }

    /// Lattice from explicit on-grid coordinates.
    pub fn from_points(grid: GridSpec, xs: &[f64], xis: &[f64]) -> Result<Self> {
        let mut x_idx = xs.iter().map(|&x| grid.x_index(x)).collect::<Result<Vec<_>>>()?;
        let mut xi_idx = xis.iter().map(|&k| grid.xi_index(k)).collect::<Result<Vec<_>>>()?;
        x_idx.sort_unstable();
        x_idx.dedup();
        xi_idx.sort_unstable();
        xi_idx.dedup();
        Self::from_indices(grid, x_idx, xi_idx)
    }

    fn from_indices(grid: GridSpec, x_idx: Vec<usize>, xi_idx: Vec<usize>) -> Result<Self> {
        if x_idx.is_empty() || xi_idx.is_empty() {
            return Err(Error::InvalidParameter("lattice must be nonempty".into()));
        }
        Ok(Self { grid, x_idx, xi_idx })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn x_indices(&self) -> &[usize] {
        &self.x_idx
    }

    pub fn xi_indices(&self) -> &[usize] {
        &self.xi_idx
    }

    pub fn x_points(&self) -> Vec<f64> {
        self.x_idx.iter().map(|&j| self.grid.x(j)).collect()
    }

    pub fn xi_points(&self) -> Vec<f64> {
        self.xi_idx.iter().map(|&k| self.grid.xi(k)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x_idx.len(), self.xi_idx.len())
    }

    pub fn is_full(&self) -> bool {
        let n = self.grid.n_points();
        self.x_idx.len() == n && self.xi_idx.len() == n
    }

    /// Cell area `dx * dxi` of the lattice (strided spacings).
    pub fn cell_area(&self) -> f64 {
        let step = |idx: &[usize]| if idx.len() > 1 { (idx[1] - idx[0]) as f64 } else { 1.0 };
        step(&self.x_idx) * self.grid.dx() * step(&self.xi_idx) * self.grid.dxi()
    }
}

fn centered_indices(n: usize, stride: usize, radius_samples: f64) -> Vec<usize> {
    let c = (n / 2) as i64;
    let m = (radius_samples / stride as f64 + 1e-9).floor() as i64;
    (-m..=m)
        .map(|k| c + k * stride as i64)
        .filter(|&j| (0..n as i64).contains(&j))
        .map(|j| j as usize)
        .collect()
}

/// Sampled `V_g f` on a lattice, row-major in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct TFArray {
    pub lattice: TFLattice,
    pub values: Vec<Complex64>,
    pub window_label: String,
}

impl TFArray {
    pub fn get(&self, ix: usize, ik: usize) -> Complex64 {
        self.values[ix * self.lattice.xi_idx.len() + ik]
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Iterate `(x, xi, value)` triples.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        let xs = self.lattice.x_points();
        let ks = self.lattice.xi_points();
        let cols = ks.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (xs[i / cols], ks[i % cols], *v))
    }

    /// Discrete `L2` norm with the lattice cell weights.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.lattice.cell_area()).sqrt()
    }

    /// Writes `<stem>.json` (axes, window label) and `<stem>.bin`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Header<'a> {
            x_points: Vec<f64>,
            xi_points: Vec<f64>,
            rows: usize,
            cols: usize,
            window_label: &'a str,
            layout: &'static str,
            data_file: String,
        }
        fs::create_dir_all(dir)?;
        let data_file = format!("{stem}.bin");
        fs::write(dir.join(&data_file), complex_to_le_bytes(&self.values))?;
        let (rows, cols) = self.lattice.shape();
        let header = Header {
            x_points: self.lattice.x_points(),
            xi_points: self.lattice.xi_points(),
            rows,
            cols,
            window_label: &self.window_label,
            layout: "row-major (x, xi), interleaved re/im float64 little-endian",
            data_file,
        };
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, serde_json::to_string_pretty(&header)?)?;
        Ok(path)
    }

    /// CSV of `|V_g f|` with columns `x,xi,abs`.
    pub fn abs_csv(&self) -> String {
        let mut out = String::from("x,xi,abs\n");
        for (x, k, v) in self.points() {
            out.push_str(&format!("{x:.12e},{k:.12e},{:.12e}\n", v.norm()));
        }
        out
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Forward STFT on a lattice.
pub fn stft(f: &SampledSignal, g: &Window, lat: &TFLattice) -> Result<TFArray> {
    f.grid.check_same(&g.grid(), "signal vs window")?;
    f.grid.check_same(&lat.grid, "signal vs lattice")?;
    let grid = f.grid;
    let n = grid.n_points();
    let half = n / 2;

    let p_min = (2 * g.support_half_width() + 1).next_power_of_two().min(n);
    let offsets: Vec<i64> = lat.xi_idx.iter().map(|&k| k as i64 - half as i64).collect();
    let common = offsets.iter().fold(n, |acc, &o| gcd(acc, o.unsigned_abs() as usize));
    let pow2 = 1usize << common.trailing_zeros();
    let p = (n / pow2).max(p_min).min(n);
    let stride = (n / p) as i64;

    let seg_window: Vec<Complex64> = (0..p)
        .map(|q| g.signal.values[half + q - p / 2].conj())
        .collect();
    let bins: Vec<usize> = offsets
        .iter()
        .map(|&o| (o / stride).rem_euclid(p as i64) as usize)
        .collect();
    let xis = lat.xi_points();
    let plan = fft::plan(p);
    let dx = grid.dx();

    let rows: Vec<Vec<Complex64>> = lat
        .x_idx
        .par_iter()
        .map(|&xj| {
            let j0 = (xj as i64 - (p / 2) as i64).rem_euclid(n as i64) as usize;
            let x_start = grid.x(xj) - (p / 2) as f64 * dx;
            let mut buf: Vec<Complex64> = (0..p)
                .map(|q| f.values[(j0 + q) % n] * seg_window[q])
                .collect();
            plan.forward(&mut buf);
            bins.iter()
                .zip(&xis)
                .map(|(&b, &xi)| buf[b] * Complex64::from_polar(dx, -2.0 * PI * xi * x_start))
                .collect()
        })
        .collect();

    let values = rows.into_iter().flatten().collect::<Vec<_>>();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("STFT"));
    }
    Ok(TFArray { lattice: lat.clone(), values, window_label: g.label().to_owned() })
}

/// Direct-quadrature STFT, `O(n)` per lattice point. Reference path for
/// cross-checks at small sizes.
pub fn stft_direct(f: &SampledSignal, g: &Window, lat: &TFLattice) -> Result<TFArray> {
    f.grid.check_same(&g.grid(), "signal vs window")?;
    f.grid.check_same(&lat.grid, "signal vs lattice")?;
    let grid = f.grid;
    let n = grid.n_points();
    let mut values = Vec::with_capacity(lat.x_idx.len() * lat.xi_idx.len());
    for &xj in &lat.x_idx {
        for &k in &lat.xi_idx {
            let xi = grid.xi(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let gi = (j + n + n / 2 - xj) % n;
                acc += f.values[j] * g.signal.values[gi].conj() * Complex64::from_polar(1.0, -2.0 * PI * xi * grid.x(j));
            }
            values.push(acc * grid.dx());
        }
    }
    Ok(TFArray { lattice: lat.clone(), values, window_label: g.label().to_owned() })
}

/// Riemann-sum adjoint `V_g^* F = sum F(x, xi) pi(x, xi) g dx dxi`.
pub fn stft_adjoint(arr: &TFArray, g: &Window) -> Result<SampledSignal> {
    if !arr.lattice.is_full() {
        return Err(Error::PartialLattice);
    }
    let grid = arr.lattice.grid;
    grid.check_same(&g.grid(), "array vs window")?;
    let n = grid.n_points();
    let dual = grid.dual();
    let dx = grid.dx();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (ix, &xj) in arr.lattice.x_idx.iter().enumerate() {
        let row = SampledSignal {
            grid: dual,
            values: arr.values[ix * n..(ix + 1) * n].to_vec(),
            label: String::new(),
        };
        let r = inverse_fourier(&row);
        for (j, o) in out.iter_mut().enumerate() {
            let gi = (j + n + n / 2 - xj) % n;
            *o += g.signal.values[gi] * r.values[j] * dx;
        }
    }
    SampledSignal::new(grid, out, format!("V*[{}]", arr.window_label))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowChangeReport {
    /// `max(lhs - rhs)` over the lattice; nonpositive when the inequality holds.
    pub max_violation: f64,
    pub max_lhs: f64,
    pub max_rhs: f64,
    pub gamma_g1_inner: f64,
}

/// Evaluates both sides of
/// `|V_g0 f| <= |<gamma, g1>|^-1 (|V_g1 f| * |V_g0 gamma|)` on the full
/// lattice, with a zero-padded (non-periodic) convolution.
pub fn window_change_check(f: &SampledSignal, g0: &Window, g1: &Window, gamma: &Window) -> Result<WindowChangeReport> {
    let inner = gamma.signal.inner(&g1.signal)?.norm();
    if inner <= 1e-8 {
        return Err(Error::DegenerateWindowPair(inner));
    }
    let grid = f.grid;
    let lat = TFLattice::full(grid);
    let n = grid.n_points();
    let lhs = stft(f, g0, &lat)?.abs();
    let a = stft(f, g1, &lat)?.abs();
    let b = stft(&gamma.signal, g0, &lat)?.abs();

    let m = 2 * n;
    let mut pa = vec![Complex64::new(0.0, 0.0); m * m];
    let mut pb = pa.clone();
    for i in 0..n {
        for j in 0..n {
            pa[i * m + j] = Complex64::new(a[i * n + j], 0.0);
            pb[i * m + j] = Complex64::new(b[i * n + j], 0.0);
        }
    }
    fft::fft2(&mut pa, m, m, false);
    fft::fft2(&mut pb, m, m, false);
    for (x, y) in pa.iter_mut().zip(&pb) {
        *x *= y;
    }
    fft::fft2(&mut pa, m, m, true);
    // Linear-convolution index p pairs with lattice index p - n/2.
    let scale = grid.dx() * grid.dxi() / (m * m) as f64 / inner;
    let h = n / 2;
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_lhs = 0.0f64;
    let mut max_rhs = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let rhs = pa[(i + h) * m + (j + h)].re * scale;
            let l = lhs[i * n + j];
            max_violation = max_violation.max(l - rhs.max(0.0));
            max_lhs = max_lhs.max(l);
            max_rhs = max_rhs.max(rhs);
        }
    }
    Ok(WindowChangeReport { max_violation, max_lhs, max_rhs, gamma_g1_inner: inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_gaussian_window, make_hermite_window, make_test_signal, tf_shift, PhasePoint, TestSignal};

    #[test]
    fn fft_rows_match_direct_quadrature() {
        let grid = GridSpec::new(128, 16.0).unwrap();
        let f = make_test_signal(TestSignal::Chirp { c: 0.8 }, grid).unwrap();
        let g = make_gaussian_window(grid, false);
        for lat in [
            TFLattice::full(grid),
            TFLattice::centered_box(grid, 5.0, 3.0, 0.5, 0.25).unwrap(),
            TFLattice::from_points(grid, &[-1.0, 0.125, 2.0], &[-0.5, 0.0625, 3.0]).unwrap(),
        ] {
            let fast = stft(&f, &g, &lat).unwrap();
            let slow = stft_direct(&f, &g, &lat).unwrap();
            let err = fast.values.iter().zip(&slow.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "err = {err}");
        }
    }

    #[test]
    fn delta_gives_reflected_window() {
        let grid = GridSpec::new(256, 16.0).unwrap();
        let d = make_test_signal(TestSignal::Delta { x0: 0.0 }, grid).unwrap();
        let g = make_hermite_window(grid, false);
        let lat = TFLattice::centered_box(grid, 6.0, 6.0, 0.25, 0.25).unwrap();
        let v = stft(&d, &g, &lat).unwrap();
        for (x, _, val) in v.points() {
            let expect = -x * (-PI * x * x).exp();
            assert!((val - Complex64::new(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn phase_invariance_and_covariance() {
        let grid = GridSpec::new(256, 16.0).unwrap();
        let f = make_test_signal(TestSignal::Chirp { c: 0.5 }, grid).unwrap();
        let g = make_gaussian_window(grid, false);
        let lat = TFLattice::full(grid);
        let a = stft(&f, &g, &lat).unwrap().abs();
        let rot = f.scaled(Complex64::from_polar(1.0, 1.234));
        let b = stft(&rot, &g, &lat).unwrap().abs();
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));

        let (x0, xi0) = (1.5, 0.75);
        let shifted = tf_shift(&f, &PhasePoint::d1(x0, xi0)).unwrap();
        let c = stft(&shifted, &g, &lat).unwrap().abs();
        let n = grid.n_points();
        let sx = (x0 / grid.dx()).round() as usize;
        let sk = (xi0 / grid.dxi()).round() as usize;
        for i in 0..n {
            for k in 0..n {
                let src = ((i + n - sx) % n) * n + (k + n - sk) % n;
                assert!((c[i * n + k] - a[src]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn moyal_and_inversion() {
        let grid = GridSpec::new(128, 12.0).unwrap();
        let f = SampledSignal::from_fn(grid, "g", |x| Complex64::new((-PI * (x - 0.5).powi(2)).exp(), 0.3 * x * (-x * x).exp())).unwrap();
        let g = make_gaussian_window(grid, false);
        let lat = TFLattice::full(grid);
        let v = stft(&f, &g, &lat).unwrap();
        assert!((v.norm_l2() - g.l2_norm * f.norm_l2()).abs() < 1e-8);
        let back = stft_adjoint(&v, &g).unwrap().scaled(Complex64::new(1.0 / (g.l2_norm * g.l2_norm), 0.0));
        assert!(back.rel_l2_error(&f).unwrap() < 1e-9);

        let zero = TFArray { values: vec![Complex64::new(0.0, 0.0); v.values.len()], ..v.clone() };
        assert!(stft_adjoint(&zero, &g).unwrap().norm_l2() == 0.0);
        let partial = stft(&f, &g, &TFLattice::centered_box(grid, 3.0, 3.0, 0.5, 0.5).unwrap()).unwrap();
        assert!(matches!(stft_adjoint(&partial, &g), Err(Error::PartialLattice)));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g1 = GridSpec::new(64, 8.0).unwrap();
        let g2 = GridSpec::new(64, 9.0).unwrap();
        let f = make_test_signal(TestSignal::Constant, g1).unwrap();
        let w = make_gaussian_window(g2, false);
        assert!(matches!(stft(&f, &w, &TFLattice::full(g1)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn window_change_inequality() {
        let grid = GridSpec::new(256, 16.0).unwrap();
        let g = make_gaussian_window(grid, false);
        let f = SampledSignal::from_fn(grid, "chirp", |x| {
            Complex64::from_polar((-PI * x * x / 4.0).exp(), PI * x * x)
        })
        .unwrap();
        let r = window_change_check(&f, &g, &g, &g).unwrap();
        assert!(r.max_violation <= 1e-8, "{r:?}");
        assert!(r.max_lhs > 0.1);

        let zero = SampledSignal::zeros(grid, "0");
        let r0 = window_change_check(&zero, &g, &g, &g).unwrap();
        assert_eq!(r0.max_lhs, 0.0);
        assert!(r0.max_rhs.abs() < 1e-15);

        let h = make_hermite_window(grid, false);
        assert!(matches!(window_change_check(&f, &g, &h, &g), Err(Error::DegenerateWindowPair(_))));
    }
}
