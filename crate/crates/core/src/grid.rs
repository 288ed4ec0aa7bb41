//! Periodic 1-D grids, sampled signals, windows and time-frequency shifts.
//!
//! The grid covers `[-L/2, L/2)` with `n` points. Its dual covers
//! `[-n/2L, n/2L)` with spacing `1/L`; the Fourier transform maps one onto
//! the other with the continuum normalization
//! `f^(xi) = int f(t) exp(-2 pi i t xi) dt` realized as a Riemann sum.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

const ON_GRID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, extent: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {extent}")));
        }
        Ok(Self { n_points, extent })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.n_points as f64
    }

    /// Spacing of the dual (frequency) grid.
    pub fn dxi(&self) -> f64 {
        1.0 / self.extent
    }

    pub fn nyquist(&self) -> f64 {
        self.n_points as f64 / (2.0 * self.extent)
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dx()
    }

    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.dxi()
    }

    pub fn x_points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn xi_points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.xi(k)).collect()
    }

    /// The frequency grid viewed as a spatial grid: `n` points over `n/L`.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            n_points: self.n_points,
            extent: self.n_points as f64 / self.extent,
        }
    }

    /// Index of the grid point nearest to `x`, if `x` lies in `[-L/2, L/2)`.
    pub fn nearest_x_index(&self, x: f64) -> Option<usize> {
        let j = (x / self.dx()).round() as i64 + (self.n_points / 2) as i64;
        (0..self.n_points as i64).contains(&j).then_some(j as usize)
    }

    pub fn nearest_xi_index(&self, xi: f64) -> Option<usize> {
        let k = (xi / self.dxi()).round() as i64 + (self.n_points / 2) as i64;
        (0..self.n_points as i64).contains(&k).then_some(k as usize)
    }

    /// Exact index of an on-grid spatial point.
    pub fn x_index(&self, x: f64) -> Result<usize> {
        let off = OffGrid { axis: "spatial", value: x };
        let j = self.nearest_x_index(x).ok_or(off.err())?;
        if (self.x(j) - x).abs() > ON_GRID_TOL * self.dx().max(1.0) {
            return Err(off.err());
        }
        Ok(j)
    }

    /// Exact index of an on-grid frequency.
    pub fn xi_index(&self, xi: f64) -> Result<usize> {
        let off = OffGrid { axis: "frequency", value: xi };
        let k = self.nearest_xi_index(xi).ok_or(off.err())?;
        if (self.xi(k) - xi).abs() > ON_GRID_TOL * self.dxi().max(1.0) {
            return Err(off.err());
        }
        Ok(k)
    }

    pub(crate) fn check_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: ({}, {}) vs ({}, {})",
                self.n_points, self.extent, other.n_points, other.extent
            )));
        }
        Ok(())
    }
}

struct OffGrid {
    axis: &'static str,
    value: f64,
}

impl OffGrid {
    fn err(&self) -> Error {
        Error::OffGrid { axis: self.axis, value: self.value }
    }
}

/// Complex samples of a function on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl SampledSignal {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidSignal(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("signal samples"));
        }
        Ok(Self { grid, values, label: label.into() })
    }

    pub fn from_fn(grid: GridSpec, label: impl Into<String>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.n_points()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, values, label)
    }

    pub fn zeros(grid: GridSpec, label: impl Into<String>) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            label: label.into(),
        }
    }

    /// Discrete L2 norm `(dx * sum |f|^2)^(1/2)`.
    pub fn norm_l2(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete inner product `dx * sum f conj(h)`.
    pub fn inner(&self, other: &SampledSignal) -> Result<Complex64> {
        self.grid.check_same(&other.grid, "inner product")?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.dx())
    }

    pub fn scaled(&self, factor: Complex64) -> SampledSignal {
        SampledSignal {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            label: self.label.clone(),
        }
    }

    pub fn sub(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.grid.check_same(&other.grid, "difference")?;
        Ok(SampledSignal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            label: format!("{}-{}", self.label, other.label),
        })
    }

    pub fn add_assign(&mut self, other: &SampledSignal) -> Result<()> {
        self.grid.check_same(&other.grid, "sum")?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// Relative L2 distance `|self - other| / |other|`.
    pub fn rel_l2_error(&self, reference: &SampledSignal) -> Result<f64> {
        let d = self.sub(reference)?.norm_l2();
        let r = reference.norm_l2();
        Ok(if r > 0.0 { d / r } else { d })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Largest modulus over the outermost 0.2% of the grid, relative to the
    /// global maximum. Wrapped (periodic) content shows up here.
    pub fn edge_mass(&self) -> f64 {
        let n = self.grid.n_points();
        let band = ((n as f64 * 0.002).ceil() as usize).max(1);
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let edge = self.values[..band]
            .iter()
            .chain(&self.values[n - band..])
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        edge / max
    }

    /// L2 mass fraction in `|x| >= 0.45 L`.
    pub fn boundary_mass(&self) -> f64 {
        let total = self.norm_l2();
        if total == 0.0 {
            return 0.0;
        }
        let half = 0.45 * self.grid.extent();
        let outer: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(j, _)| self.grid.x(*j).abs() >= half)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        (outer * self.grid.dx()).sqrt() / total
    }
}

/// A window function together with its discrete L2 norm.
#[derive(Clone, Debug)]
pub struct Window {
    pub signal: SampledSignal,
    pub l2_norm: f64,
}

impl Window {
    pub fn new(signal: SampledSignal) -> Result<Self> {
        let l2_norm = signal.norm_l2();
        if l2_norm <= 0.0 {
            return Err(Error::ZeroWindow);
        }
        Ok(Self { signal, l2_norm })
    }

    pub fn grid(&self) -> GridSpec {
        self.signal.grid
    }

    pub fn label(&self) -> &str {
        &self.signal.label
    }

    pub fn normalized(&self) -> Window {
        let s = self.signal.scaled(Complex64::new(1.0 / self.l2_norm, 0.0));
        Window { signal: s, l2_norm: 1.0 }
    }

    /// Half-width (in samples, around index `n/2`) outside which the window
    /// is below `1e-16` of its peak.
    pub(crate) fn support_half_width(&self) -> usize {
        let n = self.signal.grid.n_points();
        let peak = self.signal.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = peak * 1e-16;
        let c = (n / 2) as i64;
        self.signal
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > tol)
            .map(|(j, _)| {
                let d = (j as i64 - c).rem_euclid(n as i64);
                d.min(n as i64 - d) as usize
            })
            .max()
            .unwrap_or(0)
    }

    /// Spatial radius of the window's effective support.
    pub fn radius(&self) -> f64 {
        self.support_half_width() as f64 * self.signal.grid.dx()
    }

    /// Frequency radius of the window's effective support. The cutoff sits
    /// above FFT round-off.
    pub fn frequency_radius(&self) -> f64 {
        let spec = fourier(&self.signal);
        let peak = spec.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = peak * 1e-12;
        spec.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > tol)
            .map(|(k, _)| spec.grid.x(k).abs())
            .fold(0.0, f64::max)
    }
}

/// A point `z = (x, xi)` of phase space `R^{2d}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() || x.is_empty() {
            return Err(Error::InvalidParameter("phase point components must have equal, nonzero length".into()));
        }
        if x.iter().chain(&xi).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase point"));
        }
        Ok(Self { x, xi })
    }

    pub fn d1(x: f64, xi: f64) -> Self {
        Self { x: vec![x], xi: vec![xi] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Flattened `(x, xi)` state vector.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.xi);
        v
    }

    pub fn from_slice(state: &[f64]) -> Self {
        let d = state.len() / 2;
        Self { x: state[..d].to_vec(), xi: state[d..].to_vec() }
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().chain(&self.xi).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &PhasePoint) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// `<z> = (1 + |z|^2)^(1/2)`.
pub fn japanese(z: &[f64]) -> f64 {
    (1.0 + z.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let da = a / (t * t);
    let db = -b / ((1.0 - t) * (1.0 - t));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// Fourier transform onto the dual grid.
pub fn fourier(f: &SampledSignal) -> SampledSignal {
    transform(f, false, format!("F[{}]", f.label))
}

/// Inverse of [`fourier`]: maps samples on a dual grid back to its dual.
pub fn inverse_fourier(spec: &SampledSignal) -> SampledSignal {
    let label = spec
        .label
        .strip_prefix("F[")
        .and_then(|s| s.strip_suffix(']'))
        .map(str::to_owned)
        .unwrap_or_else(|| format!("F^-1[{}]", spec.label));
    transform(spec, true, label)
}

// Centered grids: x_j xi_k = jk/n - j/2 - k/2 + n/4, and n/4 is an integer,
// so the kernel factors into (-1)^j (-1)^k exp(-+2 pi i jk/n).
fn transform(f: &SampledSignal, inverse: bool, label: String) -> SampledSignal {
    let n = f.grid.n_points();
    let plan = fft::plan(n);
    let mut buf: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -v })
        .collect();
    if inverse {
        plan.inverse(&mut buf);
    } else {
        plan.forward(&mut buf);
    }
    let dx = f.grid.dx();
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= if k % 2 == 0 { dx } else { -dx };
    }
    SampledSignal { grid: f.grid.dual(), values: buf, label }
}

/// Apply the Fourier multiplier `m(xi)` to `f` (exactly, on the grid).
pub fn apply_multiplier(f: &SampledSignal, m: impl Fn(f64) -> Complex64) -> SampledSignal {
    let n = f.grid.n_points();
    let plan = fft::plan(n);
    let mut buf = f.values.clone();
    plan.forward(&mut buf);
    let scale = 1.0 / n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= m(fft::bin_frequency(k, n, f.grid.extent())) * scale;
    }
    plan.inverse(&mut buf);
    SampledSignal { grid: f.grid, values: buf, label: f.label.clone() }
}

/// Time-frequency shift `M_xi T_x f`, translation snapped to the grid.
pub fn tf_shift(f: &SampledSignal, z: &PhasePoint) -> Result<SampledSignal> {
    if z.dim() != 1 {
        return Err(Error::InvalidParameter("signals are one-dimensional".into()));
    }
    let (x, eta) = (z.x[0], z.xi[0]);
    if !(x.is_finite() && eta.is_finite()) {
        return Err(Error::NonFinite("shift"));
    }
    let grid = f.grid;
    let half = grid.extent() / 2.0;
    if x.abs() >= half {
        return Err(Error::ShiftOutOfRange { x, half_extent: half });
    }
    let n = grid.n_points() as i64;
    let s = (x / grid.dx()).round() as i64;
    let values = (0..n)
        .map(|j| {
            let src = (j - s).rem_euclid(n) as usize;
            let phase = 2.0 * PI * grid.x(j as usize) * eta;
            f.values[src] * Complex64::from_polar(1.0, phase)
        })
        .collect();
    Ok(SampledSignal { grid, values, label: format!("pi({x},{eta}){}", f.label) })
}

pub fn make_gaussian_window(grid: GridSpec, normalize: bool) -> Window {
    let s = SampledSignal::from_fn(grid, "gaussian", |x| Complex64::new((-PI * x * x).exp(), 0.0))
        .expect("gaussian samples are finite");
    let w = Window::new(s).expect("gaussian window is nonzero");
    if normalize {
        w.normalized()
    } else {
        w
    }
}

/// First Hermite function profile `x exp(-pi x^2)`.
pub fn make_hermite_window(grid: GridSpec, normalize: bool) -> Window {
    let s = SampledSignal::from_fn(grid, "hermite1", |x| Complex64::new(x * (-PI * x * x).exp(), 0.0))
        .expect("hermite samples are finite");
    let w = Window::new(s).expect("hermite window is nonzero");
    if normalize {
        w.normalized()
    } else {
        w
    }
}

/// Elementary test signals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestSignal {
    /// Impulse of height `1/dx` at `x0` (unit mass).
    Delta { x0: f64 },
    PlaneWave { xi0: f64 },
    /// `exp(pi i c x^2)`.
    Chirp { c: f64 },
    /// `2^(1/4) exp(-pi x^2)`.
    HoGroundState,
    Constant,
    /// Unit-mass Gaussian `exp(-pi x^2/eps^2)/eps`, a band-limited stand-in
    /// for the delta.
    NarrowGaussian { eps: f64 },
}

pub fn make_test_signal(kind: TestSignal, grid: GridSpec) -> Result<SampledSignal> {
    let c = |re: f64| Complex64::new(re, 0.0);
    match kind {
        TestSignal::Delta { x0 } => {
            let j = grid.x_index(x0)?;
            let mut s = SampledSignal::zeros(grid, format!("delta({x0})"));
            s.values[j] = c(1.0 / grid.dx());
            Ok(s)
        }
        TestSignal::PlaneWave { xi0 } => {
            grid.xi_index(xi0)?;
            SampledSignal::from_fn(grid, format!("plane_wave({xi0})"), |x| {
                Complex64::from_polar(1.0, 2.0 * PI * x * xi0)
            })
        }
        TestSignal::Chirp { c: cc } => {
            if !cc.is_finite() {
                return Err(Error::NonFinite("chirp rate"));
            }
            SampledSignal::from_fn(grid, format!("chirp({cc})"), |x| Complex64::from_polar(1.0, PI * cc * x * x))
        }
        TestSignal::HoGroundState => SampledSignal::from_fn(grid, "ho_ground_state", |x| {
            c(2f64.powf(0.25) * (-PI * x * x).exp())
        }),
        TestSignal::Constant => SampledSignal::from_fn(grid, "constant", |_| c(1.0)),
        TestSignal::NarrowGaussian { eps } => {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
            }
            SampledSignal::from_fn(grid, format!("narrow_gaussian({eps})"), |x| {
                c((-PI * x * x / (eps * eps)).exp() / eps)
            })
        }
    }
}

/// Multiply by a smooth taper that falls from 1 to 0 over the outer 5% of
/// the grid on each side. The last sample on each side is exactly zero.
pub fn apodize(f: &SampledSignal) -> SampledSignal {
    let grid = f.grid;
    let half = grid.extent() / 2.0;
    let width = 0.05 * grid.extent();
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * smooth_step((half - grid.x(j).abs()) / width))
        .collect();
    SampledSignal { grid, values, label: format!("taper[{}]", f.label) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(1024, 32.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(4, 1.0).is_err());
        assert!(GridSpec::new(100, 1.0).is_err());
        assert!(GridSpec::new(64, 0.0).is_err());
        let g = grid();
        assert_eq!(g.x(512), 0.0);
        assert!((g.dx() * 1024.0 - 32.0).abs() < 1e-15);
        assert_eq!(g.dual().dual(), g);
    }

    #[test]
    fn gaussian_window_values() {
        let w = make_gaussian_window(grid(), false);
        assert_eq!(w.signal.values[512].re, 1.0);
        // Riemann sum of exp(-2 pi x^2) equals 2^{-1/2} to spectral accuracy.
        assert!((w.l2_norm - 2f64.powf(-0.25)).abs() < 1e-8);
        let wn = make_gaussian_window(grid(), true);
        assert!((wn.l2_norm - 1.0).abs() < 1e-12);
        assert!((wn.signal.norm_l2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tf_shift_identity_and_translation() {
        let g = grid();
        let f = make_test_signal(TestSignal::Chirp { c: 0.7 }, g).unwrap();
        assert_eq!(tf_shift(&f, &PhasePoint::d1(0.0, 0.0)).unwrap().values, f.values);
        let d = make_test_signal(TestSignal::Delta { x0: 0.0 }, g).unwrap();
        let moved = tf_shift(&d, &PhasePoint::d1(2.5, 0.0)).unwrap();
        let expect = make_test_signal(TestSignal::Delta { x0: 2.5 }, g).unwrap();
        assert_eq!(moved.values, expect.values);
        assert!(matches!(
            tf_shift(&f, &PhasePoint::d1(16.0, 0.0)),
            Err(Error::ShiftOutOfRange { .. })
        ));
    }

    #[test]
    fn commutation_phase() {
        let g = grid();
        let f = make_test_signal(TestSignal::Chirp { c: 0.3 }, g).unwrap();
        let (x, eta) = (1.25, 0.75);
        let mt = tf_shift(&f, &PhasePoint::d1(x, eta)).unwrap();
        let m = tf_shift(&f, &PhasePoint::d1(0.0, eta)).unwrap();
        let tm = tf_shift(&m, &PhasePoint::d1(x, 0.0)).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * PI * x * eta);
        for (a, b) in mt.values.iter().zip(&tm.values) {
            assert!((a - phase * b).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_of_gaussian_is_gaussian() {
        let g = grid();
        let f = SampledSignal::from_fn(g, "g", |x| Complex64::new((-PI * x * x).exp(), 0.0)).unwrap();
        let fh = fourier(&f);
        for k in 0..g.n_points() {
            let xi = fh.grid.x(k);
            if xi.abs() <= 8.0 {
                assert!((fh.values[k] - Complex64::new((-PI * xi * xi).exp(), 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn fourier_of_delta_and_plane_wave() {
        let g = grid();
        let d = make_test_signal(TestSignal::Delta { x0: 0.0 }, g).unwrap();
        for v in fourier(&d).values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
        let xi0 = 2.0;
        let p = make_test_signal(TestSignal::PlaneWave { xi0 }, g).unwrap();
        let ph = fourier(&p);
        let k0 = ph.grid.x_index(xi0).unwrap();
        for (k, v) in ph.values.iter().enumerate() {
            let expect = if k == k0 { 1.0 / ph.grid.dx() } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn test_signals() {
        let g = grid();
        let d = make_test_signal(TestSignal::Delta { x0: 0.0 }, g).unwrap();
        let mass: Complex64 = d.values.iter().sum::<Complex64>() * g.dx();
        assert!((mass.re - 1.0).abs() < 1e-14);
        let c = make_test_signal(TestSignal::Chirp { c: 1.0 }, g).unwrap();
        assert_eq!(c.values[512], Complex64::new(1.0, 0.0));
        let h = make_test_signal(TestSignal::HoGroundState, g).unwrap();
        assert!((h.norm_l2() - 1.0).abs() < 1e-8);
        assert!(make_test_signal(TestSignal::Delta { x0: 0.01 }, g).is_err());
        assert!(make_test_signal(TestSignal::PlaneWave { xi0: 0.01 }, g).is_err());
    }

    #[test]
    fn apodize_vanishes_at_edge() {
        let g = grid();
        let f = apodize(&make_test_signal(TestSignal::Constant, g).unwrap());
        assert_eq!(f.values[0].norm(), 0.0);
        assert!(f.values[1023].norm() < 1e-12);
        assert_eq!(f.values[512].re, 1.0);
        assert!(f.edge_mass() < 1e-6);
    }

    #[test]
    fn smooth_step_derivative_matches_differences() {
        for &t in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert!((fd - smooth_step_deriv(t)).abs() < 1e-6);
        }
    }
}
