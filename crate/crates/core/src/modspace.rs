//! Modulation-space norms, symbol constructions and dyadic-shell decay fits.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{japanese, smooth_step, GridSpec, SampledSignal, Window};
use crate::stft::{stft, TFLattice};

/// Polynomial weight `<z>^r` and integrability exponent `p` (may be infinite).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub r: f64,
    #[serde(with = "extended_real")]
    pub p: f64,
}

impl WeightParams {
    pub fn new(r: f64, p: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!("weight order must be finite, got {r}")));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in [1, inf], got {p}")));
        }
        Ok(Self { r, p })
    }
}

/// Serializes infinity as the string `"inf"`.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// `||f||_{M^p_r}` as a Riemann sum over the full lattice (sup for `p = inf`).
pub fn mod_norm(f: &SampledSignal, g: &Window, w: WeightParams) -> Result<f64> {
    let v = stft(f, g, &TFLattice::full(f.grid))?;
    let cell = v.lattice.cell_area();
    if w.p.is_infinite() {
        return Ok(v.points().map(|(x, k, val)| val.norm() * japanese(&[x, k]).powf(w.r)).fold(0.0, f64::max));
    }
    let s: f64 = v
        .points()
        .map(|(x, k, val)| val.norm().powf(w.p) * japanese(&[x, k]).powf(w.p * w.r))
        .sum();
    Ok((s * cell).powf(1.0 / w.p))
}

type Fn1 = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Periodicity {
    Aperiodic,
    Period(f64),
    Constant,
}

/// One tensor factor of a separable symbol.
#[derive(Clone)]
pub struct SymbolFactor {
    pub eval: Fn1,
    pub periodicity: Periodicity,
    pub label: String,
}

impl SymbolFactor {
    pub fn new(label: impl Into<String>, periodicity: Periodicity, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f), periodicity, label: label.into() }
    }

    pub fn constant() -> Self {
        Self::new("1", Periodicity::Constant, |_| Complex64::new(1.0, 0.0))
    }
}

/// A symbol `sigma(x, xi)` on `R^2`.
#[derive(Clone)]
pub enum SymbolSampler {
    Separable { x_factor: SymbolFactor, xi_factor: SymbolFactor },
    General { eval: Fn2, label: String },
}

impl SymbolSampler {
    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        match self {
            SymbolSampler::Separable { x_factor, xi_factor } => (x_factor.eval)(x) * (xi_factor.eval)(xi),
            SymbolSampler::General { eval, .. } => eval(x, xi),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SymbolSampler::Separable { x_factor, xi_factor } => format!("{}(x)*{}(xi)", x_factor.label, xi_factor.label),
            SymbolSampler::General { label, .. } => label.clone(),
        }
    }
}

/// Positively homogeneous function on `R^2 \ {0}`.
#[derive(Clone)]
pub struct Homogeneous {
    pub eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub degree: f64,
    pub label: String,
}

impl Homogeneous {
    /// `(x^4 + xi^4)^(1/2)`, degree 2, not a polynomial.
    pub fn quartic_root() -> Self {
        Self {
            eval: Arc::new(|x, xi| (x.powi(4) + xi.powi(4)).sqrt()),
            degree: 2.0,
            label: "(x^4+xi^4)^(1/2)".into(),
        }
    }

    /// `x^2 + xi^2`, degree 2.
    pub fn squared_norm() -> Self {
        Self { eval: Arc::new(|x, xi| x * x + xi * xi), degree: 2.0, label: "|z|^2".into() }
    }
}

/// Radial bump: 1 on `|z| <= 1`, 0 on `|z| >= 2`, smooth in between.
pub fn bump(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

#[derive(Clone)]
pub enum SymbolKind {
    /// `|sin x|^mu`, independent of `xi`.
    SinMu { mu: f64 },
    /// `phi(|z|/radius) h(z)`.
    HomogCutoff { h: Homogeneous, radius: f64 },
    /// Multiplication symbol `V(x)`.
    PotentialOnly { potential: SymbolFactor },
}

pub fn make_symbol(kind: SymbolKind) -> Result<SymbolSampler> {
    match kind {
        SymbolKind::SinMu { mu } => {
            if !(mu > 1.0) {
                return Err(Error::InvalidParameter(format!("sin_mu requires mu > 1, got {mu}")));
            }
            Ok(SymbolSampler::Separable {
                x_factor: SymbolFactor::new(format!("|sin x|^{mu}"), Periodicity::Period(PI), move |x| {
                    Complex64::new(x.sin().abs().powf(mu), 0.0)
                }),
                xi_factor: SymbolFactor::constant(),
            })
        }
        SymbolKind::HomogCutoff { h, radius } => {
            if !(radius > 0.0) || !(h.degree > 0.0) {
                return Err(Error::InvalidParameter("cutoff radius and homogeneity degree must be positive".into()));
            }
            let label = format!("phi(|z|/{radius})*{}", h.label);
            let eval = h.eval.clone();
            Ok(SymbolSampler::General {
                eval: Arc::new(move |x, xi| Complex64::new(bump(x.hypot(xi) / radius) * eval(x, xi), 0.0)),
                label,
            })
        }
        SymbolKind::PotentialOnly { potential } => Ok(SymbolSampler::Separable {
            x_factor: potential,
            xi_factor: SymbolFactor::constant(),
        }),
    }
}

/// Splits `h = a + sigma` with `a = (1 - phi) h` smooth and `sigma = phi h`
/// compactly supported in `|z| <= 2`.
pub fn example4_split(h: &Homogeneous) -> (SymbolSampler, SymbolSampler) {
    let ha = h.eval.clone();
    let hs = h.eval.clone();
    let a = SymbolSampler::General {
        eval: Arc::new(move |x, xi| Complex64::new((1.0 - bump(x.hypot(xi))) * ha(x, xi), 0.0)),
        label: format!("(1-phi)*{}", h.label),
    };
    let s = SymbolSampler::General {
        eval: Arc::new(move |x, xi| Complex64::new(bump(x.hypot(xi)) * hs(x, xi), 0.0)),
        label: format!("phi*{}", h.label),
    };
    (a, s)
}

/// Sampling box for the symbol STFT: a square `[-L/2, L/2)^2` discretized
/// by `grid` on each axis, window centers `z1 x z2`, and the `zeta` lattice.
#[derive(Clone, Debug)]
pub struct SymbolBox {
    pub grid: GridSpec,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    pub zeta_radius: f64,
    pub zeta_step: f64,
}

/// `G(zeta) = sup_z |V_psi sigma(z, zeta)|` on a 2-D `zeta` lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolProfile {
    pub label: String,
    pub zeta: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl SymbolProfile {
    pub fn radial_samples(&self) -> Vec<(f64, f64)> {
        self.zeta.iter().zip(&self.values).map(|(z, v)| (z[0].hypot(z[1]), *v)).collect()
    }

    pub fn value_at(&self, zeta: [f64; 2]) -> Option<f64> {
        self.zeta
            .iter()
            .position(|z| (z[0] - zeta[0]).abs() < 1e-9 && (z[1] - zeta[1]).abs() < 1e-9)
            .map(|i| self.values[i])
    }
}

const BOX_MASS_TOL: f64 = 1e-10;

fn window_boundary_mass(grid: &GridSpec, z: f64) -> f64 {
    let gap = grid.extent() / 2.0 - z.abs();
    if gap <= 0.0 {
        1.0
    } else {
        (-PI * gap * gap).exp()
    }
}

fn check_factor_box(f: &SymbolFactor, grid: &GridSpec, zs: &[f64]) -> Result<()> {
    match f.periodicity {
        Periodicity::Constant => Ok(()),
        Periodicity::Period(p) => {
            let ratio = grid.extent() / p;
            if (ratio - ratio.round()).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "box extent {} must hold a whole number of periods {p}",
                    grid.extent()
                )));
            }
            Ok(())
        }
        Periodicity::Aperiodic => {
            let mass = zs.iter().map(|&z| window_boundary_mass(grid, z)).fold(0.0, f64::max);
            if mass > BOX_MASS_TOL {
                return Err(Error::BoxTooSmall { mass });
            }
            Ok(())
        }
    }
}

/// STFT-sup profile of a symbol with the tensor Gaussian window
/// `psi(x, xi) = exp(-pi x^2) exp(-pi xi^2)`.
///
/// Separable symbols reduce to two 1-D transforms; general symbols take a
/// 2-D FFT per window center.
pub fn symbol_stft_sup(sigma: &SymbolSampler, b: &SymbolBox) -> Result<SymbolProfile> {
    let grid = b.grid;
    let g = crate::grid::make_gaussian_window(grid, false);
    match sigma {
        SymbolSampler::Separable { x_factor, xi_factor } => {
            let (k1, g1) = factor_sup(x_factor, &g, &b.z1, b)?;
            let (k2, g2) = factor_sup(xi_factor, &g, &b.z2, b)?;
            let peak2 = g2.iter().cloned().fold(0.0, f64::max);
            let mut zeta = Vec::new();
            let mut values = Vec::new();
            for (a, va) in k1.iter().zip(&g1) {
                for (c, vc) in k2.iter().zip(&g2) {
                    if *vc >= 1e-30 * peak2 {
                        zeta.push([*a, *c]);
                        values.push(va * vc);
                    }
                }
            }
            Ok(SymbolProfile { label: sigma.label(), zeta, values })
        }
        SymbolSampler::General { eval, label } => {
            let mass = b
                .z1
                .iter()
                .chain(&b.z2)
                .map(|&z| window_boundary_mass(&grid, z))
                .fold(0.0, f64::max);
            if mass > BOX_MASS_TOL {
                return Err(Error::BoxTooSmall { mass });
            }
            general_sup(eval.as_ref(), label, b)
        }
    }
}

fn factor_sup(f: &SymbolFactor, g: &Window, zs: &[f64], b: &SymbolBox) -> Result<(Vec<f64>, Vec<f64>)> {
    check_factor_box(f, &b.grid, zs)?;
    let grid = b.grid;
    let samples = SampledSignal::from_fn(grid, f.label.clone(), |x| (f.eval)(x))?;
    let zs: Vec<f64> = match f.periodicity {
        Periodicity::Constant => vec![0.0],
        _ => zs.iter().map(|&z| grid.x(grid.nearest_x_index(z).unwrap_or(grid.n_points() / 2))).collect(),
    };
    let lat = TFLattice::centered_box(grid, 0.0, b.zeta_radius, grid.dx(), b.zeta_step)?;
    let lat = TFLattice::from_points(grid, &zs, &lat.xi_points())?;
    let v = stft(&samples, g, &lat)?;
    let (rows, cols) = lat.shape();
    let sup: Vec<f64> = (0..cols)
        .map(|k| (0..rows).map(|i| v.get(i, k).norm()).fold(0.0, f64::max))
        .collect();
    Ok((lat.xi_points(), sup))
}

fn general_sup(eval: &(dyn Fn(f64, f64) -> Complex64 + Send + Sync), label: &str, b: &SymbolBox) -> Result<SymbolProfile> {
    let grid = b.grid;
    let n = grid.n_points();
    let xs = grid.x_points();
    let mut sigma = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            sigma[i * n + j] = eval(x, y);
        }
    }
    if sigma.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("symbol samples"));
    }
    let kstep = ((b.zeta_step / grid.dxi()).round() as usize).max(1);
    let keep: Vec<(usize, f64)> = (0..n)
        .filter_map(|k| {
            let f = fft::bin_frequency(k, n, grid.extent());
            let idx = (f / grid.dxi()).round() as i64;
            (f.abs() <= b.zeta_radius && idx % kstep as i64 == 0).then_some((k, f))
        })
        .collect();
    let mut sup = vec![0.0f64; keep.len() * keep.len()];
    let cell = grid.dx() * grid.dx();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for &z1 in &b.z1 {
        let w1: Vec<f64> = xs.iter().map(|x| gauss(x - z1)).collect();
        for &z2 in &b.z2 {
            let w2: Vec<f64> = xs.iter().map(|y| gauss(y - z2)).collect();
            for i in 0..n {
                for j in 0..n {
                    buf[i * n + j] = sigma[i * n + j] * (w1[i] * w2[j]);
                }
            }
            fft::fft2(&mut buf, n, n, false);
            for (a, &(ka, _)) in keep.iter().enumerate() {
                for (c, &(kc, _)) in keep.iter().enumerate() {
                    let v = buf[ka * n + kc].norm() * cell;
                    let s = &mut sup[a * keep.len() + c];
                    *s = s.max(v);
                }
            }
        }
    }
    let mut zeta = Vec::with_capacity(sup.len());
    for &(_, fa) in &keep {
        for &(_, fc) in &keep {
            zeta.push([fa, fc]);
        }
    }
    Ok(SymbolProfile { label: label.to_owned(), zeta, values: sup })
}

fn gauss(x: f64) -> f64 {
    (-PI * x * x).exp()
}

/// Per-shell statistics of a dyadic decay fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellStat {
    pub m: i32,
    pub count: usize,
    pub max: f64,
    pub r_at_max: f64,
}

/// Fitted power-law envelope `C <r>^-s` from dyadic-shell maxima.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent_hat: f64,
    pub constant_hat: f64,
    pub shell_range: (i32, i32),
    pub residual: f64,
    /// Local exponent between the two outermost usable shells.
    pub tail_exponent: f64,
    /// Set when a shell maximum drops under the numerical floor, or when
    /// the local exponents steepen by at least 2 across the range.
    pub super_polynomial: bool,
    pub floor_hit: bool,
    pub shells: Vec<ShellStat>,
}

/// Relative level below which shell maxima are treated as numerical zero.
pub const DECAY_FLOOR: f64 = 1e-11;

/// Groups `(radius, value)` samples into shells `2^m <= r < 2^(m+1)`
/// (restricted to `[r_min, r_max)` when given) and fits
/// `log2(max)` against `log2 <r_at_max>` by least squares.
pub fn fit_decay(samples: &[(f64, f64)], range: Option<(f64, f64)>) -> Result<DecayFit> {
    fit_decay_with_floor(samples, range, None)
}

/// [`fit_decay`] with an absolute floor in place of the relative one.
pub fn fit_decay_with_floor(samples: &[(f64, f64)], range: Option<(f64, f64)>, floor: Option<f64>) -> Result<DecayFit> {
    let (lo, hi) = range.unwrap_or((f64::MIN_POSITIVE, f64::INFINITY));
    let mut shells: Vec<ShellStat> = Vec::new();
    for &(r, v) in samples {
        if !(r > 0.0) || r < lo || r >= hi {
            continue;
        }
        if !v.is_finite() {
            return Err(Error::NonFinite("decay samples"));
        }
        let m = r.log2().floor() as i32;
        match shells.iter_mut().find(|s| s.m == m) {
            Some(s) => {
                s.count += 1;
                if v.abs() > s.max {
                    s.max = v.abs();
                    s.r_at_max = r;
                }
            }
            None => shells.push(ShellStat { m, count: 1, max: v.abs(), r_at_max: r }),
        }
    }
    shells.sort_by_key(|s| s.m);
    if shells.len() < 4 {
        return Err(Error::InsufficientShells { populated: shells.len(), required: 4 });
    }
    let peak = shells.iter().map(|s| s.max).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::UndefinedFit);
    }
    for s in shells.iter_mut().filter(|s| s.max == 0.0) {
        s.r_at_max = 2f64.powi(s.m);
    }
    let floor = floor.unwrap_or_else(|| DECAY_FLOOR * samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max));
    let first = shells.iter().position(|s| s.max > floor).ok_or(Error::UndefinedFit)?;
    let mut usable = Vec::new();
    let mut floor_hit = false;
    for s in &shells[first..] {
        if s.max > floor {
            usable.push(s);
        } else {
            floor_hit = true;
            break;
        }
    }
    let pts: Vec<(f64, f64)> = usable.iter().map(|s| (japanese(&[s.r_at_max]).log2(), s.max.log2())).collect();
    let (exponent_hat, residual, tail_exponent, steepening) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let resid = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
        let local: Vec<f64> = pts.windows(2).map(|w| -(w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        let tail = *local.last().expect("at least one local exponent");
        (-slope, resid, tail, local.len() >= 2 && tail - local[0] >= 2.0)
    } else {
        // One usable shell followed by the floor: report the lower bound
        // implied by falling from that maximum to the floor.
        let s0 = usable[0];
        let last = shells.last().expect("nonempty");
        let span = japanese(&[2f64.powi(last.m)]).log2() - japanese(&[s0.r_at_max]).log2();
        let bound = if span > 0.0 { (s0.max / floor.max(f64::MIN_POSITIVE)).log2() / span } else { 0.0 };
        (bound, 0.0, bound, false)
    };
    let constant_hat = samples
        .iter()
        .map(|&(r, v)| v.abs() * japanese(&[r]).powf(exponent_hat))
        .fold(0.0, f64::max);
    Ok(DecayFit {
        exponent_hat,
        constant_hat,
        shell_range: (shells[0].m, shells.last().expect("nonempty").m),
        residual,
        tail_exponent,
        super_polynomial: floor_hit || steepening,
        floor_hit,
        shells,
    })
}

impl DecayFit {
    /// Number of samples above the envelope `C <r>^-s` (with a relative
    /// slack of `1e-12`).
    pub fn violations(&self, samples: &[(f64, f64)]) -> usize {
        samples
            .iter()
            .filter(|&&(r, v)| v.abs() > self.constant_hat * japanese(&[r]).powf(-self.exponent_hat) * (1.0 + 1e-12))
            .count()
    }

    /// Shell profile as CSV (`m,count,max,r_at_max`).
    pub fn shells_csv(&self) -> String {
        let mut out = String::from("m,count,max,r_at_max\n");
        for s in &self.shells {
            out.push_str(&format!("{},{},{:.12e},{:.12e}\n", s.m, s.count, s.max, s.r_at_max));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_gaussian_window, make_test_signal, TestSignal};

    fn radial(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (1..=4000).map(|i| i as f64 * 0.05).map(|r| (r, f(r))).collect()
    }

    #[test]
    fn synthetic_power_law() {
        let s = radial(|r| japanese(&[r]).powi(-3));
        let fit = fit_decay(&s, Some((1.0, 128.0))).unwrap();
        assert!((fit.exponent_hat - 3.0).abs() < 0.1, "{fit:?}");
        assert!(!fit.super_polynomial);
        assert_eq!(fit.violations(&s), 0);
    }

    #[test]
    fn exponential_is_flagged_super_polynomial() {
        let s = radial(|r| (-r).exp());
        let short = fit_decay(&s, Some((1.0, 16.0))).unwrap();
        let long = fit_decay(&s, Some((1.0, 64.0))).unwrap();
        assert!(short.super_polynomial && long.super_polynomial);
        assert!(long.exponent_hat > short.exponent_hat);
    }

    #[test]
    fn fit_errors() {
        let zeros = radial(|_| 0.0);
        assert!(matches!(fit_decay(&zeros, Some((1.0, 64.0))), Err(Error::UndefinedFit)));
        let s = radial(|r| 1.0 / r);
        assert!(matches!(fit_decay(&s, Some((1.0, 4.0))), Err(Error::InsufficientShells { .. })));
    }

    #[test]
    fn mod_norm_values() {
        let grid = GridSpec::new(256, 16.0).unwrap();
        let g = make_gaussian_window(grid, false);
        let zero = SampledSignal::zeros(grid, "0");
        assert_eq!(mod_norm(&zero, &g, WeightParams::new(0.0, 2.0).unwrap()).unwrap(), 0.0);
        let f = make_test_signal(TestSignal::HoGroundState, grid).unwrap();
        let m2 = mod_norm(&f, &g, WeightParams::new(0.0, 2.0).unwrap()).unwrap();
        assert!((m2 - g.l2_norm * f.norm_l2()).abs() < 1e-6);
        let d = make_test_signal(TestSignal::Delta { x0: 0.0 }, grid).unwrap();
        let minf = mod_norm(&d, &g, WeightParams::new(0.0, f64::INFINITY).unwrap()).unwrap();
        assert!((minf - 1.0).abs() < 1e-10);
        let lo = mod_norm(&f, &g, WeightParams::new(-1.0, 2.0).unwrap()).unwrap();
        let hi = mod_norm(&f, &g, WeightParams::new(1.5, 2.0).unwrap()).unwrap();
        assert!(lo <= m2 && m2 <= hi);
        assert!(WeightParams::new(0.0, 0.5).is_err());
    }

    #[test]
    fn symbols() {
        let s = make_symbol(SymbolKind::SinMu { mu: 3.0 }).unwrap();
        assert!((s.eval(PI / 2.0, 7.0).re - 1.0).abs() < 1e-15);
        assert!(make_symbol(SymbolKind::SinMu { mu: 1.0 }).is_err());

        let h = Homogeneous::quartic_root();
        let (a, sig) = example4_split(&h);
        for i in 0..200 {
            let t = i as f64 * 0.137;
            let (x, xi) = (t.cos() * t * 0.05, t.sin() * t * 0.04);
            let hv = (h.eval)(x, xi);
            assert!((a.eval(x, xi).re + sig.eval(x, xi).re - hv).abs() < 1e-12);
            if x.hypot(xi) >= 2.0 {
                assert_eq!(sig.eval(x, xi).re, 0.0);
                assert_eq!(a.eval(x, xi).re, hv);
            }
        }
    }

    #[test]
    fn constant_symbol_profile_is_window_spectrum() {
        let grid = GridSpec::new(256, 16.0).unwrap();
        let one = make_symbol(SymbolKind::PotentialOnly { potential: SymbolFactor::constant() }).unwrap();
        let b = SymbolBox { grid, z1: vec![0.0], z2: vec![0.0], zeta_radius: 3.0, zeta_step: 0.25 };
        let p = symbol_stft_sup(&one, &b).unwrap();
        for (z, v) in p.zeta.iter().zip(&p.values) {
            let expect = (-PI * (z[0] * z[0] + z[1] * z[1])).exp();
            assert!((v - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn box_too_small_is_detected() {
        let grid = GridSpec::new(64, 8.0).unwrap();
        let (_, sig) = example4_split(&Homogeneous::quartic_root());
        let b = SymbolBox { grid, z1: vec![3.0], z2: vec![0.0], zeta_radius: 2.0, zeta_step: 0.5 };
        assert!(matches!(symbol_stft_sup(&sig, &b), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn mu_factor_needs_whole_periods() {
        let grid = GridSpec::new(256, 10.0).unwrap();
        let s = make_symbol(SymbolKind::SinMu { mu: 3.0 }).unwrap();
        let b = SymbolBox { grid, z1: vec![0.0], z2: vec![0.0], zeta_radius: 2.0, zeta_step: 0.5 };
        assert!(symbol_stft_sup(&s, &b).is_err());
    }
}
