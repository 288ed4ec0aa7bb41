//! Schrodinger evolution `u(t) = e^{itH} u0` with `H = m(D) + V(x)`.
//!
//! `m(D)` is the Fourier multiplier with symbol `m(xi)`; the Laplacian has
//! symbol `-4 pi^2 xi^2`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{apply_multiplier, tf_shift, GridSpec, PhasePoint, SampledSignal};

/// Minimum split-step resolution (steps per unit time).
pub const MIN_STEPS_PER_UNIT: f64 = 200.0;

pub trait Evolution: Send + Sync {
    /// `e^{itH} u` for any real `t`.
    fn evolve(&self, u: &SampledSignal, t: f64) -> Result<SampledSignal>;

    fn label(&self) -> String;

    /// Whether the evolution commutes exactly with the reflection
    /// `x -> -x` on `grid` (even potential and even kinetic symbol).
    fn parity_even(&self, _grid: GridSpec) -> bool {
        false
    }

    /// Sequential snapshots at increasing times (relative to 0).
    fn evolve_snapshots(&self, u0: &SampledSignal, times: &[f64]) -> Result<Vec<SampledSignal>> {
        let mut out = Vec::with_capacity(times.len());
        let mut cur = u0.clone();
        let mut t_cur = 0.0;
        for &t in times {
            cur = self.evolve(&cur, t - t_cur)?;
            t_cur = t;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Exact free evolution `e^{it Delta}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreeEvolution;

impl Evolution for FreeEvolution {
    fn evolve(&self, u: &SampledSignal, t: f64) -> Result<SampledSignal> {
        evolve_exact_free(u, t)
    }

    fn label(&self) -> String {
        "free".into()
    }

    fn parity_even(&self, _grid: GridSpec) -> bool {
        true
    }
}

pub fn evolve_exact_free(u0: &SampledSignal, t: f64) -> Result<SampledSignal> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    Ok(apply_multiplier(u0, |xi| Complex64::from_polar(1.0, -4.0 * PI * PI * t * xi * xi)))
}

/// `exp(it T_{x0})`, i.e. the multiplier `exp(it e^{-2 pi i x0 xi})`.
pub fn evolve_translation_potential(u0: &SampledSignal, t: f64, x0: f64) -> Result<SampledSignal> {
    let k = x0 / u0.grid.dx();
    if (k - k.round()).abs() > 1e-9 {
        return Err(Error::OffGrid { axis: "x", value: x0 });
    }
    Ok(apply_multiplier(u0, |xi| (Complex64::i() * t * Complex64::from_polar(1.0, -2.0 * PI * x0 * xi)).exp()))
}

/// `e^{it(Delta + T_x0)}`: both parts are Fourier multipliers, so they commute
/// and the product is exact.
#[derive(Clone, Copy, Debug)]
pub struct FreeTranslation {
    pub x0: f64,
}

impl Evolution for FreeTranslation {
    fn evolve(&self, u: &SampledSignal, t: f64) -> Result<SampledSignal> {
        evolve_translation_potential(&evolve_exact_free(u, t)?, t, self.x0)
    }

    fn label(&self) -> String {
        format!("free+T({})", self.x0)
    }
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Strang splitting for `m(D) + V(x)` at a fixed number of steps per unit
/// time. With `richardson` set, each evolution combines step sizes `dt`
/// and `dt/2` as `(4 u_{dt/2} - u_dt) / 3`.
#[derive(Clone)]
pub struct SplitStep {
    pub kinetic: RealFn,
    pub potential: ComplexFn,
    pub steps_per_unit: f64,
    pub richardson: bool,
    pub label: String,
}

impl std::fmt::Debug for SplitStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStep")
            .field("label", &self.label)
            .field("steps_per_unit", &self.steps_per_unit)
            .field("richardson", &self.richardson)
            .finish()
    }
}

impl SplitStep {
    pub fn new(label: impl Into<String>, kinetic: RealFn, potential: ComplexFn, steps_per_unit: f64) -> Result<Self> {
        if !(steps_per_unit >= MIN_STEPS_PER_UNIT) {
            return Err(Error::InvalidParameter(format!(
                "split-step needs at least {MIN_STEPS_PER_UNIT} steps per unit time, got {steps_per_unit}"
            )));
        }
        Ok(Self { kinetic, potential, steps_per_unit, richardson: false, label: label.into() })
    }

    /// `pi xi^2 + pi x^2`.
    pub fn harmonic(steps_per_unit: f64) -> Result<Self> {
        Self::new("harmonic", Arc::new(|xi| PI * xi * xi), Arc::new(|x| Complex64::new(PI * x * x, 0.0)), steps_per_unit)
    }

    /// `pi xi^2 + pi x^2 + eps |sin x|^3`.
    pub fn perturbed_harmonic(eps: f64, steps_per_unit: f64) -> Result<Self> {
        Self::new(
            format!("harmonic+{eps}|sin x|^3"),
            Arc::new(|xi| PI * xi * xi),
            Arc::new(move |x| Complex64::new(PI * x * x + eps * x.sin().abs().powi(3), 0.0)),
            steps_per_unit,
        )
    }

    /// `-4 pi^2 xi^2` with no potential.
    pub fn free(steps_per_unit: f64) -> Result<Self> {
        Self::new("free-split", Arc::new(|xi| -4.0 * PI * PI * xi * xi), Arc::new(|_| Complex64::new(0.0, 0.0)), steps_per_unit)
    }

    pub fn with_richardson(mut self, on: bool) -> Self {
        self.richardson = on;
        self
    }

    pub fn is_unitary_on(&self, grid: GridSpec) -> bool {
        grid.x_points().iter().all(|&x| (self.potential)(x).im == 0.0)
    }

    pub fn n_steps(&self, t: f64) -> usize {
        (t.abs() * self.steps_per_unit).ceil().max(1.0) as usize
    }

    fn strang(&self, u0: &SampledSignal, t: f64, n_steps: usize) -> Result<SampledSignal> {
        let grid = u0.grid;
        let n = grid.n_points();
        let dt = t / n_steps as f64;
        let xs = grid.x_points();
        let mut half = Vec::with_capacity(n);
        let mut full = Vec::with_capacity(n);
        for &x in &xs {
            let v = (self.potential)(x);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite("potential"));
            }
            half.push((Complex64::i() * v * (dt / 2.0)).exp());
            full.push((Complex64::i() * v * dt).exp());
        }
        let inv_n = 1.0 / n as f64;
        let kin: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(inv_n, dt * (self.kinetic)(fft::bin_frequency(k, n, grid.extent()))))
            .collect();
        let plan = fft::plan(n);
        let mut scratch = plan.scratch();
        let mut buf = u0.values.clone();
        let mul = |b: &mut [Complex64], m: &[Complex64]| b.iter_mut().zip(m).for_each(|(v, w)| *v *= w);
        mul(&mut buf, &half);
        for s in 0..n_steps {
            plan.forward_with(&mut buf, &mut scratch);
            mul(&mut buf, &kin);
            plan.inverse_with(&mut buf, &mut scratch);
            mul(&mut buf, if s + 1 == n_steps { &half } else { &full });
        }
        if buf.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("split-step state"));
        }
        Ok(SampledSignal { grid, values: buf, label: u0.label.clone() })
    }
}

impl Evolution for SplitStep {
    fn evolve(&self, u: &SampledSignal, t: f64) -> Result<SampledSignal> {
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if t == 0.0 {
            return Ok(u.clone());
        }
        let n = self.n_steps(t);
        if !self.richardson {
            return self.strang(u, t, n);
        }
        let coarse = self.strang(u, t, n)?;
        let mut fine = self.strang(u, t, 2 * n)?;
        for (f, c) in fine.values.iter_mut().zip(&coarse.values) {
            *f = (*f * 4.0 - c) / 3.0;
        }
        Ok(fine)
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn parity_even(&self, grid: GridSpec) -> bool {
        let n = grid.n_points();
        (1..n).all(|j| (self.potential)(grid.x(j)) == (self.potential)(grid.x(n - j)))
            && (1..n).all(|k| {
                let a = fft::bin_frequency(k, n, grid.extent());
                (self.kinetic)(a) == (self.kinetic)(fft::bin_frequency(n - k, n, grid.extent()))
            })
    }
}

/// Reflection `(Pu)(x) = u(-x)` on the periodic grid.
pub fn reflect(u: &SampledSignal) -> SampledSignal {
    let n = u.grid.n_points();
    let values = (0..n).map(|j| u.values[(n - j) % n]).collect();
    SampledSignal { grid: u.grid, values, label: u.label.clone() }
}

/// Bounded perturbation `B` applied on the grid.
#[derive(Clone, Debug)]
pub enum Operator {
    Zero,
    /// Pointwise multiplication by grid samples.
    Multiply { values: Vec<Complex64>, label: String },
    /// Modulation `M_xi0`; `xi0` must lie on the dual grid.
    Modulate { xi0: f64 },
}

impl Operator {
    pub fn multiply(grid: GridSpec, label: impl Into<String>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values: Vec<Complex64> = grid.x_points().into_iter().map(f).collect();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("multiplier"));
        }
        Ok(Operator::Multiply { values, label: label.into() })
    }

    pub fn apply(&self, u: &SampledSignal) -> Result<SampledSignal> {
        match self {
            Operator::Zero => Ok(SampledSignal::zeros(u.grid, u.label.clone())),
            Operator::Multiply { values, .. } => {
                if values.len() != u.values.len() {
                    return Err(Error::GridMismatch(format!("operator has {} samples, signal {}", values.len(), u.values.len())));
                }
                let mut out = u.clone();
                out.values.iter_mut().zip(values).for_each(|(a, b)| *a *= b);
                Ok(out)
            }
            Operator::Modulate { xi0 } => tf_shift(u, &PhasePoint::d1(0.0, *xi0)),
        }
    }

    /// Operator norm on the grid.
    pub fn norm_bound(&self) -> f64 {
        match self {
            Operator::Zero => 0.0,
            Operator::Multiply { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Operator::Modulate { .. } => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Operator::Zero => "0".into(),
            Operator::Multiply { label, .. } => label.clone(),
            Operator::Modulate { xi0 } => format!("M_{xi0}"),
        }
    }
}

/// Split-step specification with an explicit step count.
#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    pub stepper: SplitStep,
    pub pseudo_perturbation: Option<Operator>,
    pub t: f64,
    pub n_steps: usize,
}

pub fn evolve_split_step(u0: &SampledSignal, spec: &EvolutionSpec) -> Result<SampledSignal> {
    if spec.pseudo_perturbation.is_some() {
        return Err(Error::Unsupported("the split-step path takes multiplication potentials only; use the Dyson path".into()));
    }
    let floor = (spec.t.abs() * MIN_STEPS_PER_UNIT).ceil() as usize;
    if spec.n_steps < floor.max(1) {
        return Err(Error::InvalidParameter(format!("n_steps {} below the floor {floor}", spec.n_steps)));
    }
    if spec.t == 0.0 {
        return Ok(u0.clone());
    }
    spec.stepper.strang(u0, spec.t, spec.n_steps)
}

/// `B(s) = e^{-isA} B e^{isA}`.
pub struct ConjugatedOperator<'a> {
    pub b: &'a Operator,
    pub s: f64,
    pub evolution: &'a dyn Evolution,
}

impl ConjugatedOperator<'_> {
    pub fn apply(&self, u: &SampledSignal) -> Result<SampledSignal> {
        if self.s == 0.0 {
            return self.b.apply(u);
        }
        let v = self.evolution.evolve(u, self.s)?;
        let v = self.b.apply(&v)?;
        self.evolution.evolve(&v, -self.s)
    }
}

pub fn conjugated_perturbation<'a>(b: &'a Operator, s: f64, evolution: &'a dyn Evolution) -> ConjugatedOperator<'a> {
    ConjugatedOperator { b, s, evolution }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DysonSpec {
    pub n_terms: usize,
    pub quad_points_per_level: usize,
}

impl DysonSpec {
    pub fn new(n_terms: usize, quad_points_per_level: usize) -> Result<Self> {
        if n_terms > 4 {
            return Err(Error::InvalidParameter(format!("at most 4 Dyson terms are supported, got {n_terms}")));
        }
        if quad_points_per_level < 8 {
            return Err(Error::InvalidParameter(format!("need at least 8 quadrature nodes, got {quad_points_per_level}")));
        }
        Ok(Self { n_terms, quad_points_per_level })
    }
}

#[derive(Clone, Debug)]
pub struct DysonResult {
    /// `e^{itA} Q_N(t) u0`, the truncated approximation of `e^{it(A+B)} u0`.
    pub u_t: SampledSignal,
    /// `||Q_n(t) u0||` for `n = 0..=N`.
    pub term_norms: Vec<f64>,
    /// Set when the perturbation is not symmetric, so the evolution is not unitary.
    pub non_unitary: bool,
}

/// Truncated Dyson series for `e^{it(A+B)} u0 = e^{itA} Q(t) u0` with
/// `Q(t) = sum_n i^n int_{t > t1 > ... > tn > 0} B(t1)...B(tn) dt`.
///
/// Works with `W_n(s) = e^{isA} F_n(s)`, where `F_n(s) = int_0^s B(r) F_{n-1}(r) dr`,
/// which obeys `W_n(s) = int_0^s e^{i(s-r)A} B W_{n-1}(r) dr`. Each level is
/// advanced with the trapezoid rule on a shared uniform node grid.
pub fn dyson_phillips_apply(u0: &SampledSignal, t: f64, a: &dyn Evolution, b: &Operator, d: DysonSpec) -> Result<DysonResult> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("Dyson path needs t >= 0, got {t}")));
    }
    let d = DysonSpec::new(d.n_terms, d.quad_points_per_level)?;
    let non_unitary = match b {
        Operator::Multiply { values, .. } => values.iter().any(|v| v.im != 0.0),
        _ => false,
    };
    let q = d.quad_points_per_level;
    let h = t / (q - 1) as f64;
    let mut level: Vec<SampledSignal> = Vec::with_capacity(q);
    level.push(u0.clone());
    for k in 1..q {
        let next = a.evolve(&level[k - 1], h)?;
        level.push(next);
    }
    let mut total = level[q - 1].clone();
    let mut term_norms = vec![level[q - 1].norm_l2()];
    let mut coef = Complex64::new(1.0, 0.0);
    for _ in 1..=d.n_terms {
        let bw: Vec<SampledSignal> = level.iter().map(|w| b.apply(w)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(q);
        next.push(SampledSignal::zeros(u0.grid, u0.label.clone()));
        for k in 1..q {
            let mut acc = next[k - 1].clone();
            acc.add_assign(&bw[k - 1].scaled(Complex64::new(h / 2.0, 0.0)))?;
            let mut w = a.evolve(&acc, h)?;
            w.add_assign(&bw[k].scaled(Complex64::new(h / 2.0, 0.0)))?;
            next.push(w);
        }
        level = next;
        coef *= Complex64::i();
        term_norms.push(level[q - 1].norm_l2());
        total.add_assign(&level[q - 1].scaled(coef))?;
    }
    Ok(DysonResult { u_t: total, term_norms, non_unitary })
}
