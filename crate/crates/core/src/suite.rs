//! Reference verification suite. Each criterion runs a fixed experiment and
//! compares it against closed forms or structural properties; the CLI's
//! `verify-suite` experiment and the acceptance tests both call into here.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{group_law_check, symplectic_defect, FlowMap, HamiltonianSpec, DEFAULT_STEP};
use crate::gabormatrix::{
    disc_points, fit_envelope, sample_gabor_matrix_times, square_points, wrongflow_falsification,
};
use crate::grid::{
    apodize, make_gaussian_window, make_hermite_window, make_test_signal, tf_shift, GridSpec, PhasePoint,
    SampledSignal, TestSignal, Window,
};
use crate::modspace::{fit_decay, make_symbol, symbol_stft_sup, SymbolBox, SymbolKind};
use crate::propagator::{dyson_phillips_apply, DysonSpec, Evolution, FreeEvolution, Operator, SplitStep};
use crate::stft::{stft, stft_adjoint, TFLattice};
use crate::wavefront::{estimate_wf, map_wf, wf_distance, WfEstimate, WfMode, WfParams};
use crate::Complex64;

/// One measured quantity and the bound it must respect.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// `None` for wall-clock measurements, which are kept out of reports.
    pub value: Option<f64>,
    pub bound: f64,
    pub relation: &'static str,
    #[serde(skip)]
    pub measured: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value <= bound, value: Some(value), bound, relation: "<=", measured: value }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value >= bound, value: Some(value), bound, relation: ">=", measured: value }
    }

    pub fn runtime(name: impl Into<String>, seconds: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: seconds < bound, value: None, bound, relation: "<", measured: seconds }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let unit = if self.value.is_none() { " s" } else { "" };
        write!(f, "{} = {:.4e}{unit} ({} {:.4e})", self.name, self.measured, self.relation, self.bound)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: u8, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self { id, name: criterion_name(id).unwrap_or("unknown"), passed, checks }
    }

    /// `PASS [n] name` followed by the failing (or, when passing, all) checks.
    pub fn summary_line(&self) -> String {
        let shown: Vec<String> = self
            .checks
            .iter()
            .filter(|c| self.passed || !c.passed)
            .map(|c| c.to_string())
            .collect();
        format!(
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            shown.join("; ")
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "chirp-stft-closed-form"),
    (2, "harmonic-gabor-matrix"),
    (3, "nonsmooth-potential-envelope"),
    (4, "wave-front-propagation"),
    (5, "sin-power-symbol-decay"),
    (6, "flow-algebra"),
    (7, "dyson-phillips-consistency"),
    (8, "inversion-and-unitarity"),
    (9, "window-independence"),
];

pub fn criterion_name(id: u8) -> Option<&'static str> {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1)
}

pub fn run_criterion(id: u8) -> Result<CriterionReport> {
    let checks = match id {
        1 => chirp_closed_form()?,
        2 => harmonic_gabor_matrix()?,
        3 => nonsmooth_envelope()?,
        4 => wave_front_propagation()?,
        5 => sin_power_decay()?,
        6 => flow_algebra()?,
        7 => dyson_consistency()?,
        8 => inversion_and_unitarity()?,
        9 => window_independence()?,
        _ => return Err(Error::InvalidParameter(format!("unknown criterion {id}"))),
    };
    Ok(CriterionReport::new(id, checks))
}

fn chirp_closed_form() -> Result<Vec<Check>> {
    let start = Instant::now();
    let grid = GridSpec::new(2048, 64.0)?;
    let g = make_gaussian_window(grid, false);
    let lat = TFLattice::centered_box(grid, 4.0, 8.0, 0.125, 0.125)?;
    let mut checks = Vec::new();
    for c in [1.0, -2.0] {
        let f = make_test_signal(TestSignal::Chirp { c }, grid)?;
        let v = stft(&f, &g, &lat)?;
        let q = 1.0 + c * c;
        let err = v
            .points()
            .map(|(x, xi, val)| (val.norm() - q.powf(-0.25) * (-PI * (xi - c * x).powi(2) / q).exp()).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("sup-error(c={c})"), err, 1e-6));
    }
    checks.push(Check::runtime("runtime", start.elapsed().as_secs_f64(), 5.0));
    Ok(checks)
}

fn harmonic_gabor_matrix() -> Result<Vec<Check>> {
    let start = Instant::now();
    let grid = GridSpec::new(1024, 32.0)?;
    let g = make_gaussian_window(grid, false);
    let w = disc_points(6.0, 0.5);
    let lat = TFLattice::centered_box(grid, 6.0, 6.0, 0.5, 0.5)?;
    let u = SplitStep::harmonic(2000.0)?;
    let samples = sample_gabor_matrix_times(&u, &g, &w, &lat, &[0.3, 1.0, 2.5])?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut checks = Vec::new();
    for k in &samples {
        let chi = FlowMap::harmonic(k.t);
        let mut err = 0.0f64;
        for (i, wi) in k.w_points.iter().enumerate() {
            let c = chi.apply(*wi)?;
            for (j, z) in k.z_points.iter().enumerate() {
                if z[0].hypot(z[1]) > 6.0 + 1e-9 {
                    continue;
                }
                let d2 = (z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2);
                let expect = 2f64.powf(-0.5) * (-PI / 2.0 * d2).exp();
                err = err.max((k.get(i, j).norm() - expect).abs());
            }
        }
        checks.push(Check::at_most(format!("sup-error(t={})", k.t), err, 5e-3));
        checks.push(Check::at_most(format!("boundary-rows(t={})", k.t), k.flagged_rows.len() as f64, 0.0));
    }
    checks.push(Check::runtime("runtime", elapsed, 60.0));
    Ok(checks)
}

fn nonsmooth_envelope() -> Result<Vec<Check>> {
    let grid = GridSpec::new(1024, 32.0)?;
    let g = make_gaussian_window(grid, false);
    let w = square_points(6.0, 0.5);
    let lat = TFLattice::centered_box(grid, 6.0, 6.0, 0.5, 0.5)?;
    let u = SplitStep::perturbed_harmonic(1.0, 400.0)?;
    let samples = sample_gabor_matrix_times(&u, &g, &w, &lat, &[0.5, 1.0])?;
    let mut checks = Vec::new();
    for k in &samples {
        let chi = FlowMap::harmonic(k.t);
        let fit = fit_envelope(k, &chi)?;
        let wrong = wrongflow_falsification(k, &chi, &FlowMap::identity())?;
        checks.push(Check::at_most(format!("violations(t={})", k.t), fit.violations as f64, 0.0));
        checks.push(Check::at_least(format!("s_hat(t={})", k.t), fit.s_hat, 2.0));
        checks.push(Check::at_least(format!("wrong-flow-drop(t={})", k.t), wrong.s_true - wrong.s_wrong, 1.0));
    }
    Ok(checks)
}

/// Weighted detector used for propagation: `p = inf`, weight `<z>^{1/4}`.
pub fn propagation_wf_params() -> WfParams {
    WfParams {
        mode: WfMode::Weighted { p: f64::INFINITY, r: 0.25, ratio_threshold: 0.9 },
        ..WfParams::default()
    }
}

/// `(t, distance in bin widths, WF(u(t)), chi_t(WF(u0)))`.
pub type PropagationStep = (f64, f64, WfEstimate, WfEstimate);

/// Estimates `WF(u(t))` and `chi_t(WF(u0))` for each time; returns the
/// distance in bin widths with both estimates.
pub fn propagation_distances(
    u0: &SampledSignal,
    evolution: &dyn Evolution,
    chi: &FlowMap,
    times: &[f64],
    params: &WfParams,
) -> Result<(WfEstimate, Vec<PropagationStep>)> {
    let g = make_gaussian_window(u0.grid, false);
    let e0 = estimate_wf(&apodize(u0), &g, params)?;
    let snaps = evolution.evolve_snapshots(u0, times)?;
    let mut out = Vec::with_capacity(times.len());
    for (&t, u) in times.iter().zip(&snaps) {
        let et = estimate_wf(&apodize(u), &g, params)?;
        let mapped = map_wf(&e0, &chi.at(t))?;
        let d = wf_distance(&et, &mapped)? / et.bin_width();
        out.push((t, d, et, mapped));
    }
    Ok((e0, out))
}

fn wave_front_propagation() -> Result<Vec<Check>> {
    let params = propagation_wf_params();
    type Case = (&'static str, GridSpec, TestSignal, Box<dyn Evolution>, FlowMap);
    let cases: Vec<Case> = vec![
        ("free,delta", GridSpec::new(262144, 1024.0)?, TestSignal::Delta { x0: 0.0 }, Box::new(FreeEvolution), FlowMap::free(0.0)),
        ("harmonic,constant", GridSpec::new(65536, 256.0)?, TestSignal::Constant, Box::new(SplitStep::harmonic(400.0)?), FlowMap::harmonic(0.0)),
        (
            "perturbed-harmonic,narrow-gaussian",
            GridSpec::new(262144, 512.0)?,
            TestSignal::NarrowGaussian { eps: 1.0 / 64.0 },
            Box::new(SplitStep::perturbed_harmonic(1.0, 400.0)?),
            FlowMap::harmonic(0.0),
        ),
    ];
    let mut checks = Vec::new();
    for (name, grid, signal, evolution, chi) in cases {
        let u0 = make_test_signal(signal, grid)?;
        let (e0, res) = propagation_distances(&u0, evolution.as_ref(), &chi, &[0.5, 1.0], &params)?;
        checks.push(Check::at_least(format!("initial-bins({name})"), e0.in_wf_bins().len() as f64, 1.0));
        for (t, d, _, _) in res {
            checks.push(Check::at_most(format!("distance-bins({name},t={t})"), d, 2.0));
        }
    }
    Ok(checks)
}

fn sin_power_decay() -> Result<Vec<Check>> {
    let grid = GridSpec::new(16384, 16.0 * PI)?;
    let sigma = make_symbol(SymbolKind::SinMu { mu: 3.0 })?;
    let z1: Vec<f64> = (0..8).map(|i| i as f64 * PI / 8.0).collect();
    let b = SymbolBox { grid, z1, z2: vec![0.0], zeta_radius: 128.0, zeta_step: 0.5 };
    let profile = symbol_stft_sup(&sigma, &b)?;
    let fit = fit_decay(&profile.radial_samples(), Some((4.0, 128.0)))?;
    Ok(vec![
        Check::at_least("exponent-lower", fit.exponent_hat, 3.5),
        Check::at_most("exponent-upper", fit.exponent_hat, 4.5),
    ])
}

fn flow_algebra() -> Result<Vec<Check>> {
    let mut pts = Vec::new();
    for r in [0.5, 2.0, 5.0, 10.0] {
        for k in 0..12 {
            let th = 2.0 * PI * (k as f64 + 0.25) / 12.0;
            pts.push([r * th.cos(), r * th.sin()]);
        }
    }
    let times: Vec<f64> = (0..=12).map(|i| -3.0 + 0.5 * i as f64).collect();
    let mut checks = Vec::new();
    for spec in [HamiltonianSpec::harmonic(), HamiltonianSpec::quartic_root_smoothed()] {
        let label = spec.label.clone();
        let base = FlowMap::numeric(spec, 0.0, DEFAULT_STEP)?;
        let mut sym = 0.0f64;
        for &t in &times {
            let chi = base.at(t);
            for &w in &pts {
                sym = sym.max(symplectic_defect(&chi.jacobian(w)?));
            }
        }
        checks.push(Check::at_most(format!("symplectic-defect({label})"), sym, 1e-6));
        let mut group = 0.0f64;
        for (t, s) in [(0.7213, 1.4467), (-2.2361, 0.7321), (2.6458, -1.1180), (-0.3333, -2.4142)] {
            group = group.max(group_law_check(&base, t, s, &pts)?);
        }
        checks.push(Check::at_most(format!("group-law({label})"), group, 1e-7));
    }
    let numeric = FlowMap::numeric(HamiltonianSpec::harmonic(), 0.0, DEFAULT_STEP)?;
    let mut dev = 0.0f64;
    for &t in &times {
        for &w in &pts {
            let a = numeric.at(t).apply(w)?;
            let b = FlowMap::harmonic(t).apply(w)?;
            dev = dev.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    checks.push(Check::at_most("numeric-vs-closed-form", dev, 1e-8));
    Ok(checks)
}

fn dyson_consistency() -> Result<Vec<Check>> {
    let grid = GridSpec::new(256, 16.0)?;
    let ground = make_test_signal(TestSignal::HoGroundState, grid)?;
    let u0 = tf_shift(&ground, &PhasePoint::d1(1.0, 0.5))?;
    let t = 0.2;
    let b = Operator::multiply(grid, "0.1|sin x|^3", |x| Complex64::new(0.1 * x.sin().abs().powi(3), 0.0))?;
    let reference = SplitStep::perturbed_harmonic(0.1, 20000.0)?.with_richardson(true).evolve(&u0, t)?;
    let a = SplitStep::harmonic(20000.0)?;
    let d = dyson_phillips_apply(&u0, t, &a, &b, DysonSpec::new(3, 257)?)?;
    let tb = t * b.norm_bound();
    let tol = 10.0 * tb.powi(4) / 24.0 * u0.norm_l2();
    let err = d.u_t.sub(&reference)?.norm_l2();
    // For ||term_n|| ~ c^n / n!, the scaled ratios n ||term_n|| / ||term_{n-1}||
    // are all close to c.
    let scaled: Vec<f64> = (1..d.term_norms.len())
        .map(|n| n as f64 * d.term_norms[n] / d.term_norms[n - 1])
        .collect();
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("truncation-error", err, tol),
        Check::at_most("ratio-spread", hi / lo, 3.0),
        Check::at_most("ratio-vs-t*|B|", hi / tb, 3.0),
    ])
}

fn inversion_and_unitarity() -> Result<Vec<Check>> {
    let grid = GridSpec::new(256, 16.0)?;
    let g = make_gaussian_window(grid, false);
    let f = SampledSignal::from_fn(grid, "test", |x| {
        Complex64::from_polar((-PI * (x - 1.0).powi(2) / 3.0).exp(), 0.7 * x * x - 2.0 * x)
            + Complex64::new(0.3 * (-PI * (x + 2.5).powi(2)).exp(), 0.0)
    })?;
    let v = stft(&f, &g, &TFLattice::full(grid))?;
    let rec = stft_adjoint(&v, &g)?.scaled(Complex64::new(1.0 / (g.l2_norm * g.l2_norm), 0.0));
    let inv = rec.rel_l2_error(&f)?;

    let grid = GridSpec::new(1024, 32.0)?;
    let ground = make_test_signal(TestSignal::HoGroundState, grid)?;
    let packet = tf_shift(&ground, &PhasePoint::d1(1.5, -1.0))?;
    let pert = SplitStep::perturbed_harmonic(1.0, 400.0)?;
    let t_drift = 2.0;
    let drift = (pert.evolve(&packet, t_drift)?.norm_l2() - packet.norm_l2()).abs() / packet.norm_l2() / t_drift;

    let ho = SplitStep::harmonic(2000.0)?;
    let u1 = ho.evolve(&ground, 1.0)?;
    let phase_err = u1.sub(&ground.scaled(Complex64::from_polar(1.0, 0.5)))?.norm_l2() / ground.norm_l2();
    let period = ho.evolve(&packet, 2.0 * PI)?;
    let period_err = period.rel_l2_error(&packet.scaled(Complex64::new(-1.0, 0.0)))?;
    Ok(vec![
        Check::at_most("stft-inversion", inv, 1e-9),
        Check::at_most("unitarity-drift-per-unit-time", drift, 1e-8),
        Check::at_most("ground-state-phase", phase_err, 1e-4),
        Check::at_most("full-period", period_err, 1e-3),
    ])
}

fn window_independence() -> Result<Vec<Check>> {
    let grid = GridSpec::new(262144, 256.0)?;
    let params = WfParams::default();
    let windows: [Window; 2] = [make_gaussian_window(grid, false), make_hermite_window(grid, false)];
    let mut checks = Vec::new();
    for (name, signal) in [
        ("delta", TestSignal::Delta { x0: 0.0 }),
        ("plane-wave", TestSignal::PlaneWave { xi0: 0.25 }),
        ("chirp(1)", TestSignal::Chirp { c: 1.0 }),
    ] {
        let f = apodize(&make_test_signal(signal, grid)?);
        let a = estimate_wf(&f, &windows[0], &params)?;
        let b = estimate_wf(&f, &windows[1], &params)?;
        checks.push(Check::at_least(format!("nonempty({name})"), a.in_wf_bins().len().min(b.in_wf_bins().len()) as f64, 1.0));
        checks.push(Check::at_most(format!("distance-bins({name})"), wf_distance(&a, &b)? / a.bin_width(), 1.0));
    }
    Ok(checks)
}
