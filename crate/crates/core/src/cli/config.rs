//! Experiment configuration: one JSON document per run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::grid::TestSignal;
use crate::wavefront::WfParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Stft,
    Wavefront,
    Flow,
    Propagate,
    GaborMatrix,
    Dyson,
    VerifySuite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n_points: usize,
    pub extent: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { n_points: 1024, extent: 32.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    #[default]
    Gaussian,
    /// First Hermite function `x exp(-pi x^2)`.
    Hermite,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    /// `-4 pi^2 xi^2`.
    Free,
    /// `pi xi^2 + pi x^2`.
    #[default]
    Harmonic,
    /// `(x^4 + xi^4)^(1/2)` smoothed near the origin; flow experiments only.
    QuarticRoot,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    None,
    /// `eps |sin x|^mu`.
    SinPower { mu: f64, eps: f64 },
    /// Translation operator `T_x0` (free particle only).
    Translation { x0: f64 },
    /// Modulation operator `M_xi0` (Dyson perturbation only).
    Modulation { xi0: f64 },
}

/// Sampling box `|x| <= x_radius`, `|xi| <= xi_radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeParams {
    pub x_radius: f64,
    pub xi_radius: f64,
    pub x_step: f64,
    pub xi_step: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self { x_radius: 6.0, xi_radius: 6.0, x_step: 0.5, xi_step: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointShape {
    #[default]
    Disc,
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaborParams {
    /// Input points `w` on a lattice of this radius and step.
    pub w_radius: f64,
    pub w_step: f64,
    pub w_shape: PointShape,
    /// Required drop of the fitted exponent under the identity flow.
    pub min_falsification_drop: f64,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self { w_radius: 6.0, w_step: 0.5, w_shape: PointShape::Disc, min_falsification_drop: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DysonParams {
    pub n_terms: usize,
    pub quad_points: usize,
    /// Steps per unit time of the reference split-step run.
    pub reference_steps_per_unit: f64,
}

impl Default for DysonParams {
    fn default() -> Self {
        Self { n_terms: 3, quad_points: 257, reference_steps_per_unit: 20000.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    /// Sample points are drawn uniformly from the disc of this radius.
    pub radius: f64,
    pub n_points: usize,
    pub rk4_step: f64,
    pub n_trace_times: usize,
    pub symplectic_tol: f64,
    pub group_law_tol: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self { radius: 10.0, n_points: 64, rk4_step: 1e-3, n_trace_times: 32, symplectic_tol: 1e-6, group_law_tol: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<TestSignal>,
    #[serde(default)]
    pub window: WindowKind,
    #[serde(default)]
    pub hamiltonian: HamiltonianKind,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_steps_per_unit")]
    pub steps_per_unit: f64,
    #[serde(default)]
    pub lattice: LatticeParams,
    #[serde(default)]
    pub wavefront: WfParams,
    /// Directions `(x, xi)` that a wavefront estimate must contain.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_directions: Vec<[f64; 2]>,
    /// Estimate wave front sets of propagated snapshots.
    #[serde(default = "default_true")]
    pub track_wavefront: bool,
    #[serde(default)]
    pub gabor: GaborParams,
    #[serde(default)]
    pub dyson: DysonParams,
    #[serde(default)]
    pub flow: FlowParams,
    /// Criteria ids for `verify-suite`; empty means all.
    #[serde(default)]
    pub criteria: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_steps_per_unit() -> f64 {
    400.0
}

fn default_true() -> bool {
    true
}

/// A configuration problem anchored to a position in the source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| ConfigError { line: e.line(), column: e.column(), message: e.to_string() })?;
    cfg.validate().map_err(|(key, message)| {
        let (line, column) = locate_key(text, key);
        ConfigError { line, column, message: format!("{key}: {message}") }
    })?;
    Ok(cfg)
}

/// Line and column of the first occurrence of `"key"`, or `(1, 1)`.
fn locate_key(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.find(&needle) {
            return (i + 1, c + 1);
        }
    }
    (1, 1)
}

type Invalid = (&'static str, String);

fn ensure(ok: bool, key: &'static str, msg: impl FnOnce() -> String) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err((key, msg()))
    }
}

impl ExperimentConfig {
    /// Range checks beyond the schema; returns the offending key.
    pub fn validate(&self) -> Result<(), Invalid> {
        let g = &self.grid;
        ensure(g.n_points >= 8 && g.n_points.is_power_of_two() && g.n_points <= 1 << 22, "n_points", || {
            format!("must be a power of two in [8, 2^22], got {}", g.n_points)
        })?;
        ensure(g.extent.is_finite() && g.extent > 0.0, "extent", || format!("must be positive, got {}", g.extent))?;
        ensure(self.times.iter().all(|t| t.is_finite() && t.abs() <= 100.0), "times", || {
            "entries must be finite with |t| <= 100".into()
        })?;
        ensure(self.steps_per_unit >= 200.0, "steps_per_unit", || {
            format!("must be at least 200, got {}", self.steps_per_unit)
        })?;
        let l = &self.lattice;
        ensure(
            [l.x_radius, l.xi_radius].iter().all(|v| v.is_finite() && *v >= 0.0)
                && [l.x_step, l.xi_step].iter().all(|v| v.is_finite() && *v > 0.0),
            "lattice",
            || "radii must be nonnegative and steps positive".into(),
        )?;
        self.wavefront.validate().map_err(|e| ("wavefront", e.to_string()))?;
        ensure(self.gabor.w_radius >= 0.0 && self.gabor.w_step > 0.0, "gabor", || {
            "w_radius must be nonnegative and w_step positive".into()
        })?;
        ensure(self.dyson.n_terms <= 4 && self.dyson.quad_points >= 8, "dyson", || {
            "n_terms must be at most 4 and quad_points at least 8".into()
        })?;
        ensure(self.dyson.reference_steps_per_unit >= 200.0, "dyson", || {
            "reference_steps_per_unit must be at least 200".into()
        })?;
        let f = &self.flow;
        ensure(
            f.radius > 0.0 && f.n_points > 0 && f.rk4_step > 0.0 && f.rk4_step <= 1e-2 && f.n_trace_times > 0,
            "flow",
            || "radius, n_points, n_trace_times must be positive and rk4_step in (0, 1e-2]".into(),
        )?;
        ensure(
            self.expected_directions.iter().all(|d| d[0].is_finite() && d[1].is_finite() && d[0].hypot(d[1]) > 0.0),
            "expected_directions",
            || "directions must be finite and nonzero".into(),
        )?;
        ensure(self.criteria.iter().all(|c| (1..=9).contains(c)), "criteria", || "ids must lie in 1..=9".into())?;
        if let PotentialSpec::SinPower { mu, eps } = self.potential {
            ensure(mu > 1.0 && eps.is_finite(), "potential", || format!("sin_power needs mu > 1, got {mu}"))?;
        }
        let needs_signal = matches!(
            self.experiment,
            ExperimentKind::Stft | ExperimentKind::Wavefront | ExperimentKind::Propagate | ExperimentKind::Dyson
        );
        ensure(!needs_signal || self.signal.is_some(), "signal", || "this experiment needs a signal".into())?;
        let needs_times = matches!(
            self.experiment,
            ExperimentKind::Propagate | ExperimentKind::GaborMatrix | ExperimentKind::Dyson | ExperimentKind::Flow
        );
        ensure(!needs_times || !self.times.is_empty(), "times", || "this experiment needs at least one time".into())?;
        ensure(
            self.experiment == ExperimentKind::Flow || self.hamiltonian != HamiltonianKind::QuarticRoot,
            "hamiltonian",
            || "quartic_root is available for flow experiments only".into(),
        )?;
        match (self.experiment, self.hamiltonian, self.potential) {
            (_, HamiltonianKind::Harmonic, PotentialSpec::Translation { .. }) => {
                Err(("potential", "translation potential requires the free Hamiltonian".into()))
            }
            (ExperimentKind::Dyson, _, PotentialSpec::None) => {
                Err(("potential", "dyson needs a perturbation".into()))
            }
            (ExperimentKind::Dyson, _, PotentialSpec::Translation { .. }) => {
                Err(("potential", "dyson supports sin_power and modulation perturbations".into()))
            }
            (e, _, PotentialSpec::Modulation { .. }) if e != ExperimentKind::Dyson => {
                Err(("potential", "modulation is a Dyson perturbation only".into()))
            }
            _ => Ok(()),
        }
    }
}
