//! Numerical Gabor wave front sets on the phase plane.
//!
//! Directions are binned into `n_bins` equal arcs centered at `2 pi k / n_bins`.
//! Each lattice point of the STFT counts toward the bin nearest its polar
//! angle, and each bin is classified from its dyadic-shell profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::grid::{japanese, SampledSignal, Window};
use crate::modspace::{extended_real, fit_decay_with_floor, DECAY_FLOOR};
use crate::stft::{stft, TFArray, TFLattice};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub direction: [f64; 2],
    pub half_angle: f64,
}

impl Cone {
    pub fn new(direction: [f64; 2], half_angle: f64) -> Result<Self> {
        let n = direction[0].hypot(direction[1]);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("cone direction must be nonzero".into()));
        }
        if !(half_angle > 0.0 && half_angle <= PI / 2.0) {
            return Err(Error::InvalidParameter(format!("cone half-angle must lie in (0, pi/2], got {half_angle}")));
        }
        Ok(Self { direction: [direction[0] / n, direction[1] / n], half_angle })
    }

    pub fn angle(&self) -> f64 {
        self.direction[1].atan2(self.direction[0])
    }

    pub fn contains(&self, z: [f64; 2]) -> bool {
        let a = z[1].atan2(z[0]);
        circ_dist(a, self.angle()) <= self.half_angle + 1e-12
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeShell {
    pub m: i32,
    pub count: usize,
    pub max: f64,
    pub r_at_max: f64,
    /// `sum |F|^p <z>^{pr}` times the cell area (`max |F| <z>^r` for `p = inf`).
    pub weighted: f64,
}

/// Per-shell statistics of `F` inside `cone`, for shells `2^m <= |z| < 2^(m+1)`
/// restricted to `[inner_radius, outer_radius)`.
pub fn cone_shell_profile(f: &TFArray, cone: &Cone, p: f64, r: f64, inner_radius: f64, outer_radius: f64) -> Result<Vec<ConeShell>> {
    if !(inner_radius > 0.0 && outer_radius > inner_radius) {
        return Err(Error::InvalidParameter("need 0 < inner_radius < outer_radius".into()));
    }
    let m_lo = inner_radius.log2().floor() as i32;
    let m_hi = (outer_radius.log2().ceil() as i32) - 1;
    let mut shells: Vec<ConeShell> = (m_lo..=m_hi)
        .map(|m| ConeShell { m, count: 0, max: 0.0, r_at_max: 0.0, weighted: 0.0 })
        .collect();
    let cell = f.lattice.cell_area();
    for (x, xi, v) in f.points() {
        let rad = x.hypot(xi);
        if rad < inner_radius || rad >= outer_radius || !cone.contains([x, xi]) {
            continue;
        }
        let s = &mut shells[(rad.log2().floor() as i32 - m_lo) as usize];
        accumulate(s, rad, v.norm(), p, r, cell);
    }
    if let Some(s) = shells.iter().find(|s| s.count == 0) {
        return Err(Error::EmptyConeShell { shell: s.m });
    }
    Ok(shells)
}

fn accumulate(s: &mut ConeShell, rad: f64, a: f64, p: f64, r: f64, cell: f64) {
    s.count += 1;
    if a > s.max || s.count == 1 {
        s.max = a;
        s.r_at_max = rad;
    }
    let w = japanese(&[rad]).powf(r);
    if p.is_infinite() {
        s.weighted = s.weighted.max(a * w);
    } else {
        s.weighted += (a * w).powf(p) * cell;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WfMode {
    /// Bin is in the set when its fitted decay exponent stays below `r_threshold`.
    Smooth { r_threshold: f64 },
    /// Bin is in the set when weighted shell sums fail to decay geometrically.
    Weighted {
        #[serde(with = "extended_real")]
        p: f64,
        r: f64,
        ratio_threshold: f64,
    },
}

impl Default for WfMode {
    fn default() -> Self {
        WfMode::Smooth { r_threshold: 6.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WfParams {
    pub mode: WfMode,
    pub n_bins: usize,
    pub r_max: f64,
    pub inner_radius: f64,
    pub x_step: f64,
    pub xi_step: f64,
}

impl Default for WfParams {
    fn default() -> Self {
        Self { mode: WfMode::default(), n_bins: 64, r_max: 64.0, inner_radius: 4.0, x_step: 0.25, xi_step: 0.25 }
    }
}

impl WfParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 16 {
            return Err(Error::InvalidParameter(format!("n_bins must be at least 16, got {}", self.n_bins)));
        }
        if !(self.inner_radius >= 2.0) {
            return Err(Error::InvalidParameter("inner_radius must be at least 2".into()));
        }
        if !(self.r_max >= 32.0 && self.r_max / self.inner_radius >= 8.0) {
            return Err(Error::InvalidParameter("need r_max >= 32 and r_max / inner_radius >= 8".into()));
        }
        if !(self.x_step > 0.0 && self.xi_step > 0.0) {
            return Err(Error::InvalidParameter("lattice steps must be positive".into()));
        }
        match self.mode {
            WfMode::Smooth { r_threshold } if !(r_threshold > 0.0) => {
                Err(Error::InvalidParameter("r_threshold must be positive".into()))
            }
            WfMode::Weighted { p, ratio_threshold, .. } if !(p >= 1.0) || !(ratio_threshold > 0.0) => {
                Err(Error::InvalidParameter("weighted mode needs p >= 1 and a positive ratio threshold".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfBin {
    pub angle: f64,
    pub direction: [f64; 2],
    /// Outer-to-inner shell maximum ratio (smooth mode) or median shell
    /// ratio (weighted mode); 0 for bins below the numerical floor.
    pub score: f64,
    pub exponent_hat: Option<f64>,
    pub tail_exponent: Option<f64>,
    pub in_wf: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfEstimate {
    pub bins: Vec<WfBin>,
    pub mode: WfMode,
    pub inner_radius: f64,
    pub r_max: f64,
}

impl WfEstimate {
    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * PI / self.bins.len() as f64
    }

    pub fn in_wf_bins(&self) -> Vec<usize> {
        self.bins.iter().enumerate().filter(|(_, b)| b.in_wf).map(|(i, _)| i).collect()
    }

    pub fn bin_of(&self, angle: f64) -> usize {
        nearest_bin(angle, self.bins.len())
    }

    pub fn contains_direction(&self, dir: [f64; 2]) -> bool {
        self.bins[self.bin_of(dir[1].atan2(dir[0]))].in_wf
    }

    /// Maximal runs of adjacent in-set bins, as inclusive `(first, last)`
    /// bin indices taken counterclockwise.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let n = self.bins.len();
        let on: Vec<bool> = self.bins.iter().map(|b| b.in_wf).collect();
        if on.iter().all(|&b| b) {
            return vec![(0, n - 1)];
        }
        let start = on.iter().position(|&b| !b).expect("some bin is off");
        let mut arcs = Vec::new();
        let mut cur: Option<usize> = None;
        for s in 1..=n {
            let i = (start + s) % n;
            match (on[i], cur) {
                (true, None) => cur = Some(i),
                (false, Some(a)) => {
                    arcs.push((a, (i + n - 1) % n));
                    cur = None;
                }
                _ => {}
            }
        }
        arcs
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle,score,in_wf\n");
        for b in &self.bins {
            out.push_str(&format!("{:.12e},{:.12e},{}\n", b.angle, b.score, u8::from(b.in_wf)));
        }
        out
    }
}

fn nearest_bin(angle: f64, n_bins: usize) -> usize {
    let k = (angle.rem_euclid(2.0 * PI) / (2.0 * PI) * n_bins as f64).round() as usize;
    k % n_bins
}

fn bin_center(k: usize, n_bins: usize) -> (f64, [f64; 2]) {
    let a = 2.0 * PI * k as f64 / n_bins as f64;
    (a, [a.cos(), a.sin()])
}

/// Estimates the wave front set of `f` from `V_g f` sampled on
/// `|x|, |xi| <= r_max`.
pub fn estimate_wf(f: &SampledSignal, g: &Window, params: &WfParams) -> Result<WfEstimate> {
    params.validate()?;
    let grid = f.grid;
    grid.check_same(&g.grid(), "signal vs window")?;
    let edge = f.edge_mass();
    if edge > 1e-6 {
        return Err(Error::UnreliableTruncation(format!("relative boundary mass {edge:.3e} exceeds 1e-6")));
    }
    let (wr, wf) = (g.radius(), g.frequency_radius());
    if grid.extent() / 2.0 < params.r_max + wr {
        return Err(Error::UnreliableTruncation(format!(
            "half extent {} is below r_max + window radius {}",
            grid.extent() / 2.0,
            params.r_max + wr
        )));
    }
    if grid.nyquist() < params.r_max + wf {
        return Err(Error::UnreliableTruncation(format!(
            "Nyquist frequency {} is below r_max + window bandwidth {}",
            grid.nyquist(),
            params.r_max + wf
        )));
    }
    let lat = TFLattice::centered_box(grid, params.r_max, params.r_max, params.x_step, params.xi_step)?;
    let v = stft(f, g, &lat)?;
    Ok(classify(&v, params))
}

fn classify(v: &TFArray, params: &WfParams) -> WfEstimate {
    let n_bins = params.n_bins;
    let (inner, outer) = (params.inner_radius, params.r_max);
    let global = v.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = DECAY_FLOOR * global;
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_bins];
    for (x, xi, c) in v.points() {
        let r = x.hypot(xi);
        if r >= inner && r < outer {
            samples[nearest_bin(xi.atan2(x), n_bins)].push((r, c.norm()));
        }
    }
    let cell = v.lattice.cell_area();
    let bins = samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (angle, direction) = bin_center(k, n_bins);
            let below_floor = s.iter().all(|p| p.1 <= floor);
            let mut bin = WfBin { angle, direction, score: 0.0, exponent_hat: None, tail_exponent: None, in_wf: false };
            if below_floor || global == 0.0 {
                return bin;
            }
            match params.mode {
                WfMode::Smooth { r_threshold } => {
                    if let Ok(fit) = fit_decay_with_floor(s, Some((inner, outer)), Some(floor)) {
                        let first = fit.shells.first().map(|sh| sh.max).unwrap_or(0.0);
                        let last = fit.shells.last().map(|sh| sh.max).unwrap_or(0.0);
                        bin.score = if first > 0.0 { last / first } else { 0.0 };
                        bin.in_wf = !fit.floor_hit && fit.exponent_hat < r_threshold && fit.tail_exponent < r_threshold;
                        bin.exponent_hat = Some(fit.exponent_hat);
                        bin.tail_exponent = Some(fit.tail_exponent);
                    }
                }
                WfMode::Weighted { p, r, ratio_threshold } => {
                    let m_lo = inner.log2().floor() as i32;
                    let m_hi = (outer.log2().ceil() as i32) - 1;
                    let mut shells: Vec<ConeShell> = (m_lo..=m_hi)
                        .map(|m| ConeShell { m, count: 0, max: 0.0, r_at_max: 0.0, weighted: 0.0 })
                        .collect();
                    for &(rad, a) in s {
                        accumulate(&mut shells[(rad.log2().floor() as i32 - m_lo) as usize], rad, a, p, r, cell);
                    }
                    // Shells under the numerical floor count as fully decayed.
                    let first = shells.iter().position(|sh| sh.max > floor).unwrap_or(shells.len());
                    let mut ratios: Vec<f64> = Vec::new();
                    let mut dead = false;
                    for w in shells[first..].windows(2) {
                        dead |= w[1].max <= floor;
                        ratios.push(if dead || w[0].weighted == 0.0 { 0.0 } else { w[1].weighted / w[0].weighted });
                    }
                    ratios.sort_by(f64::total_cmp);
                    if !ratios.is_empty() {
                        let med = ratios[ratios.len() / 2];
                        bin.score = med;
                        bin.in_wf = med >= ratio_threshold;
                    }
                }
            }
            bin
        })
        .collect();
    WfEstimate { bins, mode: params.mode, inner_radius: inner, r_max: outer }
}

/// Query radius for pushing directions through a flow.
pub const R_HOM: f64 = 100.0;

/// Pushes every in-set direction `omega` to `chi(R omega) / |chi(R omega)|`
/// and re-bins.
pub fn map_wf(est: &WfEstimate, chi: &FlowMap) -> Result<WfEstimate> {
    let n = est.n_bins();
    let mut bins: Vec<WfBin> = (0..n)
        .map(|k| {
            let (angle, direction) = bin_center(k, n);
            WfBin { angle, direction, score: 0.0, exponent_hat: None, tail_exponent: None, in_wf: false }
        })
        .collect();
    for b in est.bins.iter().filter(|b| b.in_wf) {
        let w = chi.apply([R_HOM * b.direction[0], R_HOM * b.direction[1]])?;
        if !(w[0].hypot(w[1]) > 1e-12) {
            return Err(Error::SingularMap(b.direction[0], b.direction[1]));
        }
        let t = &mut bins[nearest_bin(w[1].atan2(w[0]), n)];
        t.in_wf = true;
        t.score = t.score.max(b.score);
        t.exponent_hat = b.exponent_hat;
        t.tail_exponent = b.tail_exponent;
    }
    Ok(WfEstimate { bins, mode: est.mode, inner_radius: est.inner_radius, r_max: est.r_max })
}

/// Symmetric Hausdorff distance between the in-set bin centers, in radians.
/// Two empty sets are at distance 0; an empty and a nonempty set at `pi`.
pub fn wf_distance(a: &WfEstimate, b: &WfEstimate) -> Result<f64> {
    if a.n_bins() != b.n_bins() {
        return Err(Error::BinMismatch(a.n_bins(), b.n_bins()));
    }
    let pa: Vec<f64> = a.bins.iter().filter(|x| x.in_wf).map(|x| x.angle).collect();
    let pb: Vec<f64> = b.bins.iter().filter(|x| x.in_wf).map(|x| x.angle).collect();
    match (pa.is_empty(), pb.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Ok(PI),
        _ => {}
    }
    let directed = |p: &[f64], q: &[f64]| {
        p.iter()
            .map(|&x| q.iter().map(|&y| circ_dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(&pa, &pb).max(directed(&pb, &pa)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_gaussian_window, make_test_signal, GridSpec, TestSignal};

    fn synthetic(n: usize, on: &[usize]) -> WfEstimate {
        let bins = (0..n)
            .map(|k| {
                let (angle, direction) = bin_center(k, n);
                WfBin { angle, direction, score: 1.0, exponent_hat: None, tail_exponent: None, in_wf: on.contains(&k) }
            })
            .collect();
        WfEstimate { bins, mode: WfMode::default(), inner_radius: 4.0, r_max: 64.0 }
    }

    #[test]
    fn distance_examples() {
        let a = synthetic(64, &[16, 48]);
        let b = synthetic(64, &[0, 32]);
        let w = 2.0 * PI / 64.0;
        assert_eq!(wf_distance(&a, &a).unwrap(), 0.0);
        assert!((wf_distance(&a, &synthetic(64, &[17, 49])).unwrap() - w).abs() < 1e-12);
        assert!((wf_distance(&a, &b).unwrap() - PI / 2.0).abs() <= w);
        assert_eq!(wf_distance(&a, &synthetic(64, &[])).unwrap(), PI);
        assert_eq!(wf_distance(&synthetic(64, &[]), &synthetic(64, &[])).unwrap(), 0.0);
        assert!(wf_distance(&a, &synthetic(32, &[8])).is_err());
    }

    #[test]
    fn arcs_wrap_around() {
        let a = synthetic(16, &[15, 0, 1, 7]);
        let mut arcs = a.arcs();
        arcs.sort();
        assert_eq!(arcs, vec![(7, 7), (15, 1)]);
        assert_eq!(synthetic(16, &(0..16).collect::<Vec<_>>()).arcs(), vec![(0, 15)]);
    }

    #[test]
    fn map_examples() {
        let a = synthetic(64, &[16, 48]);
        assert_eq!(map_wf(&a, &FlowMap::identity()).unwrap().in_wf_bins(), vec![16, 48]);
        let t = 0.5;
        let m = map_wf(&a, &FlowMap::free(t)).unwrap();
        let expect = (1.0f64).atan2(4.0 * PI * t);
        assert_eq!(m.in_wf_bins(), vec![nearest_bin(expect, 64), nearest_bin(expect + PI, 64)]);
        let h = map_wf(&synthetic(64, &[0, 32]), &FlowMap::harmonic(1.0)).unwrap();
        assert_eq!(h.in_wf_bins(), vec![nearest_bin(1.0, 64), nearest_bin(1.0 + PI, 64)]);
    }

    #[test]
    fn cone_profiles_of_delta() {
        let grid = GridSpec::new(4096, 64.0).unwrap();
        let d = make_test_signal(TestSignal::Delta { x0: 0.0 }, grid).unwrap();
        let g = make_gaussian_window(grid, false);
        let lat = TFLattice::centered_box(grid, 32.0, 32.0, 0.25, 0.25).unwrap();
        let v = stft(&d, &g, &lat).unwrap();
        let along = cone_shell_profile(&v, &Cone::new([0.0, 1.0], 0.1).unwrap(), f64::INFINITY, 0.0, 4.0, 32.0).unwrap();
        assert!(along.iter().all(|s| (s.max - 1.0).abs() < 1e-9));
        let across = cone_shell_profile(&v, &Cone::new([1.0, 0.0], 0.1).unwrap(), f64::INFINITY, 0.0, 4.0, 32.0).unwrap();
        assert!(across.iter().all(|s| s.max < 1e-12));
        let zero = stft(&SampledSignal::zeros(grid, "0"), &g, &lat).unwrap();
        let z = cone_shell_profile(&zero, &Cone::new([1.0, 1.0], 0.2).unwrap(), 2.0, 0.0, 4.0, 32.0).unwrap();
        assert!(z.iter().all(|s| s.max == 0.0 && s.weighted == 0.0));
        assert!(matches!(
            cone_shell_profile(&v, &Cone::new([1.0, std::f64::consts::FRAC_1_PI], 1e-6).unwrap(), 2.0, 0.0, 4.0, 32.0),
            Err(Error::EmptyConeShell { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(WfParams::default().validate().is_ok());
        assert!(WfParams { n_bins: 8, ..Default::default() }.validate().is_err());
        assert!(WfParams { r_max: 16.0, ..Default::default() }.validate().is_err());
        assert!(Cone::new([0.0, 0.0], 0.1).is_err());
        assert!(Cone::new([1.0, 0.0], 2.0).is_err());
    }
}
