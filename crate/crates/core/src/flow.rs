//! Hamiltonian flows `chi_t` on the phase plane.
//!
//! The vector field is `2 pi x' = -d_xi a`, `2 pi xi' = d_x a`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{smooth_step, smooth_step_deriv, PhasePoint};

pub type Z = [f64; 2];

/// Real symbol `a(x, xi)`, homogeneous of degree 2 outside `cutoff_radius`.
#[derive(Clone)]
pub struct HamiltonianSpec {
    pub label: String,
    pub eval: Arc<dyn Fn(Z) -> f64 + Send + Sync>,
    pub grad: Arc<dyn Fn(Z) -> Z + Send + Sync>,
    pub homogeneity_degree: f64,
    pub cutoff_radius: f64,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("label", &self.label)
            .field("cutoff_radius", &self.cutoff_radius)
            .finish()
    }
}

impl HamiltonianSpec {
    /// `pi (x^2 + xi^2)`.
    pub fn harmonic() -> Self {
        Self {
            label: "harmonic".into(),
            eval: Arc::new(|z| PI * (z[0] * z[0] + z[1] * z[1])),
            grad: Arc::new(|z| [2.0 * PI * z[0], 2.0 * PI * z[1]]),
            homogeneity_degree: 2.0,
            cutoff_radius: 0.0,
        }
    }

    /// `-4 pi^2 xi^2`.
    pub fn free() -> Self {
        Self {
            label: "free".into(),
            eval: Arc::new(|z| -4.0 * PI * PI * z[1] * z[1]),
            grad: Arc::new(|z| [0.0, -8.0 * PI * PI * z[1]]),
            homogeneity_degree: 2.0,
            cutoff_radius: 0.0,
        }
    }

    /// `(1 - phi(|z|)) (x^4 + xi^4)^(1/2)` with the bump `phi` equal to 1 on
    /// the unit disc and 0 outside radius 2.
    pub fn quartic_root_smoothed() -> Self {
        let cut = |r: f64| smooth_step(r - 1.0);
        Self {
            label: "quartic_root".into(),
            eval: Arc::new(move |z| {
                let r = z[0].hypot(z[1]);
                cut(r) * (z[0].powi(4) + z[1].powi(4)).sqrt()
            }),
            grad: Arc::new(|z| {
                let r = z[0].hypot(z[1]);
                let h = (z[0].powi(4) + z[1].powi(4)).sqrt();
                if r <= 1.0 || h == 0.0 {
                    return [0.0, 0.0];
                }
                let c = smooth_step(r - 1.0);
                let dc = smooth_step_deriv(r - 1.0);
                [
                    dc * z[0] / r * h + c * 2.0 * z[0].powi(3) / h,
                    dc * z[1] / r * h + c * 2.0 * z[1].powi(3) / h,
                ]
            }),
            homogeneity_degree: 2.0,
            cutoff_radius: 2.0,
        }
    }

    pub fn field(&self, z: Z) -> Z {
        let g = (self.grad)(z);
        [-g[1] / (2.0 * PI), g[0] / (2.0 * PI)]
    }

    /// Checks homogeneity on sampled rays and the gradient against central
    /// differences; returns the largest relative deviations `(homog, grad)`.
    pub fn validate(&self, n_rays: usize) -> (f64, f64) {
        let r0 = self.cutoff_radius.max(1.0);
        let mut homog = 0.0f64;
        let mut grad = 0.0f64;
        for i in 0..n_rays {
            let th = 2.0 * PI * (i as f64 + 0.37) / n_rays as f64;
            let z = [r0 * th.cos(), r0 * th.sin()];
            let a = (self.eval)(z);
            for lam in [1.0, 1.5, 2.0, 3.0, 4.0] {
                let al = (self.eval)([lam * z[0], lam * z[1]]);
                let scale = lam.powf(self.homogeneity_degree);
                homog = homog.max((al - scale * a).abs() / (scale * a.abs()).max(f64::MIN_POSITIVE));
            }
            let zz = [2.0 * z[0], 2.0 * z[1]];
            let g = (self.grad)(zz);
            let h = 1e-5 * r0;
            let fd = [
                ((self.eval)([zz[0] + h, zz[1]]) - (self.eval)([zz[0] - h, zz[1]])) / (2.0 * h),
                ((self.eval)([zz[0], zz[1] + h]) - (self.eval)([zz[0], zz[1] - h])) / (2.0 * h),
            ];
            let gn = g[0].hypot(g[1]).max(1e-300);
            grad = grad.max((g[0] - fd[0]).hypot(g[1] - fd[1]) / gn);
        }
        (homog, grad)
    }
}

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub enum FlowKind {
    Identity,
    ClosedFormFree,
    ClosedFormHo,
    Numeric { spec: HamiltonianSpec, step: f64 },
}

#[derive(Clone, Debug)]
pub struct FlowMap {
    pub kind: FlowKind,
    pub t: f64,
}

impl FlowMap {
    pub fn free(t: f64) -> Self {
        Self { kind: FlowKind::ClosedFormFree, t }
    }

    pub fn harmonic(t: f64) -> Self {
        Self { kind: FlowKind::ClosedFormHo, t }
    }

    pub fn identity() -> Self {
        Self { kind: FlowKind::Identity, t: 0.0 }
    }

    pub fn numeric(spec: HamiltonianSpec, t: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1e-2) {
            return Err(Error::InvalidParameter(format!("RK4 step must lie in (0, 1e-2], got {step}")));
        }
        Ok(Self { kind: FlowKind::Numeric { spec, step }, t })
    }

    /// Same kind at a different time.
    pub fn at(&self, t: f64) -> Self {
        Self { kind: self.kind.clone(), t }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            FlowKind::Identity => "identity".into(),
            FlowKind::ClosedFormFree => "free".into(),
            FlowKind::ClosedFormHo => "harmonic".into(),
            FlowKind::Numeric { spec, .. } => format!("numeric:{}", spec.label),
        }
    }

    pub fn apply(&self, w: Z) -> Result<Z> {
        let t = self.t;
        match &self.kind {
            FlowKind::Identity => Ok(w),
            FlowKind::ClosedFormFree => Ok([w[0] + 4.0 * PI * t * w[1], w[1]]),
            FlowKind::ClosedFormHo => {
                let (s, c) = t.sin_cos();
                Ok([c * w[0] - s * w[1], s * w[0] + c * w[1]])
            }
            FlowKind::Numeric { spec, step } => rk4(spec, w, t, *step),
        }
    }

    pub fn jacobian(&self, w: Z) -> Result<[[f64; 2]; 2]> {
        let t = self.t;
        match &self.kind {
            FlowKind::Identity => Ok([[1.0, 0.0], [0.0, 1.0]]),
            FlowKind::ClosedFormFree => Ok([[1.0, 4.0 * PI * t], [0.0, 1.0]]),
            FlowKind::ClosedFormHo => {
                let (s, c) = t.sin_cos();
                Ok([[c, -s], [s, c]])
            }
            FlowKind::Numeric { .. } => {
                // Fourth-order central differences.
                let h = 1e-3 * w[0].hypot(w[1]).max(1.0);
                let mut j = [[0.0; 2]; 2];
                for col in 0..2 {
                    let at = |s: f64| {
                        let mut v = w;
                        v[col] += s * h;
                        self.apply(v)
                    };
                    let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
                    for row in 0..2 {
                        j[row][col] = (8.0 * (p1[row] - m1[row]) - (p2[row] - m2[row])) / (12.0 * h);
                    }
                }
                Ok(j)
            }
        }
    }
}

fn rk4(spec: &HamiltonianSpec, w: Z, t: f64, step: f64) -> Result<Z> {
    if t == 0.0 {
        return Ok(w);
    }
    let n = (t.abs() / step).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let mut z = w;
    let add = |a: Z, b: Z, s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    for _ in 0..n {
        let k1 = spec.field(z);
        let k2 = spec.field(add(z, k1, h / 2.0));
        let k3 = spec.field(add(z, k2, h / 2.0));
        let k4 = spec.field(add(z, k3, h));
        for i in 0..2 {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !(z[0].is_finite() && z[1].is_finite()) {
            return Err(Error::FlowBlowup(t));
        }
    }
    Ok(z)
}

/// `chi_t(w)` for a 1-D phase point.
pub fn flow_apply(chi: &FlowMap, w: &PhasePoint) -> Result<PhasePoint> {
    let z = chi.apply(as_z(w)?)?;
    Ok(PhasePoint::d1(z[0], z[1]))
}

pub fn flow_jacobian(chi: &FlowMap, w: &PhasePoint) -> Result<[[f64; 2]; 2]> {
    chi.jacobian(as_z(w)?)
}

fn as_z(w: &PhasePoint) -> Result<Z> {
    if w.dim() != 1 {
        return Err(Error::Unsupported(format!("flows are implemented for d = 1, got d = {}", w.dim())));
    }
    Ok([w.x[0], w.xi[0]])
}

/// `|J^T Omega J - Omega|` for a 2x2 Jacobian; in one dimension this is
/// `|det J - 1|`.
pub fn symplectic_defect(j: &[[f64; 2]; 2]) -> f64 {
    (j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs()
}

/// `max |chi_t(chi_t'(w)) - chi_{t+t'}(w)| / (1 + |w|)`.
pub fn group_law_check(base: &FlowMap, t: f64, t2: f64, points: &[Z]) -> Result<f64> {
    if t.abs() > 5.0 || t2.abs() > 5.0 {
        return Err(Error::InvalidParameter("group law times must satisfy |t| <= 5".into()));
    }
    let a = base.at(t);
    let b = base.at(t2);
    let ab = base.at(t + t2);
    let mut dev = 0.0f64;
    for &w in points {
        let lhs = a.apply(b.apply(w)?)?;
        let rhs = ab.apply(w)?;
        dev = dev.max((lhs[0] - rhs[0]).hypot(lhs[1] - rhs[1]) / (1.0 + w[0].hypot(w[1])));
    }
    Ok(dev)
}

/// Max relative deviation of `chi_t(lambda w) / lambda` from `chi_t(w)`,
/// `lambda` in {2, 4}, for `w` on the given radii and directions.
pub fn homogeneity_check(chi: &FlowMap, radii: &[f64], directions: &[f64]) -> Result<f64> {
    let mut dev = 0.0f64;
    for &r in radii {
        for &th in directions {
            let w = [r * th.cos(), r * th.sin()];
            let base = chi.apply(w)?;
            let bn = base[0].hypot(base[1]).max(f64::MIN_POSITIVE);
            for lam in [2.0, 4.0] {
                let s = chi.apply([lam * w[0], lam * w[1]])?;
                dev = dev.max((s[0] / lam - base[0]).hypot(s[1] / lam - base[1]) / bn);
            }
        }
    }
    Ok(dev)
}

/// Trajectory samples as CSV rows `t,y,eta,x,xi`.
pub fn traces_csv(chi: &FlowMap, points: &[Z], n_times: usize) -> Result<String> {
    let mut out = String::from("t,y,eta,x,xi\n");
    for &w in points {
        for i in 0..=n_times {
            let t = chi.t * i as f64 / n_times.max(1) as f64;
            let z = chi.at(t).apply(w)?;
            out.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n", t, w[0], w[1], z[0], z[1]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize, r: f64) -> Vec<Z> {
        (0..n).map(|i| {
            let th = 0.1 + 2.0 * PI * i as f64 / n as f64;
            [r * th.cos(), r * th.sin()]
        }).collect()
    }

    #[test]
    fn closed_forms() {
        let q = FlowMap::harmonic(PI / 2.0).apply([1.0, 0.0]).unwrap();
        assert!(q[0].abs() < 1e-15 && (q[1] - 1.0).abs() < 1e-15);
        assert_eq!(FlowMap::free(0.0).apply([3.0, -2.0]).unwrap(), [3.0, -2.0]);
        let j = FlowMap::free(0.5).jacobian([1.0, 1.0]).unwrap();
        assert_eq!(j, [[1.0, 2.0 * PI], [0.0, 1.0]]);
    }

    #[test]
    fn numeric_harmonic_matches_rotation() {
        let num = FlowMap::numeric(HamiltonianSpec::harmonic(), 1.0, DEFAULT_STEP).unwrap();
        let exact = FlowMap::harmonic(1.0);
        let mut dev = 0.0f64;
        for r in [0.5, 3.0, 10.0] {
            for w in ring(24, r) {
                let a = num.apply(w).unwrap();
                let b = exact.apply(w).unwrap();
                dev = dev.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        assert!(dev <= 1e-8, "{dev}");
        let nf = FlowMap::numeric(HamiltonianSpec::free(), 1.0, DEFAULT_STEP).unwrap();
        let a = nf.apply([1.0, 2.0]).unwrap();
        assert!((a[0] - (1.0 + 8.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn group_law_and_inverse() {
        let pts = ring(16, 3.0);
        let ho = FlowMap::numeric(HamiltonianSpec::harmonic(), 0.0, DEFAULT_STEP).unwrap();
        assert!(group_law_check(&ho, 0.7, 0.7, &pts).unwrap() <= 1e-7);
        assert!(group_law_check(&ho, 0.7, 0.0, &pts).unwrap() <= 1e-12);
        let fr = FlowMap::numeric(HamiltonianSpec::free(), 0.0, DEFAULT_STEP).unwrap();
        assert!(group_law_check(&fr, 1.0, 2.0, &pts).unwrap() <= 1e-10);
        assert!(group_law_check(&fr, 6.0, 0.0, &pts).is_err());
        let q = FlowMap::numeric(HamiltonianSpec::quartic_root_smoothed(), 0.8, DEFAULT_STEP).unwrap();
        for w in ring(10, 5.0) {
            let back = q.at(-0.8).apply(q.apply(w).unwrap()).unwrap();
            assert!((back[0] - w[0]).hypot(back[1] - w[1]) <= 1e-7 * 5.0);
        }
    }

    #[test]
    fn symplectic_and_energy() {
        for spec in [HamiltonianSpec::harmonic(), HamiltonianSpec::quartic_root_smoothed()] {
            let chi = FlowMap::numeric(spec.clone(), 0.6, DEFAULT_STEP).unwrap();
            for w in ring(20, 4.0) {
                let j = chi.jacobian(w).unwrap();
                assert!(symplectic_defect(&j) <= 1e-6, "{}", spec.label);
                let a0 = (spec.eval)(w);
                let a1 = (spec.eval)(chi.apply(w).unwrap());
                assert!((a1 - a0).abs() <= 1e-6 * (1.0 + a0.abs()));
            }
        }
    }

    #[test]
    fn homogeneity() {
        let dirs: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        assert!(homogeneity_check(&FlowMap::harmonic(1.3), &[8.0], &dirs).unwrap() < 1e-14);
        let ho = FlowMap::numeric(HamiltonianSpec::harmonic(), 1.0, DEFAULT_STEP).unwrap();
        assert!(homogeneity_check(&ho, &[8.0], &dirs).unwrap() <= 1e-7);
        let q = FlowMap::numeric(HamiltonianSpec::quartic_root_smoothed(), 1.0, DEFAULT_STEP).unwrap();
        assert!(homogeneity_check(&q, &[40.0], &dirs).unwrap() <= 1e-3);
    }

    #[test]
    fn spec_validation() {
        for spec in [HamiltonianSpec::harmonic(), HamiltonianSpec::free(), HamiltonianSpec::quartic_root_smoothed()] {
            let (h, g) = spec.validate(32);
            assert!(h <= 1e-8 && g <= 1e-5, "{} {h} {g}", spec.label);
        }
        assert!(FlowMap::numeric(HamiltonianSpec::harmonic(), 1.0, 0.1).is_err());
    }

    #[test]
    fn trace_rows() {
        let csv = traces_csv(&FlowMap::harmonic(1.0), &[[1.0, 0.0]], 4).unwrap();
        assert_eq!(csv.lines().count(), 6);
    }
}
