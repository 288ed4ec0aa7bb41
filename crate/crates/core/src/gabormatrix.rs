//! Continuous Gabor matrices `k(t, w, z) = <U(t) pi(w) g, pi(z) g>` of
//! propagators and their off-diagonal decay around the graph of `chi_t`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowMap;
use crate::grid::{tf_shift, PhasePoint, SampledSignal, Window};
use crate::io::complex_to_le_bytes;
use crate::modspace::{fit_decay, DecayFit, ShellStat};
use crate::propagator::{reflect, Evolution};
use crate::stft::{stft, TFLattice};

/// Rows whose evolved vector carries more relative boundary mass than this
/// are flagged.
pub const ROW_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GaborMatrixSample {
    pub t: f64,
    pub w_points: Vec<[f64; 2]>,
    pub z_points: Vec<[f64; 2]>,
    /// Row-major: `values[i * z_points.len() + j] = k(t, w_i, z_j)`.
    pub values: Vec<Complex64>,
    pub window_label: String,
    /// Rows whose evolved vector reached the grid boundary.
    pub flagged_rows: Vec<usize>,
    pub cell_area: f64,
}

impl GaborMatrixSample {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.z_points.len() + j]
    }

    /// `(|z - chi_t(w)|, |k|)` over all entries of unflagged rows.
    pub fn displacement_samples(&self, chi: &FlowMap) -> Result<Vec<(f64, f64)>> {
        let nz = self.z_points.len();
        let mut out = Vec::with_capacity(self.values.len());
        for (i, w) in self.w_points.iter().enumerate() {
            if self.flagged_rows.contains(&i) {
                continue;
            }
            let c = chi.apply(*w)?;
            for (j, z) in self.z_points.iter().enumerate() {
                out.push(((z[0] - c[0]).hypot(z[1] - c[1]), self.values[i * nz + j].norm()));
            }
        }
        Ok(out)
    }

    /// Writes `<stem>.json` (shape, axes) and `<stem>.bin` (interleaved
    /// little-endian complex float64, row-major).
    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Header<'a> {
            t: f64,
            rows: usize,
            cols: usize,
            w_points: &'a [[f64; 2]],
            z_points: &'a [[f64; 2]],
            window: &'a str,
            flagged_rows: &'a [usize],
            data_file: String,
            layout: &'static str,
        }
        fs::create_dir_all(dir)?;
        let data_file = format!("{stem}.bin");
        fs::write(dir.join(&data_file), complex_to_le_bytes(&self.values))?;
        let h = Header {
            t: self.t,
            rows: self.w_points.len(),
            cols: self.z_points.len(),
            w_points: &self.w_points,
            z_points: &self.z_points,
            window: &self.window_label,
            flagged_rows: &self.flagged_rows,
            data_file,
            layout: "row-major complex128 little-endian (re, im)",
        };
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, serde_json::to_string_pretty(&h)?)?;
        Ok(path)
    }
}

/// Samples `k(t, w, z)` for every `t` in `times` (increasing), evolving each
/// `pi(w) g` incrementally from one time to the next.
pub fn sample_gabor_matrix_times(
    u: &dyn Evolution,
    g: &Window,
    w_points: &[[f64; 2]],
    z_lat: &TFLattice,
    times: &[f64],
) -> Result<Vec<GaborMatrixSample>> {
    if times.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidParameter("sample times must be nondecreasing".into()));
    }
    let z_points: Vec<[f64; 2]> = z_lat
        .x_points()
        .iter()
        .flat_map(|&x| z_lat.xi_points().into_iter().map(move |k| [x, k]))
        .collect();
    // With an even evolution and an even window, U pi(-w) g = P U pi(w) g
    // holds exactly on the grid, so mirrored rows reuse one trajectory.
    let grid = g.grid();
    let even = u.parity_even(grid) && g.signal.values == reflect(&g.signal).values;
    let mut sources: Vec<usize> = (0..w_points.len()).collect();
    if even {
        for i in 0..w_points.len() {
            let m = [-w_points[i][0], -w_points[i][1]];
            if let Some(j) = w_points[..i].iter().position(|p| *p == m) {
                sources[i] = sources[j];
            }
        }
    }
    let primary: Vec<usize> = (0..w_points.len()).filter(|&i| sources[i] == i).collect();
    let trajectories: Vec<Vec<SampledSignal>> = primary
        .par_iter()
        .map(|&i| {
            let w = w_points[i];
            let start = tf_shift(&g.signal, &PhasePoint::d1(w[0], w[1]))?;
            u.evolve_snapshots(&start, times)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<(Vec<Complex64>, bool)>> = (0..w_points.len())
        .into_par_iter()
        .map(|i| {
            let traj = &trajectories[primary.binary_search(&sources[i]).expect("primary row")];
            traj.iter()
                .map(|v| {
                    let v = if sources[i] == i { v.clone() } else { reflect(v) };
                    let flagged = v.boundary_mass() > ROW_BOUNDARY_TOL;
                    Ok((stft(&v, g, z_lat)?.values, flagged))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let cell = z_lat.cell_area();
    Ok(times
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let mut values = Vec::with_capacity(w_points.len() * z_points.len());
            let mut flagged_rows = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                values.extend_from_slice(&r[ti].0);
                if r[ti].1 {
                    flagged_rows.push(i);
                }
            }
            GaborMatrixSample {
                t,
                w_points: w_points.to_vec(),
                z_points: z_points.clone(),
                values,
                window_label: g.label().to_owned(),
                flagged_rows,
                cell_area: cell,
            }
        })
        .collect())
}

pub fn sample_gabor_matrix(u: &dyn Evolution, g: &Window, w_points: &[[f64; 2]], z_lat: &TFLattice, t: f64) -> Result<GaborMatrixSample> {
    Ok(sample_gabor_matrix_times(u, g, w_points, z_lat, &[t])?.remove(0))
}

/// Power-law envelope `C <z - chi_t(w)>^-s` fitted on dyadic displacement shells.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub s_hat: f64,
    pub c_hat: f64,
    pub violations: usize,
    pub super_polynomial: bool,
    pub flow: String,
    pub shells: Vec<ShellStat>,
}

/// Smallest displacement shell used by the envelope fit (`2^-1`).
pub const ENVELOPE_MIN_DISPLACEMENT: f64 = 0.5;

pub fn fit_envelope(sample: &GaborMatrixSample, chi: &FlowMap) -> Result<EnvelopeFit> {
    let s = sample.displacement_samples(chi)?;
    let fit: DecayFit = fit_decay(&s, Some((ENVELOPE_MIN_DISPLACEMENT, f64::INFINITY)))?;
    Ok(EnvelopeFit {
        s_hat: fit.exponent_hat,
        c_hat: fit.constant_hat,
        violations: fit.violations(&s),
        super_polynomial: fit.super_polynomial,
        flow: chi.label(),
        shells: fit.shells,
    })
}

/// Gaussian envelope `C exp(-eps d^2)` in the displacement `d = |z - chi_t(w)|`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub c_hat: f64,
    pub eps_hat: f64,
}

/// Least-squares fit of `log max|k|` against `d^2` on displacement bins of
/// width `0.25`, restricted to bins above `1e-11` of the peak. The constant
/// is then raised until every sample lies under the envelope.
pub fn fit_gaussian_envelope(sample: &GaborMatrixSample, chi: &FlowMap) -> Result<GaussianEnvelope> {
    let s = sample.displacement_samples(chi)?;
    let peak = s.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::UndefinedFit);
    }
    let width = 0.25;
    let nb = (s.iter().map(|p| p.0).fold(0.0, f64::max) / width) as usize + 1;
    let mut maxima = vec![0.0f64; nb];
    for &(d, v) in &s {
        let b = (d / width) as usize;
        maxima[b] = maxima[b].max(v);
    }
    let pts: Vec<(f64, f64)> = maxima
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 1e-11 * peak)
        .map(|(b, &m)| (((b as f64 + 0.5) * width).powi(2), m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientShells { populated: pts.len(), required: 3 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let eps_hat = -sxy / sxx;
    let c_hat = s.iter().map(|&(d, v)| v * (eps_hat * d * d).exp()).fold(0.0, f64::max);
    Ok(GaussianEnvelope { c_hat, eps_hat })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub s_true: f64,
    pub s_wrong: f64,
    pub falsified: bool,
    pub true_flow: String,
    pub wrong_flow: String,
}

/// Negative control: the envelope fitted against a wrong flow must be at
/// least one order weaker than against the true one.
pub fn wrongflow_falsification(sample: &GaborMatrixSample, chi_true: &FlowMap, chi_wrong: &FlowMap) -> Result<FalsificationReport> {
    let a = fit_envelope(sample, chi_true)?;
    let b = fit_envelope(sample, chi_wrong)?;
    Ok(FalsificationReport {
        s_true: a.s_hat,
        s_wrong: b.s_hat,
        falsified: b.s_hat < a.s_hat - 1.0,
        true_flow: a.flow,
        wrong_flow: b.flow,
    })
}

/// `max | |k_U(w_i, z_j)| - |k_{U^-1}(z_j, w_i)| |` for two samples taken on
/// the same point set in both roles.
pub fn symmetry_defect(forward: &GaborMatrixSample, backward: &GaborMatrixSample) -> Result<f64> {
    if forward.w_points != backward.z_points || forward.z_points != backward.w_points {
        return Err(Error::InvalidParameter("symmetry check needs swapped point sets".into()));
    }
    let mut d = 0.0f64;
    for i in 0..forward.w_points.len() {
        for j in 0..forward.z_points.len() {
            d = d.max((forward.get(i, j).norm() - backward.get(j, i).norm()).abs());
        }
    }
    Ok(d)
}

/// `sum_z |k(w, z)|^2` times the cell area, per row.
pub fn row_masses(sample: &GaborMatrixSample) -> Vec<f64> {
    let nz = sample.z_points.len();
    (0..sample.w_points.len())
        .map(|i| sample.values[i * nz..(i + 1) * nz].iter().map(|v| v.norm_sqr()).sum::<f64>() * sample.cell_area)
        .collect()
}

/// Lattice product `sum_y k_2(w, y) k_1(y, z) cell / ||g||^2`, the discrete
/// counterpart of the matrix of `U_1 U_2`; `first` maps `w -> y`, `second`
/// maps `y -> z`.
pub fn compose(first: &GaborMatrixSample, second: &GaborMatrixSample, g_norm_sq: f64) -> Result<Vec<Complex64>> {
    if first.z_points != second.w_points {
        return Err(Error::InvalidParameter("inner lattices of the composed samples differ".into()));
    }
    let (nw, ny, nz) = (first.w_points.len(), first.z_points.len(), second.z_points.len());
    let scale = first.cell_area / g_norm_sq;
    let mut out = vec![Complex64::new(0.0, 0.0); nw * nz];
    for i in 0..nw {
        let row = &mut out[i * nz..(i + 1) * nz];
        for y in 0..ny {
            let a = first.values[i * ny + y] * scale;
            if a.norm() == 0.0 {
                continue;
            }
            for (o, b) in row.iter_mut().zip(&second.values[y * nz..(y + 1) * nz]) {
                *o += a * b;
            }
        }
    }
    Ok(out)
}

/// Lattice points of step `h` inside the closed disc of the given radius.
pub fn disc_points(radius: f64, step: f64) -> Vec<[f64; 2]> {
    square_points(radius, step)
        .into_iter()
        .filter(|p| p[0].hypot(p[1]) <= radius + 1e-9)
        .collect()
}

/// Square lattice points `{(a, b) : a, b in -radius..=radius step h}`.
pub fn square_points(radius: f64, step: f64) -> Vec<[f64; 2]> {
    let m = (radius / step + 1e-9).floor() as i64;
    let mut out = Vec::with_capacity(((2 * m + 1) * (2 * m + 1)) as usize);
    for a in -m..=m {
        for b in -m..=m {
            out.push([a as f64 * step, b as f64 * step]);
        }
    }
    out
}

/// Shell profile of an envelope fit as CSV (`m,count,max,r_at_max`).
pub fn envelope_csv(fit: &EnvelopeFit) -> String {
    let mut out = String::from("m,count,max,r_at_max\n");
    for s in &fit.shells {
        out.push_str(&format!("{},{},{:.12e},{:.12e}\n", s.m, s.count, s.max, s.r_at_max));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_gaussian_window, GridSpec};
    use crate::propagator::FreeEvolution;

    fn synthetic(f: impl Fn(f64) -> f64) -> GaborMatrixSample {
        let w_points = vec![[0.0, 0.0]];
        let z_points: Vec<[f64; 2]> = (0..4000).map(|i| [i as f64 * 0.01, 0.0]).collect();
        let values = z_points.iter().map(|z| Complex64::new(f(z[0]), 0.0)).collect();
        GaborMatrixSample { t: 0.0, w_points, z_points, values, window_label: "g".into(), flagged_rows: vec![], cell_area: 1.0 }
    }

    #[test]
    fn synthetic_envelope() {
        let s = synthetic(|d| (1.0 + d * d).powf(-2.0));
        let fit = fit_envelope(&s, &FlowMap::identity()).unwrap();
        assert!((fit.s_hat - 4.0).abs() < 0.1, "{fit:?}");
        assert_eq!(fit.violations, 0);
        let r = wrongflow_falsification(&s, &FlowMap::identity(), &FlowMap::identity()).unwrap();
        assert!(!r.falsified);
    }

    #[test]
    fn identity_reproduces_diagonal() {
        let grid = GridSpec::new(256, 16.0).unwrap();
        let g = make_gaussian_window(grid, true);
        let w = vec![[0.0, 0.0], [1.0, -0.5], [-2.0, 1.5]];
        let lat = TFLattice::from_points(grid, &[-2.0, 0.0, 1.0], &[-0.5, 0.0, 1.5]).unwrap();
        let k = sample_gabor_matrix(&FreeEvolution, &g, &w, &lat, 0.0).unwrap();
        for (i, wi) in w.iter().enumerate() {
            let j = k.z_points.iter().position(|z| z == wi).unwrap();
            assert!((k.get(i, j).norm() - 1.0).abs() < 1e-10);
        }
        assert!(k.flagged_rows.is_empty());
    }

    #[test]
    fn free_particle_gaussian_envelope() {
        let grid = GridSpec::new(512, 32.0).unwrap();
        let g = make_gaussian_window(grid, false);
        let w = square_points(2.0, 1.0);
        let lat = TFLattice::centered_box(grid, 6.0, 3.0, 0.5, 0.5).unwrap();
        let t = 0.1;
        let k = sample_gabor_matrix(&FreeEvolution, &g, &w, &lat, t).unwrap();
        let env = fit_gaussian_envelope(&k, &FlowMap::free(t)).unwrap();
        assert!(env.eps_hat > 0.0 && env.c_hat.is_finite(), "{env:?}");
        let wrong = wrongflow_falsification(&k, &FlowMap::free(t), &FlowMap::harmonic(t)).unwrap();
        assert!(wrong.s_true > wrong.s_wrong);
    }
}
