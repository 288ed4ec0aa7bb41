//! JSON headers with raw little-endian float64 sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledSignal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalHeader {
    pub n_points: usize,
    pub extent: f64,
    pub label: String,
    pub data_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

pub fn complex_to_le_bytes(values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn complex_from_le_bytes(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::InvalidSignal(format!("sidecar length {} is not a multiple of 16", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

pub fn real_to_le_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Write `<stem>.json` and `<stem>.bin` into `dir`; returns the header path.
pub fn write_signal(signal: &SampledSignal, dir: &Path, stem: &str, t: Option<f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let data_file = format!("{stem}.bin");
    fs::write(dir.join(&data_file), complex_to_le_bytes(&signal.values))?;
    let header = SignalHeader {
        n_points: signal.grid.n_points(),
        extent: signal.grid.extent(),
        label: signal.label.clone(),
        data_file,
        t,
    };
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&header)?)?;
    Ok(path)
}

pub fn read_signal(header_path: &Path) -> Result<(SampledSignal, Option<f64>)> {
    let header: SignalHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    let dir = header_path.parent().unwrap_or_else(|| Path::new("."));
    let values = complex_from_le_bytes(&fs::read(dir.join(&header.data_file))?)?;
    let grid = GridSpec::new(header.n_points, header.extent)?;
    Ok((SampledSignal::new(grid, values, header.label)?, header.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_test_signal, TestSignal};

    #[test]
    fn signal_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(64, 8.0).unwrap();
        let s = make_test_signal(TestSignal::Chirp { c: 1.5 }, grid).unwrap();
        let p = write_signal(&s, dir.path(), "u", Some(0.5)).unwrap();
        let (back, t) = read_signal(&p).unwrap();
        assert_eq!(back, s);
        assert_eq!(t, Some(0.5));
        let bytes = fs::read(dir.path().join("u.bin")).unwrap();
        assert_eq!(bytes.len(), 64 * 16);
        assert_eq!(&bytes[..8], &1.0f64.to_le_bytes());
    }
}
