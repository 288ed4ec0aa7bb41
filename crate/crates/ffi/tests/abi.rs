use std::ffi::CStr;
use std::ptr;

use gaborwf_ffi::*;

const N: usize = 256;
const L: f64 = 16.0;

fn gaussian_signal() -> *mut GwfSignal {
    let dx = L / N as f64;
    let re: Vec<f64> = (0..N).map(|j| {
        let x = -L / 2.0 + j as f64 * dx;
        2f64.powf(0.25) * (-std::f64::consts::PI * x * x).exp()
    }).collect();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gwf_signal_new(N, L, re.as_ptr(), ptr::null(), &mut s) }, GwfStatus::Ok);
    s
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gwf_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn signal_roundtrip_and_norm() {
    let s = gaussian_signal();
    assert_eq!(unsafe { gwf_signal_len(s) }, N);
    let mut norm = 0.0;
    assert_eq!(unsafe { gwf_signal_norm(s, &mut norm) }, GwfStatus::Ok);
    assert!((norm - 1.0).abs() < 1e-12, "norm {norm}");
    let (mut re, mut im) = (vec![0.0; N], vec![0.0; N]);
    assert_eq!(unsafe { gwf_signal_values(s, re.as_mut_ptr(), im.as_mut_ptr(), N) }, GwfStatus::Ok);
    assert!(im.iter().all(|v| *v == 0.0));
    assert_eq!(
        unsafe { gwf_signal_values(s, re.as_mut_ptr(), im.as_mut_ptr(), N - 1) },
        GwfStatus::InvalidArgument
    );
    unsafe { gwf_signal_free(s) };
}

#[test]
fn invalid_grid_reports_message() {
    let re = vec![0.0; 100];
    let mut s = ptr::null_mut();
    let st = unsafe { gwf_signal_new(100, L, re.as_ptr(), ptr::null(), &mut s) };
    assert_eq!(st, GwfStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("grid"), "{}", last_error());
}

#[test]
fn null_arguments() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gwf_signal_new(N, L, ptr::null(), ptr::null(), &mut s) }, GwfStatus::NullPointer);
    assert_eq!(unsafe { gwf_signal_norm(ptr::null(), ptr::null_mut()) }, GwfStatus::NullPointer);
    assert_eq!(unsafe { gwf_signal_len(ptr::null()) }, 0);
    unsafe {
        gwf_signal_free(ptr::null_mut());
        gwf_window_free(ptr::null_mut());
        gwf_stft_free(ptr::null_mut());
        gwf_wavefront_free(ptr::null_mut());
    }
}

#[test]
fn stft_and_evolution() {
    let s = gaussian_signal();
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { gwf_window_new(N, L, 0, &mut w) }, GwfStatus::Ok);
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { gwf_stft_new(s, w, &mut a) }, GwfStatus::Ok);
    let (mut nx, mut nk) = (0, 0);
    assert_eq!(unsafe { gwf_stft_shape(a, &mut nx, &mut nk) }, GwfStatus::Ok);
    assert_eq!((nx, nk), (N, N));
    let mut buf = vec![0.0; nx * nk];
    assert_eq!(unsafe { gwf_stft_abs(a, buf.as_mut_ptr(), buf.len()) }, GwfStatus::Ok);
    // |V_g g|(0, 0) = <g, g> = 1 at the lattice origin.
    let peak = buf.iter().cloned().fold(0.0, f64::max);
    assert!((peak - 1.0).abs() < 1e-9, "peak {peak}");

    // The ground state only picks up a phase under the oscillator.
    let mut u = ptr::null_mut();
    assert_eq!(unsafe { gwf_evolve_harmonic(s, 1.0, 2000.0, &mut u) }, GwfStatus::Ok);
    let mut norm = 0.0;
    assert_eq!(unsafe { gwf_signal_norm(u, &mut norm) }, GwfStatus::Ok);
    assert!((norm - 1.0).abs() < 1e-10);
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { gwf_evolve_free(s, 0.5, &mut f) }, GwfStatus::Ok);

    unsafe {
        gwf_signal_free(f);
        gwf_signal_free(u);
        gwf_stft_free(a);
        gwf_window_free(w);
        gwf_signal_free(s);
    }
}

#[test]
fn wavefront_of_delta_is_vertical() {
    let n = 65536;
    let ext = 256.0;
    let mut re = vec![0.0; n];
    re[n / 2] = n as f64 / ext;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gwf_signal_new(n, ext, re.as_ptr(), ptr::null(), &mut s) }, GwfStatus::Ok);
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { gwf_window_new(n, ext, 0, &mut w) }, GwfStatus::Ok);
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { gwf_wavefront_new(s, w, &mut e) }, GwfStatus::Ok, "{}", last_error());
    let nb = unsafe { gwf_wavefront_n_bins(e) };
    assert!(nb >= 16);
    let mut hits = Vec::new();
    for b in 0..nb {
        let (mut ang, mut inwf) = (0.0, 0);
        assert_eq!(unsafe { gwf_wavefront_bin(e, b, &mut ang, &mut inwf) }, GwfStatus::Ok);
        if inwf != 0 {
            hits.push(ang);
        }
    }
    assert!(!hits.is_empty());
    // Only directions (0, +-1) in the (x, xi) plane.
    assert!(hits.iter().all(|a| a.cos().abs() < 0.2), "{hits:?}");
    let (mut ang, mut inwf) = (0.0, 0);
    assert_eq!(unsafe { gwf_wavefront_bin(e, nb, &mut ang, &mut inwf) }, GwfStatus::InvalidArgument);
    unsafe {
        gwf_wavefront_free(e);
        gwf_window_free(w);
        gwf_signal_free(s);
    }
}

#[test]
fn harmonic_flow_is_rotation() {
    let (mut x, mut xi) = (1.0, 0.0);
    assert_eq!(unsafe { gwf_flow_harmonic(0.25, &mut x, &mut xi) }, GwfStatus::Ok);
    assert!((x.hypot(xi) - 1.0).abs() < 1e-12);
    let (mut x, mut xi) = (0.3, -0.7);
    assert_eq!(unsafe { gwf_flow_harmonic(0.0, &mut x, &mut xi) }, GwfStatus::Ok);
    assert!((x - 0.3).abs() < 1e-15 && (xi + 0.7).abs() < 1e-15);
    assert_eq!(unsafe { gwf_flow_harmonic(1.0, ptr::null_mut(), &mut xi) }, GwfStatus::NullPointer);
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gaborwf.h")).unwrap();
    for sym in ["gwf_signal_new", "gwf_stft_new", "gwf_wavefront_new", "gwf_last_error", "GWF_STATUS_OK", "typedef struct GwfSignal"] {
        assert!(h.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"gaborwf.h\"\n\
         int main(void) {\n\
           GwfSignal *s = NULL;\n\
           double re[8] = {0};\n\
           GwfStatus st = gwf_signal_new(8, 1.0, re, NULL, &s);\n\
           gwf_signal_free(s);\n\
           return st == GWF_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = match std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found; skipping");
            return;
        }
    };
    assert!(status.success());
}
