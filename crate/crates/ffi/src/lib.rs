//! C interface to the gaborwf toolkit.
//!
//! Objects are opaque handles created by `gwf_*_new`-style calls and
//! released with the matching `gwf_*_free`. Every fallible call returns a
//! [`GwfStatus`]; on failure the message is available from
//! [`gwf_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gaborwf::flow::FlowMap;
use gaborwf::grid::{make_gaussian_window, make_hermite_window, GridSpec, SampledSignal, Window};
use gaborwf::propagator::{evolve_exact_free, Evolution, SplitStep};
use gaborwf::stft::{stft, TFArray, TFLattice};
use gaborwf::wavefront::{estimate_wf, WfEstimate, WfParams};
use gaborwf::{Complex64, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    Numerical = 4,
    Unsupported = 5,
    Io = 6,
    Panic = 7,
}

/// Sampled signal on a periodic grid.
pub struct GwfSignal(SampledSignal);
/// Analysis window.
pub struct GwfWindow(Window);
/// Short-time Fourier transform on the full lattice.
pub struct GwfStft(TFArray);
/// Directional wave front estimate.
pub struct GwfWavefront(WfEstimate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GwfStatus {
    match e {
        Error::GridMismatch(_) | Error::BinMismatch(..) => GwfStatus::GridMismatch,
        Error::NonFinite(_)
        | Error::FlowBlowup(_)
        | Error::SingularMap(..)
        | Error::UndefinedFit
        | Error::UnreliableTruncation(_)
        | Error::DegenerateWindowPair(_)
        | Error::ZeroWindow => GwfStatus::Numerical,
        Error::Unsupported(_) | Error::PartialLattice => GwfStatus::Unsupported,
        Error::Io(_) | Error::Json(_) => GwfStatus::Io,
        _ => GwfStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), GwfStatus>) -> GwfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GwfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            GwfStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, GwfStatus>;
}

impl<T> OrStatus<T> for gaborwf::Result<T> {
    fn or_status(self) -> Result<T, GwfStatus> {
        self.map_err(|e| {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        })
    }
}

fn null() -> GwfStatus {
    set_error("null pointer argument".into());
    GwfStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, GwfStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), GwfStatus> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn invalid(msg: &str) -> GwfStatus {
    set_error(msg.into());
    GwfStatus::InvalidArgument
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gwf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a signal from `n_points` real and imaginary parts. `imag` may be
/// null for a real signal. `n_points` must be a power of two.
///
/// # Safety
/// `real` (and `imag` if non-null) must point to `n_points` doubles.
#[no_mangle]
pub unsafe extern "C" fn gwf_signal_new(
    n_points: usize,
    extent: f64,
    real: *const f64,
    imag: *const f64,
    out: *mut *mut GwfSignal,
) -> GwfStatus {
    guard(|| {
        if real.is_null() {
            return Err(null());
        }
        let grid = GridSpec::new(n_points, extent).or_status()?;
        let re = std::slice::from_raw_parts(real, n_points);
        let values = if imag.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(imag, n_points);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let s = SampledSignal::new(grid, values, "ffi").or_status()?;
        put(out, GwfSignal(s))
    })
}

/// # Safety
/// `s` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gwf_signal_free(s: *mut GwfSignal) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwf_signal_len(s: *const GwfSignal) -> usize {
    s.as_ref().map_or(0, |s| s.0.values.len())
}

/// Copies the samples into `real` and `imag`, each of length `len`.
///
/// # Safety
/// `s` must be a live handle; `real` and `imag` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gwf_signal_values(
    s: *const GwfSignal,
    real: *mut f64,
    imag: *mut f64,
    len: usize,
) -> GwfStatus {
    guard(|| {
        let s = deref(s)?;
        if real.is_null() || imag.is_null() {
            return Err(null());
        }
        if len != s.0.values.len() {
            return Err(invalid("buffer length does not match the signal"));
        }
        let re = std::slice::from_raw_parts_mut(real, len);
        let im = std::slice::from_raw_parts_mut(imag, len);
        for (k, v) in s.0.values.iter().enumerate() {
            re[k] = v.re;
            im[k] = v.im;
        }
        Ok(())
    })
}

/// L2 norm of the signal.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwf_signal_norm(s: *const GwfSignal, out: *mut f64) -> GwfStatus {
    guard(|| {
        let s = deref(s)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = s.0.norm_l2();
        Ok(())
    })
}

/// Gaussian window (`hermite == 0`) or first Hermite window, L2-normalized.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwf_window_new(
    n_points: usize,
    extent: f64,
    hermite: i32,
    out: *mut *mut GwfWindow,
) -> GwfStatus {
    guard(|| {
        let grid = GridSpec::new(n_points, extent).or_status()?;
        let w = if hermite != 0 { make_hermite_window(grid, true) } else { make_gaussian_window(grid, true) };
        put(out, GwfWindow(w))
    })
}

/// # Safety
/// `w` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwf_window_free(w: *mut GwfWindow) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// STFT of `s` against `w` on the full time-frequency lattice.
///
/// # Safety
/// `s`, `w` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwf_stft_new(
    s: *const GwfSignal,
    w: *const GwfWindow,
    out: *mut *mut GwfStft,
) -> GwfStatus {
    guard(|| {
        let (s, w) = (deref(s)?, deref(w)?);
        let lat = TFLattice::full(s.0.grid);
        let arr = stft(&s.0, &w.0, &lat).or_status()?;
        put(out, GwfStft(arr))
    })
}

/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwf_stft_free(a: *mut GwfStft) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Lattice shape: rows are positions, columns are frequencies.
///
/// # Safety
/// `a` must be a live handle; `n_x`, `n_xi` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gwf_stft_shape(a: *const GwfStft, n_x: *mut usize, n_xi: *mut usize) -> GwfStatus {
    guard(|| {
        let a = deref(a)?;
        let (nx, nk) = a.0.lattice.shape();
        *n_x.as_mut().ok_or_else(null)? = nx;
        *n_xi.as_mut().ok_or_else(null)? = nk;
        Ok(())
    })
}

/// Copies `|V_g f|` row-major into `buf` of length `n_x * n_xi`.
///
/// # Safety
/// `a` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gwf_stft_abs(a: *const GwfStft, buf: *mut f64, len: usize) -> GwfStatus {
    guard(|| {
        let a = deref(a)?;
        if buf.is_null() {
            return Err(null());
        }
        if len != a.0.values.len() {
            return Err(invalid("buffer length does not match the lattice"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (d, v) in dst.iter_mut().zip(&a.0.values) {
            *d = v.norm();
        }
        Ok(())
    })
}

/// Free Schrodinger evolution `e^{it Delta}` (exact in Fourier space).
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwf_evolve_free(s: *const GwfSignal, t: f64, out: *mut *mut GwfSignal) -> GwfStatus {
    guard(|| {
        let s = deref(s)?;
        let u = evolve_exact_free(&s.0, t).or_status()?;
        put(out, GwfSignal(u))
    })
}

/// Harmonic oscillator evolution by Strang splitting.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwf_evolve_harmonic(
    s: *const GwfSignal,
    t: f64,
    steps_per_unit: f64,
    out: *mut *mut GwfSignal,
) -> GwfStatus {
    guard(|| {
        let s = deref(s)?;
        let ev = SplitStep::harmonic(steps_per_unit).or_status()?;
        let u = ev.evolve(&s.0, t).or_status()?;
        put(out, GwfSignal(u))
    })
}

/// Wave front estimate with default parameters.
///
/// # Safety
/// `s`, `w` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwf_wavefront_new(
    s: *const GwfSignal,
    w: *const GwfWindow,
    out: *mut *mut GwfWavefront,
) -> GwfStatus {
    guard(|| {
        let (s, w) = (deref(s)?, deref(w)?);
        let est = estimate_wf(&s.0, &w.0, &WfParams::default()).or_status()?;
        put(out, GwfWavefront(est))
    })
}

/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwf_wavefront_free(e: *mut GwfWavefront) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of angular bins, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwf_wavefront_n_bins(e: *const GwfWavefront) -> usize {
    e.as_ref().map_or(0, |e| e.0.n_bins())
}

/// Angle of bin `bin` and whether it belongs to the estimated set.
///
/// # Safety
/// `e` must be a live handle; `angle`, `in_wf` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gwf_wavefront_bin(
    e: *const GwfWavefront,
    bin: usize,
    angle: *mut f64,
    in_wf: *mut i32,
) -> GwfStatus {
    guard(|| {
        let e = deref(e)?;
        let b = e.0.bins.get(bin).ok_or_else(|| invalid("bin index out of range"))?;
        *angle.as_mut().ok_or_else(null)? = b.angle;
        *in_wf.as_mut().ok_or_else(null)? = i32::from(b.in_wf);
        Ok(())
    })
}

/// Applies the harmonic oscillator flow at time `t` to `(x, xi)` in place.
///
/// # Safety
/// `x` and `xi` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gwf_flow_harmonic(t: f64, x: *mut f64, xi: *mut f64) -> GwfStatus {
    guard(|| {
        let x = x.as_mut().ok_or_else(null)?;
        let xi = xi.as_mut().ok_or_else(null)?;
        let [a, b] = FlowMap::harmonic(t).apply([*x, *xi]).or_status()?;
        *x = a;
        *xi = b;
        Ok(())
    })
}
