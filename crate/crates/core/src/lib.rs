//! Numerical time-frequency toolkit: short-time Fourier transforms, Gabor
//! wave front sets, Hamiltonian flows and Schrodinger propagators.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod flow;
pub mod gabormatrix;
mod fft;
pub mod grid;
pub mod io;
pub mod modspace;
pub mod propagator;
pub mod stft;
pub mod suite;
pub mod wavefront;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
