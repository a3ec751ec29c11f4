//! Complex-valued numerical substrate: dense storage, FFTs, spectral norm
//! estimation and minimum-norm least squares.

mod fft;
mod lstsq;
mod matrix;
mod power;

pub use fft::{fft, ifft, FftPlan};
pub use lstsq::{least_squares, RANK_RTOL};
pub use matrix::{cdot, norm2, norm_inf, rdot, ComplexMatrix, RealMatrix};
pub use power::{generic_start, spectral_norm, spectral_norm_from, DEFAULT_SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_TOL};
