//! Coherence-based sparse model selection and recovery by one-step
//! thresholding.
//!
//! * [`numkit`]: FFTs, spectral norms and minimum-norm least squares.
//! * [`frames`]: Gabor (Alltop), Gaussian and explicit designs, with
//!   worst-case/average coherence and the coherence-property checks.
//! * [`signals`]: sparse test signals, complex Gaussian noise, and the
//!   MAR/LAR/SNR statistics.
//! * [`selection`]: OST and sorted OST selection, OST recovery, thresholds
//!   and the guarantee calculators.
//! * [`experiments`]: the seeded Monte Carlo harness and the empirical
//!   checks of the probabilistic bounds.

pub mod error;
pub mod experiments;
pub mod frames;
pub mod numkit;
pub mod selection;
pub mod signals;

pub use error::{Error, Result};
