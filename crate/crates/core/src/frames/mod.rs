//! Design matrices and their geometry.
//!
//! A [`Frame`] is an `n x p` design matrix. Gabor frames keep their seed and
//! can run matrix-free; Gaussian designs are stored as real matrices; anything
//! else is a dense complex matrix.

mod coherence;
mod gabor;
mod io;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix, RealMatrix};

pub use coherence::{
    average_coherence, check_coherence_property, check_strong_coherence_property,
    worst_case_coherence, welch_bound, CoherenceReport, PropertyCheck,
};
pub use gabor::{
    alltop_seed, gabor_adjoint_apply, gabor_apply, gabor_nu_bound, is_prime, GaborOperator,
    SEED_NORM_TOL,
};
pub use io::{
    frame_from_str, frame_to_string, read_frame, read_seed, seed_from_str, seed_to_string,
    write_frame, write_seed, FRAME_FORMAT_NOTE,
};

/// Column-norm tolerance for frames declared normalized.
pub const COLUMN_NORM_TOL: f64 = 1e-10;

/// Gabor frames with more rows than this default to the operator form.
pub const DENSE_GABOR_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaborForm {
    Explicit,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Gabor,
    Gaussian { seed: u64, normalized: bool },
    Explicit,
}

impl FrameKind {
    /// Token used in the frame text format header.
    pub fn token(&self) -> &'static str {
        match self {
            FrameKind::Gabor => "gabor",
            FrameKind::Gaussian { .. } => "gaussian",
            FrameKind::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(ComplexMatrix),
    Real(RealMatrix),
    Gabor {
        op: GaborOperator,
        dense: Option<ComplexMatrix>,
    },
}

#[derive(Debug, Clone)]
pub struct Frame {
    kind: FrameKind,
    storage: Storage,
}

impl Frame {
    /// Gabor frame generated by a unit-norm seed.
    pub fn gabor(seed: &[Complex64], form: GaborForm) -> Result<Self> {
        let op = GaborOperator::new(seed)?;
        let dense = match form {
            GaborForm::Operator => None,
            GaborForm::Explicit => {
                let n = op.n();
                let mut m = ComplexMatrix::zeros(n, n * n);
                for i in 0..n * n {
                    m.col_mut(i).copy_from_slice(&op.column(i));
                }
                Some(m)
            }
        };
        Ok(Frame {
            kind: FrameKind::Gabor,
            storage: Storage::Gabor { op, dense },
        })
    }

    /// Alltop Gabor frame, explicit up to [`DENSE_GABOR_MAX_N`] rows.
    pub fn alltop(n: usize) -> Result<Self> {
        let form = if n > DENSE_GABOR_MAX_N {
            GaborForm::Operator
        } else {
            GaborForm::Explicit
        };
        Self::gabor(&alltop_seed(n)?, form)
    }

    /// I.i.d. `N(0, 1/n)` design, optionally rescaled to unit-norm columns.
    pub fn gaussian(n: usize, p: usize, seed: u64, normalize: bool) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::invalid("Gaussian design dimensions must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (n as f64).sqrt();
        let data: Vec<f64> = (0..n * p)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
            .collect();
        let mut m = RealMatrix::from_col_major(n, p, data)?;
        if normalize {
            for j in 0..p {
                let col = m.col_mut(j);
                let nrm = numkit::rdot(col, col).sqrt();
                for x in col.iter_mut() {
                    *x /= nrm;
                }
            }
        }
        Ok(Frame {
            kind: FrameKind::Gaussian {
                seed,
                normalized: normalize,
            },
            storage: Storage::Real(m),
        })
    }

    pub fn explicit(matrix: ComplexMatrix) -> Self {
        Frame {
            kind: FrameKind::Explicit,
            storage: Storage::Dense(matrix),
        }
    }

    pub fn kind(&self) -> &FrameKind {
        &self.kind
    }

    pub fn rows(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.rows(),
            Storage::Real(m) => m.rows(),
            Storage::Gabor { op, .. } => op.n(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.cols(),
            Storage::Real(m) => m.cols(),
            Storage::Gabor { op, .. } => op.cols(),
        }
    }

    /// Seed vector for Gabor frames.
    pub fn seed(&self) -> Option<&[Complex64]> {
        match &self.storage {
            Storage::Gabor { op, .. } => Some(op.seed()),
            _ => None,
        }
    }

    pub fn gabor_operator(&self) -> Option<&GaborOperator> {
        match &self.storage {
            Storage::Gabor { op, .. } => Some(op),
            _ => None,
        }
    }

    /// Whether a dense matrix is held (always true except operator-form Gabor).
    pub fn is_materialized(&self) -> bool {
        !matches!(&self.storage, Storage::Gabor { dense: None, .. })
    }

    pub fn is_real(&self) -> bool {
        match &self.storage {
            Storage::Real(_) => true,
            Storage::Dense(m) => m.is_real(),
            Storage::Gabor { .. } => false,
        }
    }

    pub(crate) fn real_matrix(&self) -> Option<&RealMatrix> {
        match &self.storage {
            Storage::Real(m) => Some(m),
            _ => None,
        }
    }

    pub(crate) fn dense_matrix(&self) -> Option<&ComplexMatrix> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Gabor { dense, .. } => dense.as_ref(),
            Storage::Real(_) => None,
        }
    }

    /// Dense copy of the whole matrix.
    pub fn to_dense(&self) -> ComplexMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Real(m) => m.to_complex(),
            Storage::Gabor { dense: Some(m), .. } => m.clone(),
            Storage::Gabor { op, dense: None } => {
                let cols: Vec<_> = (0..op.cols()).map(|i| op.column(i)).collect();
                ComplexMatrix::from_columns(op.n(), &cols).expect("consistent columns")
            }
        }
    }

    pub fn column(&self, i: usize) -> Vec<Complex64> {
        match &self.storage {
            Storage::Dense(m) => m.col(i).to_vec(),
            Storage::Real(m) => m.col(i).iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Storage::Gabor { op, .. } => op.column(i),
        }
    }

    /// Submatrix of the listed columns, in order.
    pub fn columns(&self, idx: &[usize]) -> Result<ComplexMatrix> {
        let p = self.cols();
        if let Some(&bad) = idx.iter().find(|&&i| i >= p) {
            return Err(Error::dims(format!("column index {bad} out of range for {p} columns")));
        }
        if idx.is_empty() {
            return Err(Error::invalid("column selection is empty"));
        }
        let cols: Vec<_> = idx.iter().map(|&i| self.column(i)).collect();
        ComplexMatrix::from_columns(self.rows(), &cols)
    }

    pub fn column_norms(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(m) => m.column_norms(),
            Storage::Real(m) => (0..m.cols())
                .map(|j| numkit::rdot(m.col(j), m.col(j)).sqrt())
                .collect(),
            Storage::Gabor { op, .. } => vec![numkit::norm2(op.seed()); op.cols()],
        }
    }

    /// Whether every column has unit norm within [`COLUMN_NORM_TOL`].
    pub fn is_normalized(&self) -> bool {
        self.column_norms()
            .iter()
            .all(|c| (c - 1.0).abs() <= COLUMN_NORM_TOL)
    }

    /// `X beta`; Gabor frames in operator form use the FFT path.
    pub fn apply(&self, beta: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.storage {
            Storage::Dense(m) => m.mul_vec(beta),
            Storage::Real(m) => m.mul_vec(beta),
            Storage::Gabor { dense: Some(m), .. } => m.mul_vec(beta),
            Storage::Gabor { op, dense: None } => op.apply(beta),
        }
    }

    /// `X^H y`, the signal proxy.
    pub fn adjoint_apply(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.storage {
            Storage::Dense(m) => m.adjoint_mul_vec(y),
            Storage::Real(m) => m.adjoint_mul_vec(y),
            Storage::Gabor { dense: Some(m), .. } => m.adjoint_mul_vec(y),
            Storage::Gabor { op, dense: None } => op.adjoint_apply(y),
        }
    }

    /// `X^H y` preferring the fastest available route.
    pub(crate) fn fast_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.storage {
            Storage::Gabor { op, .. } => op.adjoint_apply(y),
            _ => self.adjoint_apply(y),
        }
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        self.spectral_norm_with(numkit::DEFAULT_SPECTRAL_TOL, numkit::DEFAULT_SPECTRAL_MAX_ITER)
    }

    pub fn spectral_norm_with(&self, tol: f64, max_iter: usize) -> Result<f64> {
        numkit::spectral_norm(
            |x| self.apply(x).expect("dimension checked"),
            |y| self.adjoint_apply(y).expect("dimension checked"),
            self.rows(),
            self.cols(),
            tol,
            max_iter,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_deterministic() {
        let a = Frame::gaussian(8, 20, 42, false).unwrap().to_dense();
        let b = Frame::gaussian(8, 20, 42, false).unwrap().to_dense();
        let c = Frame::gaussian(8, 20, 43, false).unwrap().to_dense();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn normalized_gaussian_has_unit_columns() {
        let f = Frame::gaussian(16, 40, 7, true).unwrap();
        assert!(f.is_normalized());
        assert!(!Frame::gaussian(16, 40, 7, false).unwrap().is_normalized());
    }

    #[test]
    fn alltop_form_follows_size() {
        assert!(Frame::alltop(31).unwrap().is_materialized());
        assert!(!Frame::alltop(67).unwrap().is_materialized());
    }

    #[test]
    fn column_selection_checks_range() {
        let f = Frame::alltop(5).unwrap();
        assert!(f.columns(&[0, 25]).is_err());
        assert!(f.columns(&[]).is_err());
        let sub = f.columns(&[3, 0]).unwrap();
        assert_eq!(sub.col(0), f.column(3).as_slice());
    }

    #[test]
    fn gabor_columns_unit_norm() {
        let f = Frame::alltop(7).unwrap();
        assert!(f.is_normalized());
        assert!(f.to_dense().column_norms().iter().all(|c| (c - 1.0).abs() < 1e-12));
    }
}
