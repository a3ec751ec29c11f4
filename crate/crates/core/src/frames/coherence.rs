use std::f64::consts::E;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{alltop_seed, Frame};
use crate::error::{Error, Result};
use crate::numkit::{cdot, rdot};

/// `max_{i != j} |<x_i, x_j>|`, i.e. `||X^H X - I||_max` for unit-norm
/// columns. Gabor frames scan one Gram row per column through the adjoint
/// operator; the full `p x p` Gram is never formed.
pub fn worst_case_coherence(frame: &Frame) -> f64 {
    let p = frame.cols();
    if p < 2 {
        return 0.0;
    }
    if let Some(op) = frame.gabor_operator() {
        return (0..p)
            .into_par_iter()
            .map(|i| {
                let row = op.adjoint_apply(&op.column(i)).expect("column length is n");
                row.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, z)| z.norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
    }
    if let Some(m) = frame.real_matrix() {
        return (0..p)
            .into_par_iter()
            .map(|i| {
                let ci = m.col(i);
                (i + 1..p).map(|j| rdot(ci, m.col(j)).abs()).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
    }
    let m = frame.dense_matrix().expect("non-Gabor frames are materialized");
    (0..p)
        .into_par_iter()
        .map(|i| {
            let ci = m.col(i);
            (i + 1..p).map(|j| cdot(ci, m.col(j)).norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `(1/(p-1)) max_i |sum_{j != i} <x_i, x_j>|`, computed as
/// `||(X^H X - diag) 1||_inf / (p - 1)` with one forward and one adjoint
/// application.
pub fn average_coherence(frame: &Frame) -> f64 {
    let p = frame.cols();
    if p < 2 {
        return 0.0;
    }
    let ones = vec![Complex64::new(1.0, 0.0); p];
    let s = frame.apply(&ones).expect("length p");
    let row_sums = frame.fast_adjoint(&s).expect("length n");
    let norms = frame.column_norms();
    let worst = row_sums
        .iter()
        .zip(&norms)
        .map(|(r, c)| (r - c * c).norm())
        .fold(0.0, f64::max);
    worst / (p - 1) as f64
}

/// Welch lower bound `sqrt((p - n) / (n (p - 1)))` on the worst-case
/// coherence of `p > n` unit vectors in dimension `n`.
pub fn welch_bound(n: usize, p: usize) -> Result<f64> {
    if n == 0 || p <= n {
        return Err(Error::invalid(format!(
            "Welch bound needs p > n >= 1, got n = {n}, p = {p}"
        )));
    }
    let (n, p) = (n as f64, p as f64);
    Ok(((p - n) / (n * (p - 1.0))).sqrt())
}

/// Outcome of a two-part coherence condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    /// Condition on the worst-case coherence.
    pub first: bool,
    /// `nu <= mu / sqrt(n)`.
    pub second: bool,
}

impl PropertyCheck {
    pub fn holds(&self) -> bool {
        self.first && self.second
    }
}

/// Coherence property: `mu <= 0.1 / sqrt(2 ln p)` and `nu <= mu / sqrt(n)`.
/// Upper bounds may be passed in place of exact values.
pub fn check_coherence_property(mu: f64, nu: f64, n: usize, p: usize) -> PropertyCheck {
    let lp = (p as f64).ln();
    PropertyCheck {
        first: mu <= 0.1 / (2.0 * lp).sqrt(),
        second: nu <= mu / (n as f64).sqrt(),
    }
}

/// Strong coherence property: `mu <= 1 / (60 e ln p)` and `nu <= mu / sqrt(n)`.
pub fn check_strong_coherence_property(mu: f64, nu: f64, n: usize, p: usize) -> PropertyCheck {
    let lp = (p as f64).ln();
    PropertyCheck {
        first: mu <= 1.0 / (60.0 * E * lp),
        second: nu <= mu / (n as f64).sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub n: usize,
    pub p: usize,
    pub mu: f64,
    pub nu: f64,
    pub spectral_norm: f64,
    /// Absent when `p <= n`.
    pub welch: Option<f64>,
    pub cp: PropertyCheck,
    pub scp: PropertyCheck,
    /// True when `mu`, `nu` and the spectral norm are closed-form bounds.
    pub analytic: bool,
}

impl CoherenceReport {
    pub fn compute(frame: &Frame) -> Result<Self> {
        let mu = worst_case_coherence(frame);
        let nu = average_coherence(frame);
        let spectral_norm = frame.spectral_norm()?;
        Ok(Self::assemble(frame.rows(), frame.cols(), mu, nu, spectral_norm, false))
    }

    /// Closed forms for the Alltop Gabor frame: `mu <= 1/sqrt(n)`,
    /// `nu <= 1/(n+1)`, `||X||_2 = sqrt(n)`.
    pub fn alltop_analytic(n: usize) -> Result<Self> {
        alltop_seed(n)?;
        let nf = n as f64;
        Ok(Self::assemble(n, n * n, 1.0 / nf.sqrt(), 1.0 / (nf + 1.0), nf.sqrt(), true))
    }

    fn assemble(n: usize, p: usize, mu: f64, nu: f64, spectral_norm: f64, analytic: bool) -> Self {
        CoherenceReport {
            n,
            p,
            mu,
            nu,
            spectral_norm,
            welch: welch_bound(n, p).ok(),
            cp: check_coherence_property(mu, nu, n, p),
            scp: check_strong_coherence_property(mu, nu, n, p),
            analytic,
        }
    }
}
