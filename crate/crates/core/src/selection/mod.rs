//! One-step thresholding (OST), sorted OST, and OST recovery.

mod theory;

pub use theory::{
    auto_2t, guaranteed_detections, mar_floor, mar_floor_sost, min_measurements_sost, min_measurements_thm1,
    optimal_t, ost_threshold, recovery_sparsity_cap_sost, recovery_sparsity_cap_thm6, recovery_threshold,
    t_objective, MarFloor, ThresholdSpec, ThresholdVariant, TheoremParams, DEFAULT_THRESHOLD_C,
    MIN_P_FOR_GUARANTEES,
};

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::numkit::{least_squares, norm2};

/// Outcome of a selection step. Indices are 0-based and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// The signal proxy `f = X^H y`.
    pub proxy: Vec<Complex64>,
    pub selected: Vec<usize>,
    /// Threshold used by OST; `None` for sorted OST.
    pub lambda: Option<f64>,
    /// Requested model order for sorted OST.
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Length `p`; exactly zero off `selected`.
    pub beta_hat: Vec<Complex64>,
    pub selected: Vec<usize>,
    pub lambda: f64,
    /// `||y - X beta_hat||_2`.
    pub residual: f64,
}

/// JSON shape shared by selection and recovery results.
#[derive(Debug, Clone, Serialize)]
pub struct ResultJson {
    pub selected: Vec<usize>,
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub residual: Option<f64>,
    /// Recovered values `[re, im]`, aligned with `selected`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<[f64; 2]>>,
    /// Always 0: indices count from zero.
    pub index_base: u8,
}

impl SelectionResult {
    pub fn to_json(&self) -> ResultJson {
        ResultJson {
            selected: self.selected.clone(),
            lambda: self.lambda,
            k: self.k,
            residual: None,
            values: None,
            index_base: 0,
        }
    }
}

impl RecoveryResult {
    pub fn to_json(&self) -> ResultJson {
        ResultJson {
            selected: self.selected.clone(),
            lambda: Some(self.lambda),
            k: None,
            residual: Some(self.residual),
            values: Some(self.selected.iter().map(|&i| [self.beta_hat[i].re, self.beta_hat[i].im]).collect()),
            index_base: 0,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold must be nonnegative, got {lambda}")))
    }
}

/// `{i : |f_i| > lambda}` in increasing order.
pub fn threshold_indices(proxy: &[Complex64], lambda: f64) -> Vec<usize> {
    proxy
        .iter()
        .enumerate()
        .filter(|(_, f)| f.norm() > lambda)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of the `k` largest `|f_i|`, ties going to the smaller index,
/// returned in increasing order.
pub fn top_k_indices(proxy: &[Complex64], k: usize) -> Result<Vec<usize>> {
    let p = proxy.len();
    if k > p {
        return Err(Error::invalid(format!("cannot keep {k} of {p} proxy entries")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mags: Vec<f64> = proxy.iter().map(|f| f.norm()).collect();
    let cmp = |a: &usize, b: &usize| -> Ordering { mags[*b].total_cmp(&mags[*a]).then(a.cmp(b)) };
    let mut idx: Vec<usize> = (0..p).collect();
    if k < p {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable();
    Ok(idx)
}

fn proxy(frame: &Frame, y: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.len() != frame.rows() {
        return Err(Error::dims(format!(
            "measurement has length {}, frame has {} rows",
            y.len(),
            frame.rows()
        )));
    }
    frame.fast_adjoint(y)
}

/// Keeps every index whose proxy magnitude strictly exceeds `lambda`.
pub fn ost_select(frame: &Frame, y: &[Complex64], lambda: f64) -> Result<SelectionResult> {
    check_lambda(lambda)?;
    let proxy = proxy(frame, y)?;
    let selected = threshold_indices(&proxy, lambda);
    Ok(SelectionResult {
        proxy,
        selected,
        lambda: Some(lambda),
        k: None,
    })
}

/// Keeps the `k` largest proxy magnitudes.
pub fn sost_select(frame: &Frame, y: &[Complex64], k: usize) -> Result<SelectionResult> {
    if k > frame.cols() {
        return Err(Error::invalid(format!("k = {k} exceeds p = {}", frame.cols())));
    }
    let proxy = proxy(frame, y)?;
    let selected = top_k_indices(&proxy, k)?;
    Ok(SelectionResult {
        proxy,
        selected,
        lambda: None,
        k: Some(k),
    })
}

/// OST selection followed by least squares on the selected columns.
///
/// Selecting more than `n` columns is reported as [`Error::OverSelection`]
/// rather than silently solved, as it signals a misconfigured threshold.
pub fn ost_recover(frame: &Frame, y: &[Complex64], lambda: f64) -> Result<RecoveryResult> {
    let sel = ost_select(frame, y, lambda)?;
    recover_on(frame, y, sel.selected, lambda)
}

pub(crate) fn recover_on(frame: &Frame, y: &[Complex64], selected: Vec<usize>, lambda: f64) -> Result<RecoveryResult> {
    let n = frame.rows();
    let p = frame.cols();
    if selected.len() > n {
        return Err(Error::OverSelection {
            selected: selected.len(),
            rows: n,
        });
    }
    let mut beta_hat = vec![Complex64::new(0.0, 0.0); p];
    if selected.is_empty() {
        return Ok(RecoveryResult {
            beta_hat,
            selected,
            lambda,
            residual: norm2(y),
        });
    }
    let xi = frame.columns(&selected)?;
    let w = least_squares(&xi, y)?;
    let fit = xi.mul_vec(&w)?;
    let r: Vec<Complex64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    for (&i, &wi) in selected.iter().zip(&w) {
        beta_hat[i] = wi;
    }
    Ok(RecoveryResult {
        beta_hat,
        selected,
        lambda,
        residual: norm2(&r),
    })
}
