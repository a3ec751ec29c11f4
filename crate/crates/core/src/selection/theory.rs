//! Threshold formulas and the guarantee calculators (measurement counts,
//! MAR/LAR floors, recovery sparsity cap).

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::SignalStats;

/// Constant multiplying the coherence branch of the model-selection
/// threshold, and the recovery threshold, as stated by the theory.
pub const DEFAULT_THRESHOLD_C: f64 = 10.0;

/// Below this many columns the asymptotic statements are not claimed to hold.
pub const MIN_P_FOR_GUARANTEES: usize = 128;

const T_LO: f64 = 0.001;
const T_HI: f64 = 0.999;
const T_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    ModelSelection,
    Recovery,
}

/// A threshold together with every ingredient used to compute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub lambda: f64,
    pub variant: ThresholdVariant,
    pub c: f64,
    pub mu: f64,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_norm: Option<f64>,
    /// Recovery only: the value of `c` at which `lambda` equals `||y||`;
    /// any larger `c` selects nothing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ThresholdSpec {
    /// The same threshold scaled by `factor` (e.g. `0.6 lambda`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("threshold scale must be nonnegative, got {factor}")));
        }
        let mut out = self.clone();
        out.lambda *= factor;
        Ok(out)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("t must lie strictly inside (0, 1), got {t}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be nonnegative and finite, got {v}")))
    }
}

fn p_warnings(p: usize) -> Vec<String> {
    if p < MIN_P_FOR_GUARANTEES {
        vec![format!(
            "p = {p} is below {MIN_P_FOR_GUARANTEES}; the guarantees are stated for larger problems"
        )]
    } else {
        Vec::new()
    }
}

/// The scaled constant `c' = 2t` used for small problems.
pub fn auto_2t(t: f64) -> f64 {
    2.0 * t
}

/// Model-selection threshold
/// `max{ c mu sqrt(n snr) / t, sqrt(2) / (1 - t) } * sqrt(2 sigma2 ln p)`.
pub fn ost_threshold(mu: f64, n: usize, p: usize, snr: f64, sigma2: f64, t: f64, c: f64) -> Result<ThresholdSpec> {
    check_t(t)?;
    check_nonneg("mu", mu)?;
    check_positive("snr", snr)?;
    check_positive("sigma2", sigma2)?;
    check_nonneg("c", c)?;
    if p < 2 || n == 0 {
        return Err(Error::invalid(format!("need n >= 1 and p >= 2, got n = {n}, p = {p}")));
    }
    let coherence_branch = c * mu * (n as f64 * snr).sqrt() / t;
    let noise_branch = std::f64::consts::SQRT_2 / (1.0 - t);
    let lambda = coherence_branch.max(noise_branch) * (2.0 * sigma2 * (p as f64).ln()).sqrt();
    Ok(ThresholdSpec {
        lambda,
        variant: ThresholdVariant::ModelSelection,
        c,
        mu,
        p,
        t: Some(t),
        n: Some(n),
        snr: Some(snr),
        sigma2: Some(sigma2),
        y_norm: None,
        critical_c: None,
        warnings: p_warnings(p),
    })
}

fn recovery_factor(p: usize) -> f64 {
    (2.0 * (p as f64).ln() / (1.0 - (-0.5f64).exp())).sqrt()
}

/// Noiseless recovery threshold `c mu ||y|| sqrt(2 ln p / (1 - e^{-1/2}))`.
pub fn recovery_threshold(mu: f64, y_norm: f64, p: usize, c: f64) -> Result<ThresholdSpec> {
    check_nonneg("mu", mu)?;
    check_nonneg("||y||", y_norm)?;
    check_nonneg("c", c)?;
    if p < 2 {
        return Err(Error::invalid(format!("need p >= 2, got {p}")));
    }
    let factor = recovery_factor(p);
    Ok(ThresholdSpec {
        lambda: c * mu * y_norm * factor,
        variant: ThresholdVariant::Recovery,
        c,
        mu,
        p,
        t: None,
        n: None,
        snr: None,
        sigma2: None,
        y_norm: Some(y_norm),
        critical_c: (mu > 0.0).then(|| 1.0 / (mu * factor)),
        warnings: p_warnings(p),
    })
}

/// `(c1, gamma)` with `mu = c1 n^{-1/gamma}`, and the derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub c1: f64,
    pub gamma: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c4_sost: f64,
}

impl TheoremParams {
    pub fn new(c1: f64, gamma: f64) -> Result<Self> {
        check_positive("c1", c1)?;
        if !(gamma == 0.0 || (gamma >= 2.0 && gamma.is_finite())) {
            return Err(Error::invalid(format!("gamma must be 0 or at least 2, got {gamma}")));
        }
        Ok(TheoremParams {
            c1,
            gamma,
            c2: 400.0 * c1 * c1,
            c3: 37.0 * E,
            c4: 43.0,
            c4_sost: 800f64.sqrt(),
        })
    }
}

fn two_k_ln_p(k: usize, p: usize) -> f64 {
    2.0 * k as f64 * (p as f64).ln()
}

fn coherence_term(c2: f64, gamma: f64, t: f64, mar: f64, base: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        (c2 / (t * t) / mar * base).powf(gamma / 2.0)
    }
}

/// Objective minimised by [`optimal_t`].
pub fn t_objective(t: f64, snr: f64, mar: f64, k: usize, p: usize, c2: f64, gamma: f64) -> f64 {
    let base = two_k_ln_p(k, p);
    let noise = 8.0 / (1.0 - t).powi(2) * base / (snr * mar);
    noise.max(coherence_term(c2, gamma, t, mar, base))
}

/// Golden-section minimiser of [`t_objective`] over `(0.001, 0.999)`.
///
/// The objective is the maximum of an increasing and a decreasing branch, so
/// it is unimodal and the search is exact up to the `1e-6` bracket.
pub fn optimal_t(snr: f64, mar: f64, k: usize, p: usize, c2: f64, gamma: f64) -> Result<f64> {
    check_positive("snr", snr)?;
    check_positive("mar", mar)?;
    check_nonneg("c2", c2)?;
    if k == 0 || p < 2 {
        return Err(Error::invalid("optimal t needs k >= 1 and p >= 2"));
    }
    let f = |t: f64| t_objective(t, snr, mar, k, p, c2, gamma);
    Ok(golden_section(f, T_LO, T_HI, T_TOL))
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        // `<=` keeps flat regions moving toward the lower end.
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Sufficient number of measurements for exact model selection by OST:
/// `max{2k ln p, 8(1-t)^{-2} 2k ln p / (snr mar), (c2 t^{-2} 2k ln p / mar)^{gamma/2}}`.
///
/// `p` is taken as given. When `p` itself depends on `n` (Gabor frames have
/// `p = n^2`) the caller must iterate to a fixed point.
pub fn min_measurements_thm1(k: usize, p: usize, snr: f64, mar: f64, params: &TheoremParams, t: f64) -> Result<f64> {
    check_t(t)?;
    check_positive("snr", snr)?;
    check_positive("mar", mar)?;
    let base = two_k_ln_p(k, p);
    Ok(base
        .max(8.0 / (1.0 - t).powi(2) * base / (snr * mar))
        .max(coherence_term(params.c2, params.gamma, t, mar, base)))
}

/// Measurement count for sorted OST: the same bound minimised over `t`.
/// Returns `(n, t)`.
pub fn min_measurements_sost(k: usize, p: usize, snr: f64, mar: f64, params: &TheoremParams) -> Result<(f64, f64)> {
    let t = optimal_t(snr, mar, k, p, params.c2, params.gamma)?;
    Ok((min_measurements_thm1(k, p, snr, mar, params, t)?, t))
}

/// Lower bound on MAR (and on `LAR_m` for partial selection):
/// `max{8(1-t)^{-2} 2k ln p / (n snr), 400 t^{-2} 2k ln p mu^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarFloor {
    pub floor: f64,
    pub t: f64,
    /// Whether `k <= n / (2 ln p)` holds.
    pub sparsity_ok: bool,
}

pub fn mar_floor(n: usize, p: usize, k: usize, snr: f64, mu: f64, t: f64) -> Result<MarFloor> {
    check_t(t)?;
    let (a, b) = mar_branches(n, p, k, snr, mu)?;
    Ok(MarFloor {
        floor: (a / (1.0 - t).powi(2)).max(b / (t * t)),
        t,
        sparsity_ok: sparsity_ok(n, p, k),
    })
}

/// MAR floor for sorted OST, minimised over `t`. The two branches cross at
/// `t = sqrt(b) / (sqrt(a) + sqrt(b))`, where the floor is `(sqrt(a) + sqrt(b))^2`.
pub fn mar_floor_sost(n: usize, p: usize, k: usize, snr: f64, mu: f64) -> Result<MarFloor> {
    let (a, b) = mar_branches(n, p, k, snr, mu)?;
    let (ra, rb) = (a.sqrt(), b.sqrt());
    let t = (rb / (ra + rb)).clamp(T_LO, T_HI);
    Ok(MarFloor {
        floor: (a / (1.0 - t).powi(2)).max(b / (t * t)),
        t,
        sparsity_ok: sparsity_ok(n, p, k),
    })
}

fn mar_branches(n: usize, p: usize, k: usize, snr: f64, mu: f64) -> Result<(f64, f64)> {
    if k == 0 || n == 0 || p < 2 {
        return Err(Error::invalid(format!("need k >= 1, n >= 1, p >= 2 (k = {k}, n = {n}, p = {p})")));
    }
    check_positive("snr", snr)?;
    check_nonneg("mu", mu)?;
    let base = two_k_ln_p(k, p);
    Ok((8.0 * base / (n as f64 * snr), 400.0 * base * mu * mu))
}

fn sparsity_ok(n: usize, p: usize, k: usize) -> bool {
    k as f64 <= n as f64 / (2.0 * (p as f64).ln())
}

/// Number of leading entries guaranteed to be detected: the largest `m` with
/// `LAR_m > floor` (0 if none).
pub fn guaranteed_detections(stats: &SignalStats, floor: f64) -> usize {
    stats.lar.iter().take_while(|&&l| l > floor).count()
}

fn recovery_cap(p: usize, spectral_norm: f64, mu: f64, mar: f64, c3: f64, c4: f64) -> Result<f64> {
    check_positive("spectral norm", spectral_norm)?;
    check_positive("mar", mar)?;
    check_nonneg("mu", mu)?;
    if p < 2 {
        return Err(Error::invalid("need p >= 2"));
    }
    let lnp = (p as f64).ln();
    let frame_term = p as f64 / (c3 * c3 * spectral_norm * spectral_norm * lnp);
    let coherence_term = if mu == 0.0 {
        f64::INFINITY
    } else {
        mar / (mu * mu * c4 * c4 * lnp)
    };
    Ok(frame_term.min(coherence_term))
}

/// Largest sparsity certified for noiseless recovery:
/// `min{p / (c3^2 ||X||^2 ln p), mar / (mu^2 c4^2 ln p)}`.
pub fn recovery_sparsity_cap_thm6(p: usize, spectral_norm: f64, mu: f64, mar: f64, params: &TheoremParams) -> Result<f64> {
    recovery_cap(p, spectral_norm, mu, mar, params.c3, params.c4)
}

/// As [`recovery_sparsity_cap_thm6`] with the smaller constant `sqrt(800)`
/// that applies when the selection step is sorted OST.
pub fn recovery_sparsity_cap_sost(p: usize, spectral_norm: f64, mu: f64, mar: f64, params: &TheoremParams) -> Result<f64> {
    recovery_cap(p, spectral_norm, mu, mar, params.c3, params.c4_sost)
}
