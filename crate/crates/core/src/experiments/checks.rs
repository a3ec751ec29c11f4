//! Empirical estimators for the probabilistic statements behind the
//! guarantees: statistical orthogonality, random-submatrix conditioning,
//! Gaussian coherence bounds, and the noise-proxy tail bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::seeds::derive_seed;
use crate::error::{Error, Result};
use crate::frames::{average_coherence, worst_case_coherence, Frame};
use crate::numkit::{self, norm2, norm_inf, ComplexMatrix};
use crate::signals::{random_prefix, sample_noise};

/// Binomial standard error of a rate estimated from `trials` draws when the
/// true rate is `rate`.
pub fn binomial_se(rate: f64, trials: usize) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// `10 mu sqrt(2 ln p)`.
pub fn default_stoc_epsilon(mu: f64, p: usize) -> f64 {
    10.0 * mu * (2.0 * (p as f64).ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StocEstimate {
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub stoc1_rate: f64,
    pub stoc2_rate: f64,
    /// Largest deviations seen, relative to `||z||`.
    pub max_stoc1: f64,
    pub max_stoc2: f64,
}

/// For an ordered prefix `pi` and coefficients `z`, returns
/// `(max_i |(X^H X_pi z)_{pi_i} - z_i|, max_{j not in pi} |(X^H X_pi z)_j|)`.
pub fn stoc_deviations(frame: &Frame, pi: &[usize], z: &[Complex64]) -> Result<(f64, f64)> {
    let p = frame.cols();
    if pi.len() != z.len() {
        return Err(Error::dims(format!("{} indices but {} coefficients", pi.len(), z.len())));
    }
    let mut beta = vec![Complex64::new(0.0, 0.0); p];
    for (&i, &zi) in pi.iter().zip(z) {
        if i >= p {
            return Err(Error::invalid(format!("index {i} out of range for p = {p}")));
        }
        beta[i] = zi;
    }
    let g = frame.fast_adjoint(&frame.apply(&beta)?)?;
    let on = pi
        .iter()
        .zip(z)
        .map(|(&i, &zi)| (g[i] - zi).norm())
        .fold(0.0, f64::max);
    let mut in_pi = vec![false; p];
    for &i in pi {
        in_pi[i] = true;
    }
    let off = g
        .iter()
        .zip(&in_pi)
        .filter(|(_, &m)| !m)
        .map(|(v, _)| v.norm())
        .fold(0.0, f64::max);
    Ok((on, off))
}

/// Monte Carlo frequency with which a uniformly random ordered support `pi`
/// violates either orthogonality condition for the fixed vector `z`:
/// a violation is a deviation strictly above `epsilon ||z||`.
pub fn stoc_violation_estimate(
    frame: &Frame,
    z: &[Complex64],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<StocEstimate> {
    let k = z.len();
    if k > frame.cols() {
        return Err(Error::invalid(format!("k = {k} exceeds p = {}", frame.cols())));
    }
    if !(epsilon >= 0.0) || trials == 0 {
        return Err(Error::invalid("need epsilon >= 0 and at least one trial"));
    }
    let zn = norm2(z);
    let devs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, t as u64]));
            let pi = random_prefix(frame.cols(), k, &mut rng)?;
            stoc_deviations(frame, &pi, z)
        })
        .collect::<Result<_>>()?;
    let bound = epsilon * zn;
    let rate = |f: fn(&(f64, f64)) -> f64| devs.iter().filter(|d| f(d) > bound).count() as f64 / trials as f64;
    let scale = if zn > 0.0 { zn } else { 1.0 };
    Ok(StocEstimate {
        k,
        epsilon,
        trials,
        stoc1_rate: rate(|d| d.0),
        stoc2_rate: rate(|d| d.1),
        max_stoc1: devs.iter().map(|d| d.0).fold(0.0, f64::max) / scale,
        max_stoc2: devs.iter().map(|d| d.1).fold(0.0, f64::max) / scale,
    })
}

/// Threshold `e^{-1/2}` on `||X_pi^H X_pi - I||_2`.
pub fn conditioning_threshold() -> f64 {
    (-0.5f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningEstimate {
    pub k: usize,
    pub trials: usize,
    pub threshold: f64,
    pub exceed_fraction: f64,
    pub se: f64,
    pub mean_gram_deviation: f64,
    pub max_gram_deviation: f64,
    pub min_singular_value: f64,
    pub max_singular_value: f64,
}

fn hermitian_norm(h: &ComplexMatrix) -> Result<f64> {
    let k = h.rows();
    let r = numkit::spectral_norm_from(
        &numkit::generic_start(k),
        |x| h.mul_vec(x).expect("square"),
        |x| h.mul_vec(x).expect("square"),
        k,
        numkit::DEFAULT_SPECTRAL_TOL,
        numkit::DEFAULT_SPECTRAL_MAX_ITER,
    );
    match r {
        // Nearly tied extreme eigenvalues slow the iterate, not the Rayleigh
        // quotient, which is accurate long before the vector settles.
        Err(Error::NoConvergence { estimate, .. }) => Ok(estimate),
        other => other,
    }
}

/// `(||G - I||_2, sigma_min(X_pi), sigma_max(X_pi))` for the columns `pi`.
pub fn submatrix_deviation(frame: &Frame, pi: &[usize]) -> Result<(f64, f64, f64)> {
    let xs = frame.columns(pi)?;
    let gram = xs.adjoint().matmul(&xs)?;
    let k = gram.rows();
    let mut h = gram.clone();
    for i in 0..k {
        h[(i, i)] -= 1.0;
    }
    let dev = hermitian_norm(&h)?;
    let top = hermitian_norm(&gram)?;
    let mut shifted = gram;
    for i in 0..k {
        for j in 0..k {
            shifted[(i, j)] = -shifted[(i, j)];
        }
        shifted[(i, i)] += top;
    }
    let gap = hermitian_norm(&shifted)?;
    Ok((dev, (top - gap).max(0.0).sqrt(), top.sqrt()))
}

/// Fraction of uniformly random `k`-subsets whose Gram matrix deviates from
/// the identity by at least `e^{-1/2}` in spectral norm.
pub fn submatrix_conditioning_estimate(frame: &Frame, k: usize, trials: usize, seed: u64) -> Result<ConditioningEstimate> {
    if k == 0 || k > frame.rows() || trials == 0 {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n = {} and at least one trial",
            frame.rows()
        )));
    }
    let rows: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, t as u64]));
            let mut pi = random_prefix(frame.cols(), k, &mut rng)?;
            pi.sort_unstable();
            submatrix_deviation(frame, &pi)
        })
        .collect::<Result<_>>()?;
    let thr = conditioning_threshold();
    let exceed = rows.iter().filter(|r| r.0 >= thr).count() as f64 / trials as f64;
    Ok(ConditioningEstimate {
        k,
        trials,
        threshold: thr,
        exceed_fraction: exceed,
        se: binomial_se(exceed, trials),
        mean_gram_deviation: rows.iter().map(|r| r.0).sum::<f64>() / trials as f64,
        max_gram_deviation: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        min_singular_value: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        max_singular_value: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianCoherenceCheck {
    pub n: usize,
    pub p: usize,
    pub draws: usize,
    /// `sqrt(15 ln p / n)`.
    pub mu_bound: f64,
    /// `sqrt(15 ln p) / n`.
    pub nu_bound: f64,
    pub mu_exceed_rate: f64,
    pub nu_exceed_rate: f64,
    /// Allowed exceedance probabilities `2/p` and `2/p^2`.
    pub mu_allowed: f64,
    pub nu_allowed: f64,
    /// Standard errors evaluated at the allowed rates.
    pub mu_se: f64,
    pub nu_se: f64,
    pub max_mu: f64,
    pub max_nu: f64,
    /// Set when `n < 60 ln p`, outside the regime where the bound on `mu`
    /// is claimed.
    pub hypothesis_warning: bool,
}

impl GaussianCoherenceCheck {
    /// Exceedances within the allowed probability plus three standard errors.
    pub fn passes(&self) -> bool {
        self.mu_exceed_rate <= self.mu_allowed + 3.0 * self.mu_se
            && self.nu_exceed_rate <= self.nu_allowed + 3.0 * self.nu_se
    }
}

/// Draws raw `N(0, 1/n)` matrices and counts how often their coherences
/// exceed the high-probability bounds.
pub fn gaussian_coherence_check(n: usize, p: usize, draws: usize, seed: u64) -> Result<GaussianCoherenceCheck> {
    if n == 0 || p <= n || draws == 0 {
        return Err(Error::invalid(format!(
            "need 0 < n < p and at least one draw (n = {n}, p = {p})"
        )));
    }
    let lnp = (p as f64).ln();
    let mu_bound = (15.0 * lnp / n as f64).sqrt();
    let nu_bound = (15.0 * lnp).sqrt() / n as f64;
    let mut stats = Vec::with_capacity(draws);
    for d in 0..draws {
        let x = Frame::gaussian(n, p, derive_seed(&[seed, d as u64]), false)?;
        stats.push((worst_case_coherence(&x), average_coherence(&x)));
    }
    let mu_exceed = stats.iter().filter(|s| s.0 > mu_bound).count() as f64 / draws as f64;
    let nu_exceed = stats.iter().filter(|s| s.1 > nu_bound).count() as f64 / draws as f64;
    let (mu_allowed, nu_allowed) = (2.0 / p as f64, 2.0 / (p as f64 * p as f64));
    Ok(GaussianCoherenceCheck {
        n,
        p,
        draws,
        mu_bound,
        nu_bound,
        mu_exceed_rate: mu_exceed,
        nu_exceed_rate: nu_exceed,
        mu_allowed,
        nu_allowed,
        mu_se: binomial_se(mu_allowed, draws),
        nu_se: binomial_se(nu_allowed, draws),
        max_mu: stats.iter().map(|s| s.0).fold(0.0, f64::max),
        max_nu: stats.iter().map(|s| s.1).fold(0.0, f64::max),
        hypothesis_warning: (n as f64) < 60.0 * lnp,
    })
}

/// `(4p / sqrt(2 pi)) e^{-eps^2/2} / eps`.
pub fn tail_bound(p: usize, epsilon: f64) -> f64 {
    4.0 * p as f64 / (2.0 * PI).sqrt() * (-epsilon * epsilon / 2.0).exp() / epsilon
}

/// `2 sqrt(ln p)`.
pub fn default_tail_epsilon(p: usize) -> f64 {
    2.0 * (p as f64).ln().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub p: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical_rate: f64,
    pub analytic_bound: f64,
    /// Largest `||X^H eta||_inf / sigma` seen.
    pub max_ratio: f64,
}

/// Frequency of `||X^H eta||_inf >= sigma eps` for `eta ~ CN(0, sigma2 I)`.
pub fn noise_proxy_tail_check(frame: &Frame, sigma2: f64, epsilon: f64, trials: usize, seed: u64) -> Result<TailCheck> {
    if !(epsilon > 0.0) || trials == 0 {
        return Err(Error::invalid("need epsilon > 0 and at least one trial"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::invalid("noise variance must be nonnegative"));
    }
    let p = frame.cols();
    let bound = tail_bound(p, epsilon);
    if sigma2 == 0.0 {
        return Ok(TailCheck {
            p,
            epsilon,
            trials,
            exceedances: 0,
            empirical_rate: 0.0,
            analytic_bound: bound,
            max_ratio: 0.0,
        });
    }
    let sigma = sigma2.sqrt();
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let eta = sample_noise(frame.rows(), sigma2, derive_seed(&[seed, t as u64]))?;
            Ok(norm_inf(&frame.fast_adjoint(&eta)?) / sigma)
        })
        .collect::<Result<_>>()?;
    let exceedances = ratios.iter().filter(|&&r| r >= epsilon).count();
    Ok(TailCheck {
        p,
        epsilon,
        trials,
        exceedances,
        empirical_rate: exceedances as f64 / trials as f64,
        analytic_bound: bound,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
    })
}
