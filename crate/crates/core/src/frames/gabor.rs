//! Gabor frames: all circular time shifts and discrete modulations of a
//! seed vector, with an FFT-backed operator form.
//!
//! Column `i` corresponds to shift `l = i % n` and modulation `m = i / n`; its
//! entry in row `q` is `g[(q - l) mod n] * exp(j 2 pi m q / n)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{norm2, FftPlan};

/// Tolerance on the seed norm.
pub const SEED_NORM_TOL: f64 = 1e-12;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Alltop seed `g_q = n^{-1/2} exp(j 2 pi q^3 / n)` for prime `n >= 5`.
pub fn alltop_seed(n: usize) -> Result<Vec<Complex64>> {
    if n < 5 || !is_prime(n as u64) {
        return Err(Error::invalid(format!(
            "Alltop seed needs a prime length of at least 5, got {n}"
        )));
    }
    let nn = n as u64;
    let scale = 1.0 / (n as f64).sqrt();
    Ok((0..nn)
        .map(|q| {
            let r = ((q * q) % nn) * q % nn;
            Complex64::from_polar(scale, 2.0 * PI * r as f64 / n as f64)
        })
        .collect())
}

/// Matrix-free Gabor frame. Applying it or its adjoint costs `n` length-`n`
/// FFTs plus `O(n^2)` pointwise work.
#[derive(Debug, Clone)]
pub struct GaborOperator {
    seed: Vec<Complex64>,
    plan: FftPlan,
    /// `exp(j 2 pi r / n)` for `r = 0..n`.
    roots: Vec<Complex64>,
}

impl GaborOperator {
    pub fn new(seed: &[Complex64]) -> Result<Self> {
        let n = seed.len();
        if n < 2 {
            return Err(Error::invalid("Gabor seed must have length at least 2"));
        }
        let norm = norm2(seed);
        if (norm - 1.0).abs() > SEED_NORM_TOL {
            return Err(Error::invalid(format!(
                "Gabor seed must have unit norm, got {norm}"
            )));
        }
        let roots = (0..n)
            .map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64))
            .collect();
        Ok(GaborOperator {
            seed: seed.to_vec(),
            plan: FftPlan::new(n)?,
            roots,
        })
    }

    pub fn n(&self) -> usize {
        self.seed.len()
    }

    pub fn cols(&self) -> usize {
        self.n() * self.n()
    }

    pub fn seed(&self) -> &[Complex64] {
        &self.seed
    }

    /// Shift and modulation indices of column `i`.
    pub fn shift_modulation(&self, i: usize) -> (usize, usize) {
        (i % self.n(), i / self.n())
    }

    pub fn column(&self, i: usize) -> Vec<Complex64> {
        let n = self.n();
        let (l, m) = self.shift_modulation(i);
        (0..n)
            .map(|q| self.seed[(q + n - l) % n] * self.roots[(m * q) % n])
            .collect()
    }

    /// `X beta` for `beta` of length `n^2`.
    pub fn apply(&self, beta: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n();
        if beta.len() != n * n {
            return Err(Error::dims(format!(
                "Gabor frame with n = {n} expects {} coefficients, got {}",
                n * n,
                beta.len()
            )));
        }
        // Row l of the buffer holds beta over modulations for shift l; its
        // unscaled inverse DFT gives sum_m beta[l + m n] exp(j 2 pi m q / n).
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for l in 0..n {
            for m in 0..n {
                buf[l * n + m] = beta[l + m * n];
            }
        }
        self.plan.inverse_batch_unscaled(&mut buf);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..n {
            let row = &buf[l * n..(l + 1) * n];
            for (q, yq) in y.iter_mut().enumerate() {
                *yq += self.seed[(q + n - l) % n] * row[q];
            }
        }
        Ok(y)
    }

    /// `X^H y` for `y` of length `n`. For each shift `l`, the entries over
    /// modulations are the DFT of `y_q conj(g[(q - l) mod n])`.
    pub fn adjoint_apply(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n();
        if y.len() != n {
            return Err(Error::dims(format!(
                "Gabor frame with n = {n} expects a length-{n} vector, got {}",
                y.len()
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for l in 0..n {
            for q in 0..n {
                buf[l * n + q] = y[q] * self.seed[(q + n - l) % n].conj();
            }
        }
        self.plan.forward_batch(&mut buf);
        let mut f = vec![Complex64::new(0.0, 0.0); n * n];
        for l in 0..n {
            for m in 0..n {
                f[l + m * n] = buf[l * n + m];
            }
        }
        Ok(f)
    }
}

/// `X beta` for the Gabor frame generated by `g`.
pub fn gabor_apply(g: &[Complex64], beta: &[Complex64]) -> Result<Vec<Complex64>> {
    GaborOperator::new(g)?.apply(beta)
}

/// `X^H y` for the Gabor frame generated by `g`.
pub fn gabor_adjoint_apply(g: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>> {
    GaborOperator::new(g)?.adjoint_apply(y)
}

/// Upper bound on the average coherence of the Gabor frame generated by a
/// unit-norm seed:
/// `[n g_max (sqrt(n) - g_min) + 1 - n g_min^2] / (n^2 - 1)`.
pub fn gabor_nu_bound(g: &[Complex64]) -> f64 {
    let n = g.len() as f64;
    let mags = g.iter().map(|z| z.norm());
    let (gmin, gmax) = mags.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    (n * gmax * (n.sqrt() - gmin) + 1.0 - n * gmin * gmin) / (n * n - 1.0)
}
