//! Discrete Fourier transforms of arbitrary length.
//!
//! Convention: the forward transform uses the kernel `e^{-j 2 pi q m / n}` with
//! no scaling, the inverse uses `e^{+j 2 pi q m / n}` scaled by `1/n`, so that
//! `ifft(fft(v)) == v`. Prime lengths are handled by the planner (Rader or
//! Bluestein), which the Alltop construction needs.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Forward and inverse plans for one transform length. Cheap to clone and
/// safe to share across threads.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("FFT length must be at least 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(FftPlan {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unscaled forward transform of every consecutive `len`-chunk of `buf`.
    pub fn forward_batch(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.len, 0);
        self.forward.process(buf);
    }

    /// Unscaled inverse transform of every consecutive `len`-chunk of `buf`.
    /// Callers wanting the `1/n` normalization apply it themselves.
    pub fn inverse_batch_unscaled(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.len, 0);
        self.inverse.process(buf);
    }
}

pub fn fft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.forward_batch(&mut out);
    Ok(out)
}

pub fn ifft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.inverse_batch_unscaled(&mut out);
    let scale = 1.0 / v.len() as f64;
    for z in &mut out {
        *z *= scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn naive_dft(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|m| {
                v.iter()
                    .enumerate()
                    .map(|(q, &x)| {
                        let ang = -2.0 * PI * ((q * m) % n) as f64 / n as f64;
                        x * Complex64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let base: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (diff / base).sqrt()
    }

    #[test]
    fn zero_length_is_rejected() {
        assert!(matches!(fft(&[]), Err(Error::InvalidArgument(_))));
        assert!(ifft(&[]).is_err());
    }

    #[test]
    fn delta_goes_to_ones() {
        let mut v = vec![Complex64::new(0.0, 0.0); 12];
        v[0] = Complex64::new(1.0, 0.0);
        for z in fft(&v).unwrap() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_goes_to_scaled_delta() {
        let v = vec![Complex64::new(1.0, 0.0); 7];
        let f = fft(&v).unwrap();
        assert!((f[0] - Complex64::new(7.0, 0.0)).norm() < 1e-12);
        assert!(f[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn matches_direct_dft_at_prime_length() {
        let v = random_vec(997, 3);
        let fast = fft(&v).unwrap();
        let slow = naive_dft(&v);
        assert!(rel_err(&fast, &slow) < 1e-12);
        assert!(rel_err(&ifft(&fast).unwrap(), &v) < 1e-12);
    }

    #[test]
    fn round_trip_many_lengths() {
        let lengths = (2..=64).chain([97, 127, 997]);
        for n in lengths {
            let v = random_vec(n, n as u64);
            let back = ifft(&fft(&v).unwrap()).unwrap();
            assert!(rel_err(&back, &v) < 1e-12, "n = {n}");
        }
    }
}
