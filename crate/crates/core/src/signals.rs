//! Sparse test signals, complex Gaussian noise, and signal statistics.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::Frame;

/// A `k`-sparse vector in `C^p`: sorted support with aligned nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    p: usize,
    support: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseSignal {
    pub fn new(p: usize, support: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::dims(format!(
                "{} support indices but {} values",
                support.len(),
                values.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("support must be strictly increasing"));
        }
        if let Some(&last) = support.last() {
            if last >= p {
                return Err(Error::invalid(format!("support index {last} out of range for p = {p}")));
            }
        }
        if values.iter().any(|v| v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("signal values must be finite and nonzero"));
        }
        Ok(SparseSignal { p, support, values })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn beta_min(&self) -> Option<f64> {
        self.values.iter().map(|v| v.norm()).reduce(f64::min)
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.p];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    /// CSV with header `index,re,im`, one row per nonzero.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, v) in self.support.iter().zip(&self.values) {
            out.push_str(&format!("{i},{},{}\n", v.re, v.im));
        }
        out
    }

    pub fn from_csv(text: &str, p: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let mut support = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize::<(usize, f64, f64)>() {
            let (i, re, im) = row.map_err(|e| Error::parse("signal CSV", e.to_string()))?;
            support.push(i);
            values.push(Complex64::new(re, im));
        }
        Self::new(p, support, values)
    }
}

/// How the phases of nonzero entries are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    PositiveReal,
    UniformPhase { seed: u64 },
}

/// Uniformly random `k`-subset of `0..p`, sorted, via a partial Fisher-Yates
/// shuffle driven by `seed`.
pub fn draw_support(p: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    draw_support_with(p, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn draw_support_with<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut prefix = random_prefix(p, k, rng)?;
    prefix.sort_unstable();
    Ok(prefix)
}

/// First `k` entries of a uniformly random permutation of `0..p`, in
/// permutation order.
pub fn random_prefix<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > p {
        return Err(Error::invalid(format!("cannot draw {k} indices from {p}")));
    }
    let mut idx: Vec<usize> = (0..p).collect();
    for i in 0..k {
        let j = rng.random_range(i..p);
        idx.swap(i, j);
    }
    idx.truncate(k);
    Ok(idx)
}

/// Builds a signal on `support` with a prescribed minimum-to-average ratio
/// and total energy.
///
/// Magnitudes take two levels: the last support index gets `a`, the others
/// `b = a sqrt((k/mar - 1)/(k - 1))`, scaled so `||beta||^2 = total_energy`.
/// With `k = 1` the ratio is necessarily 1.
pub fn make_signal(
    p: usize,
    support: Vec<usize>,
    target_mar: f64,
    total_energy: f64,
    phases: PhaseMode,
) -> Result<SparseSignal> {
    if !(target_mar > 0.0 && target_mar <= 1.0) {
        return Err(Error::invalid(format!("MAR must lie in (0, 1], got {target_mar}")));
    }
    if !(total_energy > 0.0 && total_energy.is_finite()) {
        return Err(Error::invalid(format!("total energy must be positive, got {total_energy}")));
    }
    let k = support.len();
    if k == 0 {
        return Err(Error::invalid("signal support is empty"));
    }
    let kf = k as f64;
    let mags: Vec<f64> = if k == 1 {
        vec![total_energy.sqrt()]
    } else {
        let low = (total_energy * target_mar / kf).sqrt();
        let high = low * ((kf / target_mar - 1.0) / (kf - 1.0)).sqrt();
        (0..k).map(|i| if i + 1 == k { low } else { high }).collect()
    };
    let values = match phases {
        PhaseMode::PositiveReal => mags.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
        PhaseMode::UniformPhase { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            mags.iter()
                .map(|&m| Complex64::from_polar(m, rng.random_range(0.0..2.0 * PI)))
                .collect()
        }
    };
    SparseSignal::new(p, support, values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalStats {
    pub k: usize,
    pub energy: f64,
    pub beta_min: f64,
    /// Minimum-to-average ratio `beta_min^2 k / ||beta||^2`.
    pub mar: f64,
    /// `LAR_m` for `m = 1..=k`, largest first.
    pub lar: Vec<f64>,
    /// `||beta||^2 / (n sigma^2)`; absent when `sigma^2 = 0`.
    pub snr: Option<f64>,
    pub snr_min: Option<f64>,
}

pub fn signal_stats(beta: &SparseSignal, n: usize, sigma2: f64) -> Result<SignalStats> {
    let k = beta.k();
    if k == 0 {
        return Err(Error::invalid("signal statistics need a nonempty support"));
    }
    if sigma2 < 0.0 {
        return Err(Error::invalid("noise variance must be nonnegative"));
    }
    let energy = beta.energy();
    let avg = energy / k as f64;
    let mut sq: Vec<f64> = beta.values().iter().map(|v| v.norm_sqr()).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    let lar: Vec<f64> = sq.iter().map(|s| s / avg).collect();
    let mar = lar[k - 1];
    let snr = (sigma2 > 0.0).then(|| energy / (n as f64 * sigma2));
    Ok(SignalStats {
        k,
        energy,
        beta_min: sq[k - 1].sqrt(),
        mar,
        lar,
        snr,
        snr_min: snr.map(|s| s * mar),
    })
}

/// Draws `eta ~ CN(0, sigma2 I_n)`: independent real and imaginary parts with
/// variance `sigma2 / 2` each.
pub fn sample_noise(n: usize, sigma2: f64, seed: u64) -> Result<Vec<Complex64>> {
    sample_noise_with(n, sigma2, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_noise_with<R: Rng + ?Sized>(n: usize, sigma2: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("noise variance must be nonnegative, got {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let normal = Normal::new(0.0, (sigma2 / 2.0).sqrt()).expect("positive std");
    Ok((0..n)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub y: Vec<Complex64>,
    pub sigma2: f64,
    pub noise: Option<Vec<Complex64>>,
}

impl Measurement {
    pub fn from_observation(y: Vec<Complex64>) -> Self {
        Measurement {
            y,
            sigma2: 0.0,
            noise: None,
        }
    }

    /// One `re,im` line per entry.
    pub fn to_csv(&self) -> String {
        self.y.iter().map(|z| format!("{},{}\n", z.re, z.im)).collect()
    }

    /// Parses `re,im` lines; a leading `re,im` header line is accepted.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut y = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("re,im")) {
                continue;
            }
            let (re, im) = line
                .split_once(',')
                .ok_or_else(|| Error::parse("measurement CSV", format!("line {i} is not `re,im`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse("measurement CSV", format!("line {i}: `{s}` is not a number")))
            };
            y.push(Complex64::new(parse(re)?, parse(im)?));
        }
        Ok(Self::from_observation(y))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `y = X beta + eta`. `eta = None` means a noiseless measurement.
pub fn measure(frame: &Frame, beta: &SparseSignal, eta: Option<&[Complex64]>, sigma2: f64) -> Result<Measurement> {
    if beta.p() != frame.cols() {
        return Err(Error::dims(format!(
            "signal has dimension {}, frame has {} columns",
            beta.p(),
            frame.cols()
        )));
    }
    let mut y = frame.apply(&beta.to_dense())?;
    if let Some(eta) = eta {
        if eta.len() != y.len() {
            return Err(Error::dims(format!(
                "noise has length {}, frame has {} rows",
                eta.len(),
                y.len()
            )));
        }
        for (yi, e) in y.iter_mut().zip(eta) {
            *yi += e;
        }
    }
    Ok(Measurement {
        y,
        sigma2,
        noise: eta.map(|e| e.to_vec()),
    })
}
