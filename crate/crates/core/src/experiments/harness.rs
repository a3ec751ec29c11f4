use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{coherence_for_threshold, Algorithm, ExperimentConfig};
use super::seeds::derive_seed;
use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::numkit::norm2;
use crate::selection::{self, ost_threshold, recovery_threshold};
use crate::signals::{draw_support, make_signal, measure, sample_noise};

/// Sup-norm error below which a recovery counts as exact.
pub const RECOVERY_TOL: f64 = 1e-6;

const STREAM_SUPPORT: u64 = 1;
const STREAM_PHASE: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// One row of the trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub f_d: f64,
    /// Zero when nothing was selected.
    pub f_fa: f64,
    pub exact: bool,
    pub subset: bool,
    /// Only set by recovery runs.
    pub recovered: bool,
    /// Zero unless timing was requested.
    pub wall_time_ns: u64,
    #[serde(skip)]
    pub selected: usize,
    #[serde(skip)]
    pub over_selected: bool,
}

/// Everything a trial needs that does not change between trials.
#[derive(Debug)]
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    pub frame: Frame,
    pub mu: f64,
    pub snr: Option<f64>,
    /// Fixed model-selection threshold (OST only).
    pub lambda: Option<f64>,
    /// Resolved threshold constant.
    pub c: f64,
}

impl PreparedExperiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let frame = config.frame.build()?;
        Self::with_frame(config, frame)
    }

    pub fn with_frame(config: ExperimentConfig, frame: Frame) -> Result<Self> {
        config.validate_for(&frame)?;
        let mu = config.mu.unwrap_or_else(|| coherence_for_threshold(&frame));
        let snr = config.snr();
        let th = &config.threshold;
        let c = th.c.resolve(th.t);
        let lambda = match config.algorithm {
            Algorithm::Ost => {
                let spec = ost_threshold(
                    mu,
                    frame.rows(),
                    frame.cols(),
                    snr.expect("validated"),
                    config.sigma2,
                    th.t,
                    c,
                )?;
                Some(spec.scaled(th.scale)?.lambda)
            }
            _ => None,
        };
        Ok(PreparedExperiment {
            config,
            frame,
            mu,
            snr,
            lambda,
            c,
        })
    }

    /// Seed of trial `trial` at model order `k`.
    pub fn trial_seed(&self, k: usize, trial: usize) -> u64 {
        derive_seed(&[
            self.config.master_seed,
            k as u64,
            trial as u64,
            self.config.threshold.scale.to_bits(),
        ])
    }

    fn energy(&self, k: usize) -> f64 {
        let n = self.frame.rows() as f64;
        match self.snr {
            Some(snr) if self.config.sigma2 > 0.0 => snr * n * self.config.sigma2,
            _ => k as f64,
        }
    }

    pub fn run_trial(&self, k: usize, trial: usize) -> Result<TrialRecord> {
        let cfg = &self.config;
        let seed = self.trial_seed(k, trial);
        let p = self.frame.cols();
        let n = self.frame.rows();
        let support = draw_support(p, k, derive_seed(&[seed, STREAM_SUPPORT]))?;
        let beta = make_signal(
            p,
            support,
            cfg.mar,
            self.energy(k),
            cfg.phase_mode.with_seed(derive_seed(&[seed, STREAM_PHASE])),
        )?;
        let noise = if cfg.sigma2 > 0.0 {
            Some(sample_noise(n, cfg.sigma2, derive_seed(&[seed, STREAM_NOISE]))?)
        } else {
            None
        };
        let m = measure(&self.frame, &beta, noise.as_deref(), cfg.sigma2)?;

        let start = Instant::now();
        let mut recovered = false;
        let mut over_selected = false;
        let selected = match cfg.algorithm {
            Algorithm::Ost => selection::ost_select(&self.frame, &m.y, self.lambda.expect("set for OST"))?.selected,
            Algorithm::Sost => selection::sost_select(&self.frame, &m.y, k)?.selected,
            Algorithm::OstRecover => {
                let spec = recovery_threshold(self.mu, norm2(&m.y), p, self.c)?.scaled(cfg.threshold.scale)?;
                let sel = selection::ost_select(&self.frame, &m.y, spec.lambda)?.selected;
                if sel.len() > n {
                    over_selected = true;
                    sel
                } else {
                    let r = selection::recover_on(&self.frame, &m.y, sel, spec.lambda)?;
                    recovered = sup_error(&r.beta_hat, &beta.to_dense()) < RECOVERY_TOL;
                    r.selected
                }
            }
        };
        let elapsed = start.elapsed();

        let (f_d, f_fa, exact, subset) = selection_metrics(beta.support(), &selected);
        Ok(TrialRecord {
            k,
            trial,
            seed,
            f_d,
            f_fa,
            exact,
            subset,
            recovered,
            wall_time_ns: if cfg.timing { elapsed.as_nanos() as u64 } else { 0 },
            selected: selected.len(),
            over_selected,
        })
    }

    /// All `(k, trial)` pairs, run in parallel and returned in
    /// `(k order, trial)` order regardless of scheduling.
    pub fn run(&self) -> Result<Vec<TrialRecord>> {
        let jobs: Vec<(usize, usize)> = self
            .config
            .k_values
            .iter()
            .flat_map(|&k| (0..self.config.trials).map(move |t| (k, t)))
            .collect();
        jobs.par_iter().map(|&(k, t)| self.run_trial(k, t)).collect()
    }
}

fn sup_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(f_D, f_FA, exact, subset)` for true support `s` and estimate `s_hat`,
/// both sorted.
pub fn selection_metrics(s: &[usize], s_hat: &[usize]) -> (f64, f64, bool, bool) {
    let hits = s_hat.iter().filter(|i| s.binary_search(i).is_ok()).count();
    let f_d = if s.is_empty() { 1.0 } else { hits as f64 / s.len() as f64 };
    let f_fa = if s_hat.is_empty() {
        0.0
    } else {
        (s_hat.len() - hits) as f64 / s_hat.len() as f64
    };
    let subset = hits == s_hat.len();
    (f_d, f_fa, subset && hits == s.len(), subset)
}

/// Per-k aggregates, stored as parallel arrays.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub k: Vec<usize>,
    pub trials: Vec<usize>,
    pub mean_f_d: Vec<f64>,
    pub se_f_d: Vec<f64>,
    pub mean_f_fa: Vec<f64>,
    pub se_f_fa: Vec<f64>,
    pub exact_rate: Vec<f64>,
    pub se_exact: Vec<f64>,
    pub subset_rate: Vec<f64>,
    pub se_subset: Vec<f64>,
    pub recovered_rate: Vec<f64>,
    pub se_recovered: Vec<f64>,
    pub over_selected: Vec<usize>,
    pub mean_selected: Vec<f64>,
    pub mean_wall_time_ns: Vec<f64>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn rate_se(flags: impl Iterator<Item = bool>) -> (f64, f64) {
    let (mut hits, mut n) = (0usize, 0usize);
    for f in flags {
        hits += f as usize;
        n += 1;
    }
    let r = hits as f64 / n as f64;
    (r, (r * (1.0 - r) / n as f64).sqrt())
}

impl ExperimentSummary {
    /// Groups `records` by `k` in order of first appearance.
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let mut ks: Vec<usize> = Vec::new();
        for r in records {
            if !ks.contains(&r.k) {
                ks.push(r.k);
            }
        }
        let mut s = ExperimentSummary::default();
        for k in ks {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.k == k).collect();
            let fd: Vec<f64> = rows.iter().map(|r| r.f_d).collect();
            let ffa: Vec<f64> = rows.iter().map(|r| r.f_fa).collect();
            let (m, e) = mean_se(&fd);
            s.mean_f_d.push(m);
            s.se_f_d.push(e);
            let (m, e) = mean_se(&ffa);
            s.mean_f_fa.push(m);
            s.se_f_fa.push(e);
            let (m, e) = rate_se(rows.iter().map(|r| r.exact));
            s.exact_rate.push(m);
            s.se_exact.push(e);
            let (m, e) = rate_se(rows.iter().map(|r| r.subset));
            s.subset_rate.push(m);
            s.se_subset.push(e);
            let (m, e) = rate_se(rows.iter().map(|r| r.recovered));
            s.recovered_rate.push(m);
            s.se_recovered.push(e);
            s.over_selected.push(rows.iter().filter(|r| r.over_selected).count());
            s.mean_selected
                .push(rows.iter().map(|r| r.selected as f64).sum::<f64>() / rows.len() as f64);
            s.mean_wall_time_ns
                .push(rows.iter().map(|r| r.wall_time_ns as f64).sum::<f64>() / rows.len() as f64);
            s.trials.push(rows.len());
            s.k.push(k);
        }
        s
    }

    /// Index of `k` in the arrays.
    pub fn position(&self, k: usize) -> Option<usize> {
        self.k.iter().position(|&x| x == k)
    }
}

/// Output of a sweep: the trial rows plus the resolved threshold settings.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
    pub mu: f64,
    pub lambda: Option<f64>,
    pub c: f64,
}

/// Runs a model-selection or recovery sweep as configured.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    run_prepared(&PreparedExperiment::new(config.clone())?)
}

pub fn run_prepared(prep: &PreparedExperiment) -> Result<SweepResult> {
    let records = prep.run()?;
    Ok(SweepResult {
        summary: ExperimentSummary::from_records(&records),
        records,
        mu: prep.mu,
        lambda: prep.lambda,
        c: prep.c,
    })
}

/// Noiseless recovery sweep; rejects configs that are not `ost_recover`
/// with `sigma2 = 0`.
pub fn run_recovery_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    if config.algorithm != Algorithm::OstRecover {
        return Err(Error::invalid("recovery sweeps need algorithm = ost_recover"));
    }
    run_sweep(config)
}

/// Trial rows as CSV with header
/// `k,trial,seed,f_d,f_fa,exact,subset,recovered,wall_time_ns`.
pub fn records_to_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::parse("trial CSV", e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::parse("trial CSV", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Whether `means` is non-increasing after a centered 3-point moving
/// average (windows are truncated at the ends).
pub fn smoothed_non_increasing(means: &[f64]) -> bool {
    let s = smooth3(means);
    s.windows(2).all(|w| w[1] <= w[0])
}

pub fn smooth3(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(xs.len());
            xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}
