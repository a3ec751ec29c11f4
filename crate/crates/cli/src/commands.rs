use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ost_core::experiments::{
    records_to_csv, run_prepared, run_suite, ExperimentConfig, PreparedExperiment, Suite,
};
use ost_core::frames::{frame_to_string, CoherenceReport, Frame};
use ost_core::numkit::norm2;
use ost_core::selection::{
    auto_2t, ost_recover, ost_select, ost_threshold, recovery_threshold, sost_select, ThresholdSpec,
    DEFAULT_THRESHOLD_C,
};
use ost_core::signals::Measurement;
use serde::Serialize;
use serde_json::{json, Value};

use crate::frame_args::FrameArgs;
use crate::output::{emit, ensure_dir, print_json, read_text, to_json, AtomicWriter};
use crate::Failure;

pub fn coherence(frame: &FrameArgs, analytic: bool) -> Result<(), Failure> {
    let report = if analytic {
        let n = frame
            .alltop_n()
            .ok_or_else(|| Failure::Core(ost_core::Error::InvalidArgument("--analytic applies to --alltop frames only".into())))?;
        CoherenceReport::alltop_analytic(n)?
    } else {
        CoherenceReport::compute(&frame.build(false)?)?
    };
    print_json(&report)
}

/// Worst-case coherence for threshold formulas: an explicit override, the
/// closed form for Alltop, or the computed value.
fn threshold_mu(frame_args: &FrameArgs, frame: &Frame, mu: Option<f64>) -> f64 {
    match (mu, frame_args.alltop_n()) {
        (Some(m), _) => m,
        (None, Some(n)) => 1.0 / (n as f64).sqrt(),
        (None, None) => ost_core::experiments::coherence_for_threshold(frame),
    }
}

fn parse_c(raw: &str, t: Option<f64>) -> Result<f64, Failure> {
    if raw == "auto2t" {
        let t = t.ok_or_else(|| Failure::Usage("--c auto2t needs --t".into()))?;
        return Ok(auto_2t(t));
    }
    raw.parse::<f64>()
        .map_err(|_| Failure::Usage(format!("--c expects a number or `auto2t`, got `{raw}`")))
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Observation vector, one `re,im` pair per line.
    #[arg(long)]
    pub measurement: PathBuf,
    /// Fixed threshold.
    #[arg(long, conflicts_with_all = ["sost_k", "t", "c"])]
    pub lambda: Option<f64>,
    /// Sorted OST: keep the K largest proxy magnitudes.
    #[arg(long, value_name = "K", conflicts_with_all = ["t", "c"])]
    pub sost_k: Option<usize>,
    /// Threshold parameter t in (0, 1).
    #[arg(long)]
    pub t: Option<f64>,
    /// Threshold constant: a number or `auto2t` (c = 2t). Default 10.
    #[arg(long)]
    pub c: Option<String>,
    /// Linear SNR.
    #[arg(long, conflicts_with = "snr_db")]
    pub snr: Option<f64>,
    /// SNR in dB.
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Noise variance.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Override the worst-case coherence used in the threshold.
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Serialize)]
struct ThresholdEcho<'a> {
    mode: &'a str,
    #[serde(flatten)]
    spec: Option<&'a ThresholdSpec>,
}

fn with_threshold(mut v: Value, mode: &str, spec: Option<&ThresholdSpec>) -> Value {
    v["threshold"] = serde_json::to_value(ThresholdEcho { mode, spec }).unwrap_or(Value::Null);
    v
}

pub fn select(a: &SelectArgs) -> Result<(), Failure> {
    let frame = a.frame.build(true)?;
    let y = Measurement::read(&a.measurement)?.y;
    if let Some(k) = a.sost_k {
        let r = sost_select(&frame, &y, k)?;
        let v = serde_json::to_value(r.to_json()).expect("serializable");
        return print_json(&with_threshold(v, "sost", None));
    }
    let (lambda, spec, mode) = match a.lambda {
        Some(l) => (l, None, "lambda"),
        None => {
            let t = a
                .t
                .ok_or_else(|| Failure::Usage("give exactly one of --lambda, --sost-k, or --t with --sigma2 and --snr/--snr-db".into()))?;
            let snr = match (a.snr, a.snr_db) {
                (Some(s), None) => s,
                (None, Some(db)) => 10f64.powf(db / 10.0),
                _ => return Err(Failure::Usage("the OST threshold needs --snr or --snr-db".into())),
            };
            let sigma2 = a
                .sigma2
                .ok_or_else(|| Failure::Usage("the OST threshold needs --sigma2".into()))?;
            let c = match &a.c {
                Some(raw) => parse_c(raw, Some(t))?,
                None => DEFAULT_THRESHOLD_C,
            };
            let mu = threshold_mu(&a.frame, &frame, a.mu);
            let spec = ost_threshold(mu, frame.rows(), frame.cols(), snr, sigma2, t, c)?;
            for w in &spec.warnings {
                eprintln!("warning: {w}");
            }
            (spec.lambda, Some(spec), "ost")
        }
    };
    let r = ost_select(&frame, &y, lambda)?;
    let v = serde_json::to_value(r.to_json()).expect("serializable");
    print_json(&with_threshold(v, mode, spec.as_ref()))
}

#[derive(Args, Debug)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Observation vector, one `re,im` pair per line.
    #[arg(long)]
    pub measurement: PathBuf,
    /// Fixed threshold.
    #[arg(long, conflicts_with = "c")]
    pub lambda: Option<f64>,
    /// Constant in the recovery threshold `c mu ||y|| sqrt(2 ln p / (1 - e^{-1/2}))`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Override the worst-case coherence used in the threshold.
    #[arg(long)]
    pub mu: Option<f64>,
}

pub fn recover(a: &RecoverArgs) -> Result<(), Failure> {
    let frame = a.frame.build(true)?;
    let y = Measurement::read(&a.measurement)?.y;
    let (lambda, spec, mode) = match (a.lambda, a.c) {
        (Some(l), None) => (l, None, "lambda"),
        (None, c) => {
            let mu = threshold_mu(&a.frame, &frame, a.mu);
            let spec = recovery_threshold(mu, norm2(&y), frame.cols(), c.unwrap_or(DEFAULT_THRESHOLD_C))?;
            for w in &spec.warnings {
                eprintln!("warning: {w}");
            }
            (spec.lambda, Some(spec), "recovery")
        }
        (Some(_), Some(_)) => return Err(Failure::Usage("--lambda and --c are mutually exclusive".into())),
    };
    let r = ost_recover(&frame, &y, lambda)?;
    let v = serde_json::to_value(r.to_json()).expect("serializable");
    print_json(&with_threshold(v, mode, spec.as_ref()))
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// JSON experiment config.
    pub config: PathBuf,
    /// Output directory for trials.csv, summary.json and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_path: &'a Path,
    config: &'a ExperimentConfig,
    resolved: Value,
    version: &'a str,
    master_seed: u64,
    started_at: String,
    finished_at: String,
    outputs: Vec<PathBuf>,
}

pub fn experiment(a: &ExperimentArgs) -> Result<(), Failure> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let config = ExperimentConfig::from_json(&read_text(&a.config)?)?;
    config.validate()?;
    let prep = PreparedExperiment::new(config)?;
    let sweep = run_prepared(&prep)?;
    if let Some(i) = sweep.summary.over_selected.iter().position(|&c| c > 0) {
        eprintln!(
            "warning: {} trials at k = {} selected more than n columns",
            sweep.summary.over_selected[i], sweep.summary.k[i]
        );
    }
    let resolved = json!({ "mu": sweep.mu, "lambda": sweep.lambda, "c": sweep.c, "n": prep.frame.rows(), "p": prep.frame.cols() });
    let csv = records_to_csv(&sweep.records)?;
    let summary = to_json(&json!({ "resolved": resolved, "summary": sweep.summary }))?;

    ensure_dir(&a.out)?;
    let mut w = AtomicWriter::default();
    w.write(&a.out.join("trials.csv"), csv.as_bytes())?;
    w.write(&a.out.join("summary.json"), summary.as_bytes())?;
    let mut outputs = w.paths().to_vec();
    let manifest_path = a.out.join("manifest.json");
    outputs.push(manifest_path.clone());
    let manifest = Manifest {
        command: "experiment",
        config_path: &a.config,
        config: &prep.config,
        resolved,
        version: env!("CARGO_PKG_VERSION"),
        master_seed: prep.config.master_seed,
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outputs,
    };
    let text = to_json(&manifest)?;
    w.write(&manifest_path, text.as_bytes())?;
    emit(&text)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    Geometry,
    Stoc,
    Gaussian,
    Tails,
    Conditioning,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Geometry => Suite::Geometry,
            SuiteArg::Stoc => Suite::Stoc,
            SuiteArg::Gaussian => Suite::Gaussian,
            SuiteArg::Tails => Suite::Tails,
            SuiteArg::Conditioning => Suite::Conditioning,
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let report = run_suite(a.suite.into(), a.seed)?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    print_json(&report)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Check(failed.join(", ")))
    }
}

pub fn export_frame(frame: &FrameArgs, out: Option<&Path>) -> Result<(), Failure> {
    let text = frame_to_string(&frame.build(false)?);
    match out {
        Some(path) => AtomicWriter::default().write(path, text.as_bytes()),
        None => emit(&text),
    }
}
