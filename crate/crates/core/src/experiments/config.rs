use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{read_frame, worst_case_coherence, Frame, FrameKind};
use crate::selection::{auto_2t, DEFAULT_THRESHOLD_C};
use crate::signals::PhaseMode;

/// Design matrix used by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameSpec {
    /// Gabor frame from the Alltop seed, `p = n^2`.
    Alltop { n: usize },
    /// Column-normalized Gaussian design.
    Gaussian { n: usize, p: usize, seed: u64 },
    /// Frame file in the text format of [`crate::frames::write_frame`].
    File { path: PathBuf },
}

impl FrameSpec {
    pub fn build(&self) -> Result<Frame> {
        match self {
            FrameSpec::Alltop { n } => Frame::alltop(*n),
            FrameSpec::Gaussian { n, p, seed } => Frame::gaussian(*n, *p, *seed, true),
            FrameSpec::File { path } => read_frame(path),
        }
    }
}

/// Worst-case coherence used to set thresholds. Alltop frames use the
/// closed form `1/sqrt(n)`; anything else is computed from the frame.
pub fn coherence_for_threshold(frame: &Frame) -> f64 {
    match frame.kind() {
        FrameKind::Gabor if is_alltop(frame) => 1.0 / (frame.rows() as f64).sqrt(),
        _ => worst_case_coherence(frame),
    }
}

fn is_alltop(frame: &Frame) -> bool {
    let n = frame.rows();
    match (frame.seed(), crate::frames::alltop_seed(n)) {
        (Some(g), Ok(a)) => g.iter().zip(&a).all(|(x, y)| (x - y).norm() < 1e-12),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ost,
    Sost,
    OstRecover,
}

/// Either a number or the string `"auto2t"` (meaning `c = 2t`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Value(f64),
    Named(NamedConstant),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedConstant {
    Auto2t,
}

impl ConstantSpec {
    pub fn resolve(&self, t: f64) -> f64 {
        match self {
            ConstantSpec::Value(c) => *c,
            ConstantSpec::Named(NamedConstant::Auto2t) => auto_2t(t),
        }
    }
}

impl Default for ConstantSpec {
    fn default() -> Self {
        ConstantSpec::Value(DEFAULT_THRESHOLD_C)
    }
}

fn default_t() -> f64 {
    (2f64.sqrt() - 1.0) / 2f64.sqrt()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub c: ConstantSpec,
    /// Multiplier applied to the computed threshold.
    #[serde(default = "one")]
    pub scale: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            t: default_t(),
            c: ConstantSpec::default(),
            scale: 1.0,
        }
    }
}

fn default_phase() -> PhaseModeConfig {
    PhaseModeConfig::UniformPhase
}

/// Phase convention for generated signals; per-trial phase seeds are derived
/// from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModeConfig {
    PositiveReal,
    UniformPhase,
}

impl PhaseModeConfig {
    pub(crate) fn with_seed(self, seed: u64) -> PhaseMode {
        match self {
            PhaseModeConfig::PositiveReal => PhaseMode::PositiveReal,
            PhaseModeConfig::UniformPhase => PhaseMode::UniformPhase { seed },
        }
    }
}

/// A Monte Carlo sweep, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub frame: FrameSpec,
    pub k_values: Vec<usize>,
    #[serde(default = "one")]
    pub mar: f64,
    /// Required when `sigma2 > 0`.
    #[serde(default)]
    pub snr_db: Option<f64>,
    pub sigma2: f64,
    #[serde(default)]
    pub threshold: ThresholdConfig,
    pub trials: usize,
    pub master_seed: u64,
    pub algorithm: Algorithm,
    #[serde(default = "default_phase")]
    pub phase_mode: PhaseModeConfig,
    /// Overrides the coherence used in threshold formulas.
    #[serde(default)]
    pub mu: Option<f64>,
    /// Record selector wall time. Off by default so outputs are reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("experiment config", e.to_string()))
    }

    pub fn snr(&self) -> Option<f64> {
        self.snr_db.map(|db| 10f64.powf(db / 10.0))
    }

    /// Checks everything that can be checked without building the frame.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.k_values.is_empty() {
            return Err(Error::invalid("k_values must not be empty"));
        }
        if self.k_values.contains(&0) {
            return Err(Error::invalid("every k must be at least 1"));
        }
        if !(self.mar > 0.0 && self.mar <= 1.0) {
            return Err(Error::invalid(format!("mar must lie in (0, 1], got {}", self.mar)));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 must be nonnegative, got {}", self.sigma2)));
        }
        if self.sigma2 > 0.0 {
            match self.snr_db {
                Some(db) if db.is_finite() => {}
                _ => return Err(Error::invalid("snr_db is required when sigma2 > 0")),
            }
        }
        let th = &self.threshold;
        if !(th.scale >= 0.0 && th.scale.is_finite()) {
            return Err(Error::invalid(format!("threshold scale must be nonnegative, got {}", th.scale)));
        }
        match self.algorithm {
            Algorithm::Ost => {
                if !(th.t > 0.0 && th.t < 1.0) {
                    return Err(Error::invalid(format!("t must lie in (0, 1), got {}", th.t)));
                }
                if self.sigma2 == 0.0 {
                    return Err(Error::invalid("the model-selection threshold needs sigma2 > 0"));
                }
            }
            Algorithm::OstRecover => {
                if self.sigma2 != 0.0 {
                    return Err(Error::invalid("recovery sweeps are noiseless: set sigma2 to 0"));
                }
            }
            Algorithm::Sost => {}
        }
        if th.c.resolve(th.t) < 0.0 {
            return Err(Error::invalid("threshold constant must be nonnegative"));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::invalid(format!("mu must be nonnegative, got {mu}")));
            }
        }
        match &self.frame {
            FrameSpec::Alltop { n } if *n < 5 => Err(Error::invalid("Alltop frames need a prime n >= 5")),
            FrameSpec::Gaussian { n, p, .. } if *n == 0 || *p == 0 => {
                Err(Error::invalid("Gaussian frame dimensions must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Validation against the built frame.
    pub fn validate_for(&self, frame: &Frame) -> Result<()> {
        self.validate()?;
        let p = frame.cols();
        if let Some(&k) = self.k_values.iter().find(|&&k| k > p) {
            return Err(Error::invalid(format!("k = {k} exceeds p = {p}")));
        }
        Ok(())
    }
}
