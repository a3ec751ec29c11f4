//! Seeded Monte Carlo harness and the empirical checks.
//!
//! Every random quantity is drawn from a ChaCha stream whose seed is a hash
//! of the master seed and the job coordinates, so results do not depend on
//! how rayon schedules the jobs.

mod checks;
mod config;
mod harness;
mod seeds;
mod verify;

pub use checks::{
    binomial_se, conditioning_threshold, default_stoc_epsilon, default_tail_epsilon, gaussian_coherence_check,
    noise_proxy_tail_check, stoc_deviations, stoc_violation_estimate, submatrix_conditioning_estimate,
    submatrix_deviation, tail_bound, ConditioningEstimate, GaussianCoherenceCheck, StocEstimate, TailCheck,
};
pub use config::{
    coherence_for_threshold, Algorithm, ConstantSpec, ExperimentConfig, FrameSpec, NamedConstant, PhaseModeConfig,
    ThresholdConfig,
};
pub use harness::{
    records_to_csv, run_prepared, run_recovery_sweep, run_sweep, selection_metrics, smooth3, smoothed_non_increasing,
    ExperimentSummary, PreparedExperiment, SweepResult, TrialRecord, RECOVERY_TOL,
};
pub use seeds::{derive_seed, splitmix64};
pub use verify::{run_suite, CheckOutcome, Suite, VerifyReport};
