//! Monte Carlo experiment engine.

pub mod config;
pub mod output;
pub mod overlay;
pub mod selftest;
pub mod sweep;
pub mod trial;

pub use config::{DetectorKind, ExperimentConfig, SyncMode};
pub use output::{metadata_path, to_csv, to_csv_string, write_csv, write_metadata};
pub use overlay::{average_ber, snr_at_ber, FadingDraws};
pub use selftest::{selftest, CheckResult};
pub use sweep::{
    analytic_curve, ber_ci_halfwidth, run_ber_sweep, run_combiner_sweep, run_distance_sweep,
    run_mse_sweep, Metric, MseParam, SweepResult, SweepRow,
};
pub use sweep::{count_errors, sync_error_moments, COMBINERS};
pub use trial::{run_trial, trial_rng, SyncTrial, TrialResult, TrialRunner};
