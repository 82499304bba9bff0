//! Link-level simulation and closed-form analysis of ambient backscatter
//! communication over OFDM carriers.
//!
//! The receiver cancels the direct-link interference by differencing the
//! cyclic prefix against the tail of each OFDM symbol, then detects the
//! backscatter bit with an energy test.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bd;
pub mod channel;
pub mod combining;
pub mod detection;
pub mod error;
pub mod harness;
pub mod ofdm;
pub mod sync;

pub use analysis::{
    bd_rate, ber_approximations, ber_closed_form, db_to_linear, statistic_moments, linear_to_db,
    min_ber_multi, min_ber_single, q_function, BerBreakdown, Moments,
};
pub use bd::{backscatter, bd_waveform, estimate_dh_blind, BdConfig, ProtocolSchedule, Waveform};
pub use channel::{
    apply_channel, derive_geometry, pathloss_gain, sample_rayleigh_cir, ChannelGeometry,
    ChannelProfile, ChannelSet, Cir, PathProfile,
};
pub use combining::{
    combine_statistics, conventional_weights, multiantenna_threshold, optimal_weights,
    CombinerScheme, CombinerWeights,
};
pub use detection::{
    benchmark_energy_detect, difference_signal, ml_detect, optimal_threshold, test_statistic,
    DetectorConfig, EnergyDetector, LinkStats,
};
pub use error::{Error, Result};
pub use ofdm::{cp_window_equal, cscg, generate_ofdm_frame, ComplexSignal, OfdmConfig, OfdmSource};
pub use sync::{
    estimate_d_min, estimate_l, estimate_sigma_u2, q_metric, q_metric_moments, SyncEstimates,
};
