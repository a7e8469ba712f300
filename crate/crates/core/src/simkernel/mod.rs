//! Time-domain Monte-Carlo model of the pilot-tone OFDM receiver.
//!
//! A single Wiener phase path is shared by the pilot and every bin; bin `k`
//! sees it shifted by its dispersion delay `d_k`. Frequency offsets between
//! bins, additive noise and the cyclic prefix are not modeled.

mod estimate;
mod ofdm;
mod wiener;

pub use estimate::{
    estimate_cpe_variance, estimate_filtered_variance, run_trials, BinMetrics, Estimate,
    McSettings, TrialMetrics, DEFAULT_STEPS_PER_SYMBOL,
};
pub use ofdm::{bin_delays, demod_bin, pilot_cancel, synthesize_received, ReceivedSymbol};
pub use wiener::{trial_rng, wiener_path, WienerPath};
