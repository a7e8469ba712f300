//! Laser phase noise in OFDM links that cancel the common phase with an RF
//! pilot tone.
//!
//! Chromatic dispersion delays each subcarrier relative to the pilot, so the
//! cancellation leaves a residual phase error that grows with fiber length
//! and with the bin's distance from the pilot. [`analytic`] gives the
//! closed-form variances, BER floors and reach; [`simkernel`] simulates the
//! same link sample by sample to check them.

pub mod analytic;
pub mod constellation;
pub mod error;
pub mod model;
pub mod simkernel;

pub use error::{Error, Result};
pub use model::{
    BerConvention, LinkSpec, ModulationFamily, ModulationScheme, SystemKind, SystemParams,
    VarianceMode,
};
