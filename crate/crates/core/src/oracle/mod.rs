//! Monte-Carlo ground truth for the analytic pipeline.
//!
//! Two separate facilities:
//!
//! * sideband sampling ([`sample_state`], [`estimate_delta_epr`]): each draw is one
//!   measurement of every quadrature of the sideband mode at the analysis frequency;
//! * time-series synthesis ([`timeseries_psd`]): a shaped noise record whose Welch
//!   periodogram is compared with analytic spectra.

mod dump;
mod psd;
mod sampling;

pub use dump::{read_samples, write_samples, DUMP_MAGIC};
pub use psd::{timeseries_psd, PsdEstimate, PsdSettings, MIN_RECORD_LEN};
pub use sampling::{
    estimate_delta_epr, estimate_variance, sample_state, sample_state_with, Estimate, SampleBatch, CHUNK_SAMPLES,
};
