//! Gaussian continuous-variable simulator for broadband EPR beams.
//!
//! Quadrature conventions used throughout the crate:
//!
//! * `a = x + i p` with `[x, p] = i/2`, so every vacuum quadrature has variance `1/4`.
//! * Phase-space vectors are ordered `(x1, p1, x2, p2, ...)`.
//! * A squeezer with angle `0` squeezes `p` and anti-squeezes `x`; angle `pi/2` swaps the two.
//!
//! The crate is organised by stage of the experiment: [`gaussian`] holds states and
//! optical elements, [`inseparability`] the EPR sum and loss inference, [`detection`] the
//! homodyne detector and spectrum analyzer model, [`phasematch`] the quasi-phase-matching
//! bandwidth, [`oracle`] the Monte-Carlo cross-check and [`scenario`] ties them into the
//! two-source experiment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod gaussian;
pub mod inseparability;
pub mod oracle;
pub mod par;
pub mod phasematch;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
pub use gaussian::{BeamSplitterSpec, GaussianState, LossChannel, SqueezerSpec};
pub use inseparability::EprResult;
pub use par::Execution;
