//! Multimode Gaussian states and the optical elements acting on them.
//!
//! States are stored as a mean vector and covariance matrix in `(x1, p1, x2, p2, ...)`
//! order. Gaussian unitaries act by symplectic congruence `V -> S V S^T`; losses are the
//! beam-splitter-with-vacuum channel `V -> X V X^T + Y`.

mod elements;
mod state;

pub use elements::{
    phase_rotation, pump_to_squeezing, symplectic_form, BeamSplitterSpec, LossChannel, SqueezerSpec, MAX_SQUEEZING,
};
pub use state::GaussianState;
