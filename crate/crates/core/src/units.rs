//! Decibel helpers and physical constants.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Quadrature variance of the vacuum with `hbar = 1/2`.
pub const VACUUM_VARIANCE: f64 = 0.25;

#[inline]
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[inline]
pub fn to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Squeezing expressed in dB of noise relative to vacuum, `10 log10(e^{-2r})`.
pub fn squeezing_db(r: f64) -> f64 {
    to_db((-2.0 * r).exp())
}
