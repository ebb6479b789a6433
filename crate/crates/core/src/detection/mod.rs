//! Homodyne detectors and spectrum-analyzer emulation.
//!
//! Powers are linear and referenced to the shot noise of one detector at its reference LO
//! power and zero frequency: a vacuum input there reads exactly `1`.

mod analyzer;
mod trace;

pub use analyzer::{spectrum_analyzer_trace, AnalyzerSettings};
pub use trace::{subtract_dark_noise, subtract_dark_noise_with_floor, SpectrumTrace, DEFAULT_FLOOR_DB};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaussian::{GaussianState, LossChannel};
use crate::units::{to_linear, VACUUM_VARIANCE};

/// Balanced homodyne detector with a first-order electronic rolloff and flat dark noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    pub quantum_efficiency: f64,
    pub lo_power_mw: f64,
    pub reference_lo_power_mw: f64,
    /// Shot noise above dark noise at the reference LO power and low frequency.
    pub clearance_db: f64,
    /// -3 dB point of the first-order low-pass response.
    pub bandwidth_hz: f64,
}

impl Default for DetectorModel {
    /// Si photodiode detector at 946 nm: QE 0.994, 3.5 mW LO, 30 MHz, assumed 10 dB clearance.
    fn default() -> Self {
        Self {
            quantum_efficiency: 0.994,
            lo_power_mw: 3.5,
            reference_lo_power_mw: 3.5,
            clearance_db: 10.0,
            bandwidth_hz: 30e6,
        }
    }
}

impl DetectorModel {
    /// Field-level problems, as `(field, message)` pairs.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            v.push((
                "quantum_efficiency",
                format!("must be in [0, 1], got {}", self.quantum_efficiency),
            ));
        }
        if !(self.lo_power_mw.is_finite() && self.lo_power_mw > 0.0) {
            v.push(("lo_power_mw", format!("must be > 0, got {}", self.lo_power_mw)));
        }
        if !(self.reference_lo_power_mw.is_finite() && self.reference_lo_power_mw > 0.0) {
            v.push((
                "reference_lo_power_mw",
                format!("must be > 0, got {}", self.reference_lo_power_mw),
            ));
        }
        if !self.clearance_db.is_finite() {
            v.push(("clearance_db", format!("must be finite, got {}", self.clearance_db)));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            v.push(("bandwidth_hz", format!("must be > 0, got {}", self.bandwidth_hz)));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some((field, msg)) => Err(invalid(format!("detector.{field} {msg}"))),
        }
    }

    /// `|H(f)|^2` of the first-order low-pass.
    pub fn rolloff(&self, frequency_hz: f64) -> f64 {
        let u = frequency_hz / self.bandwidth_hz;
        1.0 / (1.0 + u * u)
    }

    /// Shot-noise scale from the LO power.
    pub fn lo_gain(&self) -> f64 {
        self.lo_power_mw / self.reference_lo_power_mw
    }

    /// Dark-noise power, frequency independent.
    pub fn dark_power(&self) -> f64 {
        to_linear(-self.clearance_db)
    }

    pub fn efficiency_channel(&self) -> Result<LossChannel> {
        LossChannel::new(self.quantum_efficiency)
    }
}

/// Optical (shot-noise-referenced) and electronic contributions to one measured bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedPower {
    pub signal: f64,
    pub dark: f64,
}

impl DetectedPower {
    pub fn total(&self) -> f64 {
        self.signal + self.dark
    }
}

/// Power read by one detector for a quadrature whose variance, normalized to vacuum, is
/// `true_variance_normalized`.
pub fn measured_relative_power(
    true_variance_normalized: f64,
    detector: &DetectorModel,
    frequency_hz: f64,
) -> Result<DetectedPower> {
    if !(true_variance_normalized >= 0.0) {
        return Err(invalid(format!(
            "normalized variance must be >= 0, got {true_variance_normalized}"
        )));
    }
    if !(frequency_hz >= 0.0) {
        return Err(invalid(format!("frequency must be >= 0, got {frequency_hz}")));
    }
    detector.validate()?;
    let eta = detector.quantum_efficiency;
    let optical = eta * true_variance_normalized + (1.0 - eta);
    Ok(DetectedPower {
        signal: optical * detector.rolloff(frequency_hz) * detector.lo_gain(),
        dark: detector.dark_power(),
    })
}

/// One homodyne arm feeding an electronic sum/difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneChannel {
    pub mode: usize,
    /// LO phase: `0` reads `x`, `pi/2` reads `p`.
    pub lo_phase: f64,
    /// Electronic weight, `+1` or `-1` for a sum or difference.
    pub weight: f64,
    pub detector: DetectorModel,
}

/// Power of the weighted electronic combination of several homodyne outputs.
///
/// Each arm loses `1 - QE` to vacuum, is scaled in amplitude by `|H(f)| sqrt(LO/LO_ref)`,
/// and adds its own dark noise. The result is normalized by the vacuum value of the same
/// combination at zero frequency and reference LO, so a single ideal arm reproduces
/// [`measured_relative_power`].
pub fn measured_combination_power(
    state: &GaussianState,
    channels: &[HomodyneChannel],
    frequency_hz: f64,
) -> Result<DetectedPower> {
    if channels.is_empty() {
        return Err(invalid("at least one homodyne channel is required"));
    }
    if !(frequency_hz >= 0.0) {
        return Err(invalid(format!("frequency must be >= 0, got {frequency_hz}")));
    }
    let mut detected = state.clone();
    for (i, ch) in channels.iter().enumerate() {
        ch.detector.validate()?;
        if channels[..i].iter().any(|c| c.mode == ch.mode) {
            return Err(invalid(format!("mode {} measured twice", ch.mode)));
        }
        detected = detected.apply_loss(ch.mode, &ch.detector.efficiency_channel()?)?;
    }
    let mut coeffs = DVector::zeros(2 * state.n_modes());
    let mut norm = 0.0;
    let mut dark = 0.0;
    for ch in channels {
        let amp = (ch.detector.rolloff(frequency_hz) * ch.detector.lo_gain()).sqrt();
        let (s, c) = ch.lo_phase.sin_cos();
        coeffs[2 * ch.mode] += ch.weight * amp * c;
        coeffs[2 * ch.mode + 1] += ch.weight * amp * s;
        let w2 = ch.weight * ch.weight * VACUUM_VARIANCE;
        norm += w2;
        dark += w2 * ch.detector.dark_power();
    }
    if norm == 0.0 {
        return Err(invalid("all channel weights are zero"));
    }
    let variance = (coeffs.transpose() * detected.cov() * &coeffs)[(0, 0)];
    Ok(DetectedPower {
        signal: variance / norm,
        dark: dark / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SqueezerSpec;
    use crate::units::to_db;

    fn ideal() -> DetectorModel {
        DetectorModel {
            quantum_efficiency: 1.0,
            ..DetectorModel::default()
        }
    }

    #[test]
    fn vacuum_reference() {
        let p = measured_relative_power(1.0, &ideal(), 0.0).unwrap();
        assert_eq!(p.signal, 1.0);
        assert!((p.dark - 0.1).abs() < 1e-15);
    }

    #[test]
    fn three_db_point() {
        let d = ideal();
        let lo = measured_relative_power(1.0, &d, 0.0).unwrap().signal;
        let hi = measured_relative_power(1.0, &d, d.bandwidth_hz).unwrap().signal;
        assert!((hi / lo - 0.5).abs() < 1e-15);
    }

    #[test]
    fn squeezed_level_through_detector() {
        let d = DetectorModel::default();
        let f = 1e6;
        let p = measured_relative_power(0.84, &d, f).unwrap();
        let optical: f64 = 0.994 * 0.84 + 0.006;
        assert!((optical - 0.840_96).abs() < 1e-12);
        assert!((p.signal - optical * d.rolloff(f)).abs() < 1e-15);
        assert!((to_db(optical) + 0.7522).abs() < 1e-3);
    }

    #[test]
    fn errors() {
        assert!(measured_relative_power(-0.1, &ideal(), 0.0).is_err());
        assert!(measured_relative_power(1.0, &ideal(), -1.0).is_err());
        let bad = DetectorModel {
            bandwidth_hz: 0.0,
            ..ideal()
        };
        assert!(measured_relative_power(1.0, &bad, 0.0).is_err());
        assert_eq!(bad.violations().len(), 1);
    }

    #[test]
    fn lo_power_scales_shot_noise() {
        let d = DetectorModel {
            lo_power_mw: 7.0,
            ..ideal()
        };
        let p = measured_relative_power(1.0, &d, 0.0).unwrap();
        assert!((p.signal - 2.0).abs() < 1e-15);
        assert!((p.dark - 0.1).abs() < 1e-15);
    }

    #[test]
    fn clearance_degrades_with_rolloff() {
        let d = DetectorModel::default();
        for f in [0.0, 5e6, 30e6, 60e6] {
            let p = measured_relative_power(1.0, &d, f).unwrap();
            let p0 = measured_relative_power(1.0, &d, 0.0).unwrap();
            let ratio = (p.signal / p.dark) / (p0.signal / p0.dark);
            assert!((ratio - d.rolloff(f)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_channel_matches_scalar_model() {
        let d = DetectorModel::default();
        let sq = GaussianState::vacuum(1)
            .unwrap()
            .apply_squeezer(0, &SqueezerSpec::from_variance_ratio(0.7, 0.0).unwrap())
            .unwrap();
        let ch = HomodyneChannel {
            mode: 0,
            lo_phase: std::f64::consts::FRAC_PI_2,
            weight: 1.0,
            detector: d,
        };
        for f in [0.0, 1e6, 25e6] {
            let a = measured_combination_power(&sq, &[ch], f).unwrap();
            let b = measured_relative_power(0.7, &d, f).unwrap();
            assert!((a.signal - b.signal).abs() < 1e-12);
            assert!((a.dark - b.dark).abs() < 1e-15);
        }
    }

    #[test]
    fn two_vacuum_arms_read_unity() {
        let vac = GaussianState::vacuum(2).unwrap();
        let d = ideal();
        let chans = [
            HomodyneChannel {
                mode: 0,
                lo_phase: 0.0,
                weight: 1.0,
                detector: d,
            },
            HomodyneChannel {
                mode: 1,
                lo_phase: 0.0,
                weight: -1.0,
                detector: d,
            },
        ];
        let p = measured_combination_power(&vac, &chans, 0.0).unwrap();
        assert!((p.signal - 1.0).abs() < 1e-15);
        assert!((p.dark - 0.1).abs() < 1e-15);
        assert!(measured_combination_power(&vac, &[chans[0], chans[0]], 0.0).is_err());
        assert!(measured_combination_power(&vac, &[], 0.0).is_err());
    }
}
