//! The EPR inseparability sum and loss inference.
//!
//! `Delta_EPR = Var(x_A - x_B) + Var(p_A + p_B)` in `hbar = 1/2` units. Two vacua give
//! `1/2 + 1/2 = 1`, so the raw sum is already normalized to the separability threshold;
//! [`TWO_VACUA`] is the only normalization constant in the crate.

use crate::detection::{measured_combination_power, DetectedPower, DetectorModel};
use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianState;
use crate::par::Execution;
use crate::scenario::{EprQuadrature, ScenarioConfig};
use crate::units::{to_db, to_linear};

/// `Var(x_A - x_B)` of two vacua.
pub const TWO_VACUA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprResult {
    pub var_x_minus: f64,
    pub var_p_plus: f64,
    pub delta_epr: f64,
    pub entangled: bool,
}

impl EprResult {
    pub fn from_variances(var_x_minus: f64, var_p_plus: f64) -> Self {
        let delta_epr = (var_x_minus + var_p_plus) / (2.0 * TWO_VACUA);
        Self {
            var_x_minus,
            var_p_plus,
            delta_epr,
            entangled: delta_epr < 1.0,
        }
    }

    /// From variances given relative to the vacuum value of each combination.
    pub fn from_vacuum_ratios(x_ratio: f64, p_ratio: f64) -> Self {
        Self::from_variances(TWO_VACUA * x_ratio, TWO_VACUA * p_ratio)
    }
}

/// Inseparability sum for modes `mode_a` (A) and `mode_b` (B).
pub fn delta_epr(state: &GaussianState, mode_a: usize, mode_b: usize) -> Result<EprResult> {
    if mode_a == mode_b {
        return Err(invalid(format!(
            "EPR criterion needs two distinct modes, got {mode_a} twice"
        )));
    }
    let n = state.n_modes();
    if mode_a >= n || mode_b >= n {
        return Err(invalid(format!(
            "modes ({mode_a}, {mode_b}) out of range for {n} modes"
        )));
    }
    let vx = state.quadrature_variance(&state.pair_coeffs(mode_a, 1.0, mode_b, -1.0, 0))?;
    let vp = state.quadrature_variance(&state.pair_coeffs(mode_a, 1.0, mode_b, 1.0, 1))?;
    Ok(EprResult::from_variances(vx, vp))
}

/// Squeezing (dB) a state must have had before a loss `eta` to read `measured_db` after it.
pub fn infer_direct_squeezing(measured_relative_noise_db: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("eta must be in (0, 1], got {eta}")));
    }
    if !measured_relative_noise_db.is_finite() {
        return Err(invalid(format!(
            "measured noise must be finite, got {measured_relative_noise_db}"
        )));
    }
    let ratio = to_linear(measured_relative_noise_db);
    let floor = 1.0 - eta;
    if ratio <= floor {
        return Err(Error::Unphysical { ratio, floor, eta });
    }
    Ok(to_db((ratio - floor) / eta))
}

/// Whether electronic dark noise stays in the spectrum or is calibrated out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DarkNoise {
    Included,
    Subtracted,
}

fn vacuum_ratio(meas: DetectedPower, vac: DetectedPower, dark: DarkNoise) -> f64 {
    match dark {
        DarkNoise::Included => meas.total() / vac.total(),
        DarkNoise::Subtracted => meas.signal / vac.signal,
    }
}

/// EPR sum for one frequency bin, as read through the scenario's detectors.
pub fn epr_at_frequency(
    state: &GaussianState,
    detectors: &[DetectorModel],
    scenario: &ScenarioConfig,
    frequency_hz: f64,
    dark: DarkNoise,
) -> Result<EprResult> {
    let vacuum = GaussianState::vacuum(state.n_modes())?;
    let mut ratios = [0.0; 2];
    for (slot, q) in [EprQuadrature::XMinus, EprQuadrature::PPlus].into_iter().enumerate() {
        let channels = scenario.epr_channels(q, detectors);
        let meas = measured_combination_power(state, &channels, frequency_hz)?;
        let vac = measured_combination_power(&vacuum, &channels, frequency_hz)?;
        ratios[slot] = vacuum_ratio(meas, vac, dark);
    }
    Ok(EprResult::from_vacuum_ratios(ratios[0], ratios[1]))
}

/// Noiseless EPR spectrum of a scenario, one result per frequency.
pub fn epr_spectrum(
    scenario: &ScenarioConfig,
    frequencies: &[f64],
    dark: DarkNoise,
    exec: Execution,
) -> Result<Vec<(f64, EprResult)>> {
    if frequencies.is_empty() {
        return Err(invalid("frequency list is empty"));
    }
    if frequencies.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(invalid("frequencies must be positive and finite"));
    }
    if frequencies.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("frequencies must be sorted ascending"));
    }
    let state = scenario.propagated_state()?;
    exec.map(frequencies, |&f| {
        epr_at_frequency(&state, &scenario.detectors, scenario, f, dark).map(|r| (f, r))
    })
    .into_iter()
    .collect()
}
