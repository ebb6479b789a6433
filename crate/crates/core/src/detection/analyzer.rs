use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::trace::SpectrumTrace;
use crate::error::{invalid, Result};
use crate::par::Execution;

/// Simpson intervals per RBW window.
const WINDOW_INTERVALS: usize = 64;

/// Sweep settings of the emulated spectrum analyzer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSettings {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub rbw_hz: f64,
    pub vbw_hz: f64,
    pub n_averages: u32,
    pub seed: u64,
    /// When false the trace is the noiseless expectation.
    pub jitter: bool,
}

impl AnalyzerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rbw_hz > 0.0) || !(self.vbw_hz > 0.0) {
            return Err(invalid(format!(
                "rbw and vbw must be > 0, got {} and {}",
                self.rbw_hz, self.vbw_hz
            )));
        }
        if !(self.start_hz >= 0.0) || !(self.stop_hz > self.start_hz) {
            return Err(invalid(format!(
                "span must satisfy 0 <= start < stop, got [{}, {}]",
                self.start_hz, self.stop_hz
            )));
        }
        if self.rbw_hz > self.stop_hz - self.start_hz {
            return Err(invalid(format!(
                "rbw {} exceeds the span width {}",
                self.rbw_hz,
                self.stop_hz - self.start_hz
            )));
        }
        if self.n_averages == 0 {
            return Err(invalid("n_averages must be >= 1"));
        }
        Ok(())
    }

    /// Bin centers, one per RBW, starting half an RBW above `start_hz`.
    pub fn bin_centers(&self) -> Vec<f64> {
        let n = ((self.stop_hz - self.start_hz) / self.rbw_hz + 1e-9).floor() as usize;
        (0..n).map(|k| self.start_hz + (k as f64 + 0.5) * self.rbw_hz).collect()
    }

    /// Log-variance of the multiplicative jitter of a single sweep: `min(VBW/RBW, 1)`.
    pub fn sweep_log_variance(&self) -> f64 {
        (self.vbw_hz / self.rbw_hz).min(1.0)
    }

    /// Relative standard deviation of one averaged bin.
    pub fn predicted_relative_std(&self) -> f64 {
        if !self.jitter {
            return 0.0;
        }
        (self.sweep_log_variance().exp_m1() / self.n_averages as f64).sqrt()
    }
}

/// Emulates a swept analyzer reading of a power spectral density `model` (linear, per Hz).
///
/// Each bin integrates the model over a rectangular RBW window. Every sweep multiplies the
/// bin by unit-mean lognormal jitter with log-variance `VBW/RBW`, and the trace is the
/// mean of `n_averages` sweeps. Bin `k` draws from stream `k` of a ChaCha generator seeded
/// with `seed`, so the trace does not depend on the execution mode.
pub fn spectrum_analyzer_trace<F>(model: F, settings: &AnalyzerSettings, exec: Execution) -> Result<SpectrumTrace>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    settings.validate()?;
    let centers = settings.bin_centers();
    let sigma2 = settings.sweep_log_variance();
    let sigma = sigma2.sqrt();
    let rbw = settings.rbw_hz;
    let values: Vec<f64> = exec.map_range(centers.len(), |k| {
        let lo = centers[k] - 0.5 * rbw;
        let expected = simpson(&model, lo, lo + rbw, WINDOW_INTERVALS);
        if !settings.jitter {
            return expected;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(k as u64);
        let mean_factor: f64 = (0..settings.n_averages)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (sigma * z - 0.5 * sigma2).exp()
            })
            .sum::<f64>()
            / settings.n_averages as f64;
        expected * mean_factor
    });
    if let Some(k) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!(
            "power model must be positive and finite; bin {k} at {} Hz integrates to {}",
            centers[k], values[k]
        )));
    }
    SpectrumTrace::from_linear(
        centers,
        &values,
        settings.rbw_hz,
        settings.vbw_hz,
        settings.n_averages,
        false,
    )
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
