use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::detection::SpectrumTrace;
use crate::error::{invalid, Error, Result};
use crate::par::Execution;

/// Shortest accepted record, `2^16` samples.
pub const MIN_RECORD_LEN: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdSettings {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    /// Welch segment length; segments overlap by half and use a Hann window.
    pub segment_len: usize,
    pub seed: u64,
}

/// Welch estimate of a synthesized record.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    /// One-sided PSD without the DC and Nyquist bins, in dB per Hz.
    pub trace: SpectrumTrace,
    /// Same bins, linear.
    pub psd: Vec<f64>,
    /// Standard error of each bin from the spread of the segment periodograms.
    pub std_error: Vec<f64>,
    pub n_segments: usize,
    /// Sample variance of the synthesized record.
    pub time_variance: f64,
    /// `sum(PSD) df` over all one-sided bins including DC and Nyquist.
    pub total_power: f64,
}

/// Synthesizes zero-mean Gaussian noise with one-sided PSD `model(f)` (per Hz) by shaping
/// white noise in the frequency domain, then estimates its PSD with Welch's method.
pub fn timeseries_psd<F>(model: F, settings: &PsdSettings, exec: Execution) -> Result<PsdEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    let fs = settings.sample_rate_hz;
    if !(fs > 0.0) || !(settings.duration_s > 0.0) {
        return Err(invalid("duration and sample rate must be > 0"));
    }
    let n = (settings.duration_s * fs).round() as usize;
    if n < MIN_RECORD_LEN {
        return Err(Error::InsufficientLength {
            got: n,
            need: MIN_RECORD_LEN,
        });
    }
    let m = settings.segment_len;
    if m < 8 || !m.is_multiple_of(2) || m > n {
        return Err(invalid(format!(
            "segment length must be even, >= 8 and <= {n}, got {m}"
        )));
    }

    let mut planner = FftPlanner::<f64>::new();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|_| Complex::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    // White noise of unit variance has one-sided PSD 2/fs.
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * fs / n as f64;
        let s = model(f);
        if !(s >= 0.0) {
            return Err(invalid(format!("spectral model must be >= 0, got {s} at {f} Hz")));
        }
        *c *= (s * fs / 2.0).sqrt();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();

    let mean = x.iter().sum::<f64>() / n as f64;
    let time_variance = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);

    let window: Vec<f64> = (0..m)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / m as f64).cos())
        .collect();
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let hop = m / 2;
    let n_segments = (n - m) / hop + 1;
    let fft = planner.plan_fft_forward(m);
    let half = m / 2;
    let periodograms: Vec<Vec<f64>> = exec.map_range(n_segments, |s| {
        let start = s * hop;
        let mut seg: Vec<Complex<f64>> = x[start..start + m]
            .iter()
            .zip(&window)
            .map(|(v, w)| Complex::new(v * w, 0.0))
            .collect();
        fft.process(&mut seg);
        (0..=half)
            .map(|k| {
                let p = seg[k].norm_sqr() / (fs * w2);
                if k == 0 || k == half {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect()
    });

    let k_seg = n_segments as f64;
    let mut avg = vec![0.0; half + 1];
    for p in &periodograms {
        for (a, v) in avg.iter_mut().zip(p) {
            *a += v;
        }
    }
    avg.iter_mut().for_each(|a| *a /= k_seg);
    let mut spread = vec![0.0; half + 1];
    for p in &periodograms {
        for ((s, v), a) in spread.iter_mut().zip(p).zip(&avg) {
            *s += (v - a).powi(2);
        }
    }
    // Adjacent half-overlapping segments are correlated by rho^2.
    let rho: f64 = window[..hop]
        .iter()
        .zip(&window[hop..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / w2;
    let inflation = 1.0 + 2.0 * rho * rho;
    let std_error: Vec<f64> = spread
        .iter()
        .map(|s| (s / (k_seg - 1.0).max(1.0) * inflation / k_seg).sqrt())
        .collect();

    let df = fs / m as f64;
    let total_power = avg.iter().sum::<f64>() * df;
    let freqs: Vec<f64> = (1..half).map(|k| k as f64 * df).collect();
    let psd = avg[1..half].to_vec();
    let enbw = fs * w2 / window.iter().sum::<f64>().powi(2);
    let trace = SpectrumTrace::from_linear(
        freqs,
        &psd,
        enbw,
        enbw,
        u32::try_from(n_segments).unwrap_or(u32::MAX),
        false,
    )?;
    Ok(PsdEstimate {
        trace,
        psd,
        std_error: std_error[1..half].to_vec(),
        n_segments,
        time_variance,
        total_power,
    })
}
