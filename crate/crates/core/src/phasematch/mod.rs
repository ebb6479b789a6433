//! First-order quasi-phase matching in a periodically poled waveguide.
//!
//! Bulk material dispersion only; the poling period is solved so the degenerate point is
//! exactly phase matched. The gain profile of the parametric process is
//! `sinc^2(dk L / 2)`.

mod sellmeier;

pub use sellmeier::Sellmeier;

use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::par::Execution;
use crate::units::SPEED_OF_LIGHT;

/// Waveguide parameters relevant to phase matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpmWaveguide {
    length_m: f64,
    poling_period_m: f64,
    temperature_k: f64,
    sellmeier: Sellmeier,
}

impl QpmWaveguide {
    pub fn new(length_m: f64, poling_period_m: f64, temperature_k: f64, sellmeier: Sellmeier) -> Result<Self> {
        if !(length_m > 0.0 && length_m.is_finite()) {
            return Err(invalid(format!("waveguide length must be > 0, got {length_m}")));
        }
        if !(poling_period_m > 0.0 && poling_period_m.is_finite()) {
            return Err(invalid(format!("poling period must be > 0, got {poling_period_m}")));
        }
        if !(273.0..=473.0).contains(&temperature_k) {
            return Err(Error::OutOfRange {
                quantity: "temperature (K)",
                value: temperature_k,
                min: 273.0,
                max: 473.0,
            });
        }
        Ok(Self {
            length_m,
            poling_period_m,
            temperature_k,
            sellmeier,
        })
    }

    /// Waveguide poled for degenerate down-conversion of `pump_wavelength_m`.
    pub fn degenerate(length_m: f64, pump_wavelength_m: f64, temperature_k: f64, sellmeier: Sellmeier) -> Result<Self> {
        let period = qpm_period_with(pump_wavelength_m, 2.0 * pump_wavelength_m, temperature_k, &sellmeier)?;
        Self::new(length_m, period, temperature_k, sellmeier)
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    pub fn poling_period_m(&self) -> f64 {
        self.poling_period_m
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn sellmeier(&self) -> &Sellmeier {
        &self.sellmeier
    }

    pub fn with_length(&self, length_m: f64) -> Result<Self> {
        Self::new(length_m, self.poling_period_m, self.temperature_k, self.sellmeier)
    }

    fn wavenumber(&self, wavelength_m: f64) -> Result<f64> {
        Ok(TAU * self.sellmeier.index(wavelength_m, self.temperature_k)? / wavelength_m)
    }
}

/// Extraordinary index of the default congruent LiNbO3 fit.
pub fn refractive_index(wavelength_m: f64, temperature_k: f64, sellmeier: &Sellmeier) -> Result<f64> {
    sellmeier.index(wavelength_m, temperature_k)
}

/// Idler wavelength fixed by energy conservation, `1/l_i = 1/l_p - 1/l_s`.
pub fn idler_wavelength(signal_wavelength_m: f64, pump_wavelength_m: f64) -> Result<f64> {
    let inv = 1.0 / pump_wavelength_m - 1.0 / signal_wavelength_m;
    if !(inv > 0.0) {
        return Err(invalid(format!(
            "idler frequency must be positive: signal {signal_wavelength_m} m is not longer than pump {pump_wavelength_m} m"
        )));
    }
    Ok(1.0 / inv)
}

/// Phase mismatch `k_p - k_s - k_i - 2 pi / Lambda` in 1/m.
pub fn delta_k(signal_wavelength_m: f64, pump_wavelength_m: f64, waveguide: &QpmWaveguide) -> Result<f64> {
    let idler = idler_wavelength(signal_wavelength_m, pump_wavelength_m)?;
    Ok(waveguide.wavenumber(pump_wavelength_m)?
        - waveguide.wavenumber(signal_wavelength_m)?
        - waveguide.wavenumber(idler)?
        - TAU / waveguide.poling_period_m)
}

/// Poling period that phase matches degenerate down-conversion, default Sellmeier set.
pub fn qpm_period(pump_wavelength_m: f64, degenerate_wavelength_m: f64, temperature_k: f64) -> Result<f64> {
    qpm_period_with(
        pump_wavelength_m,
        degenerate_wavelength_m,
        temperature_k,
        &Sellmeier::default(),
    )
}

/// Bracketed bisection on `dk(Lambda)` over 0.1 um .. 1 mm, to 1e-12 m.
pub fn qpm_period_with(
    pump_wavelength_m: f64,
    degenerate_wavelength_m: f64,
    temperature_k: f64,
    sellmeier: &Sellmeier,
) -> Result<f64> {
    let idler = idler_wavelength(degenerate_wavelength_m, pump_wavelength_m)?;
    let k = |l: f64| -> Result<f64> { Ok(TAU * sellmeier.index(l, temperature_k)? / l) };
    let material = k(pump_wavelength_m)? - k(degenerate_wavelength_m)? - k(idler)?;
    let mismatch = |period: f64| material - TAU / period;

    let (mut lo, mut hi) = (1e-7, 1e-3);
    let (f_lo, f_hi) = (mismatch(lo), mismatch(hi));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSolution(format!(
            "phase mismatch has no sign change for poling periods in [{lo}, {hi}] m"
        )));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mismatch(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `sin(x)/x` with the removable singularity handled by its series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Normalized parametric gain versus signal wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct PmCurve {
    pub signal_wavelengths: Vec<f64>,
    pub efficiency: Vec<f64>,
    /// Distance between the half-maximum wavelengths.
    pub fwhm_wavelength: f64,
    /// `c * fwhm_wavelength / lambda_0^2` at the degenerate wavelength.
    pub fwhm_frequency: f64,
    /// Difference of optical frequencies at the two half-maximum wavelengths.
    pub fwhm_frequency_exact: f64,
    pub half_max_wavelengths: (f64, f64),
}

impl PmCurve {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("signal_wavelength_m,efficiency\n");
        for (l, e) in self.signal_wavelengths.iter().zip(&self.efficiency) {
            let _ = writeln!(s, "{l},{e}");
        }
        s
    }
}

/// Wavelength FWHM to frequency FWHM in the narrowband approximation.
pub fn wavelength_to_frequency_width(delta_lambda_m: f64, center_m: f64) -> f64 {
    SPEED_OF_LIGHT * delta_lambda_m / (center_m * center_m)
}

fn efficiency_at(waveguide: &QpmWaveguide, pump: f64, signal: f64) -> Result<f64> {
    let x = delta_k(signal, pump, waveguide)? * waveguide.length_m / 2.0;
    Ok(sinc(x).powi(2))
}

/// Gain curve over `[2 pump - span/2, 2 pump + span/2]` with its half-maximum points.
pub fn pm_curve(
    waveguide: &QpmWaveguide,
    pump_wavelength_m: f64,
    span_m: f64,
    n_points: usize,
    exec: Execution,
) -> Result<PmCurve> {
    if n_points < 101 {
        return Err(invalid(format!("pm_curve needs at least 101 points, got {n_points}")));
    }
    if !(span_m > 0.0) || span_m >= 2.0 * pump_wavelength_m {
        return Err(invalid(format!("span must be in (0, 2 pump), got {span_m}")));
    }
    let center = 2.0 * pump_wavelength_m;
    let start = center - 0.5 * span_m;
    let step = span_m / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points).map(|i| start + step * i as f64).collect();
    let efficiency = exec
        .map(&grid, |&l| efficiency_at(waveguide, pump_wavelength_m, l))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    let peak = efficiency
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let half = 0.5 * efficiency[peak];
    let refine = |inside: f64, outside: f64| -> Result<f64> {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if efficiency_at(waveguide, pump_wavelength_m, m)? >= half {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let right = (peak + 1..n_points).find(|&i| efficiency[i] < half);
    let left = (0..peak).rev().find(|&i| efficiency[i] < half);
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::SpanTooNarrow(format!(
            "half maximum not reached within a {span_m} m span around {center} m"
        )));
    };
    let l_lo = refine(grid[left + 1], grid[left])?;
    let l_hi = refine(grid[right - 1], grid[right])?;
    let fwhm_wavelength = l_hi - l_lo;
    Ok(PmCurve {
        signal_wavelengths: grid,
        efficiency,
        fwhm_wavelength,
        fwhm_frequency: wavelength_to_frequency_width(fwhm_wavelength, center),
        fwhm_frequency_exact: SPEED_OF_LIGHT / l_lo - SPEED_OF_LIGHT / l_hi,
        half_max_wavelengths: (l_lo, l_hi),
    })
}
