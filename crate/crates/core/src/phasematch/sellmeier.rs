use crate::error::{Error, Result};

/// Temperature-dependent Sellmeier fit for an extraordinary index.
///
/// ```text
/// n^2 = a1 + b1 F + (a2 + b2 F) / (lambda^2 - (a3 + b3 F)^2)
///            + (a4 + b4 F) / (lambda^2 - a5^2) - a6 lambda^2
/// F   = (T - T0)(T + T0 + 2 * 273.16)
/// ```
///
/// with `lambda` in micrometers and `T` in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sellmeier {
    pub a: [f64; 6],
    pub b: [f64; 4],
    /// Reference temperature `T0` in degrees Celsius.
    pub reference_celsius: f64,
    /// Fit validity in micrometers.
    pub wavelength_range_um: (f64, f64),
}

impl Sellmeier {
    pub const DEFAULT_NAME: &'static str = "congruent-ln-jundt1997";
    pub const NAMES: &'static [&'static str] = &[Self::DEFAULT_NAME];

    /// Extraordinary index of congruent LiNbO3 (D. H. Jundt, Opt. Lett. 22, 1553, 1997).
    pub const fn congruent_lithium_niobate() -> Self {
        Self {
            a: [5.35583, 0.100473, 0.20692, 100.0, 11.34927, 1.5334e-2],
            b: [4.629e-7, 3.862e-8, -0.89e-8, 2.657e-5],
            reference_celsius: 24.5,
            wavelength_range_um: (0.4, 5.0),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            Self::DEFAULT_NAME => Some(Self::congruent_lithium_niobate()),
            _ => None,
        }
    }

    /// Refractive index at `wavelength_m` and `temperature_k`.
    pub fn index(&self, wavelength_m: f64, temperature_k: f64) -> Result<f64> {
        let um = wavelength_m * 1e6;
        let (lo, hi) = self.wavelength_range_um;
        if !(lo..=hi).contains(&um) {
            return Err(Error::OutOfRange {
                quantity: "wavelength (um)",
                value: um,
                min: lo,
                max: hi,
            });
        }
        if !(273.0..=473.0).contains(&temperature_k) {
            return Err(Error::OutOfRange {
                quantity: "temperature (K)",
                value: temperature_k,
                min: 273.0,
                max: 473.0,
            });
        }
        let t = temperature_k - 273.15;
        let t0 = self.reference_celsius;
        let f = (t - t0) * (t + t0 + 2.0 * 273.16);
        let [a1, a2, a3, a4, a5, a6] = self.a;
        let [b1, b2, b3, b4] = self.b;
        let l2 = um * um;
        let pole = a3 + b3 * f;
        let n2 = a1 + b1 * f + (a2 + b2 * f) / (l2 - pole * pole) + (a4 + b4 * f) / (l2 - a5 * a5) - a6 * l2;
        Ok(n2.sqrt())
    }
}

impl Default for Sellmeier {
    fn default() -> Self {
        Self::congruent_lithium_niobate()
    }
}
