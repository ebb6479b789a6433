use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::units::{to_db, to_linear};

/// Floor applied when dark subtraction leaves no power in a bin.
pub const DEFAULT_FLOOR_DB: f64 = -60.0;

pub const CSV_HEADER: &str = "frequency_hz,power_db,rbw_hz,vbw_hz,n_averages,normalized";

/// One spectrum-analyzer sweep: per-bin power in dB on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    frequencies: Vec<f64>,
    power_db: Vec<f64>,
    rbw_hz: f64,
    vbw_hz: f64,
    n_averages: u32,
    normalized: bool,
    clamped: Vec<usize>,
}

impl SpectrumTrace {
    pub fn new(
        frequencies: Vec<f64>,
        power_db: Vec<f64>,
        rbw_hz: f64,
        vbw_hz: f64,
        n_averages: u32,
        normalized: bool,
    ) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(invalid("trace has no bins"));
        }
        if frequencies.len() != power_db.len() {
            return Err(invalid(format!(
                "{} frequencies but {} power values",
                frequencies.len(),
                power_db.len()
            )));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("frequency grid must be strictly increasing"));
        }
        if !(rbw_hz > 0.0) || !(vbw_hz > 0.0) {
            return Err(invalid(format!("rbw and vbw must be > 0, got {rbw_hz} and {vbw_hz}")));
        }
        if n_averages == 0 {
            return Err(invalid("n_averages must be >= 1"));
        }
        if power_db.iter().any(|p| p.is_nan()) {
            return Err(invalid("trace contains NaN power"));
        }
        Ok(Self {
            frequencies,
            power_db,
            rbw_hz,
            vbw_hz,
            n_averages,
            normalized,
            clamped: Vec::new(),
        })
    }

    pub fn from_linear(
        frequencies: Vec<f64>,
        power: &[f64],
        rbw_hz: f64,
        vbw_hz: f64,
        n_averages: u32,
        normalized: bool,
    ) -> Result<Self> {
        Self::new(
            frequencies,
            power.iter().map(|&p| to_db(p)).collect(),
            rbw_hz,
            vbw_hz,
            n_averages,
            normalized,
        )
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn power_db(&self) -> &[f64] {
        &self.power_db
    }

    pub fn linear(&self) -> Vec<f64> {
        self.power_db.iter().map(|&p| to_linear(p)).collect()
    }

    pub fn rbw_hz(&self) -> f64 {
        self.rbw_hz
    }

    pub fn vbw_hz(&self) -> f64 {
        self.vbw_hz
    }

    pub fn n_averages(&self) -> u32 {
        self.n_averages
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Bins that were clamped to the floor during dark subtraction.
    pub fn clamped_bins(&self) -> &[usize] {
        &self.clamped
    }

    fn check_same_grid(&self, other: &SpectrumTrace, what: &str) -> Result<()> {
        if self.frequencies != other.frequencies {
            return Err(Error::GridMismatch(format!("{what}: frequency grids differ")));
        }
        if self.rbw_hz != other.rbw_hz || self.vbw_hz != other.vbw_hz {
            return Err(Error::GridMismatch(format!(
                "{what}: rbw/vbw differ ({}/{} vs {}/{})",
                self.rbw_hz, self.vbw_hz, other.rbw_hz, other.vbw_hz
            )));
        }
        Ok(())
    }

    /// `self / reference` bin by bin, flagged as normalized. No dark subtraction.
    pub fn normalize_to(&self, reference: &SpectrumTrace) -> Result<SpectrumTrace> {
        self.check_same_grid(reference, "normalize")?;
        let power_db = self
            .power_db
            .iter()
            .zip(&reference.power_db)
            .map(|(m, r)| m - r)
            .collect();
        let mut out = self.clone();
        out.power_db = power_db;
        out.normalized = true;
        out.clamped.clear();
        Ok(out)
    }

    /// Restrict to bins whose center lies in `[lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.frequencies
            .iter()
            .zip(&self.power_db)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, p)| (*f, *p))
            .collect()
    }

    /// CSV with a fixed header, LF line endings and shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for (f, p) in self.frequencies.iter().zip(&self.power_db) {
            let _ = writeln!(
                s,
                "{f},{p},{},{},{},{}",
                self.rbw_hz, self.vbw_hz, self.n_averages, self.normalized
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end_matches('\r') == CSV_HEADER => {}
            other => return Err(invalid(format!("unexpected trace header {other:?}"))),
        }
        let mut freqs = Vec::new();
        let mut power = Vec::new();
        let mut meta: Option<(f64, f64, u32, bool)> = None;
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(invalid(format!(
                    "row {}: expected 6 columns, got {}",
                    i + 1,
                    cols.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| invalid(format!("row {}: bad number {s:?}: {e}", i + 1)))
            };
            freqs.push(num(cols[0])?);
            power.push(num(cols[1])?);
            let row_meta = (
                num(cols[2])?,
                num(cols[3])?,
                cols[4]
                    .parse::<u32>()
                    .map_err(|e| invalid(format!("row {}: bad n_averages: {e}", i + 1)))?,
                cols[5]
                    .parse::<bool>()
                    .map_err(|e| invalid(format!("row {}: bad normalized flag: {e}", i + 1)))?,
            );
            match meta {
                None => meta = Some(row_meta),
                Some(m) if m == row_meta => {}
                Some(_) => return Err(invalid(format!("row {}: metadata differs from first row", i + 1))),
            }
        }
        let (rbw, vbw, n, normalized) = meta.ok_or_else(|| invalid("trace has no rows"))?;
        Self::new(freqs, power, rbw, vbw, n, normalized)
    }
}

/// Vacuum-normalized, dark-subtracted trace `(P_meas - P_dark) / (P_vac - P_dark)` in dB.
pub fn subtract_dark_noise(
    meas_trace: &SpectrumTrace,
    vacuum_trace: &SpectrumTrace,
    dark_trace: &SpectrumTrace,
) -> Result<SpectrumTrace> {
    subtract_dark_noise_with_floor(meas_trace, vacuum_trace, dark_trace, DEFAULT_FLOOR_DB)
}

pub fn subtract_dark_noise_with_floor(
    meas_trace: &SpectrumTrace,
    vacuum_trace: &SpectrumTrace,
    dark_trace: &SpectrumTrace,
    floor_db: f64,
) -> Result<SpectrumTrace> {
    meas_trace.check_same_grid(vacuum_trace, "measured vs vacuum")?;
    meas_trace.check_same_grid(dark_trace, "measured vs dark")?;
    let meas = meas_trace.linear();
    let vac = vacuum_trace.linear();
    let dark = dark_trace.linear();
    let mut power_db = Vec::with_capacity(meas.len());
    let mut clamped = Vec::new();
    for (bin, ((m, v), d)) in meas.iter().zip(&vac).zip(&dark).enumerate() {
        if v <= d {
            return Err(Error::DegenerateCalibration {
                bin,
                frequency_hz: meas_trace.frequencies[bin],
                vacuum: *v,
                dark: *d,
            });
        }
        let ratio = (m - d) / (v - d);
        let db = if ratio > 0.0 { to_db(ratio) } else { f64::NEG_INFINITY };
        if db < floor_db {
            clamped.push(bin);
            power_db.push(floor_db);
        } else {
            power_db.push(db);
        }
    }
    let mut out = SpectrumTrace::new(
        meas_trace.frequencies.clone(),
        power_db,
        meas_trace.rbw_hz,
        meas_trace.vbw_hz,
        meas_trace.n_averages,
        true,
    )?;
    out.clamped = clamped;
    Ok(out)
}
