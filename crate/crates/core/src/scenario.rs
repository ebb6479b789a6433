//! Declarative description of the two-source EPR experiment and the state it produces.
//!
//! Layout: two waveguide sources, a phase shift on source 2, the half beam splitter,
//! one lossy path per output and one homodyne detector per path. Path 0 is Alice, path 1
//! is Bob. Every section has defaults so partial configurations (for example a
//! phase-matching-only file) deserialize.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::detection::{DetectorModel, HomodyneChannel};
use crate::error::{invalid, Result};
use crate::gaussian::{pump_to_squeezing, BeamSplitterSpec, GaussianState, LossChannel, SqueezerSpec};
use crate::phasematch::{QpmWaveguide, Sellmeier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_sources")]
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub hbs: HbsConfig,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default = "default_detectors")]
    pub detectors: Vec<DetectorModel>,
    #[serde(default)]
    pub analyzer: AnalyzerConfig,
    #[serde(default)]
    pub model: ModelGrid,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveguide: Option<WaveguideConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: String::new(),
            sources: default_sources(),
            hbs: HbsConfig::default(),
            paths: PathsConfig::default(),
            detectors: default_detectors(),
            analyzer: AnalyzerConfig::default(),
            model: ModelGrid::default(),
            flags: Flags::default(),
            output: OutputConfig::default(),
            mc: McConfig::default(),
            waveguide: None,
        }
    }
}

/// Two sources with a 0.68 variance ratio each.
fn default_sources() -> Vec<SourceConfig> {
    let source = SourceConfig {
        r: Some(-(0.68f64).ln() / 2.0),
        ..Default::default()
    };
    vec![source.clone(), source]
}

fn default_detectors() -> Vec<DetectorModel> {
    vec![DetectorModel::default(), DetectorModel::default()]
}

/// One squeezed-vacuum source: either `r` directly or `pump_mw` with `gain_per_sqrt_mw`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_per_sqrt_mw: Option<f64>,
    #[serde(default)]
    pub angle: f64,
    #[serde(default)]
    pub blocked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HbsConfig {
    pub transmittance: f64,
    pub phase: f64,
    /// Phase shift on source 2 before the beam splitter.
    pub relative_phase: f64,
}

impl Default for HbsConfig {
    fn default() -> Self {
        Self {
            transmittance: 0.5,
            phase: 0.0,
            relative_phase: FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Power transmittance from the beam splitter to each detector (mode matching, optics).
    pub eta: Vec<f64>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self { eta: vec![1.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzerConfig {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub rbw_hz: Vec<f64>,
    pub vbw_hz: f64,
    pub n_averages: u32,
    pub seed: u64,
    /// Band over which summary levels are evaluated.
    pub band_hz: [f64; 2],
    pub lo_drift: bool,
    /// Peak LO power excursion per trace when `lo_drift` is set.
    pub lo_drift_db: f64,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            start_hz: 0.5e6,
            stop_hz: 30.5e6,
            rbw_hz: vec![100e3],
            vbw_hz: 100.0,
            n_averages: 10,
            seed: 1,
            band_hz: [1e6, 30e6],
            lo_drift: false,
            lo_drift_db: 0.2,
        }
    }
}

/// Frequency grid for noiseless model curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelGrid {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub n_points: usize,
}

impl Default for ModelGrid {
    fn default() -> Self {
        Self {
            start_hz: 1e6,
            stop_hz: 30e6,
            n_points: 30,
        }
    }
}

impl ModelGrid {
    pub fn frequencies(&self) -> Vec<f64> {
        match self.n_points {
            0 => Vec::new(),
            1 => vec![self.start_hz],
            n => (0..n)
                .map(|i| self.start_hz + (self.stop_hz - self.start_hz) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    pub subtract_dark: bool,
    pub normalize: bool,
    pub run_mc: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            subtract_dark: true,
            normalize: true,
            run_mc: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Path transmittances used by the Monte-Carlo side only (sensitivity checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_override: Option<Vec<f64>>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 1,
            eta_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideConfig {
    pub length_m: f64,
    pub temperature_k: f64,
    pub pump_wavelength_m: f64,
    /// Solved for degenerate phase matching when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poling_period_m: Option<f64>,
    #[serde(default = "default_sellmeier")]
    pub sellmeier: String,
    pub span_m: f64,
    pub n_points: usize,
}

fn default_sellmeier() -> String {
    Sellmeier::DEFAULT_NAME.into()
}

/// A field that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn push(v: &mut Vec<Violation>, field: impl Into<String>, message: impl Into<String>) {
    v.push(Violation {
        field: field.into(),
        message: message.into(),
    });
}

fn check_eta_list(v: &mut Vec<Violation>, field: &str, etas: &[f64]) {
    if etas.len() != 2 {
        push(v, field, format!("expected 2 entries, got {}", etas.len()));
    }
    for (i, e) in etas.iter().enumerate() {
        if !(0.0..=1.0).contains(e) {
            push(v, format!("{field}[{i}]"), format!("must be in [0, 1], got {e}"));
        }
    }
}

/// Quadrature pairing of an EPR measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprQuadrature {
    /// `x_A - x_B`
    XMinus,
    /// `p_A + p_B`
    PPlus,
}

impl ScenarioConfig {
    /// Every problem with the experiment sections (sources through Monte Carlo).
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.sources.len() != 2 {
            push(
                &mut v,
                "sources",
                format!("expected exactly 2 sources, got {}", self.sources.len()),
            );
        }
        for (i, s) in self.sources.iter().enumerate() {
            let f = |k: &str| format!("sources[{i}].{k}");
            match (s.r, s.pump_mw, s.gain_per_sqrt_mw) {
                (Some(r), None, None) => {
                    if let Err(e) = SqueezerSpec::new(r, s.angle) {
                        push(&mut v, f("r"), e.to_string());
                    }
                }
                (None, Some(p), Some(g)) => {
                    if let Err(e) = pump_to_squeezing(p, g) {
                        push(&mut v, f("pump_mw"), e.to_string());
                    }
                }
                _ => push(
                    &mut v,
                    format!("sources[{i}]"),
                    "give either `r` or both `pump_mw` and `gain_per_sqrt_mw`",
                ),
            }
            if !s.angle.is_finite() {
                push(&mut v, f("angle"), "must be finite");
            }
        }
        if !(0.0..=1.0).contains(&self.hbs.transmittance) {
            push(
                &mut v,
                "hbs.transmittance",
                format!("must be in [0, 1], got {}", self.hbs.transmittance),
            );
        }
        if !self.hbs.phase.is_finite() {
            push(&mut v, "hbs.phase", "must be finite");
        }
        if !self.hbs.relative_phase.is_finite() {
            push(&mut v, "hbs.relative_phase", "must be finite");
        }
        check_eta_list(&mut v, "paths.eta", &self.paths.eta);
        if self.detectors.len() != 2 {
            push(
                &mut v,
                "detectors",
                format!("expected exactly 2 detectors, got {}", self.detectors.len()),
            );
        }
        for (i, d) in self.detectors.iter().enumerate() {
            for (field, msg) in d.violations() {
                push(&mut v, format!("detectors[{i}].{field}"), msg);
            }
        }
        let a = &self.analyzer;
        if !(a.start_hz >= 0.0) {
            push(&mut v, "analyzer.start_hz", format!("must be >= 0, got {}", a.start_hz));
        }
        if !(a.stop_hz > a.start_hz) {
            push(
                &mut v,
                "analyzer.stop_hz",
                format!("must exceed start_hz, got {}", a.stop_hz),
            );
        }
        if a.rbw_hz.is_empty() {
            push(
                &mut v,
                "analyzer.rbw_hz",
                "at least one resolution bandwidth is required",
            );
        }
        for (i, r) in a.rbw_hz.iter().enumerate() {
            if !(*r > 0.0) || *r > a.stop_hz - a.start_hz {
                push(
                    &mut v,
                    format!("analyzer.rbw_hz[{i}]"),
                    format!("must be in (0, span width], got {r}"),
                );
            }
        }
        if !(a.vbw_hz > 0.0) {
            push(&mut v, "analyzer.vbw_hz", format!("must be > 0, got {}", a.vbw_hz));
        }
        if a.n_averages == 0 {
            push(&mut v, "analyzer.n_averages", "must be >= 1");
        }
        if !(a.band_hz[0] >= 0.0 && a.band_hz[1] > a.band_hz[0]) {
            push(
                &mut v,
                "analyzer.band_hz",
                format!("must be an increasing pair, got {:?}", a.band_hz),
            );
        }
        if !(a.lo_drift_db >= 0.0 && a.lo_drift_db.is_finite()) {
            push(
                &mut v,
                "analyzer.lo_drift_db",
                format!("must be >= 0, got {}", a.lo_drift_db),
            );
        }
        let m = &self.model;
        if m.n_points == 0 {
            push(&mut v, "model.n_points", "frequency list is empty");
        }
        if !(m.start_hz > 0.0) {
            push(&mut v, "model.start_hz", format!("must be > 0, got {}", m.start_hz));
        }
        if !(m.stop_hz >= m.start_hz) || (m.n_points > 1 && m.stop_hz == m.start_hz) {
            push(
                &mut v,
                "model.stop_hz",
                format!("must exceed start_hz, got {}", m.stop_hz),
            );
        }
        if self.output.dir.is_empty() {
            push(&mut v, "output.dir", "must not be empty");
        }
        if self.mc.n_samples < 10 {
            push(
                &mut v,
                "mc.n_samples",
                format!("must be >= 10, got {}", self.mc.n_samples),
            );
        }
        if let Some(etas) = &self.mc.eta_override {
            check_eta_list(&mut v, "mc.eta_override", etas);
        }
        v
    }

    pub fn waveguide_violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let Some(w) = &self.waveguide else {
            push(&mut v, "waveguide", "section is missing");
            return v;
        };
        if !(w.length_m > 0.0 && w.length_m.is_finite()) {
            push(&mut v, "waveguide.length_m", format!("must be > 0, got {}", w.length_m));
        }
        if !(273.0..=473.0).contains(&w.temperature_k) {
            push(
                &mut v,
                "waveguide.temperature_k",
                format!("must be in [273, 473] K, got {}", w.temperature_k),
            );
        }
        if !(0.4e-6..=2.5e-6).contains(&w.pump_wavelength_m) {
            push(
                &mut v,
                "waveguide.pump_wavelength_m",
                format!(
                    "must be in [0.4, 2.5] um so the degenerate signal stays in range, got {}",
                    w.pump_wavelength_m
                ),
            );
        }
        if let Some(p) = w.poling_period_m {
            if !(p > 0.0 && p.is_finite()) {
                push(&mut v, "waveguide.poling_period_m", format!("must be > 0, got {p}"));
            }
        }
        if Sellmeier::by_name(&w.sellmeier).is_none() {
            push(
                &mut v,
                "waveguide.sellmeier",
                format!(
                    "unknown coefficient set {:?} (known: {})",
                    w.sellmeier,
                    Sellmeier::NAMES.join(", ")
                ),
            );
        }
        if !(w.span_m > 0.0 && w.span_m.is_finite()) {
            push(&mut v, "waveguide.span_m", format!("must be > 0, got {}", w.span_m));
        }
        if w.n_points < 101 {
            push(
                &mut v,
                "waveguide.n_points",
                format!("must be >= 101, got {}", w.n_points),
            );
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(invalid(
                v.iter().map(Violation::to_string).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    /// Squeezer of each source, `None` when blocked.
    pub fn source_squeezers(&self) -> Result<Vec<Option<SqueezerSpec>>> {
        self.sources
            .iter()
            .map(|s| {
                if s.blocked {
                    return Ok(None);
                }
                let spec = match (s.r, s.pump_mw, s.gain_per_sqrt_mw) {
                    (Some(r), None, None) => SqueezerSpec::new(r, s.angle)?,
                    (None, Some(p), Some(g)) => {
                        let base = pump_to_squeezing(p, g)?;
                        SqueezerSpec::new(base.r(), s.angle)?
                    }
                    _ => return Err(invalid("source needs `r` or `pump_mw` + `gain_per_sqrt_mw`")),
                };
                Ok(Some(spec))
            })
            .collect()
    }

    /// Two-mode state after the beam splitter and the given path transmittances.
    pub fn state_with_paths(&self, path_eta: &[f64]) -> Result<GaussianState> {
        self.validate()?;
        let mut state = GaussianState::vacuum(2)?;
        for (mode, spec) in self.source_squeezers()?.iter().enumerate() {
            if let Some(spec) = spec {
                state = state.apply_squeezer(mode, spec)?;
            }
        }
        state = state.apply_phase_shift(1, self.hbs.relative_phase)?;
        state = state.apply_beamsplitter(0, 1, &BeamSplitterSpec::new(self.hbs.transmittance, self.hbs.phase)?)?;
        for (mode, eta) in path_eta.iter().enumerate() {
            state = state.apply_loss(mode, &LossChannel::new(*eta)?)?;
        }
        Ok(state)
    }

    /// State arriving at the detectors (before their quantum efficiency).
    pub fn propagated_state(&self) -> Result<GaussianState> {
        self.state_with_paths(&self.paths.eta)
    }

    /// State seen by ideal detectors: path losses and quantum efficiencies applied.
    pub fn detected_state(&self) -> Result<GaussianState> {
        self.detected_state_with_paths(&self.paths.eta)
    }

    pub fn detected_state_with_paths(&self, path_eta: &[f64]) -> Result<GaussianState> {
        let mut state = self.state_with_paths(path_eta)?;
        for (mode, det) in self.detectors.iter().enumerate() {
            state = state.apply_loss(mode, &det.efficiency_channel()?)?;
        }
        Ok(state)
    }

    /// Homodyne arms for `x_A - x_B` or `p_A + p_B`.
    pub fn epr_channels(&self, quadrature: EprQuadrature, detectors: &[DetectorModel]) -> [HomodyneChannel; 2] {
        let (phase, wb) = match quadrature {
            EprQuadrature::XMinus => (0.0, -1.0),
            EprQuadrature::PPlus => (FRAC_PI_2, 1.0),
        };
        [
            HomodyneChannel {
                mode: 0,
                lo_phase: phase,
                weight: 1.0,
                detector: detectors[0],
            },
            HomodyneChannel {
                mode: 1,
                lo_phase: phase,
                weight: wb,
                detector: detectors[1],
            },
        ]
    }

    /// LO phases of the squeezed and anti-squeezed quadratures of `mode`.
    pub fn squeezing_axes(&self, mode: usize) -> Result<(f64, f64)> {
        let block = self.propagated_state()?.mode_cov(mode)?;
        let (a, b, d) = (block[(0, 0)], block[(0, 1)], block[(1, 1)]);
        // Variance along angle t is a cos^2 + 2b sin cos + d sin^2; extremes at
        // tan(2t) = 2b / (a - d).
        let t = 0.5 * (2.0 * b).atan2(a - d);
        let var = |t: f64| {
            let (s, c) = t.sin_cos();
            a * c * c + 2.0 * b * s * c + d * s * s
        };
        let (t1, t2) = (t, t + FRAC_PI_2);
        Ok(if var(t1) <= var(t2) { (t1, t2) } else { (t2, t1) })
    }

    pub fn waveguide(&self) -> Result<QpmWaveguide> {
        let v = self.waveguide_violations();
        if !v.is_empty() {
            return Err(invalid(
                v.iter().map(Violation::to_string).collect::<Vec<_>>().join("; "),
            ));
        }
        let w = self.waveguide.as_ref().expect("checked above");
        let sellmeier = Sellmeier::by_name(&w.sellmeier).expect("checked above");
        match w.poling_period_m {
            Some(p) => QpmWaveguide::new(w.length_m, p, w.temperature_k, sellmeier),
            None => QpmWaveguide::degenerate(w.length_m, w.pump_wavelength_m, w.temperature_k, sellmeier),
        }
    }
}

/// SplitMix64 finalizer, used to derive independent per-trace seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pumped_pair() -> ScenarioConfig {
        ScenarioConfig {
            sources: vec![
                SourceConfig {
                    r: Some(-(0.68f64).ln() / 2.0),
                    ..Default::default()
                },
                SourceConfig {
                    pump_mw: Some(30.0),
                    gain_per_sqrt_mw: Some(-(0.68f64).ln() / 2.0 / 30f64.sqrt()),
                    ..Default::default()
                },
            ],
            ..Default::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        let v = ScenarioConfig::default().violations();
        assert!(v.is_empty(), "{v:?}");
        assert!(pumped_pair().violations().is_empty());
    }

    #[test]
    fn collects_every_violation() {
        let mut c = pumped_pair();
        c.sources[0].pump_mw = Some(3.0);
        c.hbs.transmittance = 1.5;
        c.paths.eta = vec![0.9, 1.2];
        c.detectors[1].bandwidth_hz = -1.0;
        c.model.n_points = 0;
        c.analyzer.rbw_hz.clear();
        let fields: Vec<String> = c.violations().into_iter().map(|v| v.field).collect();
        for f in [
            "sources[0]",
            "hbs.transmittance",
            "paths.eta[1]",
            "detectors[1].bandwidth_hz",
            "model.n_points",
            "analyzer.rbw_hz",
        ] {
            assert!(fields.iter().any(|x| x == f), "{f} missing from {fields:?}");
        }
        assert!(c.propagated_state().is_err());
    }

    #[test]
    fn sources_count_checked() {
        let mut c = pumped_pair();
        c.sources.pop();
        assert!(c.violations().iter().any(|v| v.field == "sources"));
    }

    #[test]
    fn pump_and_direct_sources_agree() {
        let c = pumped_pair();
        let sq = c.source_squeezers().unwrap();
        assert!((sq[0].unwrap().r() - sq[1].unwrap().r()).abs() < 1e-15);
    }

    #[test]
    fn blocked_source_gives_half_loss() {
        let mut c = pumped_pair();
        c.sources[1].blocked = true;
        let st = c.propagated_state().unwrap();
        let (sq, anti) = c.squeezing_axes(0).unwrap();
        let var = |t: f64| {
            let (s, co) = t.sin_cos();
            st.quadrature_variance(&[co, s, 0.0, 0.0]).unwrap()
        };
        assert!((var(sq) / 0.25 - 0.84).abs() < 1e-12);
        assert!((var(anti) / 0.25 - (0.5 / 0.68 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn waveguide_section_required() {
        let c = ScenarioConfig::default();
        assert_eq!(c.waveguide_violations()[0].field, "waveguide");
        assert!(c.waveguide().is_err());
    }

    #[test]
    fn model_grid() {
        let g = ModelGrid::default().frequencies();
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], 1e6);
        assert_eq!(g[29], 30e6);
    }

    #[test]
    fn seeds_mix() {
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
        assert_ne!(mix_seed(1, 0), mix_seed(2, 0));
        assert_eq!(mix_seed(5, 9), mix_seed(5, 9));
    }
}
