//! The five subcommands. Each validates first, computes everything in memory and returns
//! a [`Report`]; writing is left to the caller.

use std::fmt::Write as _;

use eprsim::detection::{
    measured_combination_power, spectrum_analyzer_trace, subtract_dark_noise, AnalyzerSettings, DetectorModel,
    HomodyneChannel, SpectrumTrace,
};
use eprsim::inseparability::{delta_epr, epr_spectrum, infer_direct_squeezing, DarkNoise, TWO_VACUA};
use eprsim::oracle::{estimate_delta_epr, estimate_variance, sample_state_with, write_samples, Estimate};
use eprsim::phasematch::pm_curve;
use eprsim::scenario::{mix_seed, EprQuadrature, ScenarioConfig};
use eprsim::units::{to_db, VACUUM_VARIANCE};
use eprsim::{EprResult, Execution, GaussianState};

use crate::error::{CliError, Result};
use crate::output::Report;

/// Oracle agreement threshold in standard errors.
pub const Z_THRESHOLD: f64 = 4.0;

const LO_DRIFT_SALT: u64 = 0x4C4F;

type PowerModel<'a> = Box<dyn Fn(f64) -> f64 + Sync + Send + 'a>;

fn check(config: &ScenarioConfig) -> Result<()> {
    let v = config.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(v))
    }
}

fn unblocked(config: &ScenarioConfig) -> usize {
    config.sources.iter().filter(|s| !s.blocked).count()
}

fn settings(config: &ScenarioConfig, rbw_hz: f64, seed: u64, jitter: bool) -> AnalyzerSettings {
    let a = &config.analyzer;
    AnalyzerSettings {
        start_hz: a.start_hz,
        stop_hz: a.stop_hz,
        rbw_hz,
        vbw_hz: a.vbw_hz,
        n_averages: a.n_averages,
        seed,
        jitter,
    }
}

/// Detector with its LO power scaled by the per-trace drift, if enabled.
fn drifted(config: &ScenarioConfig, det: DetectorModel, salt: u64) -> DetectorModel {
    if !config.analyzer.lo_drift {
        return det;
    }
    let bits = mix_seed(config.analyzer.seed ^ LO_DRIFT_SALT, salt) >> 11;
    let u = 2.0 * bits as f64 / (1u64 << 53) as f64 - 1.0;
    DetectorModel {
        lo_power_mw: det.lo_power_mw * 10f64.powf(u * config.analyzer.lo_drift_db / 10.0),
        ..det
    }
}

fn power_model<'a>(
    state: &'a GaussianState,
    channels: &'a [HomodyneChannel],
) -> impl Fn(f64) -> f64 + Sync + Send + 'a {
    move |f| {
        measured_combination_power(state, channels, f)
            .map(|p| p.total())
            .unwrap_or(f64::NAN)
    }
}

fn dark_model(channels: &[HomodyneChannel]) -> impl Fn(f64) -> f64 + Sync + Send {
    let norm: f64 = channels.iter().map(|c| c.weight * c.weight).sum();
    let dark = channels
        .iter()
        .map(|c| c.weight * c.weight * c.detector.dark_power())
        .sum::<f64>()
        / norm;
    move |_| dark
}

fn in_band(config: &ScenarioConfig, trace: &SpectrumTrace) -> Vec<f64> {
    let [lo, hi] = config.analyzer.band_hz;
    trace.band(lo, hi).into_iter().map(|(_, p)| p).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn max_deviation(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).abs()).fold(0.0, f64::max)
}

fn band_or_err(config: &ScenarioConfig, trace: &SpectrumTrace) -> Result<Vec<f64>> {
    let v = in_band(config, trace);
    if v.is_empty() {
        return Err(CliError::field(
            "analyzer.band_hz",
            format!("no analyzer bin falls inside {:?}", config.analyzer.band_hz),
        ));
    }
    Ok(v)
}

/// Normalized trace: dark-subtracted when the flag is set.
fn normalized(
    config: &ScenarioConfig,
    meas: &SpectrumTrace,
    vac: &SpectrumTrace,
    dark: &SpectrumTrace,
) -> Result<SpectrumTrace> {
    Ok(if config.flags.subtract_dark {
        subtract_dark_noise(meas, vac, dark)?
    } else {
        meas.normalize_to(vac)?
    })
}

/// Single-source noise spectra of Alice's detector: vacuum, squeezed, anti-squeezed and
/// dark, raw and normalized.
pub fn run_squeeze_spectrum(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    check(config)?;
    let n = unblocked(config);
    if n != 1 {
        return Err(CliError::field(
            "sources",
            format!("squeeze-spectrum needs exactly one unblocked source, got {n}"),
        ));
    }
    let state = config.propagated_state()?;
    let vacuum = GaussianState::vacuum(2)?;
    let (sq, anti) = config.squeezing_axes(0)?;
    let det = config.detectors[0];

    let mut report = Report::default();
    let s = &mut report.summary;
    s.push("scenario", &config.name);
    s.push("squeezing_lo_phase_rad", sq);
    let expected = |phase: f64| -> Result<f64> {
        let ch = [HomodyneChannel {
            mode: 0,
            lo_phase: phase,
            weight: 1.0,
            detector: det,
        }];
        Ok(to_db(measured_combination_power(&state, &ch, 0.0)?.signal))
    };
    s.push("expected_squeezed_db", expected(sq)?);
    s.push("expected_antisqueezed_db", expected(anti)?);

    for (i, &rbw) in config.analyzer.rbw_hz.iter().enumerate() {
        let salt = |j: u64| (i as u64) * 16 + j;
        let arms = |phase: f64, j: u64| {
            [HomodyneChannel {
                mode: 0,
                lo_phase: phase,
                weight: 1.0,
                detector: drifted(config, det, salt(j)),
            }]
        };
        let ch_vac = arms(sq, 0);
        let ch_sq = arms(sq, 1);
        let ch_anti = arms(anti, 2);
        let seed = |j: u64| mix_seed(config.analyzer.seed, salt(j));
        let emulate = |model: &(dyn Fn(f64) -> f64 + Sync + Send), j: u64, jitter: bool| {
            spectrum_analyzer_trace(model, &settings(config, rbw, seed(j), jitter), exec)
        };
        let models: [(&str, PowerModel); 4] = [
            ("vacuum", Box::new(power_model(&vacuum, &ch_vac))),
            ("squeezed", Box::new(power_model(&state, &ch_sq))),
            ("antisqueezed", Box::new(power_model(&state, &ch_anti))),
            ("dark", Box::new(dark_model(&ch_vac))),
        ];
        let mut raw = Vec::new();
        let mut ideal = Vec::new();
        for (j, (_, m)) in models.iter().enumerate() {
            raw.push(emulate(m.as_ref(), j as u64, true)?);
            ideal.push(emulate(m.as_ref(), j as u64, false)?);
        }
        let (vac_t, sq_t, anti_t, dark_t) = (&raw[0], &raw[1], &raw[2], &raw[3]);
        let norm_sq = normalized(config, sq_t, vac_t, dark_t)?;
        let norm_anti = normalized(config, anti_t, vac_t, dark_t)?;
        let norm_vac = normalized(config, vac_t, vac_t, dark_t)?;
        let norm_dark = dark_t.normalize_to(vac_t)?;
        let ideal_sq = normalized(config, &ideal[1], &ideal[0], &ideal[3])?;

        let tag = format!("rbw{rbw}");
        for ((name, _), t) in models.iter().zip(&raw) {
            report.add(format!("squeeze_{tag}_raw_{name}.csv"), t.to_csv());
        }
        if config.flags.normalize {
            for (name, t) in [
                ("vacuum", &norm_vac),
                ("squeezed", &norm_sq),
                ("antisqueezed", &norm_anti),
                ("dark", &norm_dark),
            ] {
                report.add(format!("squeeze_{tag}_norm_{name}.csv"), t.to_csv());
            }
        }

        let sq_band = band_or_err(config, &norm_sq)?;
        let ideal_band = band_or_err(config, &ideal_sq)?;
        let anti_band = band_or_err(config, &norm_anti)?;
        let clearance = band_or_err(config, &norm_dark)?;
        let lo = config.analyzer.band_hz[0];
        let low: Vec<f64> = norm_sq.band(lo, lo + 1e6).into_iter().map(|(_, p)| p).collect();
        let low = if low.is_empty() { sq_band[0] } else { mean(&low) };
        let predicted = settings(config, rbw, 0, true).predicted_relative_std();

        let s = &mut report.summary;
        s.push(format!("{tag}.bins_in_band"), sq_band.len());
        s.push(format!("{tag}.squeezed_level_db"), mean(&sq_band));
        s.push(format!("{tag}.squeezed_flatness_db"), max_deviation(&ideal_band));
        s.push(format!("{tag}.squeezed_ripple_db"), max_deviation(&sq_band));
        s.push(format!("{tag}.low_frequency_squeezing_db"), low);
        s.push(format!("{tag}.antisqueezed_level_db"), mean(&anti_band));
        s.push(format!("{tag}.clearance_low_db"), -clearance[0]);
        s.push(format!("{tag}.clearance_high_db"), -clearance[clearance.len() - 1]);
        s.push(format!("{tag}.predicted_jitter_db"), 10.0 * (1.0 + predicted).log10());
        s.push(
            format!("{tag}.clamped_bins"),
            norm_sq.clamped_bins().len() + norm_anti.clamped_bins().len(),
        );
    }
    report.add("squeeze_summary.txt", report.summary.render());
    Ok(report)
}

/// One EPR bin from linear trace values.
fn epr_bin(x: f64, p: f64, vac: f64, dark: f64, subtract: bool) -> EprResult {
    if subtract {
        EprResult::from_vacuum_ratios((x - dark) / (vac - dark), (p - dark) / (vac - dark))
    } else {
        EprResult::from_vacuum_ratios(x / vac, p / vac)
    }
}

/// EPR sum versus frequency, raw and dark-subtracted, at each configured RBW.
pub fn run_epr_spectrum(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    check(config)?;
    let n = unblocked(config);
    if n != 2 {
        return Err(CliError::field(
            "sources",
            format!("epr-spectrum needs both sources unblocked, got {n}"),
        ));
    }
    let state = config.propagated_state()?;
    let vacuum = GaussianState::vacuum(2)?;
    let mut report = Report::default();
    report.summary.push("scenario", &config.name);
    report.summary.push(
        "analytic_delta_epr",
        delta_epr(&config.detected_state()?, 0, 1)?.delta_epr,
    );

    let freqs = config.model.frequencies();
    let raw_model = epr_spectrum(config, &freqs, DarkNoise::Included, exec)?;
    let sub_model = epr_spectrum(config, &freqs, DarkNoise::Subtracted, exec)?;
    let mut csv = String::from("frequency_hz,delta_epr_raw,delta_epr_subtracted\n");
    for ((f, r), (_, s)) in raw_model.iter().zip(&sub_model) {
        let _ = writeln!(csv, "{f},{},{}", r.delta_epr, s.delta_epr);
    }
    report.add("epr_model.csv", csv);
    let s = &mut report.summary;
    s.push("model.delta_epr_subtracted_low", sub_model[0].1.delta_epr);
    s.push(
        "model.delta_epr_subtracted_high",
        sub_model[sub_model.len() - 1].1.delta_epr,
    );
    s.push("model.delta_epr_raw_low", raw_model[0].1.delta_epr);
    s.push("model.delta_epr_raw_high", raw_model[raw_model.len() - 1].1.delta_epr);

    let subtract = config.flags.subtract_dark;
    let mut means = Vec::new();
    let mut all_entangled = true;
    for (i, &rbw) in config.analyzer.rbw_hz.iter().enumerate() {
        let salt = |j: u64| 0x100 + (i as u64) * 16 + j;
        let dets =
            |j: u64| -> Vec<DetectorModel> { config.detectors.iter().map(|d| drifted(config, *d, salt(j))).collect() };
        let ch_x = config.epr_channels(EprQuadrature::XMinus, &dets(0));
        let ch_p = config.epr_channels(EprQuadrature::PPlus, &dets(1));
        let ch_vac = config.epr_channels(EprQuadrature::XMinus, &dets(2));
        let models: [(&str, PowerModel); 4] = [
            ("xminus", Box::new(power_model(&state, &ch_x))),
            ("pplus", Box::new(power_model(&state, &ch_p))),
            ("vacuum", Box::new(power_model(&vacuum, &ch_vac))),
            ("dark", Box::new(dark_model(&ch_vac))),
        ];
        let tag = format!("rbw{rbw}");
        let mut lin = Vec::new();
        let mut grid = Vec::new();
        for (j, (name, m)) in models.iter().enumerate() {
            let seed = mix_seed(config.analyzer.seed, salt(j as u64));
            let t = spectrum_analyzer_trace(m.as_ref(), &settings(config, rbw, seed, true), exec)?;
            report.add(format!("epr_{tag}_raw_{name}.csv"), t.to_csv());
            lin.push(t.linear());
            grid = t.frequencies().to_vec();
        }
        let mut csv =
            String::from("frequency_hz,delta_epr_raw,delta_epr_subtracted,x_minus_ratio,p_plus_ratio,entangled\n");
        let [lo, hi] = config.analyzer.band_hz;
        let (mut band_raw, mut band_sub) = (Vec::new(), Vec::new());
        let mut raw_above = true;
        for (k, f) in grid.iter().enumerate() {
            let (x, p, v, d) = (lin[0][k], lin[1][k], lin[2][k], lin[3][k]);
            if v <= d {
                return Err(CliError::Numerical(format!(
                    "{tag}: vacuum power does not exceed dark power at {f} Hz; cannot subtract"
                )));
            }
            let raw = epr_bin(x, p, v, d, false);
            let sub = epr_bin(x, p, v, d, true);
            let shown = if subtract { sub } else { raw };
            let _ = writeln!(
                csv,
                "{f},{},{},{},{},{}",
                raw.delta_epr,
                sub.delta_epr,
                shown.var_x_minus / TWO_VACUA,
                shown.var_p_plus / TWO_VACUA,
                shown.entangled
            );
            if *f >= lo && *f <= hi {
                band_raw.push(raw.delta_epr);
                band_sub.push(sub.delta_epr);
                raw_above &= raw.delta_epr >= sub.delta_epr;
            }
        }
        report.add(format!("epr_{tag}_delta.csv"), csv);
        if band_sub.is_empty() {
            return Err(CliError::field(
                "analyzer.band_hz",
                format!("no {tag} bin falls inside {:?}", config.analyzer.band_hz),
            ));
        }
        let shown = if subtract { &band_sub } else { &band_raw };
        let entangled = shown.iter().all(|d| *d < 1.0);
        all_entangled &= entangled;
        means.push(mean(shown));
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s = &mut report.summary;
        s.push(format!("{tag}.bins_in_band"), band_sub.len());
        s.push(format!("{tag}.delta_epr_subtracted_mean"), mean(&band_sub));
        s.push(format!("{tag}.delta_epr_subtracted_min"), min(&band_sub));
        s.push(format!("{tag}.delta_epr_subtracted_max"), max(&band_sub));
        s.push(format!("{tag}.delta_epr_raw_min"), min(&band_raw));
        s.push(format!("{tag}.delta_epr_raw_max"), max(&band_raw));
        s.push(format!("{tag}.raw_above_subtracted"), raw_above);
        s.push(format!("{tag}.entangled_every_bin"), entangled);
    }
    let spread = means.iter().map(|m| (m - means[0]).abs()).fold(0.0, f64::max);
    report.summary.push("rbw_mean_spread", spread);
    report
        .summary
        .push("verdict", if all_entangled { "entangled" } else { "not entangled" });
    report.add("epr_summary.txt", report.summary.render());
    Ok(report)
}

/// Phase-matching curve of the configured waveguide.
pub fn run_phasematch(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    let v = config.waveguide_violations();
    if !v.is_empty() {
        return Err(CliError::Validation(v));
    }
    if config.output.dir.is_empty() {
        return Err(CliError::field("output.dir", "must not be empty"));
    }
    let w = config.waveguide.as_ref().expect("checked by waveguide_violations");
    let wg = config.waveguide()?;
    let curve = pm_curve(&wg, w.pump_wavelength_m, w.span_m, w.n_points, exec)?;
    let mut report = Report::default();
    let s = &mut report.summary;
    s.push("scenario", &config.name);
    s.push("length_mm", w.length_m * 1e3);
    s.push("poling_period_um", wg.poling_period_m() * 1e6);
    s.push("degenerate_wavelength_nm", 2.0 * w.pump_wavelength_m * 1e9);
    s.push("fwhm_nm", curve.fwhm_wavelength * 1e9);
    s.push("fwhm_thz", curve.fwhm_frequency / 1e12);
    s.push("fwhm_thz_exact", curve.fwhm_frequency_exact / 1e12);
    s.push("half_max_low_nm", curve.half_max_wavelengths.0 * 1e9);
    s.push("half_max_high_nm", curve.half_max_wavelengths.1 * 1e9);
    report.add("pm_curve.csv", curve.to_csv());
    report.add("phasematch_summary.txt", report.summary.render());
    Ok(report)
}

/// Squeezing before a loss `eta` given the level measured after it.
pub fn run_infer(measured_db: f64, eta: f64) -> Result<Report> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(CliError::field("eta", format!("must be in (0, 1], got {eta}")));
    }
    let inferred =
        infer_direct_squeezing(measured_db, eta).map_err(|e| CliError::field("measured_db", e.to_string()))?;
    let mut report = Report::default();
    report.summary.push("measured_db", measured_db);
    report.summary.push("eta", eta);
    report.summary.push("inferred_db", inferred);
    Ok(report)
}

/// One analytic-versus-sampled comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub quantity: &'static str,
    pub analytic: f64,
    pub estimate: Estimate,
}

impl Comparison {
    pub fn z(&self) -> f64 {
        self.estimate.z_score(self.analytic)
    }

    pub fn passed(&self) -> bool {
        self.z() <= Z_THRESHOLD
    }
}

fn scaled(e: Estimate, by: f64) -> Estimate {
    Estimate {
        value: e.value / by,
        std_error: e.std_error / by,
    }
}

/// Compares analytic detected-state moments against Monte-Carlo samples. With
/// `mc.eta_override` the samples come from a state with different path losses.
pub fn compare_with_oracle(
    config: &ScenarioConfig,
    exec: Execution,
) -> Result<(Vec<Comparison>, GaussianState, eprsim::oracle::SampleBatch)> {
    let analytic = config.detected_state()?;
    let sampled = match &config.mc.eta_override {
        Some(eta) => config.detected_state_with_paths(eta)?,
        None => analytic.clone(),
    };
    let batch = sample_state_with(&sampled, config.mc.n_samples, config.mc.seed, exec)?;
    let epr = delta_epr(&analytic, 0, 1)?;
    let mut out = vec![Comparison {
        quantity: "delta_epr",
        analytic: epr.delta_epr,
        estimate: estimate_delta_epr(&batch, 0, 1)?,
    }];
    let combos: [(&str, usize, f64, usize, f64, usize, f64); 6] = [
        ("var_x_minus", 0, 1.0, 1, -1.0, 0, TWO_VACUA),
        ("var_p_plus", 0, 1.0, 1, 1.0, 1, TWO_VACUA),
        ("var_x_a", 0, 1.0, 1, 0.0, 0, VACUUM_VARIANCE),
        ("var_p_a", 0, 1.0, 1, 0.0, 1, VACUUM_VARIANCE),
        ("var_x_b", 0, 0.0, 1, 1.0, 0, VACUUM_VARIANCE),
        ("var_p_b", 0, 0.0, 1, 1.0, 1, VACUUM_VARIANCE),
    ];
    for (q, a, wa, b, wb, quad, vac) in combos {
        let c = analytic.pair_coeffs(a, wa, b, wb, quad);
        out.push(Comparison {
            quantity: q,
            analytic: analytic.quadrature_variance(&c)? / vac,
            estimate: scaled(estimate_variance(&batch, &c)?, vac),
        });
    }
    Ok((out, sampled, batch))
}

/// Analytic pipeline versus the Monte-Carlo oracle, pass/fail at [`Z_THRESHOLD`].
pub fn run_validate(config: &ScenarioConfig, dump_samples: bool, exec: Execution) -> Result<Report> {
    check(config)?;
    if !config.flags.run_mc {
        return Err(CliError::field("flags.run_mc", "validate needs run_mc = true"));
    }
    let (comparisons, _, batch) = compare_with_oracle(config, exec)?;
    let mut report = Report::default();
    let s = &mut report.summary;
    s.push("scenario", &config.name);
    s.push("n_samples", config.mc.n_samples);
    s.push("seed", config.mc.seed);
    s.push("z_threshold", Z_THRESHOLD);
    let mut csv = String::from("quantity,analytic,mc,std_error,delta,z,pass\n");
    for c in &comparisons {
        let delta = c.estimate.value - c.analytic;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            c.quantity,
            c.analytic,
            c.estimate.value,
            c.estimate.std_error,
            delta,
            c.z(),
            c.passed()
        );
        s.push(format!("{}.analytic", c.quantity), c.analytic);
        s.push(format!("{}.mc", c.quantity), c.estimate.value);
        s.push(format!("{}.std_error", c.quantity), c.estimate.std_error);
        s.push(format!("{}.delta", c.quantity), delta);
        s.push(format!("{}.z", c.quantity), c.z());
        s.push(
            format!("{}.status", c.quantity),
            if c.passed() { "PASS" } else { "FAIL" },
        );
        if !c.passed() {
            report.failures.push(c.quantity.to_string());
        }
    }
    let verdict = if report.failures.is_empty() {
        "PASS".to_string()
    } else {
        format!("FAIL ({})", report.failures.join(", "))
    };
    report.summary.push("verdict", verdict);
    report.add("validate.csv", csv);
    if dump_samples {
        let mut bytes = Vec::new();
        write_samples(&mut bytes, &batch)?;
        report.add("mc_samples.bin", bytes);
    }
    report.add("validate_summary.txt", report.summary.render());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    #[test]
    fn single_source_levels() {
        let c = preset("paper-fig2").unwrap();
        let r = run_squeeze_spectrum(&c, Execution::default()).unwrap();
        let level = r.summary.number("rbw100000.squeezed_level_db").unwrap();
        assert!((level + 0.76).abs() < 0.05, "{level}");
        assert!(r.summary.number("rbw100000.squeezed_flatness_db").unwrap() < 0.1);
        assert!(r.text("squeeze_rbw100000_norm_squeezed.csv").is_some());
        assert!(r.text("squeeze_summary.txt").is_some());
    }

    #[test]
    fn antisqueezed_closed_form() {
        let c = preset("paper-fig2").unwrap();
        let r = run_squeeze_spectrum(&c, Execution::default()).unwrap();
        let rr = c.sources[0].r.unwrap();
        let eta = 0.5 * c.detectors[0].quantum_efficiency;
        let closed = 10.0 * ((2.0 * rr).exp() * eta + 1.0 - eta).log10();
        let got = r.summary.number("expected_antisqueezed_db").unwrap();
        assert!((got - closed).abs() < 1e-12, "{got} vs {closed}");
    }

    #[test]
    fn unsqueezed_source_reads_vacuum() {
        let mut c = preset("paper-fig2").unwrap();
        c.sources[0].r = Some(0.0);
        let r = run_squeeze_spectrum(&c, Execution::default()).unwrap();
        assert!(r.summary.number("expected_squeezed_db").unwrap().abs() < 1e-12);
        assert!(r.summary.number("expected_antisqueezed_db").unwrap().abs() < 1e-12);
        assert!(r.summary.number("rbw100000.squeezed_flatness_db").unwrap() < 1e-12);
    }

    #[test]
    fn squeeze_needs_one_source() {
        let c = preset("paper-fig3").unwrap();
        let e = run_squeeze_spectrum(&c, Execution::default()).unwrap_err();
        assert_eq!(e.fields(), ["sources"]);
        let e = run_epr_spectrum(&preset("paper-fig2").unwrap(), Execution::default()).unwrap_err();
        assert_eq!(e.fields(), ["sources"]);
    }

    #[test]
    fn wrong_relative_phase_is_separable() {
        let mut c = preset("paper-fig3").unwrap();
        c.hbs.relative_phase = 0.0;
        c.analyzer.rbw_hz = vec![5e6];
        let r = run_epr_spectrum(&c, Execution::default()).unwrap();
        assert!(r.summary.number("analytic_delta_epr").unwrap() >= 1.0);
        assert_eq!(r.summary.get("verdict"), Some("not entangled"));
    }

    #[test]
    fn lo_drift_only_moves_raw_traces() {
        let mut c = preset("paper-fig3").unwrap();
        c.analyzer.rbw_hz = vec![5e6];
        let base = run_epr_spectrum(&c, Execution::default()).unwrap();
        c.analyzer.lo_drift = true;
        let drift = run_epr_spectrum(&c, Execution::default()).unwrap();
        assert_ne!(
            base.text("epr_rbw5000000_raw_xminus.csv"),
            drift.text("epr_rbw5000000_raw_xminus.csv")
        );
        assert_eq!(base.text("epr_model.csv"), drift.text("epr_model.csv"));
    }

    #[test]
    fn phasematch_needs_waveguide() {
        let c = preset("paper-fig3").unwrap();
        let e = run_phasematch(&c, Execution::default()).unwrap_err();
        assert_eq!(e.fields(), ["waveguide"]);
        assert_eq!(e.code(), 2);
    }

    #[test]
    fn phasematch_length_scaling() {
        let c = preset("phasematch-12mm").unwrap();
        let base = run_phasematch(&c, Execution::default())
            .unwrap()
            .summary
            .number("fwhm_thz")
            .unwrap();
        let mut long = c.clone();
        long.waveguide.as_mut().unwrap().length_m = 0.024;
        let l = run_phasematch(&long, Execution::default())
            .unwrap()
            .summary
            .number("fwhm_thz")
            .unwrap();
        // degenerate type-0 gain: group-velocity term vanishes, width goes as 1/sqrt(L)
        assert!((base / l - 2f64.sqrt()).abs() < 0.05 * 2f64.sqrt(), "{base} {l}");
    }

    #[test]
    fn infer_and_its_errors() {
        let r = run_infer(-0.76, 0.5).unwrap();
        assert!((r.summary.number("inferred_db").unwrap() + 1.68).abs() < 0.02);
        assert!(r.files.is_empty());
        assert_eq!(run_infer(-4.0, 0.5).unwrap_err().fields(), ["measured_db"]);
        assert_eq!(run_infer(-1.0, 0.0).unwrap_err().fields(), ["eta"]);
    }

    #[test]
    fn validate_detects_a_corrupted_path() {
        let mut c = preset("paper-fig3").unwrap();
        c.mc.n_samples = 20_000;
        let ok = run_validate(&c, false, Execution::default()).unwrap();
        assert!(ok.passed(), "{:?}", ok.summary.render());
        c.mc.eta_override = Some(vec![0.8836, 0.5]);
        let bad = run_validate(&c, false, Execution::default()).unwrap();
        assert!(bad.failures.iter().any(|q| q == "delta_epr"), "{:?}", bad.failures);
        assert!(!bad.failures.iter().any(|q| q == "var_x_a" || q == "var_p_a"));
        assert!(bad.summary.get("verdict").unwrap().starts_with("FAIL (delta_epr"));
    }

    #[test]
    fn validate_requires_mc_and_frequencies() {
        let mut c = preset("paper-fig2").unwrap();
        assert_eq!(
            run_validate(&c, false, Execution::default()).unwrap_err().fields(),
            ["flags.run_mc"]
        );
        c.flags.run_mc = true;
        c.model.n_points = 0;
        assert!(run_validate(&c, false, Execution::default())
            .unwrap_err()
            .fields()
            .contains(&"model.n_points"));
    }

    #[test]
    fn dump_round_trips() {
        let mut c = preset("lossless").unwrap();
        c.mc.n_samples = 100;
        let r = run_validate(&c, true, Execution::default()).unwrap();
        let bytes = r.file("mc_samples.bin").unwrap();
        assert_eq!(bytes.len(), 16 + 100 * 4 * 8);
        let back = eprsim::oracle::read_samples(bytes, c.mc.seed).unwrap();
        assert_eq!(back.n_samples(), 100);
    }
}
