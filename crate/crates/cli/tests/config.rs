use eprsim::scenario::{ScenarioConfig, SourceConfig, WaveguideConfig};
use eprsim_cli::config::{parse, preset, preset_names, to_toml};
use eprsim_cli::{run_epr_spectrum, CliError};
use proptest::prelude::*;

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

prop_compose! {
    fn source()(r in proptest::option::of(finite(0.0, 2.0)), pump in finite(0.0, 100.0),
                angle in finite(-3.0, 3.0), blocked in any::<bool>()) -> SourceConfig {
        match r {
            Some(r) => SourceConfig { r: Some(r), angle, blocked, ..Default::default() },
            None => SourceConfig {
                pump_mw: Some(pump),
                gain_per_sqrt_mw: Some(0.035),
                angle,
                blocked,
                ..Default::default()
            },
        }
    }
}

prop_compose! {
    fn scenario()(s0 in source(), s1 in source(), t in finite(0.0, 1.0), eta in prop::array::uniform2(finite(0.0, 1.0)),
                  qe in finite(0.5, 1.0), rbw in prop::collection::vec(finite(1e3, 1e7), 1..4),
                  seed in any::<u64>(), n in 10usize..1_000_000, wg in any::<bool>(),
                  length in finite(1e-3, 5e-2), dir in "[a-z]{1,8}") -> ScenarioConfig {
        let mut c = ScenarioConfig { sources: vec![s0, s1], ..Default::default() };
        c.hbs.transmittance = t;
        c.paths.eta = eta.to_vec();
        c.detectors[1].quantum_efficiency = qe;
        c.analyzer.rbw_hz = rbw;
        c.analyzer.seed = seed;
        c.mc.n_samples = n;
        c.mc.eta_override = if wg { Some(vec![eta[1], eta[0]]) } else { None };
        c.output.dir = dir;
        if wg {
            c.waveguide = Some(WaveguideConfig {
                length_m: length,
                temperature_k: 300.0,
                pump_wavelength_m: 473e-9,
                poling_period_m: None,
                sellmeier: "congruent-ln-jundt1997".into(),
                span_m: 2e-7,
                n_points: 501,
            });
        }
        c
    }
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(c in scenario()) {
        let text = to_toml(&c).unwrap();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(to_toml(&back).unwrap(), text);
    }
}

#[test]
fn presets_round_trip() {
    for name in preset_names() {
        let c = preset(name).unwrap();
        assert_eq!(parse(&to_toml(&c).unwrap()).unwrap(), c, "{name}");
    }
}

#[test]
fn validation_names_every_bad_field() {
    let mut c = preset("paper-fig3").unwrap();
    c.hbs.transmittance = 1.2;
    c.paths.eta = vec![0.9, -0.1];
    c.detectors[0].quantum_efficiency = 1.5;
    c.analyzer.vbw_hz = 0.0;
    c.analyzer.n_averages = 0;
    c.model.n_points = 0;
    c.mc.n_samples = 3;
    c.sources[1].r = Some(0.3);
    let err = run_epr_spectrum(&c, Default::default()).unwrap_err();
    assert_eq!(err.code(), 2);
    let fields = err.fields();
    for f in [
        "hbs.transmittance",
        "paths.eta[1]",
        "detectors[0].quantum_efficiency",
        "analyzer.vbw_hz",
        "analyzer.n_averages",
        "model.n_points",
        "mc.n_samples",
        "sources[1]",
    ] {
        assert!(fields.contains(&f), "{f} missing from {fields:?}");
    }
    let text = err.to_string();
    assert!(text.contains("hbs.transmittance"), "{text}");
}

#[test]
fn source_count_is_checked() {
    let mut c = preset("paper-fig3").unwrap();
    c.sources.pop();
    match run_epr_spectrum(&c, Default::default()) {
        Err(CliError::Validation(v)) => assert!(v.iter().any(|v| v.field == "sources")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn partial_sections_take_defaults() {
    let c = parse("name = \"p\"\n[hbs]\ntransmittance = 0.4\n[analyzer]\nrbw_hz = [5000000.0]\n").unwrap();
    assert_eq!(c.hbs.transmittance, 0.4);
    assert_eq!(c.hbs.relative_phase, std::f64::consts::FRAC_PI_2);
    assert_eq!(c.analyzer.vbw_hz, 100.0);
    assert!(c.violations().is_empty());
}
