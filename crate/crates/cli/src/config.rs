//! Scenario files: TOML on disk or one of the bundled presets.

use std::path::Path;

use eprsim::scenario::ScenarioConfig;

use crate::error::{CliError, Result};

/// Bundled presets as `(name, toml)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("paper-fig2", include_str!("../presets/paper-fig2.toml")),
    ("paper-fig3", include_str!("../presets/paper-fig3.toml")),
    ("lossless", include_str!("../presets/lossless.toml")),
    ("phasematch-12mm", include_str!("../presets/phasematch-12mm.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn parse(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| CliError::field("config", e.to_string().trim_end().to_string()))
}

pub fn to_toml(config: &ScenarioConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| CliError::Numerical(format!("cannot serialize config: {e}")))
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::field(
            "preset",
            format!("unknown preset {name:?} (known: {})", preset_names().join(", ")),
        )
    })?;
    parse(text)
}

pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::field("config", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// Command-line overrides applied on top of a loaded scenario.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ScenarioConfig) {
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            config.analyzer.seed = seed;
            config.mc.seed = seed;
        }
    }
}

/// Resolves `--config`/`--preset` and applies overrides.
pub fn resolve(config: Option<&Path>, preset_name: Option<&str>, overrides: &Overrides) -> Result<ScenarioConfig> {
    let mut c = match (config, preset_name) {
        (Some(_), Some(_)) => return Err(CliError::field("config", "give either --config or --preset, not both")),
        (Some(p), None) => load(p)?,
        (None, Some(n)) => preset(n)?,
        (None, None) => {
            return Err(CliError::field(
                "config",
                "no scenario given; use --config <path> or --preset <name>",
            ))
        }
    };
    overrides.apply(&mut c);
    Ok(c)
}
