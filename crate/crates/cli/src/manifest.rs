//! Run manifests: every output set is written alongside a snapshot of the
//! resolved configuration, the tool version and the effective seed, so a
//! run can be reproduced bit-identically from its manifest alone.

use serde::{Deserialize, Serialize};

use daglms_core::{Error, Result};

use crate::config::ConfigFile;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub rng_seed: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub config: ConfigFile,
}

impl RunManifest {
    pub fn new(config: ConfigFile, rng_seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed,
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
            config,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("manifest parse error: {e}")))
    }
}

/// Accept either a plain config file or a manifest (from which the config
/// snapshot and its recorded seed are extracted).
pub fn load_config_or_manifest(text: &str) -> Result<(ConfigFile, Option<u64>)> {
    if text.contains("tool_version") {
        if let Ok(manifest) = RunManifest::parse(text) {
            return Ok((manifest.config, Some(manifest.rng_seed)));
        }
    }
    Ok((ConfigFile::parse(text)?, None))
}
