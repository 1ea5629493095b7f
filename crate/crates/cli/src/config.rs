//! Experiment configuration files: a single TOML document whose sections
//! mirror the scenario-config fields verbatim. Unknown keys are hard
//! errors.

use serde::{Deserialize, Serialize};

use daglms_core::adaptive::{DagCoefficients, StepSizeRule};
use daglms_core::experiments::{AleParams, AncParams, IdentParams, Scenario, ScenarioConfig};
use daglms_core::plant::PlantModel;
use daglms_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: String,
    pub filter_length: Option<usize>,
    pub delay: Option<usize>,
    pub horizon: Option<usize>,
    pub noise_snr_db: Option<f64>,
    pub monte_carlo_runs: Option<usize>,
    pub rng_seed: Option<u64>,
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub dag: DagSection,
    pub ale: Option<AleSection>,
    pub ident: Option<IdentSection>,
    pub anc: Option<AncSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub kind: String,
    pub mu: f64,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagSection {
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub d_prime: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AleSection {
    pub sample_rate: Option<f64>,
    pub sine_frequencies_hz: Option<Vec<f64>>,
    pub sine_amplitudes: Option<Vec<f64>>,
    pub wideband_std: Option<f64>,
    pub lowpass_pole: Option<f64>,
    pub randomize_phases: Option<bool>,
    pub wideband_wav: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentSection {
    pub prbs_register_length: Option<u32>,
    pub prbs_amplitude: Option<f64>,
    pub prbs_seed: Option<u32>,
    pub initial_d_squared: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncSection {
    pub sample_rate: Option<f64>,
    pub noise_band_hz: Option<(f64, f64)>,
    pub noise_std: Option<f64>,
    pub tone_frequencies_hz: Option<Vec<f64>>,
    pub tone_amplitudes: Option<Vec<f64>>,
    pub attenuation_window: Option<usize>,
    pub secondary: Option<PathSection>,
    pub reverse: Option<PathSection>,
    pub primary: Option<PathSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub delay: usize,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    /// Resolve the file into a runnable scenario configuration, applying
    /// scenario defaults for everything left unset.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let scenario: Scenario = self.scenario.parse()?;
        let mut cfg = ScenarioConfig::new(scenario);
        cfg.algorithm = self.algorithm.resolve()?;
        cfg.dag = DagCoefficients::new(self.dag.c.clone(), self.dag.d_prime.clone())?;
        if let Some(v) = self.filter_length {
            cfg.filter_length = v;
        }
        if let Some(v) = self.delay {
            cfg.delay = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if self.noise_snr_db.is_some() {
            cfg.noise_snr_db = self.noise_snr_db;
        }
        if let Some(v) = self.monte_carlo_runs {
            cfg.monte_carlo_runs = v;
        }
        if let Some(v) = self.rng_seed {
            cfg.rng_seed = v;
        }
        if let Some(ale) = &self.ale {
            apply_ale(&mut cfg.ale, ale);
        }
        if let Some(ident) = &self.ident {
            apply_ident(&mut cfg.ident, ident);
        }
        if let Some(anc) = &self.anc {
            apply_anc(&mut cfg.anc, anc)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl AlgorithmSection {
    pub fn resolve(&self) -> Result<StepSizeRule> {
        match self.kind.as_str() {
            "lms" => Ok(StepSizeRule::Lms { mu: self.mu }),
            "nlms" => Ok(StepSizeRule::Nlms {
                mu: self.mu,
                delta: self.delta.unwrap_or(1e-16),
            }),
            "plms" => Ok(StepSizeRule::Plms { mu: self.mu }),
            other => Err(Error::Config(format!(
                "unknown algorithm kind `{other}` (expected lms, nlms or plms)"
            ))),
        }
    }
}

fn apply_ale(params: &mut AleParams, section: &AleSection) {
    if let Some(v) = section.sample_rate {
        params.sample_rate = v;
    }
    if let Some(v) = &section.sine_frequencies_hz {
        params.sine_frequencies_hz = v.clone();
    }
    if let Some(v) = &section.sine_amplitudes {
        params.sine_amplitudes = v.clone();
    }
    if let Some(v) = section.wideband_std {
        params.wideband_std = v;
    }
    if let Some(v) = section.lowpass_pole {
        params.lowpass_pole = v;
    }
    if let Some(v) = section.randomize_phases {
        params.randomize_phases = v;
    }
    if section.wideband_wav.is_some() {
        params.wideband_wav = section.wideband_wav.clone();
    }
}

fn apply_ident(params: &mut IdentParams, section: &IdentSection) {
    if let Some(v) = section.prbs_register_length {
        params.prbs_register_length = v;
    }
    if let Some(v) = section.prbs_amplitude {
        params.prbs_amplitude = v;
    }
    if section.prbs_seed.is_some() {
        params.prbs_seed = section.prbs_seed;
    }
    if let Some(v) = section.initial_d_squared {
        params.initial_d_squared = v;
    }
}

fn apply_anc(params: &mut AncParams, section: &AncSection) -> Result<()> {
    if let Some(v) = section.sample_rate {
        params.sample_rate = v;
    }
    if let Some(v) = section.noise_band_hz {
        params.noise_band_hz = v;
    }
    if let Some(v) = section.noise_std {
        params.noise_std = v;
    }
    if let Some(v) = &section.tone_frequencies_hz {
        params.tone_frequencies_hz = v.clone();
    }
    if let Some(v) = &section.tone_amplitudes {
        params.tone_amplitudes = v.clone();
    }
    if let Some(v) = section.attenuation_window {
        params.attenuation_window = v;
    }
    let build = |p: &PathSection| -> Result<PlantModel> {
        PlantModel::new(p.numerator.clone(), p.denominator.clone(), p.delay)
    };
    if let Some(p) = &section.secondary {
        params.secondary = build(p)?;
    }
    if let Some(p) = &section.reverse {
        params.reverse = build(p)?;
    }
    if let Some(p) = &section.primary {
        params.primary = build(p)?;
    }
    Ok(())
}

/// Sweep file: a base scenario plus a list of labelled
/// (algorithm, filter) entries to compare on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub base: ConfigFile,
    pub entries: Vec<SweepEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub label: String,
    pub algorithm: Option<AlgorithmSection>,
    #[serde(default)]
    pub dag: DagSection,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("sweep parse error: {e}")))
    }

    pub fn resolve_entry(&self, entry: &SweepEntry) -> Result<ScenarioConfig> {
        let mut cfg = self.base.resolve()?;
        if let Some(alg) = &entry.algorithm {
            cfg.algorithm = alg.resolve()?;
        }
        cfg.dag = DagCoefficients::new(entry.dag.c.clone(), entry.dag.d_prime.clone())?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "ident_iir"

[algorithm]
kind = "plms"
mu = 0.02
"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = ConfigFile::parse(MINIMAL).unwrap().resolve().unwrap();
        assert_eq!(cfg.scenario, Scenario::IdentIir);
        assert_eq!(cfg.filter_length, 4);
        assert_eq!(cfg.horizon, 256);
        assert!(cfg.dag.is_identity());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MINIMAL}\nnot_a_key = 1\n");
        assert!(ConfigFile::parse(&bad).is_err());
        let bad_nested = MINIMAL.replace("mu = 0.02", "mu = 0.02\nstep = 3");
        assert!(ConfigFile::parse(&bad_nested).is_err());
    }

    #[test]
    fn bad_algorithm_kind_is_a_config_error() {
        let bad = MINIMAL.replace("plms", "rls");
        let err = ConfigFile::parse(&bad).unwrap().resolve().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn roundtrips_through_toml() {
        let file = ConfigFile::parse(MINIMAL).unwrap();
        let again = ConfigFile::parse(&toml::to_string_pretty(&file).unwrap()).unwrap();
        assert_eq!(again.scenario, "ident_iir");
    }

    #[test]
    fn sweep_entries_override_base() {
        let text = r#"
[base]
scenario = "ident_iir"
[base.algorithm]
kind = "plms"
mu = 0.02

[[entries]]
label = "gradient"

[[entries]]
label = "arima2"
[entries.dag]
c = [0.65]
d_prime = [0.3]
"#;
        let sweep = SweepFile::parse(text).unwrap();
        assert_eq!(sweep.entries.len(), 2);
        let cfg = sweep.resolve_entry(&sweep.entries[1]).unwrap();
        assert_eq!(cfg.dag.c(), &[0.65]);
    }
}
