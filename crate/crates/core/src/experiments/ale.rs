//! Adaptive line enhancer: a decorrelation delay separates narrowband
//! tones from a wideband masker; the filter learns to predict (and hence
//! cancel) the tonal part.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{monte_carlo, RunTraces, ScenarioConfig};
use crate::adaptive::{run_filter, AdaptiveFilterState};
use crate::error::{Error, Result};
use crate::metrics::MetricSeries;
use crate::signal;

/// Construction of the enhancer input: four fixed tones over a lowpassed
/// Gaussian wideband source.
#[derive(Debug, Clone, PartialEq)]
pub struct AleParams {
    pub sample_rate: f64,
    pub sine_frequencies_hz: Vec<f64>,
    pub sine_amplitudes: Vec<f64>,
    /// Standard deviation of the wideband component (the lowpassed noise is
    /// normalized to unit variance before scaling).
    pub wideband_std: f64,
    /// Pole of the first-order lowpass shaping the wideband source.
    pub lowpass_pole: f64,
    /// Draw tone phases per run. Keeps the first samples entering the
    /// delay line at working amplitude, which the normalized step-size
    /// rules need, and doubles as phase averaging across runs.
    pub randomize_phases: bool,
    /// Replace the synthetic wideband source with a mono 16-bit PCM file
    /// (still scaled by `wideband_std`).
    pub wideband_wav: Option<std::path::PathBuf>,
}

impl Default for AleParams {
    fn default() -> Self {
        Self {
            sample_rate: 8000.0,
            sine_frequencies_hz: vec![80.0, 125.0, 230.0, 400.0],
            sine_amplitudes: vec![0.1, 0.1, 0.1, 0.1],
            wideband_std: 1e-3,
            lowpass_pole: 0.9,
            randomize_phases: true,
            wideband_wav: None,
        }
    }
}

pub(crate) fn make_input(params: &AleParams, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let phases: Vec<f64> = params
        .sine_frequencies_hz
        .iter()
        .map(|_| {
            if params.randomize_phases {
                rng.random_range(0.0..std::f64::consts::TAU)
            } else {
                0.0
            }
        })
        .collect();
    let mut signal = vec![0.0; n];
    for ((f, a), ph) in params
        .sine_frequencies_hz
        .iter()
        .zip(&params.sine_amplitudes)
        .zip(&phases)
    {
        let w = std::f64::consts::TAU * f / params.sample_rate;
        for (t, s) in signal.iter_mut().enumerate() {
            *s += a * (w * t as f64 + ph).sin();
        }
    }
    match &params.wideband_wav {
        Some(path) => {
            let (samples, _) = signal::read_pcm_wav(path)?;
            if samples.len() < n {
                return Err(Error::Ingestion(format!(
                    "{}: {} samples, horizon needs {n}",
                    path.display(),
                    samples.len()
                )));
            }
            for (s, w) in signal.iter_mut().zip(&samples) {
                *s += params.wideband_std * w;
            }
        }
        None => {
            // unit-variance AR(1) wideband source, scaled to the
            // requested level
            let pole = params.lowpass_pole;
            let drive = (1.0 - pole * pole).sqrt() * params.wideband_std;
            let mut state = 0.0;
            for s in signal.iter_mut() {
                let white: f64 = StandardNormal.sample(rng);
                state = pole * state + white;
                *s += drive * state;
            }
        }
    }
    Ok(signal)
}

pub(crate) fn run_ale(cfg: &ScenarioConfig) -> Result<MetricSeries> {
    monte_carlo(cfg, cfg.monte_carlo_runs, |run_idx| {
        let mut rng = cfg.run_rng(run_idx);
        let signal = make_input(&cfg.ale, cfg.horizon, &mut rng)?;
        let series = run_filter(
            &signal,
            &signal,
            cfg.algorithm,
            &cfg.dag,
            cfg.filter_length,
            Some(cfg.delay),
        )?;
        Ok(RunTraces {
            mean_regressor_energy: series.summary.mean_regressor_energy.unwrap_or(0.0),
            e_prior: series.e_prior,
            e_posterior: series.e_posterior,
            d_squared: None,
        })
    })
}

/// Final enhancer weights of a single run (used by the transient-overlay
/// tooling and the bindings).
pub fn ale_final_weights(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    let mut rng = cfg.run_rng(0);
    let signal = make_input(&cfg.ale, cfg.horizon, &mut rng)?;
    let mut state = AdaptiveFilterState::new(cfg.filter_length, cfg.algorithm, cfg.dag.clone());
    for t in 0..signal.len() {
        let tap = if t >= cfg.delay {
            signal[t - cfg.delay]
        } else {
            0.0
        };
        state.push_input(tap);
        state.step(signal[t])?;
    }
    Ok(state.weights().to_vec())
}
