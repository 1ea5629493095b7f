//! Filter identification against a known rational benchmark plant,
//! noise-free and with output noise.

use rand_distr::{Distribution, StandardNormal};

use super::{monte_carlo, RunTraces, ScenarioConfig};
use crate::adaptive::AdaptiveFilterState;
use crate::error::{Error, Result};
use crate::metrics::MetricSeries;
use crate::plant::PlantModel;
use crate::signal::PrbsGenerator;

/// Excitation and structure knobs for the identification scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentParams {
    pub prbs_register_length: u32,
    pub prbs_amplitude: f64,
    /// Register start state; all-ones when unset.
    pub prbs_seed: Option<u32>,
    /// Squared parametric distance to start from in the stochastic
    /// scenario (the estimate is initialized on the scaled true vector).
    pub initial_d_squared: f64,
}

impl Default for IdentParams {
    fn default() -> Self {
        Self {
            prbs_register_length: 8,
            prbs_amplitude: 1.0,
            prbs_seed: None,
            initial_d_squared: 4.0,
        }
    }
}

/// The benchmark plant `(q^-2 + 0.5 q^-3) / (1 - 1.5 q^-1 + 0.7 q^-2)`.
pub fn benchmark_iir_plant() -> PlantModel {
    PlantModel::new(vec![1.0, 0.5], vec![-1.5, 0.7], 1).expect("benchmark plant is stable")
}

/// True parameter vector of the equation-error predictor over
/// `[y(t-1), y(t-2), u(t-2), u(t-3)]`.
pub fn benchmark_true_weights() -> [f64; 4] {
    [1.5, -0.7, 1.0, 0.5]
}

fn prbs_input(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    let mut gen = match cfg.ident.prbs_seed {
        Some(seed) => PrbsGenerator::new(
            cfg.ident.prbs_register_length,
            seed,
            cfg.ident.prbs_amplitude,
        )?,
        None => PrbsGenerator::with_default_seed(
            cfg.ident.prbs_register_length,
            cfg.ident.prbs_amplitude,
        )?,
    };
    Ok(gen.take(cfg.horizon))
}

fn at(xs: &[f64], t: isize) -> f64 {
    if t >= 0 {
        xs[t as usize]
    } else {
        0.0
    }
}

struct IdentRun {
    e_prior: Vec<f64>,
    e_posterior: Vec<f64>,
    d_squared: Vec<f64>,
    mean_energy: f64,
    final_weights: Vec<f64>,
}

/// Drive one identification run. `measured` is what the regressor and the
/// desired signal are built from (noisy in the stochastic case); `truth`
/// is the reference vector for the parametric distance.
fn drive(
    cfg: &ScenarioConfig,
    input: &[f64],
    measured: &[f64],
    truth: &[f64],
    initial: Option<&[f64]>,
) -> Result<IdentRun> {
    let n = cfg.horizon;
    let taps = truth.len();
    let mut state = AdaptiveFilterState::new(taps, cfg.algorithm, cfg.dag.clone());
    if let Some(w0) = initial {
        state = state.with_initial_weights(w0);
    }
    let mut run = IdentRun {
        e_prior: Vec::with_capacity(n),
        e_posterior: Vec::with_capacity(n),
        d_squared: Vec::with_capacity(n),
        mean_energy: 0.0,
        final_weights: Vec::new(),
    };
    let iir = cfg.scenario == super::Scenario::IdentIir
        || cfg.scenario == super::Scenario::IdentStochastic;
    let mut regressor = vec![0.0; taps];
    for t in 0..n {
        let ti = t as isize;
        if iir {
            regressor[0] = at(measured, ti - 1);
            regressor[1] = at(measured, ti - 2);
            regressor[2] = at(input, ti - 2);
            regressor[3] = at(input, ti - 3);
            state.set_regressor(&regressor);
        } else {
            state.push_input(input[t]);
        }
        run.mean_energy += state.regressor_energy();
        let rec = state.step(measured[t])?;
        run.e_prior.push(rec.e_prior);
        run.e_posterior.push(rec.e_posterior);
        let d2: f64 = state
            .weights()
            .iter()
            .zip(truth)
            .map(|(w, tw)| (w - tw) * (w - tw))
            .sum();
        run.d_squared.push(d2);
    }
    run.mean_energy /= n as f64;
    run.final_weights = state.weights().to_vec();
    Ok(run)
}

/// Noise-free identification of the benchmark plant, either in
/// equation-error form (four parameters) or as a long FIR approximation.
pub(crate) fn run_identification(cfg: &ScenarioConfig) -> Result<MetricSeries> {
    let plant = benchmark_iir_plant();
    let input = prbs_input(cfg)?;
    let output = plant.simulate(&input);
    let truth: Vec<f64> = match cfg.scenario {
        super::Scenario::IdentIir => benchmark_true_weights().to_vec(),
        super::Scenario::IdentFir => plant.impulse_response(cfg.filter_length),
        _ => unreachable!("dispatch"),
    };
    if cfg.scenario == super::Scenario::IdentIir && cfg.filter_length != truth.len() {
        return Err(Error::Config(format!(
            "equation-error identification uses exactly {} parameters",
            truth.len()
        )));
    }
    let run = drive(cfg, &input, &output, &truth, None)?;
    let mut series = MetricSeries::from_errors(run.e_prior, run.e_posterior);
    series.d_squared = run.d_squared;
    series.finalize();
    series.summary.mean_regressor_energy = Some(run.mean_energy);
    series.summary.taps = Some(truth.len());
    Ok(series)
}

/// Identification with white output noise at a fixed signal-to-noise
/// standard-deviation ratio, averaged over noise realizations, starting
/// from a scaled-true-vector offset with the configured initial
/// parametric distance.
pub(crate) fn run_identification_stochastic(cfg: &ScenarioConfig) -> Result<MetricSeries> {
    let snr_db = cfg
        .noise_snr_db
        .ok_or_else(|| Error::Config("ident_stochastic requires noise_snr_db".into()))?;
    let plant = benchmark_iir_plant();
    let input = prbs_input(cfg)?;
    let clean = plant.simulate(&input);
    let n = cfg.horizon;
    let mean = clean.iter().sum::<f64>() / n as f64;
    let var = clean.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n as f64;
    let noise_std = var.sqrt() / 10f64.powf(snr_db / 20.0);

    let truth = benchmark_true_weights();
    let norm_sq: f64 = truth.iter().map(|w| w * w).sum();
    let scale = 1.0 - (cfg.ident.initial_d_squared / norm_sq).sqrt();
    let w_init: Vec<f64> = truth.iter().map(|w| w * scale).collect();

    monte_carlo(cfg, cfg.monte_carlo_runs, |run_idx| {
        let mut rng = cfg.run_rng(run_idx);
        let measured: Vec<f64> = clean
            .iter()
            .map(|y| {
                let e: f64 = StandardNormal.sample(&mut rng);
                y + noise_std * e
            })
            .collect();
        let run = drive(cfg, &input, &measured, &truth, Some(&w_init))?;
        Ok(RunTraces {
            e_prior: run.e_prior,
            e_posterior: run.e_posterior,
            d_squared: Some(run.d_squared),
            mean_regressor_energy: run.mean_energy,
        })
    })
}
