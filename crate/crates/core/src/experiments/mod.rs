//! Experiment scenarios: the adaptive line enhancer, IIR/FIR/stochastic
//! filter identification and a synthetic feedforward noise-control run.

mod ale;
mod anc;
mod ident;

pub use ale::{ale_final_weights, AleParams};
pub use anc::AncParams;
pub use ident::{benchmark_iir_plant, benchmark_true_weights, IdentParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adaptive::{DagCoefficients, StepSizeRule};
use crate::error::{Error, Result};
use crate::metrics::MetricSeries;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Ale,
    IdentIir,
    IdentFir,
    IdentStochastic,
    AncSynthetic,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Ale => "ale",
            Scenario::IdentIir => "ident_iir",
            Scenario::IdentFir => "ident_fir",
            Scenario::IdentStochastic => "ident_stochastic",
            Scenario::AncSynthetic => "anc_synthetic",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ale" => Ok(Scenario::Ale),
            "ident_iir" => Ok(Scenario::IdentIir),
            "ident_fir" => Ok(Scenario::IdentFir),
            "ident_stochastic" => Ok(Scenario::IdentStochastic),
            "anc_synthetic" => Ok(Scenario::AncSynthetic),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub algorithm: StepSizeRule,
    pub dag: DagCoefficients,
    pub filter_length: usize,
    pub delay: usize,
    pub horizon: usize,
    pub noise_snr_db: Option<f64>,
    pub monte_carlo_runs: usize,
    pub rng_seed: u64,
    pub ale: AleParams,
    pub ident: IdentParams,
    pub anc: AncParams,
}

impl ScenarioConfig {
    /// Baseline configuration with the conventional sizes for each
    /// scenario.
    pub fn new(scenario: Scenario) -> Self {
        let (filter_length, delay, horizon, runs) = match scenario {
            Scenario::Ale => (100, 100, 40_000, 50),
            Scenario::IdentIir => (4, 0, 256, 1),
            Scenario::IdentFir => (30, 0, 256, 1),
            Scenario::IdentStochastic => (4, 0, 400, 100),
            Scenario::AncSynthetic => (60, 0, 150_000, 1),
        };
        Self {
            scenario,
            algorithm: StepSizeRule::Plms { mu: 0.02 },
            dag: DagCoefficients::identity(),
            filter_length,
            delay,
            horizon,
            noise_snr_db: match scenario {
                Scenario::IdentStochastic => Some(33.0),
                _ => None,
            },
            monte_carlo_runs: runs,
            rng_seed: 1,
            ale: AleParams::default(),
            ident: if scenario == Scenario::IdentStochastic {
                IdentParams {
                    prbs_register_length: 11,
                    ..IdentParams::default()
                }
            } else {
                IdentParams::default()
            },
            anc: AncParams::default(),
        }
    }

    pub fn with_algorithm(mut self, rule: StepSizeRule) -> Self {
        self.algorithm = rule;
        self
    }

    pub fn with_dag(mut self, dag: DagCoefficients) -> Self {
        self.dag = dag;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.monte_carlo_runs = runs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.filter_length == 0 {
            return Err(Error::Config("filter_length must be at least 1".into()));
        }
        if self.monte_carlo_runs == 0 {
            return Err(Error::Config("monte_carlo_runs must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.scenario == Scenario::IdentStochastic && self.noise_snr_db.is_none() {
            return Err(Error::Config(
                "ident_stochastic requires noise_snr_db".into(),
            ));
        }
        Ok(())
    }

    /// Independent RNG stream for one Monte Carlo run: same seed, stream
    /// index = run index, so averages do not depend on execution order.
    pub(crate) fn run_rng(&self, run_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(run_index as u64);
        rng
    }
}

/// Dispatch a configuration to its scenario implementation.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricSeries> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Ale => ale::run_ale(cfg),
        Scenario::IdentIir | Scenario::IdentFir => ident::run_identification(cfg),
        Scenario::IdentStochastic => ident::run_identification_stochastic(cfg),
        Scenario::AncSynthetic => anc::run_anc_synthetic(cfg),
    }
}

/// Per-run traces that Monte Carlo averaging combines.
pub(crate) struct RunTraces {
    pub e_prior: Vec<f64>,
    pub e_posterior: Vec<f64>,
    pub d_squared: Option<Vec<f64>>,
    pub mean_regressor_energy: f64,
}

/// Run `runs` independent realizations (in parallel) and fold them into a
/// single series: error columns hold root-mean-square values across runs,
/// the parametric distance is averaged. The fold is sequential over run
/// index, so results are bit-identical no matter the thread schedule.
pub(crate) fn monte_carlo<F>(cfg: &ScenarioConfig, runs: usize, run_one: F) -> Result<MetricSeries>
where
    F: Fn(usize) -> Result<RunTraces> + Sync,
{
    let traces: Vec<RunTraces> = (0..runs)
        .into_par_iter()
        .map(&run_one)
        .collect::<Result<_>>()?;
    let n = traces[0].e_prior.len();
    let mut sq_prior = vec![0.0f64; n];
    let mut sq_post = vec![0.0f64; n];
    let mut d2 = traces[0].d_squared.as_ref().map(|_| vec![0.0f64; n]);
    let mut energy = 0.0;
    for tr in &traces {
        for t in 0..n {
            sq_prior[t] += tr.e_prior[t] * tr.e_prior[t];
            sq_post[t] += tr.e_posterior[t] * tr.e_posterior[t];
        }
        if let (Some(acc), Some(run_d2)) = (d2.as_mut(), tr.d_squared.as_ref()) {
            for t in 0..n {
                acc[t] += run_d2[t];
            }
        }
        energy += tr.mean_regressor_energy;
    }
    let scale = 1.0 / runs as f64;
    let mut series = MetricSeries::with_capacity(n);
    series.e_prior = sq_prior.iter().map(|s| (s * scale).sqrt()).collect();
    series.e_posterior = sq_post.iter().map(|s| (s * scale).sqrt()).collect();
    if let Some(acc) = d2 {
        series.d_squared = acc.iter().map(|s| s * scale).collect();
    }
    series.finalize();
    series.summary.mean_regressor_energy = Some(energy * scale);
    series.summary.taps = Some(cfg.filter_length);
    Ok(series)
}

/// Monte Carlo fold for the noise-control scenario: powers are averaged
/// across runs before the attenuation ratio is formed.
pub(crate) fn monte_carlo_anc<F>(cfg: &ScenarioConfig, run_one: F) -> Result<MetricSeries>
where
    F: Fn(usize) -> Result<anc::AncRun> + Sync,
{
    let runs: Vec<anc::AncRun> = (0..cfg.monte_carlo_runs)
        .into_par_iter()
        .map(&run_one)
        .collect::<Result<_>>()?;
    let n = runs[0].e_prior.len();
    let scale = 1.0 / runs.len() as f64;
    let mut residual_sq = vec![0.0f64; n];
    let mut open_loop_sq = vec![0.0f64; n];
    let mut sq_prior = vec![0.0f64; n];
    let mut sq_post = vec![0.0f64; n];
    let mut energy = 0.0;
    for run in &runs {
        for t in 0..n {
            residual_sq[t] += run.residual_sq[t];
            open_loop_sq[t] += run.open_loop_sq[t];
            sq_prior[t] += run.e_prior[t] * run.e_prior[t];
            sq_post[t] += run.e_posterior[t] * run.e_posterior[t];
        }
        energy += run.mean_energy;
    }
    for t in 0..n {
        residual_sq[t] *= scale;
        open_loop_sq[t] *= scale;
    }
    let mut series = MetricSeries::with_capacity(n);
    series.e_prior = sq_prior.iter().map(|s| (s * scale).sqrt()).collect();
    series.e_posterior = sq_post.iter().map(|s| (s * scale).sqrt()).collect();
    series.attenuation_db =
        anc::attenuation_from_power(&open_loop_sq, &residual_sq, cfg.anc.attenuation_window);
    series.finalize();
    series.summary.mean_regressor_energy = Some(energy * scale);
    series.summary.taps = Some(cfg.filter_length);
    Ok(series)
}
