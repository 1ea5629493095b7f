//! Python bindings: the gain-filter type, its design checks, the adaptive
//! filter and the experiment scenarios, exposed as the `daglms` module.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use daglms_core::adaptive::{self, StepSizeRule};
use daglms_core::analysis;
use daglms_core::design;
use daglms_core::experiments::{self, Scenario, ScenarioConfig};
use daglms_core::plant::PlantModel;
use daglms_core::signal::PrbsGenerator;
use daglms_core::MetricSeries;

fn to_py_err(err: daglms_core::Error) -> PyErr {
    match err {
        daglms_core::Error::Divergence { .. } => PyRuntimeError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_rule(kind: &str, mu: f64, delta: Option<f64>) -> PyResult<StepSizeRule> {
    match kind {
        "lms" => Ok(StepSizeRule::Lms { mu }),
        "nlms" => Ok(StepSizeRule::Nlms {
            mu,
            delta: delta.unwrap_or(1e-16),
        }),
        "plms" => Ok(StepSizeRule::Plms { mu }),
        other => Err(PyValueError::new_err(format!(
            "unknown algorithm `{other}` (expected lms, nlms or plms)"
        ))),
    }
}

/// Dynamic adaptation-gain filter `(1 + c1 q^-1 + ...) / (1 - d1' q^-1 - ...)`.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct DagCoefficients {
    inner: adaptive::DagCoefficients,
}

#[pymethods]
impl DagCoefficients {
    #[new]
    #[pyo3(signature = (c=vec![], d_prime=vec![]))]
    fn new(c: Vec<f64>, d_prime: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: adaptive::DagCoefficients::new(c, d_prime).map_err(to_py_err)?,
        })
    }

    /// Second-order-numerator, first-order-denominator shape.
    #[staticmethod]
    fn arima2(c1: f64, c2: f64, d1_prime: f64) -> PyResult<Self> {
        Ok(Self {
            inner: adaptive::DagCoefficients::arima2(c1, c2, d1_prime).map_err(to_py_err)?,
        })
    }

    /// The plain algorithm (no filtering of the correction term).
    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: adaptive::DagCoefficients::identity(),
        }
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.c().to_vec()
    }

    #[getter]
    fn d_prime(&self) -> Vec<f64> {
        self.inner.d_prime().to_vec()
    }

    /// Coefficients of the integrated denominator `(1 - q^-1) D'`.
    #[getter]
    fn integrated_denominator(&self) -> Vec<f64> {
        self.inner.integrated_denominator().to_vec()
    }

    /// Strict positive realness from the frequency sweep plus root checks.
    #[pyo3(signature = (grid_size=8192))]
    fn is_spr(&self, grid_size: usize) -> bool {
        design::spr_sweep_oracle(&self.inner, grid_size).is_spr
    }

    /// Positive realness of the integrator-cascaded operator.
    #[pyo3(signature = (grid_size=8192))]
    fn is_operator_pr(&self, grid_size: usize) -> bool {
        design::paa_pr_check(&self.inner, grid_size)
    }

    fn steady_state_gain(&self) -> PyResult<f64> {
        design::steady_state_gain(&self.inner).map_err(to_py_err)
    }

    /// Half-circle log-gain integral (zero for strictly stable filters).
    #[pyo3(signature = (nodes=16384))]
    fn log_gain_integral(&self, nodes: usize) -> PyResult<f64> {
        design::log_gain_integral(&self.inner, nodes).map_err(to_py_err)
    }

    /// Frequency response on `(0, pi]` as a dict of lists.
    #[pyo3(signature = (grid_size=8192))]
    fn bode<'py>(&self, py: Python<'py>, grid_size: usize) -> PyResult<Bound<'py, PyDict>> {
        let resp = design::bode(&self.inner, grid_size);
        let d = PyDict::new(py);
        d.set_item("omega", resp.omega)?;
        d.set_item("magnitude_db", resp.magnitude_db)?;
        d.set_item("phase_deg", resp.phase_deg)?;
        d.set_item("real_part", resp.real_part)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "DagCoefficients(c={:?}, d_prime={:?})",
            self.inner.c(),
            self.inner.d_prime()
        )
    }
}

/// Closed-form strict-positive-realness test for the
/// `(1 + c1 q^-1 + c2 q^-2) / (1 - d1' q^-1)` shape.
#[pyfunction]
fn spr_criterion_arima2(c1: f64, c2: f64, d1_prime: f64) -> bool {
    design::spr_criterion_arima2(c1, c2, d1_prime)
}

/// `(step_response, settling_time, predicted_speedup, stable)`.
type TransientTuple = (Vec<f64>, Option<usize>, Option<f64>, bool);

/// Step response of the linearized adaptation loop.
/// Returns `(step_response, settling_time, predicted_speedup, stable)`.
#[pyfunction]
#[pyo3(signature = (gain, dag, horizon=4000))]
fn sensitivity_step_response(
    gain: f64,
    dag: &DagCoefficients,
    horizon: usize,
) -> PyResult<TransientTuple> {
    let model = analysis::SensitivityModel::new(gain, dag.inner.clone()).map_err(to_py_err)?;
    let report = analysis::sensitivity_step_response(&model, horizon);
    Ok((
        report.step_response,
        report.settling_time,
        report.predicted_speedup,
        report.stable,
    ))
}

/// Maximal-length +-amplitude pseudo-random binary sequence.
#[pyfunction]
#[pyo3(signature = (register_length, n, amplitude=1.0, seed=None))]
fn prbs(register_length: u32, n: usize, amplitude: f64, seed: Option<u32>) -> PyResult<Vec<f64>> {
    let mut gen = match seed {
        Some(s) => PrbsGenerator::new(register_length, s, amplitude),
        None => PrbsGenerator::with_default_seed(register_length, amplitude),
    }
    .map_err(to_py_err)?;
    Ok(gen.take(n))
}

/// Filter `input` through the rational plant
/// `q^-delay (b1 q^-1 + ...) / (1 + a1 q^-1 + ...)`.
#[pyfunction]
#[pyo3(signature = (numerator, denominator, delay, input))]
fn simulate_plant(
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    delay: usize,
    input: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let plant = PlantModel::new(numerator, denominator, delay).map_err(to_py_err)?;
    Ok(plant.simulate(&input))
}

/// One adaptive FIR filter with an optional adaptation-gain filter.
#[pyclass]
struct AdaptiveFilter {
    state: adaptive::AdaptiveFilterState,
}

#[pymethods]
impl AdaptiveFilter {
    #[new]
    #[pyo3(signature = (n_taps, algorithm, mu, delta=None, dag=None, exact_prediction=true))]
    fn new(
        n_taps: usize,
        algorithm: &str,
        mu: f64,
        delta: Option<f64>,
        dag: Option<&DagCoefficients>,
        exact_prediction: bool,
    ) -> PyResult<Self> {
        let rule = parse_rule(algorithm, mu, delta)?;
        let dag = dag
            .map(|d| d.inner.clone())
            .unwrap_or_else(adaptive::DagCoefficients::identity);
        let mut state = adaptive::AdaptiveFilterState::new(n_taps, rule, dag);
        if !exact_prediction {
            state = state.with_approximate_prediction();
        }
        Ok(Self { state })
    }

    /// Shift one sample into the regressor tap line.
    fn push(&mut self, sample: f64) {
        self.state.push_input(sample);
    }

    /// Update against a desired sample;
    /// returns `(e_prior, e_posterior, mu_t)`.
    fn step(&mut self, desired: f64) -> PyResult<(f64, f64, f64)> {
        let rec = self.state.step(desired).map_err(to_py_err)?;
        Ok((rec.e_prior, rec.e_posterior, rec.mu_t))
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.state.weights().to_vec()
    }
}

/// Drive an adaptive filter over full input/desired sequences; the
/// regressor is the input delayed by `delay` samples.
#[pyfunction]
#[pyo3(signature = (input, desired, algorithm, mu, filter_length, delta=None, dag=None, delay=None))]
#[allow(clippy::too_many_arguments)]
fn run_filter<'py>(
    py: Python<'py>,
    input: Vec<f64>,
    desired: Vec<f64>,
    algorithm: &str,
    mu: f64,
    filter_length: usize,
    delta: Option<f64>,
    dag: Option<&DagCoefficients>,
    delay: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let rule = parse_rule(algorithm, mu, delta)?;
    let dag = dag
        .map(|d| d.inner.clone())
        .unwrap_or_else(adaptive::DagCoefficients::identity);
    let series = adaptive::run_filter(&input, &desired, rule, &dag, filter_length, delay)
        .map_err(to_py_err)?;
    series_to_dict(py, &series)
}

fn series_to_dict<'py>(py: Python<'py>, series: &MetricSeries) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("e_prior", &series.e_prior)?;
    d.set_item("e_posterior", &series.e_posterior)?;
    d.set_item("mse_db", &series.mse_db)?;
    if !series.d_squared.is_empty() {
        d.set_item("d_squared", &series.d_squared)?;
        d.set_item("j_d", &series.j_d)?;
    }
    d.set_item("j_eps", &series.j_eps)?;
    if !series.attenuation_db.is_empty() {
        d.set_item("attenuation_db", &series.attenuation_db)?;
    }
    let s = &series.summary;
    d.set_item("convergence_time", s.convergence_time)?;
    d.set_item("sum_mse", s.sum_mse)?;
    d.set_item("j_d_final", s.j_d_final)?;
    d.set_item("j_eps_final", s.j_eps_final)?;
    d.set_item("terminal_d_squared", s.terminal_d_squared)?;
    d.set_item("terminal_attenuation_db", s.terminal_attenuation_db)?;
    Ok(d)
}

/// Run one of the built-in experiment scenarios
/// (`ale`, `ident_iir`, `ident_fir`, `ident_stochastic`, `anc_synthetic`)
/// and return its metrics as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, algorithm, mu, dag=None, delta=None, filter_length=None,
                    delay=None, horizon=None, monte_carlo_runs=None, rng_seed=None,
                    noise_snr_db=None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    scenario: &str,
    algorithm: &str,
    mu: f64,
    dag: Option<&DagCoefficients>,
    delta: Option<f64>,
    filter_length: Option<usize>,
    delay: Option<usize>,
    horizon: Option<usize>,
    monte_carlo_runs: Option<usize>,
    rng_seed: Option<u64>,
    noise_snr_db: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let scenario: Scenario = scenario.parse().map_err(to_py_err)?;
    let mut cfg = ScenarioConfig::new(scenario);
    cfg.algorithm = parse_rule(algorithm, mu, delta)?;
    if let Some(d) = dag {
        cfg.dag = d.inner.clone();
    }
    if let Some(v) = filter_length {
        cfg.filter_length = v;
    }
    if let Some(v) = delay {
        cfg.delay = v;
    }
    if let Some(v) = horizon {
        cfg.horizon = v;
    }
    if let Some(v) = monte_carlo_runs {
        cfg.monte_carlo_runs = v;
    }
    if let Some(v) = rng_seed {
        cfg.rng_seed = v;
    }
    if noise_snr_db.is_some() {
        cfg.noise_snr_db = noise_snr_db;
    }
    let series = py
        .detach(|| experiments::run_scenario(&cfg))
        .map_err(to_py_err)?;
    series_to_dict(py, &series)
}

#[pymodule]
fn daglms(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<DagCoefficients>()?;
    m.add_class::<AdaptiveFilter>()?;
    m.add_function(wrap_pyfunction!(spr_criterion_arima2, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_step_response, m)?)?;
    m.add_function(wrap_pyfunction!(prbs, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_plant, m)?)?;
    m.add_function(wrap_pyfunction!(run_filter, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
