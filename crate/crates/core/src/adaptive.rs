//! The adaptive FIR predictor and its update recursion.
//!
//! The weight update filters the correction term `mu(t) r(t) e'(t)` through
//! a rational dynamic adaptation gain `C(q^-1) / D'(q^-1)` before it is
//! integrated into the weights:
//!
//! ```text
//! w(t) = sum_{i=1..nD} d_i w(t-i)
//!        + mu(t) r(t) e'(t)
//!        + sum_{j=1..nC} c_j mu(t-j) r(t-j) e'(t-j)
//! ```
//!
//! with `d_i = d'_i - d'_{i-1}`, `d'_0 = -1`, `d'_{nD} = 0`. An empty
//! filter (`C = D' = 1`) collapses to the plain variable step-size update.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::metrics::MetricSeries;

/// Weight-norm threshold above which the update reports divergence instead
/// of silently producing NaNs.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// Numerator/denominator coefficients of the dynamic adaptation gain
/// `H = (1 + c1 q^-1 + ...) / (1 - d'1 q^-1 - ...)`, plus the derived
/// coefficients of the integrated denominator `D = (1 - q^-1) D'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DagCoefficients {
    c: Vec<f64>,
    d_prime: Vec<f64>,
    d: Vec<f64>,
}

impl DagCoefficients {
    pub fn new(c: Vec<f64>, d_prime: Vec<f64>) -> Result<Self> {
        if !c.iter().chain(&d_prime).all(|x| x.is_finite()) {
            return Err(Error::Config("DAG coefficients must be finite".into()));
        }
        // d_i = d'_i - d'_{i-1} with d'_0 = -1 and d'_{nD} = 0
        let n_d = d_prime.len() + 1;
        let dp_at = |i: usize| -> f64 {
            if i == 0 {
                -1.0
            } else if i <= d_prime.len() {
                d_prime[i - 1]
            } else {
                0.0
            }
        };
        let d = (1..=n_d).map(|i| dp_at(i) - dp_at(i - 1)).collect();
        Ok(Self { c, d_prime, d })
    }

    /// `C = D' = 1`: reproduces the plain algorithm exactly.
    pub fn identity() -> Self {
        Self::new(Vec::new(), Vec::new()).unwrap()
    }

    /// Second-order-numerator, first-order-denominator form
    /// `(1 + c1 q^-1 + c2 q^-2) / (1 - d1' q^-1)`. Zero trailing
    /// coefficients are trimmed so an all-zero call equals `identity()`.
    pub fn arima2(c1: f64, c2: f64, d1_prime: f64) -> Result<Self> {
        let c = if c2 != 0.0 {
            vec![c1, c2]
        } else if c1 != 0.0 {
            vec![c1]
        } else {
            Vec::new()
        };
        let d_prime = if d1_prime != 0.0 {
            vec![d1_prime]
        } else {
            Vec::new()
        };
        Self::new(c, d_prime)
    }

    pub fn is_identity(&self) -> bool {
        self.c.is_empty() && self.d_prime.is_empty()
    }

    /// Moving-average coefficients `c_1..c_nC` (leading 1 implied).
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Denominator coefficients `d'_1..d'_nD'` (sign convention
    /// `D' = 1 - d'_1 q^-1 - ...`).
    pub fn d_prime(&self) -> &[f64] {
        &self.d_prime
    }

    /// Coefficients `d_1..d_nD` of the integrated denominator
    /// `D = (1 - q^-1) D'` in the convention `D = 1 - d_1 q^-1 - ...`.
    pub fn integrated_denominator(&self) -> &[f64] {
        &self.d
    }

    /// Numerator as a plain polynomial `[1, c1, c2, ...]`.
    pub fn numerator_poly(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.c.len() + 1);
        p.push(1.0);
        p.extend_from_slice(&self.c);
        p
    }

    /// Denominator as a plain polynomial `[1, -d'1, -d'2, ...]`.
    pub fn denominator_poly(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.d_prime.len() + 1);
        p.push(1.0);
        p.extend(self.d_prime.iter().map(|d| -d));
        p
    }
}

/// Step-size rule for the variable step-size update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSizeRule {
    /// Constant step size.
    Lms { mu: f64 },
    /// Normalized: `mu / (delta + r'r)`.
    Nlms { mu: f64, delta: f64 },
    /// A-posteriori form: `mu / (1 + mu r'r)`.
    Plms { mu: f64 },
}

impl StepSizeRule {
    /// NLMS with the conventional tiny regularizer.
    pub fn nlms(mu: f64) -> Self {
        StepSizeRule::Nlms { mu, delta: 1e-16 }
    }

    pub fn mu(&self) -> f64 {
        match *self {
            StepSizeRule::Lms { mu }
            | StepSizeRule::Nlms { mu, .. }
            | StepSizeRule::Plms { mu } => mu,
        }
    }

    /// Effective step size for the current regressor energy.
    pub fn step_size(&self, r_dot_r: f64) -> f64 {
        match *self {
            StepSizeRule::Lms { mu } => mu,
            StepSizeRule::Nlms { mu, delta } => mu / (delta + r_dot_r),
            StepSizeRule::Plms { mu } => mu / (1.0 + mu * r_dot_r),
        }
    }
}

/// Per-sample record of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    /// A-priori prediction error `e'(t)` (before the weight update).
    pub e_prior: f64,
    /// A-posteriori prediction error `e(t)`. For PLMS this is
    /// `e'(t) / (1 + mu r'r)`; otherwise it is recomputed with the
    /// updated weights.
    pub e_posterior: f64,
    /// Effective step size used this sample.
    pub mu_t: f64,
    /// A-priori output.
    pub y_prior: f64,
    /// A-posteriori output.
    pub y_posterior: f64,
}

/// State of one adaptive filter: current weights, the weight and
/// correction-term histories the adaptation-gain filter needs, and the
/// regressor tap line.
#[derive(Debug, Clone)]
pub struct AdaptiveFilterState {
    dag: DagCoefficients,
    rule: StepSizeRule,
    /// Exact a-priori predictor (true by default); when false, the
    /// prediction uses `w(t-1)` directly as a low-order approximation.
    exact_prediction: bool,
    weights: Vec<f64>,
    /// `w(t-1), w(t-2), ..., w(t-nD)`, newest first.
    weight_history: VecDeque<Vec<f64>>,
    /// `mu(k) r(k) e'(k)` for `k = t-1 .. t-nC`, newest first.
    correction_history: VecDeque<Vec<f64>>,
    /// `r(t) = [d(t), d(t-1), ..., d(t-nW)]`, newest first.
    regressor: VecDeque<f64>,
    samples_seen: usize,
}

impl AdaptiveFilterState {
    pub fn new(n_taps: usize, rule: StepSizeRule, dag: DagCoefficients) -> Self {
        let n_d = dag.integrated_denominator().len();
        let n_c = dag.c().len();
        Self {
            dag,
            rule,
            exact_prediction: true,
            weights: vec![0.0; n_taps],
            weight_history: (0..n_d).map(|_| vec![0.0; n_taps]).collect(),
            correction_history: (0..n_c).map(|_| vec![0.0; n_taps]).collect(),
            regressor: (0..n_taps).map(|_| 0.0).collect(),
            samples_seen: 0,
        }
    }

    /// Switch to the approximate a-priori predictor `w(t-1)' r(t)`.
    pub fn with_approximate_prediction(mut self) -> Self {
        self.exact_prediction = false;
        self
    }

    /// Start from non-zero weights (histories are seeded with the same
    /// vector, as if the filter had been sitting at that point forever).
    pub fn with_initial_weights(mut self, w0: &[f64]) -> Self {
        assert_eq!(w0.len(), self.weights.len());
        self.weights.copy_from_slice(w0);
        for h in &mut self.weight_history {
            h.copy_from_slice(w0);
        }
        self
    }

    pub fn n_taps(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> StepSizeRule {
        self.rule
    }

    pub fn dag(&self) -> &DagCoefficients {
        &self.dag
    }

    pub fn samples_seen(&self) -> usize {
        self.samples_seen
    }

    /// Shift the tap line: the pushed sample becomes `r(t)[0]`.
    pub fn push_input(&mut self, sample: f64) {
        self.regressor.pop_back();
        self.regressor.push_front(sample);
    }

    /// Replace the whole regressor (for structured regressors that are not
    /// a tapped delay line of one signal).
    pub fn set_regressor(&mut self, r: &[f64]) {
        assert_eq!(r.len(), self.regressor.len());
        for (slot, &v) in self.regressor.iter_mut().zip(r) {
            *slot = v;
        }
    }

    pub fn regressor(&self) -> impl Iterator<Item = f64> + '_ {
        self.regressor.iter().copied()
    }

    fn dot_regressor(&self, w: &[f64]) -> f64 {
        w.iter()
            .zip(self.regressor.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Energy `r'r` of the current regressor.
    pub fn regressor_energy(&self) -> f64 {
        self.regressor.iter().map(|x| x * x).sum()
    }

    /// The base vector `w0(t-1)` of the update recursion:
    /// `sum_i d_i w(t-i) + sum_j c_j mu(t-j) r(t-j) e'(t-j)`.
    fn w0(&self) -> Vec<f64> {
        let n = self.weights.len();
        let mut w0 = vec![0.0; n];
        for (di, wh) in self
            .dag
            .integrated_denominator()
            .iter()
            .zip(&self.weight_history)
        {
            for (o, &w) in w0.iter_mut().zip(wh) {
                *o += di * w;
            }
        }
        for (cj, corr) in self.dag.c().iter().zip(&self.correction_history) {
            for (o, &v) in w0.iter_mut().zip(corr) {
                *o += cj * v;
            }
        }
        w0
    }

    /// A-priori output for the current regressor without updating anything.
    pub fn predict_prior(&self) -> f64 {
        if self.exact_prediction && !self.dag.is_identity() {
            self.dot_regressor(&self.w0())
        } else {
            self.dot_regressor(&self.weights)
        }
    }

    /// Full update against a desired sample: predict, form the a-priori
    /// error, update the weights, rotate histories.
    pub fn step(&mut self, desired: f64) -> Result<UpdateRecord> {
        let w0 = self.w0();
        let y_prior = if self.exact_prediction && !self.dag.is_identity() {
            self.dot_regressor(&w0)
        } else {
            self.dot_regressor(&self.weights)
        };
        let e_prior = desired - y_prior;
        self.apply_update(w0, e_prior, y_prior, Some(desired))
    }

    /// Update from an externally measured a-priori error (filtered-regressor
    /// configurations where the error is a physical measurement, not a
    /// prediction residual).
    pub fn step_with_error(&mut self, e_prior: f64) -> Result<UpdateRecord> {
        let w0 = self.w0();
        let y_prior = self.dot_regressor(&self.weights);
        self.apply_update(w0, e_prior, y_prior, None)
    }

    fn apply_update(
        &mut self,
        w0: Vec<f64>,
        e_prior: f64,
        y_prior: f64,
        desired: Option<f64>,
    ) -> Result<UpdateRecord> {
        let t = self.samples_seen;
        self.samples_seen += 1;
        if !e_prior.is_finite() {
            return Err(self.divergence(t, f64::NAN));
        }
        let r_dot_r = self.regressor_energy();
        let mu_t = self.rule.step_size(r_dot_r);

        let mut correction: Vec<f64> = self.regressor.iter().map(|&r| mu_t * r * e_prior).collect();
        let mut new_w = w0;
        for (w, &c) in new_w.iter_mut().zip(&correction) {
            *w += c;
        }

        let norm_sq: f64 = new_w.iter().map(|w| w * w).sum();
        if !norm_sq.is_finite() || norm_sq > DIVERGENCE_NORM * DIVERGENCE_NORM {
            return Err(self.divergence(t, norm_sq.sqrt()));
        }

        let y_posterior = self.dot_regressor(&new_w);
        let e_posterior = match self.rule {
            StepSizeRule::Plms { mu } => e_prior / (1.0 + mu * r_dot_r),
            _ => match desired {
                Some(x) => x - y_posterior,
                // measured-error mode: correct the measured e' by the
                // weight increment seen through the regressor
                None => e_prior - (y_posterior - y_prior),
            },
        };

        if !self.weight_history.is_empty() {
            let mut recycled = self.weight_history.pop_back().unwrap();
            recycled.copy_from_slice(&new_w);
            self.weight_history.push_front(recycled);
        }
        if !self.correction_history.is_empty() {
            self.correction_history.pop_back();
            self.correction_history
                .push_front(std::mem::take(&mut correction));
        }
        self.weights = new_w;

        Ok(UpdateRecord {
            e_prior,
            e_posterior,
            mu_t,
            y_prior,
            y_posterior,
        })
    }

    fn divergence(&self, sample: usize, norm: f64) -> Error {
        let ssg = (1.0 + self.dag.c().iter().sum::<f64>())
            / (1.0 - self.dag.d_prime().iter().sum::<f64>());
        Error::Divergence {
            sample,
            norm,
            mu: self.rule.mu(),
            ssg,
        }
    }
}

/// Drive an adaptive filter over a full input/desired pair.
///
/// The regressor is a tapped delay line of `input`, optionally delayed by
/// `decorrelation_delay` samples relative to `desired` (the line-enhancer
/// configuration). Errors carry the sample index at which divergence
/// occurred.
pub fn run_filter(
    input: &[f64],
    desired: &[f64],
    rule: StepSizeRule,
    dag: &DagCoefficients,
    filter_length: usize,
    decorrelation_delay: Option<usize>,
) -> Result<MetricSeries> {
    if input.len() != desired.len() {
        return Err(Error::Config(format!(
            "input ({}) and desired ({}) lengths differ",
            input.len(),
            desired.len()
        )));
    }
    let delta = decorrelation_delay.unwrap_or(0);
    let mut state = AdaptiveFilterState::new(filter_length, rule, dag.clone());
    let mut series = MetricSeries::with_capacity(input.len());
    let mut energy_acc = 0.0;
    for t in 0..input.len() {
        let tap = if t >= delta { input[t - delta] } else { 0.0 };
        state.push_input(tap);
        energy_acc += state.regressor_energy();
        let rec = state.step(desired[t])?;
        series.push_update(&rec);
    }
    series.finalize();
    if !input.is_empty() {
        series.summary.mean_regressor_energy = Some(energy_acc / input.len() as f64);
        series.summary.taps = Some(filter_length);
    }
    Ok(series)
}
