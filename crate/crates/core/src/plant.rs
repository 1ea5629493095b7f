//! Rational plant models used as data generators and as synthetic
//! acoustic paths.

use crate::error::{Error, Result};
use crate::poly;

/// Discrete transfer operator
/// `q^-d (b1 q^-1 + ... + bnB q^-nB) / (1 + a1 q^-1 + ... + anA q^-nA)`.
///
/// Simulated as
/// `y(t) = -sum_i a_i y(t-i) + sum_j b_j u(t-d-j)` with zero initial
/// conditions. Note the numerator carries an implicit one-sample delay on
/// top of `d`, so the first response sample of an impulse appears at
/// `t = d + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    delay: usize,
}

impl PlantModel {
    /// Build a plant and verify that all denominator roots are strictly
    /// inside the unit circle.
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>, delay: usize) -> Result<Self> {
        if numerator.is_empty() {
            return Err(Error::Config("plant numerator must be non-empty".into()));
        }
        if !numerator.iter().chain(&denominator).all(|c| c.is_finite()) {
            return Err(Error::Config("plant coefficients must be finite".into()));
        }
        let mut den_full = vec![1.0];
        den_full.extend_from_slice(&denominator);
        if !poly::is_stable(&den_full) {
            return Err(Error::Config(format!(
                "plant denominator has roots on or outside the unit circle (max modulus {:.6})",
                poly::max_root_modulus(&den_full)
            )));
        }
        Ok(Self {
            numerator,
            denominator,
            delay,
        })
    }

    /// Unit-gain passthrough (`b1 = 1`, no denominator, no extra delay);
    /// output equals the input delayed by one sample plus `delay`.
    pub fn passthrough(delay: usize) -> Self {
        Self {
            numerator: vec![1.0],
            denominator: Vec::new(),
            delay,
        }
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    /// System order `n = max(n_A, n_B + d)`.
    pub fn order(&self) -> usize {
        self.denominator
            .len()
            .max(self.numerator.len() + self.delay)
    }

    /// DC gain `B(1) / A(1)`.
    pub fn dc_gain(&self) -> f64 {
        let num: f64 = self.numerator.iter().sum();
        let den: f64 = 1.0 + self.denominator.iter().sum::<f64>();
        num / den
    }

    /// Scale the numerator so the DC gain becomes `gain`.
    pub fn with_dc_gain(mut self, gain: f64) -> Self {
        let g = self.dc_gain();
        if g != 0.0 {
            let s = gain / g;
            for b in &mut self.numerator {
                *b *= s;
            }
        }
        self
    }

    /// Filter a full input sequence with zero initial conditions.
    pub fn simulate(&self, input: &[f64]) -> Vec<f64> {
        let mut state = PlantState::new(self);
        input.iter().map(|&u| state.step(self, u)).collect()
    }

    /// Impulse response truncated to `n` samples.
    pub fn impulse_response(&self, n: usize) -> Vec<f64> {
        let mut u = vec![0.0; n];
        if n > 0 {
            u[0] = 1.0;
        }
        self.simulate(&u)
    }
}

/// Running state for sample-by-sample plant simulation.
///
/// Keeps the input/output history it needs in ring buffers so several
/// plants can be advanced in lockstep inside a control loop. Because the
/// numerator carries at least one sample of delay, `y(t)` never depends on
/// `u(t)`; [`PlantState::output`] exploits this so a loop can read a
/// path's current output before the current input exists.
#[derive(Debug, Clone)]
pub struct PlantState {
    /// `u(t-1-k)` at slot `k` (before `commit` for sample `t`).
    past_inputs: Vec<f64>,
    /// `y(t-1-k)` at slot `k`.
    past_outputs: Vec<f64>,
}

impl PlantState {
    pub fn new(model: &PlantModel) -> Self {
        Self {
            past_inputs: vec![0.0; model.delay + model.numerator.len()],
            past_outputs: vec![0.0; model.denominator.len()],
        }
    }

    /// Current output `y(t)`, computed from history only.
    pub fn output(&self, model: &PlantModel) -> f64 {
        let mut y = 0.0;
        for (i, &a) in model.denominator.iter().enumerate() {
            y -= a * self.past_outputs[i];
        }
        for (j, &b) in model.numerator.iter().enumerate() {
            // b_j pairs with u(t - delay - j), 1-indexed j
            y += b * self.past_inputs[model.delay + j];
        }
        y
    }

    /// Record the sample-`t` input/output pair and move to `t+1`.
    pub fn commit(&mut self, model: &PlantModel, u: f64, y: f64) {
        self.past_inputs.rotate_right(1);
        self.past_inputs[0] = u;
        if !model.denominator.is_empty() {
            self.past_outputs.rotate_right(1);
            self.past_outputs[0] = y;
        }
    }

    /// Advance one sample: push `u(t)`, return `y(t)`.
    pub fn step(&mut self, model: &PlantModel, u: f64) -> f64 {
        let y = self.output(model);
        self.commit(model, u, y);
        y
    }
}
