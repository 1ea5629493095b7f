//! Time-indexed experiment metrics and their CSV serialization.

use std::io::Write;

use crate::adaptive::UpdateRecord;
use crate::error::{Error, Result};

/// Sliding-window length (samples) for the dB mean-square-error trace.
pub const MSE_WINDOW: usize = 100;
/// Threshold used for the convergence-time indicator.
pub const CONVERGENCE_THRESHOLD_DB: f64 = -40.0;
/// Number of leading samples summed for the `sum_mse` indicator.
pub const SUM_MSE_HORIZON: usize = 3200;

/// Per-sample record of one experiment run (or of a Monte Carlo average,
/// in which case the error columns hold root-mean-square values across
/// runs).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricSeries {
    pub e_prior: Vec<f64>,
    pub e_posterior: Vec<f64>,
    /// Windowed mean square of the a-priori error in dB
    /// (`-inf` sentinel over all-zero windows).
    pub mse_db: Vec<f64>,
    /// Squared parametric distance `|w - w_hat(t)|^2`; empty when the true
    /// parameters are unknown.
    pub d_squared: Vec<f64>,
    /// Running sum of squared a-posteriori errors.
    pub j_eps: Vec<f64>,
    /// Running sum of `d_squared`; empty when `d_squared` is.
    pub j_d: Vec<f64>,
    /// Attenuation in dB over a trailing window (noise-control scenario);
    /// NaN sentinel where undefined. Empty for other scenarios.
    pub attenuation_db: Vec<f64>,
    pub summary: RunSummary,
}

/// Scenario-level indicators derived from the series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    /// First sample at which the windowed MSE reached -40 dB (ignoring the
    /// partial-window prefix).
    pub convergence_time: Option<usize>,
    /// Sum of squared a-priori errors over the first 3200 samples.
    pub sum_mse: Option<f64>,
    pub j_d_final: Option<f64>,
    pub j_eps_final: Option<f64>,
    pub terminal_d_squared: Option<f64>,
    pub terminal_attenuation_db: Option<f64>,
    /// Mean regressor energy `r'r` over the run; feeds the linearized-gain
    /// estimate of the transient predictor.
    pub mean_regressor_energy: Option<f64>,
    /// Number of adapted weights.
    pub taps: Option<usize>,
}

impl MetricSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            e_prior: Vec::with_capacity(n),
            e_posterior: Vec::with_capacity(n),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.e_prior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_prior.is_empty()
    }

    pub fn push_update(&mut self, rec: &UpdateRecord) {
        self.e_prior.push(rec.e_prior);
        self.e_posterior.push(rec.e_posterior);
    }

    /// Build a series from raw error traces (used by Monte Carlo averaging,
    /// where the traces are RMS values across runs).
    pub fn from_errors(e_prior: Vec<f64>, e_posterior: Vec<f64>) -> Self {
        let mut s = Self {
            e_prior,
            e_posterior,
            ..Default::default()
        };
        s.finalize();
        s
    }

    /// Recompute every derived column and indicator from the raw traces.
    pub fn finalize(&mut self) {
        let n = self.e_prior.len();
        self.mse_db = windowed_mse_db(&self.e_prior, MSE_WINDOW);
        self.j_eps = running_sum_of_squares(&self.e_posterior);
        self.j_d = running_sum(&self.d_squared);
        self.summary.convergence_time = first_crossing_below(
            &self.mse_db,
            CONVERGENCE_THRESHOLD_DB,
            MSE_WINDOW.saturating_sub(1),
        );
        self.summary.sum_mse = if n > 0 {
            Some(
                self.e_prior
                    .iter()
                    .take(SUM_MSE_HORIZON)
                    .map(|e| e * e)
                    .sum(),
            )
        } else {
            None
        };
        self.summary.j_eps_final = self.j_eps.last().copied();
        self.summary.j_d_final = self.j_d.last().copied();
        self.summary.terminal_d_squared = self.d_squared.last().copied();
        self.summary.terminal_attenuation_db = self
            .attenuation_db
            .iter()
            .rev()
            .find(|a| a.is_finite())
            .copied();
    }

    /// First sample whose attenuation reaches `level_db`.
    pub fn time_to_attenuation(&self, level_db: f64) -> Option<usize> {
        self.attenuation_db
            .iter()
            .position(|&a| a.is_finite() && a >= level_db)
    }

    /// First sample whose squared parametric distance drops below `level`.
    pub fn time_to_d_squared(&self, level: f64) -> Option<usize> {
        self.d_squared.iter().position(|&d| d < level)
    }

    /// Write the series as CSV: header row, LF line endings, full double
    /// precision (17 significant digits).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Numeric(format!("csv write failed: {e}"));
        out.write_all(b"t,e_prior,e_posterior,mse_db,d_squared,j_eps,j_d,attenuation_db\n")
            .map_err(io)?;
        let opt = |col: &[f64], t: usize| -> String {
            col.get(t).map(|v| fmt_f64(*v)).unwrap_or_default()
        };
        for t in 0..self.len() {
            writeln!(
                out,
                "{t},{},{},{},{},{},{},{}",
                fmt_f64(self.e_prior[t]),
                fmt_f64(self.e_posterior[t]),
                fmt_f64(self.mse_db[t]),
                opt(&self.d_squared, t),
                fmt_f64(self.j_eps[t]),
                opt(&self.j_d, t),
                opt(&self.attenuation_db, t),
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Write a metric series to a CSV file.
pub fn export_metrics(series: &MetricSeries, path: &std::path::Path) -> Result<()> {
    let io = |e: std::io::Error| Error::Numeric(format!("{}: {e}", path.display()));
    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    std::fs::write(path, buf).map_err(io)
}

/// 17-significant-digit scientific notation; non-finite values keep their
/// standard names.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Sliding mean of squared samples in dB; the leading partial windows use
/// the available prefix.
pub fn windowed_mse_db(e: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(e.len());
    let mut acc = 0.0f64;
    for t in 0..e.len() {
        acc += e[t] * e[t];
        if t >= window {
            acc -= e[t - window] * e[t - window];
        }
        let len = (t + 1).min(window);
        let mean = (acc / len as f64).max(0.0);
        out.push(if mean > 0.0 {
            10.0 * mean.log10()
        } else {
            f64::NEG_INFINITY
        });
    }
    out
}

fn running_sum_of_squares(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|x| {
            acc += x * x;
            acc
        })
        .collect()
}

fn running_sum(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn first_crossing_below(series: &[f64], threshold: f64, start: usize) -> Option<usize> {
    series
        .iter()
        .enumerate()
        .skip(start)
        .find(|(_, &v)| v <= threshold)
        .map(|(t, _)| t)
}
