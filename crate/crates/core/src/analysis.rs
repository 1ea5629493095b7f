//! Linearized transient analysis and small-instance averaging oracles.
//!
//! Under slow adaptation the averaged parameter-error dynamics reduce to a
//! scalar feedback loop whose output sensitivity is
//!
//! ```text
//! S = (1 - q^-1) D'(q^-1) / [ (1 - q^-1) D'(q^-1) + g C(q^-1) ]
//! ```
//!
//! with `g` the linearized loop gain. The step response of `S` predicts
//! the adaptation transient; the averaging oracle iterates the matrix
//! recursion directly and coincides with it in the scalar case.

use nalgebra::{DMatrix, DVector};

use crate::adaptive::DagCoefficients;
use crate::error::{Error, Result};
use crate::metrics::{fmt_f64, MetricSeries};
use crate::poly;

/// Fraction of the unit initial error that counts as settled.
pub const SETTLING_BAND: f64 = 1e-3;

/// Scalar linearization of the averaged adaptation loop.
#[derive(Debug, Clone)]
pub struct SensitivityModel {
    gain: f64,
    dag: DagCoefficients,
}

impl SensitivityModel {
    pub fn new(gain: f64, dag: DagCoefficients) -> Result<Self> {
        if gain.is_nan() || gain <= 0.0 {
            return Err(Error::Domain(format!(
                "linearized gain must be positive, got {gain}"
            )));
        }
        Ok(Self { gain, dag })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn dag(&self) -> &DagCoefficients {
        &self.dag
    }

    /// Numerator and denominator of the output sensitivity (polynomials in
    /// `q^-1`; the denominator is not monic).
    fn sensitivity_polys(&self) -> (Vec<f64>, Vec<f64>) {
        let numerator = poly::convolve(&[1.0, -1.0], &self.dag.denominator_poly());
        let mut denominator = numerator.clone();
        let c = self.dag.numerator_poly();
        if denominator.len() < c.len() {
            denominator.resize(c.len(), 0.0);
        }
        for (d, &cj) in denominator.iter_mut().zip(&c) {
            *d += self.gain * cj;
        }
        (numerator, denominator)
    }

    /// True when every closed-loop pole is strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        poly::is_stable(&self.sensitivity_polys().1)
    }
}

/// Transient prediction for a unit initial parameter error.
#[derive(Debug, Clone)]
pub struct TransientReport {
    /// Normalized parameter error; `step_response[0] == 1`.
    pub step_response: Vec<f64>,
    /// First sample from which the error stays inside the settling band,
    /// or `None` if it has not settled by the horizon (or the loop is
    /// unstable).
    pub settling_time: Option<usize>,
    /// Ratio of the plain-algorithm settling time (same gain, identity
    /// gain filter) to this filter's settling time.
    pub predicted_speedup: Option<f64>,
    /// False when the closed loop has poles on or outside the unit circle.
    pub stable: bool,
}

fn settling_time(response: &[f64], band: f64) -> Option<usize> {
    let last_outside = response.iter().rposition(|w| w.abs() > band)?;
    if last_outside + 1 >= response.len() {
        None // still outside the band at the horizon
    } else {
        Some(last_outside + 1)
    }
}

fn step_response_raw(model: &SensitivityModel, horizon: usize) -> Vec<f64> {
    let (nu, de) = model.sensitivity_polys();
    // w(0) = 1 is the initial error itself; the loop reacts from t = 1 on
    let mut out = Vec::with_capacity(horizon);
    out.push(1.0);
    let mut y = vec![0.0; horizon.saturating_sub(1)];
    for t in 0..y.len() {
        let mut acc = 0.0;
        for (j, &b) in nu.iter().enumerate() {
            if t >= j {
                acc += b; // unit step input
            }
        }
        for (i, &a) in de.iter().enumerate().skip(1) {
            if t >= i {
                acc -= a * y[t - i];
            }
        }
        y[t] = acc / de[0];
    }
    out.extend_from_slice(&y);
    out
}

/// Step response of the linearized loop with a 0.1 % settling band.
///
/// The speedup entry compares against the identity gain filter at the same
/// loop gain over the same horizon.
pub fn sensitivity_step_response(model: &SensitivityModel, horizon: usize) -> TransientReport {
    if !model.is_stable() {
        return TransientReport {
            step_response: step_response_raw(model, horizon.min(256)),
            settling_time: None,
            predicted_speedup: None,
            stable: false,
        };
    }
    let step_response = step_response_raw(model, horizon);
    let settling = settling_time(&step_response, SETTLING_BAND);
    let predicted_speedup = if model.dag.is_identity() {
        settling.map(|_| 1.0)
    } else {
        let baseline = SensitivityModel::new(model.gain, DagCoefficients::identity()).unwrap();
        let base_settle = settling_time(&step_response_raw(&baseline, horizon), SETTLING_BAND);
        match (base_settle, settling) {
            (Some(b), Some(s)) if s > 0 => Some(b as f64 / s as f64),
            _ => None,
        }
    };
    TransientReport {
        step_response,
        settling_time: settling,
        predicted_speedup,
        stable: true,
    }
}

/// Iterate the averaged matrix recursion
/// `w~(t+1) = w~(t) - mu E_r H[w~(t+1)]` and return the error-norm
/// trajectory `|w~(0)|, |w~(1)|, ...`.
///
/// The gain filter's current-sample coefficient is one, so each step is a
/// linear solve in `(I + mu E_r)`.
pub fn averaged_feedback_oracle(
    dag: &DagCoefficients,
    covariance: &DMatrix<f64>,
    mu: f64,
    initial_error: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    let dim = initial_error.len();
    if covariance.nrows() != dim || covariance.ncols() != dim {
        return Err(Error::Config(format!(
            "covariance is {}x{}, expected {dim}x{dim}",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    let identity = DMatrix::<f64>::identity(dim, dim);
    let implicit = (&identity + covariance * mu).lu();
    let mut w = DVector::from_column_slice(initial_error);
    // filter state: h(t-i) outputs and w~(t-j) inputs, newest first
    let n_dp = dag.d_prime().len();
    let n_c = dag.c().len();
    let mut h_hist: Vec<DVector<f64>> = (0..n_dp).map(|_| DVector::zeros(dim)).collect();
    let mut w_hist: Vec<DVector<f64>> = (0..n_c).map(|_| DVector::zeros(dim)).collect();
    let mut norms = Vec::with_capacity(horizon);
    norms.push(w.norm());
    for _ in 1..horizon {
        // known part of the filter output at t+1
        let mut partial = DVector::<f64>::zeros(dim);
        for (dp, h) in dag.d_prime().iter().zip(&h_hist) {
            partial += h * *dp;
        }
        for (c, wj) in dag.c().iter().zip(&w_hist) {
            partial += wj * *c;
        }
        // (I + mu E_r) w(t+1) = w(t) - mu E_r partial
        let rhs = &w - covariance * &partial * mu;
        let next = implicit
            .solve(&rhs)
            .ok_or_else(|| Error::Numeric("implicit averaging step is singular".into()))?;
        let h_now = &next + &partial;
        if n_dp > 0 {
            h_hist.rotate_right(1);
            h_hist[0] = h_now;
        }
        if n_c > 0 {
            w_hist.rotate_right(1);
            w_hist[0] = next.clone();
        }
        w = next;
        norms.push(w.norm());
    }
    Ok(norms)
}

/// Overlay of a measured parametric-distance decay with the linearized
/// prediction, ready for CSV export.
#[derive(Debug, Clone)]
pub struct TransientComparison {
    /// Measured `sqrt(D2(t) / D2(0))`.
    pub wtilde_measured: Vec<f64>,
    /// Predicted normalized error from the sensitivity model.
    pub wtilde_predicted: Vec<f64>,
    /// Linearized gain used for the prediction.
    pub gain: f64,
}

impl TransientComparison {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Numeric(format!("csv write failed: {e}"));
        out.write_all(b"t,wtilde,predicted_wtilde\n").map_err(io)?;
        for t in 0..self.wtilde_measured.len() {
            writeln!(
                out,
                "{t},{},{}",
                fmt_f64(self.wtilde_measured[t]),
                fmt_f64(self.wtilde_predicted[t])
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Bridge from a measured run to the linearized prediction, with
/// `g = mu * mean(r'r) / taps`.
pub fn compare_transient_prediction(
    dag: &DagCoefficients,
    mu: f64,
    series: &MetricSeries,
) -> Result<TransientComparison> {
    if series.d_squared.is_empty() {
        return Err(Error::Domain(
            "transient comparison needs a run with a known true parameter vector".into(),
        ));
    }
    let energy = series
        .summary
        .mean_regressor_energy
        .ok_or_else(|| Error::Domain("run carries no regressor-energy estimate".into()))?;
    let taps = series.summary.taps.unwrap_or(1).max(1);
    let gain = mu * energy / taps as f64;
    let model = SensitivityModel::new(gain, dag.clone())?;
    let predicted = step_response_raw(&model, series.d_squared.len());
    let d0 = series.d_squared[0].max(f64::MIN_POSITIVE);
    let measured = series.d_squared.iter().map(|d| (d / d0).sqrt()).collect();
    Ok(TransientComparison {
        wtilde_measured: measured,
        wtilde_predicted: predicted,
        gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arima2(c1: f64, c2: f64, d1p: f64) -> DagCoefficients {
        DagCoefficients::arima2(c1, c2, d1p).unwrap()
    }

    #[test]
    fn identity_matches_first_order_closed_form() {
        // w~(t) = (1 + g)^-t for the plain loop
        let model = SensitivityModel::new(0.05, DagCoefficients::identity()).unwrap();
        let rep = sensitivity_step_response(&model, 400);
        assert_eq!(rep.step_response[0], 1.0);
        for (t, &w) in rep.step_response.iter().enumerate() {
            let exact = (1.0f64 + 0.05).powi(-(t as i32));
            assert!((w - exact).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn reference_settling_times() {
        let g = 0.01;
        let rep = sensitivity_step_response(
            &SensitivityModel::new(g, DagCoefficients::identity()).unwrap(),
            4000,
        );
        assert_eq!(rep.settling_time, Some(695));
        let rep_dag = sensitivity_step_response(
            &SensitivityModel::new(g, arima2(0.99, 0.0, 0.75)).unwrap(),
            4000,
        );
        assert_eq!(rep_dag.settling_time, Some(59));
        assert!(rep_dag.predicted_speedup.unwrap() > 10.0);
        // ten-times-larger plain gain lands close to the filtered loop
        let rep_10g = sensitivity_step_response(
            &SensitivityModel::new(10.0 * g, DagCoefficients::identity()).unwrap(),
            4000,
        );
        assert_eq!(rep_10g.settling_time, Some(73));
    }

    #[test]
    fn settling_ordering_follows_steady_state_gain() {
        // the five benchmark filters at a fixed small gain settle in
        // (weakly) descending-gain order
        use crate::design::steady_state_gain;
        let mut rows: Vec<(f64, usize)> = [
            arima2(0.0, 0.0, 0.0),
            arima2(0.0, 0.0, 0.9),
            arima2(1.4, 0.5, 0.0),
            arima2(0.99, 0.0, 0.0),
            arima2(0.99, 0.0, 0.9),
        ]
        .into_iter()
        .map(|dag| {
            let ssg = steady_state_gain(&dag).unwrap();
            let rep = sensitivity_step_response(&SensitivityModel::new(0.01, dag).unwrap(), 20000);
            (ssg, rep.settling_time.unwrap())
        })
        .collect();
        rows.sort_by(|a, b| b.0.total_cmp(&a.0));
        for pair in rows.windows(2) {
            assert!(
                pair[0].1 <= pair[1].1,
                "settling must not increase with steady-state gain: {rows:?}"
            );
        }
    }

    #[test]
    fn unstable_loop_is_flagged() {
        // far-outside numerator at unit gain pushes a closed-loop root out
        let model = SensitivityModel::new(1.0, arima2(-3.0, 0.0, 0.0)).unwrap();
        assert!(!model.is_stable());
        let rep = sensitivity_step_response(&model, 100);
        assert!(!rep.stable);
        assert_eq!(rep.settling_time, None);
    }

    #[test]
    fn oracle_scalar_geometric_decay() {
        let cov = DMatrix::from_element(1, 1, 1.0);
        let traj =
            averaged_feedback_oracle(&DagCoefficients::identity(), &cov, 0.1, &[1.0], 200).unwrap();
        for (t, &n) in traj.iter().enumerate() {
            assert!((n - 1.1f64.powi(-(t as i32))).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_zero_start_stays_zero() {
        let cov = DMatrix::identity(3, 3);
        let traj =
            averaged_feedback_oracle(&arima2(0.5, 0.0, 0.4), &cov, 0.2, &[0.0, 0.0, 0.0], 50)
                .unwrap();
        assert!(traj.iter().all(|&n| n == 0.0));
    }

    #[test]
    fn oracle_spr_filter_drives_error_to_zero() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let traj =
            averaged_feedback_oracle(&arima2(0.99, 0.0, 0.8), &cov, 0.05, &[1.0, -1.0], 4000)
                .unwrap();
        assert!(traj[0] > 1.0);
        assert!(*traj.last().unwrap() < 1e-9);
    }

    #[test]
    fn oracle_matches_sensitivity_for_scalar_covariance() {
        let dag = arima2(0.99, 0.0, 0.75);
        let g = 0.01;
        let cov = DMatrix::from_element(1, 1, 1.0);
        let oracle = averaged_feedback_oracle(&dag, &cov, g, &[1.0], 500).unwrap();
        let sens = sensitivity_step_response(&SensitivityModel::new(g, dag).unwrap(), 500);
        for (t, (o, s)) in oracle.iter().zip(&sens.step_response).enumerate() {
            assert!((o - s.abs()).abs() < 1e-10, "t={t}: {o} vs {s}");
        }
    }

    #[test]
    fn comparison_requires_parametric_distance() {
        let series = MetricSeries::from_errors(vec![1.0; 8], vec![1.0; 8]);
        assert!(matches!(
            compare_transient_prediction(&DagCoefficients::identity(), 0.1, &series),
            Err(Error::Domain(_))
        ));
    }
}
