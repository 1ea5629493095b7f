//! Design and verification toolkit for adaptation-gain filters: strict
//! positive-realness criteria, positive-realness of the full
//! integrator-cascaded operator, frequency responses, admissibility
//! contours and the steady-state-gain predictor.

use num_complex::Complex64;

use crate::adaptive::DagCoefficients;
use crate::error::{Error, Result};
use crate::poly;

/// Default frequency-grid size for sweeps.
pub const DEFAULT_GRID: usize = 8192;
/// Real-part tolerance for the positive-real check of the marginally
/// stable operator.
pub const PR_TOLERANCE: f64 = 1e-9;

/// Frequency response samples on `(0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub omega: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    pub phase_deg: Vec<f64>,
    pub real_part: Vec<f64>,
}

/// Outcome of the strict-positive-realness check of an adaptation-gain
/// filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprVerdict {
    /// Operational verdict (equals `sweep_verdict`).
    pub is_spr: bool,
    /// Closed-form verdict; only defined for the second-order-numerator,
    /// first-order-denominator shape.
    pub criterion_verdict: Option<bool>,
    /// Verdict of the numeric frequency sweep plus root-location checks.
    pub sweep_verdict: bool,
    /// Smallest real part of `C/D'` found on the unit circle.
    pub min_real_part: f64,
    /// Frequency at which the minimum was attained.
    pub argmin_omega: f64,
}

fn h_dag_at(dag: &DagCoefficients, omega: f64) -> Complex64 {
    let num = poly::eval_unit_circle(&dag.numerator_poly(), omega);
    let den = poly::eval_unit_circle(&dag.denominator_poly(), omega);
    num / den
}

fn h_paa_at(dag: &DagCoefficients, omega: f64) -> Complex64 {
    let num = poly::eval_unit_circle(&dag.numerator_poly(), omega);
    let dprime = poly::eval_unit_circle(&dag.denominator_poly(), omega);
    let integ = poly::eval_unit_circle(&[1.0, -1.0], omega);
    num / (integ * dprime)
}

/// Signed slack of the closed-form strict-positive-realness conditions for
/// `(1 + c1 q^-1 + c2 q^-2) / (1 - d1' q^-1)`.
///
/// Positive inside the admissible region, negative outside; its zero set is
/// the admissibility boundary. The conditions are the stability of both
/// polynomials plus positivity of the real-part numerator
/// `N(x) = (1 - c2 - c1 d1') + (c1 - d1'(1 + c2)) x + 2 c2 x^2` on
/// `x = cos(omega) in [-1, 1]`, whose interior-minimum case yields the
/// bounds `d1' - 3 d1' c2 +/- 2 sqrt(2 (c2 - c2^2)(1 - d1'^2))` on `c1`.
pub fn spr_criterion_arima2_margin(c1: f64, c2: f64, d1_prime: f64) -> f64 {
    let mut margin = 1.0 - d1_prime.abs(); // pole inside the unit circle
    margin = margin.min(1.0 - c2.abs()); // numerator root radius
    margin = margin.min(1.0 + c2 - c1); // N(-1) > 0, upper endpoint bound
    margin = margin.min(1.0 + c2 + c1); // N(1) > 0, lower endpoint bound
    if c2 > 0.0 {
        let b = c1 - d1_prime * (1.0 + c2);
        let vertex = -b / (4.0 * c2);
        if vertex > -1.0 && vertex < 1.0 {
            let c0 = 1.0 - c2 - c1 * d1_prime;
            margin = margin.min(8.0 * c2 * c0 - b * b);
        }
    }
    margin
}

/// Closed-form strict-positive-realness verdict for the
/// `(1 + c1 q^-1 + c2 q^-2) / (1 - d1' q^-1)` shape.
pub fn spr_criterion_arima2(c1: f64, c2: f64, d1_prime: f64) -> bool {
    spr_criterion_arima2_margin(c1, c2, d1_prime) > 0.0
}

/// Admissible `c1` interval for given `(c2, d1')`, or `None` when empty.
/// Used for tracing admissibility contours.
pub fn spr_c1_interval(c2: f64, d1_prime: f64) -> Option<(f64, f64)> {
    if d1_prime.abs() >= 1.0 || c2.abs() >= 1.0 {
        return None;
    }
    let mut lo = -1.0 - c2;
    let mut hi = 1.0 + c2;
    if c2 > 0.0 {
        let center = d1_prime - 3.0 * d1_prime * c2;
        let radius = 2.0 * (2.0 * (c2 - c2 * c2) * (1.0 - d1_prime * d1_prime)).sqrt();
        // the vertex bound applies only where the parabola's minimum is
        // interior at the bound itself
        let vertex_at = |c1: f64| -(c1 - d1_prime * (1.0 + c2)) / (4.0 * c2);
        let upper = center + radius;
        if vertex_at(upper) > -1.0 && vertex_at(upper) < 1.0 {
            hi = hi.min(upper);
        }
        let lower = center - radius;
        if vertex_at(lower) > -1.0 && vertex_at(lower) < 1.0 {
            lo = lo.max(lower);
        }
    }
    (lo < hi).then_some((lo, hi))
}

fn refine_minimum<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    // golden-section polish of a grid bracket
    let phi = 0.5 * (3.0 - 5.0f64.sqrt());
    for _ in 0..80 {
        let a = lo + phi * (hi - lo);
        let b = hi - phi * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

fn sweep_min<F: Fn(f64) -> f64>(f: F, grid_size: usize) -> (f64, f64) {
    let n = grid_size.max(16);
    let mut min_v = f64::INFINITY;
    let mut min_k = 1;
    for k in 1..=n {
        let w = std::f64::consts::PI * k as f64 / n as f64;
        let v = f(w);
        if v < min_v {
            min_v = v;
            min_k = k;
        }
    }
    let step = std::f64::consts::PI / n as f64;
    let lo = step * (min_k as f64 - 1.0).max(0.5);
    let hi = (step * (min_k + 1) as f64).min(std::f64::consts::PI);
    let (w, v) = refine_minimum(&f, lo, hi);
    if v < min_v {
        (w, v)
    } else {
        (step * min_k as f64, min_v)
    }
}

/// Dense-grid evaluation of `Re[C/D']` on the unit circle plus root
/// checks; works for arbitrary orders and serves as the independent
/// counterpart of the closed-form criterion.
pub fn spr_sweep_oracle(dag: &DagCoefficients, grid_size: usize) -> SprVerdict {
    let num = dag.numerator_poly();
    let den = dag.denominator_poly();
    let roots_ok = poly::is_stable(&num) && poly::is_stable(&den);
    let (argmin_omega, min_real_part) = sweep_min(|w| h_dag_at(dag, w).re, grid_size);
    let sweep_verdict = roots_ok && min_real_part > 0.0;
    let criterion_verdict = if dag.c().len() <= 2 && dag.d_prime().len() <= 1 {
        let c1 = dag.c().first().copied().unwrap_or(0.0);
        let c2 = dag.c().get(1).copied().unwrap_or(0.0);
        let d1p = dag.d_prime().first().copied().unwrap_or(0.0);
        Some(spr_criterion_arima2(c1, c2, d1p))
    } else {
        None
    };
    SprVerdict {
        is_spr: sweep_verdict,
        criterion_verdict,
        sweep_verdict,
        min_real_part,
        argmin_omega,
    }
}

/// Smallest guard distance of a sweep verdict from its decision
/// boundaries (real-part zero and unit-circle root radii); used to exclude
/// boundary-band points from criterion/oracle agreement checks.
pub fn spr_sweep_margin(dag: &DagCoefficients, verdict: &SprVerdict) -> f64 {
    let num_radius = poly::max_root_modulus(&dag.numerator_poly());
    let den_radius = poly::max_root_modulus(&dag.denominator_poly());
    verdict
        .min_real_part
        .abs()
        .min((1.0 - num_radius).abs())
        .min((1.0 - den_radius).abs())
}

/// Positive-realness of the full parameter-adaptation operator
/// `C / ((1 - q^-1) D')`, which carries a structural pole at z = 1.
///
/// Checked as: `D'` strictly stable, positive residue `C(1)/D'(1)` at the
/// unit-circle pole, and real part no lower than `-PR_TOLERANCE` on the
/// punctured circle.
pub fn paa_pr_check(dag: &DagCoefficients, grid_size: usize) -> bool {
    if !poly::is_stable(&dag.denominator_poly()) {
        return false;
    }
    let residue =
        dag.numerator_poly().iter().sum::<f64>() / dag.denominator_poly().iter().sum::<f64>();
    if residue <= 0.0 {
        return false;
    }
    let (_, min_re) = sweep_min(|w| h_paa_at(dag, w).re, grid_size);
    min_re >= -PR_TOLERANCE
}

/// Average log-gain over the half circle:
/// `integral_0^pi log|C/D'| d omega`, evaluated by the trapezoid rule on
/// `nodes` intervals. Equals zero whenever both polynomials have all their
/// zeros strictly inside the unit circle.
pub fn log_gain_integral(dag: &DagCoefficients, nodes: usize) -> Result<f64> {
    let num = dag.numerator_poly();
    let den = dag.denominator_poly();
    if !poly::is_stable(&num) || !poly::is_stable(&den) {
        return Err(Error::Domain(
            "log-gain integral requires all numerator and denominator roots strictly inside \
             the unit circle"
                .into(),
        ));
    }
    let n = nodes.max(16);
    let f = |w: f64| {
        poly::eval_unit_circle(&num, w).norm().ln() - poly::eval_unit_circle(&den, w).norm().ln()
    };
    let step = std::f64::consts::PI / n as f64;
    let mut acc = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for k in 1..n {
        acc += f(step * k as f64);
    }
    Ok(acc * step)
}

/// DC gain `(1 + sum c_j) / (1 - sum d'_j)` of the adaptation-gain filter.
/// Values above one predict an accelerated adaptation transient.
pub fn steady_state_gain(dag: &DagCoefficients) -> Result<f64> {
    let num = 1.0 + dag.c().iter().sum::<f64>();
    let den = 1.0 - dag.d_prime().iter().sum::<f64>();
    if den == 0.0 {
        return Err(Error::Domain(
            "steady-state gain undefined: denominator coefficients sum to one".into(),
        ));
    }
    Ok(num / den)
}

/// Magnitude/phase/real-part response of the adaptation-gain filter on
/// `(0, pi]`.
pub fn bode(dag: &DagCoefficients, grid_size: usize) -> FrequencyResponse {
    let n = grid_size.max(2);
    let mut resp = FrequencyResponse {
        omega: Vec::with_capacity(n),
        magnitude_db: Vec::with_capacity(n),
        phase_deg: Vec::with_capacity(n),
        real_part: Vec::with_capacity(n),
    };
    for k in 1..=n {
        let w = std::f64::consts::PI * k as f64 / n as f64;
        let h = h_dag_at(dag, w);
        resp.omega.push(w);
        resp.magnitude_db.push(20.0 * h.norm().log10());
        resp.phase_deg.push(h.arg().to_degrees());
        resp.real_part.push(h.re);
    }
    resp
}

/// A point on an admissibility boundary in the `(c1, c2)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub c1: f64,
    pub c2: f64,
    /// 0 = strict-positive-real boundary of the gain filter,
    /// 1 = positive-real boundary of the integrator-cascaded operator.
    pub boundary_id: u8,
}

/// Trace both admissibility boundaries for a fixed `d1'`: the closed
/// contour inside which the gain filter is strictly positive real (from
/// the closed-form criterion) and the contour inside which the cascaded
/// operator stays positive real (located by bisection on the frequency
/// sweep).
pub fn contour_trace(d1_prime: f64, resolution: usize) -> Result<Vec<ContourPoint>> {
    if d1_prime.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "contour tracing requires |d1'| < 1, got {d1_prime}"
        )));
    }
    let n = resolution.max(8);
    let mut points = Vec::new();

    // SPR boundary: lower branch left to right, then upper branch right to
    // left, forming a closed polyline.
    let c2_grid: Vec<f64> = (0..n)
        .map(|i| -0.999 + 1.998 * i as f64 / (n - 1) as f64)
        .collect();
    let mut upper = Vec::new();
    for &c2 in &c2_grid {
        if let Some((lo, hi)) = spr_c1_interval(c2, d1_prime) {
            points.push(ContourPoint {
                c1: lo,
                c2,
                boundary_id: 0,
            });
            upper.push(ContourPoint {
                c1: hi,
                c2,
                boundary_id: 0,
            });
        }
    }
    points.extend(upper.into_iter().rev());

    // PR boundary of the cascaded operator, by c1 bisection per c2 line.
    let pr_grid = 2048;
    let pr_at = |c1: f64, c2: f64| -> bool {
        DagCoefficients::arima2(c1, c2, d1_prime)
            .map(|dag| paa_pr_check(&dag, pr_grid))
            .unwrap_or(false)
    };
    let mut upper = Vec::new();
    for &c2 in &c2_grid {
        // coarse scan for any admissible point on this line
        let scan: Vec<f64> = (0..=120).map(|i| -3.0 + 6.0 * i as f64 / 120.0).collect();
        let Some(hit) = scan.iter().copied().find(|&c1| pr_at(c1, c2)) else {
            continue;
        };
        let bisect = |mut inside: f64, mut outside: f64| -> f64 {
            for _ in 0..40 {
                let mid = 0.5 * (inside + outside);
                if pr_at(mid, c2) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            0.5 * (inside + outside)
        };
        let lo = bisect(hit, hit - 6.0);
        let hi = bisect(hit, hit + 6.0);
        points.push(ContourPoint {
            c1: lo,
            c2,
            boundary_id: 1,
        });
        upper.push(ContourPoint {
            c1: hi,
            c2,
            boundary_id: 1,
        });
    }
    points.extend(upper.into_iter().rev());
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arima2(c1: f64, c2: f64, d1p: f64) -> DagCoefficients {
        DagCoefficients::arima2(c1, c2, d1p).unwrap()
    }

    #[test]
    fn criterion_known_cases() {
        assert!(spr_criterion_arima2(0.99, 0.0, 0.8));
        assert!(spr_criterion_arima2(1.4, 0.5, 0.0)); // bound c1 < 2 sqrt(0.5)
        assert!(spr_criterion_arima2(0.0, 0.0, 0.0)); // H = 1
        assert!(!spr_criterion_arima2(1.5, 0.0, 0.0)); // numerator root at -1.5
        assert!(!spr_criterion_arima2(1.42, 0.5, 0.0)); // just past the bound
        assert!(!spr_criterion_arima2(0.0, 0.0, 1.0)); // pole on the circle
    }

    #[test]
    fn sweep_oracle_known_cases() {
        let v = spr_sweep_oracle(&arima2(0.99, 0.0, 0.9), DEFAULT_GRID);
        assert!(v.is_spr && v.criterion_verdict == Some(true));
        let v = spr_sweep_oracle(&arima2(0.0, 0.0, 0.9), DEFAULT_GRID);
        assert!(v.is_spr);
        // push c1 past the admissible bound: phase exceeds 90 degrees
        // somewhere, i.e. the real part dips negative
        let v = spr_sweep_oracle(&arima2(1.45, 0.5, 0.0), DEFAULT_GRID);
        assert!(!v.is_spr && v.min_real_part < 0.0);
        assert_eq!(v.criterion_verdict, Some(false));
    }

    #[test]
    fn oracle_handles_higher_orders() {
        // third-order numerator: outside the closed form's shape
        let dag = DagCoefficients::new(vec![0.3, 0.2, 0.1], vec![0.2, 0.1]).unwrap();
        let v = spr_sweep_oracle(&dag, DEFAULT_GRID);
        assert!(v.criterion_verdict.is_none());
        assert!(v.is_spr);
    }

    #[test]
    fn paa_pr_table_rows() {
        let grid = DEFAULT_GRID;
        assert!(paa_pr_check(&arima2(0.0, 0.0, 0.0), grid)); // pure integrator
        assert!(paa_pr_check(&arima2(0.99, 0.0, 0.0), grid));
        assert!(!paa_pr_check(&arima2(0.99, 0.0, 0.9), grid));
        assert!(!paa_pr_check(&arima2(0.0, 0.0, 0.9), grid));
        assert!(!paa_pr_check(&arima2(1.4, 0.5, 0.0), grid));
    }

    #[test]
    fn log_gain_integral_examples() {
        let nodes = 16384;
        assert!(
            log_gain_integral(&arima2(0.99, 0.0, 0.8), nodes)
                .unwrap()
                .abs()
                < 1e-6
        );
        assert_eq!(
            log_gain_integral(&DagCoefficients::identity(), nodes).unwrap(),
            0.0
        );
        assert!(
            log_gain_integral(&arima2(-0.5, 0.4, 0.7), nodes)
                .unwrap()
                .abs()
                < 1e-6
        );
        // precondition violated: numerator root outside the circle
        assert!(matches!(
            log_gain_integral(&arima2(1.5, 0.0, 0.0), nodes),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn steady_state_gain_examples() {
        assert!((steady_state_gain(&arima2(0.99, 0.0, 0.9)).unwrap() - 19.9).abs() < 1e-12);
        assert_eq!(
            steady_state_gain(&DagCoefficients::identity()).unwrap(),
            1.0
        );
        assert!((steady_state_gain(&arima2(0.99, 0.0, 0.0)).unwrap() - 1.99).abs() < 1e-12);
        let unit_sum = DagCoefficients::new(vec![], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            steady_state_gain(&unit_sum),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bode_phase_bounded_for_spr_filters() {
        for dag in [
            arima2(0.99, 0.0, 0.8),
            arima2(-0.5, 0.4, 0.7),
            arima2(0.99, 0.0, 0.9),
            arima2(1.4, 0.5, 0.0),
        ] {
            assert!(spr_sweep_oracle(&dag, DEFAULT_GRID).is_spr);
            let resp = bode(&dag, 4096);
            for (k, &ph) in resp.phase_deg.iter().enumerate() {
                assert!(ph.abs() < 90.0, "omega {}", resp.omega[k]);
            }
        }
    }

    #[test]
    fn bode_real_part_consistent_with_polar_form() {
        let resp = bode(&arima2(0.65, 0.0, 0.3), 512);
        for k in 0..resp.omega.len() {
            let mag = 10f64.powf(resp.magnitude_db[k] / 20.0);
            let re = mag * resp.phase_deg[k].to_radians().cos();
            assert!((re - resp.real_part[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn dc_magnitude_equals_steady_state_gain() {
        for dag in [arima2(0.99, 0.0, 0.9), arima2(-0.5, 0.4, 0.7)] {
            let ssg = steady_state_gain(&dag).unwrap();
            let h0 = h_dag_at(&dag, 0.0);
            assert!((h0.norm() - ssg.abs()).abs() < 1e-10);
            assert!(h0.im.abs() < 1e-12);
        }
    }

    #[test]
    fn contour_points_sit_on_their_boundaries() {
        let pts = contour_trace(0.5, 41).unwrap();
        assert!(pts.iter().any(|p| p.boundary_id == 0));
        assert!(pts.iter().any(|p| p.boundary_id == 1));
        for p in pts.iter().filter(|p| p.boundary_id == 0) {
            let m = spr_criterion_arima2_margin(p.c1, p.c2, 0.5);
            assert!(m.abs() < 1e-9, "margin {m} at ({}, {})", p.c1, p.c2);
        }
        // PR boundary points: inside on one side, outside on the other
        for p in pts.iter().filter(|p| p.boundary_id == 1).take(8) {
            let dag_in = |eps: f64| {
                DagCoefficients::arima2(p.c1 + eps, p.c2, 0.5)
                    .map(|d| paa_pr_check(&d, 1024))
                    .unwrap_or(false)
            };
            assert_ne!(dag_in(1e-3), dag_in(-1e-3));
        }
        assert!(contour_trace(1.0, 11).is_err());
    }
}
