//! Synthetic feedforward noise-control run with the FIR
//! Youla-Kucera-parametrized compensator.
//!
//! Block structure: a disturbance `w` reaches the error microphone through
//! the primary path `D`; the compensator output `u` reaches it through the
//! secondary path `G` and leaks back into the reference microphone through
//! the reverse path `M`. With the central controller zeroed out the
//! compensator reduces to an FIR filter `Q` acting on the observer signal
//! `v(t) = B_M u(t) - A_M y_ref(t)`, whose poles stay pinned at `A_M`.
//! Adaptation uses the regressor `r = G_hat[v]` and the negated residual
//! as the a-priori error.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{monte_carlo_anc, ScenarioConfig};
use crate::adaptive::AdaptiveFilterState;
use crate::error::{Error, Result};
use crate::metrics::MetricSeries;
use crate::plant::{PlantModel, PlantState};
use crate::poly;

/// Synthetic path set and disturbance shape.
#[derive(Debug, Clone, PartialEq)]
pub struct AncParams {
    /// Secondary path `G` (actuator to error microphone).
    pub secondary: PlantModel,
    /// Reverse path `M` (actuator to reference microphone).
    pub reverse: PlantModel,
    /// Primary path `D` (disturbance to error microphone).
    pub primary: PlantModel,
    pub sample_rate: f64,
    pub noise_band_hz: (f64, f64),
    pub noise_std: f64,
    pub tone_frequencies_hz: Vec<f64>,
    pub tone_amplitudes: Vec<f64>,
    /// Variance-evaluation horizon for the attenuation metric, in samples.
    pub attenuation_window: usize,
}

/// Denominator factor with a resonant pole pair at `radius` and `freq_hz`.
fn resonant_pair(radius: f64, freq_hz: f64, fs: f64) -> Vec<f64> {
    let theta = std::f64::consts::TAU * freq_hz / fs;
    vec![1.0, -2.0 * radius * theta.cos(), radius * radius]
}

impl Default for AncParams {
    fn default() -> Self {
        let fs = 2500.0;
        let den = |p1: Vec<f64>, p2: Vec<f64>| {
            let full = poly::convolve(&p1, &p2);
            full[1..].to_vec()
        };
        // fourth-order lowpass-with-resonance models; relative delays 2/2/3
        // and a minimum-phase secondary numerator so the perfect-model ideal
        // compensator is causal and stable
        let secondary = PlantModel::new(
            vec![1.0, 0.5, 0.25],
            den(
                resonant_pair(0.93, 120.0, fs),
                resonant_pair(0.7, 300.0, fs),
            ),
            1,
        )
        .expect("secondary path is stable")
        .with_dc_gain(1.0);
        let reverse = PlantModel::new(
            vec![1.0, 0.3],
            den(resonant_pair(0.9, 90.0, fs), resonant_pair(0.6, 250.0, fs)),
            1,
        )
        .expect("reverse path is stable")
        .with_dc_gain(0.5);
        let primary = PlantModel::new(
            vec![1.0, 0.4],
            den(
                resonant_pair(0.92, 110.0, fs),
                resonant_pair(0.65, 250.0, fs),
            ),
            2,
        )
        .expect("primary path is stable")
        .with_dc_gain(1.2);
        Self {
            secondary,
            reverse,
            primary,
            sample_rate: fs,
            noise_band_hz: (70.0, 170.0),
            noise_std: 0.3,
            tone_frequencies_hz: vec![100.0, 140.0],
            tone_amplitudes: vec![0.25, 0.25],
            attenuation_window: 7500,
        }
    }
}

/// Band-limited unit-variance noise: white Gaussian through a windowed-sinc
/// bandpass.
fn bandpass_noise(rng: &mut impl Rng, n: usize, fs: f64, lo: f64, hi: f64) -> Vec<f64> {
    const TAPS: usize = 161;
    let mid = (TAPS - 1) as f64 / 2.0;
    let sinc = |x: f64| {
        if x == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
        }
    };
    let mut h = [0.0f64; TAPS];
    for (k, tap) in h.iter_mut().enumerate() {
        let m = k as f64 - mid;
        let lp = |fc: f64| 2.0 * fc / fs * sinc(2.0 * fc / fs * m);
        let hamming = 0.54 - 0.46 * (std::f64::consts::TAU * k as f64 / (TAPS - 1) as f64).cos();
        *tap = (lp(hi) - lp(lo)) * hamming;
    }
    let white: Vec<f64> = (0..n + TAPS).map(|_| StandardNormal.sample(rng)).collect();
    let mut out = vec![0.0; n];
    for (t, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &hk) in h.iter().enumerate() {
            acc += hk * white[t + TAPS - k];
        }
        *o = acc;
    }
    let var = out.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if var > 0.0 {
        let s = 1.0 / var.sqrt();
        for o in &mut out {
            *o *= s;
        }
    }
    out
}

fn make_disturbance(params: &AncParams, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut w = bandpass_noise(
        rng,
        n,
        params.sample_rate,
        params.noise_band_hz.0,
        params.noise_band_hz.1,
    );
    for x in &mut w {
        *x *= params.noise_std;
    }
    for (f, a) in params
        .tone_frequencies_hz
        .iter()
        .zip(&params.tone_amplitudes)
    {
        let ph = rng.random_range(0.0..std::f64::consts::TAU);
        let omega = std::f64::consts::TAU * f / params.sample_rate;
        for (t, x) in w.iter_mut().enumerate() {
            *x += a * (omega * t as f64 + ph).sin();
        }
    }
    w
}

pub(crate) struct AncRun {
    pub residual_sq: Vec<f64>,
    pub open_loop_sq: Vec<f64>,
    pub e_prior: Vec<f64>,
    pub e_posterior: Vec<f64>,
    pub mean_energy: f64,
}

fn simulate_once(cfg: &ScenarioConfig, run_idx: usize) -> Result<AncRun> {
    let p = &cfg.anc;
    let n = cfg.horizon;
    let n_q = cfg.filter_length;
    let mut rng = cfg.run_rng(run_idx);
    let disturbance = make_disturbance(p, n, &mut rng);
    let open_loop = p.primary.simulate(&disturbance);

    let reverse_den = p.reverse.denominator().to_vec();
    let mut m_state = PlantState::new(&p.reverse); // M[u]
    let mut vf_state = PlantState::new(&p.secondary); // G_hat[v]
    let mut gu_state = PlantState::new(&p.secondary); // G[u]

    // histories for v(t) = B_M u(t) - A_M y_ref(t), expressed through the
    // reverse-path output: B_M u = A_M M[u]
    let mut m_hist = vec![0.0; reverse_den.len()];
    let mut yref_hist = vec![0.0; reverse_den.len()];
    let mut v_line = vec![0.0; n_q];

    let mut filter = AdaptiveFilterState::new(n_q, cfg.algorithm, cfg.dag.clone());
    let mut run = AncRun {
        residual_sq: Vec::with_capacity(n),
        open_loop_sq: Vec::with_capacity(n),
        e_prior: Vec::with_capacity(n),
        e_posterior: Vec::with_capacity(n),
        mean_energy: 0.0,
    };

    for t in 0..n {
        let m_out = m_state.output(&p.reverse);
        let y_ref = disturbance[t] + m_out;

        // v(t) = [m_out + sum a_i m_out(t-i)] - [y_ref + sum a_i y_ref(t-i)]
        let mut v = m_out - y_ref;
        for (i, &a) in reverse_den.iter().enumerate() {
            v += a * (m_hist[i] - yref_hist[i]);
        }

        let v_f = vf_state.output(&p.secondary);
        vf_state.commit(&p.secondary, v, v_f);

        v_line.rotate_right(1);
        v_line[0] = v;
        let u: f64 = filter
            .weights()
            .iter()
            .zip(&v_line)
            .map(|(q, vv)| q * vv)
            .sum();

        let g_u = gu_state.output(&p.secondary);
        gu_state.commit(&p.secondary, u, g_u);
        m_state.commit(&p.reverse, u, m_out);
        m_hist.rotate_right(1);
        m_hist[0] = m_out;
        yref_hist.rotate_right(1);
        yref_hist[0] = y_ref;

        let residual = open_loop[t] + g_u;

        filter.push_input(v_f);
        run.mean_energy += filter.regressor_energy();
        let rec = filter.step_with_error(-residual)?;

        run.residual_sq.push(residual * residual);
        run.open_loop_sq.push(open_loop[t] * open_loop[t]);
        run.e_prior.push(rec.e_prior);
        run.e_posterior.push(rec.e_posterior);
    }
    run.mean_energy /= n as f64;
    Ok(run)
}

/// Attenuation trace in dB from power traces: ratio of open-loop to
/// closed-loop variance over a trailing window. NaN sentinel where
/// undefined (leading partial windows, silent disturbance).
pub(crate) fn attenuation_from_power(
    open_loop_sq: &[f64],
    residual_sq: &[f64],
    window: usize,
) -> Vec<f64> {
    let n = open_loop_sq.len();
    let mut att = vec![f64::NAN; n];
    let mut off_acc = 0.0;
    let mut on_acc = 0.0;
    for t in 0..n {
        off_acc += open_loop_sq[t];
        on_acc += residual_sq[t];
        if t >= window {
            off_acc -= open_loop_sq[t - window];
            on_acc -= residual_sq[t - window];
        }
        if t + 1 >= window && on_acc > 0.0 && off_acc > 0.0 {
            att[t] = 10.0 * (off_acc / on_acc).log10();
        }
    }
    att
}

pub(crate) fn run_anc_synthetic(cfg: &ScenarioConfig) -> Result<MetricSeries> {
    if cfg.anc.attenuation_window == 0 {
        return Err(Error::Config("attenuation_window must be positive".into()));
    }
    monte_carlo_anc(cfg, |run_idx| simulate_once(cfg, run_idx))
}
