//! Deterministic and stochastic excitation signals plus external sample
//! ingestion.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Maximal-length feedback taps (1-indexed bit positions) for the supported
/// register lengths. Fixed published primitive polynomials so that sequences
/// are reproducible across implementations.
const LFSR_TAPS: &[(u32, &[u32])] = &[
    (2, &[2, 1]),
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
];

/// Pseudo-random binary sequence from a maximal-length shift register.
/// Output values are `-amplitude`/`+amplitude`; the sequence repeats with
/// period `2^register_length - 1`.
#[derive(Debug, Clone)]
pub struct PrbsGenerator {
    register_length: u32,
    taps: &'static [u32],
    state: u32,
    amplitude: f64,
}

impl PrbsGenerator {
    pub fn new(register_length: u32, seed: u32, amplitude: f64) -> Result<Self> {
        let taps = LFSR_TAPS
            .iter()
            .find(|(n, _)| *n == register_length)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unsupported PRBS register length {register_length} (supported: 2..=16)"
                ))
            })?;
        let mask = (1u32 << register_length) - 1;
        if seed & mask == 0 {
            return Err(Error::Config(
                "PRBS seed must be nonzero (the all-zero state is absorbing)".into(),
            ));
        }
        Ok(Self {
            register_length,
            taps,
            state: seed & mask,
            amplitude,
        })
    }

    /// All-ones start state.
    pub fn with_default_seed(register_length: u32, amplitude: f64) -> Result<Self> {
        let seed = (1u64 << register_length) as u32 - 1;
        Self::new(register_length, seed, amplitude)
    }

    pub fn period(&self) -> usize {
        (1usize << self.register_length) - 1
    }

    /// Current register state (usable as a seed to resume the sequence).
    pub fn state(&self) -> u32 {
        self.state
    }

    /// Advance the register one step and return the output sample.
    pub fn next_sample(&mut self) -> f64 {
        let out = self.state & 1;
        // feedback = XOR over tap stages; stage n maps to bit 0, so the
        // outgoing bit always participates and the map stays invertible
        let mut fb = 0u32;
        for &t in self.taps {
            fb ^= (self.state >> (self.register_length - t)) & 1;
        }
        self.state = (self.state >> 1) | (fb << (self.register_length - 1));
        if out == 1 {
            self.amplitude
        } else {
            -self.amplitude
        }
    }

    pub fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_sample()).collect()
    }
}

/// Recipe for one test signal.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    Prbs {
        register_length: u32,
        seed: u32,
        amplitude: f64,
    },
    Multisine {
        frequencies_hz: Vec<f64>,
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
    },
    GaussianNoise {
        std: f64,
    },
    File {
        path: std::path::PathBuf,
    },
    Sum(Vec<SignalKind>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub sample_rate: f64,
    pub length: usize,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, sample_rate: f64, length: usize) -> Self {
        Self {
            kind,
            sample_rate,
            length,
        }
    }
}

/// Render a signal spec to samples. Identical `(spec, seed)` pairs produce
/// bit-identical output; stochastic components draw from a ChaCha stream
/// seeded with `seed`.
pub fn generate(spec: &SignalSpec, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(spec, &mut rng)
}

/// As [`generate`] but drawing from a caller-owned RNG stream.
pub fn generate_with_rng(spec: &SignalSpec, rng: &mut impl Rng) -> Result<Vec<f64>> {
    render(&spec.kind, spec.sample_rate, spec.length, rng)
}

fn render(kind: &SignalKind, fs: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    match kind {
        SignalKind::Prbs {
            register_length,
            seed,
            amplitude,
        } => {
            let mut gen = PrbsGenerator::new(*register_length, *seed, *amplitude)?;
            Ok(gen.take(n))
        }
        SignalKind::Multisine {
            frequencies_hz,
            amplitudes,
            phases,
        } => {
            if frequencies_hz.len() != amplitudes.len() || frequencies_hz.len() != phases.len() {
                return Err(Error::Config(
                    "multisine frequency/amplitude/phase lists must have equal lengths".into(),
                ));
            }
            for &f in frequencies_hz {
                if !(f >= 0.0 && f < fs / 2.0) {
                    return Err(Error::Config(format!(
                        "multisine frequency {f} Hz is not below the Nyquist rate {} Hz",
                        fs / 2.0
                    )));
                }
            }
            let mut out = vec![0.0; n];
            for ((f, a), ph) in frequencies_hz.iter().zip(amplitudes).zip(phases) {
                let w = std::f64::consts::TAU * f / fs;
                for (t, s) in out.iter_mut().enumerate() {
                    *s += a * (w * t as f64 + ph).sin();
                }
            }
            Ok(out)
        }
        SignalKind::GaussianNoise { std } => {
            if *std < 0.0 {
                return Err(Error::Config("noise std must be nonnegative".into()));
            }
            Ok((0..n)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(rng);
                    std * x
                })
                .collect())
        }
        SignalKind::File { path } => {
            let (samples, _) = read_pcm_wav(path)?;
            if samples.len() < n {
                return Err(Error::Ingestion(format!(
                    "{}: file holds {} samples, {} requested",
                    path.display(),
                    samples.len(),
                    n
                )));
            }
            Ok(samples[..n].to_vec())
        }
        SignalKind::Sum(parts) => {
            let mut out = vec![0.0; n];
            for part in parts {
                let s = render(part, fs, n, rng)?;
                for (o, v) in out.iter_mut().zip(s) {
                    *o += v;
                }
            }
            Ok(out)
        }
    }
}

/// Read a mono 16-bit PCM RIFF/WAVE file. Samples are scaled to `[-1, 1)`
/// by dividing by 32768. Returns `(samples, sample_rate)`.
pub fn read_pcm_wav(path: &std::path::Path) -> Result<(Vec<f64>, u32)> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
    parse_pcm_wav(&bytes).map_err(|msg| Error::Ingestion(format!("{}: {msg}", path.display())))
}

fn parse_pcm_wav(bytes: &[u8]) -> std::result::Result<(Vec<f64>, u32), String> {
    fn u16le(b: &[u8]) -> u16 {
        u16::from_le_bytes([b[0], b[1]])
    }
    fn u32le(b: &[u8]) -> u32 {
        u32::from_le_bytes([b[0], b[1], b[2], b[3]])
    }

    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err("not a RIFF/WAVE file".into());
    }
    let mut pos = 12;
    let mut sample_rate = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32le(&bytes[pos + 4..pos + 8]) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).ok_or("chunk size overflow")?;
        if body_end > bytes.len() {
            return Err("truncated chunk".into());
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err("fmt chunk too short".into());
                }
                let format = u16le(&body[0..2]);
                let channels = u16le(&body[2..4]);
                let rate = u32le(&body[4..8]);
                let bits = u16le(&body[14..16]);
                if format != 1 {
                    return Err(format!("unsupported WAVE format tag {format} (PCM only)"));
                }
                if channels != 1 {
                    return Err(format!("unsupported channel count {channels} (mono only)"));
                }
                if bits != 16 {
                    return Err(format!("unsupported bit depth {bits} (16-bit only)"));
                }
                sample_rate = Some(rate);
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = body_end + (size & 1);
    }
    let sample_rate = sample_rate.ok_or("missing fmt chunk")?;
    let data = data.ok_or("missing data chunk")?;
    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
        .collect();
    Ok((samples, sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prbs_period_255() {
        let mut gen = PrbsGenerator::with_default_seed(8, 1.0).unwrap();
        let seq = gen.take(255 * 2);
        assert_eq!(&seq[..255], &seq[255..]);
        // no shorter period: the sequence must differ from all proper shifts
        for shift in 1..255 {
            assert!((0..255).any(|i| seq[i] != seq[(i + shift) % 255]));
        }
    }

    #[test]
    fn prbs_period_2047_by_state_enumeration() {
        let mut gen = PrbsGenerator::with_default_seed(11, 1.0).unwrap();
        let start = gen.state;
        let mut count = 0usize;
        loop {
            gen.next_sample();
            count += 1;
            if gen.state == start {
                break;
            }
            assert!(count <= 4096, "did not cycle");
        }
        assert_eq!(count, 2047);
    }

    #[test]
    fn prbs_zero_seed_is_error() {
        assert!(matches!(
            PrbsGenerator::new(8, 0, 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PrbsGenerator::new(17, 1, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn prbs_autocorrelation_two_valued() {
        let amp = 3.0;
        let n = 255;
        let mut gen = PrbsGenerator::with_default_seed(8, amp).unwrap();
        let seq = gen.take(n);
        for lag in 0..n {
            let acf: f64 = (0..n).map(|i| seq[i] * seq[(i + lag) % n]).sum();
            let expected = if lag == 0 {
                n as f64 * amp * amp
            } else {
                -amp * amp
            };
            assert_eq!(acf, expected, "lag {lag}");
        }
    }

    #[test]
    fn multisine_has_line_spectrum() {
        let fs = 8000.0;
        let n = 8000;
        let freqs = vec![80.0, 125.0, 230.0, 400.0];
        let spec = SignalSpec::new(
            SignalKind::Multisine {
                frequencies_hz: freqs.clone(),
                amplitudes: vec![1.0; 4],
                phases: vec![0.3; 4],
            },
            fs,
            n,
        );
        let s = generate(&spec, 0).unwrap();
        // Goertzel-style DFT magnitude at integer bins
        let dft_mag = |k: usize| -> f64 {
            let w = std::f64::consts::TAU * k as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in s.iter().enumerate() {
                re += x * (w * t as f64).cos();
                im -= x * (w * t as f64).sin();
            }
            (re * re + im * im).sqrt() / n as f64
        };
        for &f in &freqs {
            assert!((dft_mag(f as usize) - 0.5).abs() < 1e-9, "line at {f} Hz");
        }
        for k in [50usize, 100, 300, 500, 1000] {
            assert!(dft_mag(k) < 1e-9, "no line at bin {k}");
        }
    }

    #[test]
    fn multisine_rejects_frequencies_at_nyquist() {
        let spec = SignalSpec::new(
            SignalKind::Multisine {
                frequencies_hz: vec![4000.0],
                amplitudes: vec![1.0],
                phases: vec![0.0],
            },
            8000.0,
            16,
        );
        assert!(generate(&spec, 0).is_err());
    }

    #[test]
    fn zero_std_noise_is_silent() {
        let spec = SignalSpec::new(SignalKind::GaussianNoise { std: 0.0 }, 1.0, 64);
        assert!(generate(&spec, 9).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sum_is_samplewise() {
        let fs = 8000.0;
        let n = 256;
        let sine = SignalKind::Multisine {
            frequencies_hz: vec![100.0],
            amplitudes: vec![0.7],
            phases: vec![0.0],
        };
        let noise = SignalKind::GaussianNoise { std: 0.5 };
        let total = generate(
            &SignalSpec::new(SignalKind::Sum(vec![sine.clone(), noise.clone()]), fs, n),
            42,
        )
        .unwrap();
        // same stream order: sine draws nothing, noise draws n samples
        let s1 = generate(&SignalSpec::new(sine, fs, n), 42).unwrap();
        let s2 = generate(&SignalSpec::new(noise, fs, n), 42).unwrap();
        for t in 0..n {
            assert_eq!(total[t], s1[t] + s2[t]);
        }
    }

    #[test]
    fn generate_is_reproducible() {
        let spec = SignalSpec::new(SignalKind::GaussianNoise { std: 1.0 }, 1.0, 128);
        assert_eq!(generate(&spec, 7).unwrap(), generate(&spec, 7).unwrap());
        assert_ne!(generate(&spec, 7).unwrap(), generate(&spec, 8).unwrap());
    }

    fn wav_bytes(channels: u16, bits: u16, samples: &[i16]) -> Vec<u8> {
        let data_len = samples.len() * 2;
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&8000u32.to_le_bytes());
        b.extend_from_slice(&(8000u32 * 2).to_le_bytes());
        b.extend_from_slice(&2u16.to_le_bytes());
        b.extend_from_slice(&bits.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&(data_len as u32).to_le_bytes());
        for s in samples {
            b.extend_from_slice(&s.to_le_bytes());
        }
        b
    }

    #[test]
    fn wav_roundtrip_and_scaling() {
        let (samples, rate) = parse_pcm_wav(&wav_bytes(1, 16, &[0, 16384, -32768, 32767])).unwrap();
        assert_eq!(rate, 8000);
        assert_eq!(samples, vec![0.0, 0.5, -1.0, 32767.0 / 32768.0]);
    }

    #[test]
    fn wav_rejects_stereo_and_garbage() {
        assert!(parse_pcm_wav(&wav_bytes(2, 16, &[0, 0])).is_err());
        assert!(parse_pcm_wav(&wav_bytes(1, 8, &[0])).is_err());
        assert!(parse_pcm_wav(b"RIFFxxxxJUNK").is_err());
        assert!(parse_pcm_wav(b"").is_err());
    }
}
