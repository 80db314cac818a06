//! Complex-baseband signals and the scalar metrics derived from them.
//!
//! Gains are amplitude gains (`10^(dB/20)`). Noise amplitude is the complex
//! standard deviation, split evenly between the real and imaginary parts.

mod fft;
mod filter;
mod info;
mod spectrum;

pub use filter::{fir_lowpass, FirLowpass};
pub use info::{
    estimate_entropy, estimate_mutual_information, scanned_information, EmpiricalDistribution,
    Entropy, JointHistogram, DEFAULT_BINS,
};
pub use spectrum::{power_spectrum, Spectrum};

use alloc::vec::Vec;

pub use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyError {
    #[error("signal lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample rates differ ({0} vs {1})")]
    RateMismatch(f64, f64),
    #[error("tone at {freq} Hz aliases at sample rate {sample_rate}")]
    AliasedFrequency { freq: f64, sample_rate: f64 },
    #[error(
        "invalid filter band: cutoff {cutoff} Hz, transition {transition} Hz at {sample_rate} S/s"
    )]
    BadBand {
        cutoff: f64,
        transition: f64,
        sample_rate: f64,
    },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("fft size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid parameter {0}")]
    BadParameter(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Signal {
            samples,
            sample_rate,
        }
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Self {
        Signal::new(alloc::vec![Complex64::new(0.0, 0.0); len], sample_rate)
    }

    pub fn from_real(values: &[f64], sample_rate: f64) -> Self {
        Signal::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate,
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Squared Euclidean norm over all samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        Signal::new(
            self.samples.iter().map(|s| s * factor).collect(),
            self.sample_rate,
        )
    }
}

/// Complex white Gaussian noise; real and imaginary parts are i.i.d.
/// `N(0, amplitude^2 / 2)`. Samples come from ChaCha8 seeded with `seed`.
pub fn gaussian_noise(sample_rate: f64, duration: f64, amplitude: f64, seed: u64) -> Signal {
    let n = libm::round(sample_rate * duration).max(0.0) as usize;
    let sigma = amplitude / core::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    Signal::new(samples, sample_rate)
}

/// `amplitude * exp(i 2 pi f n / fs)`. The Nyquist frequency itself is
/// accepted (it is the alternating sequence), anything beyond it aliases.
pub fn single_tone(
    freq_offset: f64,
    sample_rate: f64,
    duration: f64,
    amplitude: f64,
) -> Result<Signal, PhyError> {
    if !(sample_rate > 0.0) || libm::fabs(freq_offset) > sample_rate / 2.0 {
        return Err(PhyError::AliasedFrequency {
            freq: freq_offset,
            sample_rate,
        });
    }
    let n = libm::round(sample_rate * duration).max(0.0) as usize;
    let cycles_per_sample = freq_offset / sample_rate;
    let samples = (0..n)
        .map(|k| {
            // reduce before multiplying by 2 pi so long tones keep their phase accuracy
            let frac = libm::fmod(cycles_per_sample * k as f64, 1.0);
            let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * frac);
            Complex64::new(amplitude * c, amplitude * s)
        })
        .collect();
    Ok(Signal::new(samples, sample_rate))
}

fn check_compatible(a: &Signal, b: &Signal) -> Result<(), PhyError> {
    if a.sample_rate != b.sample_rate {
        return Err(PhyError::RateMismatch(a.sample_rate, b.sample_rate));
    }
    if a.len() != b.len() {
        return Err(PhyError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Received signal `x + interferer`.
pub fn superpose(x: &Signal, interferer: &Signal) -> Result<Signal, PhyError> {
    check_compatible(x, interferer)?;
    Ok(Signal::new(
        x.samples
            .iter()
            .zip(&interferer.samples)
            .map(|(a, b)| a + b)
            .collect(),
        x.sample_rate,
    ))
}

/// Result of an SNR computation. A silent interferer has no finite ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrDb {
    Finite(f64),
    JammerSilent,
}

impl SnrDb {
    /// Decibel value, `+inf` for a silent interferer.
    pub fn value(&self) -> f64 {
        match self {
            SnrDb::Finite(v) => *v,
            SnrDb::JammerSilent => f64::INFINITY,
        }
    }

    pub fn is_silent(&self) -> bool {
        matches!(self, SnrDb::JammerSilent)
    }
}

/// `10 log10(|x|^2 / |j|^2)` with Euclidean norms over the samples.
pub fn snr_db(x: &Signal, j: &Signal) -> Result<SnrDb, PhyError> {
    if x.len() != j.len() {
        return Err(PhyError::LengthMismatch(x.len(), j.len()));
    }
    let jam = j.energy();
    if jam == 0.0 {
        return Ok(SnrDb::JammerSilent);
    }
    Ok(SnrDb::Finite(10.0 * libm::log10(x.energy() / jam)))
}

pub fn db_to_amplitude(gain_db: f64) -> f64 {
    libm::pow(10.0, gain_db / 20.0)
}

pub fn db_to_power(gain_db: f64) -> f64 {
    libm::pow(10.0, gain_db / 10.0)
}

pub fn power_to_db(power: f64) -> f64 {
    10.0 * libm::log10(power)
}

pub fn apply_gain_db(s: &Signal, gain_db: f64) -> Signal {
    s.scaled(db_to_amplitude(gain_db))
}
