use alloc::vec::Vec;

use num_complex::Complex64;

use super::{PhyError, Signal};

/// Blackman main-lobe width in units of `fs / taps`. The Blackman window's
/// first sidelobe sits near -74 dB, far below the 40 dB stopband target.
const BLACKMAN_TRANSITION_FACTOR: f64 = 5.5;

/// Linear-phase windowed-sinc low-pass filter.
///
/// `cutoff` is the passband edge and `cutoff + transition` the stopband edge;
/// the ideal sinc is placed in the middle of the transition band.
#[derive(Debug, Clone, PartialEq)]
pub struct FirLowpass {
    taps: Vec<f64>,
}

impl FirLowpass {
    pub fn design(sample_rate: f64, cutoff: f64, transition: f64) -> Result<Self, PhyError> {
        let bad = || PhyError::BadBand {
            cutoff,
            transition,
            sample_rate,
        };
        if !(sample_rate > 0.0) || !(cutoff > 0.0) || !(transition > 0.0) {
            return Err(bad());
        }
        if cutoff + transition > sample_rate / 2.0 {
            return Err(bad());
        }

        let mut len = libm::ceil(BLACKMAN_TRANSITION_FACTOR * sample_rate / transition) as usize;
        if len.is_multiple_of(2) {
            len += 1;
        }
        let centre = (len - 1) as f64 / 2.0;
        let fc = (cutoff + transition / 2.0) / sample_rate;
        let two_pi = 2.0 * core::f64::consts::PI;

        let mut taps: Vec<f64> = (0..len)
            .map(|n| {
                let t = n as f64 - centre;
                let sinc = if t == 0.0 {
                    2.0 * fc
                } else {
                    libm::sin(two_pi * fc * t) / (core::f64::consts::PI * t)
                };
                let phase = two_pi * n as f64 / (len - 1) as f64;
                let window = 0.42 - 0.5 * libm::cos(phase) + 0.08 * libm::cos(2.0 * phase);
                sinc * window
            })
            .collect();
        let dc: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= dc;
        }
        Ok(FirLowpass { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Group delay in samples.
    pub fn delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Complex frequency response at `freq` Hz.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let w = -2.0 * core::f64::consts::PI * freq / sample_rate;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &h)| {
                let (s, c) = libm::sincos(w * n as f64);
                Complex64::new(h * c, h * s)
            })
            .sum()
    }

    /// Filters `s` with the group delay removed; the output has the input's
    /// length and the edges see zero padding.
    pub fn apply(&self, s: &Signal) -> Signal {
        let n = s.len();
        let d = self.delay() as isize;
        let mut out = Vec::with_capacity(n);
        for i in 0..n as isize {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &h) in self.taps.iter().enumerate() {
                let idx = i + d - k as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += s.samples[idx as usize] * h;
                }
            }
            out.push(acc);
        }
        Signal::new(out, s.sample_rate)
    }
}

pub fn fir_lowpass(s: &Signal, cutoff: f64, transition: f64) -> Result<Signal, PhyError> {
    Ok(FirLowpass::design(s.sample_rate, cutoff, transition)?.apply(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{power_spectrum, single_tone};

    const FS: f64 = 10e6;

    fn steady_power(s: &Signal, skip: usize) -> f64 {
        let inner = Signal::new(s.samples[skip..s.len() - skip].to_vec(), s.sample_rate);
        power_spectrum(&inner, 1024).unwrap().total_power()
    }

    #[test]
    fn design_rejects_bad_bands() {
        assert!(FirLowpass::design(FS, 0.0, 1e6).is_err());
        assert!(FirLowpass::design(FS, 4e6, 0.0).is_err());
        assert!(FirLowpass::design(FS, 4.5e6, 1e6).is_err());
        assert!(FirLowpass::design(FS, 4e6, 1e6).is_ok());
    }

    #[test]
    fn dc_gain_is_unity() {
        let f = FirLowpass::design(FS, 4e6, 1e6).unwrap();
        assert!((f.response(0.0, FS).norm() - 1.0).abs() < 0.01);
        let dc = single_tone(0.0, FS, 0.001, 1.0).unwrap();
        let out = f.apply(&dc);
        let mid = out.samples[out.len() / 2];
        assert!((mid.re - 1.0).abs() < 0.01 && mid.im.abs() < 1e-9);
    }

    #[test]
    fn stopband_edge_attenuated_40db() {
        let f = FirLowpass::design(FS, 4e6, 1e6).unwrap();
        let tone = single_tone(5e6, FS, 0.0110592, 1.0).unwrap();
        let out = f.apply(&tone);
        let ratio = steady_power(&out, f.taps().len()) / steady_power(&tone, f.taps().len());
        assert!(10.0 * ratio.log10() <= -40.0, "{} dB", 10.0 * ratio.log10());
        assert!(20.0 * f.response(5e6, FS).norm().log10() <= -40.0);
    }

    #[test]
    fn passband_preserved_within_1db() {
        let f = FirLowpass::design(FS, 4e6, 1e6).unwrap();
        let tone = single_tone(2e6, FS, 0.0110592, 1.0).unwrap();
        let out = f.apply(&tone);
        let ratio = steady_power(&out, f.taps().len()) / steady_power(&tone, f.taps().len());
        assert!((10.0 * ratio.log10()).abs() <= 1.0);
    }

    #[test]
    fn taps_are_symmetric() {
        let f = FirLowpass::design(FS, 4e6, 1e6).unwrap();
        let t = f.taps();
        assert_eq!(t.len() % 2, 1);
        for i in 0..t.len() / 2 {
            assert!((t[i] - t[t.len() - 1 - i]).abs() < 1e-15);
        }
    }
}
