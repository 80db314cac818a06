use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::fft::fft_in_place;
use super::{PhyError, Signal};

/// Averaged periodogram. Bins are ordered from `-fs/2` upward (DC in the
/// middle), like a frequency sink display.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Index of the strongest bin (first one on ties).
    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        best
    }

    /// Bin whose centre frequency is closest to `freq`.
    pub fn bin_nearest(&self, freq: f64) -> usize {
        let mut best = 0;
        for (i, &f) in self.bin_frequencies.iter().enumerate() {
            if libm::fabs(f - freq) < libm::fabs(self.bin_frequencies[best] - freq) {
                best = i;
            }
        }
        best
    }
}

/// Rectangular-window periodogram averaged over consecutive, non-overlapping
/// windows of `fft_size` samples. Trailing samples that do not fill a window
/// are ignored. Each bin holds `|X[k]|^2 / N^2`, so the bins sum to the mean
/// power of the samples that were used.
pub fn power_spectrum(s: &Signal, fft_size: usize) -> Result<Spectrum, PhyError> {
    if fft_size == 0 || !fft_size.is_power_of_two() {
        return Err(PhyError::NotPowerOfTwo(fft_size));
    }
    if s.len() < fft_size {
        return Err(PhyError::TooFewSamples {
            needed: fft_size,
            got: s.len(),
        });
    }
    let windows = s.len() / fft_size;
    let mut acc = vec![0.0f64; fft_size];
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    let norm = (fft_size as f64) * (fft_size as f64);
    for w in 0..windows {
        buf.copy_from_slice(&s.samples[w * fft_size..(w + 1) * fft_size]);
        fft_in_place(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr() / norm;
        }
    }

    let half = fft_size / 2;
    let df = s.sample_rate / fft_size as f64;
    let mut power = Vec::with_capacity(fft_size);
    let mut bin_frequencies = Vec::with_capacity(fft_size);
    for i in 0..fft_size {
        let k = (i + half) % fft_size;
        power.push(acc[k] / windows as f64);
        bin_frequencies.push((i as f64 - half as f64) * df);
    }
    Ok(Spectrum {
        bin_frequencies,
        power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{gaussian_noise, single_tone};
    use proptest::prelude::*;

    #[test]
    fn tone_peak_lands_on_nearest_bin() {
        let s = single_tone(1e6, 10e6, 0.01, 1.0).unwrap();
        let sp = power_spectrum(&s, 1024).unwrap();
        assert_eq!(sp.len(), 1024);
        let peak = sp.peak_bin();
        assert_eq!(peak, sp.bin_nearest(1e6));
        // 1 MHz / (10 MHz / 1024) = 102.4 bins above DC
        assert_eq!(peak, 512 + 102);
        let second = sp
            .power
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != peak)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
        assert!(sp.power[peak] > second);
    }

    #[test]
    fn bin_frequencies_are_centred() {
        let s = single_tone(0.0, 8.0, 2.0, 1.0).unwrap();
        let sp = power_spectrum(&s, 4).unwrap();
        assert_eq!(sp.bin_frequencies, alloc::vec![-4.0, -2.0, 0.0, 2.0]);
        assert!((sp.power[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_spectrum_is_flat() {
        let s = gaussian_noise(10e6, 1024.0 * 100.0 / 10e6, 1.0, 11);
        let sp = power_spectrum(&s, 1024).unwrap();
        let max = sp.power.iter().cloned().fold(f64::MIN, f64::max);
        let min = sp.power.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 10.0, "ratio {}", max / min);
    }

    #[test]
    fn rejects_bad_sizes() {
        let s = single_tone(0.0, 1e3, 0.1, 1.0).unwrap();
        assert_eq!(power_spectrum(&s, 1000), Err(PhyError::NotPowerOfTwo(1000)));
        assert_eq!(
            power_spectrum(&s, 1024),
            Err(PhyError::TooFewSamples {
                needed: 1024,
                got: 100
            })
        );
    }

    proptest! {
        #[test]
        fn parseval(values in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 256..1200)) {
            let s = Signal::new(values.iter().map(|&(r, i)| Complex64::new(r, i)).collect(), 1e6);
            let sp = power_spectrum(&s, 64).unwrap();
            let used = (s.len() / 64) * 64;
            let mean: f64 = s.samples[..used].iter().map(|c| c.norm_sqr()).sum::<f64>() / used as f64;
            prop_assert!((sp.total_power() - mean).abs() <= 1e-6 * mean.max(1e-12));
        }
    }
}
