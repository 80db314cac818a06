use crate::medium::Occupancy;
use crate::phy::{apply_gain_db, fir_lowpass, gaussian_noise, PhyError, Signal};

/// Constant Gaussian jammer modelled as an SDR transmit chain:
/// noise source, RF/IF/baseband gain stages, then a low-pass filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerConfig {
    pub channel: u8,
    pub start: u64,
    /// Exclusive; `None` jams until the end of the run.
    pub stop: Option<u64>,
    pub amplitude: f64,
    pub sample_rate: f64,
    pub rf_gain_db: f64,
    pub if_gain_db: f64,
    pub bb_gain_db: f64,
    pub cutoff_hz: f64,
    pub transition_hz: f64,
    /// Length of the noise block used to measure output power.
    pub block_seconds: f64,
}

impl Default for JammerConfig {
    fn default() -> Self {
        JammerConfig {
            channel: 81,
            start: 0,
            stop: None,
            amplitude: 1.0,
            sample_rate: 10e6,
            rf_gain_db: 14.0,
            if_gain_db: 47.0,
            bb_gain_db: 0.0,
            cutoff_hz: 4e6,
            transition_hz: 1e6,
            block_seconds: 1e-3,
        }
    }
}

impl JammerConfig {
    pub fn is_active(&self, tick: u64) -> bool {
        tick >= self.start && self.stop.is_none_or(|stop| tick < stop)
    }

    pub fn total_gain_db(&self) -> f64 {
        self.rf_gain_db + self.if_gain_db + self.bb_gain_db
    }
}

/// Output of the transmit chain for `duration` seconds of noise.
pub fn jammer_signal(cfg: &JammerConfig, duration: f64, seed: u64) -> Result<Signal, PhyError> {
    let noise = gaussian_noise(cfg.sample_rate, duration, cfg.amplitude, seed);
    let mut s = apply_gain_db(&noise, cfg.rf_gain_db);
    s = apply_gain_db(&s, cfg.if_gain_db);
    s = apply_gain_db(&s, cfg.bb_gain_db);
    fir_lowpass(&s, cfg.cutoff_hz, cfg.transition_hz)
}

/// Mean output power of the chain, excluding the filter's start-up edges.
/// Computed once per jammer; ticks reuse the scalar.
pub fn interference_power(cfg: &JammerConfig, seed: u64) -> Result<f64, PhyError> {
    let s = jammer_signal(cfg, cfg.block_seconds, seed)?;
    let edge = libm::ceil(5.5 * cfg.sample_rate / cfg.transition_hz) as usize;
    if s.len() <= 2 * edge {
        return Err(PhyError::TooFewSamples {
            needed: 2 * edge + 1,
            got: s.len(),
        });
    }
    let inner = &s.samples[edge..s.len() - edge];
    Ok(inner.iter().map(|z| z.norm_sqr()).sum::<f64>() / inner.len() as f64)
}

/// Adds the jammer's contribution for `tick` and returns the in-channel
/// power added (zero outside the active window).
pub fn jammer_step(
    tick: u64,
    cfg: &JammerConfig,
    power: f64,
    occupancy: &mut Occupancy,
    adjacent_rejection_db: f64,
) -> f64 {
    if !cfg.is_active(tick) || power <= 0.0 {
        return 0.0;
    }
    occupancy.add_gaussian(cfg.channel, power, adjacent_rejection_db);
    power
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{db_to_power, power_to_db};

    #[test]
    fn default_chain_power_matches_gain_arithmetic() {
        let cfg = JammerConfig::default();
        let p = interference_power(&cfg, 42).unwrap();
        // unit-power white noise, 61 dB of gain; the filter's -6 dB points
        // sit at +-4.5 MHz, so 9 of the 10 MHz band survives
        let expected = db_to_power(61.0) * 0.9;
        assert!(
            (power_to_db(p) - power_to_db(expected)).abs() < 0.3,
            "{}",
            power_to_db(p)
        );
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let cfg = JammerConfig {
            amplitude: 0.0,
            ..JammerConfig::default()
        };
        let p = interference_power(&cfg, 1).unwrap();
        assert_eq!(p, 0.0);
        let mut occ = Occupancy::default();
        assert_eq!(jammer_step(0, &cfg, p, &mut occ, 20.0), 0.0);
        assert_eq!(occ.get(81).interferer_power, 0.0);
    }

    #[test]
    fn active_window() {
        let cfg = JammerConfig {
            start: 10,
            stop: Some(20),
            ..JammerConfig::default()
        };
        let mut occ = Occupancy::default();
        assert_eq!(jammer_step(9, &cfg, 5.0, &mut occ, 20.0), 0.0);
        assert_eq!(jammer_step(20, &cfg, 5.0, &mut occ, 20.0), 0.0);
        assert_eq!(occ.get(81).interferer_power, 0.0);
        assert_eq!(jammer_step(10, &cfg, 5.0, &mut occ, 20.0), 5.0);
        assert_eq!(occ.get(81).interferer_power, 5.0);
        assert!((occ.get(80).interferer_power - 0.05).abs() < 1e-12);
        assert!((occ.get(82).interferer_power - 0.05).abs() < 1e-12);
    }
}
