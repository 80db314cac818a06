//! Mitigations: synchronized channel hopping, failsafe landing and
//! PER-threshold jam detection.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agents::{DroneState, DroneStatus};
use crate::crtp::MAX_RADIO_CHANNEL;
use crate::medium::LinkStats;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HopError {
    #[error("hop set needs at least two channels")]
    TooFewChannels,
    #[error("hop channel {0} is out of range 0..=125")]
    ChannelOutOfRange(u8),
    #[error("hop channel {0} is listed twice")]
    DuplicateChannel(u8),
    #[error("epoch length must be at least one tick")]
    ZeroEpoch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopSchedule {
    hop_set: Vec<u8>,
    epoch_length: u32,
    seed: u64,
}

impl HopSchedule {
    pub fn new(hop_set: Vec<u8>, epoch_length: u32, seed: u64) -> Result<Self, HopError> {
        if hop_set.len() < 2 {
            return Err(HopError::TooFewChannels);
        }
        for (i, &ch) in hop_set.iter().enumerate() {
            if ch > MAX_RADIO_CHANNEL {
                return Err(HopError::ChannelOutOfRange(ch));
            }
            if hop_set[..i].contains(&ch) {
                return Err(HopError::DuplicateChannel(ch));
            }
        }
        if epoch_length == 0 {
            return Err(HopError::ZeroEpoch);
        }
        Ok(HopSchedule {
            hop_set,
            epoch_length,
            seed,
        })
    }

    pub fn hop_set(&self) -> &[u8] {
        &self.hop_set
    }

    pub fn epoch_length(&self) -> u32 {
        self.epoch_length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn epoch_at(&self, tick: u64) -> u64 {
        tick / self.epoch_length as u64
    }
}

/// Channel for `epoch`, a pure function of `(seed, epoch)`.
///
/// Epochs are grouped in cycles of `|hop_set|`; each cycle visits every
/// channel once in an order shuffled by ChaCha8 (stream = cycle number).
pub fn next_hop_channel(schedule: &HopSchedule, epoch: u64) -> u8 {
    let n = schedule.hop_set.len() as u64;
    let cycle = epoch / n;
    let pos = (epoch % n) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    rng.set_stream(cycle);
    let mut order = schedule.hop_set.clone();
    order.shuffle(&mut rng);
    order[pos]
}

/// Failsafe reaction to a lost link: land instead of falling or hovering.
/// Drones without safe mode, or not airborne on the link, are unchanged.
pub fn safe_mode_policy(state: &DroneState, link_lost: bool) -> DroneState {
    if !state.safe_mode || !link_lost || !state.status.is_linked_flight() {
        return *state;
    }
    DroneState {
        status: DroneStatus::Landing,
        landing_ticks: 0,
        ..*state
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub window: usize,
    pub threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window: 100,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JamAlert {
    pub tick: u64,
    pub per: f64,
    pub window: usize,
}

/// Alert when the packet error ratio over the last `window` outcomes reaches
/// `threshold`, once at least `window` frames have been attempted.
pub fn detect_jamming(
    stats: &LinkStats,
    window: usize,
    threshold: f64,
    tick: u64,
) -> Option<JamAlert> {
    if window == 0 {
        return None;
    }
    let (attempted, lost) = stats.recent(window);
    if attempted < window {
        return None;
    }
    let per = lost as f64 / attempted as f64;
    (per >= threshold).then_some(JamAlert { tick, per, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::FlightMode;
    use crate::crtp::Address;
    use proptest::prelude::*;

    fn sixteen() -> HopSchedule {
        HopSchedule::new((0..16).map(|i| 6 + 5 * i).collect(), 10, 1234).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert_eq!(
            HopSchedule::new(alloc::vec![5], 10, 0),
            Err(HopError::TooFewChannels)
        );
        assert_eq!(
            HopSchedule::new(alloc::vec![5, 126], 10, 0),
            Err(HopError::ChannelOutOfRange(126))
        );
        assert_eq!(
            HopSchedule::new(alloc::vec![5, 6, 5], 10, 0),
            Err(HopError::DuplicateChannel(5))
        );
        assert_eq!(
            HopSchedule::new(alloc::vec![5, 6], 0, 0),
            Err(HopError::ZeroEpoch)
        );
    }

    #[test]
    fn hop_frequencies_are_uniform() {
        let s = sixteen();
        let mut counts = [0u32; 126];
        for epoch in 0..16_000 {
            counts[next_hop_channel(&s, epoch) as usize] += 1;
        }
        for &ch in s.hop_set() {
            let share = counts[ch as usize] as f64 / 16_000.0;
            assert!((share - 0.0625).abs() <= 0.01, "ch {ch}: {share}");
        }
        assert_eq!(counts.iter().sum::<u32>(), 16_000);
    }

    #[test]
    fn hop_order_is_not_trivial() {
        let s = sixteen();
        let first: Vec<u8> = (0..16).map(|e| next_hop_channel(&s, e)).collect();
        let second: Vec<u8> = (16..32).map(|e| next_hop_channel(&s, e)).collect();
        assert_ne!(first, s.hop_set());
        assert_ne!(first, second);
    }

    proptest! {
        #[test]
        fn both_ends_agree(seed in any::<u64>(), epoch in any::<u64>()) {
            let gcs = HopSchedule::new(alloc::vec![10, 20, 30, 40], 10, seed).unwrap();
            let drone = gcs.clone();
            prop_assert_eq!(next_hop_channel(&gcs, epoch), next_hop_channel(&drone, epoch));
            prop_assert!(gcs.hop_set().contains(&next_hop_channel(&gcs, epoch)));
        }

        #[test]
        fn detection_is_monotone_in_losses(history in proptest::collection::vec(any::<bool>(), 0..300), extra in 1usize..50) {
            let mut stats = LinkStats::new(100);
            for ok in history {
                stats.record(ok, None);
            }
            let before = detect_jamming(&stats, 100, 0.5, 0).is_some();
            for _ in 0..extra {
                stats.record(false, None);
                let now = detect_jamming(&stats, 100, 0.5, 0).is_some();
                prop_assert!(!before || now);
            }
        }
    }

    #[test]
    fn detector_examples() {
        let mut stats = LinkStats::new(100);
        for _ in 0..100 {
            stats.record(false, None);
        }
        let alert = detect_jamming(&stats, 100, 0.5, 7).unwrap();
        assert_eq!(alert.per, 1.0);
        assert_eq!(alert.tick, 7);

        let mut clean = LinkStats::new(100);
        for _ in 0..500 {
            clean.record(true, None);
        }
        assert_eq!(detect_jamming(&clean, 100, 0.5, 0), None);

        let mut short = LinkStats::new(100);
        for _ in 0..99 {
            short.record(false, None);
        }
        assert_eq!(detect_jamming(&short, 100, 0.5, 0), None);
    }

    #[test]
    fn safe_mode_policy_cases() {
        let owner = Address::DEFAULT;
        let s = DroneState::flying(FlightMode::Autonomous, owner, true);
        assert_eq!(safe_mode_policy(&s, false), s);
        assert_eq!(safe_mode_policy(&s, true).status, DroneStatus::Landing);
        let landed = DroneState {
            status: DroneStatus::Landed,
            ..s
        };
        assert_eq!(safe_mode_policy(&landed, true), landed);
        let suspended = DroneState {
            status: DroneStatus::Suspended,
            ..s
        };
        assert_eq!(
            safe_mode_policy(&suspended, true).status,
            DroneStatus::Landing
        );
        let off = DroneState {
            safe_mode: false,
            ..s
        };
        assert_eq!(safe_mode_policy(&off, true), off);
    }
}
