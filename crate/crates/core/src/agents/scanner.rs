use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::crtp::{Address, Datarate, MAX_RADIO_CHANNEL};
use crate::medium::{AirFrame, AirFrameKind, TransceiverId, CHANNEL_COUNT};

/// A link seen by the sniffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discovery {
    pub address: Address,
    pub channel: u8,
    pub datarate: Datarate,
    pub packets_seen: u32,
    /// Largest payload observed on the link.
    pub payload_len: usize,
    /// Someone other than the scanner was talking on the link.
    pub link_active: bool,
}

/// Promiscuous sweep over every `(channel, datarate)` cell, channel-major,
/// `dwell` ticks per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Scanner {
    rates: Vec<Datarate>,
    dwell: u32,
    started: u64,
    found: BTreeMap<(u8, Address, Datarate), Discovery>,
}

impl Scanner {
    pub fn new(datarates: &[Datarate], dwell: u32, started: u64) -> Self {
        let mut rates: Vec<Datarate> = Datarate::ALL
            .into_iter()
            .filter(|r| datarates.contains(r))
            .collect();
        rates.dedup();
        Scanner {
            rates,
            dwell: dwell.max(1),
            started,
            found: BTreeMap::new(),
        }
    }

    pub fn datarates(&self) -> &[Datarate] {
        &self.rates
    }

    pub fn dwell(&self) -> u32 {
        self.dwell
    }

    pub fn cell_count(&self) -> usize {
        CHANNEL_COUNT * self.rates.len()
    }

    pub fn sweep_ticks(&self) -> u64 {
        self.cell_count() as u64 * self.dwell as u64
    }

    pub fn started(&self) -> u64 {
        self.started
    }

    /// Cell under the receiver at `tick`, or `None` outside the sweep.
    pub fn cell_at(&self, tick: u64) -> Option<(u8, Datarate)> {
        if tick < self.started || self.rates.is_empty() {
            return None;
        }
        let i = ((tick - self.started) / self.dwell as u64) as usize;
        if i >= self.cell_count() {
            return None;
        }
        let n = self.rates.len();
        Some(((i / n) as u8, self.rates[i % n]))
    }

    /// First tick of a dwell, when probes go out.
    pub fn is_cell_start(&self, tick: u64) -> bool {
        self.cell_at(tick).is_some() && (tick - self.started).is_multiple_of(self.dwell as u64)
    }

    pub fn is_done(&self, tick: u64) -> bool {
        tick >= self.started + self.sweep_ticks()
    }

    /// Records the frames decodable on the current cell. The scanner's own
    /// transmissions are not discoveries, but replies to them are.
    pub fn observe(&mut self, tick: u64, frames: &[AirFrame], own: Option<TransceiverId>) {
        let Some((channel, datarate)) = self.cell_at(tick) else {
            return;
        };
        debug_assert!(channel <= MAX_RADIO_CHANNEL);
        for f in frames {
            if f.channel != channel || f.datarate != datarate {
                continue;
            }
            let foreign_data = match f.kind {
                AirFrameKind::Data { sender } if Some(sender) == own => continue,
                AirFrameKind::Data { .. } => true,
                AirFrameKind::Ack { .. } => false,
            };
            let d = self
                .found
                .entry((channel, f.address, datarate))
                .or_insert(Discovery {
                    address: f.address,
                    channel,
                    datarate,
                    packets_seen: 0,
                    payload_len: 0,
                    link_active: false,
                });
            d.packets_seen += 1;
            d.payload_len = d.payload_len.max(f.payload_len);
            d.link_active |= foreign_data;
        }
    }

    /// Discoveries ordered by channel, then address.
    pub fn discoveries(&self) -> Vec<Discovery> {
        self.found.values().copied().collect()
    }

    /// Starts a fresh sweep, forgetting earlier discoveries.
    pub fn restart(&mut self, tick: u64) {
        self.started = tick;
        self.found.clear();
    }
}

/// Something a scanner can listen to, one tick at a time.
pub trait Airspace {
    fn now(&self) -> u64;
    /// Runs one tick and returns every frame decoded on the air.
    fn advance(&mut self) -> Vec<AirFrame>;
}

/// Sweeps every channel at each of `datarates`, `dwell` ticks per cell.
pub fn scan_all<A: Airspace + ?Sized>(
    air: &mut A,
    datarates: &[Datarate],
    dwell: u32,
) -> Vec<Discovery> {
    let mut scanner = Scanner::new(datarates, dwell, air.now());
    while !scanner.is_done(air.now()) {
        let tick = air.now();
        let frames = air.advance();
        scanner.observe(tick, &frames, None);
    }
    scanner.discoveries()
}
