//! Shared 2.4 GHz medium: channel plan, per-channel interference and
//! SNR-driven acknowledged delivery between registered transceivers.
//!
//! Powers are linear and relative to a reference transmitter at 0 dB.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use thiserror::Error;

use crate::crtp::{Address, CodecError, CrtpPacket, Datarate, RadioUri, MAX_RADIO_CHANNEL};
use crate::phy::{db_to_power, power_to_db};

pub const CHANNEL_COUNT: usize = MAX_RADIO_CHANNEL as usize + 1;
pub const BASE_FREQUENCY_MHZ: u32 = 2400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MediumError {
    #[error("radio channel {0} is out of range 0..=125")]
    ChannelOutOfRange(u32),
    #[error("transceivers are on different channels ({0} vs {1})")]
    ChannelMismatch(u8, u8),
    #[error("transceiver {0:?} is not registered")]
    NotRegistered(TransceiverId),
    #[error("another receiver already listens on {0}")]
    DuplicateListener(RadioUri),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Centre frequency of a radio channel in MHz.
pub fn channel_to_frequency(channel: u8) -> Result<u32, MediumError> {
    if channel > MAX_RADIO_CHANNEL {
        return Err(MediumError::ChannelOutOfRange(channel as u32));
    }
    Ok(BASE_FREQUENCY_MHZ + channel as u32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// SNR of a 0 dB transmitter on a quiet channel; fixes the noise floor.
    pub clear_snr_db: f64,
    pub theta_low_db: f64,
    pub theta_high_db: f64,
    /// Capacity of each link's recent-outcome ring.
    pub stats_window: usize,
    /// How far below the jammed channel a Gaussian jammer lands on its
    /// immediate neighbours.
    pub adjacent_rejection_db: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        MediumParams {
            clear_snr_db: 30.0,
            theta_low_db: 5.0,
            theta_high_db: 15.0,
            stats_window: 100,
            adjacent_rejection_db: 20.0,
        }
    }
}

impl MediumParams {
    pub fn noise_floor(&self) -> f64 {
        db_to_power(-self.clear_snr_db)
    }
}

/// Packet delivery ratio as a piecewise-linear function of SNR.
pub fn pdr_from_snr(snr_db: f64, params: &MediumParams) -> f64 {
    if snr_db >= params.theta_high_db {
        1.0
    } else if snr_db <= params.theta_low_db {
        0.0
    } else {
        (snr_db - params.theta_low_db) / (params.theta_high_db - params.theta_low_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransceiverId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Gcs,
    Drone,
    Attacker,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transceiver {
    pub id: TransceiverId,
    pub uri: RadioUri,
    pub tx_power_db: f64,
    pub role: Role,
}

impl Transceiver {
    pub fn signal_power(&self) -> f64 {
        db_to_power(self.tx_power_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InterfererKinds {
    pub gaussian: bool,
    pub cw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfererKind {
    Gaussian,
    Cw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOccupancy {
    pub channel: u8,
    pub interferer_power: f64,
    pub kinds: InterfererKinds,
}

impl ChannelOccupancy {
    pub fn quiet(channel: u8) -> Self {
        ChannelOccupancy {
            channel,
            interferer_power: 0.0,
            kinds: InterfererKinds::default(),
        }
    }
}

/// Interference on every channel for the current tick.
#[derive(Debug, Clone)]
pub struct Occupancy {
    channels: Vec<ChannelOccupancy>,
}

impl Default for Occupancy {
    fn default() -> Self {
        Occupancy {
            channels: (0..CHANNEL_COUNT as u8)
                .map(ChannelOccupancy::quiet)
                .collect(),
        }
    }
}

impl Occupancy {
    pub fn clear(&mut self) {
        for c in &mut self.channels {
            *c = ChannelOccupancy::quiet(c.channel);
        }
    }

    pub fn get(&self, channel: u8) -> &ChannelOccupancy {
        &self.channels[channel as usize]
    }

    pub fn add(&mut self, channel: u8, power: f64, kind: InterfererKind) {
        let Some(c) = self.channels.get_mut(channel as usize) else {
            return;
        };
        if power <= 0.0 {
            return;
        }
        c.interferer_power += power;
        match kind {
            InterfererKind::Gaussian => c.kinds.gaussian = true,
            InterfererKind::Cw => c.kinds.cw = true,
        }
    }

    /// Wideband noise: full power on `channel`, attenuated on both neighbours.
    pub fn add_gaussian(&mut self, channel: u8, power: f64, adjacent_rejection_db: f64) {
        self.add(channel, power, InterfererKind::Gaussian);
        let spill = power * db_to_power(-adjacent_rejection_db);
        if channel > 0 {
            self.add(channel - 1, spill, InterfererKind::Gaussian);
        }
        if channel < MAX_RADIO_CHANNEL {
            self.add(channel + 1, spill, InterfererKind::Gaussian);
        }
    }

    pub fn add_cw(&mut self, channel: u8, power: f64) {
        self.add(channel, power, InterfererKind::Cw);
    }
}

/// `10 log10(S / (N + I))` for a frame from `tx` heard by `rx`.
pub fn effective_snr(
    tx: &Transceiver,
    rx: &Transceiver,
    occupancy: &ChannelOccupancy,
    params: &MediumParams,
) -> Result<f64, MediumError> {
    if tx.uri.channel != rx.uri.channel {
        return Err(MediumError::ChannelMismatch(tx.uri.channel, rx.uri.channel));
    }
    if occupancy.channel != tx.uri.channel {
        return Err(MediumError::ChannelMismatch(
            tx.uri.channel,
            occupancy.channel,
        ));
    }
    let noise = params.noise_floor() + occupancy.interferer_power;
    Ok(power_to_db(tx.signal_power() / noise))
}

/// Delivery counters plus a ring of the most recent outcomes
/// (`true` = delivered and acknowledged).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    pub frames_sent: u64,
    pub frames_acked: u64,
    recent: VecDeque<bool>,
    capacity: usize,
    pub last_snr: Option<f64>,
}

impl LinkStats {
    pub fn new(capacity: usize) -> Self {
        LinkStats {
            frames_sent: 0,
            frames_acked: 0,
            recent: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            last_snr: None,
        }
    }

    pub fn record(&mut self, acked: bool, snr: Option<f64>) {
        self.frames_sent += 1;
        if acked {
            self.frames_acked += 1;
        }
        if self.recent.len() == self.capacity {
            self.recent.pop_front();
        }
        self.recent.push_back(acked);
        if snr.is_some() {
            self.last_snr = snr;
        }
    }

    pub fn frames_lost(&self) -> u64 {
        self.frames_sent - self.frames_acked
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn pdr(&self) -> Option<f64> {
        (self.frames_sent > 0).then(|| self.frames_acked as f64 / self.frames_sent as f64)
    }

    /// `(attempted, lost)` over the last `window` outcomes.
    pub fn recent(&self, window: usize) -> (usize, usize) {
        let take = window.min(self.recent.len());
        let lost = self
            .recent
            .iter()
            .rev()
            .take(take)
            .filter(|&&ok| !ok)
            .count();
        (take, lost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AirFrameKind {
    Data { sender: TransceiverId },
    Ack { responder: TransceiverId },
}

/// A frame a promiscuous receiver tuned to `(channel, datarate)` can decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AirFrame {
    pub channel: u8,
    pub datarate: Datarate,
    pub address: Address,
    pub payload_len: usize,
    pub kind: AirFrameKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossReason {
    NoReceiver,
    Interference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeliveryOutcome {
    Delivered {
        receiver: TransceiverId,
        snr_db: f64,
    },
    Lost {
        reason: LossReason,
        snr_db: Option<f64>,
    },
}

impl DeliveryOutcome {
    pub fn is_delivered(&self) -> bool {
        matches!(self, DeliveryOutcome::Delivered { .. })
    }

    pub fn snr_db(&self) -> Option<f64> {
        match *self {
            DeliveryOutcome::Delivered { snr_db, .. } => Some(snr_db),
            DeliveryOutcome::Lost { snr_db, .. } => snr_db,
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    transceiver: Transceiver,
    listening: bool,
    stats: LinkStats,
}

/// Registry of transceivers sharing the air.
///
/// Drones are receivers: they listen on their URI and acknowledge frames
/// addressed to it. At most one listener may occupy a given
/// `(channel, datarate, address)`.
#[derive(Debug, Clone)]
pub struct Medium {
    params: MediumParams,
    slots: Vec<Slot>,
    air: Vec<AirFrame>,
}

impl Medium {
    pub fn new(params: MediumParams) -> Self {
        Medium {
            params,
            slots: Vec::new(),
            air: Vec::new(),
        }
    }

    pub fn params(&self) -> &MediumParams {
        &self.params
    }

    pub fn register(
        &mut self,
        uri: RadioUri,
        tx_power_db: f64,
        role: Role,
    ) -> Result<TransceiverId, MediumError> {
        let listening = role == Role::Drone;
        if listening && self.listener_at(&uri).is_some() {
            return Err(MediumError::DuplicateListener(uri));
        }
        let id = TransceiverId(self.slots.len() as u32);
        self.slots.push(Slot {
            transceiver: Transceiver {
                id,
                uri,
                tx_power_db,
                role,
            },
            listening,
            stats: LinkStats::new(self.params.stats_window),
        });
        Ok(id)
    }

    fn slot(&self, id: TransceiverId) -> Result<&Slot, MediumError> {
        self.slots
            .get(id.0 as usize)
            .ok_or(MediumError::NotRegistered(id))
    }

    fn slot_mut(&mut self, id: TransceiverId) -> Result<&mut Slot, MediumError> {
        self.slots
            .get_mut(id.0 as usize)
            .ok_or(MediumError::NotRegistered(id))
    }

    pub fn transceiver(&self, id: TransceiverId) -> Result<&Transceiver, MediumError> {
        Ok(&self.slot(id)?.transceiver)
    }

    pub fn stats(&self, id: TransceiverId) -> Result<&LinkStats, MediumError> {
        Ok(&self.slot(id)?.stats)
    }

    fn listener_at(&self, uri: &RadioUri) -> Option<TransceiverId> {
        self.slots
            .iter()
            .find(|s| {
                s.listening
                    && s.transceiver.uri.channel == uri.channel
                    && s.transceiver.uri.datarate == uri.datarate
                    && s.transceiver.uri.address == uri.address
            })
            .map(|s| s.transceiver.id)
    }

    /// Moves a transceiver to another channel.
    pub fn retune(&mut self, id: TransceiverId, channel: u8) -> Result<(), MediumError> {
        if channel > MAX_RADIO_CHANNEL {
            return Err(MediumError::ChannelOutOfRange(channel as u32));
        }
        let slot = self.slot(id)?;
        let mut uri = slot.transceiver.uri;
        uri.channel = channel;
        if slot.listening {
            if let Some(other) = self.listener_at(&uri) {
                if other != id {
                    return Err(MediumError::DuplicateListener(uri));
                }
            }
        }
        self.slot_mut(id)?.transceiver.uri = uri;
        Ok(())
    }

    /// Points a transmitter at another link (channel, datarate and address).
    pub fn retarget(&mut self, id: TransceiverId, uri: RadioUri) -> Result<(), MediumError> {
        let slot = self.slot_mut(id)?;
        if slot.listening {
            return Err(MediumError::DuplicateListener(uri));
        }
        slot.transceiver.uri = uri;
        Ok(())
    }

    /// A silenced receiver no longer acknowledges anything.
    pub fn silence(&mut self, id: TransceiverId) -> Result<(), MediumError> {
        self.slot_mut(id)?.listening = false;
        Ok(())
    }

    /// Sends `packet` from `from` to whichever receiver listens on `to` at
    /// the sender's channel and datarate. The frame is delivered and
    /// acknowledged iff such a receiver exists and `draw < pdr(snr)`.
    pub fn transmit_frame(
        &mut self,
        from: TransceiverId,
        to: Address,
        packet: &CrtpPacket,
        occupancy: &Occupancy,
        draw: f64,
    ) -> Result<DeliveryOutcome, MediumError> {
        packet.validate()?;
        let sender = self.slot(from)?.transceiver.clone();
        let mut target = sender.uri;
        target.address = to;

        let outcome = match self.listener_at(&target) {
            None => DeliveryOutcome::Lost {
                reason: LossReason::NoReceiver,
                snr_db: None,
            },
            Some(rx_id) => {
                let rx = &self.slot(rx_id)?.transceiver;
                let snr =
                    effective_snr(&sender, rx, occupancy.get(sender.uri.channel), &self.params)?;
                if draw < pdr_from_snr(snr, &self.params) {
                    DeliveryOutcome::Delivered {
                        receiver: rx_id,
                        snr_db: snr,
                    }
                } else {
                    DeliveryOutcome::Lost {
                        reason: LossReason::Interference,
                        snr_db: Some(snr),
                    }
                }
            }
        };

        let snr = outcome.snr_db();
        self.slot_mut(from)?
            .stats
            .record(outcome.is_delivered(), snr);
        if let DeliveryOutcome::Delivered { receiver, .. } = outcome {
            self.slot_mut(receiver)?.stats.record(true, snr);
            let base = AirFrame {
                channel: sender.uri.channel,
                datarate: sender.uri.datarate,
                address: to,
                payload_len: packet.payload.len(),
                kind: AirFrameKind::Data { sender: from },
            };
            self.air.push(base);
            self.air.push(AirFrame {
                payload_len: 0,
                kind: AirFrameKind::Ack {
                    responder: receiver,
                },
                ..base
            });
        }
        Ok(outcome)
    }

    /// Frames decoded on the air since the last call.
    pub fn take_air(&mut self) -> Vec<AirFrame> {
        core::mem::take(&mut self.air)
    }
}
