use alloc::vec::Vec;
use core::fmt;

use super::drone::Command;
use super::scanner::{Discovery, Scanner};
use crate::crtp::{encode_setpoint, Address, CrtpPacket, Datarate, RadioUri, Setpoint};
use crate::medium::{AirFrame, AirFrameKind, TransceiverId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HijackPhase {
    Scan,
    JamCw,
    Connect,
    Control,
}

impl HijackPhase {
    pub fn as_str(&self) -> &'static str {
        match self {
            HijackPhase::Scan => "Scan",
            HijackPhase::JamCw => "JamCW",
            HijackPhase::Connect => "Connect",
            HijackPhase::Control => "Control",
        }
    }
}

impl fmt::Display for HijackPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HijackerConfig {
    /// Identity the attacker's radio presents when it takes over.
    pub identity: Address,
    pub start: u64,
    pub datarates: Vec<Datarate>,
    pub dwell: u32,
    /// Only this address is attacked; otherwise the first discovery.
    pub target: Option<Address>,
    /// Addresses to ping on every scan cell, to wake up silent receivers.
    pub probes: Vec<Address>,
    pub cw_power_db: f64,
    pub command_period: u32,
    /// Silence on the victim link, in ticks, before it is declared lost.
    pub ack_timeout: u32,
    pub setpoint: Setpoint,
}

impl HijackerConfig {
    pub fn new(identity: Address) -> Self {
        HijackerConfig {
            identity,
            start: 0,
            datarates: Datarate::ALL.to_vec(),
            dwell: 2,
            target: None,
            probes: Vec::new(),
            cw_power_db: 10.0,
            command_period: 10,
            ack_timeout: 50,
            setpoint: Setpoint::new(0.0, 10.0, 0.0, 36000),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HijackerState {
    pub phase: HijackPhase,
    pub target: Option<Discovery>,
    pub scanner: Option<Scanner>,
    pub phase_since: u64,
    /// Last tick the victim link was heard.
    pub victim_heard: u64,
    pub next_command: u64,
    /// A command of ours was obeyed since the previous step.
    pub obeyed: bool,
}

impl Default for HijackerState {
    fn default() -> Self {
        HijackerState {
            phase: HijackPhase::Scan,
            target: None,
            scanner: None,
            phase_since: 0,
            victim_heard: 0,
            next_command: 0,
            obeyed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HijackAction {
    /// Point the attacker's radio at a link.
    Tune(RadioUri),
    /// Single-tone interferer for this tick.
    Cw {
        channel: u8,
        power_db: f64,
    },
    Transmit {
        to: Address,
        packet: CrtpPacket,
        command: Option<Command>,
    },
    TargetSelected(Discovery),
    NoTargetFound,
    Phase {
        from: HijackPhase,
        to: HijackPhase,
    },
}

fn target_uri(d: &Discovery) -> RadioUri {
    RadioUri {
        channel: d.channel,
        datarate: d.datarate,
        address: d.address,
        ..RadioUri::default()
    }
}

/// Advances the attack by one tick: sniff the band, knock the victim's
/// link down with a CW tone, then take over under the attacker's identity.
pub fn hijacker_transition(
    state: &HijackerState,
    cfg: &HijackerConfig,
    tick: u64,
) -> (HijackerState, Vec<HijackAction>) {
    let mut s = state.clone();
    let mut actions = Vec::new();
    if tick < cfg.start {
        return (s, actions);
    }

    if s.phase == HijackPhase::Scan {
        let scanner = s
            .scanner
            .get_or_insert_with(|| Scanner::new(&cfg.datarates, cfg.dwell, tick));
        if scanner.is_done(tick) {
            let pick = scanner
                .discoveries()
                .into_iter()
                .find(|d| cfg.target.is_none_or(|t| t == d.address));
            match pick {
                None => {
                    actions.push(HijackAction::NoTargetFound);
                    scanner.restart(tick);
                }
                Some(d) => {
                    actions.push(HijackAction::TargetSelected(d));
                    actions.push(HijackAction::Tune(target_uri(&d)));
                    s.target = Some(d);
                    s.scanner = None;
                    let next = if d.link_active {
                        HijackPhase::JamCw
                    } else {
                        HijackPhase::Connect
                    };
                    enter(&mut s, &mut actions, next, tick);
                    s.victim_heard = tick;
                    s.next_command = tick;
                }
            }
        }
        if let Some(scanner) = &s.scanner {
            if let Some((channel, datarate)) = scanner.cell_at(tick) {
                let mut uri = RadioUri {
                    channel,
                    datarate,
                    ..RadioUri::default()
                };
                if let Some(&first) = cfg.probes.first() {
                    uri.address = first;
                }
                actions.push(HijackAction::Tune(uri));
                if scanner.is_cell_start(tick) {
                    for &to in &cfg.probes {
                        actions.push(HijackAction::Transmit {
                            to,
                            packet: CrtpPacket::null(),
                            command: None,
                        });
                    }
                }
            }
        }
    }

    if s.phase == HijackPhase::JamCw {
        if tick - s.victim_heard >= cfg.ack_timeout as u64 {
            enter(&mut s, &mut actions, HijackPhase::Connect, tick);
            s.next_command = tick;
        } else if let Some(t) = &s.target {
            actions.push(HijackAction::Cw {
                channel: t.channel,
                power_db: cfg.cw_power_db,
            });
        }
    }

    if s.phase == HijackPhase::Connect && s.obeyed {
        enter(&mut s, &mut actions, HijackPhase::Control, tick);
    }
    s.obeyed = false;

    if matches!(s.phase, HijackPhase::Connect | HijackPhase::Control) && tick >= s.next_command {
        if let Some(t) = &s.target {
            actions.push(HijackAction::Transmit {
                to: t.address,
                packet: encode_setpoint(&cfg.setpoint),
                command: Some(Command::Setpoint(cfg.setpoint)),
            });
            s.next_command = tick + cfg.command_period.max(1) as u64;
        }
    }
    (s, actions)
}

fn enter(s: &mut HijackerState, actions: &mut Vec<HijackAction>, to: HijackPhase, tick: u64) {
    actions.push(HijackAction::Phase { from: s.phase, to });
    s.phase = to;
    s.phase_since = tick;
}

impl HijackerState {
    /// Feeds the frames decoded this tick on the attacker's tuned link.
    pub fn observe(&mut self, tick: u64, frames: &[AirFrame], own: TransceiverId) {
        match self.phase {
            HijackPhase::Scan => {
                if let Some(scanner) = &mut self.scanner {
                    scanner.observe(tick, frames, Some(own));
                }
            }
            HijackPhase::JamCw => {
                let Some(t) = self.target else { return };
                let heard = frames.iter().any(|f| {
                    f.channel == t.channel
                        && f.datarate == t.datarate
                        && f.address == t.address
                        && !matches!(f.kind, AirFrameKind::Data { sender } if sender == own)
                });
                if heard {
                    self.victim_heard = tick;
                }
            }
            HijackPhase::Connect | HijackPhase::Control => {}
        }
    }

    /// Result of one of our command frames: acked, and acted upon.
    pub fn on_outcome(&mut self, accepted: bool) {
        self.obeyed |= accepted;
    }
}
