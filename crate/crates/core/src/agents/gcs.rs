use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::drone::{Command, FlightMode, MissionAction, MissionInstruction};
use crate::crtp::{encode_setpoint, CrtpPacket, Setpoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcsConfig {
    pub mode: FlightMode,
    pub command_period: u32,
    pub ack_timeout: u32,
    pub start: u64,
    /// Instructions in the mission script (autonomous mode only).
    pub mission_len: u16,
}

impl GcsConfig {
    pub fn new(mode: FlightMode) -> Self {
        GcsConfig {
            mode,
            command_period: 10,
            ack_timeout: 50,
            start: 0,
            mission_len: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcsLink {
    Connected,
    /// No ack for `ack_timeout` ticks. Commands stop, polling continues.
    Disconnected,
    /// Mission finished and acknowledged.
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcsEvent {
    LinkLost,
    MissionComplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcsFrame {
    pub packet: CrtpPacket,
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GcsStep {
    pub frame: Option<GcsFrame>,
    pub event: Option<GcsEvent>,
}

/// Mission script of `len` steps: take off, waypoints, land.
pub fn mission_instruction(index: u16, len: u16) -> MissionInstruction {
    let action = if index == 0 {
        MissionAction::Takeoff
    } else if index + 1 >= len {
        MissionAction::Land
    } else {
        MissionAction::GoTo
    };
    MissionInstruction { index, action }
}

/// Ground station controlling one drone.
///
/// Every tick it sends exactly one frame: a command on the command period,
/// otherwise an empty poll so the drone can ack.
#[derive(Debug, Clone)]
pub struct Gcs {
    config: GcsConfig,
    link: GcsLink,
    last_ack: u64,
    mission_next: u16,
    pilot: ChaCha8Rng,
    in_flight: Option<Command>,
}

impl Gcs {
    pub fn new(config: GcsConfig, pilot: ChaCha8Rng) -> Self {
        Gcs {
            config,
            link: GcsLink::Connected,
            last_ack: config.start,
            mission_next: 0,
            pilot,
            in_flight: None,
        }
    }

    pub fn config(&self) -> &GcsConfig {
        &self.config
    }

    pub fn link(&self) -> GcsLink {
        self.link
    }

    pub fn last_ack(&self) -> u64 {
        self.last_ack
    }

    pub fn mission_progress(&self) -> u16 {
        self.mission_next
    }

    fn pilot_setpoint(&mut self) -> Setpoint {
        Setpoint::new(
            self.pilot.random_range(-5.0f32..=5.0),
            self.pilot.random_range(-5.0f32..=5.0),
            0.0,
            self.pilot.random_range(35_000u16..=45_000),
        )
    }

    pub fn gcs_step(&mut self, tick: u64) -> GcsStep {
        let mut step = GcsStep::default();
        self.in_flight = None;
        if tick < self.config.start || self.link == GcsLink::Done {
            return step;
        }
        if self.link == GcsLink::Connected && tick - self.last_ack >= self.config.ack_timeout as u64
        {
            self.link = GcsLink::Disconnected;
            step.event = Some(GcsEvent::LinkLost);
        }
        let on_period =
            (tick - self.config.start).is_multiple_of(self.config.command_period.max(1) as u64);
        let command =
            (self.link == GcsLink::Connected && on_period).then(|| match self.config.mode {
                FlightMode::NonAutonomous => Command::Setpoint(self.pilot_setpoint()),
                FlightMode::Autonomous => Command::Mission(mission_instruction(
                    self.mission_next,
                    self.config.mission_len,
                )),
            });
        let packet = match command {
            Some(Command::Setpoint(s)) => encode_setpoint(&s),
            Some(Command::Mission(m)) => m.to_packet(),
            None => CrtpPacket::null(),
        };
        self.in_flight = command;
        step.frame = Some(GcsFrame { packet, command });
        step
    }

    /// Feeds back whether this tick's frame was acknowledged.
    pub fn on_outcome(&mut self, tick: u64, acked: bool) -> Option<GcsEvent> {
        let sent = self.in_flight.take();
        if !acked {
            return None;
        }
        self.last_ack = tick;
        if let Some(Command::Mission(m)) = sent {
            if m.index == self.mission_next {
                self.mission_next += 1;
                if m.action == MissionAction::Land {
                    self.link = GcsLink::Done;
                    return Some(GcsEvent::MissionComplete);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::entity_stream;

    fn gcs(mode: FlightMode) -> Gcs {
        Gcs::new(GcsConfig::new(mode), entity_stream(1, "gcs"))
    }

    #[test]
    fn eleven_setpoints_in_hundred_ticks() {
        let mut g = gcs(FlightMode::NonAutonomous);
        let mut commands = 0;
        for t in 0..=100 {
            let step = g.gcs_step(t);
            let frame = step.frame.unwrap();
            if frame.command.is_some() {
                commands += 1;
                assert_eq!(frame.packet.port, crate::crtp::PORT_COMMANDER);
            } else {
                assert!(frame.packet.is_null());
            }
            g.on_outcome(t, true);
        }
        assert_eq!(commands, 11);
        assert_eq!(g.link(), GcsLink::Connected);
    }

    #[test]
    fn link_lost_after_ack_timeout() {
        let mut g = gcs(FlightMode::NonAutonomous);
        let mut lost_at = None;
        for t in 0..200 {
            let step = g.gcs_step(t);
            if step.event == Some(GcsEvent::LinkLost) {
                assert!(lost_at.is_none());
                lost_at = Some(t);
            }
            assert!(step.frame.is_some());
            g.on_outcome(t, t < 20);
        }
        assert_eq!(lost_at, Some(19 + 50));
        assert_eq!(g.link(), GcsLink::Disconnected);
        let later = g.gcs_step(300);
        assert!(later.frame.unwrap().command.is_none());
    }

    #[test]
    fn mission_advances_on_ack_and_completes() {
        let mut g = Gcs::new(
            GcsConfig {
                mission_len: 3,
                ..GcsConfig::new(FlightMode::Autonomous)
            },
            entity_stream(1, "gcs"),
        );
        let mut seen = alloc::vec::Vec::new();
        let mut done = None;
        for t in 0..100 {
            let step = g.gcs_step(t);
            if let Some(Command::Mission(m)) = step.frame.as_ref().and_then(|f| f.command) {
                seen.push(m);
            }
            // drop the first copy of every instruction
            let acked = t % 20 != 0;
            if let Some(GcsEvent::MissionComplete) = g.on_outcome(t, acked) {
                done = Some(t);
            }
        }
        let actions: alloc::vec::Vec<_> = seen.iter().map(|m| (m.index, m.action)).collect();
        assert_eq!(
            actions,
            [
                (0, MissionAction::Takeoff),
                (0, MissionAction::Takeoff),
                (1, MissionAction::GoTo),
                (1, MissionAction::GoTo),
                (2, MissionAction::Land),
                (2, MissionAction::Land),
            ]
        );
        assert_eq!(done, Some(50));
        assert_eq!(g.link(), GcsLink::Done);
        assert_eq!(g.gcs_step(60), GcsStep::default());
    }

    #[test]
    fn silent_before_start() {
        let mut g = Gcs::new(
            GcsConfig {
                start: 30,
                ..GcsConfig::new(FlightMode::NonAutonomous)
            },
            entity_stream(1, "gcs"),
        );
        assert!(g.gcs_step(29).frame.is_none());
        assert!(g.gcs_step(30).frame.unwrap().command.is_some());
        g.on_outcome(30, false);
        for t in 31..80 {
            assert!(g.gcs_step(t).event.is_none());
        }
        assert_eq!(g.gcs_step(80).event, Some(GcsEvent::LinkLost));
    }
}
