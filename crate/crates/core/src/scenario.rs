//! Declarative description of a run: medium, roster and defenses.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::agents::{FlightMode, HijackerConfig, JammerConfig};
use crate::crtp::{RadioUri, MAX_RADIO_CHANNEL};
use crate::defense::{DetectorConfig, HopSchedule};
use crate::medium::MediumParams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {field}: {reason}")]
pub struct ValidationError {
    pub field: &'static str,
    pub reason: String,
}

impl ValidationError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ValidationError {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialStatus {
    Flying,
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroneSpec {
    pub id: String,
    pub uri: RadioUri,
    pub mode: FlightMode,
    pub initial: InitialStatus,
    pub safe_mode: bool,
    pub loss_timeout: u32,
    pub land_duration: u32,
}

impl DroneSpec {
    pub fn new(id: impl Into<String>, uri: RadioUri, mode: FlightMode) -> Self {
        DroneSpec {
            id: id.into(),
            uri,
            mode,
            initial: InitialStatus::Flying,
            safe_mode: false,
            loss_timeout: 200,
            land_duration: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcsSpec {
    pub id: String,
    /// Id of the drone this station flies.
    pub drone: String,
    pub tx_power_db: f64,
    pub command_period: u32,
    pub ack_timeout: u32,
    pub mission_len: u16,
    pub start: u64,
}

impl GcsSpec {
    pub fn new(id: impl Into<String>, drone: impl Into<String>) -> Self {
        GcsSpec {
            id: id.into(),
            drone: drone.into(),
            tx_power_db: 0.0,
            command_period: 10,
            ack_timeout: 50,
            mission_len: 10,
            start: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerSpec {
    pub id: String,
    pub config: JammerConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HijackerSpec {
    pub id: String,
    pub tx_power_db: f64,
    pub config: HijackerConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    Drone(DroneSpec),
    Gcs(GcsSpec),
    Jammer(JammerSpec),
    Hijacker(HijackerSpec),
}

impl AgentSpec {
    pub fn id(&self) -> &str {
        match self {
            AgentSpec::Drone(d) => &d.id,
            AgentSpec::Gcs(g) => &g.id,
            AgentSpec::Jammer(j) => &j.id,
            AgentSpec::Hijacker(h) => &h.id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefenseSpec {
    pub hopping: Option<HopSchedule>,
    pub detector: Option<DetectorConfig>,
    /// Forces safe mode on every drone.
    pub safe_mode: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub duration: u64,
    pub tick_rate: u32,
    pub seed: u64,
    pub medium: MediumParams,
    /// Agents in stepping order.
    pub roster: Vec<AgentSpec>,
    pub defense: DefenseSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            duration: 1000,
            tick_rate: 100,
            seed: 1,
            medium: MediumParams::default(),
            roster: Vec::new(),
            defense: DefenseSpec::default(),
        }
    }
}

impl Scenario {
    pub fn drones(&self) -> impl Iterator<Item = &DroneSpec> {
        self.roster.iter().filter_map(|a| match a {
            AgentSpec::Drone(d) => Some(d),
            _ => None,
        })
    }

    pub fn stations(&self) -> impl Iterator<Item = &GcsSpec> {
        self.roster.iter().filter_map(|a| match a {
            AgentSpec::Gcs(g) => Some(g),
            _ => None,
        })
    }

    pub fn jammers(&self) -> impl Iterator<Item = &JammerSpec> {
        self.roster.iter().filter_map(|a| match a {
            AgentSpec::Jammer(j) => Some(j),
            _ => None,
        })
    }

    pub fn hijackers(&self) -> impl Iterator<Item = &HijackerSpec> {
        self.roster.iter().filter_map(|a| match a {
            AgentSpec::Hijacker(h) => Some(h),
            _ => None,
        })
    }

    pub fn drone(&self, id: &str) -> Option<&DroneSpec> {
        self.drones().find(|d| d.id == id)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.duration == 0 {
            return Err(ValidationError::new("duration", "must be at least 1 tick"));
        }
        if self.tick_rate == 0 {
            return Err(ValidationError::new("tick_rate", "must be positive"));
        }
        let m = &self.medium;
        if !(m.theta_high_db > m.theta_low_db) {
            return Err(ValidationError::new(
                "theta_high_db",
                "must exceed theta_low_db",
            ));
        }
        if m.stats_window == 0 {
            return Err(ValidationError::new("stats_window", "must be positive"));
        }

        for (i, a) in self.roster.iter().enumerate() {
            if a.id().is_empty() {
                return Err(ValidationError::new("id", "must not be empty"));
            }
            if self.roster[..i].iter().any(|b| b.id() == a.id()) {
                return Err(ValidationError::new(
                    "id",
                    alloc::format!("`{}` is used twice", a.id()),
                ));
            }
        }

        let drones: Vec<&DroneSpec> = self.drones().collect();
        for (i, d) in drones.iter().enumerate() {
            if d.uri.channel > MAX_RADIO_CHANNEL {
                return Err(ValidationError::new(
                    "channel",
                    alloc::format!("{} is outside 0..=125", d.uri.channel),
                ));
            }
            let clash = drones[..i].iter().any(|o| {
                o.uri.channel == d.uri.channel
                    && o.uri.datarate == d.uri.datarate
                    && o.uri.address == d.uri.address
            });
            if clash {
                return Err(ValidationError::new(
                    "uri",
                    alloc::format!("drone `{}` shares its link with another drone", d.id),
                ));
            }
        }

        let mut controlled: Vec<&str> = Vec::new();
        for g in self.stations() {
            let Some(d) = self.drone(&g.drone) else {
                return Err(ValidationError::new(
                    "drone",
                    alloc::format!("gcs `{}` refers to unknown drone `{}`", g.id, g.drone),
                ));
            };
            if controlled.contains(&d.id.as_str()) {
                return Err(ValidationError::new(
                    "drone",
                    alloc::format!("drone `{}` has two ground stations", d.id),
                ));
            }
            controlled.push(&d.id);
            if g.command_period == 0 {
                return Err(ValidationError::new("command_period", "must be positive"));
            }
            if g.ack_timeout == 0 {
                return Err(ValidationError::new("ack_timeout", "must be positive"));
            }
            if d.mode == FlightMode::Autonomous && g.mission_len < 2 {
                return Err(ValidationError::new(
                    "mission",
                    "needs at least takeoff and land",
                ));
            }
        }

        for j in self.jammers() {
            let c = &j.config;
            if c.channel > MAX_RADIO_CHANNEL {
                return Err(ValidationError::new(
                    "channel",
                    alloc::format!("{} is outside 0..=125", c.channel),
                ));
            }
            if c.stop.is_some_and(|s| s <= c.start) {
                return Err(ValidationError::new("stop", "must come after start"));
            }
            if !(c.amplitude >= 0.0) {
                return Err(ValidationError::new("amplitude", "must be non-negative"));
            }
            if !(c.sample_rate > 0.0) {
                return Err(ValidationError::new("sample_rate", "must be positive"));
            }
            if !(c.cutoff_hz > 0.0 && c.transition_hz > 0.0)
                || c.cutoff_hz + c.transition_hz > c.sample_rate / 2.0
            {
                return Err(ValidationError::new(
                    "cutoff_hz",
                    "filter band must fit below Nyquist",
                ));
            }
        }

        for h in self.hijackers() {
            let c = &h.config;
            if c.datarates.is_empty() {
                return Err(ValidationError::new(
                    "datarates",
                    "must list at least one rate",
                ));
            }
            if c.dwell == 0 {
                return Err(ValidationError::new("dwell", "must be at least 1 tick"));
            }
            if c.command_period == 0 {
                return Err(ValidationError::new("command_period", "must be positive"));
            }
            if c.ack_timeout == 0 {
                return Err(ValidationError::new("ack_timeout", "must be positive"));
            }
        }

        if let Some(det) = &self.defense.detector {
            if det.window == 0 || det.window > m.stats_window {
                return Err(ValidationError::new(
                    "detector_window",
                    "must be between 1 and the medium's stats_window",
                ));
            }
            if !(det.threshold > 0.0 && det.threshold <= 1.0) {
                return Err(ValidationError::new(
                    "detector_threshold",
                    "must be in (0, 1]",
                ));
            }
        }
        if self.defense.hopping.is_some() {
            for (i, d) in drones.iter().enumerate() {
                if drones[..i]
                    .iter()
                    .any(|o| o.uri.address == d.uri.address && o.uri.datarate == d.uri.datarate)
                {
                    return Err(ValidationError::new(
                        "uri",
                        "hopping drones need distinct addresses",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crtp::{Address, Datarate};

    fn uri(ch: u8, a: u8) -> RadioUri {
        RadioUri {
            channel: ch,
            datarate: Datarate::Rate2M,
            address: Address([a, 0xE7, 0xE7, 0xE7, 0xE7]),
            ..RadioUri::default()
        }
    }

    fn base() -> Scenario {
        Scenario {
            roster: alloc::vec![
                AgentSpec::Drone(DroneSpec::new("cf1", uri(81, 1), FlightMode::Autonomous)),
                AgentSpec::Gcs(GcsSpec::new("gcs1", "cf1")),
            ],
            ..Scenario::default()
        }
    }

    #[test]
    fn base_is_valid() {
        assert_eq!(base().validate(), Ok(()));
    }

    #[test]
    fn field_named_in_errors() {
        let mut s = base();
        if let AgentSpec::Drone(d) = &mut s.roster[0] {
            d.uri.channel = 126;
        }
        assert_eq!(s.validate().unwrap_err().field, "channel");

        let mut s = base();
        s.roster.push(AgentSpec::Drone(DroneSpec::new(
            "cf2",
            uri(81, 1),
            FlightMode::Autonomous,
        )));
        assert_eq!(s.validate().unwrap_err().field, "uri");

        let mut s = base();
        s.roster
            .push(AgentSpec::Gcs(GcsSpec::new("gcs2", "nobody")));
        assert_eq!(s.validate().unwrap_err().field, "drone");

        let mut s = base();
        s.roster.push(AgentSpec::Gcs(GcsSpec::new("cf1", "cf1")));
        assert_eq!(s.validate().unwrap_err().field, "id");

        let mut s = base();
        s.duration = 0;
        assert_eq!(s.validate().unwrap_err().field, "duration");

        let mut s = base();
        s.defense.detector = Some(DetectorConfig {
            window: 500,
            threshold: 0.5,
        });
        assert_eq!(s.validate().unwrap_err().field, "detector_window");
    }
}
