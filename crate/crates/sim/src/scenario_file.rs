//! Sectioned `key = value` scenario files.
//!
//! ```text
//! [sim]
//! duration = 600
//!
//! [drone]            # repeatable; roster order is file order
//! id  = cf1
//! uri = radio://0/81/2M/01E7E7E7E7
//!
//! [gcs]
//! id    = gcs1
//! drone = cf1
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crtp_sim_core::agents::{FlightMode, HijackerConfig, JammerConfig};
use crtp_sim_core::crtp::{parse_uri, Address, CodecError, Datarate, Setpoint};
use crtp_sim_core::defense::{DetectorConfig, HopError, HopSchedule};
use crtp_sim_core::scenario::{
    AgentSpec, DefenseSpec, DroneSpec, GcsSpec, HijackerSpec, InitialStatus, JammerSpec, Scenario,
    ValidationError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LoadError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        LoadError::Parse {
            line,
            message: message.into(),
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

struct Section<'a> {
    name: &'a str,
    line: usize,
    entries: Vec<Entry<'a>>,
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>, LoadError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| LoadError::parse(line, "unterminated section header"))?
                .trim();
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            LoadError::parse(line, format!("expected `key = value`, got `{content}`"))
        })?;
        let section = sections
            .last_mut()
            .ok_or_else(|| LoadError::parse(line, "key outside of any section"))?;
        let key = key.trim();
        if section.entries.iter().any(|e| e.key == key) {
            return Err(LoadError::parse(line, format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry {
            line,
            key,
            value: value.trim(),
        });
    }
    Ok(sections)
}

/// Typed access to one section's entries; every key must be consumed.
struct Reader<'s, 'a> {
    section: &'s Section<'a>,
    allowed: &'static [&'static str],
}

impl<'s, 'a> Reader<'s, 'a> {
    fn new(section: &'s Section<'a>, allowed: &'static [&'static str]) -> Result<Self, LoadError> {
        for e in &section.entries {
            if !allowed.contains(&e.key) {
                return Err(LoadError::parse(
                    e.line,
                    format!("unknown key `{}` in [{}]", e.key, section.name),
                ));
            }
        }
        Ok(Reader { section, allowed })
    }

    fn entry(&self, key: &str) -> Option<&Entry<'a>> {
        debug_assert!(self.allowed.contains(&key), "{key}");
        self.section.entries.iter().find(|e| e.key == key)
    }

    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, LoadError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => parse(e.value).map(Some).ok_or_else(|| {
                LoadError::parse(e.line, format!("bad value `{}` for `{key}`", e.value))
            }),
        }
    }

    fn num<T: FromStr>(&self, key: &str) -> Result<Option<T>, LoadError> {
        self.get(key, |v| v.parse().ok())
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, LoadError> {
        self.get(key, parse_bool)
    }

    fn text(&self, key: &str) -> Option<String> {
        self.entry(key).map(|e| e.value.to_string())
    }

    fn required(&self, key: &str) -> Result<String, LoadError> {
        self.text(key).ok_or_else(|| {
            LoadError::parse(
                self.section.line,
                format!("[{}] needs `{key}`", self.section.name),
            )
        })
    }

    fn line_of(&self, key: &str) -> usize {
        self.entry(key).map_or(self.section.line, |e| e.line)
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "on" => Some(true),
        "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    v.split(',').map(|s| item(s.trim())).collect()
}

fn parse_address(v: &str) -> Option<Address> {
    v.parse().ok()
}

fn parse_setpoint(v: &str) -> Option<Setpoint> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    let [roll, pitch, yaw, thrust] = parts.as_slice() else {
        return None;
    };
    Some(Setpoint::new(
        roll.parse().ok()?,
        pitch.parse().ok()?,
        yaw.parse().ok()?,
        thrust.parse().ok()?,
    ))
}

const SIM_KEYS: &[&str] = &["duration", "tick_rate", "seed"];
const MEDIUM_KEYS: &[&str] = &[
    "clear_snr_db",
    "theta_low_db",
    "theta_high_db",
    "stats_window",
    "adjacent_rejection_db",
];
const DRONE_KEYS: &[&str] = &[
    "id",
    "uri",
    "mode",
    "state",
    "safe_mode",
    "loss_timeout",
    "land_duration",
];
const GCS_KEYS: &[&str] = &[
    "id",
    "drone",
    "tx_power_db",
    "command_period",
    "ack_timeout",
    "mission",
    "start",
];
const JAMMER_KEYS: &[&str] = &[
    "id",
    "channel",
    "start",
    "stop",
    "amplitude",
    "sample_rate",
    "rf_gain_db",
    "if_gain_db",
    "bb_gain_db",
    "cutoff_hz",
    "transition_hz",
    "block_seconds",
];
const HIJACKER_KEYS: &[&str] = &[
    "id",
    "address",
    "start",
    "datarates",
    "dwell",
    "target",
    "probe",
    "cw_power_db",
    "tx_power_db",
    "command_period",
    "ack_timeout",
    "setpoint",
];
const DEFENSE_KEYS: &[&str] = &[
    "hopping",
    "hop_channels",
    "epoch_length",
    "hop_seed",
    "detector",
    "detector_window",
    "detector_threshold",
    "safe_mode",
];

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let sections = split_sections(text)?;
    let mut s = Scenario::default();
    let mut singletons = HashSet::new();

    for sec in &sections {
        if matches!(sec.name, "sim" | "medium" | "defense") && !singletons.insert(sec.name) {
            return Err(LoadError::parse(
                sec.line,
                format!("[{}] appears twice", sec.name),
            ));
        }
        match sec.name {
            "sim" => {
                let r = Reader::new(sec, SIM_KEYS)?;
                s.duration = r.num("duration")?.unwrap_or(s.duration);
                s.tick_rate = r.num("tick_rate")?.unwrap_or(s.tick_rate);
                s.seed = r.num("seed")?.unwrap_or(s.seed);
            }
            "medium" => {
                let r = Reader::new(sec, MEDIUM_KEYS)?;
                let m = &mut s.medium;
                m.clear_snr_db = r.num("clear_snr_db")?.unwrap_or(m.clear_snr_db);
                m.theta_low_db = r.num("theta_low_db")?.unwrap_or(m.theta_low_db);
                m.theta_high_db = r.num("theta_high_db")?.unwrap_or(m.theta_high_db);
                m.stats_window = r.num("stats_window")?.unwrap_or(m.stats_window);
                m.adjacent_rejection_db = r
                    .num("adjacent_rejection_db")?
                    .unwrap_or(m.adjacent_rejection_db);
            }
            "drone" => s.roster.push(AgentSpec::Drone(drone(sec)?)),
            "gcs" => s.roster.push(AgentSpec::Gcs(gcs(sec)?)),
            "jammer" => s.roster.push(AgentSpec::Jammer(jammer(sec)?)),
            "hijacker" => s.roster.push(AgentSpec::Hijacker(hijacker(sec)?)),
            "defense" => s.defense = defense(sec)?,
            other => {
                return Err(LoadError::parse(
                    sec.line,
                    format!("unknown section [{other}]"),
                ));
            }
        }
    }
    s.validate()?;
    Ok(s)
}

fn drone(sec: &Section) -> Result<DroneSpec, LoadError> {
    let r = Reader::new(sec, DRONE_KEYS)?;
    let id = r.required("id")?;
    let uri_text = r.required("uri")?;
    let uri = parse_uri(&uri_text).map_err(|e| match e {
        CodecError::ChannelOutOfRange(_) => ValidationError::new("channel", e.to_string()).into(),
        _ => LoadError::parse(r.line_of("uri"), e.to_string()),
    })?;
    let mode = r
        .get("mode", |v| match v {
            "autonomous" => Some(FlightMode::Autonomous),
            "non_autonomous" | "manual" => Some(FlightMode::NonAutonomous),
            _ => None,
        })?
        .unwrap_or(FlightMode::NonAutonomous);
    let mut d = DroneSpec::new(id, uri, mode);
    d.initial = r
        .get("state", |v| match v {
            "flying" => Some(InitialStatus::Flying),
            "idle" => Some(InitialStatus::Idle),
            _ => None,
        })?
        .unwrap_or(d.initial);
    d.safe_mode = r.flag("safe_mode")?.unwrap_or(d.safe_mode);
    d.loss_timeout = r.num("loss_timeout")?.unwrap_or(d.loss_timeout);
    d.land_duration = r.num("land_duration")?.unwrap_or(d.land_duration);
    Ok(d)
}

fn gcs(sec: &Section) -> Result<GcsSpec, LoadError> {
    let r = Reader::new(sec, GCS_KEYS)?;
    let mut g = GcsSpec::new(r.required("id")?, r.required("drone")?);
    g.tx_power_db = r.num("tx_power_db")?.unwrap_or(g.tx_power_db);
    g.command_period = r.num("command_period")?.unwrap_or(g.command_period);
    g.ack_timeout = r.num("ack_timeout")?.unwrap_or(g.ack_timeout);
    g.mission_len = r.num("mission")?.unwrap_or(g.mission_len);
    g.start = r.num("start")?.unwrap_or(g.start);
    Ok(g)
}

fn jammer(sec: &Section) -> Result<JammerSpec, LoadError> {
    let r = Reader::new(sec, JAMMER_KEYS)?;
    let id = r.required("id")?;
    let d = JammerConfig::default();
    let config = JammerConfig {
        channel: r.num("channel")?.unwrap_or(d.channel),
        start: r.num("start")?.unwrap_or(d.start),
        stop: r
            .get("stop", |v| match v {
                "never" => Some(None),
                _ => v.parse().ok().map(Some),
            })?
            .unwrap_or(d.stop),
        amplitude: r.num("amplitude")?.unwrap_or(d.amplitude),
        sample_rate: r.num("sample_rate")?.unwrap_or(d.sample_rate),
        rf_gain_db: r.num("rf_gain_db")?.unwrap_or(d.rf_gain_db),
        if_gain_db: r.num("if_gain_db")?.unwrap_or(d.if_gain_db),
        bb_gain_db: r.num("bb_gain_db")?.unwrap_or(d.bb_gain_db),
        cutoff_hz: r.num("cutoff_hz")?.unwrap_or(d.cutoff_hz),
        transition_hz: r.num("transition_hz")?.unwrap_or(d.transition_hz),
        block_seconds: r.num("block_seconds")?.unwrap_or(d.block_seconds),
    };
    Ok(JammerSpec { id, config })
}

fn hijacker(sec: &Section) -> Result<HijackerSpec, LoadError> {
    let r = Reader::new(sec, HIJACKER_KEYS)?;
    let id = r.required("id")?;
    let identity = r
        .get("address", parse_address)?
        .unwrap_or(Address([0xAA; 5]));
    let d = HijackerConfig::new(identity);
    let config = HijackerConfig {
        identity,
        start: r.num("start")?.unwrap_or(d.start),
        datarates: r
            .get("datarates", |v| {
                parse_list(v, |s| s.parse::<Datarate>().ok())
            })?
            .unwrap_or(d.datarates),
        dwell: r.num("dwell")?.unwrap_or(d.dwell),
        target: r.get("target", parse_address)?.or(d.target),
        probes: r
            .get("probe", |v| parse_list(v, parse_address))?
            .unwrap_or(d.probes),
        cw_power_db: r.num("cw_power_db")?.unwrap_or(d.cw_power_db),
        command_period: r.num("command_period")?.unwrap_or(d.command_period),
        ack_timeout: r.num("ack_timeout")?.unwrap_or(d.ack_timeout),
        setpoint: r.get("setpoint", parse_setpoint)?.unwrap_or(d.setpoint),
    };
    Ok(HijackerSpec {
        id,
        tx_power_db: r.num("tx_power_db")?.unwrap_or(0.0),
        config,
    })
}

fn defense(sec: &Section) -> Result<DefenseSpec, LoadError> {
    let r = Reader::new(sec, DEFENSE_KEYS)?;
    let mut out = DefenseSpec {
        safe_mode: r.flag("safe_mode")?.unwrap_or(false),
        ..DefenseSpec::default()
    };
    if r.flag("hopping")?.unwrap_or(false) {
        let channels = r
            .get("hop_channels", |v| parse_list(v, |s| s.parse::<u8>().ok()))?
            .ok_or_else(|| ValidationError::new("hop_channels", "hopping needs a channel list"))?;
        let epoch = r.num("epoch_length")?.unwrap_or(10);
        let seed = r.num("hop_seed")?.unwrap_or(0);
        let schedule = HopSchedule::new(channels, epoch, seed).map_err(|e| {
            let field = match e {
                HopError::ZeroEpoch => "epoch_length",
                HopError::ChannelOutOfRange(_) => "channel",
                _ => "hop_channels",
            };
            ValidationError::new(field, e.to_string())
        })?;
        out.hopping = Some(schedule);
    }
    if r.flag("detector")?.unwrap_or(false) {
        let d = DetectorConfig::default();
        out.detector = Some(DetectorConfig {
            window: r.num("detector_window")?.unwrap_or(d.window),
            threshold: r.num("detector_threshold")?.unwrap_or(d.threshold),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[sim]
duration = 50   # ticks

[drone]
id = cf1
uri = radio://0/81/2M/01E7E7E7E7
mode = autonomous

[gcs]
id = gcs1
drone = cf1
";

    #[test]
    fn minimal_file() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.duration, 50);
        assert_eq!(s.roster.len(), 2);
        assert_eq!(s.drones().next().unwrap().uri.channel, 81);
    }

    fn line_of(err: LoadError) -> usize {
        match err {
            LoadError::Parse { line, .. } => line,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = MINIMAL.replace("mode = autonomous", "mode = autonomous\nspeed = 3");
        assert_eq!(line_of(parse_scenario(&text).unwrap_err()), 9);
    }

    #[test]
    fn malformed_lines() {
        assert_eq!(line_of(parse_scenario("[sim\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_scenario("duration = 5\n").unwrap_err()), 1);
        assert_eq!(
            line_of(parse_scenario("[sim]\nduration 5\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(parse_scenario("[sim]\nduration = x\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(parse_scenario("[sim]\nseed = 1\nseed = 2\n").unwrap_err()),
            3
        );
        assert_eq!(line_of(parse_scenario("[radar]\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_scenario("[sim]\n[sim]\n").unwrap_err()), 2);
    }

    fn field_of(err: LoadError) -> &'static str {
        match err {
            LoadError::Validation(v) => v.field,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        let text = MINIMAL.replace("/81/", "/126/");
        assert_eq!(field_of(parse_scenario(&text).unwrap_err()), "channel");
        let dup = format!("{MINIMAL}\n[drone]\nid = cf2\nuri = radio://0/81/2M/01E7E7E7E7\n");
        assert_eq!(field_of(parse_scenario(&dup).unwrap_err()), "uri");
        let orphan = MINIMAL.replace("drone = cf1", "drone = cf9");
        assert_eq!(field_of(parse_scenario(&orphan).unwrap_err()), "drone");
        let hop = format!("{MINIMAL}\n[defense]\nhopping = on\nhop_channels = 5\n");
        assert_eq!(field_of(parse_scenario(&hop).unwrap_err()), "hop_channels");
    }

    #[test]
    fn full_option_set() {
        let text = format!(
            "{MINIMAL}
[jammer]
id = j
channel = 81
start = 10
stop = never
[hijacker]
id = h
address = AA:AA:AA:AA:AA
datarates = 250K, 2M
probe = 01E7E7E7E7, 02E7E7E7E7
setpoint = 0, 10, 0, 36000
[defense]
detector = yes
detector_window = 50
safe_mode = true
"
        );
        let s = parse_scenario(&text).unwrap();
        let h = s.hijackers().next().unwrap();
        assert_eq!(h.config.datarates, [Datarate::Rate250K, Datarate::Rate2M]);
        assert_eq!(h.config.probes.len(), 2);
        assert_eq!(h.config.setpoint.thrust, 36000);
        assert_eq!(s.jammers().next().unwrap().config.stop, None);
        assert_eq!(s.defense.detector.unwrap().window, 50);
        assert!(s.defense.safe_mode);
    }
}
