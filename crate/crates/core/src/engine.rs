//! Fixed-tick event loop.
//!
//! Each tick runs in four stages: agents in roster order (which queue
//! frames and add interference), medium delivery in queue order, sniffers,
//! then defenses.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    accepts_command, drone_transition, hijacker_transition, interference_power, jammer_step,
    Airspace, Command, DroneEvent, DroneParams, DroneState, DroneStatus, Gcs, GcsConfig, GcsEvent,
    GcsLink, HijackAction, HijackPhase, HijackerConfig, HijackerState, JammerConfig,
};
use crate::crtp::{Address, CrtpPacket, Setpoint};
use crate::defense::{detect_jamming, next_hop_channel};
use crate::medium::{AirFrame, DeliveryOutcome, Medium, Occupancy, Role, TransceiverId};
use crate::phy::{db_to_power, power_to_db};
use crate::rng::{entity_seed, entity_stream};
use crate::scenario::{AgentSpec, InitialStatus, Scenario, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Status,
    SetpointRx,
    MissionRx,
    LinkLost,
    MissionComplete,
    JamOn,
    JamOff,
    Phase,
    Target,
    NoTarget,
    Alert,
    SafeMode,
    ReturnHome,
    GpsLocation,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Status => "status",
            EventKind::SetpointRx => "setpoint_rx",
            EventKind::MissionRx => "mission_rx",
            EventKind::LinkLost => "link_lost",
            EventKind::MissionComplete => "mission_complete",
            EventKind::JamOn => "jam_on",
            EventKind::JamOff => "jam_off",
            EventKind::Phase => "phase",
            EventKind::Target => "target",
            EventKind::NoTarget => "no_target",
            EventKind::Alert => "alert",
            EventKind::SafeMode => "safe_mode",
            EventKind::ReturnHome => "return_home",
            EventKind::GpsLocation => "gps_location",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        const ALL: [EventKind; 14] = [
            EventKind::Status,
            EventKind::SetpointRx,
            EventKind::MissionRx,
            EventKind::LinkLost,
            EventKind::MissionComplete,
            EventKind::JamOn,
            EventKind::JamOff,
            EventKind::Phase,
            EventKind::Target,
            EventKind::NoTarget,
            EventKind::Alert,
            EventKind::SafeMode,
            EventKind::ReturnHome,
            EventKind::GpsLocation,
        ];
        ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub tick: u64,
    pub entity: String,
    pub kind: EventKind,
    pub details: Vec<(&'static str, String)>,
}

impl TraceEvent {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.details
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// One tab-separated line, without the newline.
impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.tick, self.entity, self.kind)?;
        for (k, v) in &self.details {
            write!(f, "\t{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of<'a>(&'a self, entity: &'a str) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.events.iter().filter(move |e| e.entity == entity)
    }

    pub fn first(&self, entity: &str, kind: EventKind) -> Option<&TraceEvent> {
        self.events
            .iter()
            .find(|e| e.entity == entity && e.kind == kind)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub gcs: String,
    pub drone: String,
    pub frames_sent: u64,
    pub frames_acked: u64,
    pub link_lost_at: Option<u64>,
    pub mission_complete_at: Option<u64>,
    pub first_alert_at: Option<u64>,
    pub alerts: u32,
}

impl LinkMetrics {
    pub fn frames_lost(&self) -> u64 {
        self.frames_sent - self.frames_acked
    }

    pub fn pdr(&self) -> Option<f64> {
        (self.frames_sent > 0).then(|| self.frames_acked as f64 / self.frames_sent as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroneMetrics {
    pub drone: String,
    pub status: DroneStatus,
    pub controlling_address: Option<Address>,
    pub last_setpoint: Setpoint,
    /// Most recent setpoint that was delivered and obeyed.
    pub last_delivered_setpoint: Option<Setpoint>,
    pub commands_accepted: u64,
    pub status_changes: Vec<(u64, DroneStatus)>,
}

impl DroneMetrics {
    pub fn reached(&self, status: DroneStatus) -> Option<u64> {
        self.status_changes
            .iter()
            .find(|(_, s)| *s == status)
            .map(|(t, _)| *t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HijackerMetrics {
    pub hijacker: String,
    pub phase: HijackPhase,
    pub phase_changes: Vec<(u64, HijackPhase)>,
    pub target: Option<Address>,
}

impl HijackerMetrics {
    pub fn entered(&self, phase: HijackPhase) -> Option<u64> {
        self.phase_changes
            .iter()
            .find(|(_, p)| *p == phase)
            .map(|(t, _)| *t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerMetrics {
    pub jammer: String,
    pub power_db: f64,
    pub onset: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub ticks: u64,
    pub seed: u64,
    pub links: Vec<LinkMetrics>,
    pub drones: Vec<DroneMetrics>,
    pub hijackers: Vec<HijackerMetrics>,
    pub jammers: Vec<JammerMetrics>,
}

impl Metrics {
    pub fn drone(&self, id: &str) -> Option<&DroneMetrics> {
        self.drones.iter().find(|d| d.drone == id)
    }

    pub fn link(&self, gcs: &str) -> Option<&LinkMetrics> {
        self.links.iter().find(|l| l.gcs == gcs)
    }

    pub fn hijacker(&self, id: &str) -> Option<&HijackerMetrics> {
        self.hijackers.iter().find(|h| h.hijacker == id)
    }

    /// Long-form `(entity, metric, value)` rows in a stable order.
    pub fn rows(&self) -> Vec<(String, &'static str, String)> {
        let opt = |v: Option<u64>| v.map(|t| t.to_string()).unwrap_or_default();
        let mut out = Vec::new();
        out.push(("sim".to_string(), "seed", self.seed.to_string()));
        out.push(("sim".to_string(), "ticks", self.ticks.to_string()));
        for l in &self.links {
            let e = &l.gcs;
            out.push((e.clone(), "drone", l.drone.clone()));
            out.push((e.clone(), "frames_sent", l.frames_sent.to_string()));
            out.push((e.clone(), "frames_acked", l.frames_acked.to_string()));
            out.push((e.clone(), "frames_lost", l.frames_lost().to_string()));
            out.push((
                e.clone(),
                "pdr",
                l.pdr().map(|p| format!("{p:.6}")).unwrap_or_default(),
            ));
            out.push((e.clone(), "link_lost_at", opt(l.link_lost_at)));
            out.push((e.clone(), "mission_complete_at", opt(l.mission_complete_at)));
            out.push((e.clone(), "first_alert_at", opt(l.first_alert_at)));
            out.push((e.clone(), "alerts", l.alerts.to_string()));
        }
        for d in &self.drones {
            let e = &d.drone;
            out.push((e.clone(), "final_status", d.status.to_string()));
            out.push((
                e.clone(),
                "controlling_address",
                d.controlling_address
                    .map(|a| a.to_string())
                    .unwrap_or_default(),
            ));
            out.push((e.clone(), "last_setpoint", d.last_setpoint.to_string()));
            out.push((
                e.clone(),
                "commands_accepted",
                d.commands_accepted.to_string(),
            ));
            for s in DroneStatus::ALL {
                if let Some(t) = d.reached(s) {
                    out.push((e.clone(), status_metric(s), t.to_string()));
                }
            }
        }
        for h in &self.hijackers {
            let e = &h.hijacker;
            out.push((e.clone(), "final_phase", h.phase.to_string()));
            out.push((
                e.clone(),
                "target",
                h.target.map(|a| a.to_string()).unwrap_or_default(),
            ));
            for p in [
                HijackPhase::JamCw,
                HijackPhase::Connect,
                HijackPhase::Control,
            ] {
                if let Some(t) = h.entered(p) {
                    out.push((e.clone(), phase_metric(p), t.to_string()));
                }
            }
        }
        for j in &self.jammers {
            out.push((j.jammer.clone(), "power_db", format!("{:.3}", j.power_db)));
            out.push((j.jammer.clone(), "onset", opt(j.onset)));
        }
        out
    }
}

fn status_metric(s: DroneStatus) -> &'static str {
    match s {
        DroneStatus::Idle => "idle_at",
        DroneStatus::Flying => "flying_at",
        DroneStatus::Suspended => "suspended_at",
        DroneStatus::Landing => "landing_at",
        DroneStatus::Landed => "landed_at",
        DroneStatus::Crashed => "crashed_at",
        DroneStatus::Hijacked => "hijacked_at",
    }
}

fn phase_metric(p: HijackPhase) -> &'static str {
    match p {
        HijackPhase::Scan => "scan_at",
        HijackPhase::JamCw => "jamcw_at",
        HijackPhase::Connect => "connect_at",
        HijackPhase::Control => "control_at",
    }
}

#[derive(Debug, Clone)]
struct DroneAgent {
    id: String,
    tx: TransceiverId,
    params: DroneParams,
    state: DroneState,
    last_delivered: Option<Setpoint>,
    accepted: u64,
    changes: Vec<(u64, DroneStatus)>,
}

#[derive(Debug, Clone)]
struct GcsAgent {
    id: String,
    tx: TransceiverId,
    drone: usize,
    identity: Address,
    gcs: Gcs,
    draws: ChaCha8Rng,
    link_lost_at: Option<u64>,
    mission_complete_at: Option<u64>,
    alert_active: bool,
    first_alert_at: Option<u64>,
    alerts: u32,
}

#[derive(Debug, Clone)]
struct JammerAgent {
    id: String,
    config: JammerConfig,
    power: f64,
    on: bool,
    onset: Option<u64>,
}

#[derive(Debug, Clone)]
struct HijackerAgent {
    id: String,
    tx: TransceiverId,
    config: HijackerConfig,
    state: HijackerState,
    draws: ChaCha8Rng,
    changes: Vec<(u64, HijackPhase)>,
}

#[derive(Debug, Clone)]
enum Agent {
    Drone(DroneAgent),
    Gcs(GcsAgent),
    Jammer(JammerAgent),
    Hijacker(HijackerAgent),
}

#[derive(Debug, Clone)]
struct Pending {
    from: usize,
    to: Address,
    packet: CrtpPacket,
    command: Option<Command>,
}

/// A scenario being executed.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    seed: u64,
    tick: u64,
    medium: Medium,
    occupancy: Occupancy,
    agents: Vec<Agent>,
    trace: Trace,
    air: Vec<AirFrame>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, seed: Option<u64>) -> Result<Self, ValidationError> {
        scenario.validate()?;
        let seed = seed.unwrap_or(scenario.seed);
        let safe_all = scenario.defense.safe_mode;
        let mut medium = Medium::new(scenario.medium);
        let mut agents = Vec::with_capacity(scenario.roster.len());
        let reg_err = |e: crate::medium::MediumError| ValidationError::new("uri", e.to_string());

        // agents are stored in roster order, so a roster position is also
        // an agent index
        let position = |id: &str| scenario.roster.iter().position(|a| a.id() == id);
        for spec in &scenario.roster {
            let agent = match spec {
                AgentSpec::Drone(d) => {
                    let tx = medium.register(d.uri, 0.0, Role::Drone).map_err(reg_err)?;
                    let safe = d.safe_mode || safe_all;
                    let state = match d.initial {
                        InitialStatus::Flying => DroneState::flying(d.mode, d.uri.address, safe),
                        InitialStatus::Idle => DroneState::new(d.mode, DroneStatus::Idle, safe),
                    };
                    Agent::Drone(DroneAgent {
                        id: d.id.clone(),
                        tx,
                        params: DroneParams {
                            owner: d.uri.address,
                            loss_timeout: d.loss_timeout,
                            land_duration: d.land_duration,
                        },
                        state,
                        last_delivered: None,
                        accepted: 0,
                        changes: Vec::new(),
                    })
                }
                AgentSpec::Gcs(g) => {
                    let d = scenario.drone(&g.drone).expect("validated");
                    let tx = medium
                        .register(d.uri, g.tx_power_db, Role::Gcs)
                        .map_err(reg_err)?;
                    let config = GcsConfig {
                        mode: d.mode,
                        command_period: g.command_period,
                        ack_timeout: g.ack_timeout,
                        start: g.start,
                        mission_len: g.mission_len,
                    };
                    Agent::Gcs(GcsAgent {
                        id: g.id.clone(),
                        tx,
                        drone: position(&g.drone).expect("validated"),
                        identity: d.uri.address,
                        gcs: Gcs::new(config, entity_stream(seed, &g.id)),
                        draws: entity_stream(seed, &format!("{}/link", g.id)),
                        link_lost_at: None,
                        mission_complete_at: None,
                        alert_active: false,
                        first_alert_at: None,
                        alerts: 0,
                    })
                }
                AgentSpec::Jammer(j) => {
                    let power = interference_power(&j.config, entity_seed(seed, &j.id))
                        .map_err(|e| ValidationError::new("cutoff_hz", e.to_string()))?;
                    Agent::Jammer(JammerAgent {
                        id: j.id.clone(),
                        config: j.config,
                        power,
                        on: false,
                        onset: None,
                    })
                }
                AgentSpec::Hijacker(h) => {
                    let tx = medium
                        .register(Default::default(), h.tx_power_db, Role::Attacker)
                        .map_err(reg_err)?;
                    Agent::Hijacker(HijackerAgent {
                        id: h.id.clone(),
                        tx,
                        config: h.config.clone(),
                        state: HijackerState::default(),
                        draws: entity_stream(seed, &h.id),
                        changes: Vec::new(),
                    })
                }
            };
            agents.push(agent);
        }

        let mut sim = Simulation {
            scenario: scenario.clone(),
            seed,
            tick: 0,
            medium,
            occupancy: Occupancy::default(),
            agents,
            trace: Trace::default(),
            air: Vec::new(),
        };
        sim.hop(0);
        Ok(sim)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_finished(&self) -> bool {
        self.tick >= self.scenario.duration
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn drone_state(&self, id: &str) -> Option<&DroneState> {
        self.agents.iter().find_map(|a| match a {
            Agent::Drone(d) if d.id == id => Some(&d.state),
            _ => None,
        })
    }

    pub fn gcs_link(&self, id: &str) -> Option<GcsLink> {
        self.agents.iter().find_map(|a| match a {
            Agent::Gcs(g) if g.id == id => Some(g.gcs.link()),
            _ => None,
        })
    }

    pub fn hijack_phase(&self, id: &str) -> Option<HijackPhase> {
        self.agents.iter().find_map(|a| match a {
            Agent::Hijacker(h) if h.id == id => Some(h.state.phase),
            _ => None,
        })
    }

    fn emit(&mut self, entity: &str, kind: EventKind, details: Vec<(&'static str, String)>) {
        self.trace.events.push(TraceEvent {
            tick: self.tick,
            entity: entity.into(),
            kind,
            details,
        });
    }

    /// Retunes every station and its drone to the channel of the epoch
    /// containing `tick`.
    fn hop(&mut self, tick: u64) {
        let Some(schedule) = &self.scenario.defense.hopping else {
            return;
        };
        if !tick.is_multiple_of(schedule.epoch_length() as u64) {
            return;
        }
        let channel = next_hop_channel(schedule, schedule.epoch_at(tick));
        let mut txs = Vec::new();
        for a in &self.agents {
            if let Agent::Gcs(g) = a {
                txs.push(g.tx);
                if let Agent::Drone(d) = &self.agents[g.drone] {
                    txs.push(d.tx);
                }
            }
        }
        for tx in txs {
            self.medium.retune(tx, channel).expect("validated hop set");
        }
    }

    fn set_drone(&mut self, idx: usize, next: DroneState, via_tick: bool) {
        let Agent::Drone(d) = &mut self.agents[idx] else {
            unreachable!()
        };
        let prev = d.state;
        d.state = next;
        if prev.status == next.status {
            return;
        }
        d.changes.push((self.tick, next.status));
        let id = d.id.clone();
        let tx = d.tx;
        self.emit(
            &id,
            EventKind::Status,
            alloc::vec![
                ("from", prev.status.to_string()),
                ("to", next.status.to_string())
            ],
        );
        if via_tick && next.status == DroneStatus::Landing && prev.status.is_linked_flight() {
            self.emit(
                &id,
                EventKind::SafeMode,
                alloc::vec![("trigger", "link_loss".into())],
            );
            self.emit(&id, EventKind::ReturnHome, Vec::new());
            self.emit(&id, EventKind::GpsLocation, Vec::new());
        }
        if next.status.is_terminal() {
            self.medium.silence(tx).expect("registered");
        }
    }

    /// Advances one tick.
    pub fn step(&mut self) {
        let t = self.tick;
        self.hop(t);
        self.occupancy.clear();
        let mut queue: Vec<Pending> = Vec::new();
        let adjacent = self.scenario.medium.adjacent_rejection_db;

        for i in 0..self.agents.len() {
            match &mut self.agents[i] {
                Agent::Drone(d) => {
                    let next = drone_transition(&d.state, &d.params, &DroneEvent::Tick);
                    self.set_drone(i, next, true);
                }
                Agent::Gcs(g) => {
                    let step = g.gcs.gcs_step(t);
                    let to = g.identity;
                    if step.event == Some(GcsEvent::LinkLost) {
                        g.link_lost_at = Some(t);
                        let details = alloc::vec![("last_ack", g.gcs.last_ack().to_string())];
                        let id = g.id.clone();
                        self.emit(&id, EventKind::LinkLost, details);
                    }
                    if let Some(frame) = step.frame {
                        queue.push(Pending {
                            from: i,
                            to,
                            packet: frame.packet,
                            command: frame.command,
                        });
                    }
                }
                Agent::Jammer(j) => {
                    let added = jammer_step(t, &j.config, j.power, &mut self.occupancy, adjacent);
                    let on = added > 0.0;
                    if on != j.on {
                        j.on = on;
                        let id = j.id.clone();
                        if on {
                            j.onset.get_or_insert(t);
                            let details = alloc::vec![
                                ("channel", j.config.channel.to_string()),
                                ("power_db", format!("{:.3}", power_to_db(added))),
                            ];
                            self.emit(&id, EventKind::JamOn, details);
                        } else {
                            self.emit(&id, EventKind::JamOff, Vec::new());
                        }
                    }
                }
                Agent::Hijacker(h) => {
                    let (next, actions) = hijacker_transition(&h.state, &h.config, t);
                    h.state = next;
                    let id = h.id.clone();
                    let tx = h.tx;
                    for action in actions {
                        match action {
                            HijackAction::Tune(uri) => self
                                .medium
                                .retarget(tx, uri)
                                .expect("attacker never listens"),
                            HijackAction::Cw { channel, power_db } => {
                                self.occupancy.add_cw(channel, db_to_power(power_db))
                            }
                            HijackAction::Transmit {
                                to,
                                packet,
                                command,
                            } => queue.push(Pending {
                                from: i,
                                to,
                                packet,
                                command,
                            }),
                            HijackAction::TargetSelected(d) => self.emit(
                                &id,
                                EventKind::Target,
                                alloc::vec![
                                    ("address", d.address.to_string()),
                                    ("channel", d.channel.to_string()),
                                    ("rate", d.datarate.as_str().into()),
                                    ("packets", d.packets_seen.to_string()),
                                    ("active", d.link_active.to_string()),
                                ],
                            ),
                            HijackAction::NoTargetFound => {
                                self.emit(&id, EventKind::NoTarget, Vec::new())
                            }
                            HijackAction::Phase { from, to } => {
                                if let Agent::Hijacker(h) = &mut self.agents[i] {
                                    h.changes.push((t, to));
                                }
                                self.emit(
                                    &id,
                                    EventKind::Phase,
                                    alloc::vec![("from", from.to_string()), ("to", to.to_string())],
                                );
                            }
                        }
                    }
                }
            }
        }

        for p in queue {
            self.deliver(p);
        }

        self.air = self.medium.take_air();
        for a in &mut self.agents {
            if let Agent::Hijacker(h) = a {
                h.state.observe(t, &self.air, h.tx);
            }
        }

        if let Some(det) = self.scenario.defense.detector {
            for i in 0..self.agents.len() {
                let Agent::Gcs(g) = &self.agents[i] else {
                    continue;
                };
                let stats = self.medium.stats(g.tx).expect("registered");
                let alert = detect_jamming(stats, det.window, det.threshold, t);
                let Agent::Gcs(g) = &mut self.agents[i] else {
                    unreachable!()
                };
                let rising = alert.is_some() && !g.alert_active;
                g.alert_active = alert.is_some();
                if let (true, Some(a)) = (rising, alert) {
                    g.alerts += 1;
                    g.first_alert_at.get_or_insert(t);
                    let id = g.id.clone();
                    self.emit(
                        &id,
                        EventKind::Alert,
                        alloc::vec![
                            ("per", format!("{:.3}", a.per)),
                            ("window", a.window.to_string())
                        ],
                    );
                }
            }
        }

        self.tick += 1;
    }

    fn deliver(&mut self, p: Pending) {
        let t = self.tick;
        let (tx, identity, draw) = match &mut self.agents[p.from] {
            Agent::Gcs(g) => (g.tx, g.identity, g.draws.random::<f64>()),
            Agent::Hijacker(h) => (h.tx, h.config.identity, h.draws.random::<f64>()),
            _ => unreachable!("only stations and attackers transmit"),
        };
        let outcome = self
            .medium
            .transmit_frame(tx, p.to, &p.packet, &self.occupancy, draw)
            .expect("engine only sends valid frames");

        let mut accepted = false;
        if let DeliveryOutcome::Delivered { receiver, .. } = outcome {
            let idx = self
                .agents
                .iter()
                .position(|a| matches!(a, Agent::Drone(d) if d.tx == receiver))
                .expect("receivers are drones");
            let Agent::Drone(d) = &mut self.agents[idx] else {
                unreachable!()
            };
            accepted = p.command.is_some() && accepts_command(&d.state, identity);
            let next = drone_transition(
                &d.state,
                &d.params,
                &DroneEvent::FrameRx {
                    sender: identity,
                    command: p.command,
                },
            );
            if accepted {
                d.accepted += 1;
                let id = d.id.clone();
                let details = match p.command {
                    Some(Command::Setpoint(s)) => {
                        d.last_delivered = Some(s);
                        alloc::vec![
                            ("from", identity.to_string()),
                            ("roll", format!("{}", s.roll)),
                            ("pitch", format!("{}", s.pitch)),
                            ("yaw", format!("{}", s.yaw)),
                            ("thrust", s.thrust.to_string()),
                        ]
                    }
                    Some(Command::Mission(m)) => alloc::vec![
                        ("from", identity.to_string()),
                        ("index", m.index.to_string()),
                        ("action", m.action.as_str().into()),
                    ],
                    None => unreachable!(),
                };
                let kind = match p.command {
                    Some(Command::Setpoint(_)) => EventKind::SetpointRx,
                    _ => EventKind::MissionRx,
                };
                self.emit(&id, kind, details);
            }
            self.set_drone(idx, next, false);
        }

        match &mut self.agents[p.from] {
            Agent::Gcs(g) => {
                if let Some(GcsEvent::MissionComplete) = g.gcs.on_outcome(t, outcome.is_delivered())
                {
                    g.mission_complete_at = Some(t);
                    let details =
                        alloc::vec![("instructions", g.gcs.mission_progress().to_string())];
                    let id = g.id.clone();
                    self.emit(&id, EventKind::MissionComplete, details);
                }
            }
            Agent::Hijacker(h) => h.state.on_outcome(accepted),
            _ => {}
        }
    }

    /// Runs to the scenario's duration.
    pub fn run_to_end(&mut self) {
        while !self.is_finished() {
            self.step();
        }
    }

    pub fn metrics(&self) -> Metrics {
        let mut m = Metrics {
            ticks: self.tick,
            seed: self.seed,
            ..Metrics::default()
        };
        for a in &self.agents {
            match a {
                Agent::Drone(d) => m.drones.push(DroneMetrics {
                    drone: d.id.clone(),
                    status: d.state.status,
                    controlling_address: d.state.controlling_address,
                    last_setpoint: d.state.last_setpoint,
                    last_delivered_setpoint: d.last_delivered,
                    commands_accepted: d.accepted,
                    status_changes: d.changes.clone(),
                }),
                Agent::Gcs(g) => {
                    let stats = self.medium.stats(g.tx).expect("registered");
                    let Agent::Drone(d) = &self.agents[g.drone] else {
                        unreachable!()
                    };
                    m.links.push(LinkMetrics {
                        gcs: g.id.clone(),
                        drone: d.id.clone(),
                        frames_sent: stats.frames_sent,
                        frames_acked: stats.frames_acked,
                        link_lost_at: g.link_lost_at,
                        mission_complete_at: g.mission_complete_at,
                        first_alert_at: g.first_alert_at,
                        alerts: g.alerts,
                    });
                }
                Agent::Jammer(j) => m.jammers.push(JammerMetrics {
                    jammer: j.id.clone(),
                    power_db: power_to_db(j.power),
                    onset: j.onset,
                }),
                Agent::Hijacker(h) => m.hijackers.push(HijackerMetrics {
                    hijacker: h.id.clone(),
                    phase: h.state.phase,
                    phase_changes: h.changes.clone(),
                    target: h.state.target.map(|d| d.address),
                }),
            }
        }
        m
    }

    pub fn into_outputs(self) -> (Trace, Metrics) {
        let metrics = self.metrics();
        (self.trace, metrics)
    }
}

impl Airspace for Simulation {
    fn now(&self) -> u64 {
        self.tick
    }

    fn advance(&mut self) -> Vec<AirFrame> {
        self.step();
        self.air.clone()
    }
}

/// Runs `scenario` to completion, optionally under another seed.
pub fn run(scenario: &Scenario, seed: Option<u64>) -> Result<(Trace, Metrics), ValidationError> {
    let mut sim = Simulation::new(scenario, seed)?;
    sim.run_to_end();
    Ok(sim.into_outputs())
}
