use core::fmt;

use crate::crtp::{
    decode_setpoint, Address, CodecError, CrtpPacket, Setpoint, PORT_COMMANDER,
    PORT_HIGH_LEVEL_COMMANDER,
};
use crate::defense::safe_mode_policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlightMode {
    /// Follows a mission script streamed by the GCS.
    Autonomous,
    /// Piloted through periodic setpoints.
    NonAutonomous,
}

impl FlightMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlightMode::Autonomous => "autonomous",
            FlightMode::NonAutonomous => "non_autonomous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DroneStatus {
    Idle,
    Flying,
    Suspended,
    Landing,
    Landed,
    Crashed,
    Hijacked,
}

impl DroneStatus {
    pub const ALL: [DroneStatus; 7] = [
        DroneStatus::Idle,
        DroneStatus::Flying,
        DroneStatus::Suspended,
        DroneStatus::Landing,
        DroneStatus::Landed,
        DroneStatus::Crashed,
        DroneStatus::Hijacked,
    ];

    pub fn is_terminal(&self) -> bool {
        matches!(self, DroneStatus::Crashed | DroneStatus::Landed)
    }

    /// Airborne and dependent on the radio link.
    pub fn is_linked_flight(&self) -> bool {
        matches!(
            self,
            DroneStatus::Flying | DroneStatus::Suspended | DroneStatus::Hijacked
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DroneStatus::Idle => "Idle",
            DroneStatus::Flying => "Flying",
            DroneStatus::Suspended => "Suspended",
            DroneStatus::Landing => "Landing",
            DroneStatus::Landed => "Landed",
            DroneStatus::Crashed => "Crashed",
            DroneStatus::Hijacked => "Hijacked",
        }
    }
}

impl fmt::Display for DroneStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MissionAction {
    Takeoff,
    Land,
    GoTo,
}

impl MissionAction {
    fn opcode(&self) -> u8 {
        match self {
            MissionAction::Takeoff => 1,
            MissionAction::Land => 2,
            MissionAction::GoTo => 4,
        }
    }

    fn from_opcode(op: u8) -> Option<Self> {
        match op {
            1 => Some(MissionAction::Takeoff),
            2 => Some(MissionAction::Land),
            4 => Some(MissionAction::GoTo),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MissionAction::Takeoff => "takeoff",
            MissionAction::Land => "land",
            MissionAction::GoTo => "goto",
        }
    }
}

/// One step of a mission script, carried on the high-level commander port
/// as `[opcode, index_lo, index_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MissionInstruction {
    pub index: u16,
    pub action: MissionAction,
}

impl MissionInstruction {
    pub fn to_packet(&self) -> CrtpPacket {
        let [lo, hi] = self.index.to_le_bytes();
        CrtpPacket {
            port: PORT_HIGH_LEVEL_COMMANDER,
            link: 0,
            channel: 0,
            payload: alloc::vec![self.action.opcode(), lo, hi],
        }
    }

    pub fn from_packet(p: &CrtpPacket) -> Option<Self> {
        if p.port != PORT_HIGH_LEVEL_COMMANDER || p.channel != 0 || p.payload.len() != 3 {
            return None;
        }
        Some(MissionInstruction {
            action: MissionAction::from_opcode(p.payload[0])?,
            index: u16::from_le_bytes([p.payload[1], p.payload[2]]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Setpoint(Setpoint),
    Mission(MissionInstruction),
}

impl Command {
    /// Interprets a received packet; anything but a commander setpoint or a
    /// mission instruction carries no command.
    pub fn from_packet(p: &CrtpPacket) -> Option<Command> {
        match p.port {
            PORT_COMMANDER => decode_setpoint(p).ok().map(Command::Setpoint),
            PORT_HIGH_LEVEL_COMMANDER => MissionInstruction::from_packet(p).map(Command::Mission),
            _ => None,
        }
    }

    pub fn to_packet(&self) -> Result<CrtpPacket, CodecError> {
        Ok(match self {
            Command::Setpoint(s) => crate::crtp::encode_setpoint(s),
            Command::Mission(m) => m.to_packet(),
        })
    }
}

/// Per-drone constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneParams {
    /// Identity of the legitimate ground station.
    pub owner: Address,
    pub loss_timeout: u32,
    pub land_duration: u32,
}

impl DroneParams {
    pub fn new(owner: Address) -> Self {
        DroneParams {
            owner,
            loss_timeout: 200,
            land_duration: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneState {
    pub mode: FlightMode,
    pub status: DroneStatus,
    pub controlling_address: Option<Address>,
    pub last_setpoint: Setpoint,
    pub ticks_since_rx: u32,
    pub safe_mode: bool,
    pub landing_ticks: u32,
}

impl DroneState {
    pub fn new(mode: FlightMode, status: DroneStatus, safe_mode: bool) -> Self {
        DroneState {
            mode,
            status,
            controlling_address: None,
            last_setpoint: Setpoint::default(),
            ticks_since_rx: 0,
            safe_mode,
            landing_ticks: 0,
        }
    }

    /// A drone already in flight under its owner's control.
    pub fn flying(mode: FlightMode, owner: Address, safe_mode: bool) -> Self {
        DroneState {
            controlling_address: Some(owner),
            ..DroneState::new(mode, DroneStatus::Flying, safe_mode)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DroneEvent {
    /// A frame reached the drone. `command` is `None` for link-level traffic.
    FrameRx {
        sender: Address,
        command: Option<Command>,
    },
    /// One tick elapsed.
    Tick,
}

/// Whether a command from `sender` would be obeyed.
///
/// There is no authentication: an idle or suspended drone takes commands
/// from anyone, and a piloted drone follows the most recent setpoint. A
/// drone flying a mission only listens to whoever started it.
pub fn accepts_command(state: &DroneState, sender: Address) -> bool {
    match state.status {
        DroneStatus::Crashed | DroneStatus::Landed | DroneStatus::Landing => false,
        DroneStatus::Idle | DroneStatus::Suspended => true,
        DroneStatus::Flying | DroneStatus::Hijacked => match state.mode {
            FlightMode::NonAutonomous => true,
            FlightMode::Autonomous => state.controlling_address == Some(sender),
        },
    }
}

pub fn drone_transition(
    state: &DroneState,
    params: &DroneParams,
    event: &DroneEvent,
) -> DroneState {
    let mut next = *state;
    match *event {
        DroneEvent::FrameRx { sender, command } => {
            let Some(command) = command else {
                return next;
            };
            if !accepts_command(state, sender) {
                return next;
            }
            next.controlling_address = Some(sender);
            next.ticks_since_rx = 0;
            next.status = if sender == params.owner {
                DroneStatus::Flying
            } else {
                DroneStatus::Hijacked
            };
            match command {
                Command::Setpoint(s) => next.last_setpoint = s,
                Command::Mission(m) if m.action == MissionAction::Land => {
                    next.status = DroneStatus::Landing;
                    next.landing_ticks = 0;
                }
                Command::Mission(_) => {}
            }
        }
        DroneEvent::Tick => match state.status {
            DroneStatus::Idle | DroneStatus::Crashed | DroneStatus::Landed => {}
            DroneStatus::Landing => {
                next.landing_ticks += 1;
                if next.landing_ticks >= params.land_duration {
                    next.status = DroneStatus::Landed;
                }
            }
            DroneStatus::Flying | DroneStatus::Suspended | DroneStatus::Hijacked => {
                next.ticks_since_rx = state.ticks_since_rx.saturating_add(1);
                if next.ticks_since_rx > params.loss_timeout {
                    if next.safe_mode {
                        next = safe_mode_policy(&next, true);
                    } else if state.status != DroneStatus::Suspended {
                        next.status = match state.mode {
                            FlightMode::Autonomous => DroneStatus::Crashed,
                            FlightMode::NonAutonomous => DroneStatus::Suspended,
                        };
                    }
                }
            }
        },
    }
    next
}
