//! Entities stepped by the engine: drones, ground stations, jammers and
//! the hijacker with its scanner.

mod drone;
mod gcs;
mod hijacker;
mod jammer;
mod scanner;

pub use drone::{
    accepts_command, drone_transition, Command, DroneEvent, DroneParams, DroneState, DroneStatus,
    FlightMode, MissionAction, MissionInstruction,
};
pub use gcs::{mission_instruction, Gcs, GcsConfig, GcsEvent, GcsFrame, GcsLink, GcsStep};
pub use hijacker::{hijacker_transition, HijackAction, HijackPhase, HijackerConfig, HijackerState};
pub use jammer::{interference_power, jammer_signal, jammer_step, JammerConfig};
pub use scanner::{scan_all, Airspace, Discovery, Scanner};
