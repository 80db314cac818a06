//! Simulation core for Crazyflie-style CRTP radio links under jamming and
//! hijacking. Everything here is `no_std` + `alloc`; file formats, IO and
//! the command line live in the `crtp-sim` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod agents;
pub mod crtp;
pub mod defense;
pub mod engine;
pub mod medium;
pub mod phy;
pub mod rng;
pub mod scenario;
