//! File formats, output writers and helpers behind the `crtp-sim` command.

pub mod output;
pub mod scenario_file;

pub use output::{
    discovery_table, metrics_csv, parse_trace, summarize_trace, write_outputs, write_spectrum_csv,
    OutputFiles,
};
pub use scenario_file::{load_scenario, parse_scenario, LoadError};

use crtp_sim_core::agents::{jammer_signal, scan_all, Discovery};
use crtp_sim_core::crtp::Datarate;
use crtp_sim_core::engine::Simulation;
use crtp_sim_core::phy::{power_spectrum, PhyError, Spectrum};
use crtp_sim_core::rng::entity_seed;
use crtp_sim_core::scenario::Scenario;

/// Sweeps the band while the scenario runs, from tick 0.
pub fn scan_scenario(
    scenario: &Scenario,
    seed: Option<u64>,
    datarates: &[Datarate],
    dwell: u32,
) -> Result<Vec<Discovery>, LoadError> {
    let mut sim = Simulation::new(scenario, seed)?;
    Ok(scan_all(&mut sim, datarates, dwell))
}

#[derive(Debug, thiserror::Error)]
pub enum SpectrumError {
    #[error("no jammer named `{0}` in the scenario")]
    UnknownJammer(String),
    #[error(transparent)]
    Phy(#[from] PhyError),
}

/// Averaged power spectrum of a jammer's transmit chain, over `blocks`
/// FFT-sized blocks.
pub fn jammer_spectrum(
    scenario: &Scenario,
    jammer: &str,
    fft_size: usize,
    blocks: usize,
    seed: Option<u64>,
) -> Result<Spectrum, SpectrumError> {
    let spec = scenario
        .jammers()
        .find(|j| j.id == jammer)
        .ok_or_else(|| SpectrumError::UnknownJammer(jammer.into()))?;
    let cfg = &spec.config;
    let duration = (fft_size * blocks.max(1)) as f64 / cfg.sample_rate;
    let seed = entity_seed(seed.unwrap_or(scenario.seed), jammer);
    let signal = jammer_signal(cfg, duration, seed)?;
    Ok(power_spectrum(&signal, fft_size)?)
}
