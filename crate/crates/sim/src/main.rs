use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crtp_sim::{
    discovery_table, jammer_spectrum, load_scenario, parse_trace, scan_scenario, summarize_trace,
    write_outputs, write_spectrum_csv, LoadError, SpectrumError,
};
use crtp_sim_core::crtp::Datarate;
use crtp_sim_core::engine::{run, Metrics};
use crtp_sim_core::scenario::Scenario;

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Deterministic simulator for CRTP radio links under jamming and hijacking.
#[derive(Debug, Parser)]
#[command(name = "crtp-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its trace and metrics.
    Run(RunArgs),
    /// Sweep every channel and list the links heard.
    Scan(ScanArgs),
    /// Power spectrum of a jammer's transmit chain as CSV.
    Spectrum(SpectrumArgs),
    /// Summarize a trace file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive-exclusive seed range `A..B`, run in parallel.
    #[arg(long, value_parser = parse_range)]
    seeds: Option<(u64, u64)>,
    /// Output directory; defaults to $CRTP_SIM_OUT when set.
    #[arg(long, env = "CRTP_SIM_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "250K,1M,2M")]
    rates: Vec<Datarate>,
    #[arg(long, default_value_t = 2)]
    dwell: u32,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Jammer id.
    #[arg(long)]
    entity: String,
    #[arg(long, default_value_t = 1024)]
    fft: usize,
    /// FFT blocks averaged.
    #[arg(long, default_value_t = 64)]
    blocks: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    trace: PathBuf,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.parse().map_err(|_| format!("bad start `{a}`"))?;
    let b: u64 = b.parse().map_err(|_| format!("bad end `{b}`"))?;
    if b <= a {
        return Err("empty range".into());
    }
    Ok((a, b))
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Io(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn summary(metrics: &Metrics) -> String {
    let mut out = String::new();
    for d in &metrics.drones {
        let ctrl = d
            .controlling_address
            .map(|a| a.to_string())
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "drone {:<10} {:<10} controller {ctrl}",
            d.drone,
            d.status.to_string()
        );
    }
    for l in &metrics.links {
        let pdr = l
            .pdr()
            .map(|p| format!("{p:.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "link  {:<10} pdr {pdr}  sent {}  lost {}",
            l.gcs,
            l.frames_sent,
            l.frames_lost()
        );
    }
    for h in &metrics.hijackers {
        let _ = writeln!(out, "hijacker {:<7} phase {}", h.hijacker, h.phase);
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&args.scenario)?;
    match args.seeds {
        None => {
            let (trace, metrics) =
                run(&scenario, args.seed).map_err(|e| Failure::Validation(e.to_string()))?;
            if let Some(dir) = &args.out {
                write_outputs(&trace, &metrics, dir).map_err(|e| io_failure(dir, e))?;
            }
            print!("{}", summary(&metrics));
        }
        Some((a, b)) => {
            let results: Vec<_> = (a..b)
                .into_par_iter()
                .map(|seed| run_seed(&scenario, seed, args.out.as_deref()))
                .collect();
            for (seed, r) in (a..b).zip(results) {
                let metrics = r?;
                println!("seed {seed}");
                print!("{}", summary(&metrics));
            }
        }
    }
    Ok(())
}

fn run_seed(scenario: &Scenario, seed: u64, out: Option<&Path>) -> Result<Metrics, Failure> {
    let (trace, metrics) =
        run(scenario, Some(seed)).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Some(dir) = out {
        let dir = dir.join(format!("seed-{seed}"));
        write_outputs(&trace, &metrics, &dir).map_err(|e| io_failure(&dir, e))?;
    }
    Ok(metrics)
}

fn cmd_scan(args: ScanArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&args.scenario)?;
    if args.dwell == 0 {
        return Err(Failure::Validation(
            "invalid dwell: must be at least 1 tick".into(),
        ));
    }
    let found = scan_scenario(&scenario, args.seed, &args.rates, args.dwell)?;
    print!("{}", discovery_table(&found));
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&args.scenario)?;
    let spectrum = jammer_spectrum(&scenario, &args.entity, args.fft, args.blocks, args.seed)
        .map_err(|e: SpectrumError| Failure::Validation(e.to_string()))?;
    write_spectrum_csv(&spectrum, &args.out).map_err(|e| io_failure(&args.out, e))?;
    let peak = spectrum.peak_bin();
    println!(
        "{} bins, total power {:.3} dB, peak at {:.0} Hz",
        spectrum.power.len(),
        crtp_sim_core::phy::power_to_db(spectrum.total_power()),
        spectrum.bin_frequencies[peak]
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.trace).map_err(|e| io_failure(&args.trace, e))?;
    let lines = parse_trace(&text).map_err(|e| Failure::Validation(e.to_string()))?;
    print!("{}", summarize_trace(&lines));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
