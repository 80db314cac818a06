//! Trace, metrics and spectrum files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crtp_sim_core::agents::Discovery;
use crtp_sim_core::engine::{EventKind, Metrics, Trace};
use crtp_sim_core::phy::{power_to_db, Spectrum};

pub const TRACE_FILE: &str = "trace.tsv";
pub const METRICS_FILE: &str = "metrics.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub trace: PathBuf,
    pub metrics: PathBuf,
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn metrics_csv(metrics: &Metrics) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["entity", "metric", "value"])
        .map_err(csv_err)?;
    for (entity, metric, value) in metrics.rows() {
        w.write_record([entity.as_str(), metric, value.as_str()])
            .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

/// Writes `trace.tsv` and `metrics.csv` into `dir`, creating it if needed.
pub fn write_outputs(trace: &Trace, metrics: &Metrics, dir: &Path) -> io::Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let files = OutputFiles {
        trace: dir.join(TRACE_FILE),
        metrics: dir.join(METRICS_FILE),
    };
    fs::write(&files.trace, trace.to_string())?;
    fs::write(&files.metrics, metrics_csv(metrics)?)?;
    Ok(files)
}

pub fn write_spectrum_csv(spectrum: &Spectrum, path: &Path) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["frequency_hz", "power", "power_db"])
        .map_err(csv_err)?;
    for (f, p) in spectrum.bin_frequencies.iter().zip(&spectrum.power) {
        w.write_record([
            f.to_string(),
            format!("{p:e}"),
            format!("{:.3}", power_to_db(*p)),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// Aligned table in the sniffer's column layout.
pub fn discovery_table(found: &[Discovery]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>3} {:>5} {:>3} {:>7}",
        "ADDRESS", "CH", "RATE", "PL", "PACKETS"
    );
    for d in found {
        let _ = writeln!(
            out,
            "{:<16} {:>3} {:>5} {:>3} {:>7}",
            d.address.to_string(),
            d.channel,
            d.datarate.as_str(),
            d.payload_len,
            d.packets_seen
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub tick: u64,
    pub entity: String,
    pub kind: String,
    pub details: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>, TraceParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.is_empty() {
            continue;
        }
        let err = |message: &str| TraceParseError {
            line: i + 1,
            message: message.into(),
        };
        let mut fields = raw.split('\t');
        let tick = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("bad tick"))?;
        let entity = fields
            .next()
            .ok_or_else(|| err("missing entity"))?
            .to_string();
        let kind = fields
            .next()
            .ok_or_else(|| err("missing kind"))?
            .to_string();
        if EventKind::parse(&kind).is_none() {
            return Err(err("unknown event kind"));
        }
        let details = fields
            .map(|f| {
                f.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| err("detail without `=`"))
            })
            .collect::<Result<_, _>>()?;
        out.push(TraceLine {
            tick,
            entity,
            kind,
            details,
        });
    }
    Ok(out)
}

/// Human-readable digest of a trace: event counts per entity and the
/// milestones that matter for outcomes.
pub fn summarize_trace(lines: &[TraceLine]) -> String {
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut last_status: BTreeMap<&str, &str> = BTreeMap::new();
    let mut milestones = Vec::new();
    for l in lines {
        *counts.entry((&l.entity, &l.kind)).or_default() += 1;
        let get = |k: &str| {
            l.details
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
        };
        match l.kind.as_str() {
            "status" => {
                if let Some(to) = get("to") {
                    last_status.insert(&l.entity, to);
                    milestones.push(format!("{:>6}  {:<10} status -> {to}", l.tick, l.entity));
                }
            }
            "phase" => milestones.push(format!(
                "{:>6}  {:<10} phase -> {}",
                l.tick,
                l.entity,
                get("to").unwrap_or("?")
            )),
            "setpoint_rx" | "mission_rx" => {}
            other => milestones.push(format!("{:>6}  {:<10} {other}", l.tick, l.entity)),
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "events: {}", lines.len());
    if let Some(last) = lines.last() {
        let _ = writeln!(out, "last tick: {}", last.tick);
    }
    let _ = writeln!(out, "\ncounts:");
    for ((entity, kind), n) in &counts {
        let _ = writeln!(out, "  {entity:<10} {kind:<16} {n}");
    }
    if !last_status.is_empty() {
        let _ = writeln!(out, "\nfinal status:");
        for (entity, status) in &last_status {
            let _ = writeln!(out, "  {entity:<10} {status}");
        }
    }
    let _ = writeln!(out, "\nmilestones:");
    for m in milestones {
        let _ = writeln!(out, "{m}");
    }
    out
}
