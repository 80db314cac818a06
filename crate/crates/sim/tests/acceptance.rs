//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Golden traces live in `tests/golden/`; set `CRTP_SIM_BLESS=1` to rewrite
//! them from the current build.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crtp_sim::{load_scenario, scan_scenario};
use crtp_sim_core::agents::{DroneStatus, HijackPhase, JammerConfig};
use crtp_sim_core::crtp::{
    decode_packet, encode_packet, format_uri, parse_uri, Address, CrtpPacket, Datarate, RadioUri,
    MAX_RADIO_CHANNEL,
};
use crtp_sim_core::engine::{run, EventKind, Metrics, Trace};
use crtp_sim_core::medium::channel_to_frequency;
use crtp_sim_core::phy::{
    estimate_mutual_information, power_spectrum, power_to_db, single_tone, snr_db, Complex64,
    FirLowpass, Signal,
};
use crtp_sim_core::scenario::Scenario;

const SEEDS: u64 = 100;
const GOLDEN: [&str; 4] = [
    "jam_autonomous",
    "jam_manual",
    "hijack_manual",
    "hijack_autonomous",
];

type Outcome = Result<String, String>;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn scenario(name: &str) -> Scenario {
    let path = scenarios_dir().join(format!("{name}.toy"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run_seed(s: &Scenario, seed: u64) -> (Trace, Metrics) {
    run(s, Some(seed)).expect("shipped scenarios validate")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn random_address(rng: &mut ChaCha8Rng) -> Address {
    Address(rng.random())
}

fn c1_codec() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..10_000 {
        let len = rng.random_range(0..=30);
        let p = CrtpPacket {
            port: rng.random_range(0..16),
            link: rng.random_range(0..4),
            channel: rng.random_range(0..4),
            payload: (0..len).map(|_| rng.random()).collect(),
        };
        let bytes = encode_packet(&p).map_err(|e| format!("packet {i}: encode failed: {e}"))?;
        ensure(bytes.len() <= 32, || {
            format!("packet {i}: frame of {} bytes", bytes.len())
        })?;
        let back = decode_packet(&bytes).map_err(|e| format!("packet {i}: decode failed: {e}"))?;
        ensure(back == p, || {
            format!("packet {i}: round trip changed {p:?}")
        })?;
    }
    for len in 33..=64 {
        let frame: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        ensure(decode_packet(&frame).is_err(), || {
            format!("{len}-byte frame accepted")
        })?;
        let p = CrtpPacket {
            port: 0,
            link: 0,
            channel: 0,
            payload: vec![0; len - 1],
        };
        ensure(encode_packet(&p).is_err(), || {
            format!("encoded a {len}-byte frame")
        })?;
    }
    for i in 0..1_000 {
        let u = RadioUri {
            index: rng.random_range(0..1000),
            ..RadioUri::radio(
                rng.random_range(0..=MAX_RADIO_CHANNEL),
                Datarate::ALL[rng.random_range(0..3)],
                random_address(&mut rng),
            )
            .unwrap()
        };
        let text = format_uri(&u);
        let back = parse_uri(&text).map_err(|e| format!("uri {i} `{text}`: {e}"))?;
        ensure(back == u, || {
            format!("uri {i} `{text}` changed on round trip")
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 5.0)?;
    Ok(format!(
        "1e4 packets, 32 oversize frames, 1e3 URIs in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn c2_channels() -> Outcome {
    ensure(channel_to_frequency(81) == Ok(2481), || {
        format!("channel 81 maps to {:?}", channel_to_frequency(81))
    })?;
    let mut prev = None;
    for ch in 0..=MAX_RADIO_CHANNEL {
        let f = channel_to_frequency(ch).map_err(|e| format!("channel {ch}: {e}"))?;
        if let Some(p) = prev {
            ensure(f > p, || format!("not monotone at channel {ch}"))?;
        }
        prev = Some(f);
    }
    ensure(channel_to_frequency(MAX_RADIO_CHANNEL + 1).is_err(), || {
        "channel 126 accepted".into()
    })?;
    Ok("81 -> 2481 MHz, strictly increasing over 0..=125".into())
}

fn c3_scan() -> Outcome {
    let s = scenario("fig2_scan");
    let start = Instant::now();
    let found = scan_scenario(&s, None, &Datarate::ALL, 2).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let mut expected: Vec<_> = s
        .stations()
        .filter_map(|g| s.drone(&g.drone))
        .map(|d| (d.uri.address, d.uri.channel, d.uri.datarate))
        .collect();
    expected.sort_by_key(|e| (e.0 .0, e.1, e.2 as u8));
    expected.dedup();
    let mut got: Vec<_> = found
        .iter()
        .map(|d| (d.address, d.channel, d.datarate))
        .collect();
    got.sort_by_key(|e| (e.0 .0, e.1, e.2 as u8));
    ensure(got == expected, || {
        format!("scan found {got:?}, roster has {expected:?}")
    })?;
    within(elapsed, 1.0)?;
    Ok(format!(
        "{} links found, matches roster, {:.3} s",
        got.len(),
        elapsed.as_secs_f64()
    ))
}

fn over_seeds<F>(name: &str, check: F) -> Result<(), String>
where
    F: Fn(&Trace, &Metrics) -> Result<(), String> + Sync,
{
    let s = scenario(name);
    let failures: Vec<String> = (0..SEEDS)
        .into_par_iter()
        .filter_map(|seed| {
            let (trace, m) = run_seed(&s, seed);
            check(&trace, &m)
                .err()
                .map(|e| format!("{name} seed {seed}: {e}"))
        })
        .collect();
    match failures.first() {
        None => Ok(()),
        Some(first) => Err(format!("{} failing seeds, first {first}", failures.len())),
    }
}

fn drone<'a>(m: &'a Metrics, id: &str) -> &'a crtp_sim_core::engine::DroneMetrics {
    m.drone(id).expect("drone present")
}

fn c4_outcomes() -> Outcome {
    let start = Instant::now();
    over_seeds("jam_autonomous", |_, m| {
        let d = drone(m, "cf");
        ensure(d.status == DroneStatus::Crashed, || {
            format!("ended {}", d.status)
        })
    })?;
    over_seeds("jam_manual", |trace, m| {
        let d = drone(m, "cf");
        ensure(d.status == DroneStatus::Suspended, || {
            format!("ended {}", d.status)
        })?;
        let delivered = d
            .last_delivered_setpoint
            .ok_or_else(|| "no setpoint delivered".to_string())?;
        ensure(d.last_setpoint == delivered, || {
            format!("holds {} but last delivered {delivered}", d.last_setpoint)
        })?;
        let last_rx = trace
            .of("cf")
            .filter(|e| e.kind == EventKind::SetpointRx)
            .last()
            .ok_or_else(|| "no setpoint_rx in trace".to_string())?;
        let logged = [
            last_rx.get("roll").map(String::from),
            last_rx.get("pitch").map(String::from),
            last_rx.get("yaw").map(String::from),
            last_rx.get("thrust").map(String::from),
        ];
        let held = [
            Some(delivered.roll.to_string()),
            Some(delivered.pitch.to_string()),
            Some(delivered.yaw.to_string()),
            Some(delivered.thrust.to_string()),
        ];
        ensure(logged == held, || {
            format!("trace shows {logged:?}, retained {delivered}")
        })
    })?;
    let attacker = scenario("hijack_manual")
        .hijackers()
        .next()
        .map(|h| h.config.identity)
        .ok_or("hijack_manual has no hijacker")?;
    over_seeds("hijack_manual", |_, m| {
        let d = drone(m, "cf");
        ensure(d.status == DroneStatus::Hijacked, || {
            format!("ended {}", d.status)
        })?;
        ensure(d.controlling_address == Some(attacker), || {
            format!("controller {:?}", d.controlling_address)
        })
    })?;
    over_seeds("hijack_autonomous", |_, m| {
        let d = drone(m, "cf");
        ensure(d.status == DroneStatus::Crashed, || {
            format!("ended {}", d.status)
        })?;
        let h = m.hijackers.first().ok_or("no hijacker metrics")?;
        ensure(h.entered(HijackPhase::Control).is_none(), || {
            "hijacker reached Control".into()
        })
    })?;
    let elapsed = start.elapsed();
    within(elapsed, 30.0)?;
    Ok(format!(
        "4 scenarios x {SEEDS} seeds as expected, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Signal {
    let amp: f64 = rng.random_range(0.01..10.0);
    let samples = (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * amp, im * amp)
        })
        .collect();
    Signal::new(samples, 1e6)
}

fn c5_signal_math() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let x = random_signal(&mut rng, 4096);
    let equal = snr_db(&x, &x.scaled(-1.0))
        .map_err(|e| e.to_string())?
        .value();
    ensure(equal.abs() <= 1e-9, || {
        format!("equal power gives {equal} dB")
    })?;

    for i in 0..1_000 {
        let x = random_signal(&mut rng, 256);
        let j = random_signal(&mut rng, 256);
        let c: f64 = rng.random_range(0.001..1000.0);
        let xj = snr_db(&x, &j).unwrap().value();
        let jx = snr_db(&j, &x).unwrap().value();
        ensure((xj + jx).abs() <= 1e-9, || {
            format!("pair {i}: {xj} vs {jx}")
        })?;
        let scaled = snr_db(&x.scaled(c), &j.scaled(c)).unwrap().value();
        ensure((scaled - xj).abs() <= 1e-9, || {
            format!("pair {i}: scaling moved {xj} to {scaled}")
        })?;
    }

    let mut worst_parseval: f64 = 0.0;
    for _ in 0..20 {
        let s = random_signal(&mut rng, 1024 * 8);
        let total = power_spectrum(&s, 1024)
            .map_err(|e| e.to_string())?
            .total_power();
        worst_parseval = worst_parseval.max((total - s.mean_power()).abs() / s.mean_power());
    }
    ensure(worst_parseval <= 1e-6, || {
        format!("Parseval error {worst_parseval:e}")
    })?;

    let n = 1_000_000;
    let mut worst_mi: f64 = 0.0;
    for snr in [0.0f64, 10.0, 20.0] {
        let noise_sd = 10f64.powf(-snr / 20.0);
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x + noise_sd * z
            })
            .collect();
        let mi = estimate_mutual_information(&xs, &ys, 256).map_err(|e| e.to_string())?;
        let expected = 0.5 * (1.0 + 10f64.powf(snr / 10.0)).log2();
        let err = (mi - expected).abs();
        ensure(err <= 0.05, || {
            format!("MI at {snr} dB: {mi:.4} bits, expected {expected:.4}")
        })?;
        worst_mi = worst_mi.max(err);
    }

    let elapsed = start.elapsed();
    within(elapsed, 60.0)?;
    Ok(format!(
        "SNR identities on 1e3 pairs, Parseval err {worst_parseval:.1e}, MI err {worst_mi:.4} bits, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn tone_gain_db(filter: &FirLowpass, cfg: &JammerConfig, freq: f64) -> Result<f64, String> {
    let fft = 1024;
    let guard = filter.taps().len();
    let duration = (fft * 16 + 2 * guard) as f64 / cfg.sample_rate;
    let input = single_tone(freq, cfg.sample_rate, duration, 1.0).map_err(|e| e.to_string())?;
    let output = filter.apply(&input);
    let trim = |s: &Signal| Signal::new(s.samples[guard..guard + fft * 16].to_vec(), s.sample_rate);
    let sin = power_spectrum(&trim(&input), fft).map_err(|e| e.to_string())?;
    let sout = power_spectrum(&trim(&output), fft).map_err(|e| e.to_string())?;
    // A Nyquist tone lands in the -fs/2 bin, so take the input peak rather than the nearest bin.
    let k = sin.peak_bin();
    Ok(power_to_db(sout.power[k]) - power_to_db(sin.power[k]))
}

fn c6_filter() -> Outcome {
    let cfg = JammerConfig::default();
    let filter = FirLowpass::design(cfg.sample_rate, cfg.cutoff_hz, cfg.transition_hz)
        .map_err(|e| e.to_string())?;
    let stop = tone_gain_db(&filter, &cfg, 5e6)?;
    let pass = tone_gain_db(&filter, &cfg, 2e6)?;
    ensure(stop <= -40.0, || {
        format!("5 MHz tone only {:.1} dB down", -stop)
    })?;
    ensure(pass.abs() <= 1.0, || {
        format!("2 MHz tone changed by {pass:.3} dB")
    })?;
    Ok(format!("5 MHz {stop:.1} dB, 2 MHz {pass:+.4} dB"))
}

fn c7_defenses() -> Outcome {
    for name in ["jam_autonomous_safe", "jam_manual_safe"] {
        over_seeds(name, |_, m| {
            let d = drone(m, "cf");
            ensure(d.status == DroneStatus::Landed, || {
                format!("ended {}", d.status)
            })?;
            ensure(d.reached(DroneStatus::Crashed).is_none(), || {
                "crashed".into()
            })
        })?;
    }

    let (_, m) = run_seed(&scenario("hop_jam"), 1);
    let pdr = m
        .link("gcs")
        .and_then(|l| l.pdr())
        .ok_or("hop_jam sent no frames")?;
    ensure(pdr >= 0.9, || format!("hopping PDR {pdr:.4}"))?;

    let s = scenario("jam_detect");
    let window = s
        .defense
        .detector
        .map(|d| d.window)
        .ok_or("detector not enabled")?;
    let ack_timeout = s
        .stations()
        .next()
        .map(|g| g.ack_timeout)
        .ok_or("no station")?;
    let (_, m) = run_seed(&s, 1);
    let onset = m
        .jammers
        .first()
        .and_then(|j| j.onset)
        .ok_or("jammer never started")?;
    let alert = m
        .link("gcs")
        .and_then(|l| l.first_alert_at)
        .ok_or("no alert raised")?;
    let limit = onset + window as u64 + ack_timeout as u64;
    ensure(alert >= onset && alert <= limit, || {
        format!("alert at {alert}, onset {onset}, limit {limit}")
    })?;

    Ok(format!(
        "safe mode Landed x {SEEDS} seeds x 2, hopping PDR {pdr:.4}, alert {} ticks after onset",
        alert - onset
    ))
}

fn c8_determinism() -> Outcome {
    let dir = scenarios_dir();
    let mut names: Vec<String> = fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            (p.extension()? == "toy").then(|| p.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    for name in &names {
        let s = scenario(name);
        let a = run(&s, None).map_err(|e| e.to_string())?.0.to_string();
        let b = run(&s, None).map_err(|e| e.to_string())?.0.to_string();
        ensure(a == b, || format!("{name}: traces differ between runs"))?;
    }

    let bless = std::env::var_os("CRTP_SIM_BLESS").is_some();
    for name in GOLDEN {
        let trace = run(&scenario(name), None)
            .map_err(|e| e.to_string())?
            .0
            .to_string();
        let path = golden_dir().join(format!("{name}.tsv"));
        if bless {
            fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
            fs::write(&path, &trace).map_err(|e| e.to_string())?;
            continue;
        }
        let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if want != trace {
            let line = want
                .lines()
                .zip(trace.lines())
                .position(|(a, b)| a != b)
                .unwrap_or_else(|| want.lines().count().min(trace.lines().count()));
            return Err(format!(
                "{name}: differs from golden trace at line {}",
                line + 1
            ));
        }
    }
    Ok(format!(
        "{} scenarios byte-identical across runs, {} golden traces {}",
        names.len(),
        GOLDEN.len(),
        if bless { "rewritten" } else { "match" }
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("codec round trip", c1_codec),
        ("channel to frequency", c2_channels),
        ("scanner completeness", c3_scan),
        ("attack outcome matrix", c4_outcomes),
        ("signal math", c5_signal_math),
        ("jammer filter", c6_filter),
        ("defenses", c7_defenses),
        ("determinism", c8_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
