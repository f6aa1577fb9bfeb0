//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Criteria 1-9 run in process with seed 42; criterion 10 runs
//! `hats verify --suite all --seed 42` twice and compares the bytes.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hats::suites::run_criterion;

const SEED: u64 = 42;

fn limit(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 | 3 => 10,
        2 => 60,
        4 => 30,
        5 | 6 => 300,
        7 => 600,
        _ => 120,
    })
}

fn verify_all() -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hats"))
        .args(["verify", "--suite", "all", "--seed", &SEED.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0 | 1) => Ok(out.stdout),
        _ => Err(String::from_utf8_lossy(&out.stderr).into_owned()),
    }
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in 1..=9u8 {
        let start = Instant::now();
        let (ok, summary) = match run_criterion(id, SEED) {
            Ok(r) => (r.passed, format!("{}: {}", r.name, r.summary)),
            Err(e) => (false, format!("error: {e}")),
        };
        let t = start.elapsed();
        let in_time = t <= limit(id);
        let ok = ok && in_time;
        let timing = if in_time { String::new() } else { format!(" over the {}s limit", limit(id).as_secs()) };
        println!("criterion {id:>2}: {} ({:.1}s{timing}) {summary}", if ok { "PASS" } else { "FAIL" }, t.as_secs_f64());
        if !ok {
            failed.push(id);
        }
    }

    let start = Instant::now();
    let (ok, summary) = match (verify_all(), verify_all()) {
        (Ok(a), Ok(b)) if a == b && !a.is_empty() => (true, format!("two invocations, {} identical bytes", a.len())),
        (Ok(a), Ok(b)) => (false, format!("reports differ ({} vs {} bytes)", a.len(), b.len())),
        (Err(e), _) | (_, Err(e)) => (false, format!("verify failed to run: {e}")),
    };
    println!("criterion 10: {} ({:.1}s) reproducibility: {summary}", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    if !ok {
        failed.push(10);
    }

    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
