//! Do switch turns look different? Simulates sessions, extracts one row per
//! turn and runs a Mann-Whitney U test per variable, switch vs no switch.
//!
//! cargo run --release --example switch_statistics -- [sessions] [seed]

use handbrain::features::{extract_logs, Dataset};
use handbrain::sim::{generate_many, SimConfig, TruthPolicy};
use handbrain::stats::analysis_report;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sessions: u64 = args.next().map_or(Ok(10), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2), |s| s.parse())?;
    let cfg = SimConfig::default();
    let logs = generate_many(&TruthPolicy::default(), &cfg, "stats", seed, sessions)?;
    let rows = extract_logs(&logs, 3, &cfg.evaluator)?;
    print!("{}", analysis_report(&Dataset::new(rows)).to_markdown());
    Ok(())
}
