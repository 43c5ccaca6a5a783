//! MWU on the padded matrix with the theory-compliant initial gap: play walks through the
//! periods 3, 4, …, 2m−1 one at a time and each period lasts far longer than the last.
//!
//! cargo run --release --example mwu_period_traversal -- [m] [alpha] [max_rounds]

use std::time::Instant;

use pdl::analysis::PaddedMonitor;
use pdl::constructions::{auto_gamma, padded_matrix};
use pdl::dynamics::{DynamicsConfig, Engine, LearningRate, RunOptions};
use pdl::regularizers::reg_range;
use pdl::RegularizerSpec;

fn main() -> pdl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().map_or(5, |s| s.parse().expect("m"));
    let alpha: f64 = args.get(1).map_or(0.0, |s| s.parse().expect("alpha"));
    let max_rounds: u64 = args.get(2).map_or(10_000_000, |s| s.parse().expect("max_rounds"));

    let gamma = auto_gamma(m, alpha, reg_range(&RegularizerSpec::Entropy, m))?;
    let padded = padded_matrix(m, gamma)?;
    let game = padded.game();
    println!("m = {m}, alpha = {alpha}, gamma = {gamma:.1} (round-1 gap {:.1})", gamma / m as f64);

    let config = DynamicsConfig {
        learning_rate: LearningRate::Schedule { alpha },
        horizon: max_rounds,
        ..DynamicsConfig::default()
    };
    let mut monitor = PaddedMonitor::new(&padded, 1.0 / (8.0 * m as f64)).stop_after(padded.last_period(), 1000);
    let start = Instant::now();
    let summary = Engine::new(&game, config)?.run(&mut monitor, &RunOptions::default())?;
    println!("{} rounds in {:.1?}", summary.rounds, start.elapsed());

    for s in &monitor.segmentation().segments {
        let open = if s.censored { " (open)" } else { "" };
        println!("period {:>2}: rounds {:>9}..={:<9} T = {}{open}", s.k, s.t_start, s.t_end, s.length);
    }
    match monitor.rounds_to_epsilon_ne() {
        Some(t) => println!("first 1/(8m)-equilibrium at round {t}"),
        None => println!("no 1/(8m)-equilibrium within {} rounds", summary.rounds),
    }
    for r in monitor.reports() {
        println!("{}", r.summary_line());
    }
    Ok(())
}
