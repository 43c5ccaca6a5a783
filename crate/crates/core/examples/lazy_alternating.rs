//! Lazy alternating MWU: each player accepts a new strategy only when it gains at least ε
//! against the current opponent, so the number of updates is at most Φ_range/ε and the
//! first full sweep without updates certifies a 2ε-equilibrium.
//!
//! cargo run --release --example lazy_alternating -- [epsilon]

use pdl::analysis::LazyMonitor;
use pdl::dynamics::{DynamicsConfig, Engine, LearningRate, RunOptions, UpdateMode};
use pdl::{Game, Matrix};

fn main() -> pdl::Result<()> {
    let eps: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("epsilon"));
    let game = Game::identical_matrix(Matrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 3.0]])?)?;
    let config = DynamicsConfig {
        learning_rate: LearningRate::Schedule { alpha: 0.5 },
        update_mode: UpdateMode::Alternating,
        lazy_epsilon: Some(eps),
        horizon: 1_000_000,
        ..DynamicsConfig::default()
    };
    let phi_range = game.phi_range()?;
    let mut monitor = LazyMonitor::new(eps, phi_range, game.max_abs_payoff()).stop_on_certificate();
    let summary = Engine::new(&game, config)?.run(&mut monitor, &RunOptions::default())?;
    let o = monitor.outcome();
    println!("{} rounds, {} accepted updates (bound {:.1})", summary.rounds, o.updates, o.update_bound);
    println!("update rounds: {:?}", o.update_rounds);
    match (o.certified_round, o.nash_gap_at_certificate) {
        (Some(t), Some(gap)) => println!("certificate at round {t}: nash gap {gap:.3e} <= 2 eps = {}", 2.0 * eps),
        _ => println!("no certificate within the horizon"),
    }
    for r in monitor.reports() {
        println!("{}", r.summary_line());
    }
    Ok(())
}
