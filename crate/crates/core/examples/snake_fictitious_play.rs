//! Fictitious play on the game induced by a snake in the n-cube: players walk the path one
//! vertex at a time and the time spent at vertex k grows at least like (k−1)!. The last
//! vertex is absorbing, so its dwell time is a lower bound set by the horizon.
//!
//! cargo run --release --example snake_fictitious_play -- [n] [max_rounds]

use pdl::analysis::SnakeMonitor;
use pdl::constructions::{find_snake, snake_game};
use pdl::dynamics::{Algorithm, DynamicsConfig, Engine, Init, RunOptions, TieBreak};

fn main() -> pdl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(4, |s| s.parse().expect("n"));
    let max_rounds: u64 = args.get(1).map_or(1_000_000, |s| s.parse().expect("max_rounds"));

    let path = find_snake(n, 50_000_000)?;
    println!("snake of length {} in the {n}-cube:", path.length());
    print!("{}", path.to_bitstrings());

    let game = snake_game(&path)?;
    let start = path.vertices[0];
    let config = DynamicsConfig {
        algorithm: Algorithm::FictitiousPlay,
        tie_break: TieBreak::AdversarialStay,
        init: Init::Pure((0..n).map(|i| (start >> i & 1) as usize).collect()),
        horizon: max_rounds,
        ..DynamicsConfig::default()
    };
    let mut monitor = SnakeMonitor::new(&path);
    let summary = Engine::new(&game, config)?.run(&mut monitor, &RunOptions::default())?;
    println!("{} rounds, final path position {:?}", summary.rounds, monitor.position());
    let mut factorial = 1u64;
    for (k, t) in monitor.dwell_times().iter().enumerate() {
        let k = k + 1;
        if k > 1 {
            factorial *= (k - 1) as u64;
        }
        match t {
            Some(t) => println!("  T_{k} = {t:>8}   (k-1)! = {factorial}"),
            None => println!("  T_{k} = unresolved"),
        }
    }
    if let Some((k, lower)) = monitor.open_dwell() {
        println!("  T_{k} >= {lower} (still there when the run ended)");
    }
    println!("{}", monitor.report().summary_line());
    Ok(())
}
