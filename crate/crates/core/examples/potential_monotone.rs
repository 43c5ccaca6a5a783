//! Simultaneous FTRL with η ≤ 1/L on a random identical-interest game: the potential never
//! decreases and the second-order path length stays below 2ηΦ_range.
//!
//! cargo run --release --example potential_monotone -- [m] [seed]

use pdl::analysis::{Check, ImprovementCheck, PathLengthCheck, PotentialMonotoneCheck};
use pdl::dynamics::{DynamicsConfig, Engine, LearningRate, Recorder, RunOptions, Thinning};
use pdl::games::smoothness_bound;
use pdl::{Game, Matrix, RegularizerSpec};
use rand::{Rng, SeedableRng};

fn main() -> pdl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().map_or(4, |s| s.parse().expect("m"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let game = Game::identical_matrix(Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0)))?;

    for reg in [RegularizerSpec::Entropy, RegularizerSpec::Euclidean, RegularizerSpec::Tsallis { q: 0.5 }] {
        let norm = reg.norm();
        let l = smoothness_bound(&game, norm)?;
        let eta = 1.0 / l;
        let config = DynamicsConfig {
            regularizer: reg,
            learning_rate: LearningRate::Constant { eta },
            horizon: 1000,
            ..DynamicsConfig::default()
        };
        let mut improvement = ImprovementCheck::new(eta, norm);
        let mut monotone = PotentialMonotoneCheck::new(eta, l, norm);
        let mut path = PathLengthCheck::new(eta, game.phi_range()?, norm);
        let mut rec = Recorder::new(Thinning::PowersOfTwo);
        let mut observers: Vec<&mut dyn pdl::dynamics::Observer> = vec![&mut improvement, &mut monotone, &mut path, &mut rec];
        Engine::new(&game, config)?.run(&mut observers, &RunOptions::default())?;
        println!("{reg}: L = {l:.4}, eta = {eta:.4}");
        let phi: Vec<String> = rec.records.iter().map(|r| format!("{}:{:.4}", r.round, r.potential.unwrap())).collect();
        println!("  potential {}", phi.join(" "));
        for r in [improvement.report(), monotone.report(), path.report()] {
            println!("  {}", r.summary_line());
        }
    }
    Ok(())
}
