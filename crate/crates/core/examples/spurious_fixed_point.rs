//! A learner that has seen t rounds of one utility barely reacts to a single contrary
//! round: its movement shrinks like 1/t, so slow play is not evidence of equilibrium.
//!
//! cargo run --example spurious_fixed_point

use pdl::dynamics::{step_ftrl, LearnerState};
use pdl::RegularizerSpec;

fn main() -> pdl::Result<()> {
    let eta = 0.05;
    for reg in [RegularizerSpec::Entropy, RegularizerSpec::Euclidean, RegularizerSpec::Tsallis { q: 0.5 }] {
        println!("{reg}:");
        for t in [10u64, 100, 1000, 10_000] {
            let mut s = LearnerState::new(vec![0.5, 0.5]);
            let mut x = vec![0.5, 0.5];
            for _ in 0..t {
                x = step_ftrl(&mut s, &[1.0, 0.0], eta, &reg)?;
            }
            let y = step_ftrl(&mut s, &[0.0, 1.0], eta, &reg)?;
            let moved: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            println!("  t = {t:>6}: x[2] = {:.3e}, movement {moved:.3e}, t * movement {:.3e}", x[1], moved * t as f64);
        }
    }
    Ok(())
}
