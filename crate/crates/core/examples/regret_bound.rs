//! FTRL against an adversarial utility stream (the action that did worst so far pays 1):
//! realized regret stays below R/η⁽ᵀ⁾ + Σ η⁽ᵗ⁾‖u⁽ᵗ⁾‖²_* for every regularizer.
//!
//! cargo run --release --example regret_bound -- [m] [rounds]

use pdl::analysis::{Check, RegretBoundCheck};
use pdl::dynamics::{rate, step_ftrl, LearnerState, LearningRate};
use pdl::games::uniform;
use pdl::regularizers::reg_range;
use pdl::RegularizerSpec;

fn main() -> pdl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().map_or(3, |s| s.parse().expect("m"));
    let rounds: u64 = args.get(1).map_or(10_000, |s| s.parse().expect("rounds"));
    let lr = LearningRate::Schedule { alpha: 0.5 };

    for reg in [RegularizerSpec::Entropy, RegularizerSpec::Euclidean, RegularizerSpec::Log, RegularizerSpec::Tsallis { q: 0.5 }] {
        let mut state = LearnerState::new(uniform(m));
        let mut check = RegretBoundCheck::new(0, reg_range(&reg, m), reg.norm());
        for t in 1..=rounds {
            let cum = state.cumulative_values();
            let worst = (0..m).min_by(|&a, &b| cum[a].total_cmp(&cum[b])).unwrap();
            let u: Vec<f64> = (0..m).map(|a| if a == worst { 1.0 } else { 0.0 }).collect();
            let eta = rate(lr, t);
            step_ftrl(&mut state, &u, eta, &reg)?;
            check.push(t, &u, eta, state.regret());
        }
        let r = check.report();
        println!("{reg:>16}: regret {:.3}, bound {:.3}", r.details["final_regret"], r.details["final_bound"]);
        println!("  {}", r.summary_line());
    }
    Ok(())
}
