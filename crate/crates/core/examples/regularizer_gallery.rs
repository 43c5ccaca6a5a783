//! The FTRL map x = argmax ⟨U, x⟩ − R(x)/η for each regularizer on one cumulative utility
//! vector: entropy and Tsallis stay interior, Euclidean reaches the boundary, and every
//! map preserves the order of U.
//!
//! cargo run --example regularizer_gallery

use pdl::analysis::order_violations;
use pdl::regularizers::{ftrl_argmax, ftrl_objective, reg_range};
use pdl::RegularizerSpec;

fn main() -> pdl::Result<()> {
    let u = [1.0, 0.5, 0.0, -1.0];
    println!("U = {u:?}");
    for reg in [RegularizerSpec::Entropy, RegularizerSpec::Euclidean, RegularizerSpec::Log, RegularizerSpec::Tsallis { q: 0.5 }] {
        println!("{reg} (range {:.4} on {} actions)", reg_range(&reg, u.len()), u.len());
        for eta in [0.1, 1.0, 10.0] {
            let x = ftrl_argmax(&reg, &u, eta)?;
            let (weak, strict) = order_violations(&u, &x);
            let shown: Vec<String> = x.iter().map(|p| format!("{p:.4}")).collect();
            println!(
                "  eta {eta:>4}: x = [{}] objective {:.5} order slack ({weak:.1e}, {strict:.1e})",
                shown.join(", "),
                ftrl_objective(&reg, &u, eta, &x)?
            );
        }
    }
    Ok(())
}
