//! The spiral matrix B_{m,r}, the padded matrix A built around B_{m−1,2}, and the gadget
//! weight that forces round-1 play onto the first row and column.
//!
//! cargo run --example spiral_and_padded -- [m]

use pdl::constructions::{auto_gamma, gamma_init, padded_matrix, spiral_matrix};
use pdl::regularizers::reg_range;
use pdl::{Matrix, RegularizerSpec};

fn show(a: &Matrix) {
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:>9}")).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> pdl::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(5, |s| s.parse().expect("odd m >= 5"));

    println!("B_{{{},2}}:", m - 1);
    show(&spiral_matrix(m - 1, 2)?.matrix);

    let r = reg_range(&RegularizerSpec::Entropy, m);
    let g1 = gamma_init(m, 0.0, r)?;
    let gamma = auto_gamma(m, 0.0, r)?;
    println!("entropy range ln {m} = {r:.6}; round-1 gap {g1:.4}; gadget weight {gamma:.4}");

    // A small weight keeps the printout readable; the structure does not depend on it.
    let small = padded_matrix(m, 100.0)?;
    println!("A with gamma = 100:");
    show(&small.matrix);
    for k in 3..=small.last_period() {
        let (i, j) = small.locator(k).expect("every payoff 3..=2m-1 appears once");
        println!("  payoff {k:>2} at ({}, {})", i + 1, j + 1);
    }
    let padded = padded_matrix(m, gamma)?;
    println!("theory A[m,m] = {}", padded.matrix.get(m - 1, m - 1));
    Ok(())
}
