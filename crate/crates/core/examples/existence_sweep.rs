//! Fraction of simulated paths admitting a unique CLS estimate, by length.
//!
//! Existence only needs one nonzero innovation among the first `n - 2`, so
//! all three classes share the curve `1 - P(eps = 0)^(n - 2)` under a common
//! seed.

use inar2::{existence_sweep, AutoregressiveParams, InnovationModel};

fn main() -> inar2::Result<()> {
    let eps = InnovationModel::geometric(0.5)?;
    let grid = [3, 5, 10, 20, 50];
    for (alpha, beta) in [(0.6, 0.4), (1.0, 0.0), (0.0, 1.0)] {
        let sweep = existence_sweep(&AutoregressiveParams::new(alpha, beta)?, &eps, &grid, 2_000, 3, true)?;
        let cells: Vec<String> = sweep.iter().map(|p| format!("n={}: {:.3}", p.n, p.fraction)).collect();
        println!("({alpha}, {beta}) {}", cells.join("  "));
    }
    Ok(())
}
