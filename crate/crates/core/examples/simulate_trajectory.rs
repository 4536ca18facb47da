//! Simulates one unit-root path per regularity class and prints its derived
//! sequences.

use inar2::{derived_sequences, simulate, AutoregressiveParams, InnovationModel};

fn main() -> inar2::Result<()> {
    let eps = InnovationModel::poisson(2.0)?;
    for (alpha, beta) in [(0.6, 0.4), (1.0, 0.0), (0.0, 1.0)] {
        let params = AutoregressiveParams::new(alpha, beta)?;
        let path = simulate(&params, &eps, 12, 2024)?;
        let d = derived_sequences(&path, &eps)?;
        println!("alpha = {alpha}, beta = {beta}: {:?}", params.class().regularity);
        println!("  X_k: {:?}", path.observations());
        println!("  U_k: {:?}", &d.u[1..]);
        println!("  V_k: {:?}", &d.v[1..]);
        println!("  M_k: {:?}", d.m);
    }

    // Paths round-trip through the `k,x` CSV layout.
    let params = AutoregressiveParams::new(0.6, 0.4)?;
    let path = simulate(&params, &eps, 5, 1)?;
    let mut csv = Vec::new();
    path.write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}
