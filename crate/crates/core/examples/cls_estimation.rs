//! CLS estimates for growing series lengths, with the scaled errors whose
//! limit laws the library samples.

use inar2::{estimate_cls, scaled_error_statistics, simulate, AutoregressiveParams, InnovationModel};

fn main() -> inar2::Result<()> {
    let eps = InnovationModel::poisson(2.0)?;
    let params = AutoregressiveParams::new(0.6, 0.4)?;
    let class = params.class();
    println!("{:>7} {:>10} {:>10} {:>10} {:>14} {:>14}", "n", "alpha_hat", "beta_hat", "rho_hat", "n(rho_hat-1)", "sqrt(n)(b-b0)");
    for n in [100, 1_000, 10_000, 100_000] {
        let path = simulate(&params, &eps, n, 99)?;
        let est = estimate_cls(&path, eps.mean());
        let [s1, s2] = scaled_error_statistics(&est, &params, &class)?;
        println!(
            "{n:>7} {:>10.5} {:>10.5} {:>10.5} {s1:>14.4} {s2:>14.4}",
            est.alpha_hat.unwrap(),
            est.beta_hat.unwrap(),
            est.rho_hat.unwrap()
        );
    }

    let path = simulate(&params, &eps, 500, 7)?;
    let report = estimate_cls(&path, eps.mean()).report();
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    Ok(())
}
