//! Exact first and second moments from the linear recursions, against the
//! closed-form mean and the i.i.d.-sum moment formulas.

use inar2::{exact_joint_moments, expected_value_exact, iid_sum_moments, putzer_power, AutoregressiveParams, InnovationModel};

fn main() -> inar2::Result<()> {
    let eps = InnovationModel::poisson(2.0)?;
    let params = AutoregressiveParams::new(0.6, 0.4)?;
    let table = exact_joint_moments(&params, &eps, 50, 2)?;
    println!("{:>4} {:>12} {:>12} {:>14}", "n", "E X_n", "closed form", "Var X_n");
    for row in table.rows.iter().step_by(10) {
        let var = row.e_xx.unwrap() - row.e_x * row.e_x;
        println!("{:>4} {:>12.6} {:>12.6} {:>14.6}", row.n, row.e_x, expected_value_exact(&params, eps.mean(), row.n)?, var);
    }

    println!("companion^10 for beta = 0.4: {:?}", putzer_power(0.4, 10));

    // A sum of 10 Poisson(2) draws is Poisson(20): central fourth moment
    // 3 (20)^2 + 20 = 1220 and mean 20.
    let central = [0.0, 2.0, 2.0, 14.0];
    println!("E (S - ES)^4 for N = 10: {}", iid_sum_moments(&central, 10, 4, true)?);
    println!("E S for N = 10: {}", iid_sum_moments(eps.raw_moments(), 10, 1, false)?);
    Ok(())
}
