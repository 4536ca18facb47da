//! Compares the scaled CLS errors of a Monte Carlo campaign with draws from
//! their limit law.

use inar2::{run_campaign, AutoregressiveParams, CampaignConfig, InnovationModel};

fn main() -> inar2::Result<()> {
    let eps = InnovationModel::poisson(2.0)?;
    for (alpha, beta) in [(0.6, 0.4), (1.0, 0.0), (0.0, 1.0)] {
        let mut config = CampaignConfig::new(AutoregressiveParams::new(alpha, beta)?, eps.clone(), 1_000, 1_000, 5);
        config.mesh = 2_000;
        config.limit_replications = 2_000;
        let out = run_campaign(&config)?;
        println!("{:?} (undefined {})", out.report.class.regularity, out.report.undefined_count);
        for c in &out.report.coordinates {
            println!(
                "  {:<26} KS {:.4}  mean {:+.3} vs {:+.3}  var {:.3} vs {:.3}",
                c.statistic, c.ks_distance, c.empirical.mean, c.limit.mean, c.empirical.variance, c.limit.variance
            );
        }
    }
    Ok(())
}
