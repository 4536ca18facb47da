//! Summaries of limit-law draws for each regularity class.

use inar2::limit::sample_limit_batch;
use inar2::stats::SampleSummary;
use inar2::{AutoregressiveParams, InnovationModel, LimitLaw, LimitModel};

fn main() -> inar2::Result<()> {
    let eps = InnovationModel::poisson(2.0)?;
    for (alpha, beta) in [(0.6, 0.4), (1.0, 0.0), (0.0, 1.0)] {
        let model = LimitModel::for_model(&AutoregressiveParams::new(alpha, beta)?, &eps, 2_000)?;
        for law in [LimitLaw::Rho, LimitLaw::AlphaBeta] {
            let batch = sample_limit_batch(&model, law, 2_000, 11, true)?;
            let first: Vec<f64> = batch.samples.iter().map(|s| s.value.components().0).collect();
            let summary = SampleSummary::of(&first)?;
            println!(
                "{:?} {law:?}: mean {:+.4}, variance {:.4}, degenerate {}",
                model.regularity(),
                summary.mean,
                summary.variance,
                batch.degenerate.len()
            );
        }
    }
    Ok(())
}
