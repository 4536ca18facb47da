//! Dickey-Fuller ratio draws and the discretisation error of the Ito sum
//! against its closed form `(W_1^2 - 1) / 2`.

use inar2::limit::ito_sum_w_dw;
use inar2::rng::stream_seed;
use inar2::stats::SampleSummary;
use inar2::{dickey_fuller_sample, sample_wiener};

fn main() -> inar2::Result<()> {
    let draws: Vec<f64> = (0..5_000u64)
        .map(|i| dickey_fuller_sample(2_000, stream_seed(8, i)).map(|s| s.value.components().0))
        .collect::<inar2::Result<_>>()?;
    let summary = SampleSummary::of(&draws)?;
    println!("Dickey-Fuller ratio: mean {:.4}, variance {:.4}", summary.mean, summary.variance);
    for q in &summary.quantiles {
        println!("  q{:<5} {:+.4}", q.level, q.value);
    }

    for m in [100, 1_000, 10_000] {
        let mse: f64 = (0..500u64)
            .map(|i| {
                let w = sample_wiener(m, stream_seed(9, i)).unwrap();
                let closed = 0.5 * (w.terminal().powi(2) - 1.0);
                (ito_sum_w_dw(&w) - closed).powi(2)
            })
            .sum::<f64>()
            / 500.0;
        println!("mesh {m:>6}: RMS error {:.2e}", mse.sqrt());
    }
    Ok(())
}
