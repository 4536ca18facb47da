//! Simulation, conditional least squares estimation and limit-law checks for
//! integer-valued autoregressive processes of order two,
//!
//! ```text
//! X_k = alpha o X_{k-1} + beta o X_{k-2} + eps_k,   X_{-1} = X_0 = 0,
//! ```
//!
//! where `o` is binomial thinning, with emphasis on the unit root
//! `alpha + beta = 1`.
//!
//! * [`process`] simulates and classifies the model and holds the exact
//!   matrix-power and mean formulas.
//! * [`cls`] computes the CLS estimators and their scaled errors.
//! * [`limit`] samples the limit laws of those errors.
//! * [`moments`] evaluates exact moment recursions and Monte Carlo growth
//!   diagnostics.
//! * [`harness`] runs seeded, parallel campaigns comparing the two.
//!
//! ```
//! use inar2::{estimate_cls, simulate, AutoregressiveParams, InnovationModel};
//!
//! let params = AutoregressiveParams::new(0.6, 0.4)?;
//! let eps = InnovationModel::poisson(2.0)?;
//! let path = simulate(&params, &eps, 1000, 7)?;
//! let est = estimate_cls(&path, eps.mean());
//! assert!((est.rho_hat.unwrap() - 1.0).abs() < 0.05);
//! # Ok::<(), inar2::Error>(())
//! ```

pub mod cli;
pub mod cls;
pub mod error;
pub mod harness;
pub mod innovation;
pub mod limit;
pub mod moments;
pub mod process;
pub mod rng;
pub mod stats;

pub use cls::{
    accumulate_design, ar1_ols_statistic, estimate_cls, estimate_rho_beta, existence_fraction,
    objective_q, scaled_design_statistics, scaled_error_statistics, DesignAccumulators, EstimateCase,
    EstimateResult,
};
pub use error::{Error, Result};
pub use harness::{existence_sweep, run_campaign, CampaignConfig, ComparisonReport};
pub use innovation::{InnovationKind, InnovationModel};
pub use limit::{
    dickey_fuller_sample, riemann_functional, sample_wiener, simulate_cir, CirPath, LimitLaw, LimitModel,
    LimitSample, WienerPath,
};
pub use moments::{exact_joint_moments, iid_sum_moments, MomentTable};
pub use process::{
    classify, derived_sequences, expected_value_exact, putzer_power, simulate, AutoregressiveParams,
    DerivedSequences, ModelClass, Regularity, Stability, Trajectory,
};
pub use rng::StreamRng;
