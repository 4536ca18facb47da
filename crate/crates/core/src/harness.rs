//! Seeded Monte Carlo campaigns: simulate, estimate, scale, and compare the
//! empirical law of the scaled errors with draws from the limit law.
//!
//! Replication `i` uses the stream `stream_seed(master, i)`; limit draw `j`
//! uses `stream_seed(limit_master(master), j)`. Results are collected in index
//! order and reduced serially, so serial and parallel runs agree bit for bit.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cls::{estimate_cls, has_unique_estimate, scaled_error_statistics};
use crate::error::{Error, Result};
use crate::innovation::InnovationModel;
use crate::limit::{LimitModel, DEFAULT_MESH};
use crate::process::{simulate, AutoregressiveParams, ModelClass, Trajectory};
use crate::rng::{mix64, stream_seed};
use crate::stats::{ks_distance, SampleSummary};

/// Campaigns abort when more than this fraction of replications is undefined.
pub const MAX_UNDEFINED_FRACTION: f64 = 0.05;

const LIMIT_TAG: u64 = 0x4C49_4D49_545F_4C41;

/// Master key of the limit-law draws belonging to campaign seed `master`.
pub fn limit_master(master: u64) -> u64 {
    mix64(master ^ LIMIT_TAG)
}

/// `f(0), ..., f(count - 1)` in index order.
pub fn replicate<T, F>(count: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}

/// `count` trajectories of length `n`, trajectory `i` seeded with
/// `stream_seed(master, i)`.
pub fn simulate_batch(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    n: usize,
    count: usize,
    master: u64,
    parallel: bool,
) -> Result<Vec<Trajectory>> {
    replicate(count, parallel, |i| simulate(params, innovation, n, stream_seed(master, i as u64)))
        .into_iter()
        .collect()
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub params: AutoregressiveParams,
    pub innovation: InnovationModel,
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub mesh: usize,
    pub limit_replications: usize,
    /// Execution detail only; never changes the results.
    #[serde(skip, default = "default_true")]
    pub parallel: bool,
}

impl CampaignConfig {
    pub fn new(params: AutoregressiveParams, innovation: InnovationModel, n: usize, replications: usize, master_seed: u64) -> Self {
        Self {
            params,
            innovation,
            n,
            replications,
            master_seed,
            mesh: DEFAULT_MESH,
            limit_replications: 10_000,
            parallel: true,
        }
    }

    pub fn class(&self) -> ModelClass {
        self.params.class()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 100 {
            return Err(Error::Precondition(format!("need at least 100 replications, got {}", self.replications)));
        }
        if self.n < 10 {
            return Err(Error::Precondition(format!("need series length n >= 10, got {}", self.n)));
        }
        if self.limit_replications == 0 {
            return Err(Error::Precondition("need at least one limit-law draw".into()));
        }
        self.class().require_unstable()?;
        self.innovation.require_positive_mean()?;
        LimitModel::for_model(&self.params, &self.innovation, self.mesh).map(|_| ())
    }
}

/// One scaled error coordinate of a campaign against its limit law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateComparison {
    pub statistic: String,
    pub ks_distance: f64,
    pub empirical: SampleSummary,
    pub limit: SampleSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub class: ModelClass,
    pub config: CampaignConfig,
    pub undefined_count: usize,
    pub degenerate_count: usize,
    pub coordinates: Vec<CoordinateComparison>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledSample {
    pub replication: usize,
    pub stat: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignOutcome {
    pub samples: Vec<ScaledSample>,
    pub limit_draws: Vec<[f64; 2]>,
    pub report: ComparisonReport,
}

fn statistic_labels(class: &ModelClass) -> [&'static str; 2] {
    use crate::process::Regularity::*;
    match class.regularity {
        PositivelyRegular => ["n (rho_hat - 1)", "sqrt(n) (beta_hat - beta)"],
        Decomposable => ["n^1.5 (rho_hat - 1)", "sqrt(n) beta_hat"],
        Indecomposable => ["n^1.5 (rho_hat - 1)", "n (beta_hat - 1)"],
    }
}

/// Scaled error statistics of every replication; `None` marks an undefined
/// estimate.
pub fn scaled_statistics(config: &CampaignConfig) -> Result<Vec<Option<[f64; 2]>>> {
    let class = config.class();
    let mu = config.innovation.mean();
    replicate(config.replications, config.parallel, |i| {
        let traj = simulate(&config.params, &config.innovation, config.n, stream_seed(config.master_seed, i as u64))?;
        let est = estimate_cls(&traj, mu);
        match scaled_error_statistics(&est, &config.params, &class) {
            Ok(s) => Ok(Some(s)),
            Err(Error::Undefined) => Ok(None),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect()
}

/// Limit-law draws for both coordinates and the number of degenerate draws.
pub fn limit_draws(config: &CampaignConfig) -> Result<(Vec<[f64; 2]>, usize)> {
    let model = LimitModel::for_model(&config.params, &config.innovation, config.mesh)?;
    let master = limit_master(config.master_seed);
    let raw = replicate(config.limit_replications, config.parallel, |j| {
        model.sample_error_pair(stream_seed(master, j as u64))
    });
    let mut draws = Vec::with_capacity(raw.len());
    let mut degenerate = 0;
    for r in raw {
        match r {
            Ok(d) => draws.push(d),
            Err(Error::DegenerateDenominator(_)) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((draws, degenerate))
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome> {
    config.validate()?;
    let class = config.class();
    let stats = scaled_statistics(config)?;
    let samples: Vec<ScaledSample> = stats
        .iter()
        .enumerate()
        .filter_map(|(replication, s)| s.map(|stat| ScaledSample { replication, stat }))
        .collect();
    let undefined = config.replications - samples.len();
    if undefined as f64 > MAX_UNDEFINED_FRACTION * config.replications as f64 {
        return Err(Error::TooManyUndefined { undefined, total: config.replications });
    }
    let (limit, degenerate_count) = limit_draws(config)?;
    if limit.is_empty() {
        return Err(Error::Precondition("every limit-law draw was degenerate".into()));
    }
    let labels = statistic_labels(&class);
    let mut coordinates = Vec::with_capacity(2);
    for (c, label) in labels.iter().enumerate() {
        let emp: Vec<f64> = samples.iter().map(|s| s.stat[c]).collect();
        let lim: Vec<f64> = limit.iter().map(|d| d[c]).collect();
        coordinates.push(CoordinateComparison {
            statistic: label.to_string(),
            ks_distance: ks_distance(&emp, &lim)?,
            empirical: SampleSummary::of(&emp)?,
            limit: SampleSummary::of(&lim)?,
        });
    }
    Ok(CampaignOutcome {
        samples,
        limit_draws: limit,
        report: ComparisonReport {
            class,
            config: config.clone(),
            undefined_count: undefined,
            degenerate_count,
            coordinates,
        },
    })
}

/// Writes `replication,stat1,stat2`.
pub fn write_samples_csv<W: Write>(samples: &[ScaledSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["replication", "stat1", "stat2"])?;
    for s in samples {
        w.write_record([s.replication.to_string(), s.stat[0].to_string(), s.stat[1].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistencePoint {
    pub n: usize,
    pub fraction: f64,
}

/// Fraction of `replications` paths with a unique CLS estimate, per length.
pub fn existence_sweep(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    n_grid: &[usize],
    replications: usize,
    master: u64,
    parallel: bool,
) -> Result<Vec<ExistencePoint>> {
    params.class().require_unstable()?;
    if replications == 0 {
        return Err(Error::Precondition("existence sweep needs at least one replication".into()));
    }
    n_grid
        .iter()
        .map(|&n| {
            let hits = replicate(replications, parallel, |i| {
                simulate(params, innovation, n, stream_seed(master, i as u64)).map(|t| has_unique_estimate(&t))
            })
            .into_iter()
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&h| h)
            .count();
            Ok(ExistencePoint { n, fraction: hits as f64 / replications as f64 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(alpha: f64, beta: f64) -> CampaignConfig {
        let mut c = CampaignConfig::new(
            AutoregressiveParams::new(alpha, beta).unwrap(),
            InnovationModel::poisson(2.0).unwrap(),
            50,
            100,
            3,
        );
        c.mesh = 200;
        c.limit_replications = 200;
        c
    }

    #[test]
    fn replicate_preserves_order() {
        assert_eq!(replicate(50, true, |i| i * i), replicate(50, false, |i| i * i));
    }

    #[test]
    fn validation() {
        let mut c = config(0.6, 0.4);
        assert!(c.validate().is_ok());
        c.replications = 99;
        assert!(c.validate().is_err());
        let mut c = config(0.6, 0.4);
        c.n = 9;
        assert!(c.validate().is_err());
        assert!(config(0.3, 0.2).validate().is_err());
        let mut c = config(1.0, 0.0);
        c.innovation = InnovationModel::constant(0).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_campaign_is_reproducible() {
        let mut c = config(0.6, 0.4);
        let a = run_campaign(&c).unwrap();
        c.parallel = false;
        let b = run_campaign(&c).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
        let r = &a.report;
        assert_eq!(r.coordinates.len(), 2);
        assert!(r.coordinates.iter().all(|c| (0.0..=1.0).contains(&c.ks_distance)));
    }

    #[test]
    fn samples_csv_layout() {
        let mut buf = Vec::new();
        write_samples_csv(&[ScaledSample { replication: 4, stat: [1.5, -2.0] }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "replication,stat1,stat2\n4,1.5,-2\n");
    }

    #[test]
    fn short_windows_can_lack_estimates() {
        let p = AutoregressiveParams::new(0.6, 0.4).unwrap();
        let eps = InnovationModel::poisson(2.0).unwrap();
        let sweep = existence_sweep(&p, &eps, &[2, 50], 200, 1, true).unwrap();
        assert_eq!(sweep[0].fraction, 0.0);
        assert!(sweep[1].fraction >= 0.99);
        let stable = AutoregressiveParams::new(0.3, 0.2).unwrap();
        assert!(existence_sweep(&stable, &eps, &[10], 10, 1, true).is_err());
    }
}
