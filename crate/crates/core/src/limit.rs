//! Samplers for the limit laws of the scaled CLS errors.
//!
//! Positively regular: functionals of the square-root diffusion
//! `dX = (mu dt + sqrt(2 alpha beta X+) dW) / (1 + beta)`, `X_0 = 0`, on a grid
//! of mesh `m` over `[0, 1]`. Decomposable: centred Gaussians. Indecomposable:
//! a Gaussian for `rho` and the Dickey-Fuller ratio for `(alpha, beta)`.
//!
//! Stochastic integrals use left endpoints. A sample with seed `s` drives the
//! diffusion with the Wiener path of sub-stream `(s, 0)` and draws the
//! independent second Wiener path from sub-stream `(s, 1)`.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::replicate;
use crate::innovation::InnovationModel;
use crate::process::{AutoregressiveParams, Regularity, Stability};
use crate::rng::{stream_seed, StreamRng};

pub const DEFAULT_MESH: usize = 10_000;

/// Denominators below this make a draw degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    pub mesh: usize,
    /// `increments[j] = W_{(j+1)/m} - W_{j/m}`.
    pub increments: Vec<f64>,
    /// `values[j] = W_{j/m}`, `j = 0..=m`.
    pub values: Vec<f64>,
}

impl WienerPath {
    pub fn terminal(&self) -> f64 {
        self.values[self.mesh]
    }
}

fn require_mesh(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Precondition(format!("mesh must be at least 2, got {m}")));
    }
    Ok(())
}

/// Standard Wiener path on `[0, 1]` from the stream with key `seed`.
pub fn sample_wiener(m: usize, seed: u64) -> Result<WienerPath> {
    require_mesh(m)?;
    let mut rng = StreamRng::new(seed);
    let scale = (1.0 / m as f64).sqrt();
    let mut increments = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    let mut w = 0.0;
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(&mut rng);
        let dw = scale * z;
        w += dw;
        increments.push(dw);
        values.push(w);
    }
    Ok(WienerPath { mesh: m, increments, values })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CirPath {
    pub mesh: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    /// Grid values `X_{j/m}`, `j = 0..=m`, all nonnegative.
    pub values: Vec<f64>,
    pub driving: WienerPath,
}

impl CirPath {
    /// `M_{j/m} = (1 + beta) X_{j/m} - mu j / m`.
    pub fn martingale(&self) -> Vec<f64> {
        let m = self.mesh as f64;
        self.values
            .iter()
            .enumerate()
            .map(|(j, x)| (1.0 + self.beta) * x - self.mu * j as f64 / m)
            .collect()
    }

    /// Left Riemann sum of `f(X)` over `[0, 1]`.
    pub fn time_integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values[..self.mesh].iter().map(|&x| f(x)).sum::<f64>() / self.mesh as f64
    }
}

fn check_diffusion_params(alpha: f64, beta: f64, mu: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::Precondition(format!(
            "diffusion needs alpha, beta in (0, 1), got ({alpha}, {beta})"
        )));
    }
    let p = AutoregressiveParams::new(alpha, beta)?;
    if p.class().stability != Stability::Unstable {
        return Err(Error::Precondition(format!("diffusion needs alpha + beta = 1, got {}", alpha + beta)));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::Precondition(format!("drift must be finite and nonnegative, got {mu}")));
    }
    Ok(())
}

/// Euler-Maruyama with full truncation: the root is taken of `max(X, 0)` and
/// the state is clamped at 0 after every step.
pub fn simulate_cir_driven(alpha: f64, beta: f64, mu: f64, driving: WienerPath) -> Result<CirPath> {
    check_diffusion_params(alpha, beta, mu)?;
    let m = driving.mesh;
    let c = 1.0 / (1.0 + beta);
    let drift = mu / m as f64;
    let vol = (2.0 * alpha * beta).sqrt();
    let mut values = Vec::with_capacity(m + 1);
    let mut x: f64 = 0.0;
    values.push(x);
    for &dw in &driving.increments {
        x += c * (drift + vol * x.max(0.0).sqrt() * dw);
        x = x.max(0.0);
        values.push(x);
    }
    Ok(CirPath { mesh: m, alpha, beta, mu, values, driving })
}

pub fn simulate_cir(alpha: f64, beta: f64, mu: f64, m: usize, seed: u64) -> Result<CirPath> {
    check_diffusion_params(alpha, beta, mu)?;
    simulate_cir_driven(alpha, beta, mu, sample_wiener(m, stream_seed(seed, 0))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LimitValue {
    Scalar(f64),
    Pair([f64; 2]),
}

impl LimitValue {
    pub fn components(&self) -> (f64, Option<f64>) {
        match *self {
            LimitValue::Scalar(v) => (v, None),
            LimitValue::Pair([a, b]) => (a, Some(b)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub value: LimitValue,
    pub case: Regularity,
    /// Grid size for path functionals; `None` for exact Gaussian draws.
    pub mesh: Option<usize>,
    pub seed: u64,
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den < DEGENERACY_THRESHOLD {
        Err(Error::DegenerateDenominator(den))
    } else {
        Ok(num / den)
    }
}

/// Two independent evaluations of the positively regular `rho` limit on one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoFunctionals {
    /// `sqrt(2 alpha beta) sum X_j^{3/2} dW_j / ((1/m) sum X_j^2)`.
    pub ito: f64,
    /// `int X dM / int X^2` with the numerator taken from Ito's formula,
    /// `(1 + beta) X_1^2 / 2 - (alpha beta / (1 + beta) + mu) int X dt`.
    /// It shares no increments with `ito`, so the gap is discretisation error.
    pub martingale: f64,
}

pub fn rho_functionals(path: &CirPath) -> Result<RhoFunctionals> {
    let den = path.time_integral(|x| x * x);
    let vol = (2.0 * path.alpha * path.beta).sqrt();
    let ito_num: f64 = path.values[..path.mesh]
        .iter()
        .zip(&path.driving.increments)
        .map(|(x, dw)| x * x.sqrt() * dw)
        .sum::<f64>()
        * vol;
    let (a, b) = (path.alpha, path.beta);
    let terminal = path.values[path.mesh];
    let mart_num = 0.5 * (1.0 + b) * terminal * terminal - (a * b / (1.0 + b) + path.mu) * path.time_integral(|x| x);
    Ok(RhoFunctionals { ito: ratio(ito_num, den)?, martingale: ratio(mart_num, den)? })
}

/// `sqrt(alpha (1 + beta)) int X dW' / int X dt` for an independent `W'`.
fn ab_scalar(path: &CirPath, other: &WienerPath) -> Result<f64> {
    let den = path.time_integral(|x| x);
    let num: f64 = path.values[..path.mesh]
        .iter()
        .zip(&other.increments)
        .map(|(x, dw)| x * dw)
        .sum();
    ratio((path.alpha * (1.0 + path.beta)).sqrt() * num, den)
}

pub fn limit_rho_positively_regular(alpha: f64, beta: f64, mu: f64, m: usize, seed: u64) -> Result<LimitSample> {
    let path = simulate_cir(alpha, beta, mu, m, seed)?;
    Ok(LimitSample {
        value: LimitValue::Scalar(rho_functionals(&path)?.ito),
        case: Regularity::PositivelyRegular,
        mesh: Some(m),
        seed,
    })
}

pub fn limit_ab_positively_regular(alpha: f64, beta: f64, mu: f64, m: usize, seed: u64) -> Result<LimitSample> {
    let path = simulate_cir(alpha, beta, mu, m, seed)?;
    let other = sample_wiener(m, stream_seed(seed, 1))?;
    let r = ab_scalar(&path, &other)?;
    Ok(LimitSample {
        value: LimitValue::Pair([-r, r]),
        case: Regularity::PositivelyRegular,
        mesh: Some(m),
        seed,
    })
}

fn gaussian(seed: u64) -> f64 {
    StandardNormal.sample(&mut StreamRng::new(stream_seed(seed, 0)))
}

fn check_moments(mu: f64, sigma2: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Precondition(format!("innovation mean must be positive, got {mu}")));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::Precondition(format!("innovation variance must be nonnegative, got {sigma2}")));
    }
    Ok(())
}

/// `12 s2 (mu^2 + s2) / (mu^2 (mu^2 + 4 s2))`.
pub fn decomposable_rho_variance(mu: f64, sigma2: f64) -> f64 {
    let m2 = mu * mu;
    12.0 * sigma2 * (m2 + sigma2) / (m2 * (m2 + 4.0 * sigma2))
}

/// `2 s / sqrt(mu^2 + 4 s^2)` with `s^2 = sigma2`.
pub fn decomposable_ab_scale(mu: f64, sigma2: f64) -> f64 {
    2.0 * sigma2.sqrt() / (mu * mu + 4.0 * sigma2).sqrt()
}

/// `12 s2 / mu^2`.
pub fn indecomposable_rho_variance(mu: f64, sigma2: f64) -> f64 {
    12.0 * sigma2 / (mu * mu)
}

/// Gaussian draw; `sigma2` is the innovation variance.
pub fn limit_rho_decomposable(mu: f64, sigma2: f64, seed: u64) -> Result<LimitSample> {
    check_moments(mu, sigma2)?;
    Ok(LimitSample {
        value: LimitValue::Scalar(decomposable_rho_variance(mu, sigma2).sqrt() * gaussian(seed)),
        case: Regularity::Decomposable,
        mesh: None,
        seed,
    })
}

pub fn limit_ab_decomposable(mu: f64, sigma2: f64, seed: u64) -> Result<LimitSample> {
    check_moments(mu, sigma2)?;
    let r = decomposable_ab_scale(mu, sigma2) * gaussian(seed);
    Ok(LimitSample {
        value: LimitValue::Pair([-r, r]),
        case: Regularity::Decomposable,
        mesh: None,
        seed,
    })
}

pub fn limit_rho_indecomposable(mu: f64, sigma2: f64, seed: u64) -> Result<LimitSample> {
    check_moments(mu, sigma2)?;
    Ok(LimitSample {
        value: LimitValue::Scalar(indecomposable_rho_variance(mu, sigma2).sqrt() * gaussian(seed)),
        case: Regularity::Indecomposable,
        mesh: None,
        seed,
    })
}

/// `sum W_j dW_j`, the left-endpoint sum for `int W dW`.
pub fn ito_sum_w_dw(path: &WienerPath) -> f64 {
    path.values[..path.mesh]
        .iter()
        .zip(&path.increments)
        .map(|(w, dw)| w * dw)
        .sum()
}

/// `((W_1^2 - 1) / 2) / ((1/m) sum W_j^2)` on the path.
pub fn dickey_fuller_ratio(path: &WienerPath) -> Result<f64> {
    let den = path.values[..path.mesh].iter().map(|w| w * w).sum::<f64>() / path.mesh as f64;
    let w1 = path.terminal();
    ratio(0.5 * (w1 * w1 - 1.0), den)
}

pub fn dickey_fuller_sample(m: usize, seed: u64) -> Result<LimitSample> {
    let path = sample_wiener(m, stream_seed(seed, 0))?;
    Ok(LimitSample {
        value: LimitValue::Scalar(dickey_fuller_ratio(&path)?),
        case: Regularity::Indecomposable,
        mesh: Some(m),
        seed,
    })
}

pub fn limit_ab_indecomposable(m: usize, seed: u64) -> Result<LimitSample> {
    let mut s = dickey_fuller_sample(m, seed)?;
    let (r, _) = s.value.components();
    s.value = LimitValue::Pair([-r, r]);
    Ok(s)
}

/// `(h(f(1)), (1/n) sum_{k=1}^n K(k/n, f(k/n), f((k-1)/n)))` for grid values
/// `f(0), f(1/n), ..., f(1)`.
pub fn riemann_functional(
    values: &[f64],
    kernel: impl Fn(f64, f64, f64) -> f64,
    terminal: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Precondition("functional needs at least two grid values".into()));
    }
    let n = values.len() - 1;
    let nf = n as f64;
    let sum: f64 = (1..=n).map(|k| kernel(k as f64 / nf, values[k], values[k - 1])).sum();
    Ok((terminal(values[n]), sum / nf))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitLaw {
    /// Limit of the scaled `rho_hat - 1`.
    Rho,
    /// Limit of the scaled `(alpha_hat, beta_hat)` errors.
    AlphaBeta,
}

impl std::str::FromStr for LimitLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rho" => Ok(LimitLaw::Rho),
            "ab" | "alpha_beta" | "alpha-beta" => Ok(LimitLaw::AlphaBeta),
            other => Err(Error::Parse(format!("unknown limit law `{other}`"))),
        }
    }
}

/// Everything needed to draw from the limit laws of one unit-root model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum LimitModel {
    PositivelyRegular { alpha: f64, beta: f64, mu: f64, mesh: usize },
    Decomposable { mu: f64, sigma2: f64 },
    Indecomposable { mu: f64, sigma2: f64, mesh: usize },
}

impl LimitModel {
    pub fn for_model(params: &AutoregressiveParams, innovation: &InnovationModel, mesh: usize) -> Result<Self> {
        let class = params.class();
        class.require_unstable()?;
        innovation.require_positive_mean()?;
        require_mesh(mesh)?;
        let (mu, sigma2) = (innovation.mean(), innovation.variance());
        Ok(match class.regularity {
            Regularity::PositivelyRegular => {
                LimitModel::PositivelyRegular { alpha: params.alpha(), beta: params.beta(), mu, mesh }
            }
            Regularity::Decomposable => LimitModel::Decomposable { mu, sigma2 },
            Regularity::Indecomposable => LimitModel::Indecomposable { mu, sigma2, mesh },
        })
    }

    pub fn regularity(&self) -> Regularity {
        match self {
            LimitModel::PositivelyRegular { .. } => Regularity::PositivelyRegular,
            LimitModel::Decomposable { .. } => Regularity::Decomposable,
            LimitModel::Indecomposable { .. } => Regularity::Indecomposable,
        }
    }

    pub fn sample(&self, law: LimitLaw, seed: u64) -> Result<LimitSample> {
        match (*self, law) {
            (LimitModel::PositivelyRegular { alpha, beta, mu, mesh }, LimitLaw::Rho) => {
                limit_rho_positively_regular(alpha, beta, mu, mesh, seed)
            }
            (LimitModel::PositivelyRegular { alpha, beta, mu, mesh }, LimitLaw::AlphaBeta) => {
                limit_ab_positively_regular(alpha, beta, mu, mesh, seed)
            }
            (LimitModel::Decomposable { mu, sigma2 }, LimitLaw::Rho) => limit_rho_decomposable(mu, sigma2, seed),
            (LimitModel::Decomposable { mu, sigma2 }, LimitLaw::AlphaBeta) => {
                limit_ab_decomposable(mu, sigma2, seed)
            }
            (LimitModel::Indecomposable { mu, sigma2, .. }, LimitLaw::Rho) => {
                limit_rho_indecomposable(mu, sigma2, seed)
            }
            (LimitModel::Indecomposable { mesh, .. }, LimitLaw::AlphaBeta) => limit_ab_indecomposable(mesh, seed),
        }
    }

    /// Limits of both scaled error coordinates, `(rho, beta)`, from one seed.
    /// Only the marginals are meaningful; the coordinates of the Gaussian
    /// cases are drawn independently.
    pub fn sample_error_pair(&self, seed: u64) -> Result<[f64; 2]> {
        match *self {
            LimitModel::PositivelyRegular { alpha, beta, mu, mesh } => {
                let path = simulate_cir(alpha, beta, mu, mesh, seed)?;
                let rho = rho_functionals(&path)?.ito;
                let other = sample_wiener(mesh, stream_seed(seed, 1))?;
                Ok([rho, ab_scalar(&path, &other)?])
            }
            _ => {
                let (rho, _) = self.sample(LimitLaw::Rho, stream_seed(seed, 2))?.value.components();
                let (_, beta) = self.sample(LimitLaw::AlphaBeta, stream_seed(seed, 3))?.value.components();
                Ok([rho, beta.expect("pair law")])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitBatch {
    pub samples: Vec<LimitSample>,
    /// Indices whose denominator fell below the degeneracy threshold.
    pub degenerate: Vec<u64>,
}

/// `count` draws, sample `i` seeded with `stream_seed(master, i)`.
pub fn sample_limit_batch(
    model: &LimitModel,
    law: LimitLaw,
    count: usize,
    master: u64,
    parallel: bool,
) -> Result<LimitBatch> {
    let draws = replicate(count, parallel, |i| model.sample(law, stream_seed(master, i as u64)));
    let mut samples = Vec::with_capacity(count);
    let mut degenerate = Vec::new();
    for (i, d) in draws.into_iter().enumerate() {
        match d {
            Ok(s) => samples.push(s),
            Err(Error::DegenerateDenominator(_)) => degenerate.push(i as u64),
            Err(e) => return Err(e),
        }
    }
    Ok(LimitBatch { samples, degenerate })
}

/// Writes `index,case,value1,value2,mesh,seed`; `value2` and `mesh` are empty
/// when not applicable.
pub fn write_limit_csv<W: Write>(samples: &[LimitSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "case", "value1", "value2", "mesh", "seed"])?;
    for (i, s) in samples.iter().enumerate() {
        let (v1, v2) = s.value.components();
        w.write_record([
            i.to_string(),
            s.case.as_str().to_string(),
            v1.to_string(),
            v2.map(|v| v.to_string()).unwrap_or_default(),
            s.mesh.map(|m| m.to_string()).unwrap_or_default(),
            s.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wiener_path_is_consistent() {
        assert!(sample_wiener(1, 0).is_err());
        let w = sample_wiener(500, 9).unwrap();
        assert_eq!(w.values[0], 0.0);
        for j in 1..=500 {
            assert!((w.values[j] - w.values[j - 1] - w.increments[j - 1]).abs() < 1e-12);
        }
        assert_eq!(w, sample_wiener(500, 9).unwrap());
    }

    #[test]
    fn zero_drift_gives_zero_path() {
        let p = simulate_cir(0.6, 0.4, 0.0, 200, 4).unwrap();
        assert!(p.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cir_path_nonnegative_and_martingale_starts_at_zero() {
        let p = simulate_cir(0.6, 0.4, 2.0, 1000, 17).unwrap();
        assert!(p.values.iter().all(|&x| x >= 0.0));
        assert_eq!(p.martingale()[0], 0.0);
        assert!(simulate_cir(1.0, 0.0, 2.0, 100, 1).is_err());
        assert!(simulate_cir(0.5, 0.4, 2.0, 100, 1).is_err());
    }

    #[test]
    fn rho_forms_agree_without_clamping() {
        let p = simulate_cir(0.6, 0.4, 2.0, 2000, 3).unwrap();
        let f = rho_functionals(&p).unwrap();
        assert!((f.ito - f.martingale).abs() < 0.05 * (1.0 + f.ito.abs()));
    }

    #[test]
    fn ab_pairs_lie_on_antidiagonal() {
        let s = limit_ab_positively_regular(0.6, 0.4, 2.0, 300, 8).unwrap();
        let LimitValue::Pair([a, b]) = s.value else { panic!() };
        assert_eq!(a, -b);
        let s = limit_ab_decomposable(2.0, 2.0, 8).unwrap();
        let LimitValue::Pair([a, b]) = s.value else { panic!() };
        assert_eq!(a, -b);
        let s = limit_ab_indecomposable(300, 8).unwrap();
        let LimitValue::Pair([a, b]) = s.value else { panic!() };
        assert_eq!(a, -b);
    }

    #[test]
    fn gaussian_constants() {
        assert!((decomposable_rho_variance(2.0, 2.0) - 3.0).abs() < 1e-12);
        assert!((decomposable_ab_scale(2.0, 2.0) - 0.816_496_580_927_726).abs() < 1e-12);
        assert!((indecomposable_rho_variance(2.0, 2.0) - 6.0).abs() < 1e-12);
        let s = limit_rho_decomposable(2.0, 0.0, 5).unwrap();
        assert_eq!(s.value, LimitValue::Scalar(0.0));
        assert!(limit_rho_indecomposable(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn riemann_functional_basics() {
        let (h, k) = riemann_functional(&[3.0; 11], |_, x, _| x, |x| 2.0 * x).unwrap();
        assert_eq!((h, k), (6.0, 3.0));
        let n = 10_000;
        let grid: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let (_, k) = riemann_functional(&grid, |_, x, _| x * x, |x| x).unwrap();
        assert!((k - 1.0 / 3.0).abs() < 2e-4);
        assert!(riemann_functional(&[1.0], |_, x, _| x, |x| x).is_err());
    }

    #[test]
    fn limit_csv_layout() {
        let a = limit_rho_decomposable(2.0, 2.0, 1).unwrap();
        let b = limit_ab_indecomposable(50, 2).unwrap();
        let mut buf = Vec::new();
        write_limit_csv(&[a, b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,case,value1,value2,mesh,seed");
        assert!(lines[1].starts_with("0,decomposable,"));
        assert!(lines[1].ends_with(",,,1"));
        assert!(lines[2].starts_with("1,indecomposable,"));
        assert!(lines[2].ends_with(",50,2"));
    }

    #[test]
    fn model_dispatch() {
        let eps = InnovationModel::poisson(2.0).unwrap();
        let stable = AutoregressiveParams::new(0.3, 0.2).unwrap();
        assert!(LimitModel::for_model(&stable, &eps, 100).is_err());
        let zero = InnovationModel::constant(0).unwrap();
        let pr = AutoregressiveParams::new(0.6, 0.4).unwrap();
        assert!(LimitModel::for_model(&pr, &zero, 100).is_err());
        let m = LimitModel::for_model(&pr, &eps, 100).unwrap();
        assert_eq!(m.regularity(), Regularity::PositivelyRegular);
        let batch = sample_limit_batch(&m, LimitLaw::Rho, 20, 7, false).unwrap();
        assert_eq!(batch.samples.len() + batch.degenerate.len(), 20);
        let par = sample_limit_batch(&m, LimitLaw::Rho, 20, 7, true).unwrap();
        assert_eq!(batch, par);
    }
}
