//! The INAR(2) model `X_k = alpha o X_{k-1} + beta o X_{k-2} + eps_k` with
//! binomial thinning and the zero start `X_{-1} = X_0 = 0`.

use std::io::{Read, Write};

use rand_core::RngCore;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovation::InnovationModel;
use crate::rng::StreamRng;

/// `|rho - 1|` at or below this counts as the unit root.
pub const UNIT_ROOT_TOLERANCE: f64 = 1e-12;

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoregressiveParams {
    alpha: f64,
    beta: f64,
}

impl AutoregressiveParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self { alpha, beta })
    }

    /// Unit-root parameters `(1 - beta, beta)`.
    pub fn unit_root(beta: f64) -> Result<Self> {
        Self::new(1.0 - beta, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn class(&self) -> ModelClass {
        classify(self)
    }

    pub fn is_unit_root(&self) -> bool {
        (self.rho() - 1.0).abs() <= UNIT_ROOT_TOLERANCE
    }

    fn require_unit_root(&self) -> Result<()> {
        if self.is_unit_root() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "alpha + beta must equal 1, got {}",
                self.rho()
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Explosive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    /// `alpha > 0` and `beta > 0`.
    PositivelyRegular,
    /// `beta = 0`.
    Decomposable,
    /// `alpha = 0` and `beta > 0`: indecomposable but not positively regular.
    Indecomposable,
}

impl Regularity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regularity::PositivelyRegular => "positively_regular",
            Regularity::Decomposable => "decomposable",
            Regularity::Indecomposable => "indecomposable",
        }
    }
}

impl std::str::FromStr for Regularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "positively_regular" => Ok(Regularity::PositivelyRegular),
            "decomposable" => Ok(Regularity::Decomposable),
            "indecomposable" => Ok(Regularity::Indecomposable),
            other => Err(Error::Parse(format!("unknown regularity `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelClass {
    pub stability: Stability,
    pub regularity: Regularity,
}

impl ModelClass {
    pub fn require_unstable(&self) -> Result<()> {
        if self.stability == Stability::Unstable {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "model class must be unstable, got {:?}",
                self.stability
            )))
        }
    }
}

pub fn classify(params: &AutoregressiveParams) -> ModelClass {
    let rho = params.rho();
    let stability = if (rho - 1.0).abs() <= UNIT_ROOT_TOLERANCE {
        Stability::Unstable
    } else if rho < 1.0 {
        Stability::Stable
    } else {
        Stability::Explosive
    };
    let regularity = if params.beta == 0.0 {
        Regularity::Decomposable
    } else if params.alpha == 0.0 {
        Regularity::Indecomposable
    } else {
        Regularity::PositivelyRegular
    };
    ModelClass { stability, regularity }
}

/// A zero-start path `X_{-1}, X_0, X_1, ..., X_n`.
///
/// `params` and `seed` are known for simulated paths and absent for paths
/// read back from CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    values: Vec<u64>,
    params: Option<AutoregressiveParams>,
    seed: Option<u64>,
}

impl Trajectory {
    /// Builds a path from the observations `X_1..X_n`.
    pub fn from_observations(observations: &[u64]) -> Self {
        let mut values = Vec::with_capacity(observations.len() + 2);
        values.extend_from_slice(&[0, 0]);
        values.extend_from_slice(observations);
        Self { values, params: None, seed: None }
    }

    pub fn with_params(mut self, params: AutoregressiveParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn n(&self) -> usize {
        self.values.len() - 2
    }

    /// `X_k` for `k` in `-1..=n`.
    #[inline]
    pub fn x(&self, k: isize) -> u64 {
        self.values[(k + 1) as usize]
    }

    /// `X_{-1}, X_0, ..., X_n`.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `X_1, ..., X_n`.
    pub fn observations(&self) -> &[u64] {
        &self.values[2..]
    }

    pub fn params(&self) -> Option<&AutoregressiveParams> {
        self.params.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn last(&self) -> u64 {
        *self.values.last().expect("nonempty")
    }

    /// Writes `k,x` rows for `k = -1..=n`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "x"])?;
        for (i, x) in self.values.iter().enumerate() {
            w.write_record([(i as i64 - 1).to_string(), x.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            k: i64,
            x: u64,
        }
        let mut r = csv::Reader::from_reader(reader);
        let bad = |e: csv::Error| Error::Parse(e.to_string());
        let headers = r.headers().map_err(bad)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "x"] {
            return Err(Error::Parse(format!("expected header `k,x`, got `{}`", headers.as_slice())));
        }
        let mut values = Vec::new();
        for (i, row) in r.deserialize::<Row>().enumerate() {
            let row = row.map_err(bad)?;
            if row.k != i as i64 - 1 {
                return Err(Error::Parse(format!(
                    "row {} has k = {}, expected {}",
                    i + 1,
                    row.k,
                    i as i64 - 1
                )));
            }
            values.push(row.x);
        }
        if values.len() < 3 {
            return Err(Error::Parse("trajectory needs rows k = -1, 0 and at least k = 1".into()));
        }
        if values[0] != 0 || values[1] != 0 {
            return Err(Error::Parse("trajectory must start with X_{-1} = X_0 = 0".into()));
        }
        Ok(Self { values, params: None, seed: None })
    }
}

/// Number of successes among `count` independent Bernoulli(`p`) trials.
/// Consumes no randomness when the outcome is certain.
#[inline]
pub fn thin<R: RngCore + ?Sized>(count: u64, p: f64, rng: &mut R) -> u64 {
    if count == 0 || p == 0.0 {
        0
    } else if p == 1.0 {
        count
    } else {
        Binomial::new(count, p).expect("validated probability").sample(rng)
    }
}

/// Advances the process by one step from `(X_{k-1}, X_{k-2})`, drawing the
/// alpha thinning, the beta thinning and the innovation in that order.
#[inline]
pub fn step<R: RngCore + ?Sized>(
    params: &AutoregressiveParams,
    sampler: &crate::innovation::InnovationSampler,
    lag1: u64,
    lag2: u64,
    rng: &mut R,
) -> (u64, u64) {
    let a = thin(lag1, params.alpha, rng);
    let b = thin(lag2, params.beta, rng);
    let eps = sampler.sample(rng);
    (a + b + eps, eps)
}

/// Simulated path together with the innovations `eps_1..eps_n` it used.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailedTrajectory {
    pub trajectory: Trajectory,
    pub innovations: Vec<u64>,
}

pub fn simulate(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    n: usize,
    seed: u64,
) -> Result<Trajectory> {
    simulate_detailed(params, innovation, n, seed).map(|d| d.trajectory)
}

pub fn simulate_detailed(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    n: usize,
    seed: u64,
) -> Result<DetailedTrajectory> {
    if n == 0 {
        return Err(Error::Precondition("series length n must be at least 1".into()));
    }
    let sampler = innovation.sampler();
    let mut rng = StreamRng::new(seed);
    let mut values = Vec::with_capacity(n + 2);
    values.extend_from_slice(&[0u64, 0]);
    let mut innovations = Vec::with_capacity(n);
    for k in 0..n {
        let (x, eps) = step(params, &sampler, values[k + 1], values[k], &mut rng);
        values.push(x);
        innovations.push(eps);
    }
    Ok(DetailedTrajectory {
        trajectory: Trajectory { values, params: Some(*params), seed: Some(seed) },
        innovations,
    })
}

/// `U_k = X_k + beta X_{k-1}`, `V_k = X_k - X_{k-1}` for `k = 0..n` and
/// `M_k = X_k - alpha X_{k-1} - beta X_{k-2} - mu` for `k = 1..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedSequences {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `m[k - 1] = M_k`.
    pub m: Vec<f64>,
}

pub fn derived_sequences(traj: &Trajectory, innovation: &InnovationModel) -> Result<DerivedSequences> {
    let params = traj
        .params()
        .ok_or_else(|| Error::Precondition("trajectory carries no model parameters".into()))?;
    Ok(derived_sequences_with(traj, params, innovation.mean()))
}

pub fn derived_sequences_with(
    traj: &Trajectory,
    params: &AutoregressiveParams,
    mu: f64,
) -> DerivedSequences {
    let n = traj.n() as isize;
    let (alpha, beta) = (params.alpha, params.beta);
    let mut u = Vec::with_capacity(n as usize + 1);
    let mut v = Vec::with_capacity(n as usize + 1);
    let mut m = Vec::with_capacity(n as usize);
    for k in 0..=n {
        let (x0, x1) = (traj.x(k) as f64, traj.x(k - 1) as f64);
        u.push(x0 + beta * x1);
        v.push(x0 - x1);
        if k >= 1 {
            m.push(x0 - alpha * x1 - beta * traj.x(k - 2) as f64 - mu);
        }
    }
    DerivedSequences { u, v, m }
}

/// The companion matrix `[[1 - beta, beta], [1, 0]]` of the unit-root model.
pub fn companion(beta: f64) -> Matrix2 {
    [[1.0 - beta, beta], [1.0, 0.0]]
}

/// `A^k` for `A = [[1 - beta, beta], [1, 0]]` as
/// `u ut^T + (-beta)^k v vt^T` with `u = (1, 1)/(1 + beta)`, `ut = (1, beta)`,
/// `v = (beta, -1)/(1 + beta)`, `vt = (1, -1)`.
pub fn putzer_power(beta: f64, k: u32) -> Matrix2 {
    let c = 1.0 / (1.0 + beta);
    let r = (-beta).powi(k as i32);
    let u = [c, c];
    let ut = [1.0, beta];
    let v = [beta * c, -c];
    let vt = [1.0, -1.0];
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = u[i] * ut[j] + r * v[i] * vt[j];
        }
    }
    out
}

/// `E(X_n) = mu n / (1 + beta) + mu beta (1 - (-beta)^n) / (1 + beta)^2`
/// for the unit-root model.
pub fn expected_value_exact(params: &AutoregressiveParams, mu: f64, n: u64) -> Result<f64> {
    params.require_unit_root()?;
    let beta = params.beta;
    let b1 = 1.0 + beta;
    let tail = if n > i32::MAX as u64 { 0.0 } else { (-beta).powi(n as i32) };
    Ok(mu * n as f64 / b1 + mu * beta * (1.0 - tail) / (b1 * b1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> AutoregressiveParams {
        AutoregressiveParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(AutoregressiveParams::new(-0.1, 0.5).is_err());
        assert!(AutoregressiveParams::new(0.5, 1.1).is_err());
        assert!(AutoregressiveParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn classification() {
        let c = classify(&params(0.6, 0.4));
        assert_eq!((c.stability, c.regularity), (Stability::Unstable, Regularity::PositivelyRegular));
        let c = classify(&params(1.0, 0.0));
        assert_eq!((c.stability, c.regularity), (Stability::Unstable, Regularity::Decomposable));
        let c = classify(&params(0.0, 1.0));
        assert_eq!((c.stability, c.regularity), (Stability::Unstable, Regularity::Indecomposable));
        let c = classify(&params(0.3, 0.2));
        assert_eq!((c.stability, c.regularity), (Stability::Stable, Regularity::PositivelyRegular));
        assert_eq!(classify(&params(0.8, 0.7)).stability, Stability::Explosive);
        assert_eq!(classify(&params(0.0, 0.0)).regularity, Regularity::Decomposable);
    }

    #[test]
    fn zero_innovation_gives_zero_path() {
        let z = InnovationModel::constant(0).unwrap();
        let t = simulate(&params(0.6, 0.4), &z, 10, 99).unwrap();
        assert!(t.values().iter().all(|&x| x == 0));
    }

    #[test]
    fn simulation_is_deterministic() {
        let eps = InnovationModel::poisson(2.0).unwrap();
        let a = simulate(&params(0.6, 0.4), &eps, 300, 5).unwrap();
        let b = simulate(&params(0.6, 0.4), &eps, 300, 5).unwrap();
        let c = simulate(&params(0.6, 0.4), &eps, 300, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.x(-1), 0);
        assert_eq!(a.x(0), 0);
    }

    #[test]
    fn rejects_empty_simulation() {
        let eps = InnovationModel::poisson(2.0).unwrap();
        assert!(simulate(&params(0.6, 0.4), &eps, 0, 1).is_err());
    }

    #[test]
    fn putzer_small_powers() {
        let i = putzer_power(0.4, 0);
        for (r, row) in i.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let a = putzer_power(0.4, 1);
        let expect = companion(0.4);
        for r in 0..2 {
            for c in 0..2 {
                assert!((a[r][c] - expect[r][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_mean_special_values() {
        for b in [0.0, 0.25, 0.5, 1.0] {
            let p = AutoregressiveParams::unit_root(b).unwrap();
            assert!((expected_value_exact(&p, 2.0, 1).unwrap() - 2.0).abs() < 1e-12);
        }
        let p = params(1.0, 0.0);
        assert_eq!(expected_value_exact(&p, 2.0, 50).unwrap(), 100.0);
        assert!(expected_value_exact(&params(0.3, 0.2), 2.0, 5).is_err());
    }

    #[test]
    fn derived_sequences_of_zero_path() {
        let t = Trajectory::from_observations(&[0; 6]).with_params(params(0.6, 0.4));
        let eps = InnovationModel::poisson(2.0).unwrap();
        let d = derived_sequences(&t, &eps).unwrap();
        assert!(d.u.iter().chain(&d.v).all(|&x| x == 0.0));
        assert!(d.m.iter().all(|&m| m == -2.0));
        assert_eq!(d.u.len(), 7);
        assert_eq!(d.m.len(), 6);
    }

    #[test]
    fn csv_round_trip() {
        let eps = InnovationModel::poisson(2.0).unwrap();
        let t = simulate(&params(0.6, 0.4), &eps, 25, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,x\n-1,0\n0,0\n"));
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), t.values());
        assert!(back.params().is_none());
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(Trajectory::read_csv("k,x\n-1,0\n0,0\n2,3\n".as_bytes()).is_err());
        assert!(Trajectory::read_csv("k,x\n-1,1\n0,0\n1,3\n".as_bytes()).is_err());
        assert!(Trajectory::read_csv("k,y\n-1,0\n0,0\n1,3\n".as_bytes()).is_err());
        assert!(Trajectory::read_csv("k,x\n-1,0\n0,0\n1,-3\n".as_bytes()).is_err());
    }
}
