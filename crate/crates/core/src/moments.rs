//! Exact and Monte Carlo moment computations for the unit-root model.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::simulate_batch;
use crate::innovation::InnovationModel;
use crate::process::{derived_sequences_with, step, AutoregressiveParams, Trajectory};
use crate::rng::StreamRng;
use crate::stats::{log_log_slope, spearman};

/// Slack allowed above a claimed growth exponent.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// `E(M_k^2 | F_{k-1})` and `E(M_k^3 | F_{k-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub second: f64,
    pub third: f64,
}

/// Conditional moments of `M_k` given `X_{k-1} = lag1`, `X_{k-2} = lag2`.
/// Thinning indicators are Bernoulli, so their centred third moment is
/// `p (1 - p) (1 - 2 p)`.
pub fn conditional_moments(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    lag1: u64,
    lag2: u64,
) -> ConditionalMoments {
    let (a, b) = (params.alpha(), params.beta());
    let (x1, x2) = (lag1 as f64, lag2 as f64);
    let va = a * (1.0 - a);
    let vb = b * (1.0 - b);
    ConditionalMoments {
        second: va * x1 + vb * x2 + innovation.variance(),
        third: va * (1.0 - 2.0 * a) * x1 + vb * (1.0 - 2.0 * b) * x2 + innovation.central_third_moment(),
    }
}

/// Conditional moments for `k = 1..=n` along a path.
pub fn martingale_conditional_moments(
    traj: &Trajectory,
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
) -> Vec<ConditionalMoments> {
    traj.values()
        .windows(3)
        .map(|w| conditional_moments(params, innovation, w[1], w[0]))
        .collect()
}

/// `count` independent draws of `M_k` given the history `(lag1, lag2)`.
pub fn sample_conditional_martingale(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    lag1: u64,
    lag2: u64,
    count: usize,
    seed: u64,
) -> Vec<f64> {
    let sampler = innovation.sampler();
    let mut rng = StreamRng::new(seed);
    let centre = params.alpha() * lag1 as f64 + params.beta() * lag2 as f64 + innovation.mean();
    (0..count)
        .map(|_| step(params, &sampler, lag1, lag2, &mut rng).0 as f64 - centre)
        .collect()
}

fn falling_factorial(n: f64, s: usize) -> f64 {
    (0..s).map(|i| n - i as f64).product()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Calls `visit(counts)` for every `counts` with `sum_j j * counts[j-1] = ell`.
fn for_each_block_profile(ell: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(j: usize, rest: usize, counts: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if j == 0 {
            if rest == 0 {
                visit(counts);
            }
            return;
        }
        for k in 0..=rest / j {
            counts[j - 1] = k;
            go(j - 1, rest - k * j, counts, visit);
        }
        counts[j - 1] = 0;
    }
    let mut counts = vec![0; ell];
    go(ell, ell, &mut counts, visit);
}

/// `E((zeta_1 + ... + zeta_N)^ell)` for i.i.d. `zeta` with raw moments
/// `moments[j - 1] = E(zeta^j)`, `ell <= 6`.
///
/// `centered = true` assumes `E(zeta) = 0` and evaluates the explicit
/// polynomials `R_2..R_6`; otherwise every set partition of the `ell`
/// factors is summed, `(N)_s prod_B E(zeta^{|B|})` over partitions with `s`
/// blocks.
pub fn iid_sum_moments(moments: &[f64], big_n: u64, ell: usize, centered: bool) -> Result<f64> {
    if !(1..=6).contains(&ell) {
        return Err(Error::Precondition(format!("sum moments are supported for order 1..=6, got {ell}")));
    }
    if moments.len() < ell {
        return Err(Error::Precondition(format!("order {ell} needs {ell} raw moments, got {}", moments.len())));
    }
    let n = big_n as f64;
    let m = |j: usize| moments[j - 1];
    if centered {
        let n1 = n * (n - 1.0);
        return Ok(match ell {
            1 => 0.0,
            2 => m(2) * n,
            3 => m(3) * n,
            4 => m(4) * n + 3.0 * m(2).powi(2) * n1,
            5 => m(5) * n + 10.0 * m(3) * m(2) * n1,
            _ => {
                m(6) * n
                    + 15.0 * m(4) * m(2) * n1
                    + 10.0 * m(3).powi(2) * n1
                    + 15.0 * m(2).powi(3) * n1 * (n - 2.0)
            }
        });
    }
    let mut total = 0.0;
    let ell_fact = factorial(ell);
    for_each_block_profile(ell, &mut |counts| {
        let blocks: usize = counts.iter().sum();
        let mut coeff = ell_fact;
        let mut prod = 1.0;
        for (idx, &k) in counts.iter().enumerate() {
            let j = idx + 1;
            coeff /= factorial(j).powi(k as i32) * factorial(k);
            prod *= m(j).powi(k as i32);
        }
        total += coeff * falling_factorial(n, blocks) * prod;
    });
    Ok(total)
}

/// Exact moments at time `n`: `E(X_n)` and, for order 2,
/// `E(X_n^2)`, `E(X_n X_{n-1})`, `E(X_{n-1}^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: u64,
    pub e_x: f64,
    pub e_xx: Option<f64>,
    pub e_xy: Option<f64>,
    pub e_yy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub order: u8,
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    pub fn last(&self) -> &MomentRow {
        self.rows.last().expect("nonempty table")
    }

    /// Writes `n,e_x,e_xx,e_xy,e_yy`; second-order columns are empty for
    /// order 1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "e_x", "e_xx", "e_xy", "e_yy"])?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([r.n.to_string(), r.e_x.to_string(), cell(r.e_xx), cell(r.e_xy), cell(r.e_yy)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterates the moment recursion from the zero start.
///
/// Order 1: `(E X_n, E X_{n-1}) = A_1 (E X_{n-1}, E X_{n-2}) + (mu, 0)` with
/// `A_1 = [[alpha, beta], [1, 0]]`. Order 2 adds
/// `Y_n = A_2 Y_{n-1} + B_21 (E X_{n-1}, E X_{n-2}) + (E eps^2, 0, 0)` for
/// `Y_n = (E X_n^2, E X_n X_{n-1}, E X_{n-1}^2)`, where
/// `A_2 = [[alpha^2, 2 alpha beta, beta^2], [alpha, beta, 0], [1, 0, 0]]` and
/// `B_21 = [[alpha beta + 2 alpha mu, alpha beta + 2 beta mu], [mu, 0], [0, 0]]`.
pub fn exact_joint_moments(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    n: u64,
    order: u8,
) -> Result<MomentTable> {
    if !params.is_unit_root() {
        return Err(Error::Precondition("exact moments need alpha + beta = 1".into()));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::Precondition(format!("exact joint moments exist for order 1 or 2, got {order}")));
    }
    if n == 0 {
        return Err(Error::Precondition("moment table needs n >= 1".into()));
    }
    let (a, b) = (params.alpha(), params.beta());
    let mu = innovation.mean();
    let e2 = innovation.raw_moment(2);
    let a2 = [[a * a, 2.0 * a * b, b * b], [a, b, 0.0], [1.0, 0.0, 0.0]];
    let b21 = [[a * b + 2.0 * a * mu, a * b + 2.0 * b * mu], [mu, 0.0], [0.0, 0.0]];
    let mut first = [0.0f64; 2];
    let mut second = [0.0f64; 3];
    let mut rows = Vec::with_capacity(n as usize);
    for k in 1..=n {
        if order == 2 {
            let mut next = [e2, 0.0, 0.0];
            for i in 0..3 {
                next[i] += (0..3).map(|j| a2[i][j] * second[j]).sum::<f64>()
                    + b21[i][0] * first[0]
                    + b21[i][1] * first[1];
            }
            second = next;
        }
        first = [a * first[0] + b * first[1] + mu, first[0]];
        rows.push(MomentRow {
            n: k,
            e_x: first[0],
            e_xx: (order == 2).then_some(second[0]),
            e_xy: (order == 2).then_some(second[1]),
            e_yy: (order == 2).then_some(second[2]),
        });
    }
    Ok(MomentTable { order, rows })
}

/// Quantities whose growth in `n` is bounded by a power of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthStatistic {
    /// `E|X_n|^l`, claimed `O(n^l)`.
    AbsX(u32),
    /// `E|M_n|^l`, claimed `O(n^{l/2})`.
    AbsM(u32),
    /// `E U_n^i`, claimed `O(n^i)`.
    U(u32),
    /// `E V_n^{2j}`, claimed `O(n^j)`.
    V2(u32),
}

impl GrowthStatistic {
    pub fn claimed_exponent(&self) -> f64 {
        match *self {
            GrowthStatistic::AbsX(l) => l as f64,
            GrowthStatistic::AbsM(l) => l as f64 / 2.0,
            GrowthStatistic::U(i) => i as f64,
            GrowthStatistic::V2(j) => j as f64,
        }
    }

    fn evaluate(&self, traj: &Trajectory, params: &AutoregressiveParams, mu: f64, n: usize) -> f64 {
        let k = n as isize;
        let (x0, x1, x2) = (traj.x(k) as f64, traj.x(k - 1) as f64, traj.x(k - 2) as f64);
        match *self {
            GrowthStatistic::AbsX(l) => x0.powi(l as i32),
            GrowthStatistic::AbsM(l) => {
                (x0 - params.alpha() * x1 - params.beta() * x2 - mu).abs().powi(l as i32)
            }
            GrowthStatistic::U(i) => (x0 + params.beta() * x1).powi(i as i32),
            GrowthStatistic::V2(j) => (x0 - x1).powi(2 * j as i32),
        }
    }
}

/// Monte Carlo estimates of `statistic` at each grid length, all read off
/// one batch of `replications` paths of length `max(n_grid)`.
pub fn growth_samples(
    params: &AutoregressiveParams,
    innovation: &InnovationModel,
    n_grid: &[usize],
    statistics: &[GrowthStatistic],
    replications: usize,
    master: u64,
    parallel: bool,
) -> Result<Vec<Vec<f64>>> {
    let n_max = *n_grid.iter().max().ok_or_else(|| Error::Precondition("empty n-grid".into()))?;
    if n_grid.iter().any(|&n| n < 1) {
        return Err(Error::Precondition("grid lengths must be at least 1".into()));
    }
    let batch = simulate_batch(params, innovation, n_max, replications, master, parallel)?;
    let mu = innovation.mean();
    Ok(statistics
        .iter()
        .map(|s| {
            n_grid
                .iter()
                .map(|&n| batch.iter().map(|t| s.evaluate(t, params, mu, n)).sum::<f64>() / batch.len() as f64)
                .collect()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub slope: f64,
    pub claimed_exponent: f64,
    pub passed: bool,
}

/// Fits the log-log slope of `values` against `n_grid`; passes when it does
/// not exceed `claimed_exponent + 0.15`.
pub fn growth_bound_check(n_grid: &[usize], values: &[f64], claimed_exponent: f64) -> Result<GrowthCheck> {
    let x: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&x, values)?;
    Ok(GrowthCheck { slope, claimed_exponent, passed: slope <= claimed_exponent + SLOPE_TOLERANCE })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticPoint {
    pub n: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub points: Vec<DiagnosticPoint>,
    /// Spearman correlation of the statistic with `n`.
    pub spearman: f64,
    pub decreasing: bool,
}

impl TrendReport {
    fn from_points(points: Vec<DiagnosticPoint>) -> Result<Self> {
        let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
        let vs: Vec<f64> = points.iter().map(|p| p.value).collect();
        let spearman = spearman(&ns, &vs)?;
        Ok(Self { points, spearman, decreasing: spearman < 0.0 })
    }
}

fn check_grid(batch: &[Trajectory], n_grid: &[usize]) -> Result<()> {
    if batch.is_empty() || n_grid.len() < 2 {
        return Err(Error::Precondition("diagnostics need a nonempty batch and at least two grid points".into()));
    }
    let shortest = batch.iter().map(|t| t.n()).min().unwrap_or(0);
    if n_grid.iter().any(|&n| n == 0 || n > shortest) {
        return Err(Error::Precondition(format!("grid lengths must lie in 1..={shortest}")));
    }
    Ok(())
}

/// Batch mean of `n^{-kappa} sum_{k=1}^n |U_k^i V_k^j|` per grid length.
/// Requires `kappa > i + j/2 + 1`.
pub fn scaled_sup_diagnostics(
    batch: &[Trajectory],
    params: &AutoregressiveParams,
    i: u32,
    j: u32,
    kappa: f64,
    n_grid: &[usize],
) -> Result<TrendReport> {
    let bound = i as f64 + j as f64 / 2.0 + 1.0;
    if kappa.is_nan() || kappa <= bound {
        return Err(Error::Precondition(format!("kappa must exceed i + j/2 + 1 = {bound}, got {kappa}")));
    }
    check_grid(batch, n_grid)?;
    let mut totals = vec![0.0; n_grid.len()];
    for t in batch {
        let d = derived_sequences_with(t, params, 0.0);
        let mut acc = 0.0;
        let mut g = 0;
        for k in 1..=n_grid[n_grid.len() - 1] {
            acc += (d.u[k].powi(i as i32) * d.v[k].powi(j as i32)).abs();
            while g < n_grid.len() && n_grid[g] == k {
                totals[g] += acc * (k as f64).powf(-kappa);
                g += 1;
            }
        }
    }
    let points = n_grid
        .iter()
        .zip(totals)
        .map(|(&n, s)| DiagnosticPoint { n, value: s / batch.len() as f64 })
        .collect();
    TrendReport::from_points(points)
}

/// Batch means of `|n^{-5/2} sum X_k V_k|` and
/// `|n^{-2} (sum V_k^2 - 2 beta / (1 + beta) sum X_{k-1})|` per grid length.
pub fn cross_term_diagnostics(
    batch: &[Trajectory],
    params: &AutoregressiveParams,
    n_grid: &[usize],
) -> Result<(TrendReport, TrendReport)> {
    check_grid(batch, n_grid)?;
    let beta = params.beta();
    let c = 2.0 * beta / (1.0 + beta);
    let mut xv = vec![0.0; n_grid.len()];
    let mut vv = vec![0.0; n_grid.len()];
    for t in batch {
        let (mut sxv, mut svv, mut sx) = (0i128, 0i128, 0i128);
        let mut g = 0;
        for k in 1..=n_grid[n_grid.len() - 1] {
            let k_i = k as isize;
            let (x0, x1) = (t.x(k_i) as i128, t.x(k_i - 1) as i128);
            sxv += x0 * (x0 - x1);
            svv += (x0 - x1) * (x0 - x1);
            sx += x1;
            while g < n_grid.len() && n_grid[g] == k {
                let nf = k as f64;
                xv[g] += (sxv as f64 * nf.powf(-2.5)).abs();
                vv[g] += ((svv as f64 - c * sx as f64) / (nf * nf)).abs();
                g += 1;
            }
        }
    }
    let m = batch.len() as f64;
    let pts = |v: Vec<f64>| {
        n_grid.iter().zip(v).map(|(&n, s)| DiagnosticPoint { n, value: s / m }).collect::<Vec<_>>()
    };
    Ok((TrendReport::from_points(pts(xv))?, TrendReport::from_points(pts(vv))?))
}

/// Mean of the per-path products `M_k M_l` over a batch, for `k != l`.
pub fn martingale_cross_moment(
    batch: &[Trajectory],
    params: &AutoregressiveParams,
    mu: f64,
    k: usize,
    l: usize,
) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            let d = derived_sequences_with(t, params, mu);
            d.m[k - 1] * d.m[l - 1]
        })
        .collect()
}
