//! Conditional least squares estimation of `(alpha, beta)` and `(rho, beta)`.
//!
//! The innovation mean `mu` is treated as known. All design sums are
//! accumulated exactly in `i128`; the estimators are formed as
//! `(I - mu J) / det F` where `I`, `J` and `det F` are exact integers, so the
//! only rounding happens in the final casts and one subtraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{
    derived_sequences_with, AutoregressiveParams, Matrix2, ModelClass, Regularity, Trajectory,
};

/// Exact integer sums over `k = 1..=n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerSums {
    /// `sum X_{k-1}^2`
    pub s11: i128,
    /// `sum X_{k-1} X_{k-2}`
    pub s12: i128,
    /// `sum X_{k-2}^2`
    pub s22: i128,
    /// `sum X_k X_{k-1}`
    pub p1: i128,
    /// `sum X_k X_{k-2}`
    pub p2: i128,
    /// `sum X_{k-1}`
    pub l1: i128,
    /// `sum X_{k-2}`
    pub l2: i128,
}

impl IntegerSums {
    pub fn of(traj: &Trajectory) -> Self {
        let mut s = IntegerSums::default();
        for w in traj.values().windows(3) {
            let (x2, x1, x0) = (w[0] as i128, w[1] as i128, w[2] as i128);
            s.s11 += x1 * x1;
            s.s12 += x1 * x2;
            s.s22 += x2 * x2;
            s.p1 += x0 * x1;
            s.p2 += x0 * x2;
            s.l1 += x1;
            s.l2 += x2;
        }
        s
    }

    /// `det F = s11 s22 - s12^2`, exact.
    pub fn det_f(&self) -> i128 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    /// `A = T F T^T` with `T = [[1, 0], [-1, 1]]`, exact.
    pub fn a_exact(&self) -> [[i128; 2]; 2] {
        let a12 = self.s12 - self.s11;
        [[self.s11, a12], [a12, self.s11 - 2 * self.s12 + self.s22]]
    }
}

/// Design matrices and vectors of the CLS problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignAccumulators {
    pub sums: IntegerSums,
    pub mu: f64,
    pub f: Matrix2,
    pub g: [f64; 2],
    pub a: Matrix2,
    pub b: [f64; 2],
    /// `sum [M_k X_{k-1}, -M_k V_{k-1}]`; needs the true parameters.
    pub d: Option<[f64; 2]>,
    pub sum_sq_lag2: f64,
    pub det_f: f64,
}

pub fn accumulate_design(traj: &Trajectory, mu: f64) -> DesignAccumulators {
    let s = IntegerSums::of(traj);
    let g = [
        s.p1 as f64 - mu * s.l1 as f64,
        s.p2 as f64 - mu * s.l2 as f64,
    ];
    let a = s.a_exact();
    let d = traj.params().map(|p| martingale_design(traj, p, mu));
    DesignAccumulators {
        sums: s,
        mu,
        f: [[s.s11 as f64, s.s12 as f64], [s.s12 as f64, s.s22 as f64]],
        g,
        a: [[a[0][0] as f64, a[0][1] as f64], [a[1][0] as f64, a[1][1] as f64]],
        b: [g[0], g[1] - g[0]],
        d,
        sum_sq_lag2: s.s22 as f64,
        det_f: s.det_f() as f64,
    }
}

fn martingale_design(traj: &Trajectory, params: &AutoregressiveParams, mu: f64) -> [f64; 2] {
    let seq = derived_sequences_with(traj, params, mu);
    let mut d = [0.0; 2];
    for k in 1..=traj.n() {
        let m = seq.m[k - 1];
        d[0] += m * traj.x(k as isize - 1) as f64;
        d[1] -= m * seq.v[k - 1];
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateCase {
    /// `sum X_{k-2}^2 > 0`: unique minimiser `F^{-1} g`.
    Regular,
    /// Only `X_{n-1}` is nonzero among `X_1..X_{n-1}`; `beta_hat` is fixed at 0.
    DegenerateLastOnly,
    /// `X_1 = ... = X_{n-1} = 0`: no estimate.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub rho_hat: Option<f64>,
    pub case: EstimateCase,
    pub n: usize,
    pub accumulators: DesignAccumulators,
}

/// Flat JSON view of an [`EstimateResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub rho_hat: Option<f64>,
    pub case: EstimateCase,
    pub n: usize,
    #[serde(rename = "det_F")]
    pub det_f: f64,
    pub sum_sq_lag2: f64,
}

impl EstimateResult {
    pub fn is_regular(&self) -> bool {
        self.case == EstimateCase::Regular
    }

    pub fn report(&self) -> EstimateReport {
        EstimateReport {
            alpha_hat: self.alpha_hat,
            beta_hat: self.beta_hat,
            rho_hat: self.rho_hat,
            case: self.case,
            n: self.n,
            det_f: self.accumulators.det_f,
            sum_sq_lag2: self.accumulators.sum_sq_lag2,
        }
    }

    /// `(alpha_hat, beta_hat)` or `Error::Undefined`.
    pub fn alpha_beta(&self) -> Result<(f64, f64)> {
        match (self.alpha_hat, self.beta_hat) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Undefined),
        }
    }
}

pub fn estimate_cls(traj: &Trajectory, mu: f64) -> EstimateResult {
    let acc = accumulate_design(traj, mu);
    let n = traj.n();
    let s = &acc.sums;
    let det = s.det_f();
    let (case, ab) = if s.s22 > 0 {
        if det == 0 {
            (EstimateCase::Undefined, None)
        } else {
            // alpha = (s22 g1 - s12 g2) / det, beta = (s11 g2 - s12 g1) / det
            let ia = s.s22 * s.p1 - s.s12 * s.p2;
            let ja = s.s22 * s.l1 - s.s12 * s.l2;
            let ib = s.s11 * s.p2 - s.s12 * s.p1;
            let jb = s.s11 * s.l2 - s.s12 * s.l1;
            let det = det as f64;
            let alpha = (ia as f64 - mu * ja as f64) / det;
            let beta = (ib as f64 - mu * jb as f64) / det;
            (EstimateCase::Regular, Some((alpha, beta)))
        }
    } else if n >= 2 && traj.x(n as isize - 1) != 0 {
        let alpha = (traj.last() as f64 - mu) / traj.x(n as isize - 1) as f64;
        (EstimateCase::DegenerateLastOnly, Some((alpha, 0.0)))
    } else {
        (EstimateCase::Undefined, None)
    };
    EstimateResult {
        alpha_hat: ab.map(|p| p.0),
        beta_hat: ab.map(|p| p.1),
        rho_hat: ab.map(|p| p.0 + p.1),
        case,
        n,
        accumulators: acc,
    }
}

/// `(rho_hat, beta_hat) = A^{-1} b`, computed from the canonical-form sums
/// without passing through `(alpha_hat, beta_hat)`.
pub fn estimate_rho_beta(traj: &Trajectory, mu: f64) -> Result<(f64, f64)> {
    let s = IntegerSums::of(traj);
    let det = s.det_f();
    if s.s22 == 0 || det == 0 {
        return Err(Error::Undefined);
    }
    let a = s.a_exact();
    // b = (p1 - mu l1, (p2 - p1) - mu (l2 - l1))
    let (bi1, bj1) = (s.p1, s.l1);
    let (bi2, bj2) = (s.p2 - s.p1, s.l2 - s.l1);
    let ir = a[1][1] * bi1 - a[0][1] * bi2;
    let jr = a[1][1] * bj1 - a[0][1] * bj2;
    let ib = a[0][0] * bi2 - a[0][1] * bi1;
    let jb = a[0][0] * bj2 - a[0][1] * bj1;
    let det = det as f64;
    Ok(((ir as f64 - mu * jr as f64) / det, (ib as f64 - mu * jb as f64) / det))
}

/// `Q_n = sum_{k=1}^n (X_k - a X_{k-1} - b X_{k-2} - mu)^2`.
pub fn objective_q(traj: &Trajectory, alpha: f64, beta: f64, mu: f64) -> f64 {
    traj.values()
        .windows(3)
        .map(|w| {
            let r = w[2] as f64 - alpha * w[1] as f64 - beta * w[0] as f64 - mu;
            r * r
        })
        .sum()
}

/// Case-specific normalisation of the estimation error:
/// positively regular `(n (rho_hat - 1), sqrt(n) (beta_hat - beta))`,
/// decomposable `(n^{3/2} (rho_hat - 1), sqrt(n) beta_hat)`,
/// indecomposable `(n^{3/2} (rho_hat - 1), n (beta_hat - 1))`.
pub fn scaled_error_statistics(
    result: &EstimateResult,
    true_params: &AutoregressiveParams,
    class: &ModelClass,
) -> Result<[f64; 2]> {
    class.require_unstable()?;
    if !result.is_regular() {
        return Err(Error::Undefined);
    }
    let (alpha_hat, beta_hat) = result.alpha_beta()?;
    let rho_hat = alpha_hat + beta_hat;
    let n = result.n as f64;
    let sn = n.sqrt();
    Ok(match class.regularity {
        Regularity::PositivelyRegular => [n * (rho_hat - 1.0), sn * (beta_hat - true_params.beta())],
        Regularity::Decomposable => [n * sn * (rho_hat - 1.0), sn * beta_hat],
        Regularity::Indecomposable => [n * sn * (rho_hat - 1.0), n * (beta_hat - 1.0)],
    })
}

/// `(diag(p) A diag(p), diag(q) d)` with the case-specific exponents.
pub fn scaled_design_statistics(
    acc: &DesignAccumulators,
    n: usize,
    class: &ModelClass,
) -> Result<(Matrix2, [f64; 2])> {
    class.require_unstable()?;
    let d = acc
        .d
        .ok_or_else(|| Error::Precondition("martingale design vector needs the true parameters".into()))?;
    let n = n as f64;
    let (p, q) = match class.regularity {
        Regularity::PositivelyRegular => ([n.powf(-1.5), 1.0 / n], [n.powi(-2), n.powf(-1.5)]),
        Regularity::Decomposable => {
            let p = [n.powf(-1.5), n.powf(-0.5)];
            (p, p)
        }
        Regularity::Indecomposable => {
            let p = [n.powf(-1.5), 1.0 / n];
            (p, p)
        }
    };
    let mut a = acc.a;
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= p[i] * p[j];
        }
    }
    Ok((a, [q[0] * d[0], q[1] * d[1]]))
}

/// `n (rho_hat - 1)` for the AR(1) least squares fit through the origin,
/// `rho_hat = sum Y_{k-1} Y_k / sum Y_{k-1}^2` over `k = 1..n` with `Y_0 = 0`.
/// `y` holds `Y_1..Y_n`.
pub fn ar1_ols_statistic(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Precondition("AR(1) statistic needs at least two observations".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut prev = 0.0;
    for &cur in y {
        num += prev * cur;
        den += prev * prev;
        prev = cur;
    }
    if den == 0.0 {
        return Err(Error::Undefined);
    }
    Ok(y.len() as f64 * (num / den - 1.0))
}

/// Whether the CLS estimator is uniquely defined: `sum X_{k-2}^2 > 0`.
pub fn has_unique_estimate(traj: &Trajectory) -> bool {
    traj.values()[..traj.values().len().saturating_sub(2)]
        .iter()
        .any(|&x| x != 0)
}

/// Fraction of the batch with a unique CLS estimate.
pub fn existence_fraction(batch: &[Trajectory]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Precondition("existence fraction of an empty batch".into()));
    }
    let hits = batch.iter().filter(|t| has_unique_estimate(t)).count();
    Ok(hits as f64 / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::classify;

    fn traj(obs: &[u64]) -> Trajectory {
        Trajectory::from_observations(obs)
    }

    #[test]
    fn zero_path_has_empty_design() {
        let acc = accumulate_design(&traj(&[0; 5]), 2.0);
        assert_eq!(acc.f, [[0.0; 2]; 2]);
        assert_eq!(acc.g, [0.0; 2]);
        assert_eq!(acc.sum_sq_lag2, 0.0);
        assert_eq!(estimate_cls(&traj(&[0; 5]), 2.0).case, EstimateCase::Undefined);
        assert!(estimate_rho_beta(&traj(&[0; 5]), 2.0).is_err());
    }

    #[test]
    fn degenerate_last_only() {
        let t = traj(&[0, 0, 2, 5]);
        let acc = accumulate_design(&t, 1.0);
        assert_eq!(acc.sum_sq_lag2, 0.0);
        assert_eq!(acc.f[0][0], 4.0);
        let r = estimate_cls(&t, 1.0);
        assert_eq!(r.case, EstimateCase::DegenerateLastOnly);
        assert_eq!(r.alpha_hat, Some(2.0));
        assert_eq!(r.beta_hat, Some(0.0));
        assert_eq!(r.rho_hat, Some(2.0));
    }

    #[test]
    fn undefined_when_only_last_is_nonzero() {
        assert_eq!(estimate_cls(&traj(&[0, 0, 0, 7]), 1.0).case, EstimateCase::Undefined);
        assert_eq!(estimate_cls(&traj(&[3]), 1.0).case, EstimateCase::Undefined);
    }

    #[test]
    fn exact_fit_recovers_parameters() {
        // X_k = X_{k-1} + X_{k-2} + 2 from the zero start.
        let fib = [2u64, 4, 8, 14, 24, 40];
        let r = estimate_cls(&traj(&fib), 2.0);
        assert_eq!(r.case, EstimateCase::Regular);
        assert!((r.alpha_hat.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.beta_hat.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(objective_q(&traj(&fib), 1.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn objective_of_zero_path() {
        assert_eq!(objective_q(&traj(&[0; 7]), 0.3, -4.0, 1.5), 7.0 * 2.25);
    }

    #[test]
    fn rho_route_matches_transform() {
        let t = traj(&[1, 3, 2, 6, 4, 9, 8, 11]);
        let r = estimate_cls(&t, 1.5);
        let (rho, beta) = estimate_rho_beta(&t, 1.5).unwrap();
        assert!((rho - r.rho_hat.unwrap()).abs() < 1e-12);
        assert!((beta - r.beta_hat.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn report_uses_listed_keys() {
        let r = estimate_cls(&traj(&[1, 3, 2, 6]), 1.0);
        let v = serde_json::to_value(r.report()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["alpha_hat", "beta_hat", "case", "det_F", "n", "rho_hat", "sum_sq_lag2"]
        );
        assert_eq!(v["case"], "regular");
    }

    #[test]
    fn scaled_errors_follow_case() {
        let mut r = estimate_cls(&traj(&[1, 3, 2, 6]), 1.0);
        r.alpha_hat = Some(1.003);
        r.beta_hat = Some(0.0);
        r.n = 100;
        let p = AutoregressiveParams::new(1.0, 0.0).unwrap();
        let s = scaled_error_statistics(&r, &p, &classify(&p)).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-9);
        assert_eq!(s[1], 0.0);

        r.alpha_hat = Some(0.5);
        r.beta_hat = Some(0.5);
        for p in [(0.6, 0.4), (1.0, 0.0), (0.0, 1.0)] {
            let p = AutoregressiveParams::new(p.0, p.1).unwrap();
            assert_eq!(scaled_error_statistics(&r, &p, &classify(&p)).unwrap()[0], 0.0);
        }
        let stable = AutoregressiveParams::new(0.3, 0.2).unwrap();
        assert!(scaled_error_statistics(&r, &stable, &classify(&stable)).is_err());
    }

    #[test]
    fn ar1_statistic_on_linear_drift() {
        for n in [2usize, 10, 1000] {
            let y: Vec<f64> = (1..=n).map(|k| k as f64).collect();
            let n = n as f64;
            let expect = 3.0 * n / (2.0 * n - 1.0);
            assert!((ar1_ols_statistic(&y).unwrap() - expect).abs() < 1e-9 * expect);
        }
        assert!(ar1_ols_statistic(&[0.0, 0.0, 0.0]).is_err());
        assert!(ar1_ols_statistic(&[1.0]).is_err());
    }

    #[test]
    fn existence() {
        assert!(existence_fraction(&[]).is_err());
        assert_eq!(existence_fraction(&[traj(&[0; 4]), traj(&[0; 9])]).unwrap(), 0.0);
        assert_eq!(existence_fraction(&[traj(&[5, 2])]).unwrap(), 0.0);
        assert_eq!(existence_fraction(&[traj(&[5, 2, 1]), traj(&[0, 0, 1])]).unwrap(), 0.5);
    }
}
