//! Nonnegative integer innovation distributions.
//!
//! An [`InnovationModel`] carries its distribution together with the mean,
//! variance and raw moments `E(eps^j)`, `j = 1..=8`. Poisson and geometric
//! moments are obtained by summing the probability mass function until the
//! remaining tail is below `1e-13` of the eighth moment; categorical moments
//! are exact finite sums.

use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest raw moment carried by every innovation model.
pub const MAX_MOMENT: usize = 8;

const TAIL_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationKind {
    Poisson { lambda: f64 },
    /// Number of failures before the first success, support `{0, 1, 2, ...}`.
    Geometric { p: f64 },
    Categorical { support: Vec<u64>, probabilities: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnovationModel {
    kind: InnovationKind,
    mean: f64,
    variance: f64,
    raw_moments: [f64; MAX_MOMENT],
}

impl InnovationModel {
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInnovation(format!(
                "poisson rate must be positive and finite, got {lambda}"
            )));
        }
        let raw = poisson_raw_moments(lambda);
        Self::assemble(InnovationKind::Poisson { lambda }, raw)
    }

    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidInnovation(format!(
                "geometric success probability must lie in (0, 1], got {p}"
            )));
        }
        let raw = geometric_raw_moments(p);
        Self::assemble(InnovationKind::Geometric { p }, raw)
    }

    pub fn categorical(support: Vec<u64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::InvalidInnovation(
                "categorical support and probabilities must be nonempty and of equal length".into(),
            ));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidInnovation(
                "categorical probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInnovation(format!(
                "categorical probabilities sum to {total}, expected 1"
            )));
        }
        let mut raw = [0.0; MAX_MOMENT];
        for (&v, &p) in support.iter().zip(&probabilities) {
            let v = v as f64;
            let mut power = 1.0;
            for r in raw.iter_mut() {
                power *= v;
                *r += p * power;
            }
        }
        Self::assemble(InnovationKind::Categorical { support, probabilities }, raw)
    }

    /// Point mass at `value`.
    pub fn constant(value: u64) -> Result<Self> {
        Self::categorical(vec![value], vec![1.0])
    }

    fn assemble(kind: InnovationKind, raw_moments: [f64; MAX_MOMENT]) -> Result<Self> {
        if raw_moments.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidInnovation("raw moments must be finite".into()));
        }
        let mean = raw_moments[0];
        let variance = (raw_moments[1] - mean * mean).max(0.0);
        Ok(Self { kind, mean, variance, raw_moments })
    }

    pub fn kind(&self) -> &InnovationKind {
        &self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `E(eps^order)` for `order` in `1..=8`; `order = 0` gives 1.
    pub fn raw_moment(&self, order: usize) -> f64 {
        match order {
            0 => 1.0,
            1..=MAX_MOMENT => self.raw_moments[order - 1],
            _ => panic!("raw moments are only tabulated up to order {MAX_MOMENT}"),
        }
    }

    pub fn raw_moments(&self) -> &[f64; MAX_MOMENT] {
        &self.raw_moments
    }

    /// `E((eps - mu)^3)`.
    pub fn central_third_moment(&self) -> f64 {
        let mu = self.mean;
        self.raw_moments[2] - 3.0 * mu * self.raw_moments[1] + 2.0 * mu.powi(3)
    }

    /// The only nonnegative integer law with zero mean is the point mass at 0;
    /// it drives the process to the all-zero path.
    pub fn is_zero(&self) -> bool {
        self.mean == 0.0
    }

    /// Rejects the zero innovation where the theory needs `mu > 0`.
    pub fn require_positive_mean(&self) -> Result<()> {
        if self.mean > 0.0 {
            Ok(())
        } else {
            Err(Error::Precondition("innovation mean must be positive".into()))
        }
    }

    pub fn sampler(&self) -> InnovationSampler {
        match &self.kind {
            InnovationKind::Poisson { lambda } => {
                InnovationSampler::Poisson(Poisson::new(*lambda).expect("validated rate"))
            }
            InnovationKind::Geometric { p } => {
                InnovationSampler::Geometric(Geometric::new(*p).expect("validated probability"))
            }
            InnovationKind::Categorical { support, probabilities } => {
                let mut acc = 0.0;
                let cumulative = probabilities
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                InnovationSampler::Categorical { support: support.clone(), cumulative }
            }
        }
    }
}

/// Prepared sampler for one innovation law.
#[derive(Clone, Debug)]
pub enum InnovationSampler {
    Poisson(Poisson<f64>),
    Geometric(Geometric),
    Categorical { support: Vec<u64>, cumulative: Vec<f64> },
}

impl InnovationSampler {
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            InnovationSampler::Poisson(d) => d.sample(rng) as u64,
            InnovationSampler::Geometric(d) => d.sample(rng),
            InnovationSampler::Categorical { support, cumulative } => {
                if support.len() == 1 {
                    return support[0];
                }
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                let idx = cumulative.partition_point(|&c| c <= u);
                support[idx.min(support.len() - 1)]
            }
        }
    }
}

fn accumulate(raw: &mut [f64; MAX_MOMENT], k: f64, pmf: f64) -> f64 {
    let mut power = 1.0;
    let mut last = 0.0;
    for r in raw.iter_mut() {
        power *= k;
        last = pmf * power;
        *r += last;
    }
    last
}

/// Sums `k^j P(K = k)` upward from `start` while the eighth-moment terms
/// still matter. `next_ratio(k)` is `P(k + 1) / P(k)`.
fn sum_upper_tail(
    raw: &mut [f64; MAX_MOMENT],
    start: u64,
    start_pmf: f64,
    next_ratio: impl Fn(f64) -> f64,
) {
    let mut k = start;
    let mut pmf = start_pmf;
    let mut prev_term = accumulate(raw, k as f64, pmf);
    loop {
        pmf *= next_ratio(k as f64);
        k += 1;
        let term = accumulate(raw, k as f64, pmf);
        if pmf == 0.0 {
            break;
        }
        let ratio = term / prev_term;
        if ratio < 1.0 {
            // Terms decay at least geometrically from here on.
            let tail = term * ratio / (1.0 - ratio);
            if tail <= TAIL_TOLERANCE * raw[MAX_MOMENT - 1] {
                break;
            }
        }
        prev_term = term;
    }
}

fn poisson_raw_moments(lambda: f64) -> [f64; MAX_MOMENT] {
    // Start at the mode so that the pmf never underflows for large rates.
    let mode = lambda.floor() as u64;
    let ln_fact: f64 = (2..=mode).map(|i| (i as f64).ln()).sum();
    let mode_pmf = (mode as f64 * lambda.ln() - lambda - ln_fact).exp();
    let mut raw = [0.0; MAX_MOMENT];
    // Below the mode: finitely many terms.
    let mut pmf = mode_pmf;
    let mut k = mode;
    while k > 0 {
        pmf *= k as f64 / lambda;
        k -= 1;
        accumulate(&mut raw, k as f64, pmf);
    }
    sum_upper_tail(&mut raw, mode, mode_pmf, |k| lambda / (k + 1.0));
    raw
}

fn geometric_raw_moments(p: f64) -> [f64; MAX_MOMENT] {
    let mut raw = [0.0; MAX_MOMENT];
    if p == 1.0 {
        return raw;
    }
    sum_upper_tail(&mut raw, 0, p, |_| 1.0 - p);
    raw
}

impl fmt::Display for InnovationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            InnovationKind::Poisson { lambda } => write!(f, "poisson:{lambda}"),
            InnovationKind::Geometric { p } => write!(f, "geometric:{p}"),
            InnovationKind::Categorical { support, probabilities } => {
                write!(f, "categorical:")?;
                for (i, (v, p)) in support.iter().zip(probabilities).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}={p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses the flat grammar `kind:param1,param2`:
/// `poisson:2`, `geometric:0.25`, `categorical:0=0.5,3=0.5`, `constant:2`.
impl FromStr for InnovationModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("innovation spec `{s}` lacks `kind:`")))?;
        let number = |p: &str| -> Result<f64> {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{p}` in innovation spec")))
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "poisson" => Self::poisson(number(params)?),
            "geometric" => Self::geometric(number(params)?),
            "constant" => {
                let v = params
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad constant `{params}`")))?;
                Self::constant(v)
            }
            "categorical" => {
                let mut support = Vec::new();
                let mut probabilities = Vec::new();
                for pair in params.split(',') {
                    let (v, p) = pair.split_once('=').ok_or_else(|| {
                        Error::Parse(format!("categorical entry `{pair}` is not `value=prob`"))
                    })?;
                    support.push(
                        v.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Parse(format!("bad support value `{v}`")))?,
                    );
                    probabilities.push(number(p)?);
                }
                Self::categorical(support, probabilities)
            }
            other => Err(Error::Parse(format!("unknown innovation kind `{other}`"))),
        }
    }
}
