//! Rényi α-entropies and the entropy-monotonicity checks for stochastic matrices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::simplex::{apply, ProbabilityVector, StochasticMatrix, INGEST_TOL, PROPERTY_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Order {
    Shannon,
    Min,
    Finite(f64),
}

/// Entropy order `α ∈ (0, ∞]`. The limits `α = 1` and `α = ∞` are stored as tags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(Order);

impl Alpha {
    pub const SHANNON: Alpha = Alpha(Order::Shannon);
    pub const INFINITY: Alpha = Alpha(Order::Min);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::InvalidAlpha(format!("{value} is not positive")));
        }
        Ok(if value == 1.0 {
            Self::SHANNON
        } else if value.is_infinite() {
            Self::INFINITY
        } else {
            Alpha(Order::Finite(value))
        })
    }

    pub fn value(self) -> f64 {
        match self.0 {
            Order::Shannon => 1.0,
            Order::Min => f64::INFINITY,
            Order::Finite(a) => a,
        }
    }

    /// Whether the monotonicity theorem covers this order (`α ≥ 1`).
    pub fn is_monotone_range(self) -> bool {
        self.value() >= 1.0
    }

    /// The default order list `1, 2, ∞`.
    pub fn defaults() -> Vec<Alpha> {
        vec![Self::SHANNON, Alpha(Order::Finite(2.0)), Self::INFINITY]
    }

    /// Parses a comma-separated list such as `"1,2,inf"`.
    pub fn parse_list(s: &str) -> Result<Vec<Alpha>> {
        s.split(',').map(|t| t.trim().parse()).collect()
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Order::Shannon => write!(f, "1"),
            Order::Min => write!(f, "inf"),
            Order::Finite(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Self::INFINITY),
            t => t.parse::<f64>().map_err(|_| Error::InvalidAlpha(format!("cannot parse `{t}`"))).and_then(Alpha::new),
        }
    }
}

/// `H_α(p) = ln(Σ p_i^α)/(1−α)`, Shannon at `α = 1`, `−ln max p_i` at `α = ∞`.
/// Zero entries contribute nothing.
pub fn renyi_entropy(p: &ProbabilityVector, alpha: Alpha) -> f64 {
    renyi_of_slice(p.as_slice(), alpha)
}

fn renyi_of_slice(p: &[f64], alpha: Alpha) -> f64 {
    match alpha.0 {
        Order::Shannon => -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>(),
        Order::Min => -p.iter().copied().fold(0.0, f64::max).ln(),
        Order::Finite(a) => {
            let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(a)).sum();
            s.ln() / (1.0 - a)
        }
    }
}

/// `ln(Tr ρ^α)/(1−α)`, evaluated on the spectrum of `ρ`.
pub fn quantum_renyi_entropy(rho: &DensityMatrix, alpha: Alpha) -> Result<f64> {
    Ok(renyi_of_slice(&rho.spectrum()?, alpha))
}

/// Outcome of iterating `p ← Mp` and tracking `H_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub alphas: Vec<Alpha>,
    pub steps: usize,
    /// `entropies[k][a]` is `H_{alphas[a]}(M^k p0)`, for `k = 0..=steps`.
    pub entropies: Vec<Vec<f64>>,
    /// Smallest `H(M^{k+1}p) − H(M^k p)` over steps and orders.
    pub min_delta: f64,
    /// First step whose entropy dropped by more than the tolerance, with the point
    /// it dropped from.
    pub witness: Option<(usize, ProbabilityVector)>,
}

/// Iterates `p ← Mp` for `steps` steps, recording every `H_α`.
pub fn check_monotone(
    m: &StochasticMatrix,
    p0: &ProbabilityVector,
    alphas: &[Alpha],
    steps: usize,
) -> Result<MonotonicityReport> {
    if steps == 0 {
        return Err(Error::InvalidConfig("steps must be at least 1".into()));
    }
    if alphas.is_empty() {
        return Err(Error::InvalidAlpha("empty order list".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !a.is_monotone_range()) {
        return Err(Error::InvalidAlpha(format!("{a} is below 1")));
    }
    if m.dim() != p0.len() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: p0.len() });
    }
    let row = |p: &ProbabilityVector| alphas.iter().map(|&a| renyi_entropy(p, a)).collect::<Vec<_>>();
    let mut p = p0.clone();
    let mut entropies = vec![row(&p)];
    let mut min_delta = f64::INFINITY;
    let mut witness = None;
    for step in 0..steps {
        let next = apply(m, &p)?;
        let h = row(&next);
        let delta =
            h.iter().zip(entropies.last().unwrap()).map(|(after, before)| after - before).fold(f64::INFINITY, f64::min);
        min_delta = min_delta.min(delta);
        if delta < -PROPERTY_TOL && witness.is_none() {
            witness = Some((step, p.clone()));
        }
        entropies.push(h);
        p = next;
    }
    Ok(MonotonicityReport { alphas: alphas.to_vec(), steps, entropies, min_delta, witness })
}

/// The uniform vector when `M` moves it, `None` when `M` fixes it.
///
/// Uniform is the unique maximizer of every `H_α`, so any matrix that moves it
/// strictly lowers the entropy there.
pub fn entropy_violation_witness(m: &StochasticMatrix) -> Option<ProbabilityVector> {
    if m.uniform_defect() > INGEST_TOL {
        ProbabilityVector::uniform(m.dim()).ok()
    } else {
        None
    }
}

/// True iff `p` majorizes `q`: every partial sum of `p` sorted descending dominates
/// the corresponding partial sum of `q`.
pub fn majorization_check(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<bool> {
    majorizes(p.as_slice(), q.as_slice())
}

pub(crate) fn majorizes(p: &[f64], q: &[f64]) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (p, q) = (sorted(p), sorted(q));
    let (mut sp, mut sq) = (0.0, 0.0);
    for (a, b) in p.iter().zip(&q) {
        sp += a;
        sq += b;
        if sp < sq - INGEST_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
