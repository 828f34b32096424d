//! Poisson-clocked reduction process driven by a chain of stochastic matrices.
//!
//! Between consecutive reduction times the state distribution is pushed through the
//! step's matrix; at each reduction a basis state is drawn from that distribution
//! (selective trajectories). The ensemble view evolves the full distribution without
//! sampling, which is what averaging the selective trajectories produces.
//!
//! Random streams of a configuration seed:
//! - stream 0: reduction times
//! - stream 1: per-step matrix seeds (`derive_seed(·, step)`)
//! - stream 2: reductions of the single trajectory
//! - stream 3: per-trajectory reduction seeds for ensembles
//! - stream 4: initial basis draw when the initial state is a distribution

use rand::Rng;
use rand_distr::Exp;
use rayon::prelude::*;

use crate::entropy::{renyi_entropy, Alpha};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::simplex::{apply, sample_ds, DsMethod, ProbabilityVector, StochasticMatrix};

const STREAM_TIMES: u64 = 0;
const STREAM_MATRICES: u64 = 1;
const STREAM_REDUCTIONS: u64 = 2;
const STREAM_ENSEMBLE: u64 = 3;
const STREAM_INITIAL: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum ChainSource {
    FixedMatrix(StochasticMatrix),
    /// A fresh doubly stochastic matrix per step.
    PerStepSampled(DsMethod),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Basis(usize),
    Distribution(ProbabilityVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessConfig {
    pub n: usize,
    pub chain_source: ChainSource,
    /// Reductions per unit time.
    pub rate: f64,
    pub horizon: f64,
    pub initial_state: InitialState,
    pub seed: u64,
    pub alphas: Vec<Alpha>,
}

impl ProcessConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return bad(format!("rate {} must be a finite nonnegative number", self.rate));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        if let ChainSource::FixedMatrix(m) = &self.chain_source {
            if m.dim() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: m.dim() });
            }
        }
        match &self.initial_state {
            InitialState::Basis(i) if *i >= self.n => return Err(Error::IndexOutOfRange { index: *i, n: self.n }),
            InitialState::Distribution(p) if p.len() != self.n => {
                return Err(Error::DimensionMismatch { expected: self.n, found: p.len() })
            }
            _ => {}
        }
        if self.alphas.is_empty() {
            return bad("at least one entropy order is required".into());
        }
        Ok(())
    }

    /// Matrix for step `k`.
    pub fn step_matrix(&self, k: usize) -> Result<StochasticMatrix> {
        match &self.chain_source {
            ChainSource::FixedMatrix(m) => Ok(m.clone()),
            ChainSource::PerStepSampled(method) => {
                sample_ds(self.n, *method, derive_seed(derive_seed(self.seed, STREAM_MATRICES), k as u64))
            }
        }
    }

    pub fn reduction_times(&self) -> Vec<f64> {
        sample_reduction_times(self.rate, self.horizon, derive_seed(self.seed, STREAM_TIMES))
    }

    fn initial_distribution(&self) -> Result<ProbabilityVector> {
        match &self.initial_state {
            InitialState::Basis(i) => ProbabilityVector::basis(self.n, *i),
            InitialState::Distribution(p) => Ok(p.clone()),
        }
    }

    fn initial_basis(&self) -> usize {
        match &self.initial_state {
            InitialState::Basis(i) => *i,
            InitialState::Distribution(p) => {
                draw_basis_state(p.as_slice(), rng_from_seed(derive_seed(self.seed, STREAM_INITIAL)).random())
            }
        }
    }
}

/// Arrival times of a rate-`rate` Poisson process on `(0, horizon]`.
pub fn sample_reduction_times(rate: f64, horizon: f64, seed: u64) -> Vec<f64> {
    if !(rate > 0.0) || !(horizon > 0.0) {
        return Vec::new();
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut rng = rng_from_seed(seed);
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        let gap: f64 = rng.sample(exp);
        if gap <= 0.0 {
            continue;
        }
        t += gap;
        if t > horizon {
            return times;
        }
        times.push(t);
    }
}

/// Inverse-CDF draw from `p` with uniform `u ∈ [0, 1)`; ties go to the lower index.
pub fn draw_basis_state(p: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, &x) in p.iter().enumerate() {
        cumulative += x;
        if u < cumulative {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// One selective realization of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub alphas: Vec<Alpha>,
    /// Initial basis state before the first step.
    pub start: usize,
    pub times: Vec<f64>,
    /// State after each reduction.
    pub states: Vec<usize>,
    /// `entropies[k][a]`: `H_α` of the distribution reduced at step `k`.
    pub entropies: Vec<Vec<f64>>,
    /// `‖p_k − uniform‖₁` of the same distributions.
    pub distances: Vec<f64>,
    /// Running product of step Dobrushin coefficients.
    pub dobrushin_bounds: Vec<f64>,
}

fn entropy_row(p: &ProbabilityVector, alphas: &[Alpha]) -> Vec<f64> {
    alphas.iter().map(|&a| renyi_entropy(p, a)).collect()
}

fn chain_for(cfg: &ProcessConfig, steps: usize) -> Result<Vec<StochasticMatrix>> {
    (0..steps).map(|k| cfg.step_matrix(k)).collect()
}

fn walk<R: Rng>(chain: &[StochasticMatrix], start: usize, rng: &mut R) -> Vec<usize> {
    let mut state = start;
    chain
        .iter()
        .map(|m| {
            state = draw_basis_state(&m.column(state), rng.random());
            state
        })
        .collect()
}

pub fn run_trajectory(cfg: &ProcessConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let times = cfg.reduction_times();
    let chain = chain_for(cfg, times.len())?;
    let start = cfg.initial_basis();
    let states = walk(&chain, start, &mut rng_from_seed(derive_seed(cfg.seed, STREAM_REDUCTIONS)));
    let mut entropies = Vec::with_capacity(times.len());
    let mut distances = Vec::with_capacity(times.len());
    let mut dobrushin_bounds = Vec::with_capacity(times.len());
    let mut bound = 1.0;
    let mut previous = start;
    for (m, &state) in chain.iter().zip(&states) {
        let p = ProbabilityVector::from_product(m.column(previous));
        entropies.push(entropy_row(&p, &cfg.alphas));
        distances.push(p.l1_distance_to_uniform());
        bound *= m.dobrushin_coefficient();
        dobrushin_bounds.push(bound);
        previous = state;
    }
    Ok(TrajectoryRecord { alphas: cfg.alphas.clone(), start, times, states, entropies, distances, dobrushin_bounds })
}

/// Deterministic evolution `p_{k+1} = M_k p_k` with per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTrace {
    pub alphas: Vec<Alpha>,
    /// `p_0, …, p_K`.
    pub distributions: Vec<ProbabilityVector>,
    pub entropies: Vec<Vec<f64>>,
    pub distances: Vec<f64>,
    /// `‖p_0 − uniform‖₁ · Π_{i<k} τ(M_i)`.
    pub predicted_bounds: Vec<f64>,
}

pub fn evolve_distribution(
    chain: &[StochasticMatrix],
    p0: &ProbabilityVector,
    alphas: &[Alpha],
) -> Result<DistributionTrace> {
    let d0 = p0.l1_distance_to_uniform();
    let mut trace = DistributionTrace {
        alphas: alphas.to_vec(),
        distributions: vec![p0.clone()],
        entropies: vec![entropy_row(p0, alphas)],
        distances: vec![d0],
        predicted_bounds: vec![d0],
    };
    let mut p = p0.clone();
    let mut bound = d0;
    for m in chain {
        p = apply(m, &p)?;
        bound *= m.dobrushin_coefficient();
        trace.entropies.push(entropy_row(&p, alphas));
        trace.distances.push(p.l1_distance_to_uniform());
        trace.predicted_bounds.push(bound);
        trace.distributions.push(p.clone());
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub trajectories: usize,
    pub times: Vec<f64>,
    pub trace: DistributionTrace,
    /// `counts[k][i]`: trajectories in state `i` after `k` reductions (row 0 is the
    /// initial state).
    pub counts: Vec<Vec<u64>>,
}

impl EnsembleReport {
    /// `‖empirical_k − p_k‖₁` per step.
    pub fn empirical_deviation(&self) -> Vec<f64> {
        let total = self.trajectories as f64;
        self.counts
            .iter()
            .zip(&self.trace.distributions)
            .map(|(c, p)| c.iter().zip(p.as_slice()).map(|(&k, &q)| (k as f64 / total - q).abs()).sum())
            .collect()
    }
}

/// Exact distribution evolution plus `trajectories` selective runs sharing the clock
/// and the chain. Each run draws from its own derived stream, so the counts do not
/// depend on the number of worker threads.
pub fn run_ensemble(cfg: &ProcessConfig, trajectories: usize) -> Result<EnsembleReport> {
    cfg.validate()?;
    if trajectories == 0 {
        return Err(Error::InvalidConfig("at least one trajectory is required".into()));
    }
    let times = cfg.reduction_times();
    let chain = chain_for(cfg, times.len())?;
    let p0 = cfg.initial_distribution()?;
    let trace = evolve_distribution(&chain, &p0, &cfg.alphas)?;
    let n = cfg.n;
    let ensemble_seed = derive_seed(cfg.seed, STREAM_ENSEMBLE);
    let zero = || vec![vec![0u64; n]; chain.len() + 1];
    let counts = (0..trajectories as u64)
        .into_par_iter()
        .fold(zero, |mut acc, t| {
            let mut rng = rng_from_seed(derive_seed(ensemble_seed, t));
            let start = match &cfg.initial_state {
                InitialState::Basis(i) => *i,
                InitialState::Distribution(p) => draw_basis_state(p.as_slice(), rng.random()),
            };
            acc[0][start] += 1;
            for (k, s) in walk(&chain, start, &mut rng).into_iter().enumerate() {
                acc[k + 1][s] += 1;
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                ra.iter_mut().zip(rb).for_each(|(x, y)| *x += y);
            }
            a
        });
    Ok(EnsembleReport { trajectories, times, trace, counts })
}

fn check_chain(chain: &[StochasticMatrix]) -> Result<usize> {
    let n = chain.first().map(StochasticMatrix::dim).ok_or_else(|| Error::InvalidConfig("empty chain".into()))?;
    if let Some(m) = chain.iter().find(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
    }
    Ok(n)
}

/// `Π_k M_k[j_{k+1}, j_k]`: probability of the history given its first state.
pub fn history_probability(chain: &[StochasticMatrix], history: &[usize]) -> Result<f64> {
    if history.len() != chain.len() + 1 {
        return Err(Error::DimensionMismatch { expected: chain.len() + 1, found: history.len() });
    }
    let n = if chain.is_empty() { usize::MAX } else { check_chain(chain)? };
    if let Some(&j) = history.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    Ok(chain.iter().zip(history.windows(2)).map(|(m, w)| m.get(w[1], w[0])).product())
}

/// `Σ_h p0[h_0] · P(h | h_0)` over all `n^{L+1}` histories, by enumeration.
pub fn total_history_probability(chain: &[StochasticMatrix], p0: &ProbabilityVector) -> Result<f64> {
    let n = check_chain(chain)?;
    if p0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p0.len() });
    }
    let len = chain.len() + 1;
    let count = n.checked_pow(len as u32).filter(|&c| c <= 1 << 24).ok_or(Error::InvalidDimension(n))?;
    let mut history = vec![0usize; len];
    let mut total = 0.0;
    for mut code in 0..count {
        for slot in history.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        total += p0.as_slice()[history[0]] * history_probability(chain, &history)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainContraction {
    /// `τ(M_L ⋯ M_1)`.
    pub product_coefficient: f64,
    /// `Π τ(M_k)`.
    pub coefficient_product: f64,
}

pub fn chain_contraction(chain: &[StochasticMatrix]) -> Result<ChainContraction> {
    check_chain(chain)?;
    if chain.iter().any(|m| !m.is_doubly_stochastic()) {
        return Err(Error::NotDoublyStochastic);
    }
    let mut product = chain[0].clone();
    for m in &chain[1..] {
        product = m.compose(&product)?;
    }
    Ok(ChainContraction {
        product_coefficient: product.dobrushin_coefficient(),
        coefficient_product: chain.iter().map(StochasticMatrix::dobrushin_coefficient).product(),
    })
}
