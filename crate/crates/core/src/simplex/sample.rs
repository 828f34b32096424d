use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use super::{ProbabilityVector, StochasticMatrix, INGEST_TOL};
use crate::error::{Error, Result};
use crate::linalg::random_unitary;
use crate::rng::rng_from_seed;

pub const SINKHORN_MAX_ITER: usize = 10_000;

const SINKHORN_TARGET: f64 = 1e-14;

/// How a random doubly stochastic matrix is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DsMethod {
    /// Random convex combination of `n + 1` random permutation matrices.
    PermutationMixture,
    /// Alternating row/column normalization of an entrywise-positive matrix.
    Sinkhorn,
    /// `|U_ij|²` for a Haar-random unitary.
    Unistochastic,
}

impl DsMethod {
    pub const ALL: [DsMethod; 3] = [DsMethod::PermutationMixture, DsMethod::Sinkhorn, DsMethod::Unistochastic];

    pub fn name(self) -> &'static str {
        match self {
            DsMethod::PermutationMixture => "permutation-mixture",
            DsMethod::Sinkhorn => "sinkhorn",
            DsMethod::Unistochastic => "unistochastic",
        }
    }
}

impl std::str::FromStr for DsMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DsMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown sampling method `{s}`")))
    }
}

/// Flat simplex point: normalized i.i.d. exponentials.
fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Random doubly stochastic matrix; deterministic in `(n, method, seed)`.
pub fn sample_ds(n: usize, method: DsMethod, seed: u64) -> Result<StochasticMatrix> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    if n == 1 {
        return StochasticMatrix::identity(1);
    }
    let mut rng = rng_from_seed(seed);
    let data = match method {
        DsMethod::PermutationMixture => {
            let weights = random_simplex_point(n + 1, &mut rng);
            let mut data = vec![0.0; n * n];
            let mut sigma: Vec<usize> = (0..n).collect();
            for w in weights {
                sigma.shuffle(&mut rng);
                for (j, &i) in sigma.iter().enumerate() {
                    data[i * n + j] += w;
                }
            }
            data
        }
        DsMethod::Sinkhorn => sinkhorn(n, &mut rng)?,
        DsMethod::Unistochastic => unistochastic_data(n, &mut rng),
    };
    StochasticMatrix::doubly_stochastic(n, data, INGEST_TOL)
}

fn unistochastic_data<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let u = random_unitary(n, rng);
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(u[(i, j)].norm_sqr());
        }
    }
    data
}

fn sinkhorn<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    // Bounded away from zero so the scaling converges quickly.
    let mut data: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.05..1.0)).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..SINKHORN_MAX_ITER {
        for row in data.chunks_mut(n) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| data[i * n + j]).sum();
            (0..n).for_each(|i| data[i * n + j] /= s);
        }
        residual = data.chunks(n).map(|row| (row.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
        if residual <= SINKHORN_TARGET {
            return Ok(data);
        }
    }
    Err(Error::SinkhornNotConverged { residual })
}

/// Flat-Dirichlet random point of the simplex; deterministic in `(n, seed)`.
pub fn random_probability_vector(n: usize, seed: u64) -> Result<ProbabilityVector> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    ProbabilityVector::from_weights(random_simplex_point(n, &mut rng_from_seed(seed)))
}

/// Column-stochastic matrix with independent flat-Dirichlet columns; almost surely
/// not doubly stochastic.
pub fn sample_stochastic(n: usize, seed: u64) -> Result<StochasticMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for (i, x) in random_simplex_point(n, &mut rng).into_iter().enumerate() {
            data[i * n + j] = x;
        }
    }
    StochasticMatrix::from_row_major(n, data, INGEST_TOL)
}
