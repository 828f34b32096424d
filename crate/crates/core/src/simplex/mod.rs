//! Probability vectors and stochastic matrices.
//!
//! Matrices are column-stochastic and act on column vectors: `Σ_i M[i][j] = 1` for
//! every column `j`, and `(Mp)_i = Σ_j M[i][j] p_j`. A matrix is doubly stochastic
//! when its rows also sum to one, which is equivalent to fixing the uniform vector.

mod sample;

pub use sample::{random_probability_vector, sample_ds, sample_stochastic, DsMethod, SINKHORN_MAX_ITER};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tolerance applied when ingesting vectors and matrices.
pub const INGEST_TOL: f64 = 1e-12;

/// Tolerance for asserting derived properties (norm bounds, monotonicity).
pub const PROPERTY_TOL: f64 = 1e-10;

// Column sums closer to one than this are rounding noise and left untouched, which
// keeps validation idempotent.
const RENORMALIZE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Accepts entries `≥ −1e-12` summing to 1 within `1e-12`; small negatives are
    /// clamped and the result renormalized.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::EmptyDimension);
        }
        if let Some((i, &x)) = p.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < -INGEST_TOL) {
            return Err(Error::InvalidProbabilityVector(format!("entry {i} is {x}")));
        }
        let mut p: Vec<f64> = p.into_iter().map(|x| x.max(0.0)).collect();
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > INGEST_TOL {
            return Err(Error::InvalidProbabilityVector(format!("entries sum to {total}")));
        }
        if (total - 1.0).abs() > RENORMALIZE_FLOOR {
            for x in &mut p {
                *x /= total;
            }
        }
        Ok(Self(p))
    }

    /// Normalizes arbitrary nonnegative weights onto the simplex.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || total <= 0.0 {
            return Err(Error::InvalidProbabilityVector("weights must be nonnegative with positive sum".into()));
        }
        Self::new(w.into_iter().map(|x| x / total).collect())
    }

    /// Result of a matrix product; only rounding-level negatives are clamped.
    pub(crate) fn from_product(p: Vec<f64>) -> Self {
        Self(p.into_iter().map(|x| x.max(0.0)).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        uniform_state(n)
    }

    /// The basis vector `e_index`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut p = vec![0.0; n];
        p[index] = 1.0;
        Ok(Self(p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    /// `‖p − uniform‖₁`.
    pub fn l1_distance_to_uniform(&self) -> f64 {
        let u = 1.0 / self.len() as f64;
        self.0.iter().map(|a| (a - u).abs()).sum()
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// The uniform distribution on `n` points.
pub fn uniform_state(n: usize) -> Result<ProbabilityVector> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    Ok(ProbabilityVector(vec![1.0 / n as f64; n]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    ColumnStochastic,
    DoublyStochastic,
}

/// Induced operator norms on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormOrder {
    One,
    Two,
    Inf,
}

impl NormOrder {
    pub const ALL: [NormOrder; 3] = [NormOrder::One, NormOrder::Two, NormOrder::Inf];
}

/// Contraction diagnostics of a stochastic matrix on the zero-sum subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    pub dobrushin: f64,
    pub subdominant_singular: f64,
    /// `dobrushin < 1 − tol`.
    pub is_generic: bool,
}

/// Column-stochastic `n×n` matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    data: Vec<f64>,
    kind: MatrixKind,
}

impl StochasticMatrix {
    /// Validates a square matrix given by rows.
    ///
    /// Entries in `[−tol, 0)` are clamped to zero; columns whose sum is within `tol`
    /// of one are renormalized. The kind is decided by the row sums after that.
    pub fn validate(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::NonSquare { rows: n, row, cols: r.len() });
        }
        Self::from_row_major(n, rows.concat(), tol)
    }

    /// Same as [`StochasticMatrix::validate`] for row-major data of length `n²`.
    pub fn from_row_major(n: usize, mut data: Vec<f64>, tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != n * n {
            return Err(Error::NonSquare { rows: n, row: data.len() / n, cols: data.len() % n });
        }
        if !(tol > 0.0) {
            return Err(Error::Format(format!("tolerance must be positive, got {tol}")));
        }
        for (k, x) in data.iter_mut().enumerate() {
            if !x.is_finite() || *x < -tol {
                return Err(Error::NegativeEntry { row: k / n, col: k % n, value: *x });
            }
            *x = x.max(0.0);
        }
        for j in 0..n {
            let sum: f64 = (0..n).map(|i| data[i * n + j]).sum();
            let deviation = sum - 1.0;
            if deviation.abs() > tol {
                return Err(Error::ColumnSumViolation { column: j, deviation });
            }
            if deviation.abs() > RENORMALIZE_FLOOR {
                for i in 0..n {
                    data[i * n + j] /= sum;
                }
            }
        }
        let doubly = (0..n).all(|i| {
            let sum: f64 = data[i * n..(i + 1) * n].iter().sum();
            (sum - 1.0).abs() <= tol
        });
        let kind = if doubly { MatrixKind::DoublyStochastic } else { MatrixKind::ColumnStochastic };
        Ok(Self { n, data, kind })
    }

    /// Validates and additionally requires the doubly stochastic kind.
    pub fn doubly_stochastic(n: usize, data: Vec<f64>, tol: f64) -> Result<Self> {
        let m = Self::from_row_major(n, data, tol)?;
        if m.is_doubly_stochastic() {
            Ok(m)
        } else {
            Err(Error::NotDoublyStochastic)
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::permutation(&(0..n).collect::<Vec<_>>())
    }

    /// All entries `1/n`.
    pub fn flat(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(Self { n, data: vec![1.0 / n as f64; n * n], kind: MatrixKind::DoublyStochastic })
    }

    /// Permutation matrix with a one at `(sigma[j], j)`.
    pub fn permutation(sigma: &[usize]) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut seen = vec![false; n];
        let mut data = vec![0.0; n * n];
        for (j, &i) in sigma.iter().enumerate() {
            if i >= n || seen[i] {
                return Err(Error::Format(format!("{sigma:?} is not a permutation")));
            }
            seen[i] = true;
            data[i * n + j] = 1.0;
        }
        Ok(Self { n, data, kind: MatrixKind::DoublyStochastic })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.kind == MatrixKind::DoublyStochastic
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Row-major entries.
    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// `Mp`.
    pub fn apply(&self, p: &ProbabilityVector) -> Result<ProbabilityVector> {
        apply(self, p)
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rhs.n });
        }
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        Self::from_row_major(n, data, PROPERTY_TOL)
    }

    /// `‖M·uniform − uniform‖∞`.
    pub fn uniform_defect(&self) -> f64 {
        let u = 1.0 / self.n as f64;
        self.row_sums().iter().fold(0.0, |acc, s| acc.max((s * u - u).abs()))
    }

    /// Dobrushin coefficient `½ max_{j,k} Σ_i |M_ij − M_ik|`.
    pub fn dobrushin_coefficient(&self) -> f64 {
        dobrushin_coefficient(self)
    }

    pub fn subdominant_singular_value(&self) -> Result<f64> {
        subdominant_singular_value(self)
    }

    pub fn contraction_report(&self, tol: f64) -> Result<ContractionReport> {
        let dobrushin = self.dobrushin_coefficient();
        Ok(ContractionReport {
            dobrushin,
            subdominant_singular: self.subdominant_singular_value()?,
            is_generic: dobrushin < 1.0 - tol,
        })
    }

    /// Induced operator norm for the chosen vector norm.
    pub fn induced_norm(&self, order: NormOrder) -> Result<f64> {
        induced_norm(self.n, &self.data, order)
    }
}

/// Induced norm of an `n×n` real matrix in row-major storage.
pub(crate) fn induced_norm(n: usize, data: &[f64], order: NormOrder) -> Result<f64> {
    Ok(match order {
        NormOrder::One => (0..n).map(|j| (0..n).map(|i| data[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max),
        NormOrder::Inf => data.chunks(n).map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max),
        NormOrder::Two => largest_singular_value(DMatrix::from_row_slice(n, n, data))?,
    })
}

fn largest_singular_value(m: DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let svd = m
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::ComputationFailed("singular value decomposition".into()))?;
    Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
}

/// `(Mp)_i = Σ_j M_ij p_j`.
pub fn apply(m: &StochasticMatrix, p: &ProbabilityVector) -> Result<ProbabilityVector> {
    if m.n != p.len() {
        return Err(Error::DimensionMismatch { expected: m.n, found: p.len() });
    }
    let out = m.data.chunks(m.n).map(|row| row.iter().zip(p.as_slice()).map(|(a, b)| a * b).sum()).collect();
    Ok(ProbabilityVector::from_product(out))
}

pub fn dobrushin_coefficient(m: &StochasticMatrix) -> f64 {
    let n = m.n;
    let mut best = 0.0_f64;
    for j in 0..n {
        for k in j + 1..n {
            let d: f64 = (0..n).map(|i| (m.get(i, j) - m.get(i, k)).abs()).sum();
            best = best.max(0.5 * d);
        }
    }
    best.min(1.0)
}

/// Orthonormal basis of `{v : Σ v_i = 0}` (Helmert vectors) as an `n×(n−1)` matrix.
pub(crate) fn zero_sum_basis(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = 1.0 / norm;
        }
        q[(k, k - 1)] = -(k as f64) / norm;
    }
    q
}

/// Largest singular value of `M` restricted to the zero-sum subspace.
pub fn subdominant_singular_value(m: &StochasticMatrix) -> Result<f64> {
    if m.n == 1 {
        return Ok(0.0);
    }
    let q = zero_sum_basis(m.n);
    let restricted = q.transpose() * m.to_dmatrix() * &q;
    largest_singular_value(restricted)
}
