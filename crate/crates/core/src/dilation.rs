//! Unitary dilation of a bistochastic Kraus set with a `2N`-dimensional bath.
//!
//! The bath is `C^N ⊕ C^N`, so system ⊗ bath splits into two copies (`σ = +, −`) of
//! `H^N = C^n ⊕ … ⊕ C^n`. Inside each copy the unitary sends the diagonal vectors
//! `(v, …, v)` to `(√N A_1 v, …, √N A_N v)`; the orthogonal complement of the
//! diagonal in one copy is mapped isometrically onto the complement of the image in
//! the other copy.
//!
//! Global basis order is `|i⟩ ⊗ |b⟩` with bath index `b = σ·N + α`, i.e. tensor
//! index `i·2N + σ·N + α`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kraus::KrausSet;
use crate::linalg::{unitarity_residual, CMatrix, CVector};
use crate::simplex::StochasticMatrix;

/// Largest supported system dimension and Kraus count.
pub const MAX_DILATION_DIM: usize = 16;

/// Tolerance for the unitarity and diagonal-action checks.
pub const DILATION_TOL: f64 = 1e-9;

/// Order in which standard basis vectors are offered to Gram–Schmidt when completing
/// the complements of the diagonal and of its image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompletionOrder {
    #[default]
    Standard,
    Reversed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDilation {
    n: usize,
    kraus_count: usize,
    u: CMatrix,
    bath_state: CVector,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Index of `|i⟩ ⊗ |α, σ⟩` in the global basis; `sigma` is 0 for `+`, 1 for `−`.
pub fn tensor_index(n_kraus: usize, i: usize, alpha: usize, sigma: usize) -> usize {
    i * 2 * n_kraus + sigma * n_kraus + alpha
}

impl UnitaryDilation {
    /// Reassembles a dilation from its parts, checking shapes and unitarity.
    pub fn from_parts(n: usize, kraus_count: usize, u: CMatrix, bath_state: CVector) -> Result<Self> {
        let dim = 2 * n * kraus_count;
        if n == 0 || kraus_count == 0 {
            return Err(Error::EmptyDimension);
        }
        if u.nrows() != dim || u.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: u.nrows() });
        }
        if bath_state.len() != 2 * kraus_count {
            return Err(Error::DimensionMismatch { expected: 2 * kraus_count, found: bath_state.len() });
        }
        let residual = unitarity_residual(&u);
        if residual > DILATION_TOL {
            return Err(Error::UnitarityCheckFailed { residual });
        }
        Ok(Self { n, kraus_count, u, bath_state })
    }

    pub fn system_dim(&self) -> usize {
        self.n
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus_count
    }

    pub fn bath_dim(&self) -> usize {
        2 * self.kraus_count
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn bath_state(&self) -> &CVector {
        &self.bath_state
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.u)
    }

    /// `max |U(e_j ⊕ … ⊕ e_j ⊕ 0) − (√N A_α e_j)_α ⊕ 0|` over the basis `e_j`.
    pub fn diagonal_action_residual(&self, kraus: &KrausSet) -> Result<f64> {
        let (n, nk) = (self.n, self.kraus_count);
        if kraus.dim() != n || kraus.len() != nk {
            return Err(Error::DimensionMismatch { expected: n * nk, found: kraus.dim() * kraus.len() });
        }
        let scale = (nk as f64).sqrt();
        let mut worst = 0.0_f64;
        for j in 0..n {
            let mut input = CVector::zeros(2 * n * nk);
            for alpha in 0..nk {
                input[tensor_index(nk, j, alpha, 0)] = Complex64::new(1.0, 0.0);
            }
            let out = &self.u * input;
            for i in 0..n {
                for (alpha, a) in kraus.operators().iter().enumerate() {
                    let expect = a[(i, j)] * scale;
                    worst = worst.max((out[tensor_index(nk, i, alpha, 0)] - expect).norm());
                    worst = worst.max(out[tensor_index(nk, i, alpha, 1)].norm());
                }
            }
        }
        Ok(worst)
    }
}

/// Builds the dilation with the standard completion order.
pub fn dilate(kraus: &KrausSet) -> Result<UnitaryDilation> {
    dilate_with(kraus, CompletionOrder::Standard)
}

pub fn dilate_with(kraus: &KrausSet, order: CompletionOrder) -> Result<UnitaryDilation> {
    if !kraus.is_unital() {
        return Err(Error::NotBistochastic { residual: kraus.unital_residual() });
    }
    let (n, nk) = (kraus.dim(), kraus.len());
    if n > MAX_DILATION_DIM || nk > MAX_DILATION_DIM {
        return Err(Error::InvalidDimension(n.max(nk)));
    }
    let d = n * nk;
    // Copy coordinates: slot α, system index i ↦ α·n + i.
    let inv_sqrt = 1.0 / (nk as f64).sqrt();
    let diagonal: Vec<CVector> = (0..n)
        .map(|i| CVector::from_fn(d, |k, _| if k % n == i { Complex64::new(inv_sqrt, 0.0) } else { zero() }))
        .collect();
    // U maps the normalized diagonal vector for e_j to (A_α e_j)_α.
    let image: Vec<CVector> =
        (0..n).map(|j| CVector::from_fn(d, |k, _| kraus.operators()[k / n][(k % n, j)])).collect();
    let diag_complement = complete_orthonormal(&diagonal, d, order)?;
    let image_complement = complete_orthonormal(&image, d, order)?;

    let mut block_v = CMatrix::zeros(d, d);
    for (x, y) in diagonal.iter().zip(&image) {
        block_v += y * x.adjoint();
    }
    let mut block_m = CMatrix::zeros(d, d);
    for (x, y) in diag_complement.iter().zip(&image_complement) {
        block_m += y * x.adjoint();
    }

    // Direct-sum form [[V, m], [m, V]] over (copy +, copy −), then permuted into the
    // tensor basis.
    let direct_to_tensor = |k: usize| {
        let (sigma, rest) = (k / d, k % d);
        tensor_index(nk, rest % n, rest / n, sigma)
    };
    let dim = 2 * d;
    let mut u = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let same_copy = (r / d) == (c / d);
            let block = if same_copy { &block_v } else { &block_m };
            u[(direct_to_tensor(r), direct_to_tensor(c))] = block[(r % d, c % d)];
        }
    }

    let residual = unitarity_residual(&u);
    if residual > DILATION_TOL {
        return Err(Error::UnitarityCheckFailed { residual });
    }
    let bath_state = CVector::from_fn(2 * nk, |b, _| if b < nk { Complex64::new(inv_sqrt, 0.0) } else { zero() });
    Ok(UnitaryDilation { n, kraus_count: nk, u, bath_state })
}

/// Extends the orthonormal family `initial` to a basis of `C^dim` by modified
/// Gram–Schmidt over standard basis vectors, returning only the added vectors.
fn complete_orthonormal(initial: &[CVector], dim: usize, order: CompletionOrder) -> Result<Vec<CVector>> {
    let needed = dim - initial.len();
    let mut basis: Vec<CVector> = initial.to_vec();
    let mut added = Vec::with_capacity(needed);
    let candidates: Vec<usize> = match order {
        CompletionOrder::Standard => (0..dim).collect(),
        CompletionOrder::Reversed => (0..dim).rev().collect(),
    };
    // A candidate nearly inside the current span is skipped on the first pass and
    // only reconsidered with a looser cutoff if the basis is still short.
    for cutoff in [0.1, 1e-4, 1e-8] {
        for &k in &candidates {
            if added.len() == needed {
                break;
            }
            let mut v = CVector::zeros(dim);
            v[k] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&v);
                    v -= b * proj;
                }
            }
            let norm = v.norm();
            if norm > cutoff {
                let v = v.unscale(norm);
                basis.push(v.clone());
                added.push(v);
            }
        }
    }
    if added.len() != needed {
        return Err(Error::ComputationFailed(format!(
            "orthonormal completion found {} of {needed} vectors",
            added.len()
        )));
    }
    Ok(added)
}

/// System reduction from the distinguished bath state:
/// `M_ij = Σ_b |⟨i, b| U |j, bath⟩|²` over all bath basis states `b`.
pub fn reduce_dilation(dilation: &UnitaryDilation) -> Result<StochasticMatrix> {
    let (n, bath) = (dilation.n, dilation.bath_dim());
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        let mut input = CVector::zeros(n * bath);
        for b in 0..bath {
            input[j * bath + b] = dilation.bath_state[b];
        }
        let out = &dilation.u * input;
        for i in 0..n {
            data[i * n + j] = (0..bath).map(|b| out[i * bath + b].norm_sqr()).sum();
        }
    }
    StochasticMatrix::from_row_major(n, data, DILATION_TOL)
}

/// Literal average `(1/2N) Σ_{α,σ} |⟨i α σ|U|j α σ⟩|²`, returned without any claim
/// that it reproduces the descended matrix.
pub fn paper_reconstruction(dilation: &UnitaryDilation) -> DMatrix<f64> {
    let (n, nk) = (dilation.n, dilation.kraus_count);
    DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for alpha in 0..nk {
            for sigma in 0..2 {
                s += dilation.u[(tensor_index(nk, i, alpha, sigma), tensor_index(nk, j, alpha, sigma))].norm_sqr();
            }
        }
        s / (2 * nk) as f64
    })
}

/// Entrywise ratio `M_ij / R_ij` over entries where `M_ij` exceeds `floor`, as
/// `(min, max)`; `None` if no entry qualifies.
pub fn reconstruction_ratio(m: &StochasticMatrix, reconstruction: &DMatrix<f64>, floor: f64) -> Option<(f64, f64)> {
    let n = m.dim();
    let ratios: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m.get(i, j) > floor && reconstruction[(i, j)] > 0.0)
        .map(|(i, j)| m.get(i, j) / reconstruction[(i, j)])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    Some((ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max)))
}
