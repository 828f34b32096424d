//! Birkhoff–von Neumann decomposition by greedy peeling of perfect matchings.

use crate::error::{Error, Result};
use crate::simplex::{induced_norm, NormOrder, StochasticMatrix, PROPERTY_TOL};

/// `M = Σ a_k P_k`. Permutation `k` has a one at `(perm[j], j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffDecomposition {
    n: usize,
    weights: Vec<f64>,
    permutations: Vec<Vec<usize>>,
}

/// Most terms any decomposition of an `n×n` matrix needs: `(n − 1)² + 1`.
pub fn term_limit(n: usize) -> usize {
    (n.max(1) - 1).pow(2) + 1
}

impl BirkhoffDecomposition {
    /// Checks weights (positive, summing to 1 within `1e-10`), permutations (valid
    /// and pairwise distinct) and the term bound.
    pub fn new(n: usize, weights: Vec<f64>, permutations: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if weights.len() != permutations.len() || weights.is_empty() {
            return Err(Error::Format("need one weight per permutation".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Format("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROPERTY_TOL {
            return Err(Error::Format(format!("weights sum to {total}")));
        }
        for perm in &permutations {
            let mut seen = vec![false; n];
            if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::Format(format!("{perm:?} is not a permutation of 0..{n}")));
            }
        }
        for (k, p) in permutations.iter().enumerate() {
            if permutations[..k].contains(p) {
                return Err(Error::Format(format!("permutation {p:?} repeated")));
            }
        }
        if permutations.len() > term_limit(n) {
            return Err(Error::TermLimitExceeded { limit: term_limit(n) });
        }
        Ok(Self { n, weights, permutations })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.permutations
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ a_k ‖P_k‖`, identical for every induced norm since `‖P_k‖ = 1`.
    pub fn norm_bound(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `(‖M‖_α, Σ a_k ‖P_k‖_α)` for the recomposed matrix.
    pub fn norm_check(&self, order: NormOrder) -> Result<(f64, f64)> {
        let data = self.dense();
        let perm_norm = |p: &Vec<usize>| -> Result<f64> {
            let mut d = vec![0.0; self.n * self.n];
            for (j, &i) in p.iter().enumerate() {
                d[i * self.n + j] = 1.0;
            }
            induced_norm(self.n, &d, order)
        };
        let mut bound = 0.0;
        for (w, p) in self.weights.iter().zip(&self.permutations) {
            bound += w * perm_norm(p)?;
        }
        Ok((induced_norm(self.n, &data, order)?, bound))
    }

    fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for (w, p) in self.weights.iter().zip(&self.permutations) {
            for (j, &i) in p.iter().enumerate() {
                data[i * n + j] += w;
            }
        }
        data
    }
}

/// Perfect matching of columns to rows on the support `allowed[i*n + j]`, by
/// augmenting paths scanned in index order. Returns `row_of[j]`.
fn perfect_matching(n: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    fn augment(j: usize, n: usize, allowed: &[bool], visited: &mut [bool], col_of: &mut [Option<usize>]) -> bool {
        for i in 0..n {
            if !allowed[i * n + j] || visited[i] {
                continue;
            }
            visited[i] = true;
            if col_of[i].is_none_or(|other| augment(other, n, allowed, visited, col_of)) {
                col_of[i] = Some(j);
                return true;
            }
        }
        false
    }

    let mut col_of: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        let mut visited = vec![false; n];
        if !augment(j, n, allowed, &mut visited, &mut col_of) {
            return None;
        }
    }
    let mut row_of = vec![0; n];
    for (i, c) in col_of.iter().enumerate() {
        row_of[c.expect("perfect matching covers every row")] = i;
    }
    Some(row_of)
}

/// Greedy decomposition: repeatedly match the support of the residual (entries
/// above `tol`), subtract the smallest matched entry times that permutation, and
/// stop once the residual is below `tol` everywhere.
pub fn birkhoff_decompose(m: &StochasticMatrix, tol: f64) -> Result<BirkhoffDecomposition> {
    if !m.is_doubly_stochastic() {
        return Err(Error::NotDoublyStochastic);
    }
    if !(tol > 0.0) {
        return Err(Error::Format(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.dim();
    let limit = term_limit(n);
    let mut residual: Vec<f64> = m.as_row_major().iter().map(|&x| if x > tol { x } else { 0.0 }).collect();
    let mut weights = Vec::new();
    let mut permutations = Vec::new();
    while residual.iter().copied().fold(0.0, f64::max) > tol {
        let allowed: Vec<bool> = residual.iter().map(|&x| x > tol).collect();
        let Some(perm) = perfect_matching(n, &allowed) else {
            // Leftover mass at the scale of the tolerance is rounding dust.
            let mass = residual.chunks(n).map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
            if mass <= n as f64 * tol {
                break;
            }
            return Err(Error::NoPerfectMatching { residual: mass });
        };
        if weights.len() == limit {
            return Err(Error::TermLimitExceeded { limit });
        }
        let w = perm.iter().enumerate().map(|(j, &i)| residual[i * n + j]).fold(f64::INFINITY, f64::min);
        for (j, &i) in perm.iter().enumerate() {
            let x = &mut residual[i * n + j];
            *x -= w;
            if *x <= tol {
                *x = 0.0;
            }
        }
        weights.push(w);
        permutations.push(perm);
    }
    Ok(BirkhoffDecomposition { n, weights, permutations })
}

/// `Σ a_k P_k`.
pub fn recompose(d: &BirkhoffDecomposition) -> Result<StochasticMatrix> {
    StochasticMatrix::from_row_major(d.n, d.dense(), PROPERTY_TOL)
}
