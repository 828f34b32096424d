//! Kraus sets, their descent to stochastic matrices, and channel action on density
//! operators.
//!
//! A Kraus set `{A_α}` descends to the column-stochastic matrix
//! `M_ij = Σ_α |⟨i|A_α|j⟩|²`. Its columns sum to the diagonal of `Σ A_α†A_α` and its
//! rows to the diagonal of `Σ A_α A_α†`, so a trace-preserving unital set gives a
//! doubly stochastic matrix.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, random_unitary, unitarity_residual, CMatrix, DensityMatrix, OPERATOR_TOL};
use crate::rng::{rng_from_seed, stream_rng};
use crate::simplex::{ProbabilityVector, StochasticMatrix};

/// Finite trace-preserving Kraus set on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    n: usize,
    operators: Vec<CMatrix>,
    unital: bool,
}

/// Whether [`ds_to_kraus`] keeps the zero operators of a sparse matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroOperators {
    #[default]
    Keep,
    Drop,
}

impl KrausSet {
    /// Requires `‖Σ A†A − I‖∞ ≤ 1e-10`; unitality is recorded, not required.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::InvalidKrausSet("no operators".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(k) = operators.iter().position(|a| a.nrows() != n || a.ncols() != n) {
            return Err(Error::InvalidKrausSet(format!("operator {k} is not {n}x{n}")));
        }
        let set = Self { n, operators, unital: false };
        let residual = set.trace_preserving_residual();
        if residual > OPERATOR_TOL {
            return Err(Error::InvalidKrausSet(format!("Σ A†A deviates from I by {residual:e}")));
        }
        let unital = set.unital_residual() <= OPERATOR_TOL;
        Ok(Self { unital, ..set })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of operators `N`.
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// `‖Σ A†A − I‖∞`.
    pub fn trace_preserving_residual(&self) -> f64 {
        let sum = self.operators.iter().fold(CMatrix::zeros(self.n, self.n), |acc, a| acc + a.adjoint() * a);
        max_abs(&(sum - CMatrix::identity(self.n, self.n)))
    }

    /// `‖Σ AA† − I‖∞`.
    pub fn unital_residual(&self) -> f64 {
        let sum = self.operators.iter().fold(CMatrix::zeros(self.n, self.n), |acc, a| acc + a * a.adjoint());
        max_abs(&(sum - CMatrix::identity(self.n, self.n)))
    }

    /// `M_ij = Σ_α |⟨i|A_α|j⟩|²`.
    pub fn to_stochastic(&self) -> Result<StochasticMatrix> {
        kraus_to_ds(self)
    }
}

/// `M_ij = Σ_α |⟨i|A_α|j⟩|²`. The kind follows the row-sum test, which agrees with
/// the unital flag whenever `Σ AA†` has off-diagonal mass only where its diagonal
/// also deviates from one.
pub fn kraus_to_ds(k: &KrausSet) -> Result<StochasticMatrix> {
    let n = k.n;
    let mut data = vec![0.0; n * n];
    for a in &k.operators {
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += a[(i, j)].norm_sqr();
            }
        }
    }
    StochasticMatrix::from_row_major(n, data, OPERATOR_TOL)
        .map_err(|e| Error::InvalidKrausSet(format!("descended matrix invalid: {e}")))
}

/// Rank-one set `A_(i,j) = √M_ij |i⟩⟨j|`, ordered row-major in `(i, j)`.
pub fn ds_to_kraus(m: &StochasticMatrix, zeros: ZeroOperators) -> Result<KrausSet> {
    if !m.is_doubly_stochastic() {
        return Err(Error::NotDoublyStochastic);
    }
    let n = m.dim();
    let mut ops = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let w = m.get(i, j);
            if w == 0.0 && zeros == ZeroOperators::Drop {
                continue;
            }
            let mut a = CMatrix::zeros(n, n);
            a[(i, j)] = Complex64::new(w.sqrt(), 0.0);
            ops.push(a);
        }
    }
    KrausSet::new(ops)
}

/// Unistochastic matrix `M_ij = |U_ij|²`.
pub fn unitary_to_ds(u: &CMatrix) -> Result<StochasticMatrix> {
    if u.nrows() != u.ncols() {
        return Err(Error::NonSquare { rows: u.nrows(), row: 0, cols: u.ncols() });
    }
    let residual = unitarity_residual(u);
    if residual > OPERATOR_TOL {
        return Err(Error::NotUnitary { residual });
    }
    let n = u.nrows();
    let data = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| u[(i, j)].norm_sqr()).collect();
    StochasticMatrix::from_row_major(n, data, OPERATOR_TOL)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `ρ ↦ Σ_α A_α ρ A_α†`.
pub fn apply_channel(k: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(k.n, rho.dim())?;
    let r = rho.matrix();
    let out = k.operators.iter().fold(CMatrix::zeros(k.n, k.n), |acc, a| acc + a * r * a.adjoint());
    DensityMatrix::new(out)
}

/// Complete family of mutually orthogonal Hermitian projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    n: usize,
    projectors: Vec<CMatrix>,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidProjectorSet(msg));
        let Some(first) = projectors.first() else {
            return invalid("no projectors".into());
        };
        let n = first.nrows();
        let mut total = CMatrix::zeros(n, n);
        for (k, p) in projectors.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return invalid(format!("projector {k} is not {n}x{n}"));
            }
            if max_abs(&(p - p.adjoint())) > OPERATOR_TOL {
                return invalid(format!("projector {k} is not Hermitian"));
            }
            if max_abs(&(p * p - p)) > OPERATOR_TOL {
                return invalid(format!("projector {k} is not idempotent"));
            }
            for (l, q) in projectors.iter().enumerate().skip(k + 1) {
                if max_abs(&(p * q)) > OPERATOR_TOL {
                    return invalid(format!("projectors {k} and {l} are not orthogonal"));
                }
            }
            total += p;
        }
        if max_abs(&(total - CMatrix::identity(n, n))) > OPERATOR_TOL {
            return invalid("projectors do not sum to the identity".into());
        }
        Ok(Self { n, projectors })
    }

    /// Rank-one projectors onto the standard basis.
    pub fn computational_basis(n: usize) -> Result<Self> {
        Self::from_blocks(n, &(0..n).map(|i| vec![i]).collect::<Vec<_>>())
    }

    /// Coordinate projectors, one per block of basis indices; blocks must partition
    /// `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let ops = blocks
            .iter()
            .map(|block| {
                let mut p = CMatrix::zeros(n, n);
                for &i in block {
                    if i >= n {
                        return Err(Error::IndexOutOfRange { index: i, n });
                    }
                    p[(i, i)] = Complex64::new(1.0, 0.0);
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    /// Projectors onto groups of columns of a Haar-random unitary, with the given
    /// ranks (which must sum to `n`).
    pub fn random(n: usize, ranks: &[usize], seed: u64) -> Result<Self> {
        if ranks.iter().sum::<usize>() != n || ranks.contains(&0) {
            return Err(Error::InvalidProjectorSet(format!("ranks {ranks:?} do not partition {n}")));
        }
        let u = random_unitary(n, &mut rng_from_seed(seed));
        let mut start = 0;
        let ops = ranks
            .iter()
            .map(|&r| {
                let cols = u.columns(start, r);
                start += r;
                cols * cols.adjoint()
            })
            .collect();
        Self::new(ops)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// The projectors as a (unital) Kraus set.
    pub fn to_kraus(&self) -> Result<KrausSet> {
        KrausSet::new(self.projectors.clone())
    }
}

/// Lüders dephasing `ρ ↦ Σ_k P_k ρ P_k`.
pub fn luders_dephase(rho: &DensityMatrix, projectors: &ProjectorSet) -> Result<DensityMatrix> {
    check_dim(projectors.n, rho.dim())?;
    apply_channel(&projectors.to_kraus()?, rho)
}

/// Mixture of `k` Haar unitaries `{√w_i U_i}` with flat-Dirichlet weights.
pub fn random_unital_channel(n: usize, k: usize, seed: u64) -> Result<KrausSet> {
    if n == 0 || k == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut weight_rng = stream_rng(seed, 0);
    let mut unitary_rng = stream_rng(seed, 1);
    let w: Vec<f64> = (0..k).map(|_| weight_rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    let ops = w.iter().map(|wi| random_unitary(n, &mut unitary_rng).scale((wi / total).sqrt())).collect();
    KrausSet::new(ops)
}

/// Trace-preserving set cut from a Haar isometry `C^n → C^{nk}`; generically not
/// unital for `k ≥ 2`.
pub fn random_trace_preserving_channel(n: usize, k: usize, seed: u64) -> Result<KrausSet> {
    if n == 0 || k == 0 {
        return Err(Error::EmptyDimension);
    }
    let big = random_unitary(n * k, &mut rng_from_seed(seed));
    let ops = (0..k).map(|a| big.view((a * n, 0), (n, n)).into_owned()).collect();
    KrausSet::new(ops)
}

/// Smallest `max_ij |M_ij − T_ij|` between `target` and `|U_ij|²` over `samples`
/// Haar unitaries. A statistical probe of whether `target` is unistochastic.
pub fn unistochastic_search_distance(target: &StochasticMatrix, samples: usize, seed: u64) -> f64 {
    let n = target.dim();
    let mut rng = rng_from_seed(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let u = random_unitary(n, &mut rng);
        let mut d = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                d = d.max((u[(i, j)].norm_sqr() - target.get(i, j)).abs());
            }
        }
        best = best.min(d);
    }
    best
}

/// Descent check used by tests and the CLI: `max |diag(Φ(diag p)) − Mp|`.
pub fn descent_residual(k: &KrausSet, p: &[f64]) -> Result<f64> {
    let m = kraus_to_ds(k)?;
    let rho = DensityMatrix::diagonal(p)?;
    let out = apply_channel(k, &rho)?.diagonal_probabilities();
    let mp = m.apply(&ProbabilityVector::new(p.to_vec())?)?;
    Ok(out.iter().zip(mp.as_slice()).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{quantum_renyi_entropy, Alpha};
    use crate::linalg::random_density_matrix;
    use crate::simplex::{sample_ds, DsMethod, MatrixKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_descends_to_identity() {
        let k = KrausSet::new(vec![CMatrix::identity(3, 3)]).unwrap();
        assert!(k.is_unital());
        assert_eq!(kraus_to_ds(&k).unwrap(), StochasticMatrix::identity(3).unwrap());
    }

    #[test]
    fn single_unitary_two_by_two() {
        let theta: f64 = 0.3;
        let (s, co) = theta.sin_cos();
        let u = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, s), c(0.0, s), c(co, 0.0)]);
        let m = kraus_to_ds(&KrausSet::new(vec![u.clone()]).unwrap()).unwrap();
        let cc = co * co;
        assert!((m.get(0, 0) - cc).abs() < 1e-15 && (m.get(1, 1) - cc).abs() < 1e-15);
        assert!((m.get(0, 1) - (1.0 - cc)).abs() < 1e-15);
        assert_eq!(unitary_to_ds(&u).unwrap(), m);
    }

    #[test]
    fn rank_one_round_trip() {
        for seed in 0..100 {
            let m = sample_ds(2 + (seed as usize % 5), DsMethod::ALL[seed as usize % 3], seed).unwrap();
            let k = ds_to_kraus(&m, ZeroOperators::Keep).unwrap();
            assert!(k.is_unital());
            assert_eq!(k.len(), m.dim() * m.dim());
            let back = kraus_to_ds(&k).unwrap();
            for (a, b) in back.as_row_major().iter().zip(m.as_row_major()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_identity_has_zero_operators() {
        let k = ds_to_kraus(&StochasticMatrix::identity(2).unwrap(), ZeroOperators::Keep).unwrap();
        assert_eq!(k.len(), 4);
        assert_eq!(k.operators().iter().filter(|a| max_abs(a) == 0.0).count(), 2);
        assert!(k.trace_preserving_residual() == 0.0 && k.unital_residual() == 0.0);
        let dropped = ds_to_kraus(&StochasticMatrix::identity(2).unwrap(), ZeroOperators::Drop).unwrap();
        assert_eq!(dropped.len(), 2);
    }

    #[test]
    fn rank_one_flat_operators() {
        let k = ds_to_kraus(&StochasticMatrix::flat(2).unwrap(), ZeroOperators::Keep).unwrap();
        for a in k.operators() {
            let norm2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm2 - 0.5).abs() < 1e-15);
        }
        assert!(k.is_unital());
    }

    #[test]
    fn ds_to_kraus_rejects_column_stochastic() {
        let m = StochasticMatrix::validate(&[vec![1.0, 1.0], vec![0.0, 0.0]], 1e-12).unwrap();
        assert!(matches!(ds_to_kraus(&m, ZeroOperators::Keep), Err(Error::NotDoublyStochastic)));
    }

    #[test]
    fn unitary_to_ds_examples() {
        let perm = StochasticMatrix::permutation(&[1, 2, 0]).unwrap();
        let u = CMatrix::from_fn(3, 3, |i, j| c(perm.get(i, j), 0.0));
        assert_eq!(unitary_to_ds(&u).unwrap(), perm);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let m = unitary_to_ds(&had).unwrap();
        for x in m.as_row_major() {
            assert!((x - 0.5).abs() < 1e-15);
        }
        assert!(matches!(unitary_to_ds(&CMatrix::identity(2, 2).scale(2.0)), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(KrausSet::new(vec![]).is_err());
        assert!(KrausSet::new(vec![CMatrix::identity(2, 2).scale(0.5)]).is_err());
        assert!(KrausSet::new(vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)]).is_err());
    }

    #[test]
    fn apply_channel_examples() {
        let mut rng = rng_from_seed(11);
        let rho = DensityMatrix::new(random_density_matrix(3, &mut rng)).unwrap();
        let id = KrausSet::new(vec![CMatrix::identity(3, 3)]).unwrap();
        assert!(max_abs(&(apply_channel(&id, &rho).unwrap().matrix() - rho.matrix())) < 1e-15);
        let k = random_unital_channel(3, 3, 5).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(max_abs(&(apply_channel(&k, &mixed).unwrap().matrix() - mixed.matrix())) < 1e-10);
        let m = sample_ds(3, DsMethod::Sinkhorn, 2).unwrap();
        let p = [0.1, 0.6, 0.3];
        assert!(descent_residual(&ds_to_kraus(&m, ZeroOperators::Keep).unwrap(), &p).unwrap() < 1e-12);
        let rho2 = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(apply_channel(&k, &rho2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn random_channels_satisfy_both_conditions() {
        for seed in 0..100 {
            let k = random_unital_channel(1 + seed as usize % 5, 1 + seed as usize % 4, seed).unwrap();
            assert!(k.trace_preserving_residual() <= 1e-10);
            assert!(k.unital_residual() <= 1e-10);
            let mixed = DensityMatrix::maximally_mixed(k.dim()).unwrap();
            assert!(max_abs(&(apply_channel(&k, &mixed).unwrap().matrix() - mixed.matrix())) < 1e-10);
        }
        assert_eq!(random_unital_channel(3, 2, 9).unwrap(), random_unital_channel(3, 2, 9).unwrap());
    }

    #[test]
    fn single_unitary_channel_is_unistochastic() {
        let k = random_unital_channel(3, 1, 4).unwrap();
        let m = kraus_to_ds(&k).unwrap();
        assert_eq!(m.kind(), MatrixKind::DoublyStochastic);
        let u = &k.operators()[0];
        let direct = unitary_to_ds(u).unwrap();
        for (a, b) in m.as_row_major().iter().zip(direct.as_row_major()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn non_unital_descends_to_column_stochastic() {
        for seed in 0..50 {
            let k = random_trace_preserving_channel(3, 2, seed).unwrap();
            assert!(!k.is_unital());
            assert_eq!(kraus_to_ds(&k).unwrap().kind(), MatrixKind::ColumnStochastic);
        }
    }

    #[test]
    fn projector_sets() {
        assert!(ProjectorSet::computational_basis(3).is_ok());
        assert!(ProjectorSet::from_blocks(3, &[vec![0, 1], vec![2]]).is_ok());
        assert!(ProjectorSet::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(ProjectorSet::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(ProjectorSet::random(4, &[1, 3], 2).is_ok());
        assert!(ProjectorSet::random(4, &[1, 2], 2).is_err());
        let mut skew = CMatrix::identity(2, 2);
        skew[(0, 1)] = c(0.0, 1.0);
        assert!(ProjectorSet::new(vec![skew]).is_err());
    }

    #[test]
    fn luders_examples() {
        let mut rng = rng_from_seed(21);
        let rho = DensityMatrix::new(random_density_matrix(3, &mut rng)).unwrap();
        let trivial = ProjectorSet::new(vec![CMatrix::identity(3, 3)]).unwrap();
        assert!(max_abs(&(luders_dephase(&rho, &trivial).unwrap().matrix() - rho.matrix())) < 1e-15);
        let basis = ProjectorSet::computational_basis(3).unwrap();
        let d = luders_dephase(&rho, &basis).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { rho.matrix()[(i, i)] } else { c(0.0, 0.0) };
                assert!((d.matrix()[(i, j)] - expect).norm() < 1e-15);
            }
        }
        let coarse = ProjectorSet::random(3, &[2, 1], 8).unwrap();
        let once = luders_dephase(&rho, &coarse).unwrap();
        let twice = luders_dephase(&once, &coarse).unwrap();
        assert!(max_abs(&(once.matrix() - twice.matrix())) < 1e-12);
        for p in coarse.projectors() {
            assert!(max_abs(&(p * once.matrix() - once.matrix() * p)) < 1e-12);
        }
        for a in Alpha::defaults() {
            assert!(quantum_renyi_entropy(&once, a).unwrap() >= quantum_renyi_entropy(&rho, a).unwrap() - 1e-10);
        }
    }

    #[test]
    fn cyclic_average_is_far_from_sampled_unistochastic() {
        let target =
            StochasticMatrix::validate(&[vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]], 1e-12)
                .unwrap();
        assert!(unistochastic_search_distance(&target, 2_000, 1) > 1e-3);
    }
}
