//! Dense complex linear algebra used by the channel and dilation modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{DensityViolation, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for Hermiticity, trace, positivity, unitarity and Kraus conditions.
pub const OPERATOR_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |U†U − I|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// `max |A − A†|`.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    let herm = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::ComputationFailed("Hermitian eigendecomposition".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        data.push(Complex64::new(re * scale, im * scale));
    }
    CMatrix::from_vec(rows, cols, data)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of `R`'s diagonal
/// folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank random density matrix `GG† / Tr(GG†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mut rho = w.unscale(tr);
    rho = (&rho + rho.adjoint()).scale(0.5);
    rho
}

/// Density operator: Hermitian, unit trace, positive semidefinite (all within
/// [`OPERATOR_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::NotDensityMatrix(DensityViolation::NotSquare { rows: rho.nrows(), cols: rho.ncols() }));
        }
        if rho.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        let residual = hermiticity_residual(&rho);
        if residual > OPERATOR_TOL {
            return Err(Error::NotDensityMatrix(DensityViolation::NotHermitian { residual }));
        }
        let deviation = rho.trace().re - 1.0;
        if deviation.abs() > OPERATOR_TOL {
            return Err(Error::NotDensityMatrix(DensityViolation::Trace { deviation }));
        }
        let min = hermitian_eigenvalues(&rho)?[0];
        if min < -OPERATOR_TOL {
            return Err(Error::NotDensityMatrix(DensityViolation::NegativeEigenvalue { min }));
        }
        Ok(Self { rho: (&rho + rho.adjoint()).scale(0.5) })
    }

    /// Diagonal density matrix `diag(p)`.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let n = p.len();
        Self::new(CMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    Complex64::new(p[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        ))
    }

    /// Maximally mixed state `I/n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        Self::diagonal(&vec![1.0 / n as f64; n])
    }

    /// Projector onto the normalized vector `psi`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidProbabilityVector("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    /// Real diagonal `⟨i|ρ|i⟩`.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// Eigenvalues clamped at zero and renormalized, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut values: Vec<f64> = hermitian_eigenvalues(&self.rho)?.into_iter().map(|x| x.max(0.0)).collect();
        let total: f64 = values.iter().sum();
        for x in &mut values {
            *x /= total;
        }
        values.reverse();
        Ok(values)
    }
}
