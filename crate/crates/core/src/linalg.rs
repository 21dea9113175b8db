//! Small dense Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Conjugate-symmetric tolerance for [`HermitianForm::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// An `n × n` Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm(DMatrix<Complex64>);

impl HermitianForm {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL * (1.0 + matrix.norm()) {
            return Err(Error::NotHermitian(defect));
        }
        // Symmetrize so downstream eigen-solvers see an exactly Hermitian input.
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self(sym))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) }))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.0);
        m.view_mut((a, a), (b, b)).copy_from(&other.0);
        Self(m)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Unitary eigendecomposition `A = U diag(λ) U*`, eigenvalues ascending.
    pub fn eigen_decomposition(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let eig = self.0.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.min_eigenvalue() > tol
    }

    /// Real determinant (product of eigenvalues).
    pub fn det(&self) -> f64 {
        self.eigenvalues().iter().product()
    }

    /// `Re(v* A v)`.
    pub fn quadratic_form(&self, v: &DVector<Complex64>) -> f64 {
        (v.adjoint() * &self.0 * v)[(0, 0)].re
    }

    /// Eigenvalues of the pencil `(self, gram)` with `gram` positive definite.
    pub fn generalized_eigenvalues(&self, gram: &HermitianForm) -> Result<Vec<f64>> {
        let chol = gram.0.clone().cholesky().ok_or(Error::NotPositiveDefinite("frame Gram matrix"))?;
        let l = chol.l();
        let linv = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite("frame Gram matrix"))?;
        let reduced = &linv * &self.0 * linv.adjoint();
        Ok(HermitianForm::new(reduced)?.eigenvalues())
    }
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).norm()
}
