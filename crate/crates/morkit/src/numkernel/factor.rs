//! Sparse complex LU factorizations for the shifted systems that dominate
//! the projector and Sylvester solves.

use faer::c64;
use faer::prelude::*;
use faer::sparse::SparseColMat;
use num_complex::Complex64;

use super::dense::CMat;
use super::sparse::{complex_combination, SparseMatrix};
use crate::{MorError, Result};

/// LU factorization of a square complex sparse matrix; reusable for many
/// right-hand sides and for transpose solves.
pub struct Factorization {
    n: usize,
    matrix: SparseColMat<usize, c64>,
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
}

impl Factorization {
    /// Factors sum_k coeff_k * M_k. `label` names the shift in errors.
    pub fn from_combination(
        terms: &[(Complex64, &SparseMatrix)],
        shift: Complex64,
    ) -> Result<Self> {
        let (nrows, ncols, triplets) = complex_combination(terms)?;
        if nrows != ncols {
            return Err(MorError::Dimension("factorization of non-square matrix".into()));
        }
        let matrix = SparseColMat::try_new_from_triplets(nrows, ncols, &triplets)
            .map_err(|e| MorError::Singular(format!("sparse assembly failed: {e:?}")))?;
        let lu = matrix
            .sp_lu()
            .map_err(|_| MorError::ShiftOnSpectrum { shift })?;
        let fac = Factorization { n: nrows, matrix, lu };
        // Probe solve: exactly singular assemblies can survive symbolic LU.
        if nrows > 0 {
            let ones = CMat::from_elem((nrows, 1), Complex64::new(1.0, 0.0));
            let x = fac.solve(&ones)?;
            let r = fac.apply(&x)? - &ones;
            let resid = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / (nrows as f64).sqrt();
            if !resid.is_finite() || resid > 1e-6 {
                return Err(MorError::ShiftOnSpectrum { shift });
            }
        }
        Ok(fac)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Multiplies the original (unfactored) matrix with a dense block.
    pub fn apply(&self, b: &CMat) -> Result<CMat> {
        self.check_rhs(b)?;
        let x = to_faer(b);
        let y = &self.matrix * &x;
        Ok(from_faer(&y))
    }

    /// Multiplies the transpose of the original matrix with a dense block.
    pub fn apply_transpose(&self, b: &CMat) -> Result<CMat> {
        self.check_rhs(b)?;
        let x = to_faer(b);
        let y = self.matrix.transpose() * &x;
        Ok(from_faer(&y))
    }

    pub fn solve(&self, b: &CMat) -> Result<CMat> {
        self.check_rhs(b)?;
        let rhs = to_faer(b);
        Ok(from_faer(&self.lu.solve(&rhs)))
    }

    /// Solves with the transpose (not the adjoint) of the factored matrix.
    pub fn solve_transpose(&self, b: &CMat) -> Result<CMat> {
        self.check_rhs(b)?;
        let rhs = to_faer(b);
        Ok(from_faer(&self.lu.solve_transpose(&rhs)))
    }

    fn check_rhs(&self, b: &CMat) -> Result<()> {
        if b.nrows() != self.n {
            return Err(MorError::Dimension(format!(
                "rhs has {} rows, factorization has dimension {}",
                b.nrows(),
                self.n
            )));
        }
        Ok(())
    }
}

fn to_faer(a: &CMat) -> faer::Mat<c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_faer(a: &faer::Mat<c64>) -> CMat {
    CMat::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Factors the quadratic pencil alpha^2 M + alpha D + K.
pub fn assemble_quadratic_pencil(
    m: &SparseMatrix,
    d: &SparseMatrix,
    k: &SparseMatrix,
    alpha: Complex64,
) -> Result<Factorization> {
    for (mat, name) in [(m, "M"), (d, "D"), (k, "K")] {
        if !mat.is_square() || mat.nrows() != m.nrows() {
            return Err(MorError::Dimension(format!(
                "{name} must be square of dimension {}",
                m.nrows()
            )));
        }
    }
    let one = Complex64::new(1.0, 0.0);
    Factorization::from_combination(&[(alpha * alpha, m), (alpha, d), (one, k)], alpha)
}

/// Factors the shifted first-order pencil alpha E - A.
pub fn shifted_pencil(
    e: &SparseMatrix,
    a: &SparseMatrix,
    alpha: Complex64,
) -> Result<Factorization> {
    Factorization::from_combination(&[(alpha, e), (-Complex64::new(1.0, 0.0), a)], alpha)
}

/// Factors A + lambda E, the operator of the transformed Sylvester columns.
pub fn shifted_sum(
    a: &SparseMatrix,
    e: &SparseMatrix,
    lambda: Complex64,
) -> Result<Factorization> {
    Factorization::from_combination(&[(Complex64::new(1.0, 0.0), a), (lambda, e)], lambda)
}
