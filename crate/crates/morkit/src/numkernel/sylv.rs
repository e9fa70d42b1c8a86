//! Sparse-dense Sylvester solver: A X Ehat^T + E X Ahat^T + G = 0 with the
//! large pair (A, E) sparse and the small pair (Ahat, Ehat) dense.
//!
//! The small pencil is eigendecomposed, the equation transformed so each
//! column decouples into one shifted sparse solve (A + lambda_i E), and the
//! result back-transformed.

use num_complex::Complex64;

use super::dense::{complexify, fro_norm, real_part, solve_complex, CMat, Mat};
use super::eig::generalized_eig_complex;
use super::factor::shifted_sum;
use super::sparse::SparseMatrix;
use crate::{MorError, Result};

/// Solves A X Ehat^T + E X Ahat^T + G = 0 for dense n x r X.
pub fn sylvester_sparse_dense(
    a: &SparseMatrix,
    e: &SparseMatrix,
    ahat: &Mat,
    ehat: &Mat,
    g: &Mat,
) -> Result<Mat> {
    let n = a.nrows();
    let r = ahat.nrows();
    if !a.is_square() || !e.is_square() || e.nrows() != n {
        return Err(MorError::Dimension("sparse pair must be square and matching".into()));
    }
    if ahat.dim() != (r, r) || ehat.dim() != (r, r) {
        return Err(MorError::Dimension("dense pair must be square and matching".into()));
    }
    if g.dim() != (n, r) {
        return Err(MorError::Dimension(format!(
            "Sylvester rhs must be {n}x{r}, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    if r == 0 {
        return Ok(Mat::zeros((n, 0)));
    }

    let eig = generalized_eig_complex(&complexify(ahat), &complexify(ehat))?;
    let z = &eig.right;

    // Need R (Ehat Z)^T = -G, i.e. (Ehat Z) R^T = -G^T; column j of R is
    // then solved by (A + lambda_j E).
    let ez = complexify(ehat).dot(z);
    let minus_gt = complexify(g).t().mapv(|v| -v);
    let rt = solve_complex(&ez, &minus_gt.to_owned())?; // r x n
    let rhs = rt.t().to_owned(); // n x r

    let mut y = CMat::default((n, r));
    let mut solved: Vec<(Complex64, usize)> = Vec::new();
    for j in 0..r {
        let lam = eig.values[j];
        // Conjugate shifts reuse the conjugated solution when the rhs pairs up.
        if let Some(&(_, i)) = solved
            .iter()
            .find(|&&(l, i)| (l - lam.conj()).norm() == 0.0 && conj_cols(&rhs, i, j))
        {
            let col = y.column(i).mapv(|v| v.conj());
            y.column_mut(j).assign(&col);
            continue;
        }
        let fac = shifted_sum(a, e, lam).map_err(|err| match err {
            MorError::ShiftOnSpectrum { shift } => MorError::SpectrumCollision { shift },
            other => other,
        })?;
        let col = fac.solve(&rhs.column(j).insert_axis(ndarray::Axis(1)).to_owned())?;
        y.column_mut(j).assign(&col.column(0));
        solved.push((lam, j));
    }

    // X = Re(Y Z^T); the imaginary part vanishes for real data.
    let x = y.dot(&z.t());
    Ok(real_part(&x))
}

fn conj_cols(rhs: &CMat, i: usize, j: usize) -> bool {
    let scale: f64 = rhs.column(i).iter().map(|v| v.norm()).sum::<f64>() + 1.0;
    rhs.column(i)
        .iter()
        .zip(rhs.column(j).iter())
        .all(|(a, b)| (a.conj() - b).norm() <= 1e-13 * scale)
}

/// Relative residual of a candidate solution.
pub fn sylvester_residual(
    a: &SparseMatrix,
    e: &SparseMatrix,
    ahat: &Mat,
    ehat: &Mat,
    g: &Mat,
    x: &Mat,
) -> Result<f64> {
    let r = a.mul_dense(x)?.dot(&ehat.t().to_owned())
        + e.mul_dense(x)?.dot(&ahat.t().to_owned())
        + g;
    let ng = fro_norm(g);
    Ok(if ng == 0.0 { fro_norm(&r) } else { fro_norm(&r) / ng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scalar_case() {
        // -X - 2X + 1 = 0 => X = 1/3
        let a = SparseMatrix::from_triplets(1, 1, vec![(0, 0, -1.0)]).unwrap();
        let e = SparseMatrix::identity(1);
        let ahat = array![[-2.0]];
        let ehat = array![[1.0]];
        let g = array![[1.0]];
        let x = sylvester_sparse_dense(&a, &e, &ahat, &ehat, &g).unwrap();
        assert!((x[[0, 0]] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn nonsymmetric_pair_solves_to_machine_residual() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, -1.0), (0, 1, 0.3), (1, 1, -2.0), (2, 1, 0.5), (2, 2, -4.0)],
        )
        .unwrap();
        let e = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 1.5), (0, 2, 0.2)],
        )
        .unwrap();
        // complex-conjugate reduced eigenvalues exercise the transform
        let ahat = array![[-1.0, 2.0], [-2.0, -1.5]];
        let ehat = array![[1.0, 0.1], [0.0, 1.0]];
        let g = array![[1.0, 0.5], [0.0, 1.0], [2.0, -1.0]];
        let x = sylvester_sparse_dense(&a, &e, &ahat, &ehat, &g).unwrap();
        let res = sylvester_residual(&a, &e, &ahat, &ehat, &g, &x).unwrap();
        assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, -1.0), (1, 1, -3.0)]).unwrap();
        let e = SparseMatrix::identity(2);
        let ahat = array![[-2.0]];
        let ehat = array![[1.0]];
        let g = Mat::zeros((2, 1));
        let x = sylvester_sparse_dense(&a, &e, &ahat, &ehat, &g).unwrap();
        assert_eq!(fro_norm(&x), 0.0);
    }

    #[test]
    fn shift_collision_reported() {
        // lambda(A, E) = {-2}, lambda(Ahat, Ehat) = {2}: A + 2E singular.
        let a = SparseMatrix::from_triplets(1, 1, vec![(0, 0, -2.0)]).unwrap();
        let e = SparseMatrix::identity(1);
        let ahat = array![[2.0]];
        let ehat = array![[1.0]];
        let g = array![[1.0]];
        assert!(matches!(
            sylvester_sparse_dense(&a, &e, &ahat, &ehat, &g),
            Err(MorError::SpectrumCollision { .. })
        ));
    }
}
