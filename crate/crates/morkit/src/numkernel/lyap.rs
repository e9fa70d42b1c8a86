//! Dense generalized Lyapunov solver: A X E^T + E X A^T + F = 0.
//!
//! The equation is reduced to standard form through a factorization of E,
//! then solved by a Schur-based direct method.

use super::dense::{
    from_col_major, fro_norm, solve_real, square_dim, symmetry_defect, to_col_major, Mat,
};
use super::lapack;
use crate::{Limits, MorError, Result};

/// Solves A X E^T + E X A^T + F = 0 for real dense square inputs.
pub fn lyap_dense(a: &Mat, e: &Mat, f: &Mat, limits: &Limits) -> Result<Mat> {
    let n = square_dim(a)?;
    if e.dim() != (n, n) || f.dim() != (n, n) {
        return Err(MorError::Dimension(format!(
            "Lyapunov operands must all be {n}x{n}"
        )));
    }
    if n > limits.dense_gramian {
        return Err(MorError::Oversize { n, limit: limits.dense_gramian });
    }
    if n == 0 {
        return Ok(Mat::zeros((0, 0)));
    }

    // A1 = E^{-1} A, F1 = E^{-1} F E^{-T}
    let a1 = solve_real(e, a)?;
    let y = solve_real(e, f)?;
    let f1 = solve_real(e, &y.t().to_owned())?.t().to_owned();

    // A1 = U T U^T, then T Y + Y T^T = -U^T F1 U.
    let (t, u, _) = lapack::real_schur(&to_col_major(&a1), n)?;
    let u = from_col_major(&u, n, n);
    let schur_solve = |rhs: &Mat| -> Result<Mat> {
        let g = u.t().dot(rhs).dot(&u);
        let mut c = to_col_major(&g.mapv(|v| -v));
        let scale = lapack::trsyl(b'N', b'T', 1, n, n, &t, &t, &mut c)?;
        let y = from_col_major(&c, n, n).mapv(|v| v / scale);
        Ok(u.dot(&y).dot(&u.t()))
    };

    let mut x = schur_solve(&f1)?;
    // one-sweep iterative refinement: badly separated spectra can leave the
    // raw Schur solve short of full accuracy
    for _ in 0..2 {
        let res = a.dot(&x).dot(&e.t().to_owned()) + e.dot(&x).dot(&a.t().to_owned()) + f;
        let rel = fro_norm(&res) / fro_norm(f).max(f64::MIN_POSITIVE);
        if rel <= 1e-12 || !rel.is_finite() {
            break;
        }
        let y = solve_real(e, &res)?;
        let r1 = solve_real(e, &y.t().to_owned())?.t().to_owned();
        x += &schur_solve(&r1)?;
    }

    if symmetry_defect(f) <= 1e-12 {
        x = (&x + &x.t().to_owned()) * 0.5;
    }
    Ok(x)
}

/// Relative residual of a candidate solution.
pub fn lyap_residual(a: &Mat, e: &Mat, f: &Mat, x: &Mat) -> f64 {
    let r = a.dot(x).dot(&e.t().to_owned()) + e.dot(x).dot(&a.t().to_owned()) + f;
    let nf = fro_norm(f);
    if nf == 0.0 {
        fro_norm(&r)
    } else {
        fro_norm(&r) / nf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scalar_cases() {
        let limits = Limits::default();
        let x = lyap_dense(&array![[-1.0]], &array![[1.0]], &array![[1.0]], &limits).unwrap();
        assert!((x[[0, 0]] - 0.5).abs() < 1e-14);
        let x = lyap_dense(&array![[-1.0]], &array![[2.0]], &array![[1.0]], &limits).unwrap();
        assert!((x[[0, 0]] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn spectrum_condition_violation_detected() {
        // A = diag(1, -1), E = I: lambda_1 + lambda_2 = 0.
        let a = array![[1.0, 0.0], [0.0, -1.0]];
        let e = Mat::eye(2);
        let f = Mat::eye(2);
        assert!(matches!(
            lyap_dense(&a, &e, &f, &Limits::default()),
            Err(MorError::LyapunovSingular)
        ));
    }

    #[test]
    fn oversize_rejected() {
        let limits = Limits { small_dense: 2, dense_gramian: 2 };
        let a = -Mat::eye(3);
        let e = Mat::eye(3);
        let f = Mat::eye(3);
        assert!(matches!(
            lyap_dense(&a, &e, &f, &limits),
            Err(MorError::Oversize { .. })
        ));
    }
}
