//! Small dense generalized eigenproblems A z = lambda E z with two-sided
//! eigenvectors, ordered deterministically.

use num_complex::Complex64;

use super::dense::{complexify, from_col_major, to_col_major, CMat, Mat};
use crate::{Limits, MorError, Result};

/// Eigenvalues with right vectors z_i (A z = lambda E z) and left vectors
/// y_i (y^H A = lambda y^H E), stored as matrix columns.
#[derive(Debug, Clone)]
pub struct EigenTriplets {
    pub values: Vec<Complex64>,
    pub right: CMat,
    pub left: CMat,
}

/// Solves the r x r generalized eigenproblem for a real pair. Eigenvalues
/// are sorted by (real, imag) ascending; conjugate pairs end up adjacent
/// and are forced to exact conjugacy.
pub fn generalized_eig_small(ahat: &Mat, ehat: &Mat, limits: &Limits) -> Result<EigenTriplets> {
    let r = super::dense::square_dim(ahat)?;
    if ehat.dim() != (r, r) {
        return Err(MorError::Dimension(format!(
            "eigenproblem pair mismatch: A is {r}x{r}, E is {}x{}",
            ehat.nrows(),
            ehat.ncols()
        )));
    }
    if r > limits.small_dense {
        return Err(MorError::Oversize { n: r, limit: limits.small_dense });
    }
    generalized_eig_complex(&complexify(ahat), &complexify(ehat))
}

/// Complex-pair variant used internally.
pub fn generalized_eig_complex(ahat: &CMat, ehat: &CMat) -> Result<EigenTriplets> {
    let r = ahat.nrows();
    let acm = to_col_major(ahat);
    let ecm = to_col_major(ehat);
    let (alpha, beta, vl, vr) = super::lapack::zggev(&acm, &ecm, r)?;

    let scale: f64 = acm.iter().map(|v| v.norm()).sum::<f64>() + 1.0;
    let mut items: Vec<(Complex64, usize)> = Vec::with_capacity(r);
    for i in 0..r {
        if beta[i].norm() <= 1e-14 * scale {
            return Err(MorError::Singular(
                "generalized eigenproblem has an infinite eigenvalue (E singular)".into(),
            ));
        }
        items.push((alpha[i] / beta[i], i));
    }
    items.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let vl = from_col_major(&vl, r, r);
    let vr = from_col_major(&vr, r, r);
    let mut values = Vec::with_capacity(r);
    let mut right = CMat::default((r, r));
    let mut left = CMat::default((r, r));
    for (k, &(lam, idx)) in items.iter().enumerate() {
        values.push(lam);
        right.column_mut(k).assign(&vr.column(idx));
        left.column_mut(k).assign(&vl.column(idx));
    }

    // Force adjacent near-conjugate pairs to exact conjugacy so downstream
    // realification stays closed.
    let mut k = 0;
    while k + 1 < r {
        let (a, b) = (values[k], values[k + 1]);
        if a.im != 0.0 && (a.conj() - b).norm() <= 1e-8 * (a.norm() + 1.0) {
            values[k + 1] = a.conj();
            let (rc, lc) = (
                right.column(k).mapv(|v| v.conj()),
                left.column(k).mapv(|v| v.conj()),
            );
            right.column_mut(k + 1).assign(&rc);
            left.column_mut(k + 1).assign(&lc);
            k += 2;
        } else {
            k += 1;
        }
    }

    Ok(EigenTriplets { values, right, left })
}
