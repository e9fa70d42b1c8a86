//! Dense matrix helpers shared across the kernels: column-major staging for
//! LAPACK, complex solves, norms, and orthonormalization.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::lapack;
use crate::{MorError, Result};

/// Real dense matrix.
pub type Mat = Array2<f64>;
/// Complex dense matrix.
pub type CMat = Array2<Complex64>;
/// Complex dense vector.
pub type CVec = Array1<Complex64>;

pub fn to_col_major<T: Copy + Default>(a: &Array2<T>) -> Vec<T> {
    let (m, n) = a.dim();
    let mut out = vec![T::default(); m * n];
    for ((i, j), &v) in a.indexed_iter() {
        out[j * m + i] = v;
    }
    out
}

pub fn from_col_major<T: Copy>(data: &[T], m: usize, n: usize) -> Array2<T> {
    Array2::from_shape_fn((m, n), |(i, j)| data[j * m + i])
}

pub fn complexify(a: &Mat) -> CMat {
    a.mapv(|v| Complex64::new(v, 0.0))
}

pub fn real_part(a: &CMat) -> Mat {
    a.mapv(|v| v.re)
}

pub fn fro_norm(a: &Mat) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn fro_norm_c(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves A X = B for dense real square A.
pub fn solve_real(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = square_dim(a)?;
    if b.nrows() != n {
        return Err(MorError::Dimension(format!(
            "solve_real: rhs has {} rows, expected {n}",
            b.nrows()
        )));
    }
    let mut acm = to_col_major(a);
    let mut bcm = to_col_major(b);
    lapack::dgesv(&mut acm, &mut bcm, n, b.ncols())?;
    Ok(from_col_major(&bcm, n, b.ncols()))
}

/// Solves A X = B for dense complex square A.
pub fn solve_complex(a: &CMat, b: &CMat) -> Result<CMat> {
    let (n, nc) = a.dim();
    if n != nc {
        return Err(MorError::Dimension("solve_complex: matrix not square".into()));
    }
    if b.nrows() != n {
        return Err(MorError::Dimension(format!(
            "solve_complex: rhs has {} rows, expected {n}",
            b.nrows()
        )));
    }
    let mut acm = to_col_major(a);
    let mut bcm = to_col_major(b);
    lapack::zgesv(&mut acm, &mut bcm, n, b.ncols())?;
    Ok(from_col_major(&bcm, n, b.ncols()))
}

/// Largest singular value of a complex matrix.
pub fn sigma_max(a: &CMat) -> Result<f64> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Ok(0.0);
    }
    if m == 1 && n == 1 {
        return Ok(a[[0, 0]].norm());
    }
    let s = lapack::zgesvd_values(&to_col_major(a), m, n)?;
    Ok(s[0])
}

/// Orthonormalizes the columns of `a` by rank-revealing QR. Errors if the
/// numerical rank falls short of the column count.
pub fn orthonormalize(a: &Mat, context: &str) -> Result<Mat> {
    let (m, n) = a.dim();
    let (q, rank) = lapack::orthonormal_basis(&to_col_major(a), m, n, 1e-12)?;
    if rank < n {
        return Err(MorError::RankDeficient {
            rank,
            wanted: n,
            context: context.to_string(),
        });
    }
    Ok(from_col_major(&q, m, n))
}

pub fn square_dim(a: &Mat) -> Result<usize> {
    let (m, n) = a.dim();
    if m != n {
        return Err(MorError::Dimension(format!("expected square matrix, got {m}x{n}")));
    }
    Ok(n)
}

/// Relative symmetry defect of F.
pub fn symmetry_defect(f: &Mat) -> f64 {
    let nf = fro_norm(f);
    if nf == 0.0 {
        return 0.0;
    }
    fro_norm(&(f - &f.t().to_owned())) / nf
}
