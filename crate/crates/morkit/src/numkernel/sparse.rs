//! Coordinate-format sparse matrices for the large system operators.

use ndarray::Array2;
use num_complex::Complex64;

use super::dense::{CMat, Mat};
use crate::{MorError, Result};

/// Real sparse matrix in assembled coordinate form: entries sorted by
/// (row, col) with duplicates summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    /// Assembles from raw triplets; duplicate coordinates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, _) in &triplets {
            if i >= nrows || j >= ncols {
                return Err(MorError::Dimension(format!(
                    "sparse entry ({i}, {j}) out of bounds for {nrows}x{ncols}"
                )));
            }
        }
        let mut t = triplets;
        t.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        entries.retain(|&(_, _, v)| v != 0.0);
        Ok(SparseMatrix { nrows, ncols, entries })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn from_dense(a: &Mat) -> Self {
        let entries = a
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|((i, j), &v)| (i, j, v))
            .collect();
        let mut s = SparseMatrix { nrows: a.nrows(), ncols: a.ncols(), entries };
        s.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        s
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, entries }
    }

    pub fn to_dense(&self) -> Mat {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for &(i, j, v) in &self.entries {
            a[[i, j]] = v;
        }
        a
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut s = self.clone();
        for e in &mut s.entries {
            e.2 *= c;
        }
        s.entries.retain(|&(_, _, v)| v != 0.0);
        s
    }

    /// self * b for dense real b.
    pub fn mul_dense(&self, b: &Mat) -> Result<Mat> {
        if b.nrows() != self.ncols {
            return Err(MorError::Dimension(format!(
                "sparse-dense product: {}x{} times {}x{}",
                self.nrows,
                self.ncols,
                b.nrows(),
                b.ncols()
            )));
        }
        let mut out = Array2::zeros((self.nrows, b.ncols()));
        for &(i, j, v) in &self.entries {
            for k in 0..b.ncols() {
                out[[i, k]] += v * b[[j, k]];
            }
        }
        Ok(out)
    }

    /// self * b for dense complex b.
    pub fn mul_dense_complex(&self, b: &CMat) -> Result<CMat> {
        if b.nrows() != self.ncols {
            return Err(MorError::Dimension(format!(
                "sparse-dense product: {}x{} times {}x{}",
                self.nrows,
                self.ncols,
                b.nrows(),
                b.ncols()
            )));
        }
        let mut out = Array2::from_elem((self.nrows, b.ncols()), Complex64::default());
        for &(i, j, v) in &self.entries {
            for k in 0..b.ncols() {
                out[[i, k]] += v * b[[j, k]];
            }
        }
        Ok(out)
    }

    /// transpose(self) * b without forming the transpose.
    pub fn mul_transpose_dense_complex(&self, b: &CMat) -> Result<CMat> {
        if b.nrows() != self.nrows {
            return Err(MorError::Dimension(format!(
                "transposed sparse-dense product: {}x{} times {}x{}",
                self.ncols,
                self.nrows,
                b.nrows(),
                b.ncols()
            )));
        }
        let mut out = Array2::from_elem((self.ncols, b.ncols()), Complex64::default());
        for &(i, j, v) in &self.entries {
            for k in 0..b.ncols() {
                out[[j, k]] += v * b[[i, k]];
            }
        }
        Ok(out)
    }
}

/// Complex linear combination of sparse matrices with matching shapes,
/// returned as faer triplets.
pub fn complex_combination(
    terms: &[(Complex64, &SparseMatrix)],
) -> Result<(usize, usize, Vec<faer::sparse::Triplet<usize, usize, faer::c64>>)> {
    let (nrows, ncols) = match terms.first() {
        Some((_, m)) => (m.nrows(), m.ncols()),
        None => return Err(MorError::InvalidParam("empty matrix combination".into())),
    };
    let mut acc: std::collections::BTreeMap<(usize, usize), Complex64> = Default::default();
    for &(coeff, m) in terms {
        if m.nrows() != nrows || m.ncols() != ncols {
            return Err(MorError::Dimension(
                "matrix combination with mismatched shapes".into(),
            ));
        }
        if coeff == Complex64::default() {
            continue;
        }
        for &(i, j, v) in m.entries() {
            *acc.entry((i, j)).or_default() += coeff * v;
        }
    }
    let triplets = acc
        .into_iter()
        .filter(|&(_, v)| v != Complex64::default())
        .map(|((i, j), v)| faer::sparse::Triplet::new(i, j, v))
        .collect();
    Ok((nrows, ncols, triplets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let s = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 5.0), (1, 0, 0.0)],
        )
        .unwrap();
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense()[[0, 0]], 3.0);
    }

    #[test]
    fn out_of_bounds_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn transpose_roundtrip() {
        let s = SparseMatrix::from_triplets(2, 3, vec![(0, 2, 1.5), (1, 0, -2.0)]).unwrap();
        assert_eq!(s.transpose().transpose(), s);
    }
}
