//! Matrix containers and the numerical kernels everything else builds on:
//! shifted sparse solves, small dense generalized eigenproblems, dense
//! generalized Lyapunov solves, and sparse-dense Sylvester solves.

pub mod dense;
pub mod eig;
pub mod factor;
pub(crate) mod lapack;
pub mod lyap;
pub mod sparse;
pub mod sylv;

pub use dense::{CMat, CVec, Mat};
pub use eig::{generalized_eig_small, EigenTriplets};
pub use factor::{assemble_quadratic_pencil, shifted_pencil, shifted_sum, Factorization};
pub use lyap::{lyap_dense, lyap_residual};
pub use sparse::SparseMatrix;
pub use sylv::{sylvester_residual, sylvester_sparse_dense};
