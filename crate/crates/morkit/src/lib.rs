//! Structure-preserving H2-optimal model order reduction of second-order
//! LTI systems via the iterative rational Krylov algorithm, with H2 error
//! certification through Lyapunov/Sylvester matrix equations.

pub mod config;
pub mod error;
pub mod h2norm;
pub mod irka_fo;
pub mod irka_so;
pub mod models;
pub mod numkernel;
pub mod sysmodel;

pub use config::Limits;
pub use error::MorError;

pub type Result<T> = std::result::Result<T, MorError>;
