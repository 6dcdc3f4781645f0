//! Dense linear-algebra kernels backing the design pipeline: LU solves,
//! Cholesky, nonsymmetric and symmetric eigensolvers, Jacobi SVD, QR with
//! column pivoting, a Kronecker Lyapunov solver and a PSD square root.
//!
//! Everything is written for the small matrices this toolkit works with;
//! none of it tries to be clever about cache blocking or sparsity.

mod chol;
mod eig;
mod lu;
mod lyap;
mod qr;
mod svd;
mod symeig;

pub use chol::{cholesky, CholeskyOutcome};
pub use eig::eig_general;
pub use lu::{det, solve_linear, LuFactors};
pub use lyap::lyapunov_solve;
pub use qr::{qr_column_pivot, PivotedQr};
pub use svd::{matrix_rank, sigma_max, singular_values, DEFAULT_RANK_RTOL};
pub use symeig::{eig_hermitian_complex, eig_symmetric, min_eig_symmetric, sqrtm_psd};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {what}")]
    Dimension { what: String },
    #[error("matrix is singular at pivot index {pivot_index}")]
    Singular { pivot_index: usize },
    #[error("eigenvalue iteration did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize },
    #[error("matrix is not Hurwitz (max eigenvalue real part {max_real:.3e})")]
    NotHurwitz { max_real: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
}
