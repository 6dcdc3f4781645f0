//! Continuous Lyapunov equation A X + X A^T + Q = 0 by Kronecker
//! vectorization. The n^2 x n^2 dense solve is entirely adequate at the
//! state dimensions this crate targets.

use crate::matrix::Matrix;
use crate::numerics::{eig_general, solve_linear, NumericsError};

pub fn lyapunov_solve(a: &Matrix, q: &Matrix) -> Result<Matrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if q.rows() != n || q.cols() != n {
        return Err(NumericsError::Dimension {
            what: format!("Q is {}x{}, expected {}x{}", q.rows(), q.cols(), n, n),
        });
    }
    let eigs = eig_general(a)?;
    let max_real = eigs.iter().fold(f64::NEG_INFINITY, |m, e| m.max(e.re));
    if max_real >= 0.0 {
        return Err(NumericsError::NotHurwitz { max_real });
    }
    // vec(AX + XA^T) = (I (x) A + A (x) I) vec(X), column-stacked
    let nn = n * n;
    let mut k = Matrix::zeros(nn, nn);
    for col in 0..n {
        for row in 0..n {
            let vi = col * n + row; // index of X[row, col] in vec(X)
            for r2 in 0..n {
                // (AX)[r2, col] takes A[r2, row] * X[row, col]
                k[(col * n + r2, vi)] += a[(r2, row)];
            }
            for c2 in 0..n {
                // (X A^T)[row, c2] takes X[row, col] * A[c2, col]
                k[(c2 * n + row, vi)] += a[(c2, col)];
            }
        }
    }
    let mut rhs = Matrix::zeros(nn, 1);
    for col in 0..n {
        for row in 0..n {
            rhs[(col * n + row, 0)] = -q[(row, col)];
        }
    }
    let v = solve_linear(&k, &rhs)?;
    let x = Matrix::from_fn(n, n, |i, j| v[(j * n + i, 0)]);
    Ok(x.symmetrize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_structure() {
        // A = -I (2x2), Q = I  =>  X = I/2
        let x = lyapunov_solve(&Matrix::identity(2).neg(), &Matrix::identity(2)).unwrap();
        assert!(x.sub(&Matrix::identity(2).scale(0.5)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn decoupled_diagonal() {
        let a = Matrix::diag(&[-1.0, -2.0]);
        let q = Matrix::diag(&[2.0, 4.0]);
        let x = lyapunov_solve(&a, &q).unwrap();
        assert!(x.sub(&Matrix::identity(2)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn residual_on_stable_3x3() {
        let a = Matrix::from_rows(&[
            vec![-1.0, 0.5, 0.0],
            vec![0.0, -2.0, 1.0],
            vec![0.3, 0.0, -1.5],
        ])
        .unwrap();
        let q = Matrix::identity(3);
        let x = lyapunov_solve(&a, &q).unwrap();
        let resid = a.matmul(&x).add(&x.matmul(&a.transpose())).add(&q);
        let bound = 1e-9
            * (a.frobenius_norm() * x.frobenius_norm() + q.frobenius_norm());
        assert!(resid.frobenius_norm() <= bound);
        assert!(x.symmetry_defect() < 1e-12);
    }

    #[test]
    fn rejects_unstable() {
        let a = Matrix::diag(&[1.0, -1.0]);
        assert!(matches!(
            lyapunov_solve(&a, &Matrix::identity(2)),
            Err(NumericsError::NotHurwitz { .. })
        ));
    }
}
