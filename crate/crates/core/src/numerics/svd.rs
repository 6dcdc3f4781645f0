//! Singular values by one-sided Jacobi, and the rank test built on them.

use crate::matrix::Matrix;

pub const DEFAULT_RANK_RTOL: f64 = 1e-9;

/// Singular values in descending order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let mut w = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = (w.rows(), w.cols());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    for _sweep in 0..60 {
        let mut converged = true;
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
            }
        }
        if converged {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn sigma_max(a: &Matrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `rtol * sigma_max * max(rows, cols)`.
pub fn matrix_rank(a: &Matrix, rtol: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let thresh = rtol * smax * a.rows().max(a.cols()) as f64;
    sv.iter().filter(|&&s| s > thresh).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_rank() {
        assert_eq!(matrix_rank(&Matrix::zeros(4, 3), DEFAULT_RANK_RTOL), 0);
    }

    #[test]
    fn identity_rank() {
        assert_eq!(matrix_rank(&Matrix::identity(5), DEFAULT_RANK_RTOL), 5);
    }

    #[test]
    fn outer_product_rank_one() {
        let u = [1.2, -0.7, 0.4, 2.0];
        let v = [0.3, 1.5, -0.9];
        let a = Matrix::from_fn(4, 3, |i, j| u[i] * v[j]);
        assert_eq!(matrix_rank(&a, DEFAULT_RANK_RTOL), 1);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let sv = singular_values(&Matrix::diag(&[3.0, -5.0, 1.0]));
        assert!((sv[0] - 5.0).abs() < 1e-12);
        assert!((sv[1] - 3.0).abs() < 1e-12);
        assert!((sv[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_invariant_under_transpose() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0],
            vec![0.5, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(
            matrix_rank(&a, DEFAULT_RANK_RTOL),
            matrix_rank(&a.transpose(), DEFAULT_RANK_RTOL)
        );
    }
}
