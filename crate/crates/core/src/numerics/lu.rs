//! LU factorization with partial pivoting.

use crate::matrix::Matrix;
use crate::numerics::NumericsError;

#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl LuFactors {
    pub fn new(a: &Matrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let pivot_tol = f64::EPSILON * a.max_abs().max(1e-300) * n as f64;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                if lu[(i, k)].abs() > best {
                    best = lu[(i, k)].abs();
                    piv = i;
                }
            }
            if best <= pivot_tol {
                return Err(NumericsError::Singular { pivot_index: k });
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let m = lu[(i, k)] / d;
                lu[(i, k)] = m;
                for j in (k + 1)..n {
                    lu[(i, j)] -= m * lu[(k, j)];
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    /// Solves A X = B column by column.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, NumericsError> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(NumericsError::Dimension {
                what: format!("rhs has {} rows, expected {}", b.rows(), n),
            });
        }
        let mut x = Matrix::zeros(n, b.cols());
        let mut col = vec![0.0; n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b[(self.perm[i], j)];
            }
            // forward substitution with unit lower factor
            for i in 0..n {
                for k in 0..i {
                    col[i] -= self.lu[(i, k)] * col[k];
                }
            }
            // back substitution
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    col[i] -= self.lu[(i, k)] * col[k];
                }
                col[i] /= self.lu[(i, i)];
            }
            x.set_col(j, &col);
        }
        Ok(x)
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.lu.rows() {
            d *= self.lu[(i, i)];
        }
        d
    }
}

/// Solves A X = B with partial pivoting; A must be square and nonsingular.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix, NumericsError> {
    LuFactors::new(a)?.solve(b)
}

pub fn det(a: &Matrix) -> Result<f64, NumericsError> {
    match LuFactors::new(a) {
        Ok(f) => Ok(f.det()),
        Err(NumericsError::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let x = solve_linear(&Matrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_solve() {
        let a = Matrix::diag(&[2.0, 4.0]);
        let b = Matrix::from_rows(&[vec![2.0], vec![4.0]]).unwrap();
        let x = solve_linear(&a, &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((x[(1, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_on_random_system() {
        // fixed pseudo-random well-conditioned 5x5
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Matrix::from_fn(5, 5, |i, j| next() + if i == j { 3.0 } else { 0.0 });
        let b = Matrix::from_fn(5, 2, |_, _| next());
        let x = solve_linear(&a, &b).unwrap();
        let r = a.matmul(&x).sub(&b);
        assert!(r.frobenius_norm() <= 1e-10 * b.frobenius_norm().max(1.0));
    }

    #[test]
    fn singular_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match solve_linear(&a, &Matrix::identity(2)) {
            Err(NumericsError::Singular { .. }) => {}
            other => panic!("expected singularity error, got {other:?}"),
        }
    }

    #[test]
    fn determinant_matches_cofactor() {
        let a = Matrix::from_rows(&[vec![3.0, 1.0], vec![2.0, 5.0]]).unwrap();
        assert!((det(&a).unwrap() - 13.0).abs() < 1e-12);
    }
}
