//! Cholesky factorization, doubling as the positive-definiteness test used
//! on LMI residuals and inside the barrier line search.

use crate::matrix::Matrix;
use crate::numerics::NumericsError;

/// A failed factorization is an answer, not an error: it is how callers ask
/// "is this matrix positive definite?".
#[derive(Debug, Clone)]
pub enum CholeskyOutcome {
    Factor(Matrix),
    NotPositiveDefinite,
}

impl CholeskyOutcome {
    pub fn factor(self) -> Option<Matrix> {
        match self {
            CholeskyOutcome::Factor(l) => Some(l),
            CholeskyOutcome::NotPositiveDefinite => None,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        matches!(self, CholeskyOutcome::Factor(_))
    }
}

/// Lower-triangular L with L L^T = (S + S^T)/2. The input is symmetrized
/// first so callers can pass matrices with round-off asymmetry.
pub fn cholesky(s: &Matrix) -> Result<CholeskyOutcome, NumericsError> {
    if !s.is_square() {
        return Err(NumericsError::NotSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let n = s.rows();
    let a = s.symmetrize();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Ok(CholeskyOutcome::NotPositiveDefinite);
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok(CholeskyOutcome::Factor(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_to_identity() {
        let l = cholesky(&Matrix::identity(3)).unwrap().factor().unwrap();
        assert!((l.sub(&Matrix::identity(3))).frobenius_norm() < 1e-15);
    }

    #[test]
    fn hand_expanded_2x2() {
        // [[4,2],[2,2]] = [[2,0],[1,1]] * [[2,1],[0,1]]
        let s = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 2.0]]).unwrap();
        let l = cholesky(&s).unwrap().factor().unwrap();
        let expect = Matrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(l.sub(&expect).frobenius_norm() < 1e-14);
    }

    #[test]
    fn indefinite_is_not_an_error() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!cholesky(&s).unwrap().is_positive_definite());
    }

    #[test]
    fn non_square_is_an_error() {
        assert!(cholesky(&Matrix::zeros(2, 3)).is_err());
    }
}
