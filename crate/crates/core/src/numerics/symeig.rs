//! Symmetric eigendecomposition by cyclic Jacobi rotations, plus the PSD
//! square root and the complex-Hermitian eigensolver built on top of it.

use crate::matrix::Matrix;
use crate::numerics::NumericsError;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// symmetric matrix. The input is symmetrized defensively.
pub fn eig_symmetric(s: &Matrix) -> Result<(Vec<f64>, Matrix), NumericsError> {
    if !s.is_square() {
        return Err(NumericsError::NotSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let n = s.rows();
    let mut a = s.symmetrize();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        let vals = (0..n).map(|i| a[(i, i)]).collect();
        return Ok((vals, v));
    }
    let scale = a.frobenius_norm().max(1e-300);
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e15 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((vals, vecs))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig_symmetric(s: &Matrix) -> Result<f64, NumericsError> {
    let (vals, _) = eig_symmetric(s)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

/// Symmetric PSD square root M with M M = S.
///
/// Eigenvalues slightly below zero (within `1e-8 * |S|`) are treated as
/// round-off and clamped; anything more negative is rejected.
pub fn sqrtm_psd(s: &Matrix) -> Result<Matrix, NumericsError> {
    let (vals, vecs) = eig_symmetric(s)?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&min) = vals.first() {
        if min < -1e-8 * scale.max(1.0) {
            return Err(NumericsError::NotPsd { min_eig: min });
        }
    }
    let d = Matrix::diag(
        &vals
            .iter()
            .map(|&v| v.max(0.0).sqrt())
            .collect::<Vec<f64>>(),
    );
    let m = vecs.matmul(&d).matmul(&vecs.transpose());
    Ok(m.symmetrize())
}

/// Eigenvalues (ascending) of a complex Hermitian matrix given as the pair
/// (real part, imaginary part). Uses the real embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is that of H doubled.
pub fn eig_hermitian_complex(re: &Matrix, im: &Matrix) -> Result<Vec<f64>, NumericsError> {
    if !re.is_square() || !im.is_square() || re.rows() != im.rows() {
        return Err(NumericsError::Dimension {
            what: format!(
                "Hermitian parts must be square and matching, got {}x{} and {}x{}",
                re.rows(),
                re.cols(),
                im.rows(),
                im.cols()
            ),
        });
    }
    let n = re.rows();
    let scale = (re.frobenius_norm() + im.frobenius_norm()).max(1.0);
    let sym_defect = re.symmetry_defect();
    let anti_defect = im.add(&im.transpose()).max_abs();
    let defect = sym_defect.max(anti_defect);
    if defect > 1e-8 * scale {
        return Err(NumericsError::NotHermitian { defect });
    }
    let mut embed = Matrix::zeros(2 * n, 2 * n);
    embed.insert_block(0, 0, re);
    embed.insert_block(n, n, re);
    embed.insert_block(0, n, &im.neg());
    embed.insert_block(n, 0, im);
    let (vals, _) = eig_symmetric(&embed)?;
    // doubled spectrum: adjacent sorted pairs are the same eigenvalue
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(0.5 * (vals[2 * k] + vals[2 * k + 1]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_spectrum() {
        let (vals, _) = eig_symmetric(&Matrix::diag(&[3.0, -1.0, 2.0])).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction() {
        let s = Matrix::from_rows(&[
            vec![2.0, 0.5, -0.3],
            vec![0.5, 1.0, 0.2],
            vec![-0.3, 0.2, 1.5],
        ])
        .unwrap();
        let (vals, vecs) = eig_symmetric(&s).unwrap();
        let rebuilt = vecs
            .matmul(&Matrix::diag(&vals))
            .matmul(&vecs.transpose());
        assert!(rebuilt.sub(&s).frobenius_norm() < 1e-12);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = sqrtm_psd(&Matrix::diag(&[4.0, 9.0])).unwrap();
        assert!(m.sub(&Matrix::diag(&[2.0, 3.0])).frobenius_norm() < 1e-12);
    }

    #[test]
    fn sqrt_reconstructs_random_gram() {
        let b = Matrix::from_rows(&[
            vec![1.0, 0.3, -0.2],
            vec![0.0, 0.8, 0.5],
            vec![0.4, -0.1, 1.2],
        ])
        .unwrap();
        let s = b.transpose().matmul(&b);
        let m = sqrtm_psd(&s).unwrap();
        assert!(m.matmul(&m).sub(&s).frobenius_norm() < 1e-10);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        assert!(matches!(
            sqrtm_psd(&Matrix::diag(&[1.0, -1.0])),
            Err(NumericsError::NotPsd { .. })
        ));
    }

    #[test]
    fn hermitian_pauli_y() {
        // [[0, -i], [i, 0]] has eigenvalues -1, +1
        let re = Matrix::zeros(2, 2);
        let im = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let vals = eig_hermitian_complex(&re, &im).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_real_diagonal() {
        let re = Matrix::diag(&[-1.0, -2.0]);
        let im = Matrix::zeros(2, 2);
        let vals = eig_hermitian_complex(&re, &im).unwrap();
        assert!((vals[0] + 2.0).abs() < 1e-12);
        assert!((vals[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let re = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let im = Matrix::zeros(2, 2);
        assert!(eig_hermitian_complex(&re, &im).is_err());
    }
}
