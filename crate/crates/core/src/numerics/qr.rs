//! Householder QR with column pivoting and full Q accumulation; the null
//! space machinery behind equality elimination in the SDP layer.

use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct PivotedQr {
    pub q: Matrix,
    pub r: Matrix,
    /// permutation: column j of the factored matrix is column perm[j] of A
    pub perm: Vec<usize>,
    pub rank: usize,
}

/// Factors A P = Q R with column pivoting. Q is the full m x m orthogonal
/// factor, so its trailing columns span the orthogonal complement of the
/// column space of A.
pub fn qr_column_pivot(a: &Matrix, rank_rtol: f64) -> PivotedQr {
    let m = a.rows();
    let n = a.cols();
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let kmax = m.min(n);
    for k in 0..kmax {
        // pivot: remaining column with largest norm
        let mut best_j = k;
        let mut best_norm = 0.0;
        for j in k..n {
            let nj: f64 = (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
            if nj > best_norm {
                best_norm = nj;
                best_j = j;
            }
        }
        if best_j != k {
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, best_j)];
                r[(i, best_j)] = t;
            }
            perm.swap(k, best_j);
        }
        let norm = best_norm.sqrt();
        if norm == 0.0 {
            break;
        }
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for x in &mut v {
                *x /= vnorm;
            }
            // R <- P R on rows k..m
            for j in k..n {
                let mut s = 0.0;
                for (idx, vi) in v.iter().enumerate() {
                    s += vi * r[(k + idx, j)];
                }
                let s2 = 2.0 * s;
                for (idx, vi) in v.iter().enumerate() {
                    r[(k + idx, j)] -= s2 * vi;
                }
            }
            // Q <- Q P on columns k..m
            for i in 0..m {
                let mut s = 0.0;
                for (idx, vj) in v.iter().enumerate() {
                    s += vj * q[(i, k + idx)];
                }
                let s2 = 2.0 * s;
                for (idx, vj) in v.iter().enumerate() {
                    q[(i, k + idx)] -= s2 * vj;
                }
            }
        }
        r[(k, k)] = alpha;
        for i in (k + 1)..m {
            r[(i, k)] = 0.0;
        }
    }
    let scale = r[(0, 0)].abs().max(1e-300);
    let rank = (0..kmax)
        .take_while(|&k| r[(k, k)].abs() > rank_rtol * scale * m.max(n) as f64)
        .count();
    PivotedQr { q, r, perm, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_input() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![-0.5, 1.5],
            vec![2.0, 0.1],
            vec![0.3, -1.0],
        ])
        .unwrap();
        let f = qr_column_pivot(&a, 1e-12);
        let qr = f.q.matmul(&f.r);
        for j in 0..a.cols() {
            for i in 0..a.rows() {
                assert!((qr[(i, j)] - a[(i, f.perm[j])]).abs() < 1e-12);
            }
        }
        assert_eq!(f.rank, 2);
    }

    #[test]
    fn q_is_orthogonal() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]])
            .unwrap()
            .transpose();
        let f = qr_column_pivot(&a, 1e-12);
        let qtq = f.q.transpose().matmul(&f.q);
        assert!(qtq.sub(&Matrix::identity(3)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn trailing_columns_annihilate() {
        // rank-1 tall matrix: null complement of its column space is 2-dim
        let a = Matrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let f = qr_column_pivot(&a, 1e-12);
        assert_eq!(f.rank, 1);
        for jq in f.rank..3 {
            let col = f.q.col_vec(jq);
            for j in 0..a.cols() {
                let dot: f64 = (0..3).map(|i| a[(i, j)] * col[i]).sum();
                assert!(dot.abs() < 1e-12);
            }
        }
    }
}
