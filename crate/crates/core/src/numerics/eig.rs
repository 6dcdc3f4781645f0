//! Eigenvalues of a general real matrix: Householder reduction to upper
//! Hessenberg form followed by the Francis double-shift QR iteration.
//! Complex eigenvalues come out in conjugate pairs.

use crate::matrix::{Complex, Matrix};
use crate::numerics::NumericsError;

/// All eigenvalues of a square real matrix, with multiplicity.
pub fn eig_general(m: &Matrix) -> Result<Vec<Complex>, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![Complex::new(m[(0, 0)], 0.0)]),
        _ => {}
    }
    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    let mut eigs = francis_qr(&mut h)?;
    // deterministic order: by real part, then imaginary part
    eigs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(eigs)
}

/// Orthogonal similarity reduction to upper Hessenberg form.
fn hessenberg_in_place(h: &mut Matrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k, rows k+1..n
        let mut v: Vec<f64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm <= f64::EPSILON * norm {
            continue;
        }
        for x in &mut v {
            *x /= vnorm;
        }
        // left application: H[k+1.., :] -= 2 v (v^T H[k+1.., :])
        for j in 0..n {
            let mut s = 0.0;
            for (idx, vi) in v.iter().enumerate() {
                s += vi * h[(k + 1 + idx, j)];
            }
            let s2 = 2.0 * s;
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= s2 * vi;
            }
        }
        // right application: H[:, k+1..] -= 2 (H[:, k+1..] v) v^T
        for i in 0..n {
            let mut s = 0.0;
            for (idx, vj) in v.iter().enumerate() {
                s += vj * h[(i, k + 1 + idx)];
            }
            let s2 = 2.0 * s;
            for (idx, vj) in v.iter().enumerate() {
                h[(i, k + 1 + idx)] -= s2 * vj;
            }
        }
        // entries below the subdiagonal are now negligible by construction
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; destroys `h`.
fn francis_qr(h: &mut Matrix) -> Result<Vec<Complex>, NumericsError> {
    let n = h.rows();
    let sweep_cap = 100 * n;
    let mut sweeps_used = 0usize;
    let mut eigs: Vec<Complex> = Vec::with_capacity(n);

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(vec![Complex::new(0.0, 0.0); n]);
    }

    let mut nn = n as isize - 1; // active block high index
    let mut t = 0.0; // accumulated exceptional shift
    let mut its = 0usize;
    while nn >= 0 {
        // find small subdiagonal element
        let mut l = nn;
        while l > 0 {
            let s = h[((l - 1) as usize, (l - 1) as usize)].abs()
                + h[(l as usize, l as usize)].abs();
            let s = if s == 0.0 { anorm } else { s };
            if h[(l as usize, (l - 1) as usize)].abs() <= f64::EPSILON * s {
                h[(l as usize, (l - 1) as usize)] = 0.0;
                break;
            }
            l -= 1;
        }
        let x = h[(nn as usize, nn as usize)];
        if l == nn {
            // single real root
            eigs.push(Complex::new(x + t, 0.0));
            nn -= 1;
            its = 0;
            continue;
        }
        let y = h[((nn - 1) as usize, (nn - 1) as usize)];
        let w = h[(nn as usize, (nn - 1) as usize)] * h[((nn - 1) as usize, nn as usize)];
        if l == nn - 1 {
            // a 2x2 block has decoupled
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let z = q.abs().sqrt();
            let xx = x + t;
            if q >= 0.0 {
                let z = p + z.copysign(p);
                let e1 = xx + z;
                let e2 = if z != 0.0 { xx - w / z } else { e1 };
                eigs.push(Complex::new(e1, 0.0));
                eigs.push(Complex::new(e2, 0.0));
            } else {
                eigs.push(Complex::new(xx + p, z));
                eigs.push(Complex::new(xx + p, -z));
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if sweeps_used >= sweep_cap {
            return Err(NumericsError::NotConverged { sweeps: sweep_cap });
        }
        let (mut x, mut y, mut w) = (x, y, w);
        if its == 10 || its == 20 {
            // exceptional shift
            t += x;
            for i in 0..=(nn as usize) {
                h[(i, i)] -= x;
            }
            let s = h[(nn as usize, (nn - 1) as usize)].abs()
                + h[((nn - 1) as usize, (nn - 2) as usize)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        sweeps_used += 1;

        // look for two consecutive small subdiagonals
        let mut m = nn - 2;
        let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
        while m >= l {
            let mu = m as usize;
            let z = h[(mu, mu)];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / h[(mu + 1, mu)] + h[(mu, mu + 1)];
            q = h[(mu + 1, mu + 1)] - z - rr - ss;
            r = h[(mu + 2, mu + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = h[(mu, mu - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs()
                * (h[(mu - 1, mu - 1)].abs() + z.abs() + h[(mu + 1, mu + 1)].abs());
            if u <= f64::EPSILON * v {
                break;
            }
            m -= 1;
        }
        for i in (m + 2)..=nn {
            h[(i as usize, (i - 2) as usize)] = 0.0;
        }
        for i in (m + 3)..=nn {
            h[(i as usize, (i - 3) as usize)] = 0.0;
        }
        // double QR sweep on rows l..nn
        let mut k = m;
        while k <= nn - 1 {
            let ku = k as usize;
            if k != m {
                p = h[(ku, ku - 1)];
                q = h[(ku + 1, ku - 1)];
                r = if k != nn - 1 { h[(ku + 2, ku - 1)] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                k += 1;
                continue;
            }
            if k == m {
                if l != m {
                    h[(ku, ku - 1)] = -h[(ku, ku - 1)];
                }
            } else {
                h[(ku, ku - 1)] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;
            // row modification
            for j in ku..=(nn as usize) {
                let mut pp = h[(ku, j)] + q * h[(ku + 1, j)];
                if k != nn - 1 {
                    pp += r * h[(ku + 2, j)];
                    h[(ku + 2, j)] -= pp * z;
                }
                h[(ku + 1, j)] -= pp * y;
                h[(ku, j)] -= pp * x;
            }
            // column modification
            let imax = if nn < k + 3 { nn } else { k + 3 } as usize;
            for i in (l as usize)..=imax {
                let mut pp = x * h[(i, ku)] + y * h[(i, ku + 1)];
                if k != nn - 1 {
                    pp += z * h[(i, ku + 2)];
                    h[(i, ku + 2)] -= pp * r;
                }
                h[(i, ku + 1)] -= pp * q;
                h[(i, ku)] -= pp;
            }
            k += 1;
        }
    }
    Ok(eigs)
}
