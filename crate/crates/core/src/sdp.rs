//! A small dense semidefinite-program solver: minimize a linear objective
//! over affine LMI blocks plus linear equality constraints.
//!
//! Equalities are eliminated through an orthonormal null-space basis, each
//! block is normalized to unit coefficient scale, then a two-phase log-det
//! barrier runs: Phase I maximizes a uniform margin t with all blocks
//! shifted by -tI until the iterate is strictly feasible, Phase II follows
//! the central path with mu shrinking by 10 per stage and damped Newton
//! steps inside each stage. No randomness anywhere, so identical inputs
//! produce identical iterates.

use crate::matrix::Matrix;
use crate::numerics::{cholesky, eig_symmetric, CholeskyOutcome};

/// One affine LMI block: G(y) = f0 + sum_i y[i] coeffs[i], required PSD.
#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub f0: Matrix,
    pub coeffs: Vec<Matrix>,
}

impl LmiBlock {
    /// Builds the block from any affine matrix-valued map by probing the
    /// origin and the unit directions. The map must be affine and return
    /// symmetric matrices.
    pub fn from_affine(num_vars: usize, f: impl Fn(&[f64]) -> Matrix) -> Self {
        let zero = vec![0.0; num_vars];
        let f0 = f(&zero).symmetrize();
        let mut coeffs = Vec::with_capacity(num_vars);
        let mut probe = zero;
        for i in 0..num_vars {
            probe[i] = 1.0;
            coeffs.push(f(&probe).symmetrize().sub(&f0));
            probe[i] = 0.0;
        }
        Self { f0, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.f0.rows()
    }

    pub fn eval(&self, y: &[f64]) -> Matrix {
        let mut g = self.f0.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if y[i] != 0.0 {
                g = g.add(&c.scale(y[i]));
            }
        }
        g
    }
}

#[derive(Debug, Clone)]
pub struct Equality {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub equalities: Vec<Equality>,
    /// optional labels for diagnostics and dumps
    pub var_names: Vec<String>,
}

impl SdpProblem {
    pub fn new(num_vars: usize, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), num_vars);
        Self {
            num_vars,
            objective,
            blocks: Vec::new(),
            equalities: Vec::new(),
            var_names: Vec::new(),
        }
    }

    pub fn total_block_dim(&self) -> usize {
        self.blocks.iter().map(LmiBlock::dim).sum()
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, v)| c * v).sum()
    }

    /// Plain-text dump: the cost vector, then each block's matrices as
    /// (row, col, value) triplets, for cross-checking with external tools.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "sdp num_vars {} blocks {} equalities {}\n",
            self.num_vars,
            self.blocks.len(),
            self.equalities.len()
        ));
        for (i, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let name = self
                    .var_names
                    .get(i)
                    .map(String::as_str)
                    .unwrap_or("");
                out.push_str(&format!("c {i} {c:.17e} {name}\n"));
            }
        }
        for (b, block) in self.blocks.iter().enumerate() {
            out.push_str(&format!("block {b} dim {}\n", block.dim()));
            let mut emit = |label: String, m: &Matrix| {
                for r in 0..m.rows() {
                    for c in r..m.cols() {
                        if m[(r, c)] != 0.0 {
                            out.push_str(&format!("{label} {r} {c} {:.17e}\n", m[(r, c)]));
                        }
                    }
                }
            };
            emit(format!("F {b} const"), &block.f0);
            for (i, fi) in block.coeffs.iter().enumerate() {
                emit(format!("F {b} {i}"), fi);
            }
        }
        for (k, eq) in self.equalities.iter().enumerate() {
            out.push_str(&format!("eq {k} rhs {:.17e}\n", eq.rhs));
            for (i, a) in eq.coeffs.iter().enumerate() {
                if *a != 0.0 {
                    out.push_str(&format!("eq {k} {i} {a:.17e}\n"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub objective_value: f64,
    pub status: SdpStatus,
    pub block_min_eigs: Vec<f64>,
    /// total Newton steps across both phases
    pub iterations: usize,
    /// strict-feasibility margin reached by Phase I (on normalized blocks)
    pub phase1_margin: f64,
    /// final barrier parameter and the induced duality measure bound
    pub final_mu: f64,
    pub duality_measure: f64,
}

#[derive(Debug, Clone)]
pub struct SdpOptions {
    pub feas_tol: f64,
    pub obj_tol: f64,
    /// Newton-step budget per phase
    pub max_iter: usize,
    pub verbose: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            obj_tol: 1e-7,
            max_iter: 200,
            verbose: false,
        }
    }
}

/// Affine reconstruction y = y0 + N z from the reduced coordinates.
#[derive(Debug, Clone)]
pub struct BackMap {
    pub y0: Vec<f64>,
    pub basis: Matrix,
}

impl BackMap {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let nz = self.basis.matvec(z);
        self.y0.iter().zip(nz).map(|(a, b)| a + b).collect()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SdpError {
    #[error("equality constraints are inconsistent (residual {residual:.3e})")]
    InconsistentEqualities { residual: f64 },
}

/// Reparameterizes the feasible affine subspace {y : Ay = b} as y = y0 + Nz
/// with orthonormal N, and rewrites objective and blocks in z.
pub fn eliminate_equalities(p: &SdpProblem) -> Result<(SdpProblem, BackMap), SdpError> {
    let nv = p.num_vars;
    if p.equalities.is_empty() {
        let back = BackMap {
            y0: vec![0.0; nv],
            basis: Matrix::identity(nv),
        };
        return Ok((p.clone(), back));
    }
    let k = p.equalities.len();
    let at = Matrix::from_fn(nv, k, |i, j| p.equalities[j].coeffs[i]);
    let f = crate::numerics::qr_column_pivot(&at, 1e-12);
    let r = f.rank;
    // forward-substitute the permuted triangular system R^T w = P^T b
    let mut w = vec![0.0; nv];
    for j in 0..r {
        let mut s = p.equalities[f.perm[j]].rhs;
        for i in 0..j {
            s -= f.r[(i, j)] * w[i];
        }
        w[j] = s / f.r[(j, j)];
    }
    let y0 = f.q.matvec(&w);
    // consistency of any dependent equations
    let mut worst = 0.0f64;
    for eq in &p.equalities {
        let lhs: f64 = eq.coeffs.iter().zip(&y0).map(|(a, y)| a * y).sum();
        let scale = 1.0
            + eq.rhs.abs()
            + eq.coeffs.iter().map(|a| a.abs()).fold(0.0, f64::max)
                * y0.iter().map(|v| v.abs()).fold(0.0, f64::max);
        worst = worst.max((lhs - eq.rhs).abs() / scale);
    }
    if worst > 1e-8 {
        return Err(SdpError::InconsistentEqualities { residual: worst });
    }
    let nz = nv - r;
    let basis = f.q.submatrix(0, r, nv, nz);
    let mut reduced = SdpProblem::new(nz, basis.transpose().matvec(&p.objective));
    for block in &p.blocks {
        let mut f0 = block.f0.clone();
        for (i, c) in block.coeffs.iter().enumerate() {
            if y0[i] != 0.0 {
                f0 = f0.add(&c.scale(y0[i]));
            }
        }
        let mut coeffs = Vec::with_capacity(nz);
        for j in 0..nz {
            let mut fj = Matrix::zeros(block.dim(), block.dim());
            for (i, c) in block.coeffs.iter().enumerate() {
                let w = basis[(i, j)];
                if w != 0.0 {
                    fj = fj.add(&c.scale(w));
                }
            }
            coeffs.push(fj);
        }
        reduced.blocks.push(LmiBlock { f0, coeffs });
    }
    Ok((
        reduced,
        BackMap {
            y0,
            basis,
        },
    ))
}

struct ScaledBlocks {
    blocks: Vec<LmiBlock>,
}

impl ScaledBlocks {
    fn new(blocks: &[LmiBlock]) -> Self {
        let scaled = blocks
            .iter()
            .map(|b| {
                let mut s = b.f0.frobenius_norm();
                for c in &b.coeffs {
                    s = s.max(c.frobenius_norm());
                }
                let s = if s > 0.0 { s } else { 1.0 };
                LmiBlock {
                    f0: b.f0.scale(1.0 / s),
                    coeffs: b.coeffs.iter().map(|c| c.scale(1.0 / s)).collect(),
                }
            })
            .collect();
        Self { blocks: scaled }
    }

    fn min_eig(&self, y: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                eig_symmetric(&b.eval(y))
                    .map(|(vals, _)| vals.first().copied().unwrap_or(0.0))
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// c.y/mu - sum log det G_j(y); None outside the PD cone.
    fn barrier(&self, y: &[f64], c: &[f64], mu: f64) -> Option<f64> {
        let mut val = c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / mu;
        for b in &self.blocks {
            match cholesky(&b.eval(y)).ok()? {
                CholeskyOutcome::Factor(l) => {
                    for i in 0..l.rows() {
                        val -= 2.0 * l[(i, i)].ln();
                    }
                }
                CholeskyOutcome::NotPositiveDefinite => return None,
            }
        }
        Some(val)
    }

    fn grad_hess(&self, y: &[f64], c: &[f64], mu: f64) -> Option<(Vec<f64>, Matrix)> {
        let nv = y.len();
        let mut g: Vec<f64> = c.iter().map(|v| v / mu).collect();
        let mut h = Matrix::zeros(nv, nv);
        for b in &self.blocks {
            let gmat = b.eval(y);
            let l = cholesky(&gmat).ok()?.factor()?;
            let ginv = spd_inverse_from_factor(&l);
            let gf: Vec<Matrix> = b.coeffs.iter().map(|f| ginv.matmul(f)).collect();
            for i in 0..nv {
                g[i] -= gf[i].trace();
                for k in i..nv {
                    // trace(GF_i GF_k) as an entrywise product with the transpose
                    let mut v = 0.0;
                    let d = gf[i].rows();
                    for r in 0..d {
                        for cc in 0..d {
                            v += gf[i][(r, cc)] * gf[k][(cc, r)];
                        }
                    }
                    h[(i, k)] += v;
                    h[(k, i)] = h[(i, k)];
                }
            }
        }
        Some((g, h))
    }
}

/// Inverse of a symmetric positive definite matrix from its Cholesky
/// factor, by solving L L^T X = I.
fn spd_inverse_from_factor(l: &Matrix) -> Matrix {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        for x in col.iter_mut() {
            *x = 0.0;
        }
        col[j] = 1.0;
        for i in 0..n {
            for k in 0..i {
                col[i] -= l[(i, k)] * col[k];
            }
            col[i] /= l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                col[i] -= l[(k, i)] * col[k];
            }
            col[i] /= l[(i, i)];
        }
        inv.set_col(j, &col);
    }
    inv.symmetrize()
}

/// Solves (H + delta I) p = -g with the smallest damping that factors.
fn damped_newton_step(h: &Matrix, g: &[f64]) -> Option<Vec<f64>> {
    let n = h.rows();
    let mut delta = 0.0;
    let base = (h.trace() / n as f64).max(1.0) * 1e-12;
    for _ in 0..24 {
        let hd = if delta == 0.0 {
            h.clone()
        } else {
            h.add(&Matrix::identity(n).scale(delta))
        };
        if let Ok(CholeskyOutcome::Factor(l)) = cholesky(&hd) {
            let mut p: Vec<f64> = g.iter().map(|v| -v).collect();
            for i in 0..n {
                for k in 0..i {
                    p[i] -= l[(i, k)] * p[k];
                }
                p[i] /= l[(i, i)];
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    p[i] -= l[(k, i)] * p[k];
                }
                p[i] /= l[(i, i)];
            }
            return Some(p);
        }
        delta = if delta == 0.0 { base } else { delta * 100.0 };
    }
    None
}

struct CenterOutcome {
    steps: usize,
    early_stop: bool,
    failed: bool,
}

/// Damped Newton iteration for min c.y/mu - sum logdet G(y). Optional
/// early-out predicate (used by Phase I to stop at strict feasibility).
fn newton_center(
    scaled: &ScaledBlocks,
    y: &mut Vec<f64>,
    c: &[f64],
    mu: f64,
    max_steps: usize,
    dec_tol: f64,
    mut stop: Option<&mut dyn FnMut(&[f64]) -> bool>,
) -> CenterOutcome {
    let mut steps = 0;
    for _ in 0..max_steps {
        if let Some(pred) = stop.as_mut() {
            if pred(y) {
                return CenterOutcome {
                    steps,
                    early_stop: true,
                    failed: false,
                };
            }
        }
        let Some((g, h)) = scaled.grad_hess(y, c, mu) else {
            return CenterOutcome {
                steps,
                early_stop: false,
                failed: true,
            };
        };
        let Some(p) = damped_newton_step(&h, &g) else {
            return CenterOutcome {
                steps,
                early_stop: false,
                failed: true,
            };
        };
        let lambda2 = -g.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
        if std::env::var_os("DDPLACE_SDP_TRACE").is_some() {
            eprintln!("  newton: lambda2={lambda2:.3e} g={g:?} p={p:?}");
        }
        if lambda2 / 2.0 <= dec_tol {
            break;
        }
        let f0 = match scaled.barrier(y, c, mu) {
            Some(v) => v,
            None => {
                return CenterOutcome {
                    steps,
                    early_stop: false,
                    failed: true,
                }
            }
        };
        let slope: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
        // cap the step relative to the iterate scale: along directions of
        // vanishing curvature (unbounded feasible rays) the raw Newton step
        // can be astronomically long, which would strand later stages
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pnorm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cap = 10.0 * (1.0 + ynorm);
        let mut alpha = if pnorm > cap { cap / pnorm } else { 1.0 };
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = y.iter().zip(&p).map(|(v, d)| v + alpha * d).collect();
            if let Some(f) = scaled.barrier(&trial, c, mu) {
                if f <= f0 + 1e-4 * alpha * slope {
                    *y = trial;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
        steps += 1;
    }
    let early = match stop.as_mut() {
        Some(pred) => pred(y),
        None => false,
    };
    CenterOutcome {
        steps,
        early_stop: early,
        failed: false,
    }
}

const PHASE1_MARGIN_TARGET: f64 = 1e-2;

/// Solves the SDP. Never panics on solvable-shaped input; failure modes
/// surface in the status field.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let (reduced, back) = match eliminate_equalities(p) {
        Ok(pair) => pair,
        Err(SdpError::InconsistentEqualities { .. }) => {
            return finish(p, vec![0.0; p.num_vars], SdpStatus::Infeasible, 0, f64::NAN, 0.0);
        }
    };
    let nz = reduced.num_vars;
    let scaled = ScaledBlocks::new(&reduced.blocks);
    let mdim = p.total_block_dim().max(1);
    let mut z = vec![0.0; nz];
    let mut total_steps = 0usize;

    // Phase I: maximize a uniform margin below all blocks
    let tau0 = scaled.min_eig(&z);
    let mut tau = tau0;
    if tau0 < PHASE1_MARGIN_TARGET {
        let ext_blocks: Vec<LmiBlock> = scaled
            .blocks
            .iter()
            .map(|b| {
                let mut coeffs = b.coeffs.clone();
                coeffs.push(Matrix::identity(b.dim()).neg());
                LmiBlock {
                    f0: b.f0.clone(),
                    coeffs,
                }
            })
            .collect();
        let ext = ScaledBlocks { blocks: ext_blocks };
        let mut cext = vec![0.0; nz + 1];
        cext[nz] = -1.0;
        let mut zext = z.clone();
        zext.push(tau0 - 1.0);
        let mut mu = 1.0;
        let mut budget = opts.max_iter;
        loop {
            let mut pred =
                |v: &[f64]| scaled.min_eig(&v[..nz]) >= PHASE1_MARGIN_TARGET;
            let out = newton_center(
                &ext,
                &mut zext,
                &cext,
                mu,
                budget.min(40),
                1e-5,
                Some(&mut pred),
            );
            total_steps += out.steps;
            budget = budget.saturating_sub(out.steps);
            if opts.verbose {
                eprintln!(
                    "phase1 mu={mu:.1e} t={:.4e} steps={}",
                    zext[nz], out.steps
                );
            }
            if out.failed {
                return finish(p, back.apply(&z), SdpStatus::NumericalFailure, total_steps, f64::NAN, 0.0);
            }
            if out.early_stop || mu < 1e-9 || budget == 0 {
                break;
            }
            mu /= 10.0;
        }
        z = zext[..nz].to_vec();
        tau = scaled.min_eig(&z);
    }
    if tau <= 0.0 {
        return finish(p, back.apply(&z), SdpStatus::Infeasible, total_steps, tau, 0.0);
    }
    // pure feasibility problem: any strictly interior point is optimal
    let creduced = reduced.objective.clone();
    if creduced.iter().all(|c| *c == 0.0) {
        let y = back.apply(&z);
        return finish(p, y, SdpStatus::Optimal, total_steps, tau, 0.0);
    }

    // Phase II: path following
    let mut mu = 1.0;
    let mu_stop = opts.obj_tol / mdim as f64;
    let mut budget = opts.max_iter;
    let mut completed = false;
    loop {
        let last_stage = mu < mu_stop * 10.0;
        let dec_tol = if last_stage { 1e-11 } else { 1e-5 };
        let out = newton_center(
            &scaled,
            &mut z,
            &creduced,
            mu,
            budget.min(60),
            dec_tol,
            None,
        );
        total_steps += out.steps;
        budget = budget.saturating_sub(out.steps);
        if opts.verbose {
            let obj: f64 = creduced.iter().zip(&z).map(|(a, b)| a * b).sum();
            eprintln!("phase2 mu={mu:.1e} obj={obj:.10} steps={}", out.steps);
        }
        if out.failed {
            return finish(p, back.apply(&z), SdpStatus::NumericalFailure, total_steps, tau, mu);
        }
        if mu < mu_stop {
            completed = true;
            break;
        }
        if budget == 0 {
            break;
        }
        mu /= 10.0;
    }
    let status = if completed {
        SdpStatus::Optimal
    } else {
        SdpStatus::MaxIter
    };
    finish(p, back.apply(&z), status, total_steps, tau, mu)
}

fn finish(
    p: &SdpProblem,
    y: Vec<f64>,
    status: SdpStatus,
    iterations: usize,
    phase1_margin: f64,
    final_mu: f64,
) -> SdpSolution {
    let block_min_eigs = p
        .blocks
        .iter()
        .map(|b| {
            eig_symmetric(&b.eval(&y))
                .map(|(vals, _)| vals.first().copied().unwrap_or(0.0))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let objective_value = p.objective_value(&y);
    SdpSolution {
        y,
        objective_value,
        status,
        block_min_eigs,
        iterations,
        phase1_margin,
        final_mu,
        duality_measure: final_mu * p.total_block_dim() as f64,
    }
}

#[derive(Debug, Clone)]
pub struct SolutionCheck {
    pub block_min_eigs: Vec<f64>,
    pub equality_residuals: Vec<f64>,
    pub objective_value: f64,
    pub pass: bool,
}

/// Residual report at an arbitrary point.
pub fn check_solution(p: &SdpProblem, y: &[f64], tol: f64) -> SolutionCheck {
    let block_min_eigs: Vec<f64> = p
        .blocks
        .iter()
        .map(|b| {
            eig_symmetric(&b.eval(y))
                .map(|(vals, _)| vals.first().copied().unwrap_or(0.0))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let equality_residuals: Vec<f64> = p
        .equalities
        .iter()
        .map(|eq| eq.coeffs.iter().zip(y).map(|(a, v)| a * v).sum::<f64>() - eq.rhs)
        .collect();
    let pass = block_min_eigs.iter().all(|&e| e >= -tol)
        && equality_residuals.iter().all(|r| r.abs() <= tol);
    SolutionCheck {
        block_min_eigs,
        equality_residuals,
        objective_value: p.objective_value(y),
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min t s.t. [[t, 1], [1, t]] >= 0; eigenvalues t +- 1, optimum 1.
    #[test]
    fn analytic_two_by_two() {
        let mut p = SdpProblem::new(1, vec![1.0]);
        p.blocks.push(LmiBlock::from_affine(1, |y| {
            Matrix::from_rows(&[vec![y[0], 1.0], vec![1.0, y[0]]]).unwrap()
        }));
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.y[0] - 1.0).abs() < 1e-6, "t* = {}", sol.y[0]);
    }

    /// min trace X s.t. X >= M: optimum X = M.
    #[test]
    fn analytic_trace_min() {
        let m = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let mut p = SdpProblem::new(3, vec![1.0, 0.0, 1.0]);
        let mc = m.clone();
        p.blocks.push(LmiBlock::from_affine(3, move |y| {
            Matrix::from_rows(&[vec![y[0], y[1]], vec![y[1], y[2]]])
                .unwrap()
                .sub(&mc)
        }));
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.y[0] - 2.0).abs() < 1e-6);
        assert!((sol.y[1] - 0.5).abs() < 1e-6);
        assert!((sol.y[2] - 1.0).abs() < 1e-6);
        assert!((sol.objective_value - 3.0).abs() < 1e-6);
    }

    #[test]
    fn constant_negative_block_is_infeasible() {
        let mut p = SdpProblem::new(0, vec![]);
        p.blocks.push(LmiBlock {
            f0: Matrix::identity(2).neg(),
            coeffs: vec![],
        });
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn equality_elimination_identity_when_empty() {
        let p = SdpProblem::new(2, vec![1.0, 1.0]);
        let (red, back) = eliminate_equalities(&p).unwrap();
        assert_eq!(red.num_vars, 2);
        assert_eq!(back.apply(&[3.0, 4.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn equality_reduces_dimension() {
        // y1 = y2 in a 2-var problem
        let mut p = SdpProblem::new(2, vec![1.0, 0.0]);
        p.equalities.push(Equality {
            coeffs: vec![1.0, -1.0],
            rhs: 0.0,
        });
        let (red, back) = eliminate_equalities(&p).unwrap();
        assert_eq!(red.num_vars, 1);
        let y = back.apply(&[1.0]);
        assert!((y[0] - y[1]).abs() < 1e-12);
    }

    #[test]
    fn back_map_satisfies_equalities() {
        let mut p = SdpProblem::new(4, vec![0.0; 4]);
        p.equalities.push(Equality {
            coeffs: vec![1.0, 2.0, -1.0, 0.5],
            rhs: 3.0,
        });
        p.equalities.push(Equality {
            coeffs: vec![0.0, 1.0, 1.0, -1.0],
            rhs: -1.0,
        });
        let (red, back) = eliminate_equalities(&p).unwrap();
        assert_eq!(red.num_vars, 2);
        for z in [[0.0, 0.0], [1.0, -2.0], [0.3, 0.7]] {
            let y = back.apply(&z);
            let r1: f64 = y[0] + 2.0 * y[1] - y[2] + 0.5 * y[3] - 3.0;
            let r2: f64 = y[1] + y[2] - y[3] + 1.0;
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_equalities_reported() {
        let mut p = SdpProblem::new(2, vec![0.0, 0.0]);
        p.equalities.push(Equality {
            coeffs: vec![1.0, 1.0],
            rhs: 1.0,
        });
        p.equalities.push(Equality {
            coeffs: vec![2.0, 2.0],
            rhs: 5.0,
        });
        assert!(matches!(
            eliminate_equalities(&p),
            Err(SdpError::InconsistentEqualities { .. })
        ));
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn check_solution_vacuous_and_perturbed() {
        let p = SdpProblem::new(1, vec![0.0]);
        let report = check_solution(&p, &[0.0], 1e-6);
        assert!(report.pass);

        let mut p = SdpProblem::new(1, vec![1.0]);
        p.blocks.push(LmiBlock::from_affine(1, |y| {
            Matrix::from_rows(&[vec![y[0], 1.0], vec![1.0, y[0]]]).unwrap()
        }));
        let sol = solve(&p, &SdpOptions::default());
        assert!(check_solution(&p, &sol.y, 1e-6).pass);
        // push one unit into the tight direction
        let bad = vec![sol.y[0] - 1.0];
        assert!(!check_solution(&p, &bad, 1e-6).pass);
    }

    #[test]
    fn determinism() {
        let build = || {
            let mut p = SdpProblem::new(3, vec![1.0, 0.0, 1.0]);
            let m = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
            p.blocks.push(LmiBlock::from_affine(3, move |y| {
                Matrix::from_rows(&[vec![y[0], y[1]], vec![y[1], y[2]]])
                    .unwrap()
                    .sub(&m)
            }));
            p
        };
        let a = solve(&build(), &SdpOptions::default());
        let b = solve(&build(), &SdpOptions::default());
        assert_eq!(a.y, b.y);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn dump_contains_cost_and_blocks() {
        let mut p = SdpProblem::new(1, vec![1.0]);
        p.var_names = vec!["t".to_string()];
        p.blocks.push(LmiBlock::from_affine(1, |y| {
            Matrix::from_rows(&[vec![y[0], 1.0], vec![1.0, y[0]]]).unwrap()
        }));
        let text = p.dump();
        assert!(text.contains("c 0"));
        assert!(text.contains("block 0 dim 2"));
    }
}
