//! Builds the semidefinite programs for D-stability and mixed H2/H-infinity
//! state-feedback design, in both the data-driven form (decision variable Q
//! acting on trajectory blocks) and the model-based form (Lyapunov X with
//! the change of variable Y = K X), and recovers the gain from the
//! optimizer.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, VerificationReport};
use crate::data::{check_persistency, DataMatrices, PeReport, SystemModel};
use crate::matrix::Matrix;
use crate::numerics::{singular_values, solve_linear, sqrtm_psd, NumericsError};
use crate::region::{region_block_from_product, LmiRegion};
use crate::sdp::{self, Equality, LmiBlock, SdpOptions, SdpProblem, SdpStatus};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SynthesisError {
    #[error("persistency of excitation not satisfied: rank {rank} of required {required_rank}, T = {actual_t} (need >= {required_t})")]
    PersistencyNotSatisfied {
        rank: usize,
        required_rank: usize,
        actual_t: usize,
        required_t: usize,
    },
    #[error("invalid synthesis spec: {0}")]
    BadSpec(String),
    #[error("solver finished with status {status:?}")]
    SolverFailed { status: SdpStatus },
    #[error("gain recovery failed: X0T Q is near singular (sigma_min/sigma_max = {ratio:.3e})")]
    RecoveryIllConditioned { ratio: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl SynthesisError {
    pub fn pe(report: &PeReport) -> Self {
        SynthesisError::PersistencyNotSatisfied {
            rank: report.rank,
            required_rank: report.required_rank,
            actual_t: report.actual_t,
            required_t: report.required_t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SynthesisMode {
    /// Pole placement only; a feasibility problem.
    DstabOnly,
    /// Minimize trace(Qx X) + trace(S) + gamma.
    MixedOptGamma,
    /// Fixed robustness level: gamma pinned, objective drops the gamma term.
    MixedFixedGamma { gamma_bar: f64 },
}

impl SynthesisMode {
    pub fn name(&self) -> &'static str {
        match self {
            SynthesisMode::DstabOnly => "dstab_only",
            SynthesisMode::MixedOptGamma => "mixed_opt_gamma",
            SynthesisMode::MixedFixedGamma { .. } => "mixed_fixed_gamma",
        }
    }

    pub fn is_mixed(&self) -> bool {
        !matches!(self, SynthesisMode::DstabOnly)
    }
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_true() -> bool {
    true
}

/// Everything the designer chooses: the region, the performance channel,
/// the penalty weights, and the strictness/fidelity switches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub region: LmiRegion,
    pub q_x: Matrix,
    pub r: Matrix,
    pub c1: Matrix,
    pub d11: Matrix,
    pub d12: Matrix,
    pub b1: Matrix,
    pub mode: SynthesisMode,
    /// strictness factor: inequalities are shifted by
    /// epsilon * (1 + data scale) * I
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Reproduce the printed theorem blocks verbatim: the pole-placement
    /// block is then built from the raw derivative data X1T instead of the
    /// disturbance-corrected XtildeT. See `assemble_mixed_data`.
    #[serde(default)]
    pub literal_paper_lmis: bool,
    /// Ablation switch: drop the pole-placement block entirely.
    #[serde(default = "default_true")]
    pub pole_constraint: bool,
}

impl SynthesisSpec {
    pub fn state_dim(&self) -> usize {
        self.b1.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.r.rows()
    }

    pub fn validate(&self) -> Result<(), SynthesisError> {
        let n = self.state_dim();
        let m = self.input_dim();
        let p1 = self.c1.rows();
        let d = self.b1.cols();
        let checks = [
            (self.c1.cols() == n, "C1 must have n columns"),
            (
                self.d11.rows() == p1 && self.d11.cols() == d,
                "D11 must be p1 x d",
            ),
            (
                self.d12.rows() == p1 && self.d12.cols() == m,
                "D12 must be p1 x m",
            ),
            (
                self.q_x.rows() == n && self.q_x.cols() == n,
                "Qx must be n x n",
            ),
            (self.r.rows() == m && self.r.cols() == m, "R must be m x m"),
            (self.epsilon > 0.0, "epsilon must be positive"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(SynthesisError::BadSpec(msg.to_string()));
            }
        }
        if let SynthesisMode::MixedFixedGamma { gamma_bar } = self.mode {
            if !(gamma_bar > 0.0) {
                return Err(SynthesisError::BadSpec(format!(
                    "gamma_bar must be positive, got {gamma_bar}"
                )));
            }
        }
        Ok(())
    }

    /// Spec for the paper's working example: identity weights, identity B1
    /// and C1, all-ones feedthroughs, and the alpha = 2 sector.
    pub fn mixed_identity_weights(
        n: usize,
        m: usize,
        d: usize,
        p1: usize,
        region: LmiRegion,
    ) -> Self {
        SynthesisSpec {
            region,
            q_x: Matrix::identity(n),
            r: Matrix::identity(m),
            c1: Matrix::identity(p1),
            d11: Matrix::from_fn(p1, d, |_, _| 1.0),
            d12: Matrix::from_fn(p1, m, |_, _| 1.0),
            b1: Matrix::identity(n),
            mode: SynthesisMode::MixedOptGamma,
            epsilon: default_epsilon(),
            literal_paper_lmis: false,
            pole_constraint: true,
        }
    }
}

/// Gain and certificate recovered from a solved program, with the solver
/// evidence and the verification report attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerResult {
    /// state feedback K (m x n)
    pub gain: Matrix,
    /// common Lyapunov certificate X (n x n, symmetric PD)
    pub lyapunov: Matrix,
    /// H2 slack S (m x m), absent in pole-placement-only mode
    pub slack: Option<Matrix>,
    /// H-infinity level: the optimized gamma, or gamma_bar in fixed mode
    pub gamma: Option<f64>,
    pub objective_value: Option<f64>,
    pub solver: SolverDiagnostics,
    pub provenance: Provenance,
    pub verification: VerificationReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub status: SdpStatus,
    pub iterations: usize,
    pub block_min_eigs: Vec<f64>,
    pub phase1_margin: f64,
    pub duality_measure: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: String,
    /// "data" or "model"
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_hash: Option<String>,
    pub literal_paper_lmis: bool,
    pub pole_constraint: bool,
}

/// Variable layout of an assembled program plus the column equilibration
/// applied to the data blocks; extraction undoes the scaling so callers
/// always see original coordinates.
#[derive(Debug, Clone)]
pub struct AssembledProblem {
    pub problem: SdpProblem,
    layout: Layout,
}

#[derive(Debug, Clone)]
enum Layout {
    Data {
        samples: usize,
        n: usize,
        m: usize,
        has_slack: bool,
        has_gamma: bool,
        col_scale: Vec<f64>,
    },
    Model {
        n: usize,
        m: usize,
        has_slack: bool,
        has_gamma: bool,
    },
}

impl AssembledProblem {
    /// Decision matrix Q in the original (unequilibrated) data coordinates.
    pub fn extract_q(&self, y: &[f64]) -> Option<Matrix> {
        match &self.layout {
            Layout::Data {
                samples,
                n,
                col_scale,
                ..
            } => Some(Matrix::from_fn(*samples, *n, |t, i| {
                y[t * n + i] * col_scale[t]
            })),
            Layout::Model { .. } => None,
        }
    }

    pub fn extract_model_xy(&self, y: &[f64]) -> Option<(Matrix, Matrix)> {
        match &self.layout {
            Layout::Model { n, m, .. } => {
                let x = unpack_symmetric(y, 0, *n);
                let base = *n * (*n + 1) / 2;
                let ymat = Matrix::from_fn(*m, *n, |i, j| y[base + i * n + j]);
                Some((x, ymat))
            }
            Layout::Data { .. } => None,
        }
    }

    pub fn extract_slack(&self, y: &[f64]) -> Option<Matrix> {
        let (offset, m, has_slack) = match &self.layout {
            Layout::Data {
                samples,
                n,
                m,
                has_slack,
                ..
            } => (samples * n, *m, *has_slack),
            Layout::Model {
                n, m, has_slack, ..
            } => (n * (n + 1) / 2 + m * n, *m, *has_slack),
        };
        has_slack.then(|| unpack_symmetric(y, offset, m))
    }

    pub fn extract_gamma(&self, y: &[f64]) -> Option<f64> {
        let (offset, m, has_slack, has_gamma) = match &self.layout {
            Layout::Data {
                samples,
                n,
                m,
                has_slack,
                has_gamma,
                ..
            } => (samples * n, *m, *has_slack, *has_gamma),
            Layout::Model {
                n,
                m,
                has_slack,
                has_gamma,
            } => (n * (n + 1) / 2 + m * n, *m, *has_slack, *has_gamma),
        };
        if !has_gamma {
            return None;
        }
        let idx = offset + if has_slack { m * (m + 1) / 2 } else { 0 };
        Some(y[idx])
    }
}

fn unpack_symmetric(y: &[f64], offset: usize, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let mut idx = offset;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = y[idx];
            m[(j, i)] = y[idx];
            idx += 1;
        }
    }
    m
}

fn symmetric_var_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Column equilibration of the data blocks: every sample column of the
/// stacked [U; X0; Xtilde; X1] matrix is scaled to unit norm, absorbed into
/// Q. This is an exact reparameterization; `extract_q` undoes it.
struct ScaledData {
    u: Matrix,
    x0: Matrix,
    xt: Matrix,
    x1: Matrix,
    col_scale: Vec<f64>,
}

fn equilibrate(dm: &DataMatrices) -> ScaledData {
    let t = dm.samples();
    let mut col_scale = Vec::with_capacity(t);
    for k in 0..t {
        let mut s = 0.0;
        for m in [&dm.u01t, &dm.x0t, &dm.xtilde1t, &dm.x1t] {
            for i in 0..m.rows() {
                s += m[(i, k)] * m[(i, k)];
            }
        }
        let norm = s.sqrt();
        col_scale.push(if norm > 1e-12 { 1.0 / norm } else { 1.0 });
    }
    let scale_cols = |m: &Matrix| {
        let mut out = m.clone();
        for k in 0..t {
            for i in 0..m.rows() {
                out[(i, k)] *= col_scale[k];
            }
        }
        out
    };
    ScaledData {
        u: scale_cols(&dm.u01t),
        x0: scale_cols(&dm.x0t),
        xt: scale_cols(&dm.xtilde1t),
        x1: scale_cols(&dm.x1t),
        col_scale,
    }
}

fn strictness(epsilon: f64, data_scale: f64) -> f64 {
    epsilon * (1.0 + data_scale)
}

fn q_from_y(y: &[f64], t: usize, n: usize) -> Matrix {
    Matrix::from_fn(t, n, |k, i| y[k * n + i])
}

/// Symmetry equalities on X0 Q, one per strict upper-triangle entry.
fn symmetry_equalities(x0: &Matrix, num_vars: usize, t: usize, n: usize) -> Vec<Equality> {
    let mut eqs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut coeffs = vec![0.0; num_vars];
            for k in 0..t {
                coeffs[k * n + j] += x0[(i, k)];
                coeffs[k * n + i] -= x0[(j, k)];
            }
            eqs.push(Equality { coeffs, rhs: 0.0 });
        }
    }
    eqs
}

fn data_var_names(t: usize, n: usize, m: usize, has_slack: bool, has_gamma: bool) -> Vec<String> {
    let mut names = Vec::new();
    for k in 0..t {
        for i in 0..n {
            names.push(format!("Q[{k}][{i}]"));
        }
    }
    if has_slack {
        for i in 0..m {
            for j in i..m {
                names.push(format!("S[{i}][{j}]"));
            }
        }
    }
    if has_gamma {
        names.push("gamma".to_string());
    }
    names
}

/// Pole-placement feasibility program from data (no performance channel):
/// find Q with the region block negative definite in Xtilde Q, X0 Q
/// symmetric positive definite.
pub fn assemble_dstab_data(
    dm: &DataMatrices,
    region: &LmiRegion,
    epsilon: f64,
) -> Result<AssembledProblem, SynthesisError> {
    assemble_dstab_data_with(dm, region, epsilon, false)
}

/// Variant used by `design` to honor `literal_paper_lmis`: when `literal`
/// is set the pole block reads the raw derivative data X1T.
pub fn assemble_dstab_data_with(
    dm: &DataMatrices,
    region: &LmiRegion,
    epsilon: f64,
    literal: bool,
) -> Result<AssembledProblem, SynthesisError> {
    let n = dm.state_dim();
    let m = dm.input_dim();
    let report = check_persistency(dm, n, m);
    if !report.pass {
        return Err(SynthesisError::pe(&report));
    }
    let sd = equilibrate(dm);
    let t = dm.samples();
    let nv = t * n;
    let eps = strictness(
        epsilon,
        Matrix::vstack(&[&sd.u, &sd.x0, &sd.xt]).frobenius_norm(),
    );
    let mut problem = SdpProblem::new(nv, vec![0.0; nv]);
    problem.var_names = data_var_names(t, n, m, false, false);
    let pole_data = if literal { sd.x1.clone() } else { sd.xt.clone() };
    let x0 = sd.x0.clone();
    let region_cl = region.clone();
    let kdim = region.order() * n;
    problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
        let q = q_from_y(y, t, n);
        let h = pole_data.matmul(&q);
        let xq = x0.matmul(&q);
        region_block_from_product(&region_cl, &h, &xq)
            .neg()
            .sub(&Matrix::identity(kdim).scale(eps))
    }));
    let x0 = sd.x0.clone();
    problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
        let q = q_from_y(y, t, n);
        x0.matmul(&q)
            .symmetrize()
            .sub(&Matrix::identity(n).scale(eps))
    }));
    problem.equalities = symmetry_equalities(&sd.x0, nv, t, n);
    Ok(AssembledProblem {
        problem,
        layout: Layout::Data {
            samples: t,
            n,
            m,
            has_slack: false,
            has_gamma: false,
            col_scale: sd.col_scale,
        },
    })
}

/// The mixed design program from data. Blocks, in order:
/// bounded-real (H-infinity) on the disturbance-corrected data, the
/// pole-placement region block (unless ablated), the H2 Schur block
/// coupling the slack S to K X, and X0 Q >= eps I; plus the symmetry
/// equalities on X0 Q.
pub fn assemble_mixed_data(
    dm: &DataMatrices,
    spec: &SynthesisSpec,
) -> Result<AssembledProblem, SynthesisError> {
    spec.validate()?;
    if !spec.mode.is_mixed() {
        return Err(SynthesisError::BadSpec(
            "assemble_mixed_data requires a mixed mode".to_string(),
        ));
    }
    let n = dm.state_dim();
    let m = dm.input_dim();
    if spec.state_dim() != n || spec.input_dim() != m {
        return Err(SynthesisError::BadSpec(format!(
            "spec dimensions ({}, {}) do not match data ({n}, {m})",
            spec.state_dim(),
            spec.input_dim()
        )));
    }
    let report = check_persistency(dm, n, m);
    if !report.pass {
        return Err(SynthesisError::pe(&report));
    }
    let sd = equilibrate(dm);
    let t = dm.samples();
    let d = spec.b1.cols();
    let p1 = spec.c1.rows();
    let has_gamma = matches!(spec.mode, SynthesisMode::MixedOptGamma);
    let nq = t * n;
    let ns = symmetric_var_count(m);
    let nv = nq + ns + usize::from(has_gamma);
    let eps = strictness(
        spec.epsilon,
        Matrix::vstack(&[&sd.u, &sd.x0, &sd.xt]).frobenius_norm(),
    );
    let r_half = sqrtm_psd(&spec.r)?;

    // objective: trace(Qx X0 Q) + trace(S) [+ gamma]
    let mut objective = vec![0.0; nv];
    let qx_x0 = spec.q_x.matmul(&sd.x0);
    for k in 0..t {
        for i in 0..n {
            objective[k * n + i] = qx_x0[(i, k)];
        }
    }
    {
        let mut idx = nq;
        for i in 0..m {
            for j in i..m {
                if i == j {
                    objective[idx] = 1.0;
                }
                idx += 1;
            }
        }
    }
    if has_gamma {
        objective[nv - 1] = 1.0;
    }

    let mut problem = SdpProblem::new(nv, objective);
    problem.var_names = data_var_names(t, n, m, true, has_gamma);

    let gamma_of = move |y: &[f64]| -> f64 {
        if has_gamma {
            y[nv - 1]
        } else if let SynthesisMode::MixedFixedGamma { gamma_bar } = spec.mode {
            gamma_bar
        } else {
            unreachable!()
        }
    };

    // bounded-real block
    {
        let (u, x0, xt) = (sd.u.clone(), sd.x0.clone(), sd.xt.clone());
        let (b1, c1, d11, d12) = (
            spec.b1.clone(),
            spec.c1.clone(),
            spec.d11.clone(),
            spec.d12.clone(),
        );
        let dim = n + d + p1;
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let q = q_from_y(y, t, n);
            let gamma = gamma_of(y);
            let xq = x0.matmul(&q);
            let hq = xt.matmul(&q);
            let uq = u.matmul(&q);
            let top_left = hq.add(&hq.transpose());
            let top_right = xq.matmul(&c1.transpose()).add(&uq.transpose().matmul(&d12.transpose()));
            let bottom_left = c1.matmul(&xq).add(&d12.matmul(&uq));
            let gi_d = Matrix::identity(d).scale(-gamma);
            let gi_p = Matrix::identity(p1).scale(-gamma);
            let row0 = Matrix::hstack(&[&top_left, &b1, &top_right]);
            let row1 = Matrix::hstack(&[&b1.transpose(), &gi_d, &d11.transpose()]);
            let row2 = Matrix::hstack(&[&bottom_left, &d11, &gi_p]);
            Matrix::vstack(&[&row0, &row1, &row2])
                .neg()
                .sub(&Matrix::identity(dim).scale(eps))
        }));
    }

    // pole-placement region block
    if spec.pole_constraint {
        let pole_data = if spec.literal_paper_lmis {
            sd.x1.clone()
        } else {
            sd.xt.clone()
        };
        let x0 = sd.x0.clone();
        let region = spec.region.clone();
        let kdim = region.order() * n;
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let q = q_from_y(y, t, n);
            let h = pole_data.matmul(&q);
            let xq = x0.matmul(&q);
            region_block_from_product(&region, &h, &xq)
                .neg()
                .sub(&Matrix::identity(kdim).scale(eps))
        }));
    }

    // H2 Schur block [[S, R^(1/2) U Q], [Q^T U^T R^(1/2), X0 Q]]
    {
        let (u, x0) = (sd.u.clone(), sd.x0.clone());
        let r_half = r_half.clone();
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let q = q_from_y(y, t, n);
            let s = unpack_symmetric(y, nq, m);
            let ruq = r_half.matmul(&u.matmul(&q));
            let xq = x0.matmul(&q).symmetrize();
            let row0 = Matrix::hstack(&[&s, &ruq]);
            let row1 = Matrix::hstack(&[&ruq.transpose(), &xq]);
            Matrix::vstack(&[&row0, &row1])
        }));
    }

    // X0 Q >= eps I
    {
        let x0 = sd.x0.clone();
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let q = q_from_y(y, t, n);
            x0.matmul(&q)
                .symmetrize()
                .sub(&Matrix::identity(n).scale(eps))
        }));
    }

    problem.equalities = symmetry_equalities(&sd.x0, nv, t, n);
    Ok(AssembledProblem {
        problem,
        layout: Layout::Data {
            samples: t,
            n,
            m,
            has_slack: true,
            has_gamma,
            col_scale: sd.col_scale,
        },
    })
}

/// The model-based counterpart: variables X (symmetric), Y = K X, S and
/// optionally gamma, with A and B2 appearing explicitly.
pub fn assemble_mixed_model(
    sys: &SystemModel,
    spec: &SynthesisSpec,
) -> Result<AssembledProblem, SynthesisError> {
    spec.validate()?;
    let n = sys.state_dim();
    let m = sys.input_dim();
    if spec.state_dim() != n || spec.input_dim() != m {
        return Err(SynthesisError::BadSpec(format!(
            "spec dimensions ({}, {}) do not match model ({n}, {m})",
            spec.state_dim(),
            spec.input_dim()
        )));
    }
    let d = spec.b1.cols();
    let p1 = spec.c1.rows();
    let mixed = spec.mode.is_mixed();
    let has_gamma = matches!(spec.mode, SynthesisMode::MixedOptGamma);
    let nx = symmetric_var_count(n);
    let ny = m * n;
    let ns = if mixed { symmetric_var_count(m) } else { 0 };
    let nv = nx + ny + ns + usize::from(has_gamma);
    let eps = strictness(
        spec.epsilon,
        Matrix::hstack(&[&sys.a, &sys.b2]).frobenius_norm(),
    );
    let r_half = sqrtm_psd(&spec.r)?;

    let mut objective = vec![0.0; nv];
    if mixed {
        // trace(Qx X): X[i][j] appears with weight Qx[i][j] (+ Qx[j][i] off-diagonal)
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                objective[idx] = if i == j {
                    spec.q_x[(i, i)]
                } else {
                    spec.q_x[(i, j)] + spec.q_x[(j, i)]
                };
                idx += 1;
            }
        }
        let mut idx = nx + ny;
        for i in 0..m {
            for j in i..m {
                if i == j {
                    objective[idx] = 1.0;
                }
                idx += 1;
            }
        }
        if has_gamma {
            objective[nv - 1] = 1.0;
        }
    }

    let mut problem = SdpProblem::new(nv, objective);
    for i in 0..n {
        for j in i..n {
            problem.var_names.push(format!("X[{i}][{j}]"));
        }
    }
    for i in 0..m {
        for j in 0..n {
            problem.var_names.push(format!("Y[{i}][{j}]"));
        }
    }
    if mixed {
        for i in 0..m {
            for j in i..m {
                problem.var_names.push(format!("S[{i}][{j}]"));
            }
        }
        if has_gamma {
            problem.var_names.push("gamma".to_string());
        }
    }

    let unpack_xy = move |y: &[f64]| -> (Matrix, Matrix) {
        let x = unpack_symmetric(y, 0, n);
        let ymat = Matrix::from_fn(m, n, |i, j| y[nx + i * n + j]);
        (x, ymat)
    };

    if mixed {
        let gamma_of = move |y: &[f64]| -> f64 {
            if has_gamma {
                y[nv - 1]
            } else if let SynthesisMode::MixedFixedGamma { gamma_bar } = spec.mode {
                gamma_bar
            } else {
                unreachable!()
            }
        };
        // bounded-real block with H = A X + B2 Y
        let (a, b2) = (sys.a.clone(), sys.b2.clone());
        let (b1, c1, d11, d12) = (
            spec.b1.clone(),
            spec.c1.clone(),
            spec.d11.clone(),
            spec.d12.clone(),
        );
        let dim = n + d + p1;
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let (x, ym) = unpack_xy(y);
            let gamma = gamma_of(y);
            let h = a.matmul(&x).add(&b2.matmul(&ym));
            let top_left = h.add(&h.transpose());
            let top_right = x
                .matmul(&c1.transpose())
                .add(&ym.transpose().matmul(&d12.transpose()));
            let bottom_left = c1.matmul(&x).add(&d12.matmul(&ym));
            let row0 = Matrix::hstack(&[&top_left, &b1, &top_right]);
            let row1 = Matrix::hstack(&[
                &b1.transpose(),
                &Matrix::identity(d).scale(-gamma),
                &d11.transpose(),
            ]);
            let row2 = Matrix::hstack(&[&bottom_left, &d11, &Matrix::identity(p1).scale(-gamma)]);
            Matrix::vstack(&[&row0, &row1, &row2])
                .neg()
                .sub(&Matrix::identity(dim).scale(eps))
        }));
    }

    if spec.pole_constraint {
        let (a, b2) = (sys.a.clone(), sys.b2.clone());
        let region = spec.region.clone();
        let kdim = region.order() * n;
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let (x, ym) = unpack_xy(y);
            let h = a.matmul(&x).add(&b2.matmul(&ym));
            region_block_from_product(&region, &h, &x)
                .neg()
                .sub(&Matrix::identity(kdim).scale(eps))
        }));
    }

    if mixed {
        let r_half = r_half.clone();
        problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
            let (x, ym) = unpack_xy(y);
            let s = unpack_symmetric(y, nx + ny, m);
            let ry = r_half.matmul(&ym);
            let row0 = Matrix::hstack(&[&s, &ry]);
            let row1 = Matrix::hstack(&[&ry.transpose(), &x]);
            Matrix::vstack(&[&row0, &row1])
        }));
    }

    problem.blocks.push(LmiBlock::from_affine(nv, move |y| {
        let (x, _) = unpack_xy(y);
        x.sub(&Matrix::identity(n).scale(eps))
    }));

    Ok(AssembledProblem {
        problem,
        layout: Layout::Model {
            n,
            m,
            has_slack: mixed,
            has_gamma,
        },
    })
}

/// K = U Q (X0 Q)^(-1) with X = X0 Q symmetrized first; refuses when X0 Q
/// is numerically singular.
pub fn recover_gain_data(
    q_sol: &Matrix,
    dm: &DataMatrices,
) -> Result<(Matrix, Matrix), SynthesisError> {
    let x = dm.x0t.matmul(q_sol).symmetrize();
    let sv = singular_values(&x);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= 1e-8 * smax {
        return Err(SynthesisError::RecoveryIllConditioned {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let uq = dm.u01t.matmul(q_sol);
    // K X = U Q with X symmetric
    let k = solve_linear(&x, &uq.transpose())?.transpose();
    Ok((k, x))
}

/// What `design` operates on.
pub enum DesignSource<'a> {
    Data(&'a DataMatrices),
    Model(&'a SystemModel),
}

/// Full design pass: assemble, solve, recover the gain, verify the closed
/// loop, and return the controller only with its verification attached.
///
/// In the data-driven path the closed-loop matrix used for verification is
/// the data parameterization Xtilde Q X^(-1); nothing about A or B2 is
/// consulted. Model-based designs verify against A + B2 K directly.
pub fn design(
    spec: &SynthesisSpec,
    source: DesignSource<'_>,
) -> Result<ControllerResult, SynthesisError> {
    design_with_options(spec, source, &SdpOptions::default())
}

pub fn design_with_options(
    spec: &SynthesisSpec,
    source: DesignSource<'_>,
    opts: &SdpOptions,
) -> Result<ControllerResult, SynthesisError> {
    spec.validate()?;
    let assembled = match &source {
        DesignSource::Data(dm) => {
            if spec.mode.is_mixed() {
                assemble_mixed_data(dm, spec)?
            } else {
                assemble_dstab_data_with(dm, &spec.region, spec.epsilon, spec.literal_paper_lmis)?
            }
        }
        DesignSource::Model(sys) => assemble_mixed_model(sys, spec)?,
    };
    let solution = sdp::solve(&assembled.problem, opts);
    if solution.status != SdpStatus::Optimal {
        return Err(SynthesisError::SolverFailed {
            status: solution.status,
        });
    }
    let (gain, lyapunov, closed_loop) = match &source {
        DesignSource::Data(dm) => {
            let q = assembled
                .extract_q(&solution.y)
                .expect("data layout");
            let (k, x) = recover_gain_data(&q, dm)?;
            // closed loop from the data parameterization: Xtilde (Q X^-1)
            let g = solve_linear(&x, &q.transpose())?.transpose();
            let acl = dm.xtilde1t.matmul(&g);
            (k, x, acl)
        }
        DesignSource::Model(sys) => {
            let (x, ym) = assembled
                .extract_model_xy(&solution.y)
                .expect("model layout");
            let k = solve_linear(&x, &ym.transpose())?.transpose();
            let acl = sys.a.add(&sys.b2.matmul(&k));
            (k, x, acl)
        }
    };
    let slack = assembled.extract_slack(&solution.y);
    let gamma = match spec.mode {
        SynthesisMode::DstabOnly => None,
        SynthesisMode::MixedOptGamma => assembled.extract_gamma(&solution.y),
        SynthesisMode::MixedFixedGamma { gamma_bar } => Some(gamma_bar),
    };
    let objective_value = spec
        .mode
        .is_mixed()
        .then_some(solution.objective_value);
    let verification = analysis::verify_closed_loop(
        &closed_loop,
        spec,
        &gain,
        gamma,
        match source {
            DesignSource::Data(_) => "data_parameterization",
            DesignSource::Model(_) => "model",
        },
    );
    Ok(ControllerResult {
        gain,
        lyapunov,
        slack,
        gamma,
        objective_value,
        solver: SolverDiagnostics {
            status: solution.status,
            iterations: solution.iterations,
            block_min_eigs: solution.block_min_eigs,
            phase1_margin: solution.phase1_margin,
            duality_measure: solution.duality_measure,
        },
        provenance: Provenance {
            mode: spec.mode.name().to_string(),
            source: match source {
                DesignSource::Data(_) => "data".to_string(),
                DesignSource::Model(_) => "model".to_string(),
            },
            seed: None,
            generator: None,
            data_hash: None,
            literal_paper_lmis: spec.literal_paper_lmis,
            pole_constraint: spec.pole_constraint,
        },
        verification,
    })
}
