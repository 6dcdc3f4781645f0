//! Excitation, simulation and data-matrix assembly: persistently excited
//! rollouts of the plant under trapezoidal integration, the Hankel blocks
//! of the resulting trajectory, and the persistency-of-excitation gate.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::numerics::{
    cholesky, matrix_rank, min_eig_symmetric, solve_linear, sqrtm_psd, NumericsError,
    DEFAULT_RANK_RTOL,
};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum DataError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("system model inconsistent: {0}")]
    BadModel(String),
    #[error("(I - delta/2 A) is singular; use a smaller step than {delta}")]
    StepSingular { delta: f64 },
    #[error("hankel window [{start}, {start}+{rows}+{cols}-2] exceeds sequence length {len}")]
    HankelOutOfRange {
        start: usize,
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("trajectory file malformed: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Plant and performance matrices. Held by the simulator and the
/// model-based baseline; the data-driven design path never reads A or B2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemModel {
    pub a: Matrix,
    pub b1: Matrix,
    pub b2: Matrix,
    pub c1: Matrix,
    pub d11: Matrix,
    pub d12: Matrix,
    pub q_x: Matrix,
    pub r: Matrix,
}

impl SystemModel {
    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b2.cols()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.b1.cols()
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let n = self.a.rows();
        let m = self.b2.cols();
        let d = self.b1.cols();
        let p1 = self.c1.rows();
        if !self.a.is_square() {
            return Err(DataError::BadModel(format!(
                "A must be square, got {}x{}",
                self.a.rows(),
                self.a.cols()
            )));
        }
        let checks = [
            (self.b1.rows() == n, "B1 row count must equal n"),
            (self.b2.rows() == n, "B2 row count must equal n"),
            (self.c1.cols() == n, "C1 column count must equal n"),
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
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(DataError::BadModel(msg.to_string()));
            }
        }
        if min_eig_symmetric(&self.q_x)? < -1e-10 * (1.0 + self.q_x.frobenius_norm()) {
            return Err(DataError::BadModel(
                "Qx must be positive semidefinite".to_string(),
            ));
        }
        if !cholesky(&self.r)?.is_positive_definite() {
            return Err(DataError::BadModel(
                "R must be positive definite".to_string(),
            ));
        }
        Ok(())
    }

    /// Output map of the H2 channel: C2 = [Qx^(1/2); 0], (n+m) x n.
    pub fn c2(&self) -> Result<Matrix, DataError> {
        let top = sqrtm_psd(&self.q_x)?;
        let bottom = Matrix::zeros(self.input_dim(), self.state_dim());
        Ok(Matrix::vstack(&[&top, &bottom]))
    }

    /// Feedthrough of the H2 channel: D22 = [0; R^(1/2)], (n+m) x m.
    pub fn d22(&self) -> Result<Matrix, DataError> {
        let top = Matrix::zeros(self.state_dim(), self.input_dim());
        let bottom = sqrtm_psd(&self.r)?;
        Ok(Matrix::vstack(&[&top, &bottom]))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcitationConfig {
    /// number of samples T
    pub samples: usize,
    /// sampling interval
    pub delta: f64,
    /// per-channel input amplitude bound
    pub u_bound: f64,
    /// 2-norm bound on each disturbance sample
    pub w_ball_radius: f64,
    pub seed: u64,
}

impl ExcitationConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.samples == 0 {
            return Err(DataError::InvalidConfig {
                field: "samples",
                reason: "must be at least 1".to_string(),
            });
        }
        if !(self.delta > 0.0) {
            return Err(DataError::InvalidConfig {
                field: "delta",
                reason: format!("must be positive, got {}", self.delta),
            });
        }
        if !(self.u_bound > 0.0) {
            return Err(DataError::InvalidConfig {
                field: "u_bound",
                reason: format!("must be positive, got {}", self.u_bound),
            });
        }
        if self.w_ball_radius < 0.0 {
            return Err(DataError::InvalidConfig {
                field: "w_ball_radius",
                reason: format!("must be nonnegative, got {}", self.w_ball_radius),
            });
        }
        Ok(())
    }
}

/// Minimum sample count for the rank condition with one-step trajectories:
/// T >= (m + 1) n + m.
pub fn required_samples(n: usize, m: usize) -> usize {
    (m + 1) * n + m
}

/// A simulated rollout. Derivative samples are the exact vector field at
/// the sample instants, not finite differences.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// n x T, one column per sample
    pub states: Matrix,
    /// n x T
    pub derivatives: Matrix,
    /// m x T
    pub inputs: Matrix,
    /// d x T
    pub disturbances: Matrix,
    pub delta: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// The sampled data blocks consumed by the synthesis layer.
#[derive(Debug, Clone)]
pub struct DataMatrices {
    /// m x T input samples
    pub u01t: Matrix,
    /// n x T state samples
    pub x0t: Matrix,
    /// n x T derivative samples
    pub x1t: Matrix,
    /// d x T disturbance samples
    pub w0t: Matrix,
    /// n x T disturbance-corrected derivatives: X1T - B1 W0T
    pub xtilde1t: Matrix,
    pub b1: Matrix,
    pub delta: f64,
}

impl DataMatrices {
    pub fn samples(&self) -> usize {
        self.x0t.cols()
    }

    pub fn state_dim(&self) -> usize {
        self.x0t.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.u01t.rows()
    }
}

/// Draws the excitation input (i.i.d. uniform per channel) and the
/// disturbance sequence (uniform on the 2-norm ball), fully determined by
/// the seed.
pub fn generate_excitation(
    cfg: &ExcitationConfig,
    m: usize,
    d: usize,
) -> Result<(Matrix, Matrix), DataError> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let t = cfg.samples;
    let mut u = Matrix::zeros(m, t);
    let mut w = Matrix::zeros(d, t);
    for k in 0..t {
        for i in 0..m {
            u[(i, k)] = rng.uniform(-cfg.u_bound, cfg.u_bound);
        }
        let wk = rng.uniform_in_ball(d, cfg.w_ball_radius);
        for i in 0..d {
            w[(i, k)] = wk[i];
        }
    }
    Ok((u, w))
}

/// Draws a uniform initial condition on [-1, 1]^n from the stream that
/// continues after the excitation draws of the same seed.
pub fn default_initial_state(cfg: &ExcitationConfig, n: usize) -> Vec<f64> {
    // separate stream so x0 does not shift the excitation draws
    let mut rng = SplitMix64::new(cfg.seed ^ 0x517c_c1b7_2722_0a95);
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

/// Implicit trapezoidal rollout under zero-order-hold inputs:
/// (I - delta/2 A) x_{k+1} = (I + delta/2 A) x_k + delta (B1 w_k + B2 u_k).
pub fn simulate_rollout(
    sys: &SystemModel,
    cfg: &ExcitationConfig,
    x0: &[f64],
) -> Result<Trajectory, DataError> {
    sys.validate()?;
    cfg.validate()?;
    let n = sys.state_dim();
    let m = sys.input_dim();
    let d = sys.disturbance_dim();
    if x0.len() != n {
        return Err(DataError::Dimension(format!(
            "x0 has {} entries, expected {}",
            x0.len(),
            n
        )));
    }
    let (u, w) = generate_excitation(cfg, m, d)?;
    let t = cfg.samples;
    let delta = cfg.delta;
    let half = sys.a.scale(delta / 2.0);
    let lhs = Matrix::identity(n).sub(&half);
    let rhs_a = Matrix::identity(n).add(&half);

    let mut states = Matrix::zeros(n, t);
    let mut derivs = Matrix::zeros(n, t);
    let mut x: Vec<f64> = x0.to_vec();
    for k in 0..t {
        let uk = u.col_vec(k);
        let wk = w.col_vec(k);
        let bw = sys.b1.matvec(&wk);
        let bu = sys.b2.matvec(&uk);
        let ax = sys.a.matvec(&x);
        states.set_col(k, &x);
        // the sum order here is the contract: dx = A x + B1 w + B2 u
        let dx: Vec<f64> = (0..n).map(|i| ax[i] + bw[i] + bu[i]).collect();
        derivs.set_col(k, &dx);
        // advance
        let rhs_vec: Vec<f64> = {
            let base = rhs_a.matvec(&x);
            (0..n)
                .map(|i| base[i] + delta * bw[i] + delta * bu[i])
                .collect()
        };
        let rhs = Matrix::from_fn(n, 1, |i, _| rhs_vec[i]);
        let next = solve_linear(&lhs, &rhs).map_err(|e| match e {
            NumericsError::Singular { .. } => DataError::StepSingular { delta },
            other => DataError::Numerics(other),
        })?;
        x = next.col_vec(0);
    }
    Ok(Trajectory {
        times: (0..t).map(|k| k as f64 * delta).collect(),
        states,
        derivatives: derivs,
        inputs: u,
        disturbances: w,
        delta,
    })
}

/// Block-Hankel matrix of a p-dimensional sequence (stored one column per
/// sample): block (r, c) is sample s(start + r + c), so `block_rows = 1`
/// reduces to the plain row-of-samples form.
pub fn build_hankel(
    seq: &Matrix,
    start: usize,
    block_rows: usize,
    cols: usize,
) -> Result<Matrix, DataError> {
    let p = seq.rows();
    let len = seq.cols();
    if block_rows == 0 || cols == 0 || start + block_rows + cols - 2 > len.saturating_sub(1) {
        return Err(DataError::HankelOutOfRange {
            start,
            rows: block_rows,
            cols,
            len,
        });
    }
    let mut h = Matrix::zeros(p * block_rows, cols);
    for r in 0..block_rows {
        for c in 0..cols {
            for i in 0..p {
                h[(r * p + i, c)] = seq[(i, start + r + c)];
            }
        }
    }
    Ok(h)
}

/// Assembles the design data blocks from a trajectory. B1 is design
/// knowledge, used only to form the disturbance-corrected derivatives.
pub fn build_data_matrices(traj: &Trajectory, b1: &Matrix) -> Result<DataMatrices, DataError> {
    let t = traj.len();
    let u01t = build_hankel(&traj.inputs, 0, 1, t)?;
    let x0t = build_hankel(&traj.states, 0, 1, t)?;
    let x1t = build_hankel(&traj.derivatives, 0, 1, t)?;
    let w0t = build_hankel(&traj.disturbances, 0, 1, t)?;
    if b1.rows() != x1t.rows() || b1.cols() != w0t.rows() {
        return Err(DataError::Dimension(format!(
            "B1 is {}x{}, expected {}x{}",
            b1.rows(),
            b1.cols(),
            x1t.rows(),
            w0t.rows()
        )));
    }
    let xtilde1t = x1t.sub(&b1.matmul(&w0t));
    Ok(DataMatrices {
        u01t,
        x0t,
        x1t,
        w0t,
        xtilde1t,
        b1: b1.clone(),
        delta: traj.delta,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeReport {
    pub required_t: usize,
    pub actual_t: usize,
    pub rank: usize,
    pub required_rank: usize,
    pub pass: bool,
}

/// Rank gate on the stacked [U; X0] block. Failure is a report outcome,
/// not an error.
pub fn check_persistency(dm: &DataMatrices, n: usize, m: usize) -> PeReport {
    let stacked = Matrix::vstack(&[&dm.u01t, &dm.x0t]);
    let rank = matrix_rank(&stacked, DEFAULT_RANK_RTOL);
    let required_rank = n + m;
    let required_t = required_samples(n, m);
    let actual_t = dm.samples();
    PeReport {
        required_t,
        actual_t,
        rank,
        required_rank,
        pass: rank == required_rank && actual_t >= required_t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrator_system(n: usize) -> SystemModel {
        SystemModel {
            a: Matrix::zeros(n, n),
            b1: Matrix::identity(n),
            b2: Matrix::identity(n),
            c1: Matrix::identity(n),
            d11: Matrix::zeros(n, n),
            d12: Matrix::zeros(n, n),
            q_x: Matrix::identity(n),
            r: Matrix::identity(n),
        }
    }

    #[test]
    fn excitation_respects_bounds_and_seed() {
        let cfg = ExcitationConfig {
            samples: 15,
            delta: 0.1,
            u_bound: 0.5,
            w_ball_radius: 0.05,
            seed: 11,
        };
        let (u, w) = generate_excitation(&cfg, 2, 3).unwrap();
        assert!(u.max_abs() <= 0.5);
        for k in 0..15 {
            let norm: f64 = (0..3).map(|i| w[(i, k)] * w[(i, k)]).sum::<f64>().sqrt();
            assert!(norm <= 0.05 + 1e-12);
        }
        let (u2, w2) = generate_excitation(&cfg, 2, 3).unwrap();
        assert_eq!(u, u2);
        assert_eq!(w, w2);
    }

    #[test]
    fn zero_radius_means_zero_disturbance() {
        let cfg = ExcitationConfig {
            samples: 5,
            delta: 0.1,
            u_bound: 1.0,
            w_ball_radius: 0.0,
            seed: 3,
        };
        let (_, w) = generate_excitation(&cfg, 1, 2).unwrap();
        assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn pure_integrator_rollout_is_linear_in_time() {
        // A = 0, constant input via bound trickery is not possible with the
        // uniform draw, so drive through the disturbance channel instead:
        // here we simulate manually with the same code path by checking the
        // trapezoidal identity column by column.
        let sys = integrator_system(2);
        let cfg = ExcitationConfig {
            samples: 8,
            delta: 0.25,
            u_bound: 0.5,
            w_ball_radius: 0.0,
            seed: 9,
        };
        let traj = simulate_rollout(&sys, &cfg, &[0.0, 0.0]).unwrap();
        // x_{k+1} = x_k + delta * u_k for the integrator
        for k in 0..7 {
            for i in 0..2 {
                let expect = traj.states[(i, k)] + 0.25 * traj.inputs[(i, k)];
                assert!((traj.states[(i, k + 1)] - expect).abs() < 1e-14);
            }
        }
        // derivatives equal the applied input exactly
        for k in 0..8 {
            for i in 0..2 {
                assert_eq!(traj.derivatives[(i, k)], traj.inputs[(i, k)]);
            }
        }
    }

    #[test]
    fn scalar_decay_matches_trapezoidal_ratio() {
        let sys = SystemModel {
            a: Matrix::from_rows(&[vec![-1.0]]).unwrap(),
            b1: Matrix::from_rows(&[vec![1.0]]).unwrap(),
            b2: Matrix::from_rows(&[vec![1.0]]).unwrap(),
            c1: Matrix::identity(1),
            d11: Matrix::zeros(1, 1),
            d12: Matrix::zeros(1, 1),
            q_x: Matrix::identity(1),
            r: Matrix::identity(1),
        };
        let cfg = ExcitationConfig {
            samples: 12,
            delta: 0.1,
            u_bound: 1e-30, // effectively unforced
            w_ball_radius: 0.0,
            seed: 2,
        };
        let traj = simulate_rollout(&sys, &cfg, &[1.0]).unwrap();
        let ratio = (1.0 - 0.05) / (1.0 + 0.05);
        for k in 0..11 {
            let expect = traj.states[(0, k)] * ratio;
            assert!((traj.states[(0, k + 1)] - expect).abs() < 1e-12);
        }
        // close to the exact exponential at second order
        let exact = (-1.0f64 * 0.1 * 11.0).exp();
        assert!((traj.states[(0, 11)] - exact).abs() < 1e-3);
    }

    #[test]
    fn derivative_identity_holds_exactly() {
        let sys = SystemModel {
            a: Matrix::from_rows(&[
                vec![-0.5, 1.4, 0.4],
                vec![-0.9, 0.3, -1.5],
                vec![1.1, 1.0, -0.4],
            ])
            .unwrap(),
            b1: Matrix::identity(3),
            b2: Matrix::from_rows(&[
                vec![0.1, -0.3],
                vec![-0.1, -0.7],
                vec![0.7, -1.0],
            ])
            .unwrap(),
            c1: Matrix::identity(3),
            d11: Matrix::zeros(3, 3),
            d12: Matrix::zeros(3, 2),
            q_x: Matrix::identity(3),
            r: Matrix::identity(2),
        };
        let cfg = ExcitationConfig {
            samples: 15,
            delta: 0.1,
            u_bound: 0.5,
            w_ball_radius: 0.05,
            seed: 1,
        };
        let traj = simulate_rollout(&sys, &cfg, &[0.3, -0.2, 0.1]).unwrap();
        assert_eq!(traj.len(), 15);
        for k in 0..15 {
            let x = traj.states.col_vec(k);
            let u = traj.inputs.col_vec(k);
            let w = traj.disturbances.col_vec(k);
            let ax = sys.a.matvec(&x);
            let bu = sys.b2.matvec(&u);
            let bw = sys.b1.matvec(&w);
            for i in 0..3 {
                assert_eq!(traj.derivatives[(i, k)], ax[i] + bw[i] + bu[i]);
            }
        }
    }

    #[test]
    fn hankel_row_form() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let h = build_hankel(&s, 0, 1, 3).unwrap();
        assert_eq!(h, s);
    }

    #[test]
    fn hankel_two_block_rows() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let h = build_hankel(&s, 0, 2, 3).unwrap();
        let expect =
            Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]).unwrap();
        assert_eq!(h, expect);
    }

    #[test]
    fn hankel_range_check() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(build_hankel(&s, 0, 2, 3).is_err());
        assert!(build_hankel(&s, 1, 1, 3).is_err());
    }

    #[test]
    fn zero_disturbance_means_xtilde_equals_x1() {
        let sys = integrator_system(2);
        let cfg = ExcitationConfig {
            samples: 8,
            delta: 0.1,
            u_bound: 0.5,
            w_ball_radius: 0.0,
            seed: 5,
        };
        let traj = simulate_rollout(&sys, &cfg, &[0.1, 0.2]).unwrap();
        let dm = build_data_matrices(&traj, &sys.b1).unwrap();
        assert_eq!(dm.x1t, dm.xtilde1t);
    }

    #[test]
    fn pe_gate_on_zero_excitation() {
        let dm = DataMatrices {
            u01t: Matrix::zeros(2, 15),
            x0t: Matrix::zeros(3, 15),
            x1t: Matrix::zeros(3, 15),
            w0t: Matrix::zeros(3, 15),
            xtilde1t: Matrix::zeros(3, 15),
            b1: Matrix::identity(3),
            delta: 0.1,
        };
        let report = check_persistency(&dm, 3, 2);
        assert_eq!(report.rank, 0);
        assert!(!report.pass);
    }

    #[test]
    fn required_samples_formula() {
        assert_eq!(required_samples(3, 2), 11);
    }
}
