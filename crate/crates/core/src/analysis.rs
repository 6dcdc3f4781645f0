//! Ground-truth verification of designed controllers: closed-loop
//! eigenvalues, region membership per pole, and independently computed
//! H2/H-infinity norms. Nothing here trusts the solver; the norms come
//! from Gramians and Hamiltonian eigenvalue tests.

use serde::{Deserialize, Serialize};

use crate::data::SystemModel;
use crate::matrix::{Complex, Matrix};
use crate::numerics::{
    eig_general, lyapunov_solve, singular_values, solve_linear, sqrtm_psd, NumericsError,
};
use crate::region::{LmiRegion, Membership};
use crate::synthesis::{ControllerResult, SynthesisSpec};

#[derive(Debug, Clone, thiserror::Error)]
pub enum AnalysisError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("the closed loop must be Hurwitz for norm computation")]
    NotStable,
    #[error("H-infinity upper bound search did not terminate")]
    NoUpperBound,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub const DEFAULT_HINF_TOL: f64 = 1e-4;
const HAMILTONIAN_AXIS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleEntry {
    pub re: f64,
    pub im: f64,
    pub membership: Membership,
    /// max eigenvalue of the region characteristic at the pole
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationTolerances {
    pub hinf_rel_tol: f64,
    /// absolute slack allowed in the hinf <= gamma consistency check
    pub gamma_slack: f64,
    pub boundary_band: f64,
}

impl Default for VerificationTolerances {
    fn default() -> Self {
        Self {
            hinf_rel_tol: DEFAULT_HINF_TOL,
            gamma_slack: (1e-3f64).max(10.0 * DEFAULT_HINF_TOL),
            boundary_band: crate::region::BOUNDARY_BAND,
        }
    }
}

/// Self-contained verification evidence for one controller.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// which closed-loop matrix was examined: "model" when built from
    /// A + B2 K, "data_parameterization" when built from trajectory data
    pub closed_loop_source: String,
    pub stable: bool,
    pub poles: Vec<PoleEntry>,
    pub all_poles_in_region: bool,
    /// H2 norm of the w -> z2 channel; absent when unstable
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2_norm: Option<f64>,
    /// H-infinity norm of the w -> z1 channel; absent when unstable
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hinf_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_claimed: Option<f64>,
    /// hinf_norm <= gamma_claimed + slack; absent without a gamma claim
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hinf_within_gamma: Option<bool>,
    pub region: LmiRegion,
    pub tolerances: VerificationTolerances,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.stable
            && self.all_poles_in_region
            && self.hinf_within_gamma.unwrap_or(true)
    }
}

/// Eigenvalues of A + B2 K.
pub fn closed_loop_eigs(sys: &SystemModel, k: &Matrix) -> Result<Vec<Complex>, AnalysisError> {
    if k.rows() != sys.input_dim() || k.cols() != sys.state_dim() {
        return Err(AnalysisError::Dimension(format!(
            "K is {}x{}, expected {}x{}",
            k.rows(),
            k.cols(),
            sys.input_dim(),
            sys.state_dim()
        )));
    }
    let acl = sys.a.add(&sys.b2.matmul(k));
    Ok(eig_general(&acl)?)
}

/// Membership flag and margin for one pole; the boundary band counts as
/// not a member.
pub fn region_membership(z: Complex, region: &LmiRegion) -> Result<(bool, f64), AnalysisError> {
    let (status, margin) = region
        .membership(z)
        .map_err(|e| AnalysisError::Dimension(e.to_string()))?;
    Ok((status == Membership::Inside, margin))
}

/// sqrt(trace(C Wc C^T)) with Wc the controllability Gramian of (A, B).
pub fn h2_norm(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<f64, AnalysisError> {
    let wc = lyapunov_solve(a, &b.matmul(&b.transpose())).map_err(|e| match e {
        NumericsError::NotHurwitz { .. } => AnalysisError::NotStable,
        other => AnalysisError::Numerics(other),
    })?;
    let val = c.matmul(&wc).matmul(&c.transpose()).trace();
    Ok(val.max(0.0).sqrt())
}

fn hamiltonian_has_axis_eig(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    gamma: f64,
) -> Result<bool, AnalysisError> {
    let nw = b.cols();
    let r = Matrix::identity(nw)
        .scale(gamma * gamma)
        .sub(&d.transpose().matmul(d));
    let rinv_bt = solve_linear(&r, &b.transpose())?;
    let rinv_dt_c = solve_linear(&r, &d.transpose().matmul(c))?;
    let abar = a.add(&b.matmul(&rinv_dt_c));
    let top_right = b.matmul(&rinv_bt);
    let inner = Matrix::identity(d.rows()).add(&d.matmul(&solve_linear(
        &r,
        &d.transpose(),
    )?));
    let bottom_left = c.transpose().matmul(&inner).matmul(c).neg();
    let n = a.rows();
    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.insert_block(0, 0, &abar);
    h.insert_block(0, n, &top_right);
    h.insert_block(n, 0, &bottom_left);
    h.insert_block(n, n, &abar.transpose().neg());
    let eigs = eig_general(&h)?;
    Ok(eigs.iter().any(|e| e.re.abs() <= HAMILTONIAN_AXIS_TOL))
}

/// H-infinity norm of C (sI - A)^(-1) B + D for Hurwitz A, by bisection on
/// the Hamiltonian imaginary-axis test. `tol` is the relative bisection
/// width (default 1e-4).
pub fn hinf_norm(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    tol: f64,
) -> Result<f64, AnalysisError> {
    let eigs = eig_general(a)?;
    if eigs.iter().any(|e| e.re >= 0.0) {
        return Err(AnalysisError::NotStable);
    }
    if c.max_abs() == 0.0 && d.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let smax_d = singular_values(d).first().copied().unwrap_or(0.0);
    let lo0 = smax_d * (1.0 + 1e-9) + 1e-12;
    let mut hi = (2.0 * lo0).max(1.0);
    let mut doublings = 0;
    while hamiltonian_has_axis_eig(a, b, c, d, hi)? {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(AnalysisError::NoUpperBound);
        }
    }
    let mut lo = lo0;
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if hamiltonian_has_axis_eig(a, b, c, d, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).max(smax_d))
}

/// Frobenius-norm distance between two gains of equal shape.
pub fn compare_gains(k1: &Matrix, k2: &Matrix) -> Result<f64, AnalysisError> {
    if k1.rows() != k2.rows() || k1.cols() != k2.cols() {
        return Err(AnalysisError::Dimension(format!(
            "gains are {}x{} and {}x{}",
            k1.rows(),
            k1.cols(),
            k2.rows(),
            k2.cols()
        )));
    }
    Ok(k1.sub(k2).frobenius_norm())
}

/// Shared verification core: takes the closed-loop matrix however it was
/// obtained, the design spec (for the region and performance channel) and
/// the gain, and computes the full report.
pub fn verify_closed_loop(
    acl: &Matrix,
    spec: &SynthesisSpec,
    k: &Matrix,
    gamma_claimed: Option<f64>,
    closed_loop_source: &str,
) -> VerificationReport {
    let tolerances = VerificationTolerances::default();
    let poles_raw = eig_general(acl).unwrap_or_default();
    let mut poles = Vec::with_capacity(poles_raw.len());
    let mut all_in = !poles_raw.is_empty();
    for z in &poles_raw {
        let (status, margin) = spec
            .region
            .membership(*z)
            .unwrap_or((Membership::Outside, f64::NAN));
        if status != Membership::Inside {
            all_in = false;
        }
        poles.push(PoleEntry {
            re: z.re,
            im: z.im,
            membership: status,
            margin,
        });
    }
    let stable = !poles_raw.is_empty() && poles_raw.iter().all(|e| e.re < 0.0);
    let (h2, hinf) = if stable {
        let h2 = (|| {
            let c2 = Matrix::vstack(&[
                &sqrtm_psd(&spec.q_x).ok()?,
                &Matrix::zeros(spec.input_dim(), spec.state_dim()),
            ]);
            let d22 = Matrix::vstack(&[
                &Matrix::zeros(spec.state_dim(), spec.input_dim()),
                &sqrtm_psd(&spec.r).ok()?,
            ]);
            let c_cl = c2.add(&d22.matmul(k));
            h2_norm(acl, &spec.b1, &c_cl).ok()
        })();
        let hinf = {
            let c_cl = spec.c1.add(&spec.d12.matmul(k));
            hinf_norm(acl, &spec.b1, &c_cl, &spec.d11, tolerances.hinf_rel_tol).ok()
        };
        (h2, hinf)
    } else {
        (None, None)
    };
    let hinf_within_gamma = match (hinf, gamma_claimed) {
        (Some(h), Some(g)) => Some(h <= g + tolerances.gamma_slack),
        _ => None,
    };
    VerificationReport {
        closed_loop_source: closed_loop_source.to_string(),
        stable,
        poles,
        all_poles_in_region: all_in,
        h2_norm: h2,
        hinf_norm: hinf,
        gamma_claimed,
        hinf_within_gamma,
        region: spec.region.clone(),
        tolerances,
    }
}

/// Verification against the true plant: the closed loop is A + B2 K. Never
/// mutates the result; returns a fresh report.
pub fn verify_design(
    sys: &SystemModel,
    result: &ControllerResult,
    spec: &SynthesisSpec,
) -> Result<VerificationReport, AnalysisError> {
    if result.gain.rows() != sys.input_dim() || result.gain.cols() != sys.state_dim() {
        return Err(AnalysisError::Dimension(format!(
            "gain is {}x{}, system expects {}x{}",
            result.gain.rows(),
            result.gain.cols(),
            sys.input_dim(),
            sys.state_dim()
        )));
    }
    let acl = sys.a.add(&sys.b2.matmul(&result.gain));
    Ok(verify_closed_loop(
        &acl,
        spec,
        &result.gain,
        result.gamma,
        "model",
    ))
}

/// Pole/boundary CSV for plotting: pole rows carry the membership verdict,
/// boundary rows sample the two sector rays of a conic region.
pub fn plot_data_csv(report: &VerificationReport) -> String {
    let mut out = String::from("kind,re,im,member\n");
    for p in &report.poles {
        out.push_str(&format!(
            "pole,{:.16e},{:.16e},{}\n",
            p.re,
            p.im,
            p.membership == Membership::Inside
        ));
    }
    let alpha = match &report.region {
        LmiRegion::ConicAlpha { alpha } => Some(*alpha),
        LmiRegion::ConicTheta { theta } => Some(1.0 / theta.tan()),
        LmiRegion::General { .. } => None,
    };
    if let Some(alpha) = alpha {
        let reach = report
            .poles
            .iter()
            .map(|p| p.re.abs().max(p.im.abs()))
            .fold(1.0f64, f64::max)
            * 1.25;
        let steps = 50;
        for sign in [1.0, -1.0] {
            for i in 0..=steps {
                let re = -reach * i as f64 / steps as f64;
                let im = sign * re.abs() / alpha;
                out.push_str(&format!("boundary,{re:.16e},{im:.16e},\n"));
            }
        }
    }
    out
}

/// Closed-loop response to a unit step on the first disturbance channel,
/// integrated with RK4. Plot aid only; nothing downstream certifies it.
pub fn step_response_csv(
    acl: &Matrix,
    b1: &Matrix,
    horizon: f64,
    dt: f64,
) -> String {
    let n = acl.rows();
    let w = {
        let mut w = vec![0.0; b1.cols()];
        if !w.is_empty() {
            w[0] = 1.0;
        }
        w
    };
    let forcing = b1.matvec(&w);
    let mut out = String::from("t");
    for i in 0..n {
        out.push_str(&format!(",x{}", i + 1));
    }
    out.push('\n');
    let mut x = vec![0.0; n];
    let steps = (horizon / dt).ceil() as usize;
    let deriv = |x: &[f64]| -> Vec<f64> {
        let ax = acl.matvec(x);
        (0..n).map(|i| ax[i] + forcing[i]).collect()
    };
    for k in 0..=steps {
        out.push_str(&format!("{:.16e}", k as f64 * dt));
        for v in &x {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
        let k1 = deriv(&x);
        let x2: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * dt * k1[i]).collect();
        let k2 = deriv(&x2);
        let x3: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * dt * k2[i]).collect();
        let k3 = deriv(&x3);
        let x4: Vec<f64> = (0..n).map(|i| x[i] + dt * k3[i]).collect();
        let k4 = deriv(&x4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_h2_is_inverse_sqrt_two() {
        let a = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let b = Matrix::identity(1);
        let c = Matrix::identity(1);
        let v = h2_norm(&a, &b, &c).unwrap();
        assert!((v - 1.0 / 2.0f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn zero_output_h2_is_zero() {
        let a = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let v = h2_norm(&a, &Matrix::identity(1), &Matrix::zeros(1, 1)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn scalar_hinf_is_one() {
        let a = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let one = Matrix::identity(1);
        let zero = Matrix::zeros(1, 1);
        let v = hinf_norm(&a, &one, &one, &zero, DEFAULT_HINF_TOL).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn zero_channel_hinf_is_zero() {
        let a = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let v = hinf_norm(
            &a,
            &Matrix::identity(1),
            &Matrix::zeros(1, 1),
            &Matrix::zeros(1, 1),
            DEFAULT_HINF_TOL,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn hinf_rejects_unstable() {
        let a = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let one = Matrix::identity(1);
        assert!(matches!(
            hinf_norm(&a, &one, &one, &Matrix::zeros(1, 1), 1e-4),
            Err(AnalysisError::NotStable)
        ));
    }

    #[test]
    fn hinf_scaling_in_output() {
        // scaling C and D by s scales the norm by s
        let a = Matrix::from_rows(&[vec![-0.7, 0.3], vec![-0.2, -1.1]]).unwrap();
        let b = Matrix::identity(2);
        let c = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        let d = Matrix::from_rows(&[vec![0.1, 0.0], vec![0.2, 0.1]]).unwrap();
        let base = hinf_norm(&a, &b, &c, &d, 1e-6).unwrap();
        for s in [0.5, 2.0] {
            let v = hinf_norm(&a, &b, &c.scale(s), &d.scale(s), 1e-6).unwrap();
            assert!((v - s * base).abs() < 1e-3 * s * base, "s={s}: {v} vs {}", s * base);
        }
    }

    #[test]
    fn h2_additivity_over_output_blocks() {
        let a = Matrix::from_rows(&[vec![-1.0, 0.2], vec![0.0, -2.0]]).unwrap();
        let b = Matrix::identity(2);
        let ca = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let cb = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.3, 1.0]]).unwrap();
        let va = h2_norm(&a, &b, &ca).unwrap();
        let vb = h2_norm(&a, &b, &cb).unwrap();
        let vall = h2_norm(&a, &b, &ca.add(&cb)).unwrap();
        assert!((vall * vall - (va * va + vb * vb)).abs() < 1e-10);
    }

    #[test]
    fn compare_gains_basics() {
        let k = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(compare_gains(&k, &k).unwrap(), 0.0);
        let e = Matrix::from_rows(&[vec![0.0, 3.0]]).unwrap();
        assert!((compare_gains(&k, &k.add(&e)).unwrap() - 3.0).abs() < 1e-15);
        assert!(compare_gains(&k, &Matrix::zeros(2, 2)).is_err());
    }
}
