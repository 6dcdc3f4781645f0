//! Convex pole-placement regions of the complex plane, given by a pair
//! (alpha, beta) of k x k matrices: the region is the set of z with
//! `alpha + z beta + conj(z) beta^T` negative definite. Conic sectors about
//! the negative real axis come in two convenience forms.

use serde::{Deserialize, Serialize};

use crate::matrix::{Complex, Matrix};
use crate::numerics::{eig_hermitian_complex, NumericsError};

#[derive(Debug, Clone, thiserror::Error)]
pub enum RegionError {
    #[error("conic slope parameter must be positive, got {0}")]
    BadAlpha(f64),
    #[error("sector inner angle must lie in (0, pi/2), got {0}")]
    BadTheta(f64),
    #[error("general region matrices must be square and of equal size")]
    BadShape,
    #[error("alpha matrix must be symmetric")]
    AlphaNotSymmetric,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Pole-membership verdict with a small band around the boundary treated
/// as neither inside nor outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LmiRegion {
    /// Left-half-plane sector between the lines of slope +-1/alpha.
    ConicAlpha { alpha: f64 },
    /// The same sector described by its inner angle; tan(theta) = 1/alpha.
    ConicTheta { theta: f64 },
    General { alpha_mat: Matrix, beta_mat: Matrix },
}

impl LmiRegion {
    pub fn conic_alpha(alpha: f64) -> Result<Self, RegionError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(RegionError::BadAlpha(alpha));
        }
        Ok(LmiRegion::ConicAlpha { alpha })
    }

    pub fn conic_theta(theta: f64) -> Result<Self, RegionError> {
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(RegionError::BadTheta(theta));
        }
        Ok(LmiRegion::ConicTheta { theta })
    }

    pub fn general(alpha_mat: Matrix, beta_mat: Matrix) -> Result<Self, RegionError> {
        if !alpha_mat.is_square()
            || !beta_mat.is_square()
            || alpha_mat.rows() != beta_mat.rows()
        {
            return Err(RegionError::BadShape);
        }
        if alpha_mat.symmetry_defect() > 1e-12 * (1.0 + alpha_mat.max_abs()) {
            return Err(RegionError::AlphaNotSymmetric);
        }
        Ok(LmiRegion::General {
            alpha_mat,
            beta_mat,
        })
    }

    /// Block order k of the characteristic matrix.
    pub fn order(&self) -> usize {
        match self {
            LmiRegion::ConicAlpha { .. } | LmiRegion::ConicTheta { .. } => 2,
            LmiRegion::General { alpha_mat, .. } => alpha_mat.rows(),
        }
    }

    /// The (alpha, beta) pair of the general form. The conic variants
    /// expand to alpha = 0 and beta = [[1, -a], [a, 1]] (scaled by cos for
    /// the angle form), matching the sector block layout used in the
    /// substitution below.
    pub fn general_form(&self) -> (Matrix, Matrix) {
        match self {
            LmiRegion::ConicAlpha { alpha } => {
                let beta = Matrix::from_rows(&[vec![1.0, -alpha], vec![*alpha, 1.0]])
                    .expect("static shape");
                (Matrix::zeros(2, 2), beta)
            }
            LmiRegion::ConicTheta { theta } => {
                let (s, c) = theta.sin_cos();
                let beta =
                    Matrix::from_rows(&[vec![s, -c], vec![c, s]]).expect("static shape");
                (Matrix::zeros(2, 2), beta)
            }
            LmiRegion::General {
                alpha_mat,
                beta_mat,
            } => (alpha_mat.clone(), beta_mat.clone()),
        }
    }

    /// Eigenvalues of the Hermitian characteristic matrix at z.
    pub fn psi_eigenvalues(&self, z: Complex) -> Result<Vec<f64>, RegionError> {
        let (alpha, beta) = self.general_form();
        // alpha + z beta + conj(z) beta^T splits into
        //   Re: alpha + re(z) (beta + beta^T),  Im: im(z) (beta - beta^T)
        let bt = beta.transpose();
        let re = alpha.add(&beta.add(&bt).scale(z.re));
        let im = beta.sub(&bt).scale(z.im);
        Ok(eig_hermitian_complex(&re, &im)?)
    }

    /// Membership margin: the largest eigenvalue of the characteristic
    /// matrix at z. Negative margin means z is in the region.
    pub fn margin(&self, z: Complex) -> Result<f64, RegionError> {
        let eigs = self.psi_eigenvalues(z)?;
        Ok(eigs.last().copied().unwrap_or(0.0))
    }

    pub fn membership(&self, z: Complex) -> Result<(Membership, f64), RegionError> {
        let margin = self.margin(z)?;
        let status = if margin < -BOUNDARY_BAND {
            Membership::Inside
        } else if margin > BOUNDARY_BAND {
            Membership::Outside
        } else {
            Membership::Boundary
        };
        if let Some(fast) = self.conic_fast_membership(z) {
            debug_assert!(
                margin.abs() <= BOUNDARY_BAND || fast == (margin < 0.0),
                "conic fast path disagrees with general form at {z:?}"
            );
        }
        Ok((status, margin))
    }

    /// Closed-form sector test: Re z < 0 and a |Im z| < |Re z|. Returns
    /// None for general regions.
    pub fn conic_fast_membership(&self, z: Complex) -> Option<bool> {
        let a = match self {
            LmiRegion::ConicAlpha { alpha } => *alpha,
            LmiRegion::ConicTheta { theta } => 1.0 / theta.tan(),
            LmiRegion::General { .. } => return None,
        };
        Some(z.re < 0.0 && a * z.im.abs() < z.re.abs())
    }

    /// A region is usable only if some test point satisfies psi < 0; probes
    /// a fixed fan of points in the open left half plane and a few others.
    pub fn has_interior_point(&self) -> Result<bool, RegionError> {
        let probes = [
            (-1.0, 0.0),
            (-10.0, 0.0),
            (-0.1, 0.0),
            (-1.0, 0.5),
            (-1.0, -0.5),
            (-100.0, 10.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (-1e4, 0.0),
        ];
        for (re, im) in probes {
            if self.margin(Complex::new(re, im))? < 0.0 {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Substitutes a matrix pencil into the region characteristic: with
/// H = M X the result has block (i, j) = a_ij X + b_ij H + b_ji H^T. A
/// pole-placement certificate asks this to be negative definite for
/// H = (A + B2 K) X.
pub fn region_substitute(region: &LmiRegion, m: &Matrix, x: &Matrix) -> Matrix {
    region_block_from_product(region, &m.matmul(x), x)
}

/// Same as `region_substitute`, but takes the product H = M X directly;
/// the data-driven path builds H from trajectory blocks without ever
/// forming M.
pub fn region_block_from_product(region: &LmiRegion, h: &Matrix, x: &Matrix) -> Matrix {
    let (alpha, beta) = region.general_form();
    let k = alpha.rows();
    let n = h.rows();
    let ht = h.transpose();
    let mut out = Matrix::zeros(k * n, k * n);
    for i in 0..k {
        for j in 0..k {
            let mut block = x.scale(alpha[(i, j)]);
            block = block.add(&h.scale(beta[(i, j)]));
            block = block.add(&ht.scale(beta[(j, i)]));
            out.insert_block(i * n, j * n, &block);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_real_axis_is_inside() {
        let r = LmiRegion::conic_alpha(2.0).unwrap();
        let (status, margin) = r.membership(Complex::new(-1.0, 0.0)).unwrap();
        assert_eq!(status, Membership::Inside);
        assert!(margin < 0.0);
    }

    #[test]
    fn right_half_plane_is_outside() {
        let r = LmiRegion::conic_alpha(2.0).unwrap();
        let (status, _) = r.membership(Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(status, Membership::Outside);
    }

    #[test]
    fn ablation_pole_is_outside_alpha_two() {
        let r = LmiRegion::conic_alpha(2.0).unwrap();
        let (status, _) = r.membership(Complex::new(-0.9062, 1.533)).unwrap();
        assert_eq!(status, Membership::Outside);
    }

    #[test]
    fn theta_and_alpha_forms_agree() {
        let alpha = 2.0f64;
        let theta = (1.0 / alpha).atan();
        let ra = LmiRegion::conic_alpha(alpha).unwrap();
        let rt = LmiRegion::conic_theta(theta).unwrap();
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let z = Complex::new(6.0 * next() - 3.0, 6.0 * next() - 3.0);
            let (ma, _) = ra.membership(z).unwrap();
            let (mt, _) = rt.membership(z).unwrap();
            assert_eq!(ma, mt, "disagreement at {z:?}");
        }
    }

    #[test]
    fn substitute_zero_product_is_zero_for_conic() {
        let r = LmiRegion::conic_alpha(2.0).unwrap();
        let h = Matrix::zeros(3, 3);
        let x = Matrix::identity(3);
        let block = region_block_from_product(&r, &h, &x);
        assert_eq!(block.max_abs(), 0.0);
    }

    #[test]
    fn substitute_scalar_pole_inside() {
        // n = 1, M = -1, X = 1, alpha = 2: block diag(-2, -2), negative definite
        let r = LmiRegion::conic_alpha(2.0).unwrap();
        let m = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let x = Matrix::identity(1);
        let block = region_substitute(&r, &m, &x);
        assert!((block[(0, 0)] + 2.0).abs() < 1e-15);
        assert!((block[(1, 1)] + 2.0).abs() < 1e-15);
        assert_eq!(block[(0, 1)], 0.0);
        assert_eq!(block[(1, 0)], 0.0);
    }

    #[test]
    fn empty_region_detected() {
        let r = LmiRegion::general(Matrix::identity(1), Matrix::zeros(1, 1)).unwrap();
        assert!(!r.has_interior_point().unwrap());
        let half_plane = LmiRegion::general(
            Matrix::zeros(1, 1),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
        )
        .unwrap();
        assert!(half_plane.has_interior_point().unwrap());
    }

    #[test]
    fn json_region_round_trip() {
        let r = LmiRegion::conic_alpha(2.0).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"type":"conic_alpha","alpha":2.0}"#);
        let back: LmiRegion = serde_json::from_str(&s).unwrap();
        assert_eq!(back.order(), 2);
    }
}
