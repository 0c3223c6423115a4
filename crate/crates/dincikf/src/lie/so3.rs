//! SO(3): rotation matrices, Rodrigues exponential, logarithm, left Jacobian.

use nalgebra::{Matrix3, Vector3};

use super::{Tangent3, LOG_ANGLE_MARGIN};
use crate::error::{Error, Result};

/// Frobenius drift in `R^T R - I` beyond which rotations are re-projected.
const ORTHONORMALITY_DRIFT: f64 = 1e-9;

/// Skew-symmetric matrix of a 3-vector: `hat(w) v = w x v`.
pub fn hat(w: &Tangent3) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -w[2], w[1], //
        w[2], 0.0, -w[0], //
        -w[1], w[0], 0.0,
    )
}

/// Inverse of [`hat`]; reads the off-diagonal entries of a skew matrix.
pub fn vee(m: &Matrix3<f64>) -> Tangent3 {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// `sin(t)/t` with series fallback near zero.
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// `(1 - cos(t)) / t^2` with series fallback near zero.
fn cosc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        0.5 - t2 / 24.0 + t2 * t2 / 720.0
    } else {
        (1.0 - t.cos()) / (t * t)
    }
}

/// `(t - sin(t)) / t^3` with series fallback near zero.
fn sin_residual(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    } else {
        (t - t.sin()) / (t * t * t)
    }
}

/// Rodrigues formula as a raw matrix.
fn exp_matrix(w: &Tangent3) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat(w);
    Matrix3::identity() + sinc(theta) * k + cosc(theta) * (k * k)
}

/// A 3D rotation stored as an orthonormal matrix with determinant +1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    m: Matrix3<f64>,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation {
            m: Matrix3::identity(),
        }
    }

    /// Wraps a matrix assumed to already be a rotation. Drift is corrected
    /// lazily by [`Rotation::compose`].
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation { m }
    }

    /// Exponential map of an axis-angle vector.
    pub fn exp(w: &Tangent3) -> Self {
        Rotation { m: exp_matrix(w) }
    }

    /// Rotation logarithm.
    ///
    /// Fails with [`Error::NearSingularLog`] when the angle is within
    /// `1e-6` of pi, where the axis extraction is unstable.
    pub fn log(&self) -> Result<Tangent3> {
        let cos_theta = ((self.m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        let theta = cos_theta.acos();
        if theta >= std::f64::consts::PI - LOG_ANGLE_MARGIN {
            return Err(Error::NearSingularLog {
                angle: theta,
                margin: LOG_ANGLE_MARGIN,
            });
        }
        // theta/(2 sin theta) * vee(R - R^T); the prefactor tends to 1/2.
        let half_skew = vee(&(self.m - self.m.transpose())) / 2.0;
        let scale = if theta < 1e-4 {
            let t2 = theta * theta;
            1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
        } else {
            theta / theta.sin()
        };
        Ok(scale * half_skew)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.m * v
    }

    pub fn inverse(&self) -> Self {
        Rotation {
            m: self.m.transpose(),
        }
    }

    /// Group composition `self * other`, re-projecting onto SO(3) whenever
    /// accumulated round-off exceeds the drift tolerance.
    pub fn compose(&self, other: &Rotation) -> Self {
        let mut r = Rotation { m: self.m * other.m };
        if r.orthonormality_error() > ORTHONORMALITY_DRIFT {
            r = r.reorthonormalized();
        }
        r
    }

    /// Frobenius norm of `R^T R - I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.m.transpose() * self.m - Matrix3::identity()).norm()
    }

    /// Polar projection onto SO(3) via SVD: the nearest rotation in
    /// Frobenius norm.
    pub fn reorthonormalized(&self) -> Self {
        let svd = self.m.svd(true, true);
        let u = svd.u.expect("svd of 3x3 always yields u");
        let v_t = svd.v_t.expect("svd of 3x3 always yields v_t");
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            // Flip the weakest direction to land on the proper rotations.
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * v_t;
        }
        Rotation { m: r }
    }
}

/// Left Jacobian of SO(3): `J_l(w) = I + cosc(t) w^ + sin_residual(t) w^ w^`.
pub fn left_jacobian(w: &Tangent3) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat(w);
    Matrix3::identity() + cosc(theta) * k + sin_residual(theta) * (k * k)
}

/// Inverse left Jacobian in closed form; rejected for `|w| >= 2 pi` where it
/// is singular.
pub fn left_jacobian_inv(w: &Tangent3) -> Result<Matrix3<f64>> {
    let theta = w.norm();
    if theta >= 2.0 * std::f64::consts::PI - LOG_ANGLE_MARGIN {
        return Err(Error::InvalidArgument(format!(
            "inverse left Jacobian is singular at |w| = 2 pi (got {theta})"
        )));
    }
    let k = hat(w);
    let coeff = if theta < 1e-4 {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    Ok(Matrix3::identity() - 0.5 * k + coeff * (k * k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tangent(rng: &mut impl Rng, max_norm: f64) -> Tangent3 {
        let v: Tangent3 = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let scale: f64 = max_norm * rng.gen_range(0.0..1.0);
        v * (scale / v.norm().max(1e-12))
    }

    #[test]
    fn hat_zero_is_zero_matrix() {
        assert_eq!(hat(&Vector3::zeros()), Matrix3::zeros());
    }

    #[test]
    fn hat_vee_round_trip_is_exact() {
        let w = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(vee(&hat(&w)), w);
    }

    #[test]
    fn hat_unit_z_matches_hand_expansion() {
        let m = hat(&Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(m[(0, 1)], -1.0);
        assert_eq!(m[(1, 0)], 1.0);
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(1, 2)], 0.0);
        assert_eq!(m[(2, 0)], 0.0);
        assert_eq!(m[(2, 1)], 0.0);
        assert_eq!(m[(2, 2)], 0.0);
    }

    #[test]
    fn exp_zero_is_identity() {
        assert_eq!(Rotation::exp(&Vector3::zeros()).matrix(), Rotation::identity().matrix());
    }

    #[test]
    fn exp_quarter_turn_about_z() {
        // Rodrigues by hand: columns (0,1,0), (-1,0,0), (0,0,1).
        let r = Rotation::exp(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(*r.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn log_identity_is_zero() {
        assert_eq!(Rotation::identity().log().unwrap(), Vector3::zeros());
    }

    #[test]
    fn log_quarter_turn_about_z() {
        let r = Rotation::exp(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let w = r.log().unwrap();
        assert_abs_diff_eq!(w, Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2), epsilon = 1e-12);
    }

    #[test]
    fn log_rejects_angle_at_pi() {
        let r = Rotation::exp(&Vector3::new(std::f64::consts::PI, 0.0, 0.0));
        assert!(matches!(r.log(), Err(Error::NearSingularLog { .. })));
    }

    #[test]
    fn log_exp_round_trip_e9() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let w = random_tangent(&mut rng, 2.0);
            let back = Rotation::exp(&w).log().unwrap();
            for i in 0..3 {
                assert!((back[i] - w[i]).abs() < 1e-9, "component {i}: {} vs {}", back[i], w[i]);
            }
        }
    }

    #[test]
    fn compose_quarters_gives_half_turn() {
        let q = Rotation::exp(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_4));
        let half = q.compose(&q).log().unwrap();
        assert_abs_diff_eq!(half, Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2), epsilon = 1e-12);
    }

    #[test]
    fn left_jacobian_zero_is_identity() {
        assert_eq!(left_jacobian(&Vector3::zeros()), Matrix3::identity());
        assert_eq!(left_jacobian_inv(&Vector3::zeros()).unwrap(), Matrix3::identity());
    }

    #[test]
    fn left_jacobian_product_with_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let w = random_tangent(&mut rng, 1.0);
            let prod = left_jacobian(&w) * left_jacobian_inv(&w).unwrap();
            assert_abs_diff_eq!(prod, Matrix3::identity(), epsilon = 1e-12);
        }
    }

    #[test]
    fn left_jacobian_inv_rejects_two_pi() {
        let w = Vector3::new(2.0 * std::f64::consts::PI, 0.0, 0.0);
        assert!(left_jacobian_inv(&w).is_err());
    }

    #[test]
    fn chained_compositions_stay_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut r = Rotation::identity();
        for _ in 0..100_000 {
            r = r.compose(&Rotation::exp(&random_tangent(&mut rng, 0.5)));
        }
        assert!(r.orthonormality_error() < 1e-9);
        assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
    }
}
