//! SE_2(3): extended poses (rotation, position, velocity) for IMU navigation.

use nalgebra::{Matrix3, SMatrix, Vector3};

use super::se3::Pose;
use super::so3::{self, Rotation};
use super::{Adjoint9, Tangent9};
use crate::error::{Error, Result};

/// 5x5 matrix embedding of SE_2(3) elements and its algebra.
pub type Matrix5 = SMatrix<f64, 5, 5>;

/// State of one agent: orientation, position, and velocity in the global
/// frame, embedded as `[[R, p, v], [0, I_2]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedPose {
    pub rotation: Rotation,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

/// se_2(3) element as a 5x5 matrix, tangent ordered `(omega, t1, t2)`.
pub fn hat(x: &Tangent9) -> Matrix5 {
    let mut m = Matrix5::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&so3::hat(&x.fixed_rows::<3>(0).into_owned()));
    m.fixed_view_mut::<3, 1>(0, 3)
        .copy_from(&x.fixed_rows::<3>(3).into_owned());
    m.fixed_view_mut::<3, 1>(0, 4)
        .copy_from(&x.fixed_rows::<3>(6).into_owned());
    m
}

/// Inverse of [`hat`].
pub fn vee(m: &Matrix5) -> Tangent9 {
    let w = so3::vee(&m.fixed_view::<3, 3>(0, 0).into_owned());
    let mut x = Tangent9::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&w);
    x.fixed_rows_mut::<3>(3)
        .copy_from(&m.fixed_view::<3, 1>(0, 3).into_owned());
    x.fixed_rows_mut::<3>(6)
        .copy_from(&m.fixed_view::<3, 1>(0, 4).into_owned());
    x
}

impl ExtendedPose {
    pub fn identity() -> Self {
        ExtendedPose {
            rotation: Rotation::identity(),
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        ExtendedPose {
            rotation,
            position,
            velocity,
        }
    }

    /// Exponential map: both translational columns share the SO(3) left
    /// Jacobian, `p = J_l(w) t1`, `v = J_l(w) t2`.
    pub fn exp(x: &Tangent9) -> Self {
        let w = x.fixed_rows::<3>(0).into_owned();
        let jl = so3::left_jacobian(&w);
        ExtendedPose {
            rotation: Rotation::exp(&w),
            position: jl * x.fixed_rows::<3>(3).into_owned(),
            velocity: jl * x.fixed_rows::<3>(6).into_owned(),
        }
    }

    /// Logarithm; fails near the angle-pi cut locus.
    pub fn log(&self) -> Result<Tangent9> {
        let w = self.rotation.log()?;
        let jl_inv = so3::left_jacobian_inv(&w)?;
        let mut x = Tangent9::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&w);
        x.fixed_rows_mut::<3>(3).copy_from(&(jl_inv * self.position));
        x.fixed_rows_mut::<3>(6).copy_from(&(jl_inv * self.velocity));
        Ok(x)
    }

    pub fn compose(&self, other: &ExtendedPose) -> Self {
        ExtendedPose {
            rotation: self.rotation.compose(&other.rotation),
            position: self.rotation.apply(&other.position) + self.position,
            velocity: self.rotation.apply(&other.velocity) + self.velocity,
        }
    }

    pub fn inverse(&self) -> Self {
        let rot_inv = self.rotation.inverse();
        ExtendedPose {
            position: -rot_inv.apply(&self.position),
            velocity: -rot_inv.apply(&self.velocity),
            rotation: rot_inv,
        }
    }

    /// The SE(3) pose block (rotation and position).
    pub fn pose(&self) -> Pose {
        Pose::new(self.rotation, self.position)
    }

    /// 5x5 matrix embedding.
    pub fn matrix(&self) -> Matrix5 {
        let mut m = Matrix5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.velocity);
        m
    }

    /// Adjoint in `(omega, t1, t2)` ordering:
    /// `[[R, 0, 0], [p^ R, R, 0], [v^ R, 0, R]]`.
    pub fn adjoint(&self) -> Adjoint9 {
        let r = self.rotation.matrix();
        let mut m = Adjoint9::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
        m.fixed_view_mut::<3, 3>(6, 6).copy_from(r);
        m.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&(so3::hat(&self.position) * r));
        m.fixed_view_mut::<3, 3>(6, 0)
            .copy_from(&(so3::hat(&self.velocity) * r));
        m
    }
}

/// ad operator of se_2(3): `[[w^, 0, 0], [t1^, w^, 0], [t2^, 0, w^]]`.
pub fn ad(x: &Tangent9) -> Adjoint9 {
    let wh = so3::hat(&x.fixed_rows::<3>(0).into_owned());
    let t1h = so3::hat(&x.fixed_rows::<3>(3).into_owned());
    let t2h = so3::hat(&x.fixed_rows::<3>(6).into_owned());
    let mut m = Adjoint9::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(6, 6).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&t1h);
    m.fixed_view_mut::<3, 3>(6, 0).copy_from(&t2h);
    m
}

/// Left Jacobian of se_2(3) by the truncated ad-series, summed until the
/// term norm drops below an absolute 1e-14 tail bound. For very small inputs
/// a fixed 4th-order Taylor expansion is used instead.
pub fn left_jacobian(x: &Tangent9) -> Adjoint9 {
    let a = ad(x);
    if x.norm() < 1e-4 {
        let a2 = a * a;
        return Adjoint9::identity() + a / 2.0 + a2 / 6.0 + a2 * a / 24.0 + a2 * a2 / 120.0;
    }
    let mut term = Adjoint9::identity();
    let mut sum = Adjoint9::identity();
    for k in 1..80 {
        term = (a * term) / (k as f64 + 1.0);
        sum += term;
        if term.norm() < 1e-14 {
            break;
        }
    }
    sum
}

/// Inverse of [`left_jacobian`] by direct inversion; rejected for
/// `|omega| >= 2 pi` where the Jacobian is singular.
pub fn left_jacobian_inv(x: &Tangent9) -> Result<Adjoint9> {
    let w_norm = x.fixed_rows::<3>(0).norm();
    if w_norm >= 2.0 * std::f64::consts::PI - super::LOG_ANGLE_MARGIN {
        return Err(Error::InvalidArgument(format!(
            "inverse left Jacobian is singular at |w| = 2 pi (got {w_norm})"
        )));
    }
    left_jacobian(x).try_inverse().ok_or_else(|| {
        Error::NumericalSingularity("se_2(3) left Jacobian not invertible".into())
    })
}

/// Rotation block accessor used by tests.
pub fn rotation_block(m: &Matrix5) -> Matrix3<f64> {
    m.fixed_view::<3, 3>(0, 0).into_owned()
}
