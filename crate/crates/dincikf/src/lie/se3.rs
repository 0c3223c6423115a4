//! SE(3): rigid-body poses, exponential/logarithm, adjoint, left Jacobian.

use nalgebra::{Matrix3, Matrix4, SMatrix, Vector3};

use super::so3::{self, Rotation};
use super::{Adjoint6, Tangent6};
use crate::error::Result;

/// Rotation plus translation; the pose block `T_i` of an agent state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

/// se(3) element as a 4x4 matrix, tangent ordered `(omega, t)`.
pub fn hat(x: &Tangent6) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&so3::hat(&x.fixed_rows::<3>(0).into_owned()));
    m.fixed_view_mut::<3, 1>(0, 3)
        .copy_from(&x.fixed_rows::<3>(3).into_owned());
    m
}

/// Inverse of [`hat`].
pub fn vee(m: &Matrix4<f64>) -> Tangent6 {
    let w = so3::vee(&m.fixed_view::<3, 3>(0, 0).into_owned());
    let t = m.fixed_view::<3, 1>(0, 3).into_owned();
    Tangent6::new(w[0], w[1], w[2], t[0], t[1], t[2])
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Rotation::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Pose { rotation, translation }
    }

    /// Exponential map: `R = exp(omega)`, `t = J_l(omega) rho`.
    pub fn exp(x: &Tangent6) -> Self {
        let w = x.fixed_rows::<3>(0).into_owned();
        let rho = x.fixed_rows::<3>(3).into_owned();
        Pose {
            rotation: Rotation::exp(&w),
            translation: so3::left_jacobian(&w) * rho,
        }
    }

    /// Logarithm; fails near the angle-pi cut locus.
    pub fn log(&self) -> Result<Tangent6> {
        let w = self.rotation.log()?;
        let rho = so3::left_jacobian_inv(&w)? * self.translation;
        Ok(Tangent6::new(w[0], w[1], w[2], rho[0], rho[1], rho[2]))
    }

    pub fn compose(&self, other: &Pose) -> Self {
        Pose {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.apply(&other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rot_inv = self.rotation.inverse();
        Pose {
            translation: -rot_inv.apply(&self.translation),
            rotation: rot_inv,
        }
    }

    /// 4x4 homogeneous matrix with bottom row (0, 0, 0, 1).
    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Adjoint in `(omega, t)` ordering: `[[R, 0], [t^ R, R]]`.
    pub fn adjoint(&self) -> Adjoint6 {
        let r = self.rotation.matrix();
        let tr = so3::hat(&self.translation) * r;
        let mut m = Adjoint6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&tr);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
        m
    }
}

/// Coefficients of the closed-form translation block of the SE(3) left
/// Jacobian, with Taylor fallbacks near zero.
fn q_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta < 1e-4 {
        let t2 = theta * theta;
        (
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
            1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0,
            1.0 / 120.0 - t2 / 2520.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        let t3 = theta * theta * theta;
        (
            (theta - s) / t3,
            (theta * theta + 2.0 * c - 2.0) / (2.0 * t3 * theta),
            (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t3 * theta * theta),
        )
    }
}

/// Translation-rotation coupling block of the SE(3) left Jacobian.
pub(crate) fn q_block(w: &Vector3<f64>, t: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let (c1, c2, c3) = q_coefficients(theta);
    let wh = so3::hat(w);
    let th = so3::hat(t);
    let wt = wh * th;
    let tw = th * wh;
    let wtw = wt * wh;
    0.5 * th
        + c1 * (wt + tw + wtw)
        + c2 * (wh * wt + tw * wh - 3.0 * wtw)
        + c3 * (wtw * wh + wh * tw * wh)
}

/// Left Jacobian `dexp_x` of se(3) in closed form:
/// `[[J_l(w), 0], [Q(w, t), J_l(w)]]`.
pub fn left_jacobian(x: &Tangent6) -> Adjoint6 {
    let w = x.fixed_rows::<3>(0).into_owned();
    let t = x.fixed_rows::<3>(3).into_owned();
    let jl = so3::left_jacobian(&w);
    let q = q_block(&w, &t);
    let mut m = Adjoint6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&jl);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&q);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&jl);
    m
}

/// Inverse left Jacobian via the block formula
/// `[[J^-1, 0], [-J^-1 Q J^-1, J^-1]]`; rejected for `|w| >= 2 pi`.
pub fn left_jacobian_inv(x: &Tangent6) -> Result<Adjoint6> {
    let w = x.fixed_rows::<3>(0).into_owned();
    let t = x.fixed_rows::<3>(3).into_owned();
    let jl_inv = so3::left_jacobian_inv(&w)?;
    let q = q_block(&w, &t);
    let lower = -jl_inv * q * jl_inv;
    let mut m = Adjoint6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&jl_inv);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&lower);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&jl_inv);
    Ok(m)
}

/// ad operator of se(3) in `(omega, t)` ordering: `[[w^, 0], [t^, w^]]`.
pub fn ad(x: &Tangent6) -> SMatrix<f64, 6, 6> {
    let wh = so3::hat(&x.fixed_rows::<3>(0).into_owned());
    let th = so3::hat(&x.fixed_rows::<3>(3).into_owned());
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&th);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&wh);
    m
}
