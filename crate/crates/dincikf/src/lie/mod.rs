//! Matrix Lie group operations for SO(3), SE(3), and SE_2(3).
//!
//! Conventions used throughout the crate:
//!
//! - Tangent vectors are plain `nalgebra` vectors with the rotational part
//!   first: SE(3) tangents are ordered `(omega, t)` and SE_2(3) tangents
//!   `(omega, t1, t2)`, where `t1` pairs with the position column and `t2`
//!   with the velocity column of the group matrix. The error-state blocks of
//!   the filter therefore stack as (attitude, position, velocity).
//! - `exp` maps R^n -> G with the hat operator applied internally, and `log`
//!   is its inverse returning the coordinate vector.
//! - `dexp` denotes the left Jacobian `sum_k ad^k / (k+1)!`; perturbations
//!   compose as `exp(x) exp(y) ~= exp(x + dexp_{-x}^{-1} y)` for small `y`.
//!
//! All types are plain immutable values; every operation is a pure function.

pub mod se23;
pub mod se3;
pub mod so3;

pub use se23::ExtendedPose;
pub use se3::Pose;
pub use so3::Rotation;

use nalgebra::{SMatrix, SVector};

/// 3-dof rotation tangent (axis-angle vector).
pub type Tangent3 = SVector<f64, 3>;
/// 6-dof pose tangent, ordered `(omega, t)`.
pub type Tangent6 = SVector<f64, 6>;
/// 9-dof extended-pose tangent, ordered `(omega, t1, t2)`.
pub type Tangent9 = SVector<f64, 9>;

/// 6x6 adjoint of an SE(3) element.
pub type Adjoint6 = SMatrix<f64, 6, 6>;
/// 9x9 adjoint of an SE_2(3) element.
pub type Adjoint9 = SMatrix<f64, 9, 9>;

/// Angle margin below pi at which rotation logarithms are rejected.
pub(crate) const LOG_ANGLE_MARGIN: f64 = 1e-6;
