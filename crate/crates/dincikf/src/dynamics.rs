//! IMU-driven mean propagation on SE_2(3), the discrete error-state
//! transition, and process-noise discretization.
//!
//! The logarithmic right-invariant error `xi = log(X Xbar^-1)` of the IMU
//! kinematics obeys `xi_dot = F xi + noise` with the block matrix
//! `F = [[0, 0, 0], [0, 0, I], [g^, 0, 0]]` in (attitude, position, velocity)
//! ordering. `F` is nilpotent (`F^3 = 0`), so the one-step transition
//! `A = exp(F dt)` and the noise integral are exact polynomials in `dt`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::{so3, Adjoint9, ExtendedPose};

/// Gravity vector in the global frame; default `(0, 0, -9.81)` m/s^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravityConstant(pub Vector3<f64>);

impl Default for GravityConstant {
    fn default() -> Self {
        GravityConstant(Vector3::new(0.0, 0.0, -9.81))
    }
}

/// One gyro/accelerometer sample in the body frame.
#[derive(Clone, Copy, Debug)]
pub struct ImuSample {
    /// Measured angular rate (rad/s).
    pub omega_m: Vector3<f64>,
    /// Measured specific force (m/s^2).
    pub accel_m: Vector3<f64>,
    /// Sample time (s).
    pub timestamp: f64,
}

/// Continuous-time IMU noise densities and known constant biases.
///
/// Biases are treated as calibrated constants supplied by configuration;
/// online bias estimation is out of scope.
#[derive(Clone, Copy, Debug)]
pub struct ImuNoiseSpec {
    /// Gyro white-noise density (rad/s/sqrt(Hz)).
    pub sigma_g: f64,
    /// Accelerometer white-noise density (m/s^2/sqrt(Hz)).
    pub sigma_a: f64,
    /// Known constant gyro bias (rad/s).
    pub bias_g: Vector3<f64>,
    /// Known constant accelerometer bias (m/s^2).
    pub bias_a: Vector3<f64>,
}

impl ImuNoiseSpec {
    pub fn noiseless() -> Self {
        ImuNoiseSpec {
            sigma_g: 0.0,
            sigma_a: 0.0,
            bias_g: Vector3::zeros(),
            bias_a: Vector3::zeros(),
        }
    }
}

/// A 9x9 error-state covariance, kept symmetric on every write.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covariance9 {
    m: Adjoint9,
}

impl Covariance9 {
    pub fn zeros() -> Self {
        Covariance9 { m: Adjoint9::zeros() }
    }

    pub fn identity() -> Self {
        Covariance9 { m: Adjoint9::identity() }
    }

    /// Wraps and symmetrizes a matrix.
    pub fn new(m: Adjoint9) -> Self {
        Covariance9 {
            m: (m + m.transpose()) / 2.0,
        }
    }

    pub fn from_diagonal(d: &crate::lie::Tangent9) -> Self {
        Covariance9 {
            m: Adjoint9::from_diagonal(d),
        }
    }

    pub fn matrix(&self) -> &Adjoint9 {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// Smallest eigenvalue; used by PSD assertions in tests and verifiers.
    pub fn min_eigenvalue(&self) -> f64 {
        self.m
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Continuous error-dynamics matrix `F` for gravity `g`.
pub fn error_dynamics(g: &GravityConstant) -> Adjoint9 {
    let mut f = Adjoint9::zeros();
    f.fixed_view_mut::<3, 3>(3, 6).copy_from(&Matrix3::identity());
    f.fixed_view_mut::<3, 3>(6, 0).copy_from(&so3::hat(&g.0));
    f
}

/// Discrete error-state transition `A = exp(F dt)`, exact because `F^3 = 0`:
/// `A = [[I, 0, 0], [g^ dt^2 / 2, I, I dt], [g^ dt, 0, I]]`.
pub fn state_transition(dt: f64, g: &GravityConstant) -> Result<Adjoint9> {
    if dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "state transition requires dt > 0, got {dt}"
        )));
    }
    Ok(state_transition_unchecked(dt, g))
}

pub(crate) fn state_transition_unchecked(dt: f64, g: &GravityConstant) -> Adjoint9 {
    let gh = so3::hat(&g.0);
    let mut a = Adjoint9::identity();
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&(gh * (0.5 * dt * dt)));
    a.fixed_view_mut::<3, 3>(3, 6)
        .copy_from(&(Matrix3::identity() * dt));
    a.fixed_view_mut::<3, 3>(6, 0).copy_from(&(gh * dt));
    a
}

/// Inverse transition `A^-1 = exp(-F dt)`, also an exact polynomial.
pub fn state_transition_inverse(dt: f64, g: &GravityConstant) -> Result<Adjoint9> {
    if dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "state transition requires dt > 0, got {dt}"
        )));
    }
    Ok(state_transition_unchecked(-dt, g))
}

/// Propagates the state mean over one IMU interval.
///
/// The rotation increment is exact (`R exp((w_m - b_g) dt)`); velocity and
/// position use the world-frame acceleration held constant over the step,
/// with a second-order position update.
pub fn propagate_mean(
    x: &ExtendedPose,
    u: &ImuSample,
    spec: &ImuNoiseSpec,
    dt: f64,
    g: &GravityConstant,
) -> ExtendedPose {
    let w = u.omega_m - spec.bias_g;
    let accel_world = x.rotation.apply(&(u.accel_m - spec.bias_a)) + g.0;
    ExtendedPose {
        rotation: x.rotation.compose(&crate::lie::Rotation::exp(&(w * dt))),
        position: x.position + x.velocity * dt + accel_world * (0.5 * dt * dt),
        velocity: x.velocity + accel_world * dt,
    }
}

/// Discretizes the process noise over one step.
///
/// The continuous noise density of the invariant error is
/// `Q_c = Ad_X W Ad_X^T` with the body density
/// `W = diag(sigma_g^2 I, 0, sigma_a^2 I)` (the dexp factor equals identity
/// at zero error). The discrete covariance is the exact integral
/// `Q_d = int_0^dt exp(F s) Q_c exp(F s)^T ds`, a finite polynomial since
/// `F^3 = 0`.
pub fn discretize_noise(
    spec: &ImuNoiseSpec,
    x_ref: &ExtendedPose,
    dt: f64,
    g: &GravityConstant,
) -> Covariance9 {
    let mut w = Adjoint9::zeros();
    let sg2 = spec.sigma_g * spec.sigma_g;
    let sa2 = spec.sigma_a * spec.sigma_a;
    w.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Matrix3::identity() * sg2));
    w.fixed_view_mut::<3, 3>(6, 6)
        .copy_from(&(Matrix3::identity() * sa2));
    let adj = x_ref.adjoint();
    let qc = adj * w * adj.transpose();

    let f = error_dynamics(g);
    // Powers of F up to the nilpotency index.
    let f_pows = [Adjoint9::identity(), f, f * f];
    let factorial = [1.0, 1.0, 2.0];
    let mut qd = Adjoint9::zeros();
    for (m, fm) in f_pows.iter().enumerate() {
        for (n, fn_) in f_pows.iter().enumerate() {
            let power = (m + n + 1) as f64;
            let coeff = dt.powi((m + n + 1) as i32) / (power * factorial[m] * factorial[n]);
            qd += fm * qc * fn_.transpose() * coeff;
        }
    }
    Covariance9::new(qd)
}

/// One covariance prediction: `A P A^T + Q`, symmetrized.
pub fn propagate_covariance(p: &Covariance9, a: &Adjoint9, q: &Covariance9) -> Covariance9 {
    Covariance9::new(a * p.matrix() * a.transpose() + q.matrix())
}
