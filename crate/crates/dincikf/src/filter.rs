//! Per-agent distributed invariant CI Kalman filter.
//!
//! One step runs three stages in a fixed order:
//!
//! 1. **Prediction** — mean propagation from the IMU and
//!    `P_bar = A P A^T + Q_d`.
//! 2. **CI update** — neighbor-provided virtual pose observations carry
//!    unknown cross-correlations (they embed the neighbors' own estimates),
//!    so they are fused by covariance intersection in information form with
//!    the pose selector `J = [I_6 0]`.
//! 3. **KF update** — environmental observations of known features are
//!    independent of the state estimate, so a Kalman update fuses them
//!    without CI conservatism.
//!
//! All uncertainty lives on the logarithmic right-invariant error
//! `xi = log(X Xbar^-1)`; corrections are applied by group retraction
//! `X <- exp(correction) X`.

use nalgebra::{Cholesky, SMatrix, Vector6};

use crate::dynamics::{
    discretize_noise, propagate_covariance, propagate_mean, state_transition_unchecked,
    Covariance9, GravityConstant, ImuNoiseSpec, ImuSample,
};
use crate::error::{Error, Result};
use crate::fusion::ci_weights_fast;
use crate::lie::{se3, Adjoint9, ExtendedPose, Pose, Tangent9};

pub type Matrix6 = SMatrix<f64, 6, 6>;
pub type Matrix6x9 = SMatrix<f64, 6, 9>;

/// Residuals whose rotation angle reaches this bound are rejected rather
/// than fused; the log chart is untrustworthy that far out.
pub const GATING_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

/// The constant pose selector `J = [I_6 0_{6x3}]` picking the (attitude,
/// position) block out of the 9-dof error state.
pub fn selector_j() -> Matrix6x9 {
    let mut j = Matrix6x9::zeros();
    for i in 0..6 {
        j[(i, i)] = 1.0;
    }
    j
}

/// Which trace enters the CI weight of the 9x9 prior. The raw full trace is
/// the formula as written; the pose-block variant restricts the prior trace
/// to the 6x6 block that actually competes with the neighbor terms and is
/// kept as a sensitivity switch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CiPriorTrace {
    #[default]
    Full,
    PoseBlock,
}

/// Where a virtual observation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservationSource {
    /// Broadcast by neighbor `j`, built from its relative measurement and
    /// its own prior estimate.
    Neighbor(usize),
    /// Built from a known environmental feature.
    Feature,
}

/// A pose-level pseudo-measurement of one agent with 6x6 noise covariance.
#[derive(Clone, Debug)]
pub struct VirtualObservation {
    pub observed_agent: usize,
    pub pose: Pose,
    pub noise6: Matrix6,
    pub source: ObservationSource,
}

/// The state of one agent's filter.
#[derive(Clone, Debug)]
pub struct AgentFilter {
    pub agent_id: usize,
    pub x_hat: ExtendedPose,
    pub p_hat: Covariance9,
    pub noise: ImuNoiseSpec,
    pub ci_prior_trace: CiPriorTrace,
}

/// Result of the CI stage.
#[derive(Clone, Debug)]
pub struct CiUpdate {
    pub xi: Tangent9,
    pub p: Covariance9,
    pub x: ExtendedPose,
    /// Weight alpha_i assigned to the prior (1 when nothing was fused).
    pub alpha_prior: f64,
    /// Observations dropped by the rotation gate.
    pub rejected: usize,
}

/// Per-step bookkeeping consumed by the simulator and the verifiers.
#[derive(Clone, Debug)]
pub struct StepInfo {
    /// Process noise added this step.
    pub q_d: Covariance9,
    /// Prior CI weight, when a CI update ran.
    pub alpha_prior: Option<f64>,
    pub rejected_relative: usize,
    pub rejected_env: bool,
}

fn spd_inverse9(m: &Adjoint9, context: &str) -> Result<Adjoint9> {
    let sym = (m + m.transpose()) / 2.0;
    Cholesky::new(sym)
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NumericalSingularity(format!("{context}: not positive definite")))
}

fn spd_inverse6(m: &Matrix6, context: &str) -> Result<Matrix6> {
    let sym = (m + m.transpose()) / 2.0;
    Cholesky::new(sym)
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NumericalSingularity(format!("{context}: not positive definite")))
}

/// Rotation angle between two poses without extracting the full logarithm.
fn relative_rotation_angle(a: &Pose, b: &Pose) -> f64 {
    let rel = a.rotation.compose(&b.rotation.inverse());
    ((rel.matrix().trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
}

/// Builds the virtual pose observation a sender broadcasts about a neighbor.
///
/// The sender composes its own pose estimate with its relative measurement
/// of the observed agent; the 6x6 noise accounts for both the relative
/// measurement noise and the sender's own pose uncertainty:
/// `noise = R_rel + J P_sender J^T`.
pub fn make_virtual_relative(
    t_bar_j: &Pose,
    rel_meas: &Pose,
    r_ij: &Matrix6,
    p_bar_j: &Covariance9,
    observed_agent: usize,
    sender: usize,
) -> VirtualObservation {
    let j = selector_j();
    let noise6 = r_ij + j * p_bar_j.matrix() * j.transpose();
    VirtualObservation {
        observed_agent,
        pose: t_bar_j.compose(rel_meas),
        noise6: (noise6 + noise6.transpose()) / 2.0,
        source: ObservationSource::Neighbor(sender),
    }
}

/// Builds the virtual observation implied by an environmental measurement of
/// a known feature pose: `T_f (measurement)^-1`. Inverting the known feature
/// pose adds no uncertainty, so the measurement covariance passes through.
pub fn make_virtual_env(
    t_f: &Pose,
    env_meas: &Pose,
    r_if: &Matrix6,
    observed_agent: usize,
) -> VirtualObservation {
    VirtualObservation {
        observed_agent,
        pose: t_f.compose(&env_meas.inverse()),
        noise6: *r_if,
        source: ObservationSource::Feature,
    }
}

/// Covariance-intersection fusion of the prior with neighbor virtual
/// observations, in information form.
///
/// With weights `alpha` from the fast trace rule over
/// `{tr(P_bar)} u {tr(noise_j)}`:
///
/// ```text
/// P_breve^-1 = alpha_0 P_bar^-1 + sum_j alpha_j J^T R_j^-1 J
/// xi_breve   = P_breve sum_j alpha_j J^T R_j^-1 log(T_obs_j T_bar^-1)
/// X_breve    = exp(xi_breve) X_bar
/// ```
///
/// An empty (or fully gated) observation list returns the prior unchanged.
pub fn ci_update(
    x_bar: &ExtendedPose,
    p_bar: &Covariance9,
    obs: &[VirtualObservation],
    prior_trace: CiPriorTrace,
) -> Result<CiUpdate> {
    let t_bar = x_bar.pose();
    let j = selector_j();

    // Gate residuals whose rotation leaves the trustworthy log chart.
    let mut usable: Vec<(&VirtualObservation, Vector6<f64>)> = Vec::with_capacity(obs.len());
    let mut rejected = 0usize;
    for o in obs {
        if relative_rotation_angle(&o.pose, &t_bar) >= GATING_ANGLE {
            rejected += 1;
            continue;
        }
        let residual = o.pose.compose(&t_bar.inverse()).log()?;
        usable.push((o, residual));
    }

    if usable.is_empty() {
        return Ok(CiUpdate {
            xi: Tangent9::zeros(),
            p: *p_bar,
            x: *x_bar,
            alpha_prior: 1.0,
            rejected,
        });
    }

    let prior_trace_value = match prior_trace {
        CiPriorTrace::Full => p_bar.trace(),
        CiPriorTrace::PoseBlock => p_bar.matrix().fixed_view::<6, 6>(0, 0).trace(),
    };
    let mut traces = Vec::with_capacity(usable.len() + 1);
    traces.push(prior_trace_value);
    traces.extend(usable.iter().map(|(o, _)| o.noise6.trace()));
    let weights = ci_weights_fast(&traces)?;
    let alpha = weights.as_slice();

    let p_bar_inv = spd_inverse9(p_bar.matrix(), "CI prior covariance")?;
    let mut info = p_bar_inv * alpha[0];
    let mut info_xi = Tangent9::zeros();
    for (idx, (o, residual)) in usable.iter().enumerate() {
        let r_inv = spd_inverse6(&o.noise6, "virtual observation noise")?;
        let weighted = j.transpose() * r_inv * alpha[idx + 1];
        info += weighted * j;
        info_xi += weighted * residual;
    }
    let p_breve = spd_inverse9(&info, "CI fused information")?;
    let xi = p_breve * info_xi;
    Ok(CiUpdate {
        xi,
        p: Covariance9::new(p_breve),
        x: ExtendedPose::exp(&xi).compose(x_bar),
        alpha_prior: alpha[0],
        rejected,
    })
}

/// Residual and Jacobian of an environmental virtual observation.
///
/// `r = log(T_obs T_breve^-1)`; the Jacobian with respect to the 9-dof error
/// is `H = dexp_{-r}^-1 J`, which collapses to `J` at zero residual.
pub fn env_residual_and_jacobian(
    x_breve: &ExtendedPose,
    obs: &VirtualObservation,
) -> Result<(Vector6<f64>, Matrix6x9)> {
    let r = obs.pose.compose(&x_breve.pose().inverse()).log()?;
    let h = se3::left_jacobian_inv(&-r)? * selector_j();
    Ok((r, h))
}

/// Kalman update of the CI-fused state against one environmental residual,
/// followed by the group retraction `X_hat = exp(K r) X_breve`.
pub fn kf_update(
    x_breve: &ExtendedPose,
    p_breve: &Covariance9,
    r: &Vector6<f64>,
    h: &Matrix6x9,
    r_if: &Matrix6,
) -> Result<(ExtendedPose, Covariance9)> {
    let s = h * p_breve.matrix() * h.transpose() + r_if;
    let s_sym = (s + s.transpose()) / 2.0;
    let s_inv = Cholesky::new(s_sym)
        .map(|c| c.inverse())
        .ok_or_else(|| {
            Error::NumericalSingularity("KF innovation covariance not positive definite".into())
        })?;
    let k = p_breve.matrix() * h.transpose() * s_inv;
    let p_hat = Covariance9::new((Adjoint9::identity() - k * h) * p_breve.matrix());
    let x_hat = ExtendedPose::exp(&(k * r)).compose(x_breve);
    Ok((x_hat, p_hat))
}

impl AgentFilter {
    pub fn new(agent_id: usize, x0: ExtendedPose, p0: Covariance9, noise: ImuNoiseSpec) -> Self {
        AgentFilter {
            agent_id,
            x_hat: x0,
            p_hat: p0,
            noise,
            ci_prior_trace: CiPriorTrace::default(),
        }
    }

    /// Prediction stage: mean propagation plus `P <- A P A^T + Q_d`.
    /// Returns the process noise it added.
    pub fn propagate(&mut self, imu: &ImuSample, dt: f64, g: &GravityConstant) -> Covariance9 {
        let a = state_transition_unchecked(dt, g);
        let q_d = discretize_noise(&self.noise, &self.x_hat, dt, g);
        self.x_hat = propagate_mean(&self.x_hat, imu, &self.noise, dt, g);
        self.p_hat = propagate_covariance(&self.p_hat, &a, &q_d);
        q_d
    }

    /// One full filter step: predict, CI-fuse neighbor observations, KF-fuse
    /// the environmental observation. Absent stages leave state untouched.
    pub fn agent_step(
        &mut self,
        imu: &ImuSample,
        dt: f64,
        g: &GravityConstant,
        neighbor_obs: &[VirtualObservation],
        env_obs: Option<&VirtualObservation>,
    ) -> Result<StepInfo> {
        if dt <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "agent step requires dt > 0, got {dt}"
            )));
        }
        let q_d = self.propagate(imu, dt, g);

        let mut info = StepInfo {
            q_d,
            alpha_prior: None,
            rejected_relative: 0,
            rejected_env: false,
        };

        let (xi_breve, p_breve, x_breve) = if neighbor_obs.is_empty() {
            (Tangent9::zeros(), self.p_hat, self.x_hat)
        } else {
            let ci = ci_update(&self.x_hat, &self.p_hat, neighbor_obs, self.ci_prior_trace)?;
            info.alpha_prior = Some(ci.alpha_prior);
            info.rejected_relative = ci.rejected;
            (ci.xi, ci.p, ci.x)
        };
        let _ = xi_breve;

        match env_obs {
            Some(obs)
                if relative_rotation_angle(&obs.pose, &x_breve.pose()) < GATING_ANGLE =>
            {
                let (r, h) = env_residual_and_jacobian(&x_breve, obs)?;
                let (x_hat, p_hat) = kf_update(&x_breve, &p_breve, &r, &h, &obs.noise6)?;
                self.x_hat = x_hat;
                self.p_hat = p_hat;
            }
            Some(_) => {
                info.rejected_env = true;
                self.x_hat = x_breve;
                self.p_hat = p_breve;
            }
            None => {
                self.x_hat = x_breve;
                self.p_hat = p_breve;
            }
        }
        Ok(info)
    }
}
