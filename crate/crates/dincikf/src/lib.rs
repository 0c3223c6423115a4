//! Distributed invariant Kalman filtering with covariance intersection (DInCIKF)
//! for cooperative 3D pose estimation on matrix Lie groups.
//!
//! The crate is organized around a per-agent filter that propagates an extended
//! pose (rotation, position, velocity) on SE\_2(3) from IMU inputs, fuses
//! neighbor-provided virtual pose observations by covariance intersection, and
//! fuses environmental (known-feature) observations by a Kalman update. A
//! deterministic multi-agent simulator, two baseline filters, and numerical
//! verifiers for filter consistency and covariance boundedness round out the
//! toolbox.
//!
//! Modules:
//! - [`lie`]: SO(3) / SE(3) / SE\_2(3) group operations, exponential maps,
//!   adjoints, and left Jacobians.
//! - [`dynamics`]: IMU-driven mean propagation, discrete error-state
//!   transition, and process-noise discretization.
//! - [`fusion`]: generic covariance-intersection and Kalman fusion in R^n.
//! - [`filter`]: the per-agent DInCIKF step (predict, CI update, KF update).
//! - [`network`]: directed communication graph, augmented feature graph, and
//!   spanning-tree layering.
//! - [`sim`]: scenario configuration, ground-truth trajectories, sensor
//!   synthesis, and the synchronous run loop.
//! - [`analysis`]: RMSE/NEES metrics, observability ranks, and the auxiliary
//!   upper-bound system (AUBS) that certifies covariance boundedness.
//! - [`baselines`]: naive-fusion invariant EKF and a reconstructed standard
//!   EKF for comparison.

pub mod analysis;
pub mod baselines;
pub mod dynamics;
pub mod error;
pub mod filter;
pub mod fusion;
pub mod lie;
pub mod network;
pub mod sim;

pub use error::{Error, Result};
