//! Generic covariance-intersection and Kalman fusion primitives in R^n.
//!
//! Covariance intersection combines estimates in information space with
//! convex weights and stays consistent under any unknown cross-correlation,
//! at the price of conservatism. The Kalman update assumes independent
//! information and is exact only when that holds. Both are exposed here on
//! dynamically sized Gaussians so that the filter and the standalone
//! consistency experiments share one implementation.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Mean/covariance pair in R^n.
#[derive(Clone, Debug)]
pub struct GaussianEstimate {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianEstimate {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        let sym = symmetrized(&cov);
        GaussianEstimate { mean, cov: sym }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Convex covariance-intersection weights: each in [0, 1], summing to one.
#[derive(Clone, Debug)]
pub struct CIWeights {
    alpha: Vec<f64>,
}

impl CIWeights {
    /// Validates and wraps explicit weights.
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument(
                "CI weights must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "CI weights must sum to 1, got {sum}"
            )));
        }
        Ok(CIWeights { alpha })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }
}

pub(crate) fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) / 2.0
}

/// Inverts a symmetric positive-definite matrix by Cholesky; failure is
/// surfaced, never papered over with regularization.
pub fn spd_inverse(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    Cholesky::new(symmetrized(m))
        .map(|c| c.inverse())
        .ok_or_else(|| {
            Error::NumericalSingularity(format!("{context}: matrix not positive definite"))
        })
}

/// Fast non-iterative CI weights: `alpha_i` proportional to `1 / tr(P_i)`.
pub fn ci_weights_fast(traces: &[f64]) -> Result<CIWeights> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no traces supplied".into()));
    }
    if traces.iter().any(|t| *t <= 0.0) {
        return Err(Error::InvalidArgument(
            "CI weights require strictly positive traces".into(),
        ));
    }
    let inv: Vec<f64> = traces.iter().map(|t| 1.0 / t).collect();
    let total: f64 = inv.iter().sum();
    CIWeights::new(inv.into_iter().map(|v| v / total).collect())
}

/// Covariance intersection of same-dimension estimates:
/// `P^-1 = sum alpha_i P_i^-1`, `x = P sum alpha_i P_i^-1 x_i`.
pub fn ci_fuse(estimates: &[GaussianEstimate], w: &CIWeights) -> Result<GaussianEstimate> {
    if estimates.is_empty() {
        return Err(Error::InvalidArgument("nothing to fuse".into()));
    }
    if estimates.len() != w.as_slice().len() {
        return Err(Error::InvalidArgument(format!(
            "{} estimates but {} weights",
            estimates.len(),
            w.as_slice().len()
        )));
    }
    let n = estimates[0].dim();
    if estimates.iter().any(|e| e.dim() != n || e.cov.nrows() != n) {
        return Err(Error::InvalidArgument(
            "dimension mismatch in CI fusion".into(),
        ));
    }
    let mut info = DMatrix::zeros(n, n);
    let mut info_mean = DVector::zeros(n);
    for (est, alpha) in estimates.iter().zip(w.as_slice()) {
        let p_inv = spd_inverse(&est.cov, "CI input covariance")?;
        info += &p_inv * *alpha;
        info_mean += p_inv * &est.mean * *alpha;
    }
    let cov = spd_inverse(&info, "CI fused information")?;
    let mean = &cov * info_mean;
    Ok(GaussianEstimate::new(mean, cov))
}

/// Linear Kalman measurement update `z = H x + v`, `v ~ N(0, R)`.
pub fn kf_fuse_linear(
    prior: &GaussianEstimate,
    h: &DMatrix<f64>,
    z: &DVector<f64>,
    r: &DMatrix<f64>,
) -> Result<GaussianEstimate> {
    let n = prior.dim();
    let m = z.len();
    if h.nrows() != m || h.ncols() != n || r.nrows() != m || r.ncols() != m {
        return Err(Error::InvalidArgument(
            "inconsistent measurement dimensions".into(),
        ));
    }
    let s = symmetrized(&(h * &prior.cov * h.transpose() + r));
    let s_chol = Cholesky::new(s).ok_or_else(|| {
        Error::NumericalSingularity("innovation covariance not positive definite".into())
    })?;
    let k = &prior.cov * h.transpose() * s_chol.inverse();
    let mean = &prior.mean + &k * (z - h * &prior.mean);
    let cov = symmetrized(&((DMatrix::identity(n, n) - &k * h) * &prior.cov));
    Ok(GaussianEstimate::new(mean, cov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn est(mean: &[f64], cov: DMatrix<f64>) -> GaussianEstimate {
        GaussianEstimate::new(DVector::from_row_slice(mean), cov)
    }

    #[test]
    fn equal_traces_give_equal_weights() {
        let w = ci_weights_fast(&[3.7, 3.7]).unwrap();
        assert_abs_diff_eq!(w.as_slice()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w.as_slice()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn weights_one_and_three() {
        // 1/tr normalization: (1/1) / (1/1 + 1/3) = 0.75.
        let w = ci_weights_fast(&[1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(w.as_slice()[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(w.as_slice()[1], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn single_trace_gets_full_weight() {
        let w = ci_weights_fast(&[0.4]).unwrap();
        assert_eq!(w.as_slice(), &[1.0]);
    }

    #[test]
    fn weights_reject_nonpositive_trace() {
        assert!(ci_weights_fast(&[1.0, 0.0]).is_err());
        assert!(ci_weights_fast(&[]).is_err());
    }

    #[test]
    fn ci_of_identical_inputs_is_identity_operation() {
        let a = est(&[1.0, -2.0], DMatrix::from_diagonal_element(2, 2, 3.0));
        let w = ci_weights_fast(&[3.0 * 2.0, 3.0 * 2.0]).unwrap();
        let fused = ci_fuse(&[a.clone(), a.clone()], &w).unwrap();
        assert_abs_diff_eq!(fused.mean, a.mean, epsilon = 1e-12);
        assert_abs_diff_eq!(fused.cov, a.cov, epsilon = 1e-12);
    }

    #[test]
    fn scalar_ci_hand_case() {
        // (x=0, P=1), (x=2, P=1), alpha=(1/2, 1/2): x=1, P=1.
        let a = est(&[0.0], DMatrix::from_element(1, 1, 1.0));
        let b = est(&[2.0], DMatrix::from_element(1, 1, 1.0));
        let w = CIWeights::new(vec![0.5, 0.5]).unwrap();
        let fused = ci_fuse(&[a, b], &w).unwrap();
        assert_abs_diff_eq!(fused.mean[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fused.cov[(0, 0)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn equal_weight_fusion_is_bounded_by_doubled_inputs() {
        // P_CI <= alpha_i^-1 P_i with alpha = 1/2.
        let p1 = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let p2 = DMatrix::from_row_slice(2, 2, &[1.0, -0.2, -0.2, 3.0]);
        let a = est(&[0.0, 0.0], p1.clone());
        let b = est(&[1.0, -1.0], p2.clone());
        let w = CIWeights::new(vec![0.5, 0.5]).unwrap();
        let fused = ci_fuse(&[a, b], &w).unwrap();
        for (p, name) in [(p1, "p1"), (p2, "p2")] {
            let diff = symmetrized(&(p * 2.0 - &fused.cov));
            let min_eig = diff
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig > -1e-12, "violated against {name}: {min_eig}");
        }
    }

    #[test]
    fn all_weight_on_one_input_returns_it_exactly() {
        let a = est(&[4.0], DMatrix::from_element(1, 1, 2.0));
        let b = est(&[-4.0], DMatrix::from_element(1, 1, 5.0));
        let w = CIWeights::new(vec![1.0, 0.0]).unwrap();
        let fused = ci_fuse(&[a.clone(), b], &w).unwrap();
        assert_abs_diff_eq!(fused.mean[0], a.mean[0], epsilon = 1e-12);
        assert_abs_diff_eq!(fused.cov[(0, 0)], a.cov[(0, 0)], epsilon = 1e-12);
    }

    #[test]
    fn ci_rejects_singular_covariance() {
        let a = est(&[0.0, 0.0], DMatrix::zeros(2, 2));
        let b = est(&[0.0, 0.0], DMatrix::identity(2, 2));
        let w = CIWeights::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            ci_fuse(&[a, b], &w),
            Err(Error::NumericalSingularity(_))
        ));
    }

    #[test]
    fn scalar_kf_hand_case() {
        let prior = est(&[0.0], DMatrix::from_element(1, 1, 1.0));
        let h = DMatrix::from_element(1, 1, 1.0);
        let z = DVector::from_element(1, 2.0);
        let r = DMatrix::from_element(1, 1, 1.0);
        let post = kf_fuse_linear(&prior, &h, &z, &r).unwrap();
        assert_abs_diff_eq!(post.mean[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(post.cov[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn uninformative_measurement_leaves_estimate_unchanged() {
        let prior = est(&[1.0, 2.0], DMatrix::identity(2, 2));
        let h = DMatrix::identity(2, 2);
        let z = DVector::from_row_slice(&[100.0, -50.0]);
        let r = DMatrix::from_diagonal_element(2, 2, 1e12);
        let post = kf_fuse_linear(&prior, &h, &z, &r).unwrap();
        assert!((post.mean - &prior.mean).norm() / prior.mean.norm() < 1e-6);
        assert!((post.cov - &prior.cov).norm() / prior.cov.norm() < 1e-6);
    }

    #[test]
    fn zero_measurement_matrix_is_a_no_op() {
        let prior = est(&[1.0, 2.0], DMatrix::identity(2, 2));
        let h = DMatrix::zeros(1, 2);
        let z = DVector::from_element(1, 7.0);
        let r = DMatrix::from_element(1, 1, 1.0);
        let post = kf_fuse_linear(&prior, &h, &z, &r).unwrap();
        assert_eq!(post.mean, prior.mean);
        assert_eq!(post.cov, prior.cov);
    }

    #[test]
    fn kf_never_increases_trace() {
        let prior = est(&[0.0, 0.0, 0.0], DMatrix::from_diagonal_element(3, 3, 2.0));
        let h = DMatrix::from_row_slice(1, 3, &[1.0, 0.5, 0.0]);
        let z = DVector::from_element(1, 0.3);
        let r = DMatrix::from_element(1, 1, 0.5);
        let post = kf_fuse_linear(&prior, &h, &z, &r).unwrap();
        assert!(post.cov.trace() <= prior.cov.trace() + 1e-12);
    }
}
