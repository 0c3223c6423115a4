// (a) Fixed-alpha AUBS-style DARE for a blind child: what trace does the
//     bound converge to, per alpha? (b) Two-agent closed loop self-consistency.
use dincikf::dynamics::*;
use dincikf::filter::*;
use dincikf::lie::*;
use nalgebra::{Cholesky, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dare_trace(alpha: f64, tau: f64, r_rel: f64, sigma_g: f64, sigma_a: f64) -> Option<f64> {
    let g = GravityConstant::default();
    let a = state_transition(tau, &g).unwrap();
    let spec = ImuNoiseSpec { sigma_g, sigma_a, bias_g: Vector3::zeros(), bias_a: Vector3::zeros() };
    let q = discretize_noise(&spec, &ExtendedPose::identity(), tau, &g);
    let j = selector_j();
    let s = j.transpose() * (Matrix6::identity() * (1.0 - alpha) / r_rel) * j;
    let mut pi = *Covariance9::from_diagonal(&Tangent9::from_element(0.01)).matrix();
    for k in 0..20000 {
        let info = Cholesky::new((pi + pi.transpose()) / 2.0)?.inverse() * alpha + s;
        let pihat = Cholesky::new((info + info.transpose()) / 2.0)?.inverse();
        let next = a * pihat * a.transpose() + q.matrix();
        let delta = (next - pi).norm();
        pi = next;
        if delta < 1e-10 { return Some(pi.trace()); }
        if !pi.trace().is_finite() || pi.trace() > 1e12 { return None; }
        let _ = k;
    }
    Some(pi.trace())
}

fn main() {
    println!("--- fixed-alpha DARE trace (tau=0.02, sigma_g=.005, sigma_a=.01) ---");
    for r_rel in [1e-2f64, 4e-2, 1e-1] {
        for alpha in [0.95f64, 0.9, 0.8, 0.6, 0.4] {
            let t = dare_trace(alpha, 0.02, r_rel, 0.005, 0.01);
            let tr_rtilde = 6.0 * r_rel; // plus parent pose block, ignored here
            match t {
                Some(tr) => {
                    let implied = tr_rtilde / (tr_rtilde + tr);
                    println!("r_rel={r_rel:.0e} alpha={alpha:.2}: darer_tr={tr:.3e} trR={tr_rtilde:.2e} implied_alpha={implied:.3}");
                }
                None => println!("r_rel={r_rel:.0e} alpha={alpha:.2}: DIVERGED"),
            }
        }
    }
}
