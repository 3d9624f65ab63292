//! Adaptive random-walk Metropolis on a strongly correlated 2-D Gaussian.
//!
//! The proposal starts isotropic; the running covariance and the Robbins-Monro
//! scale bring acceptance near 0.234.

use semilong::sampler::{run_adaptive_mh, SamplerSettings};

fn main() -> semilong::Result<()> {
    let rho: f64 = 0.95;
    let det = 1.0 - rho * rho;
    let log_post = |x: &[f64]| -0.5 * (x[0] * x[0] - 2.0 * rho * x[0] * x[1] + x[1] * x[1]) / det;
    let settings = SamplerSettings { n_iter: 30_000, burn_in: 5_000, seed: 1, ..Default::default() };
    let chain = run_adaptive_mh(&log_post, &[3.0, -3.0], &[1.0, 0.0, 0.0, 1.0], &settings)?;
    let n = chain.draws.len() as f64;
    let mean: Vec<f64> = (0..2).map(|j| chain.column(j).iter().sum::<f64>() / n).collect();
    let cov01 = chain.draws.iter().map(|d| (d[0] - mean[0]) * (d[1] - mean[1])).sum::<f64>() / (n - 1.0);
    println!("acceptance {:.3}, final scale {:.3}", chain.accept_rate, chain.scale_final);
    println!("mean ({:.3}, {:.3}), covariance(x0, x1) {:.3} (target {rho})", mean[0], mean[1], cov01);
    println!("learned proposal covariance {:?}", chain.proposal_cov_final.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    for (j, e) in chain.ess.iter().enumerate() {
        println!("ESS x{j}: {:.0} of {}", e.value, chain.draws.len());
    }
    Ok(())
}
