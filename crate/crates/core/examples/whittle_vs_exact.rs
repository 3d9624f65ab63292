//! Whittle, exact Gaussian and Kalman filter likelihoods on one simulated
//! ARMA(3,1)-error regression: cost per evaluation, then posterior means.
//!
//! `cargo run --release --example whittle_vs_exact -- 10000` runs full-length chains;
//! the default is shorter because the exact Gaussian route is `O(T^2)` per step.

use std::time::Instant;

use semilong::fit::{fit_posterior, posterior_map, FitSettings, Likelihood, Posterior, WarmStart};
use semilong::model::{ModelSpec, ParamVector, Prior};
use semilong::sampler::MapSettings;
use semilong::simulate::{simulate_dlr, RegressorProcess, SimConfig};

fn main() -> semilong::Result<()> {
    let n_iter: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let spec = ModelSpec::arma(3, 1, 1);
    let truth = ParamVector::arma(&[0.5, -0.248, 0.1], &[0.2], 2.0).with_beta(&[3.0]);
    let len = 5001;
    let regressor = RegressorProcess { phi: vec![0.6, -0.3], psi: vec![0.5, 0.2], sigma2: 0.0233 };
    let x = vec![regressor.simulate(len, 1)?];
    let data = simulate_dlr(&SimConfig::new(spec.clone(), truth.clone(), len, 2), &x)?;

    let whittle = Posterior::new(&data.y, &x, &spec, Likelihood::Whittle, Prior::default())?;
    let t = Instant::now();
    let map = posterior_map(&whittle, &MapSettings { restarts: 4, ..Default::default() })?;
    println!("Whittle MAP in {:.2?}", t.elapsed());

    let mut settings = FitSettings::default();
    settings.sampler.n_iter = n_iter;
    settings.sampler.burn_in = n_iter * 3 / 10;
    println!("{:<10} {:>12}  {:>7}  posterior means", "likelihood", "per eval", "accept");
    for lik in [Likelihood::Whittle, Likelihood::Gaussian, Likelihood::Kalman] {
        let post = Posterior::new(&data.y, &x, &spec, lik, Prior::default())?;
        let t = Instant::now();
        for _ in 0..10 {
            post.log_likelihood(&truth)?;
        }
        let per_eval = t.elapsed() / 10;
        let warm = WarmStart { point: map.point.clone(), proposal_cov: map.proposal_cov.clone() };
        let res = fit_posterior(&post, &settings, Some(warm))?;
        let means: Vec<String> = spec
            .param_names()
            .iter()
            .zip(res.natural_mean())
            .map(|(n, m)| format!("{n}={m:.3}"))
            .collect();
        println!("{lik:<10} {per_eval:>12.2?}  {:>7.3}  {}", res.chain.accept_rate, means.join(" "));
    }
    println!("truth: phi=(0.5, -0.248, 0.1) psi1=0.2 sigma2=2 beta1=3");
    Ok(())
}
