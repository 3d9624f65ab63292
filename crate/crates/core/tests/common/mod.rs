//! Oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `ln |Gamma(k + d)|` and its sign. Negative arguments go through reflection with
/// the sine taken on `d - round(d)` directly, so arguments near poles keep full
/// relative precision.
pub fn signed_ln_gamma(k: i64, d: f64) -> (f64, f64) {
    let x = k as f64 + d;
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    let n = k + d.round() as i64;
    let r = d - d.round();
    let sin = if n % 2 == 0 { (PI * r).sin() } else { -(PI * r).sin() };
    (PI.ln() - sin.abs().ln() - ln_gamma(1.0 - x), sin.signum())
}

/// Signed `(-1)^j Gamma(1+d) / (Gamma(1+d-j) j!) e^{-lambda j}`.
pub fn gamma_weight(d: f64, lambda: f64, j: usize) -> f64 {
    let (ln_top, sign_top) = signed_ln_gamma(1, d);
    let (ln_bot, sign_bot) = signed_ln_gamma(1 - j as i64, d);
    let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
    parity * sign_top * sign_bot * (ln_top - ln_bot - ln_gamma(j as f64 + 1.0) - lambda * j as f64).exp()
}

/// Autocovariance of fractionally integrated noise in closed form.
pub fn hosking(d: f64, sigma2: f64, max_lag: usize) -> Vec<f64> {
    let g0 = sigma2 * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
    let mut out = vec![g0];
    for k in 1..=max_lag {
        let prev = out[k - 1];
        out.push(prev * (k as f64 - 1.0 + d) / (k as f64 - d));
    }
    out
}
