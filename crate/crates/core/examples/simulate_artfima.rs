//! Simulates semi-long-memory ARTFIMA errors with each generator and compares the
//! sample autocorrelations against the model's.

use semilong::model::{ModelSpec, ParamVector};
use semilong::simulate::{simulate_error_process, tempered_frac_weights, truncation_length, SimConfig, SimMethod};
use semilong::spectral::autocovariance;

fn sample_acf(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let ck: f64 = (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum();
    ck / c0
}

fn main() -> semilong::Result<()> {
    let spec = ModelSpec::artfima(0, 0, 0);
    let theta = ParamVector::white_noise(1.0).with_memory(0.45, 0.02);
    let (d, lambda) = (theta.d, theta.lambda);
    println!("first tempered weights: {:?}", tempered_frac_weights(-d, lambda, 5));
    println!("inverse filter truncated at {} lags", truncation_length(d, lambda));
    let gamma = autocovariance(&theta, &spec, 200)?;
    let lags = [1, 5, 20, 50, 200];
    print!("{:<10}", "model");
    for k in lags {
        print!(" {:>8.4}", gamma[k] / gamma[0]);
    }
    println!();
    for method in [SimMethod::Truncated, SimMethod::Circulant, SimMethod::Exact] {
        let len = if method == SimMethod::Exact { 4000 } else { 50_000 };
        let cfg = SimConfig::new(spec.clone(), theta.clone(), len, 7).with_method(method);
        let eta = simulate_error_process(&cfg)?;
        print!("{:<10}", format!("{method:?}"));
        for k in lags {
            print!(" {:>8.4}", sample_acf(&eta, k));
        }
        println!("   (T = {len})");
    }
    Ok(())
}
