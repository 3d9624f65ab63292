//! Spectral densities and autocovariances of ARMA, ARFIMA and ARTFIMA errors.
//!
//! Shows how tempering caps the low-frequency peak that ARFIMA sends to infinity,
//! and how slowly each autocovariance decays.

use semilong::model::{ModelSpec, ParamVector};
use semilong::spectral::{autocovariance, spectral_density};

fn main() -> semilong::Result<()> {
    let cases = [
        ("ARMA(1,0)", ModelSpec::arma(1, 0, 0), ParamVector::arma(&[0.7], &[], 1.0)),
        ("ARFIMA(0,d,0)", ModelSpec::arfima(0, 0, 0), ParamVector::white_noise(1.0).with_memory(0.4, 0.0)),
        ("ARTFIMA(0,d,l,0)", ModelSpec::artfima(0, 0, 0), ParamVector::white_noise(1.0).with_memory(0.4, 0.05)),
    ];
    println!("{:<18} {:>12} {:>12} {:>12} {:>12}", "model", "f(0.001)", "f(0.1)", "f(1)", "f(pi)");
    for (name, spec, theta) in &cases {
        let f = |w: f64| spectral_density(w, theta, spec);
        println!(
            "{name:<18} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            f(0.001)?,
            f(0.1)?,
            f(1.0)?,
            f(std::f64::consts::PI)?
        );
    }
    println!();
    println!("{:<18} {:>12} {:>12} {:>12} {:>12}", "model", "rho(1)", "rho(10)", "rho(100)", "rho(1000)");
    for (name, spec, theta) in &cases {
        let g = autocovariance(theta, spec, 1000)?;
        let rho = |k: usize| g[k] / g[0];
        println!("{name:<18} {:>12.5} {:>12.5} {:>12.5} {:>12.2e}", rho(1), rho(10), rho(100), rho(1000));
    }
    Ok(())
}
