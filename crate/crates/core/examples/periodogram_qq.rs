//! Distribution of periodogram-to-spectrum ratios at the lowest Fourier
//! frequencies. Under ARTFIMA errors they follow the unit exponential; under ARFIMA
//! errors close to the non-stationary boundary they do not.

use semilong::model::{ModelSpec, ParamVector};
use semilong::simulate::{periodogram_ratio_experiment, RatioSettings, RegressorProcess, SimConfig};

fn main() -> semilong::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(500);
    let len = 1001;
    let x = vec![RegressorProcess { phi: vec![0.6, -0.3], psi: vec![0.5, 0.2], sigma2: 1.0 }.simulate(len, 11)?];
    let cases = [
        (
            "ARTFIMA",
            ModelSpec::artfima(2, 0, 1),
            ParamVector::arma(&[0.742, 0.227], &[], 1.0).with_memory(2.139, 0.616).with_beta(&[0.1]),
        ),
        (
            "ARFIMA",
            ModelSpec::arfima(2, 0, 1),
            ParamVector::arma(&[1.466, -0.525], &[], 1.0).with_memory(0.493, 0.0).with_beta(&[0.1]),
        ),
    ];
    let settings = RatioSettings { n_reps: reps, ..Default::default() };
    for (name, spec, theta) in cases {
        let res = periodogram_ratio_experiment(&SimConfig::new(spec, theta, len, 5), &x, &settings)?;
        println!("{name}, {reps} replicates");
        for (k, (w, ks)) in res.omegas.iter().zip(&res.ks).enumerate() {
            let mean = res.ratios[k].iter().sum::<f64>() / reps as f64;
            println!("  w_{} = {w:.5}: mean ratio {mean:.3}, KS D = {:.4}, p = {:.2e}", k + 1, ks.statistic, ks.p_value);
        }
    }
    Ok(())
}
