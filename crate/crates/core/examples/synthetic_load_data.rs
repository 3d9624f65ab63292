//! Writes a half-hourly stand-in for an electricity-demand dataset: seasonal
//! ARTFIMA errors with period 48, a temperature regressor that acts with a
//! one-step lag and a humidity regressor that acts immediately. The CSV feeds the
//! `fit`, `forecast` and `evaluate` commands (see `configs/seasonal_load.toml`).
//!
//! `cargo run --example synthetic_load_data -- out.csv 17520`

use std::path::PathBuf;

use semilong::io::{write_dataset, Dataset};
use semilong::model::{ModelSpec, ParamVector};
use semilong::simulate::{simulate_error_process, RegressorProcess, SimConfig};

fn main() -> semilong::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "synthetic_load.csv".into()));
    let len: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(17_520);
    let spec = ModelSpec::artfima(2, 0, 2).with_seasonal(0, 1, 48);
    let theta = ParamVector::arma(&[0.6, 0.2], &[], 0.05)
        .with_memory(0.35, 0.1)
        .with_seasonal(&[], &[0.4])
        .with_beta(&[-0.8, 0.3]);
    let process = RegressorProcess { phi: vec![0.97], psi: vec![0.2], sigma2: 0.05 };
    let temp = process.simulate(len, 21)?;
    let humidity = process.simulate(len, 22)?;
    let eta = simulate_error_process(&SimConfig::new(spec, theta.clone(), len, 23))?;
    let y: Vec<f64> = (0..len)
        .map(|t| {
            let lagged = if t > 0 { temp[t - 1] } else { 0.0 };
            eta[t] + theta.beta[0] * lagged + theta.beta[1] * humidity[t]
        })
        .collect();
    let data = Dataset {
        time_index: (0..len).map(|t| format!("{}-{:02}", t / 48, t % 48)).collect(),
        y,
        x: vec![temp, humidity],
        y_name: "demand".into(),
        x_names: vec!["temp".into(), "humidity".into()],
        transform_log: vec![],
    };
    write_dataset(&path, &data)?;
    println!("wrote {} rows to {}", len, path.display());
    println!("fit with: data.y_column = \"demand\", data.x_columns = [\"temp\", \"humidity\"], data.lags = {{ temp = 1 }},");
    println!("          model = artfima p=2 q=0 seasonal_q=1 period=48 m=2");
    Ok(())
}
