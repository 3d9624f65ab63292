//! Rolling-origin evaluation: negative LPDS, RMSE and CRPS per horizon for a
//! correctly specified ARTFIMA model and a white-noise-error regression.

use semilong::fit::FitSettings;
use semilong::forecast::{rolling_cv, CvSettings, ForecastSettings};
use semilong::model::{ModelSpec, ParamVector};
use semilong::sampler::{MapSettings, SamplerSettings};
use semilong::simulate::{simulate_dlr, RegressorProcess, SimConfig};

fn main() -> semilong::Result<()> {
    let spec = ModelSpec::artfima(1, 0, 1);
    let truth = ParamVector::arma(&[0.3], &[], 1.0).with_memory(0.4, 0.05).with_beta(&[2.0]);
    let (train, k, h_max) = (1500, 20, 5);
    let len = train + k;
    let x = vec![RegressorProcess { phi: vec![0.8], psi: vec![], sigma2: 1.0 }.simulate(len, 3)?];
    let data = simulate_dlr(&SimConfig::new(spec.clone(), truth, len, 4), &x)?;
    let settings = CvSettings {
        train_len: train,
        k,
        refit: None,
        fit: FitSettings {
            sampler: SamplerSettings { n_iter: 2000, burn_in: 600, ..Default::default() },
            map: MapSettings { restarts: 2, ..Default::default() },
            ..Default::default()
        },
        forecast: ForecastSettings { h_max, n_draws: 200, window: 1024, ..Default::default() },
    };
    for (name, model) in [("ARTFIMA(1,0)", spec.clone()), ("white noise", ModelSpec::arma(0, 0, 1))] {
        let res = rolling_cv(&data.y, &data.x, &model, &settings)?;
        println!("{name} (skipped windows: {})", res.skipped.len());
        println!("  h  points  neg_LPDS    RMSE    CRPS");
        for m in &res.metrics {
            println!("  {:<2} {:>6}  {:>8.4} {:>7.4} {:>7.4}", m.horizon, m.n_points, m.neg_lpds, m.rmse, m.crps);
        }
    }
    Ok(())
}
