//! Order selection by DIC on a simulated ARMA(3,1)-error regression.

use semilong::fit::{fit, FitSettings, Likelihood, Posterior};
use semilong::forecast::{dic, thin};
use semilong::model::{ModelSpec, ParamVector, Prior};
use semilong::sampler::{MapSettings, SamplerSettings};
use semilong::simulate::{simulate_dlr, RegressorProcess, SimConfig};

fn main() -> semilong::Result<()> {
    let truth = ParamVector::arma(&[0.5, -0.248, 0.1], &[0.2], 2.0).with_beta(&[3.0]);
    let len = 5001;
    let x = vec![RegressorProcess { phi: vec![0.6, -0.3], psi: vec![0.5, 0.2], sigma2: 0.0233 }.simulate(len, 1)?];
    let data = simulate_dlr(&SimConfig::new(ModelSpec::arma(3, 1, 1), truth, len, 2), &x)?;
    let settings = FitSettings {
        sampler: SamplerSettings { n_iter: 5000, burn_in: 1500, ..Default::default() },
        map: MapSettings { restarts: 4, ..Default::default() },
        ..Default::default()
    };
    println!("(p,q)   DIC          p_D     mean deviance");
    for (p, q) in [(1, 0), (2, 1), (3, 1), (3, 2), (5, 1)] {
        let spec = ModelSpec::arma(p, q, 1);
        let res = fit(&data.y, &data.x, &spec, &settings)?;
        let post = Posterior::new(&data.y, &data.x, &spec, Likelihood::Whittle, Prior::default())?;
        let d = dic(&thin(&res.natural_draws(), 1000), &spec, |t| post.log_likelihood(t))?;
        println!("({p},{q})   {:<12.2} {:<7.2} {:.2}", d.dic, d.p_d, d.mean_deviance);
    }
    Ok(())
}
