//! Posterior of a dynamic linear regression and the MAP-then-MCMC fitting pipeline.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{gaussian_loglik, kalman_loglik};
use crate::model::{to_natural, ErrorFamily, ModelSpec, ParamVector, Prior, UnconstrainedParams};
use crate::sampler::{find_map, run_adaptive_mh, ChainResult, MapResult, MapSettings, SamplerSettings};
use crate::stats;
use crate::whittle::{conditional_beta, precompute_dft, whittle_loglik, DftCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    #[default]
    Whittle,
    Gaussian,
    Kalman,
}

impl std::fmt::Display for Likelihood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Likelihood::Whittle => "whittle",
            Likelihood::Gaussian => "gaussian",
            Likelihood::Kalman => "kalman",
        })
    }
}

impl std::str::FromStr for Likelihood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "whittle" => Ok(Likelihood::Whittle),
            "gaussian" => Ok(Likelihood::Gaussian),
            "kalman" => Ok(Likelihood::Kalman),
            other => Err(Error::Config(format!("unknown likelihood {other:?}"))),
        }
    }
}

/// Log posterior in unconstrained coordinates for one dataset and model.
///
/// The response and regressors are demeaned once; the time-domain likelihoods use
/// the same demeaned pseudo data as the Whittle likelihood.
#[derive(Debug, Clone)]
pub struct Posterior {
    spec: ModelSpec,
    prior: Prior,
    likelihood: Likelihood,
    cache: DftCache,
    y_centered: Vec<f64>,
    x_centered: Vec<Vec<f64>>,
}

impl Posterior {
    pub fn new(y: &[f64], x: &[Vec<f64>], spec: &ModelSpec, likelihood: Likelihood, prior: Prior) -> Result<Self> {
        spec.validate()?;
        if spec.m != x.len() {
            return Err(Error::domain(format!("model expects {} regressors, data has {}", spec.m, x.len())));
        }
        if likelihood == Likelihood::Kalman && spec.family != ErrorFamily::Arma {
            return Err(Error::UnsupportedFamily {
                family: spec.family,
                reason: "the Kalman filter likelihood needs a finite state space (ARMA errors)",
            });
        }
        let cache = precompute_dft(y, x)?;
        let y_centered = y.iter().map(|v| v - cache.y_mean()).collect();
        let x_centered = x
            .iter()
            .zip(cache.x_means())
            .map(|(col, m)| col.iter().map(|v| v - m).collect())
            .collect();
        Ok(Self { spec: spec.clone(), prior, likelihood, cache, y_centered, x_centered })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn likelihood(&self) -> Likelihood {
        self.likelihood
    }

    pub fn cache(&self) -> &DftCache {
        &self.cache
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Demeaned `y - X beta`.
    pub fn pseudo_data(&self, beta: &[f64]) -> Vec<f64> {
        let mut z = self.y_centered.clone();
        for (col, b) in self.x_centered.iter().zip(beta) {
            for (zt, xt) in z.iter_mut().zip(col) {
                *zt -= b * xt;
            }
        }
        z
    }

    pub fn log_likelihood(&self, theta: &ParamVector) -> Result<f64> {
        match self.likelihood {
            Likelihood::Whittle => whittle_loglik(&self.cache, theta, &self.spec),
            Likelihood::Gaussian => gaussian_loglik(&self.pseudo_data(&theta.beta), theta, &self.spec),
            Likelihood::Kalman => kalman_loglik(&self.pseudo_data(&theta.beta), theta, &self.spec),
        }
    }

    pub fn natural(&self, u: &[f64]) -> Result<ParamVector> {
        Ok(to_natural(&UnconstrainedParams::from_slice(u, &self.spec)?, &self.spec))
    }

    /// Log posterior density up to a constant; `-inf` wherever the likelihood fails.
    pub fn log_density(&self, u: &[f64]) -> f64 {
        let Ok(params) = UnconstrainedParams::from_slice(u, &self.spec) else {
            return f64::NEG_INFINITY;
        };
        let lp = self.prior.log_density(&params, &self.spec);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        let theta = to_natural(&params, &self.spec);
        match self.log_likelihood(&theta) {
            Ok(ll) if ll.is_finite() => lp + ll,
            _ => f64::NEG_INFINITY,
        }
    }

    /// Starting point from the data: zero partial autocorrelations and memory, the
    /// least-squares `beta` and the residual variance.
    pub fn initial_point(&self) -> Vec<f64> {
        let mut u = UnconstrainedParams::zeros(&self.spec);
        let white = ParamVector::white_noise(1.0).with_beta(&vec![0.0; self.spec.m]);
        let white_spec = ModelSpec::arma(0, 0, self.spec.m);
        if let Ok(beta) = conditional_beta(&self.cache, &white, &white_spec, f64::INFINITY) {
            u.beta = beta;
        }
        let resid = self.pseudo_data(&u.beta);
        let var = stats::variance(&resid);
        if var.is_finite() && var > 0.0 {
            u.log_sigma2 = var.ln();
        }
        u.to_vec(&self.spec)
    }

    /// Random start: partial autocorrelations and `d` from their priors, the
    /// unbounded coordinates jittered around [`Posterior::initial_point`].
    pub fn draw_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let base = UnconstrainedParams::from_slice(&self.initial_point(), &self.spec).expect("consistent shape");
        let mut u = base.clone();
        let mut pacf = |v: &mut Vec<f64>| {
            for x in v.iter_mut() {
                let r: f64 = rng.random_range(-0.95..0.95);
                *x = r.atanh();
            }
        };
        pacf(&mut u.phi_tilde);
        pacf(&mut u.psi_tilde);
        pacf(&mut u.seasonal_phi_tilde);
        pacf(&mut u.seasonal_psi_tilde);
        let mut normal = || -> f64 { StandardNormal.sample(rng) };
        if self.spec.family.has_memory() {
            u.d_raw = normal() * self.prior.d_var.sqrt();
        }
        if self.spec.family.has_tempering() {
            u.log_lambda = normal();
        }
        u.log_sigma2 += normal();
        for b in u.beta.iter_mut() {
            *b += normal();
        }
        u.to_vec(&self.spec)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    pub likelihood: Likelihood,
    pub prior: Prior,
    pub sampler: SamplerSettings,
    pub map: MapSettings,
}

/// Where the chain starts and which proposal covariance it starts with.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub point: Vec<f64>,
    pub proposal_cov: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub likelihood: Likelihood,
    pub map_point: Vec<f64>,
    pub map_log_post: f64,
    pub chain: ChainResult,
}

impl FitResult {
    /// Draws mapped to natural parameters.
    pub fn natural_draws(&self) -> Vec<ParamVector> {
        self.chain
            .draws
            .iter()
            .map(|u| to_natural(&UnconstrainedParams::from_slice(u, &self.spec).expect("shape"), &self.spec))
            .collect()
    }

    /// Posterior mean of the natural parameter vector.
    pub fn natural_mean(&self) -> Vec<f64> {
        natural_mean(&self.natural_draws(), &self.spec)
    }

    pub fn unconstrained_mean(&self) -> Vec<f64> {
        let n = self.chain.draws.len() as f64;
        let dim = self.chain.dim();
        (0..dim).map(|j| self.chain.draws.iter().map(|d| d[j]).sum::<f64>() / n).collect()
    }
}

pub fn natural_mean(draws: &[ParamVector], spec: &ModelSpec) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = draws.iter().map(|t| t.to_vec(spec)).collect();
    let n = rows.len() as f64;
    (0..rows.first().map_or(0, |r| r.len()))
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect()
}

impl MapSettings {
    fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Posterior mode search from the data-driven start plus random restarts.
pub fn posterior_map(post: &Posterior, settings: &MapSettings) -> Result<MapResult> {
    let lp = |u: &[f64]| post.log_density(u);
    find_map(&lp, &[post.initial_point()], settings, |rng| post.draw_start(rng))
        .map_err(|e| e.within("sampler", "posterior mode search"))
}

/// MAP search followed by adaptive MCMC, or MCMC only when `warm` is given.
pub fn fit_posterior(post: &Posterior, settings: &FitSettings, warm: Option<WarmStart>) -> Result<FitResult> {
    let (start, map_log_post) = match warm {
        Some(w) => {
            let lp = post.log_density(&w.point);
            (w, lp)
        }
        None => {
            let map = posterior_map(post, &settings.map.with_seed(settings.sampler.seed))?;
            (WarmStart { point: map.point, proposal_cov: map.proposal_cov }, map.log_post)
        }
    };
    let lp = |u: &[f64]| post.log_density(u);
    let chain = run_adaptive_mh(&lp, &start.point, &start.proposal_cov, &settings.sampler)
        .map_err(|e| e.within("sampler", "adaptive Metropolis-Hastings"))?;
    Ok(FitResult {
        spec: post.spec().clone(),
        likelihood: post.likelihood(),
        map_point: start.point,
        map_log_post,
        chain,
    })
}

/// Builds the posterior for `(y, X)` and fits it.
pub fn fit(y: &[f64], x: &[Vec<f64>], spec: &ModelSpec, settings: &FitSettings) -> Result<FitResult> {
    let post = Posterior::new(y, x, spec, settings.likelihood, settings.prior)?;
    fit_posterior(&post, settings, None)
}
