//! Adaptive random-walk Metropolis-Hastings.
//!
//! Proposals are `x + sqrt(c) L xi` with `L L' = Sigma`. After `adapt_start`
//! iterations `Sigma` tracks the running covariance of the chain plus `eps I`, and
//! `log c` follows a Robbins-Monro recursion towards the target acceptance rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ess::{effective_sample_size, Ess};
use crate::error::{Error, Result};
use crate::linalg;

const MIN_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    /// Total iterations, burn-in included.
    pub n_iter: usize,
    pub burn_in: usize,
    pub target_accept: f64,
    pub adapt_start: usize,
    pub rm_step_scale: f64,
    pub seed: u64,
    pub regularization: f64,
    /// Turns both covariance and scale adaptation off.
    pub adapt: bool,
    /// Initial `c`; `2.38^2 / dim` when absent.
    pub initial_scale: Option<f64>,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            burn_in: 3_000,
            target_accept: 0.234,
            adapt_start: 200,
            rm_step_scale: 1.0,
            seed: 0,
            regularization: 1e-10,
            adapt: true,
            initial_scale: None,
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iter {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Config(format!("target_accept {} not in (0, 1)", self.target_accept)));
        }
        if !(self.rm_step_scale > 0.0) || !(self.regularization >= 0.0) {
            return Err(Error::Config("rm_step_scale must be positive, regularization non-negative".into()));
        }
        if let Some(c) = self.initial_scale {
            if !(c >= 0.0) {
                return Err(Error::Config(format!("initial_scale {c} must be non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainResult {
    /// Kept draws in unconstrained coordinates, one row per iteration after burn-in.
    pub draws: Vec<Vec<f64>>,
    pub log_post: Vec<f64>,
    /// Acceptance rate over the kept iterations.
    pub accept_rate: f64,
    /// Row-major `dim x dim`.
    pub proposal_cov_final: Vec<f64>,
    pub scale_final: f64,
    pub ess: Vec<Ess>,
}

impl ChainResult {
    pub fn dim(&self) -> usize {
        self.draws.first().map_or(0, |d| d.len())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[j]).collect()
    }
}

/// What happened in one iteration; enough to replay the accept decision.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub proposal: Vec<f64>,
    pub proposal_log_post: f64,
    pub log_u: f64,
    pub log_alpha: f64,
    pub accepted: bool,
}

pub struct AdaptiveMetropolis<'a, F: ?Sized> {
    log_post: &'a F,
    settings: SamplerSettings,
    rng: ChaCha8Rng,
    x: Vec<f64>,
    lp: f64,
    cov: Vec<f64>,
    chol: Vec<f64>,
    log_scale: f64,
    // running moments of visited states
    mean: Vec<f64>,
    comoment: Vec<f64>,
    seen: usize,
    iter: usize,
}

impl<'a, F> AdaptiveMetropolis<'a, F>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    /// `init_cov` is the starting proposal covariance (row-major).
    pub fn new(
        log_post: &'a F,
        init: &[f64],
        init_cov: &[f64],
        settings: &SamplerSettings,
        chain_index: u64,
    ) -> Result<Self> {
        settings.validate()?;
        let dim = init.len();
        if dim == 0 {
            return Err(Error::domain("sampler needs at least one dimension"));
        }
        if init_cov.len() != dim * dim {
            return Err(Error::domain("initial proposal covariance has the wrong shape"));
        }
        let lp = log_post(init);
        if !lp.is_finite() {
            return Err(Error::eval(format!("log posterior is {lp} at the initial point")));
        }
        let chol = linalg::cholesky(init_cov, dim)
            .ok_or_else(|| Error::domain("initial proposal covariance is not positive definite"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(chain_index);
        let c0 = settings.initial_scale.unwrap_or(2.38 * 2.38 / dim as f64);
        Ok(Self {
            log_post,
            settings: settings.clone(),
            rng,
            x: init.to_vec(),
            lp,
            cov: init_cov.to_vec(),
            chol,
            log_scale: c0.ln(),
            mean: init.to_vec(),
            comoment: vec![0.0; dim * dim],
            seen: 1,
            iter: 0,
        })
    }

    pub fn state(&self) -> (&[f64], f64) {
        (&self.x, self.lp)
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn proposal_cov(&self) -> &[f64] {
        &self.cov
    }

    pub fn step(&mut self) -> StepRecord {
        let dim = self.x.len();
        self.iter += 1;
        let xi: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut self.rng)).collect();
        let shift = linalg::lower_mul(&self.chol, dim, &xi);
        let sd = self.log_scale.exp().sqrt();
        let proposal: Vec<f64> = self.x.iter().zip(&shift).map(|(x, s)| x + sd * s).collect();
        let u: f64 = self.rng.random();
        let log_u = u.ln();
        let proposal_lp = if proposal.iter().all(|v| v.is_finite()) {
            (self.log_post)(&proposal)
        } else {
            f64::NEG_INFINITY
        };
        let log_alpha = if proposal_lp.is_finite() { (proposal_lp - self.lp).min(0.0) } else { f64::NEG_INFINITY };
        let accepted = log_u < log_alpha;
        if accepted {
            self.x.clone_from(&proposal);
            self.lp = proposal_lp;
        }
        if self.settings.adapt {
            self.adapt(log_alpha.exp());
        }
        StepRecord { proposal, proposal_log_post: proposal_lp, log_u, log_alpha, accepted }
    }

    fn adapt(&mut self, alpha: f64) {
        let dim = self.x.len();
        let s = &self.settings;
        let j = self.iter;
        if j > s.adapt_start {
            let gain = s.rm_step_scale / (j - s.adapt_start) as f64;
            self.log_scale = (self.log_scale + gain * (alpha - s.target_accept)).max(MIN_SCALE.ln());
        }

        // Welford update of the state moments
        self.seen += 1;
        let n = self.seen as f64;
        let delta: Vec<f64> = self.x.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        for a in 0..dim {
            let after = self.x[a] - self.mean[a];
            for b in 0..dim {
                self.comoment[a * dim + b] += after * delta[b];
            }
        }
        if j >= s.adapt_start && self.seen > dim + 1 {
            let mut cov: Vec<f64> = self.comoment.iter().map(|v| v / (n - 1.0)).collect();
            for a in 0..dim {
                for b in 0..a {
                    let v = 0.5 * (cov[a * dim + b] + cov[b * dim + a]);
                    cov[a * dim + b] = v;
                    cov[b * dim + a] = v;
                }
                cov[a * dim + a] += s.regularization;
            }
            if let Some(chol) = linalg::cholesky(&cov, dim) {
                self.cov = cov;
                self.chol = chol;
            }
        }
    }
}

/// Runs one adaptive chain from `init` and returns the kept draws.
pub fn run_adaptive_mh<F>(
    log_post: &F,
    init: &[f64],
    init_cov: &[f64],
    settings: &SamplerSettings,
) -> Result<ChainResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    run_chain(log_post, init, init_cov, settings, 0)
}

fn run_chain<F>(
    log_post: &F,
    init: &[f64],
    init_cov: &[f64],
    settings: &SamplerSettings,
    chain_index: u64,
) -> Result<ChainResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut sampler = AdaptiveMetropolis::new(log_post, init, init_cov, settings, chain_index)?;
    let kept = settings.n_iter - settings.burn_in;
    let mut draws = Vec::with_capacity(kept);
    let mut lps = Vec::with_capacity(kept);
    let mut accepted = 0usize;
    for i in 0..settings.n_iter {
        let rec = sampler.step();
        if i >= settings.burn_in {
            accepted += rec.accepted as usize;
            let (x, lp) = sampler.state();
            draws.push(x.to_vec());
            lps.push(lp);
        }
    }
    let dim = init.len();
    let ess = (0..dim)
        .map(|j| {
            let col: Vec<f64> = draws.iter().map(|d: &Vec<f64>| d[j]).collect();
            effective_sample_size(&col).unwrap_or(Ess { value: f64::NAN, degenerate: true })
        })
        .collect();
    Ok(ChainResult {
        draws,
        log_post: lps,
        accept_rate: accepted as f64 / kept as f64,
        proposal_cov_final: sampler.proposal_cov().to_vec(),
        scale_final: sampler.scale(),
        ess,
    })
}

/// Independent chains on a shared target, one RNG stream per chain index.
pub fn run_chains<F>(
    log_post: &F,
    inits: &[Vec<f64>],
    init_cov: &[f64],
    settings: &SamplerSettings,
) -> Result<Vec<ChainResult>>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    inits
        .par_iter()
        .enumerate()
        .map(|(i, init)| run_chain(log_post, init, init_cov, settings, i as u64))
        .collect()
}
