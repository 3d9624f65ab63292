//! Posterior-predictive forecasts, forecast scores, DIC and rolling-origin evaluation.
//!
//! Given one parameter draw the future errors are Gaussian conditional on the last
//! `W` pseudo-data values. One Durbin-Levinson pass over `W + H` lags yields every
//! horizon at once: conditional means by recursive prediction and conditional
//! covariances from the future block of the innovations factor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{dot_rev, levinson_update};
use crate::fit::{fit_posterior, natural_mean, FitResult, FitSettings, Posterior, WarmStart};
use crate::model::{ModelSpec, ParamVector};
use crate::spectral::{autocovariance, is_white_noise};
use crate::stats::{log_sum_exp, normal_log_pdf, quantile_sorted, sorted};

pub const DEFAULT_WINDOW: usize = 2048;

/// Conditional moments of `eta_{T+1..=T+H}` for one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPath {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Conditional mean and variance of `eta_{T+h}` given the last `window` values of `z`.
pub fn conditional_forecast(
    z: &[f64],
    theta: &ParamVector,
    spec: &ModelSpec,
    h: usize,
    window: usize,
) -> Result<(f64, f64)> {
    let path = conditional_forecast_path(z, theta, spec, h, window)?;
    Ok((path.means[h - 1], path.variances[h - 1]))
}

/// Conditional moments for horizons `1..=h_max` from a single recursion.
pub fn conditional_forecast_path(
    z: &[f64],
    theta: &ParamVector,
    spec: &ModelSpec,
    h_max: usize,
    window: usize,
) -> Result<ConditionalPath> {
    if h_max == 0 {
        return Err(Error::domain("forecast horizon must be at least 1"));
    }
    if window == 0 || window > z.len() {
        return Err(Error::domain(format!("window {window} must lie in 1..={}", z.len())));
    }
    if is_white_noise(theta, spec) {
        return Ok(ConditionalPath { means: vec![0.0; h_max], variances: vec![theta.sigma2; h_max] });
    }
    let past = &z[z.len() - window..];
    let n = window + h_max;
    let gamma = autocovariance(theta, spec, n)?;

    // Durbin-Levinson; keep the coefficient vectors that predict the future block.
    let mut coef: Vec<f64> = Vec::with_capacity(n);
    let mut v = gamma[0];
    let mut future_coefs: Vec<Vec<f64>> = Vec::with_capacity(h_max);
    let mut future_vars: Vec<f64> = Vec::with_capacity(h_max);
    for t in 1..n {
        let k = (gamma[t] - dot_rev(&coef, &gamma[1..t])) / v;
        levinson_update(&mut coef, k);
        v *= 1.0 - k * k;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::eval(format!(
                "forecast covariance is not positive definite: prediction variance {v} at lag {t}"
            )));
        }
        if t >= window {
            future_coefs.push(coef.clone());
            future_vars.push(v);
        }
    }

    // means: x_hat_{W+i} = sum_j coef_{W+i, j} x_{W+i-j}, with future x replaced by predictions
    let mut extended: Vec<f64> = past.to_vec();
    for c in &future_coefs {
        let t = extended.len();
        let pred: f64 = c.iter().enumerate().map(|(j, a)| a * extended[t - 1 - j]).sum();
        extended.push(pred);
    }
    let means = extended[window..].to_vec();

    // x_F = B e_F + ..., B = inverse of the unit lower-triangular future block of A
    let mut b = vec![0.0; h_max * h_max];
    for i in 0..h_max {
        b[i * h_max + i] = 1.0;
        for j in 0..i {
            // A[i][l] = -coef_{W+i}[i - l - 1] for l < i; B = A^{-1} by forward substitution
            let mut s = 0.0;
            for l in j..i {
                s += future_coefs[i][i - l - 1] * b[l * h_max + j];
            }
            b[i * h_max + j] = s;
        }
    }
    let variances = (0..h_max)
        .map(|i| (0..=i).map(|j| b[i * h_max + j].powi(2) * future_vars[j]).sum())
        .collect();
    Ok(ConditionalPath { means, variances })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSettings {
    pub h_max: usize,
    /// Posterior draws used per forecast origin.
    pub n_draws: usize,
    pub window: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        Self { h_max: 15, n_draws: 900, window: DEFAULT_WINDOW, level: 0.95, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ForecastTable {
    pub horizons: Vec<usize>,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    /// `draws[h][m]`: one predictive draw per posterior draw.
    pub draws: Vec<Vec<f64>>,
    /// Conditional Gaussian mean and variance behind each draw.
    pub cond_means: Vec<Vec<f64>>,
    pub cond_vars: Vec<Vec<f64>>,
}

impl ForecastTable {
    pub fn horizon_count(&self) -> usize {
        self.horizons.len()
    }

    /// `log p(y | data)` at horizon index `i` from the Gaussian mixture over draws.
    pub fn log_predictive_density(&self, i: usize, y: f64) -> f64 {
        let terms: Vec<f64> = self.cond_means[i]
            .iter()
            .zip(&self.cond_vars[i])
            .map(|(m, v)| normal_log_pdf(y, *m, *v))
            .collect();
        log_sum_exp(&terms) - (terms.len() as f64).ln()
    }
}

/// Every `n / m`-th element, `m` of them.
pub fn thin<T: Clone>(items: &[T], m: usize) -> Vec<T> {
    let n = items.len();
    if m >= n {
        return items.to_vec();
    }
    (0..m).map(|i| items[i * n / m].clone()).collect()
}

/// Posterior-predictive forecasts of `y_{T+1..=T+H}` given known future regressors.
///
/// `x_future` holds one column per regressor with at least `h_max` entries.
pub fn posterior_predictive(
    y: &[f64],
    x: &[Vec<f64>],
    x_future: &[Vec<f64>],
    draws: &[ParamVector],
    spec: &ModelSpec,
    settings: &ForecastSettings,
) -> Result<ForecastTable> {
    if draws.is_empty() {
        return Err(Error::domain("no posterior draws to forecast from"));
    }
    if x.len() != spec.m || x_future.len() != spec.m {
        return Err(Error::domain(format!(
            "model has {} regressors; got {} past and {} future columns",
            spec.m,
            x.len(),
            x_future.len()
        )));
    }
    let h_max = settings.h_max;
    if let Some(col) = x_future.iter().find(|c| c.len() < h_max) {
        return Err(Error::domain(format!("future regressor has {} rows, need {h_max}", col.len())));
    }
    if let Some(col) = x.iter().find(|c| c.len() != y.len()) {
        return Err(Error::domain(format!("regressor has {} rows, response has {}", col.len(), y.len())));
    }
    if y.len() < 2 {
        return Err(Error::domain("need at least two observations to forecast"));
    }
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let x_means: Vec<f64> = x.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let window = settings.window.min(y.len());
    let chosen = thin(draws, settings.n_draws.max(1));

    let per_draw: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = chosen
        .par_iter()
        .enumerate()
        .map(|(m, theta)| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
            let tail_start = y.len() - window;
            let z: Vec<f64> = (tail_start..y.len())
                .map(|t| {
                    y[t] - y_mean
                        - x.iter().zip(&x_means).zip(&theta.beta).map(|((c, xm), b)| b * (c[t] - xm)).sum::<f64>()
                })
                .collect();
            let path = conditional_forecast_path(&z, theta, spec, h_max, window)?;
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(m as u64);
            let mut means = Vec::with_capacity(h_max);
            let mut draws = Vec::with_capacity(h_max);
            for h in 0..h_max {
                let reg: f64 = x_future
                    .iter()
                    .zip(&x_means)
                    .zip(&theta.beta)
                    .map(|((c, xm), b)| b * (c[h] - xm))
                    .sum();
                let mean = y_mean + reg + path.means[h];
                let e: f64 = StandardNormal.sample(&mut rng);
                means.push(mean);
                draws.push(mean + path.variances[h].sqrt() * e);
            }
            Ok((means, path.variances, draws))
        })
        .collect::<Result<_>>()?;

    let transpose = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<Vec<f64>> {
        (0..h_max).map(|h| per_draw.iter().map(|d| pick(d)[h]).collect()).collect()
    };
    let cond_means = transpose(&|d| &d.0);
    let cond_vars = transpose(&|d| &d.1);
    let draws_h = transpose(&|d| &d.2);
    let alpha = (1.0 - settings.level) / 2.0;
    let mut point = Vec::with_capacity(h_max);
    let mut lower = Vec::with_capacity(h_max);
    let mut upper = Vec::with_capacity(h_max);
    for h in 0..h_max {
        let p = cond_means[h].iter().sum::<f64>() / cond_means[h].len() as f64;
        let s = sorted(&draws_h[h]);
        point.push(p);
        lower.push(quantile_sorted(&s, alpha).min(p));
        upper.push(quantile_sorted(&s, 1.0 - alpha).max(p));
    }
    Ok(ForecastTable {
        horizons: (1..=h_max).collect(),
        point,
        lower,
        upper,
        level: settings.level,
        draws: draws_h,
        cond_means,
        cond_vars,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpdsSummary {
    /// Negated mean log predictive density over the finite entries.
    pub neg_lpds: f64,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Negative log predictive density score from per-point log densities.
pub fn lpds(log_densities: &[f64]) -> Result<LpdsSummary> {
    let finite: Vec<f64> = log_densities.iter().copied().filter(|v| v.is_finite()).collect();
    let excluded = log_densities.len() - finite.len();
    if excluded > 0 {
        log::warn!("{excluded} non-finite predictive log densities excluded from the LPDS");
    }
    if finite.is_empty() {
        return Err(Error::domain("no finite predictive log densities"));
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    Ok(LpdsSummary { neg_lpds: -mean, n_used: finite.len(), n_excluded: excluded })
}

pub fn rmse(truths: &[f64], points: &[f64]) -> Result<f64> {
    if truths.is_empty() || truths.len() != points.len() {
        return Err(Error::domain(format!(
            "RMSE needs equal non-empty inputs, got {} and {}",
            truths.len(),
            points.len()
        )));
    }
    let mse = truths.iter().zip(points).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / truths.len() as f64;
    Ok(mse.sqrt())
}

/// `mean|X - y| - (1/2) mean|X - X'|` over the empirical distribution of the draws.
pub fn crps(draws: &[f64], truth: f64) -> Result<f64> {
    let m = draws.len();
    if m < 2 {
        return Err(Error::domain(format!("CRPS needs at least 2 draws, got {m}")));
    }
    let s = sorted(draws);
    let mf = m as f64;
    let abs_err = s.iter().map(|x| (x - truth).abs()).sum::<f64>() / mf;
    // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - m + 1) x_(i)
    let pair: f64 = s.iter().enumerate().map(|(i, x)| (2.0 * i as f64 - mf + 1.0) * x).sum::<f64>() * 2.0;
    Ok((abs_err - pair / (2.0 * mf * mf)).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DicResult {
    pub dic: f64,
    pub p_d: f64,
    pub mean_deviance: f64,
    /// Natural-space posterior mean at which the plug-in deviance is evaluated.
    pub theta_star: Vec<f64>,
    pub theta_star_space: &'static str,
}

/// Deviance information criterion with `theta*` the natural-space posterior mean.
pub fn dic(
    draws: &[ParamVector],
    spec: &ModelSpec,
    loglik: impl Fn(&ParamVector) -> Result<f64> + Sync,
) -> Result<DicResult> {
    if draws.is_empty() {
        return Err(Error::domain("DIC needs at least one draw"));
    }
    let deviances: Vec<f64> = draws
        .par_iter()
        .map(|t| loglik(t).map(|l| -2.0 * l))
        .collect::<Result<_>>()?;
    let mean_deviance = deviances.iter().sum::<f64>() / deviances.len() as f64;
    let star = natural_mean(draws, spec);
    let theta_star = ParamVector::from_slice(&star, spec)?;
    let at_star = loglik(&theta_star)
        .map_err(|e| e.within("forecast-eval", "log-likelihood at the posterior mean"))?;
    if !at_star.is_finite() {
        return Err(Error::eval("log-likelihood at the posterior mean is not finite"));
    }
    let p_d = mean_deviance + 2.0 * at_star;
    Ok(DicResult {
        dic: mean_deviance + p_d,
        p_d,
        mean_deviance,
        theta_star: star,
        theta_star_space: "natural",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RefitPolicy {
    /// Re-estimate in every window; the natural choice for Whittle-based fits.
    #[default]
    EveryWindow,
    /// Estimate on the first window only and reuse the draws.
    Once,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub train_len: usize,
    /// Number of out-of-sample points.
    pub k: usize,
    pub refit: Option<RefitPolicy>,
    pub fit: FitSettings,
    pub forecast: ForecastSettings,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self { train_len: 5000, k: 100, refit: None, fit: FitSettings::default(), forecast: ForecastSettings::default() }
    }
}

impl CvSettings {
    /// Explicit policy, else fit-once for ARFIMA and refit otherwise.
    pub fn policy(&self, spec: &ModelSpec) -> RefitPolicy {
        self.refit.unwrap_or(if spec.family == crate::model::ErrorFamily::Arfima {
            RefitPolicy::Once
        } else {
            RefitPolicy::EveryWindow
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonMetrics {
    pub horizon: usize,
    pub n_points: usize,
    pub neg_lpds: f64,
    pub rmse: f64,
    pub crps: f64,
    pub n_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginScore {
    pub origin: usize,
    pub horizon: usize,
    pub truth: f64,
    pub point: f64,
    pub log_density: f64,
    pub crps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvResult {
    pub metrics: Vec<HorizonMetrics>,
    pub scores: Vec<OriginScore>,
    /// Windows whose fit or forecast failed, with the reason.
    pub skipped: Vec<(usize, String)>,
    pub policy: RefitPolicy,
}

fn slice_cols(x: &[Vec<f64>], from: usize, to: usize) -> Vec<Vec<f64>> {
    x.iter().map(|c| c[from..to].to_vec()).collect()
}

/// Rolling-origin evaluation: windows `[i, i + train_len)` for `i = 0..k`, each
/// forecasting up to `h_max` steps inside the `k` held-out points.
pub fn rolling_cv(y: &[f64], x: &[Vec<f64>], spec: &ModelSpec, settings: &CvSettings) -> Result<CvResult> {
    let (train, k, h_max) = (settings.train_len, settings.k, settings.forecast.h_max);
    if k == 0 || h_max == 0 {
        return Err(Error::domain("k and h_max must be positive"));
    }
    if train + k > y.len() {
        return Err(Error::domain(format!("train_len + k = {} exceeds the series length {}", train + k, y.len())));
    }
    if x.len() != spec.m || x.iter().any(|c| c.len() != y.len()) {
        return Err(Error::domain("regressors do not match the model or the response length"));
    }
    let policy = settings.policy(spec);
    let mut scores = Vec::new();
    let mut skipped = Vec::new();
    let mut previous: Option<FitResult> = None;
    for i in 0..k {
        let (yt, xt) = (&y[i..i + train], slice_cols(x, i, i + train));
        let horizons = h_max.min(k - i);
        let fitted = match (policy, &previous) {
            (RefitPolicy::Once, Some(prev)) => Ok(prev.clone()),
            _ => fit_window(yt, &xt, spec, settings, i, previous.as_ref()),
        };
        let fitted = match fitted {
            Ok(f) => f,
            Err(e) => {
                log::warn!("window {i}: fit failed, skipping: {e}");
                skipped.push((i, e.to_string()));
                continue;
            }
        };
        let xf = slice_cols(x, i + train, i + train + horizons);
        let fs = ForecastSettings { h_max: horizons, seed: settings.forecast.seed.wrapping_add(i as u64), ..settings.forecast.clone() };
        match posterior_predictive(yt, &xt, &xf, &fitted.natural_draws(), spec, &fs) {
            Ok(table) => {
                for h in 0..horizons {
                    let truth = y[i + train + h];
                    scores.push(OriginScore {
                        origin: i,
                        horizon: h + 1,
                        truth,
                        point: table.point[h],
                        log_density: table.log_predictive_density(h, truth),
                        crps: crps(&table.draws[h], truth)?,
                    });
                }
            }
            Err(e) => {
                log::warn!("window {i}: forecast failed, skipping: {e}");
                skipped.push((i, e.to_string()));
            }
        }
        previous = Some(fitted);
    }
    let mut metrics = Vec::with_capacity(h_max);
    for h in 1..=h_max {
        let rows: Vec<&OriginScore> = scores.iter().filter(|s| s.horizon == h).collect();
        if rows.is_empty() {
            continue;
        }
        let l = lpds(&rows.iter().map(|r| r.log_density).collect::<Vec<_>>())?;
        let truths: Vec<f64> = rows.iter().map(|r| r.truth).collect();
        let points: Vec<f64> = rows.iter().map(|r| r.point).collect();
        metrics.push(HorizonMetrics {
            horizon: h,
            n_points: rows.len(),
            neg_lpds: l.neg_lpds,
            rmse: rmse(&truths, &points)?,
            crps: rows.iter().map(|r| r.crps).sum::<f64>() / rows.len() as f64,
            n_excluded: l.n_excluded,
        });
    }
    Ok(CvResult { metrics, scores, skipped, policy })
}

fn fit_window(
    y: &[f64],
    x: &[Vec<f64>],
    spec: &ModelSpec,
    settings: &CvSettings,
    index: usize,
    previous: Option<&FitResult>,
) -> Result<FitResult> {
    let post = Posterior::new(y, x, spec, settings.fit.likelihood, settings.fit.prior)?;
    let mut fs = settings.fit.clone();
    fs.sampler.seed = settings.fit.sampler.seed.wrapping_add(index as u64);
    let warm = previous.and_then(|prev| {
        let point = prev.chain.draws.last()?.clone();
        if !post.log_density(&point).is_finite() {
            return None;
        }
        // carry the tuned proposal over, expressed relative to the default initial scale
        let dim = point.len() as f64;
        let rescale = prev.chain.scale_final / (2.38 * 2.38 / dim);
        let proposal_cov = prev.chain.proposal_cov_final.iter().map(|v| v * rescale).collect();
        Some(WarmStart { point, proposal_cov })
    });
    fit_posterior(&post, &fs, warm)
}
