//! Synthetic data: error processes of every family, dynamic regression data and the
//! low-frequency periodogram-ratio experiment.
//!
//! The default route filters Gaussian noise through the MA polynomial, the truncated
//! inverse tempered-differencing filter and the AR recursion. For ARFIMA the
//! inverse filter is not absolutely summable and any truncation loses a large share
//! of the low-frequency power, so ARFIMA defaults to exact circulant embedding.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::model::{ErrorFamily, ModelSpec, ParamVector};
use crate::spectral::{autocovariance, spectral_density};
use crate::stats::{ks_one_sample, KsResult};
use crate::whittle::{conditional_beta, fourier_frequencies, periodogram, precompute_dft, pseudo_dft};

const TAIL_TOL: f64 = 1e-12;
const MAX_TRUNC: usize = 1 << 22;
const ARFIMA_MIN_TRUNC: usize = 5000;
const EXACT_MAX_LEN: usize = 4096;

/// Coefficients `w_0..=w_L` of `(1 - e^{-lambda} B)^d`.
///
/// Pass `-d` for the inverse operator.
pub fn tempered_frac_weights(d: f64, lambda: f64, len: usize) -> Vec<f64> {
    let decay = (-lambda).exp();
    let mut w = Vec::with_capacity(len + 1);
    w.push(1.0);
    for j in 1..=len {
        let prev = w[j - 1];
        w.push(prev * ((j as f64 - 1.0 - d) / j as f64) * decay);
    }
    w
}

/// Shortest truncation of the inverse filter `(1 - e^{-lambda} B)^{-d}` whose dropped
/// tail has absolute sum below `1e-12`.
pub fn truncation_length(d: f64, lambda: f64) -> usize {
    if d == 0.0 {
        return 0;
    }
    let decay = (-lambda).exp();
    if decay >= 1.0 {
        return MAX_TRUNC;
    }
    let mut w: f64 = 1.0;
    for j in 1..MAX_TRUNC {
        w *= ((j as f64 - 1.0 + d) / j as f64).abs() * decay;
        let next_ratio = ((j as f64 + d) / (j as f64 + 1.0)).abs() * decay;
        let r = next_ratio.max(decay);
        if r < 1.0 && w * r / (1.0 - r) < TAIL_TOL {
            return j;
        }
    }
    MAX_TRUNC
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMethod {
    /// Truncated filtering, except circulant embedding for ARFIMA.
    #[default]
    Auto,
    Truncated,
    /// Exact circulant embedding of the autocovariance.
    Circulant,
    /// Exact Durbin-Levinson generation, `O(T^2)`; limited to 4096 points.
    Exact,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: ModelSpec,
    pub theta_true: ParamVector,
    pub len: usize,
    /// Warm-up discarded by the filtering route; `10 max(p, s P, 100)` when absent.
    pub burn: Option<usize>,
    /// Inverse-filter truncation; chosen from the tail bound when absent.
    pub trunc_len: Option<usize>,
    pub seed: u64,
    pub method: SimMethod,
}

impl SimConfig {
    pub fn new(spec: ModelSpec, theta_true: ParamVector, len: usize, seed: u64) -> Self {
        Self { spec, theta_true, len, burn: None, trunc_len: None, seed, method: SimMethod::Auto }
    }

    pub fn with_method(mut self, method: SimMethod) -> Self {
        self.method = method;
        self
    }

    pub fn burn(&self) -> usize {
        self.burn.unwrap_or_else(|| {
            10 * self.spec.p.max(self.spec.season() * self.spec.seasonal_p).max(100)
        })
    }

    pub fn trunc_len(&self) -> usize {
        if let Some(l) = self.trunc_len {
            return l;
        }
        let (d, lambda) = self.theta_true.memory(self.spec.family);
        match self.spec.family {
            ErrorFamily::Arma => 0,
            ErrorFamily::Arfima => ARFIMA_MIN_TRUNC.max(10 * self.len),
            ErrorFamily::Artfima => truncation_length(d, lambda),
        }
    }

    fn resolved_method(&self) -> SimMethod {
        match (self.method, self.spec.family) {
            (SimMethod::Auto, ErrorFamily::Arfima) => SimMethod::Circulant,
            (SimMethod::Auto, _) => SimMethod::Truncated,
            (m, _) => m,
        }
    }
}

/// Precomputed filter or factorisation; draws any number of independent series.
#[derive(Debug, Clone)]
pub struct ErrorGenerator {
    len: usize,
    sigma: f64,
    kind: GeneratorKind,
}

#[derive(Debug, Clone)]
enum GeneratorKind {
    Filter { burn: usize, ar: Vec<f64>, ma: Vec<f64>, weights: Vec<f64> },
    /// `sqrt(eigenvalue / (2M))` of the circulant embedding, per frequency.
    Circulant { amplitudes: Vec<f64> },
    /// Durbin-Levinson prediction coefficients and innovation standard deviations.
    Exact { coefs: Vec<Vec<f64>>, sds: Vec<f64> },
}

impl ErrorGenerator {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let spec = &config.spec;
        let theta = &config.theta_true;
        theta
            .validate(&ModelSpec { m: theta.beta.len(), ..spec.clone() })
            .map_err(|e| e.within("simulate", "true parameters"))?;
        if config.len == 0 {
            return Err(Error::domain("simulation length must be positive"));
        }
        let sigma = theta.sigma2.sqrt();
        let kind = match config.resolved_method() {
            SimMethod::Truncated | SimMethod::Auto => {
                let (d, lambda) = theta.memory(spec.family);
                let weights = if spec.family == ErrorFamily::Arma || d == 0.0 {
                    vec![1.0]
                } else {
                    tempered_frac_weights(-d, lambda, config.trunc_len())
                };
                GeneratorKind::Filter {
                    burn: config.burn(),
                    ar: theta.full_ar(spec),
                    ma: theta.full_ma(spec),
                    weights,
                }
            }
            SimMethod::Circulant => {
                let m = config.len.next_power_of_two().max(2);
                let gamma = autocovariance(theta, spec, m)?;
                let mut c: Vec<Complex64> = Vec::with_capacity(2 * m);
                c.extend(gamma.iter().map(|&g| Complex64::new(g, 0.0)));
                c.extend(gamma[1..m].iter().rev().map(|&g| Complex64::new(g, 0.0)));
                fft::forward(&mut c);
                let max = c.iter().map(|v| v.re).fold(0.0, f64::max);
                let min = c.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
                if min < -1e-8 * max {
                    return Err(Error::eval(format!(
                        "circulant embedding is not non-negative (min eigenvalue {min:e})"
                    )));
                }
                let amplitudes = c
                    .iter()
                    .map(|v| (v.re.max(0.0) / (2 * m) as f64).sqrt() / sigma)
                    .collect();
                GeneratorKind::Circulant { amplitudes }
            }
            SimMethod::Exact => {
                if config.len > EXACT_MAX_LEN {
                    return Err(Error::domain(format!(
                        "exact generation is limited to {EXACT_MAX_LEN} points, asked for {}",
                        config.len
                    )));
                }
                let gamma = autocovariance(theta, spec, config.len)?;
                let (coefs, sds) = durbin_levinson_factors(&gamma, config.len)?;
                let sds = sds.iter().map(|s| s / sigma).collect();
                GeneratorKind::Exact { coefs, sds }
            }
        };
        Ok(Self { len: config.len, sigma, kind })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn generate(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let noise = Normal::new(0.0, self.sigma).expect("positive innovation sd");
        match &self.kind {
            GeneratorKind::Filter { burn, ar, ma, weights } => {
                let total = self.len + burn;
                let lead = weights.len() - 1 + ma.len();
                let eps: Vec<f64> = (0..total + lead).map(|_| noise.sample(rng)).collect();
                let u: Vec<f64> = (ma.len()..eps.len())
                    .map(|t| eps[t] + ma.iter().enumerate().map(|(j, c)| c * eps[t - 1 - j]).sum::<f64>())
                    .collect();
                let v = if weights.len() == 1 {
                    u
                } else {
                    let conv = fft::convolve(&u, weights, u.len());
                    conv[weights.len() - 1..].to_vec()
                };
                let mut eta = vec![0.0; total];
                for t in 0..total {
                    let mut x = v[t];
                    for (j, c) in ar.iter().enumerate() {
                        if t > j {
                            x += c * eta[t - 1 - j];
                        }
                    }
                    eta[t] = x;
                }
                eta.split_off(*burn)
            }
            GeneratorKind::Circulant { amplitudes } => {
                let mut w: Vec<Complex64> = amplitudes
                    .iter()
                    .map(|a| {
                        let re: f64 = noise.sample(rng);
                        let im: f64 = noise.sample(rng);
                        Complex64::new(re, im) * *a
                    })
                    .collect();
                fft::forward(&mut w);
                w.iter().take(self.len).map(|c| c.re).collect()
            }
            GeneratorKind::Exact { coefs, sds } => {
                let mut x = Vec::with_capacity(self.len);
                for t in 0..self.len {
                    let e: f64 = noise.sample(rng);
                    let pred: f64 = coefs[t].iter().enumerate().map(|(j, c)| c * x[t - 1 - j]).sum();
                    x.push(pred + sds[t] * e);
                }
                x
            }
        }
    }
}

/// Prediction coefficients `phi_{t,1..t}` and innovation sds for `t < len`.
fn durbin_levinson_factors(gamma: &[f64], len: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut coefs = vec![Vec::new()];
    let mut v = gamma[0];
    let mut sds = vec![v.sqrt()];
    for t in 1..len {
        let prev = &coefs[t - 1];
        let num = gamma[t] - prev.iter().enumerate().map(|(j, c)| c * gamma[t - 1 - j]).sum::<f64>();
        let k = num / v;
        let mut next: Vec<f64> = prev.iter().enumerate().map(|(j, c)| c - k * prev[t - 2 - j]).collect();
        next.push(k);
        v *= 1.0 - k * k;
        if !(v > 0.0) {
            return Err(Error::eval(format!("autocovariance not positive definite at lag {t}")));
        }
        sds.push(v.sqrt());
        coefs.push(next);
    }
    Ok((coefs, sds))
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One series of the error process `eta`.
pub fn simulate_error_process(config: &SimConfig) -> Result<Vec<f64>> {
    let gen = ErrorGenerator::new(config)?;
    Ok(gen.generate(&mut stream_rng(config.seed, 0)))
}

/// Exact Gaussian draw from the autocovariance, for cross-checking the filter route.
pub fn simulate_exact(config: &SimConfig) -> Result<Vec<f64>> {
    let cfg = config.clone().with_method(SimMethod::Exact);
    simulate_error_process(&cfg)
}

/// ARMA(p, q) series, e.g. for exogenous regressors.
pub fn simulate_arma(phi: &[f64], psi: &[f64], sigma2: f64, len: usize, seed: u64) -> Result<Vec<f64>> {
    let spec = ModelSpec::arma(phi.len(), psi.len(), 0);
    simulate_error_process(&SimConfig::new(spec, ParamVector::arma(phi, psi, sigma2), len, seed))
}

/// ARMA parameters of an exogenous regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorProcess {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub sigma2: f64,
}

impl RegressorProcess {
    pub fn simulate(&self, len: usize, seed: u64) -> Result<Vec<f64>> {
        simulate_arma(&self.phi, &self.psi, self.sigma2, len, seed)
    }
}

/// `y = X beta + eta` with its components.
#[derive(Debug, Clone)]
pub struct DlrData {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
}

/// Adds `X beta` to a fresh error series; `beta` is taken from `config.theta_true`.
pub fn simulate_dlr(config: &SimConfig, x: &[Vec<f64>]) -> Result<DlrData> {
    let beta = &config.theta_true.beta;
    if beta.len() != x.len() {
        return Err(Error::domain(format!("{} regressors but {} coefficients", x.len(), beta.len())));
    }
    if let Some(col) = x.iter().find(|c| c.len() != config.len) {
        return Err(Error::domain(format!("regressor has length {}, expected {}", col.len(), config.len)));
    }
    let eta = simulate_error_process(config)?;
    Ok(DlrData { y: combine(&eta, x, beta), x: x.to_vec(), eta })
}

fn combine(eta: &[f64], x: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    (0..eta.len())
        .map(|t| eta[t] + x.iter().zip(beta).map(|(col, b)| b * col[t]).sum::<f64>())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatioSettings {
    pub n_reps: usize,
    pub n_low_freqs: usize,
    /// Estimate `beta` per replicate (conditional MAP given the true error
    /// parameters) rather than using the true value.
    pub estimate_beta: bool,
    /// Variance of the independent normal prior on each `beta`.
    pub beta_prior_var: f64,
}

impl Default for RatioSettings {
    fn default() -> Self {
        Self { n_reps: 2000, n_low_freqs: 3, estimate_beta: true, beta_prior_var: 100.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioExperiment {
    pub omegas: Vec<f64>,
    /// `ratios[k][r]`: replicate `r` at the `k`-th lowest frequency.
    pub ratios: Vec<Vec<f64>>,
    /// KS test of each frequency's ratios against the unit exponential.
    pub ks: Vec<KsResult>,
    pub beta_hat: Vec<Vec<f64>>,
}

/// Distribution of `I_Z(w_k; beta_hat) / f(w_k; theta_true)` at the lowest Fourier
/// frequencies over independent replicates sharing the regressors `x`.
pub fn periodogram_ratio_experiment(
    config: &SimConfig,
    x: &[Vec<f64>],
    settings: &RatioSettings,
) -> Result<RatioExperiment> {
    if settings.n_reps < 100 {
        return Err(Error::domain(format!("need at least 100 replicates, got {}", settings.n_reps)));
    }
    let len = config.len;
    let omegas: Vec<f64> = fourier_frequencies(len).into_iter().take(settings.n_low_freqs).collect();
    if omegas.len() < settings.n_low_freqs {
        return Err(Error::domain("series too short for the requested number of frequencies"));
    }
    let theta = &config.theta_true;
    if theta.beta.len() != x.len() {
        return Err(Error::domain(format!("{} regressors but {} coefficients", x.len(), theta.beta.len())));
    }
    let f: Vec<f64> = omegas
        .iter()
        .map(|&w| spectral_density(w, theta, &config.spec))
        .collect::<Result<_>>()?;
    let gen = ErrorGenerator::new(config)?;
    let per_rep: Vec<(Vec<f64>, Vec<f64>)> = (0..settings.n_reps)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, Vec<f64>)> {
            let eta = gen.generate(&mut stream_rng(config.seed, r as u64 + 1));
            let y = combine(&eta, x, &theta.beta);
            let cache = precompute_dft(&y, x)?;
            let beta = if settings.estimate_beta {
                conditional_beta(&cache, theta, &config.spec, settings.beta_prior_var)?
            } else {
                theta.beta.clone()
            };
            let i = periodogram(&pseudo_dft(&cache, &beta)?, len);
            Ok((i.iter().zip(&f).map(|(i, f)| i / f).collect(), beta))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<Vec<f64>> =
        (0..omegas.len()).map(|k| per_rep.iter().map(|(r, _)| r[k]).collect()).collect();
    let ks = ratios
        .iter()
        .map(|r| ks_one_sample(r, |v| if v <= 0.0 { 0.0 } else { -(-v).exp_m1() }))
        .collect::<Result<_>>()?;
    Ok(RatioExperiment {
        omegas,
        ratios,
        ks,
        beta_hat: per_rep.into_iter().map(|(_, b)| b).collect(),
    })
}

/// Standard normal draws, for callers that need plain noise from a seeded stream.
pub fn standard_normals(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};
    use statrs::function::gamma::{gamma, ln_gamma};

    /// `(-1)^j Gamma(1+d) / (Gamma(1+d-j) j!) e^{-lambda j}` with signs tracked through
    /// the reflection formula.
    fn gamma_formula(d: f64, lambda: f64, j: usize) -> f64 {
        let x = 1.0 + d - j as f64;
        let (ln_abs, sign) = if x > 0.0 {
            (ln_gamma(x), 1.0)
        } else if x.fract() == 0.0 {
            return 0.0;
        } else {
            let g = gamma(x);
            (g.abs().ln(), g.signum())
        };
        let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
        let g1 = gamma(1.0 + d);
        parity * g1.signum() * sign
            * (g1.abs().ln() - ln_abs - ln_gamma(j as f64 + 1.0) - lambda * j as f64).exp()
    }

    #[test]
    fn weight_examples() {
        let w = tempered_frac_weights(0.7, 0.3, 3);
        assert_eq!(w[0], 1.0);
        assert!((w[1] + 0.7 * (-0.3f64).exp()).abs() < 1e-15);
        // (1 - B)^0.3: w_2 = -d (1 - d) / 2
        let w = tempered_frac_weights(0.3, 0.0, 2);
        assert!((w[2] - -0.105).abs() < 1e-15);
        assert!((w[2] - gamma_formula(0.3, 0.0, 2)).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_gamma_formula() {
        for &d in &[-2.7, -0.4, 0.3, 1.5, 2.139, 2.9] {
            for &lambda in &[0.0, 0.616, 2.0] {
                let w = tempered_frac_weights(d, lambda, 50);
                for (j, wj) in w.iter().enumerate() {
                    let g = gamma_formula(d, lambda, j);
                    assert!((wj - g).abs() <= 1e-12 * g.abs().max(1e-300), "d={d} l={lambda} j={j}");
                }
            }
        }
    }

    #[test]
    fn truncation_tail_is_small() {
        for &(d, lambda) in &[(2.139, 0.616), (0.4, 0.05), (-0.8, 1.0)] {
            let l = truncation_length(d, lambda);
            let w = tempered_frac_weights(-d, lambda, l + 200_000.min(50 * l + 1000));
            let tail: f64 = w[l + 1..].iter().map(|v| v.abs()).sum();
            assert!(tail < 1e-12, "d={d} lambda={lambda} L={l} tail={tail}");
        }
    }

    #[test]
    fn white_noise_variance() {
        let cfg = SimConfig::new(ModelSpec::arma(0, 0, 0), ParamVector::white_noise(2.0), 10_000, 1);
        let x = simulate_error_process(&cfg).unwrap();
        let se = 2.0 * (2.0 / 10_000f64).sqrt();
        assert!((variance(&x) - 2.0).abs() < 3.0 * se);
    }

    #[test]
    fn ar1_lag_one_correlation() {
        let cfg = SimConfig::new(ModelSpec::arma(1, 0, 0), ParamVector::arma(&[0.5], &[], 1.0), 10_000, 2);
        let x = simulate_error_process(&cfg).unwrap();
        let m = mean(&x);
        let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        // SE of r1 for AR(1) is sqrt((1 - phi^2) / T)
        assert!((c1 / c0 - 0.5).abs() < 3.0 * (0.75f64 / 10_000.0).sqrt());
    }

    #[test]
    fn same_seed_same_series() {
        let spec = ModelSpec::artfima(1, 0, 0);
        let theta = ParamVector::arma(&[0.3], &[], 1.0).with_memory(0.9, 0.4);
        let a = simulate_error_process(&SimConfig::new(spec.clone(), theta.clone(), 500, 5)).unwrap();
        let b = simulate_error_process(&SimConfig::new(spec.clone(), theta.clone(), 500, 5)).unwrap();
        let c = simulate_error_process(&SimConfig::new(spec, theta, 500, 6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generators_agree_on_variance() {
        // sample variance averaged over replicates for each route vs gamma(0)
        let spec = ModelSpec::artfima(1, 1, 0);
        let theta = ParamVector::arma(&[0.4], &[0.3], 1.0).with_memory(0.8, 0.5);
        let gamma0 = autocovariance(&theta, &spec, 1).unwrap()[0];
        for method in [SimMethod::Truncated, SimMethod::Circulant, SimMethod::Exact] {
            let cfg = SimConfig::new(spec.clone(), theta.clone(), 512, 7).with_method(method);
            let gen = ErrorGenerator::new(&cfg).unwrap();
            let reps = 400;
            let mut total = 0.0;
            for r in 0..reps {
                let x = gen.generate(&mut stream_rng(7, r));
                total += x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
            }
            let avg = total / reps as f64;
            assert!((avg / gamma0 - 1.0).abs() < 0.05, "{method:?}: {avg} vs {gamma0}");
        }
    }

    #[test]
    fn mean_periodogram_tracks_spectrum() {
        // ARTFIMA(2, 0) with strong tempered memory; 500 replicates. Single ordinates
        // carry ~4.5% noise, so compare averages over 11 neighbouring ordinates.
        let spec = ModelSpec::artfima(2, 0, 0);
        let theta = ParamVector::arma(&[0.742, 0.227], &[], 1.0).with_memory(2.139, 0.616);
        let len = 1001;
        let gen = ErrorGenerator::new(&SimConfig::new(spec.clone(), theta.clone(), len, 21)).unwrap();
        let reps = 500;
        let n_pos = (len - 1) / 2;
        let mut avg = vec![0.0; n_pos];
        for r in 0..reps {
            let x = gen.generate(&mut stream_rng(21, r));
            let i = periodogram(&crate::whittle::dft_positive(&x), len);
            for (a, v) in avg.iter_mut().zip(&i) {
                *a += v / reps as f64;
            }
        }
        // E I(w) = (1/2pi) sum_{|h|<T} (1 - |h|/T) gamma(h) cos(h w)
        let gamma = autocovariance(&theta, &spec, len - 1).unwrap();
        let omegas = fourier_frequencies(len);
        let expected: Vec<f64> = omegas
            .iter()
            .map(|&w| {
                let tail: f64 = (1..len)
                    .map(|h| 2.0 * (1.0 - h as f64 / len as f64) * gamma[h] * (h as f64 * w).cos())
                    .sum();
                (gamma[0] + tail) / (2.0 * std::f64::consts::PI)
            })
            .collect();
        for probe in 0..20 {
            let k = 5 + probe * 25;
            let band = k - 5..=k + 5;
            let got: f64 = avg[band.clone()].iter().sum();
            let want: f64 = expected[band.clone()].iter().sum();
            assert!((got / want - 1.0).abs() < 0.05, "k={k}: {got} vs {want}");
            // leakage from the low-frequency peak swamps f higher up
            if k <= 30 {
                let f: f64 = band.map(|j| spectral_density(omegas[j], &theta, &spec).unwrap()).sum();
                assert!((want / f - 1.0).abs() < 0.05, "k={k}: {want} vs f {f}");
            }
        }
    }

    #[test]
    fn nonstationary_truth_is_rejected() {
        let cfg = SimConfig::new(ModelSpec::arma(1, 0, 0), ParamVector::arma(&[1.2], &[], 1.0), 100, 1);
        assert!(simulate_error_process(&cfg).is_err());
    }

    #[test]
    fn white_noise_ratios_are_exponential() {
        let len = 201;
        let x = vec![simulate_arma(&[0.5], &[], 1.0, len, 9).unwrap()];
        let cfg = SimConfig::new(ModelSpec::arma(0, 0, 1), ParamVector::white_noise(1.0).with_beta(&[0.1]), len, 10);
        let settings = RatioSettings { n_reps: 1000, estimate_beta: false, ..Default::default() };
        let exp = periodogram_ratio_experiment(&cfg, &x, &settings).unwrap();
        assert_eq!(exp.ratios.len(), 3);
        assert!(exp.ks.iter().all(|k| k.p_value > 0.01), "{:?}", exp.ks);
    }
}
