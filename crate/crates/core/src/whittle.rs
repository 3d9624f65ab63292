//! Frequency-domain likelihood for dynamic linear regression.
//!
//! The DFTs of the response and of every regressor are computed once. For any
//! `beta` the DFT of the pseudo data `z_t = y_t - x_t' beta` is then the linear
//! combination `J_Y - J_X beta`, so each likelihood evaluation costs `O(T m)` plus
//! one spectral density evaluation per Fourier frequency.

use std::f64::consts::PI;
use std::sync::Once;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::linalg;
use crate::model::{ErrorFamily, ModelSpec, ParamVector};
use crate::spectral::SpectralEvaluator;

static ARFIMA_WARNING: Once = Once::new();

/// DFTs of the demeaned response and regressors at the positive Fourier frequencies.
#[derive(Debug, Clone)]
pub struct DftCache {
    len: usize,
    omegas: Vec<f64>,
    cos_omegas: Vec<f64>,
    /// `e^{-i w_k}`
    units: Vec<Complex64>,
    j_y: Vec<Complex64>,
    /// One DFT per regressor column.
    j_x: Vec<Vec<Complex64>>,
    y_mean: f64,
    x_means: Vec<f64>,
    low_freq_cutoff: usize,
}

/// Number of positive Fourier frequencies used: `(T-1)/2` for odd `T`, `T/2 - 1` for even.
pub fn positive_frequency_count(len: usize) -> usize {
    len.saturating_sub(1) / 2
}

/// `w_k = 2 pi k / T` for `k = 1..=K+`.
pub fn fourier_frequencies(len: usize) -> Vec<f64> {
    (1..=positive_frequency_count(len))
        .map(|k| 2.0 * PI * k as f64 / len as f64)
        .collect()
}

/// `J(w_k) = sum_{t=1}^T z_t e^{-i w_k t}` for `k = 1..=K+`, via the FFT.
pub fn dft_positive(series: &[f64]) -> Vec<Complex64> {
    let len = series.len();
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::forward(&mut buf);
    (1..=positive_frequency_count(len))
        .map(|k| buf[k] * Complex64::cis(-2.0 * PI * k as f64 / len as f64))
        .collect()
}

fn demean(series: &[f64]) -> (Vec<f64>, f64) {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    (series.iter().map(|x| x - mean).collect(), mean)
}

impl DftCache {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn j_y(&self) -> &[Complex64] {
        &self.j_y
    }

    pub fn j_x(&self) -> &[Vec<Complex64>] {
        &self.j_x
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn x_means(&self) -> &[f64] {
        &self.x_means
    }

    pub fn regressors(&self) -> usize {
        self.j_x.len()
    }

    pub fn low_freq_cutoff(&self) -> usize {
        self.low_freq_cutoff
    }

    /// Drops the lowest `k_cut` ordinates from the likelihood. Defaults to 0.
    pub fn with_low_freq_cutoff(mut self, k_cut: usize) -> Self {
        self.low_freq_cutoff = k_cut.min(self.omegas.len());
        self
    }
}

/// Demeans `y` and each regressor column and stores their DFTs.
///
/// `x` holds one `Vec` per regressor, each of the same length as `y`.
pub fn precompute_dft(y: &[f64], x: &[Vec<f64>]) -> Result<DftCache> {
    let len = y.len();
    if len < 8 {
        return Err(Error::domain(format!("need at least 8 observations, got {len}")));
    }
    if let Some(t) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("response is not finite at index {t}")));
    }
    for (j, col) in x.iter().enumerate() {
        if col.len() != len {
            return Err(Error::domain(format!(
                "regressor {} has length {}, response has {len}",
                j + 1,
                col.len()
            )));
        }
        if let Some(t) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("regressor {} is not finite at index {t}", j + 1)));
        }
    }
    let (y_centered, y_mean) = demean(y);
    let mut x_means = Vec::with_capacity(x.len());
    let mut j_x = Vec::with_capacity(x.len());
    for (j, col) in x.iter().enumerate() {
        let (c, mean) = demean(col);
        if c.iter().all(|v| v.abs() <= 1e-12 * mean.abs().max(1.0)) {
            log::warn!("regressor {} is constant; its coefficient is not identified", j + 1);
        }
        x_means.push(mean);
        j_x.push(dft_positive(&c));
    }
    let omegas = fourier_frequencies(len);
    Ok(DftCache {
        len,
        cos_omegas: omegas.iter().map(|w| w.cos()).collect(),
        units: omegas.iter().map(|&w| Complex64::cis(-w)).collect(),
        omegas,
        j_y: dft_positive(&y_centered),
        j_x,
        y_mean,
        x_means,
        low_freq_cutoff: 0,
    })
}

/// `J_Z = J_Y - J_X beta` at every positive Fourier frequency.
pub fn pseudo_dft(cache: &DftCache, beta: &[f64]) -> Result<Vec<Complex64>> {
    if beta.len() != cache.regressors() {
        return Err(Error::domain(format!(
            "beta has length {}, cache holds {} regressors",
            beta.len(),
            cache.regressors()
        )));
    }
    let mut out = cache.j_y.clone();
    for (b, jx) in beta.iter().zip(&cache.j_x) {
        for (o, x) in out.iter_mut().zip(jx) {
            *o -= x * b;
        }
    }
    Ok(out)
}

/// `I(w_k) = |J(w_k)|^2 / (2 pi T)`.
pub fn periodogram(j_z: &[Complex64], len: usize) -> Vec<f64> {
    let scale = 1.0 / (2.0 * PI * len as f64);
    j_z.iter().map(|j| j.norm_sqr() * scale).collect()
}

/// Whittle log-likelihood `-sum_k [log f(w_k) + I_Z(w_k; beta) / f(w_k)]`.
pub fn whittle_loglik(cache: &DftCache, theta: &ParamVector, spec: &ModelSpec) -> Result<f64> {
    if theta.beta.len() != cache.regressors() {
        return Err(Error::domain(format!(
            "beta has length {}, cache holds {} regressors",
            theta.beta.len(),
            cache.regressors()
        )));
    }
    if spec.family == ErrorFamily::Arfima {
        ARFIMA_WARNING.call_once(|| {
            log::warn!(
                "the Whittle approximation is unreliable for long-memory (ARFIMA) errors at low \
                 frequencies; prefer the exact Gaussian likelihood"
            )
        });
    }
    let ev = SpectralEvaluator::new(theta, spec);
    let s = spec.season() as u32;
    let scale = 1.0 / (2.0 * PI * cache.len as f64);
    let mut total = 0.0;
    for k in cache.low_freq_cutoff..cache.omegas.len() {
        let mut jz = cache.j_y[k];
        for (b, jx) in theta.beta.iter().zip(&cache.j_x) {
            jz -= jx[k] * b;
        }
        let z = cache.units[k];
        let zs = if s > 1 { z.powu(s) } else { z };
        let lf = ev.log_density_at(cache.cos_omegas[k], z, zs);
        total += lf + jz.norm_sqr() * scale * (-lf).exp();
    }
    if !total.is_finite() {
        return Err(Error::eval(format!(
            "Whittle log-likelihood is not finite ({total}); spectral density degenerate on the grid"
        )));
    }
    Ok(-total)
}

/// Maximiser of the Whittle likelihood in `beta` for fixed error parameters, under
/// independent `N(0, prior_var)` priors (use `f64::INFINITY` for the flat-prior
/// generalised least squares estimate).
pub fn conditional_beta(
    cache: &DftCache,
    theta: &ParamVector,
    spec: &ModelSpec,
    prior_var: f64,
) -> Result<Vec<f64>> {
    let m = cache.regressors();
    let ev = SpectralEvaluator::new(theta, spec);
    let s = spec.season() as u32;
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for k in cache.low_freq_cutoff..cache.omegas.len() {
        let z = cache.units[k];
        let zs = if s > 1 { z.powu(s) } else { z };
        let w = (-ev.log_density_at(cache.cos_omegas[k], z, zs)).exp();
        for i in 0..m {
            let xi = cache.j_x[i][k].conj();
            b[i] += w * (xi * cache.j_y[k]).re;
            for j in 0..m {
                a[i * m + j] += w * (xi * cache.j_x[j][k]).re;
            }
        }
    }
    // the likelihood carries 1/(2 pi T); fold it into the prior precision instead
    let ridge = 2.0 * PI * cache.len as f64 / prior_var;
    for i in 0..m {
        a[i * m + i] += ridge;
    }
    let l = linalg::cholesky(&a, m)
        .ok_or_else(|| Error::eval("regressor spectral cross-product matrix is singular"))?;
    Ok(linalg::cholesky_solve(&l, m, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_dft(series: &[f64]) -> Vec<Complex64> {
        let len = series.len();
        (1..=positive_frequency_count(len))
            .map(|k| {
                let w = 2.0 * PI * k as f64 / len as f64;
                series
                    .iter()
                    .enumerate()
                    .map(|(t, &z)| z * Complex64::cis(-w * (t + 1) as f64))
                    .sum()
            })
            .collect()
    }

    fn noise(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    #[test]
    fn frequency_counts() {
        assert_eq!(positive_frequency_count(301), 150);
        assert_eq!(positive_frequency_count(300), 149);
        let w = fourier_frequencies(10);
        assert_eq!(w.len(), 4);
        assert!((w[0] - 2.0 * PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn constant_series_has_zero_dft() {
        let cache = precompute_dft(&[3.5; 64], &[]).unwrap();
        assert!(cache.j_y().iter().all(|j| j.norm() < 1e-12));
    }

    #[test]
    fn cosine_concentrates_on_first_frequency() {
        let len = 128;
        let y: Vec<f64> = (1..=len).map(|t| (2.0 * PI * t as f64 / len as f64).cos()).collect();
        let cache = precompute_dft(&y, &[]).unwrap();
        assert!((cache.j_y()[0].norm() - len as f64 / 2.0).abs() < 1e-9);
        assert!(cache.j_y()[1..].iter().all(|j| j.norm() < 1e-9));
    }

    #[test]
    fn fft_matches_direct_sum() {
        let y = noise(257, 1);
        let cache = precompute_dft(&y, &[]).unwrap();
        let (centered, _) = demean(&y);
        let direct = direct_dft(&centered);
        for (a, b) in cache.j_y().iter().zip(&direct) {
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0));
        }
    }

    #[test]
    fn pseudo_dft_examples() {
        let y = noise(64, 2);
        let cache = precompute_dft(&y, &[y.clone()]).unwrap();
        assert_eq!(pseudo_dft(&cache, &[0.0]).unwrap(), cache.j_y().to_vec());
        assert!(pseudo_dft(&cache, &[1.0]).unwrap().iter().all(|j| j.norm() == 0.0));
        assert!(pseudo_dft(&cache, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pseudo_dft_matches_explicit_pseudo_data() {
        let len = 301;
        let y = noise(len, 3);
        let x = vec![noise(len, 4), noise(len, 5)];
        let beta = [1.7, -0.4];
        let cache = precompute_dft(&y, &x).unwrap();
        let z: Vec<f64> = (0..len).map(|t| y[t] - beta[0] * x[0][t] - beta[1] * x[1][t]).collect();
        let (zc, _) = demean(&z);
        let direct = direct_dft(&zc);
        for (a, b) in pseudo_dft(&cache, &beta).unwrap().iter().zip(&direct) {
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0));
        }
    }

    #[test]
    fn periodogram_examples() {
        assert!(periodogram(&[Complex64::new(0.0, 0.0); 3], 10).iter().all(|&v| v == 0.0));
        let i = periodogram(&[Complex64::new(100.0, 0.0)], 100);
        assert!((i[0] - 15.915_494_309_189_533).abs() < 1e-12);
    }

    #[test]
    fn parseval_identity() {
        for len in [301usize, 300] {
            let y = noise(len, 6);
            let (z, _) = demean(&y);
            let cache = precompute_dft(&y, &[]).unwrap();
            let i = periodogram(cache.j_y(), len);
            let mut freq_side = 2.0 * i.iter().sum::<f64>();
            if len % 2 == 0 {
                // Nyquist ordinate J(pi) = sum (-1)^t z_t
                let nyq: f64 = z.iter().enumerate().map(|(t, v)| if t % 2 == 0 { -v } else { *v }).sum();
                freq_side += nyq * nyq / (2.0 * PI * len as f64);
            }
            let time_side = z.iter().map(|v| v * v).sum::<f64>() / (2.0 * PI);
            assert!((freq_side - time_side).abs() <= 1e-9 * time_side);
        }
    }

    #[test]
    fn unit_spectrum_gives_minus_periodogram_sum() {
        let y = noise(101, 7);
        let cache = precompute_dft(&y, &[]).unwrap();
        let ll = whittle_loglik(&cache, &ParamVector::white_noise(2.0 * PI), &ModelSpec::arma(0, 0, 0))
            .unwrap();
        let sum: f64 = periodogram(cache.j_y(), 101).iter().sum();
        assert!((ll + sum).abs() < 1e-12 * sum.max(1.0));
    }

    #[test]
    fn scaling_shifts_loglik_by_log_c() {
        let len = 200;
        let (y, x) = (noise(len, 8), noise(len, 9));
        let c = 3.0f64;
        let spec = ModelSpec::arma(1, 1, 1);
        let theta = ParamVector::arma(&[0.4], &[0.2], 0.7).with_beta(&[0.5]);
        let base = whittle_loglik(&precompute_dft(&y, &[x.clone()]).unwrap(), &theta, &spec).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
        let scaled_theta = ParamVector { sigma2: theta.sigma2 * c * c, ..theta.clone() };
        let scaled = whittle_loglik(&precompute_dft(&ys, &[xs]).unwrap(), &scaled_theta, &spec).unwrap();
        let k = positive_frequency_count(len) as f64;
        assert!((scaled - base + 2.0 * k * c.ln()).abs() < 1e-9 * base.abs());
    }

    #[test]
    fn reversal_invariance() {
        let len = 333;
        let (y, x) = (noise(len, 10), noise(len, 11));
        let spec = ModelSpec::artfima(1, 0, 1);
        let theta = ParamVector::arma(&[0.3], &[], 1.1).with_memory(0.7, 0.4).with_beta(&[2.0]);
        let fwd = whittle_loglik(&precompute_dft(&y, &[x.clone()]).unwrap(), &theta, &spec).unwrap();
        let (yr, xr): (Vec<f64>, Vec<f64>) = (y.into_iter().rev().collect(), x.into_iter().rev().collect());
        let rev = whittle_loglik(&precompute_dft(&yr, &[xr]).unwrap(), &theta, &spec).unwrap();
        assert!((fwd - rev).abs() <= 1e-9 * fwd.abs());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(precompute_dft(&[1.0; 7], &[]).is_err());
        let mut y = vec![1.0; 20];
        y[4] = f64::NAN;
        assert!(precompute_dft(&y, &[]).is_err());
        assert!(precompute_dft(&[1.0; 20], &[vec![1.0; 19]]).is_err());
    }

    #[test]
    fn low_frequency_cutoff_drops_terms() {
        let y = noise(101, 12);
        let spec = ModelSpec::arma(0, 0, 0);
        let theta = ParamVector::white_noise(2.0 * PI);
        let cache = precompute_dft(&y, &[]).unwrap();
        let i = periodogram(cache.j_y(), 101);
        let cut = whittle_loglik(&cache.clone().with_low_freq_cutoff(3), &theta, &spec).unwrap();
        assert!((cut + i[3..].iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn conditional_beta_maximises_whittle() {
        let len = 257;
        let x = noise(len, 13);
        let e = noise(len, 14);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 2.0 * a + b).collect();
        let cache = precompute_dft(&y, &[x]).unwrap();
        let spec = ModelSpec::arma(1, 0, 1);
        let theta = ParamVector::arma(&[0.3], &[], 1.0).with_beta(&[0.0]);
        let b = conditional_beta(&cache, &theta, &spec, f64::INFINITY).unwrap()[0];
        let at = |beta: f64| {
            whittle_loglik(&cache, &ParamVector { beta: vec![beta], ..theta.clone() }, &spec).unwrap()
        };
        assert!(at(b) > at(b + 1e-3) && at(b) > at(b - 1e-3));
    }
}
