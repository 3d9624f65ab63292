//! Spectral densities of the error process and the autocovariances they imply.
//!
//! ```text
//! f(w) = sigma2 / (2 pi) |1 - e^{-(lambda + i w)}|^{-2d}
//!        |psi(e^{-iw}) psi*(e^{-isw})|^2 / |phi(e^{-iw}) phi*(e^{-isw})|^2
//! ```
//!
//! ARMA uses `d = 0`; ARFIMA uses `lambda = 0`. Autocovariances are obtained by
//! integrating `f(w) e^{iwk}` over `[-pi, pi]` with a periodic trapezoidal rule on a
//! power-of-two grid. The ARFIMA pole `|w|^{-2d}` at the origin is handled with the
//! zeta-function correction for punctured trapezoidal sums, which restores
//! `O(h^{3-2d})` accuracy.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::model::{ErrorFamily, ModelSpec, ParamVector};
use crate::special::{gauss_legendre, zeta};

const MIN_GRID: usize = 1 << 14;
const ARFIMA_GRID: usize = 1 << 18;
const MAX_GRID: usize = 1 << 22;
const ARFIMA_CONVERGENCE_TOL: f64 = 1e-4;
/// Largest `2 lambda n` for which the tempered-coefficient recurrence is run to lag `n`.
const RECURRENCE_GROWTH: f64 = 25.0;
const PANEL_NODES: usize = 24;

/// Precomputed pieces of `log f` for one parameter value.
#[derive(Debug, Clone)]
pub struct SpectralEvaluator {
    log_scale: f64,
    /// AR polynomial coefficients `1, -phi_1, ..., -phi_p`.
    ar: Vec<f64>,
    ma: Vec<f64>,
    seasonal_ar: Vec<f64>,
    seasonal_ma: Vec<f64>,
    period: usize,
    d: f64,
    /// Tempering radius `e^{-lambda}` (1 for ARFIMA).
    radius: f64,
    family: ErrorFamily,
}

fn lag_poly(coefs: &[f64], sign: f64) -> Vec<f64> {
    std::iter::once(1.0).chain(coefs.iter().map(|c| sign * c)).collect()
}

/// `|sum_j c_j z^j|^2` by Horner's rule.
#[inline]
fn poly_abs2(coefs: &[f64], z: Complex64) -> f64 {
    if coefs.len() == 1 {
        return 1.0;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coefs.iter().rev() {
        acc = acc * z + c;
    }
    acc.norm_sqr()
}

impl SpectralEvaluator {
    pub fn new(theta: &ParamVector, spec: &ModelSpec) -> Self {
        let (d, lambda) = theta.memory(spec.family);
        let radius = match spec.family {
            ErrorFamily::Arma => 0.0,
            ErrorFamily::Arfima => 1.0,
            ErrorFamily::Artfima => (-lambda).exp(),
        };
        Self {
            log_scale: (theta.sigma2 / (2.0 * PI)).ln(),
            ar: lag_poly(&theta.phi, -1.0),
            ma: lag_poly(&theta.psi, 1.0),
            seasonal_ar: lag_poly(&theta.seasonal_phi, -1.0),
            seasonal_ma: lag_poly(&theta.seasonal_psi, 1.0),
            period: spec.season(),
            d,
            radius,
            family: spec.family,
        }
    }

    fn is_seasonal(&self) -> bool {
        self.seasonal_ar.len() > 1 || self.seasonal_ma.len() > 1
    }

    /// `log f(w)`; `+inf` at the ARFIMA pole.
    pub fn log_density(&self, omega: f64) -> f64 {
        let z = Complex64::cis(-omega);
        let zs = if self.is_seasonal() {
            Complex64::cis(-(self.period as f64) * omega)
        } else {
            z
        };
        self.log_density_at(omega.cos(), z, zs)
    }

    /// `log f` given `cos w`, `z = e^{-iw}` and `z^s`.
    #[inline]
    pub(crate) fn log_density_at(&self, cos_w: f64, z: Complex64, zs: Complex64) -> f64 {
        let mut lf = self.log_scale + poly_abs2(&self.ma, z).ln() - poly_abs2(&self.ar, z).ln();
        if self.is_seasonal() {
            lf += poly_abs2(&self.seasonal_ma, zs).ln() - poly_abs2(&self.seasonal_ar, zs).ln();
        }
        if self.family != ErrorFamily::Arma && self.d != 0.0 {
            let r = self.radius;
            // |1 - r e^{-iw}|^2, written to avoid cancellation near w = 0 when r = 1
            let half = (1.0 - cos_w) * 2.0 * r + (1.0 - r) * (1.0 - r);
            lf -= self.d * half.ln();
        }
        lf
    }

    /// `f(w) |w|^{2d}` at `w = 0`: the coefficient of the ARFIMA pole.
    fn pole_coefficient(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let mut lf = self.log_scale + poly_abs2(&self.ma, one).ln() - poly_abs2(&self.ar, one).ln();
        if self.is_seasonal() {
            lf += poly_abs2(&self.seasonal_ma, one).ln() - poly_abs2(&self.seasonal_ar, one).ln();
        }
        lf.exp()
    }
}

/// Spectral density `f(w; theta)` (power per radian).
///
/// Errors at `w = 0` for ARFIMA with `d > 0`, where the density has a pole.
pub fn spectral_density(omega: f64, theta: &ParamVector, spec: &ModelSpec) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::domain(format!("frequency {omega} is not finite")));
    }
    let ev = SpectralEvaluator::new(theta, spec);
    let value = ev.log_density(omega).exp();
    if value.is_infinite() {
        return Err(Error::domain(format!(
            "spectral density has a pole at w = {omega} (ARFIMA with d = {})",
            theta.d
        )));
    }
    if value.is_nan() {
        return Err(Error::eval(format!("spectral density is NaN at w = {omega}")));
    }
    Ok(value)
}

/// A spectral density sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumGrid {
    pub fn evaluate(omegas: &[f64], theta: &ParamVector, spec: &ModelSpec) -> Result<Self> {
        let ev = SpectralEvaluator::new(theta, spec);
        let values = omegas
            .iter()
            .map(|&w| {
                let v = ev.log_density(w).exp();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::domain(format!("spectral density is not finite at w = {w}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            omegas: omegas.to_vec(),
            values,
        })
    }

    /// `n` equally spaced frequencies in `(0, pi]`.
    pub fn uniform(n: usize, theta: &ParamVector, spec: &ModelSpec) -> Result<Self> {
        let omegas: Vec<f64> = (1..=n).map(|k| PI * k as f64 / n as f64).collect();
        Self::evaluate(&omegas, theta, spec)
    }
}

pub(crate) fn is_white_noise(theta: &ParamVector, spec: &ModelSpec) -> bool {
    theta.phi.is_empty()
        && theta.psi.is_empty()
        && theta.seasonal_phi.is_empty()
        && theta.seasonal_psi.is_empty()
        && (spec.family == ErrorFamily::Arma || theta.d == 0.0)
}

/// Grid size used by [`autocovariance`] for the given parameters.
pub fn autocovariance_grid_size(theta: &ParamVector, spec: &ModelSpec, max_lag: usize) -> usize {
    let mut n = (8 * max_lag).max(MIN_GRID).next_power_of_two();
    match spec.family {
        ErrorFamily::Arma => {}
        ErrorFamily::Arfima => n = n.max(ARFIMA_GRID),
        ErrorFamily::Artfima => {
            // the tempered peak has width ~lambda; keep ~64 grid points across it
            let want = (64.0 / theta.lambda).min(MAX_GRID as f64) as usize;
            n = n.max(want.next_power_of_two());
        }
    }
    n.min(MAX_GRID).max((max_lag + 1).next_power_of_two())
}

fn autocovariance_on_grid(ev: &SpectralEvaluator, n: usize, max_lag: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let season = ev.period as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..=n / 2 {
        let w = h * j as f64;
        let z = Complex64::cis(-w);
        let zs = Complex64::cis(-season * w);
        let v = ev.log_density_at(w.cos(), z, zs).exp();
        let v = Complex64::new(if v.is_finite() { v } else { 0.0 }, 0.0);
        buf[j] = v;
        if j > 0 && j < n - j {
            buf[n - j] = v;
        }
    }
    let pole = ev.family == ErrorFamily::Arfima && ev.d != 0.0;
    if pole {
        buf[0] = Complex64::new(0.0, 0.0);
    }
    fft::forward(&mut buf);
    let correction = if pole {
        -2.0 * zeta(2.0 * ev.d) * h.powf(1.0 - 2.0 * ev.d) * ev.pole_coefficient()
    } else {
        0.0
    };
    buf.iter().take(max_lag + 1).map(|c| c.re * h + correction).collect()
}

/// Coefficients `t_0..=t_n` of `|1 - e^{-lambda} e^{-iw}|^{-2d} = sum_k t_k e^{ikw}`.
///
/// `t_0` and `t_1` come from Gauss-Legendre panels that double in width away from the
/// peak at the origin. Later terms follow the recurrence
/// `r (k + 1 - d) t_{k+1} = (1 + r^2) k t_k - r (k - 1 + d) t_{k-1}`, `r = e^{-lambda}`,
/// whose unwanted solution grows like `e^{2 lambda k}` relative to the wanted one.
pub(crate) fn tempered_coefficients(d: f64, lambda: f64, n: usize) -> Vec<f64> {
    let r = (-lambda).exp();
    let gap = -(-lambda).exp_m1();
    let (nodes, weights) = gauss_legendre(PANEL_NODES);
    let mut edges = vec![0.0];
    let mut e = gap.max(1e-300);
    while e < PI {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(PI);
    let mut panel_points = Vec::new();
    for w in edges.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (x, wt) in nodes.iter().zip(&weights) {
            let omega = mid + half * x;
            let s = (0.5 * omega).sin();
            let base = gap * gap + 4.0 * r * s * s;
            panel_points.push((omega, half * wt * (-d * base.ln()).exp()));
        }
    }
    let quad = |k: usize| -> f64 { panel_points.iter().map(|(w, v)| v * (k as f64 * w).cos()).sum::<f64>() / PI };
    let mut t = Vec::with_capacity(n + 1);
    t.push(quad(0));
    if n >= 1 {
        t.push(quad(1));
    }
    for k in 1..n {
        let kf = k as f64;
        let lead = r * (kf + 1.0 - d);
        let next = if lead.abs() < 0.5 * r {
            quad(k + 1)
        } else {
            ((1.0 + r * r) * kf * t[k] - r * (kf - 1.0 + d) * t[k - 1]) / lead
        };
        t.push(next);
    }
    t
}

/// ARTFIMA autocovariances as the short-memory autocovariance convolved with the
/// tempered coefficients. Exact for small `lambda`, where the FFT grid would need
/// `O(1 / lambda)` points; `None` when the recurrence would be unstable.
fn tempered_autocovariance(theta: &ParamVector, spec: &ModelSpec, max_lag: usize) -> Result<Option<Vec<f64>>> {
    let short_spec = spec.clone().with_family(ErrorFamily::Arma);
    let short_theta = ParamVector { d: 0.0, lambda: 0.0, beta: vec![], ..theta.clone() };
    let mut reach = max_lag.max(4096);
    let (gamma_a, m) = loop {
        let g = autocovariance(&short_theta, &ModelSpec { m: 0, ..short_spec.clone() }, reach)?;
        let floor = 1e-15 * g[0];
        let m = g.iter().rposition(|v| v.abs() > floor).unwrap_or(0);
        if m < reach / 2 || reach >= ARFIMA_GRID {
            break (g, m);
        }
        reach *= 8;
    };
    let n = max_lag + m;
    if 2.0 * theta.lambda * n as f64 > RECURRENCE_GROWTH {
        return Ok(None);
    }
    let t = tempered_coefficients(theta.d, theta.lambda, n);
    // gamma(k) = sum_{|j| <= m} gamma_a(|j|) t(|k - j|)
    let gamma = if (max_lag + 1) * (2 * m + 1) <= 1 << 22 {
        (0..=max_lag)
            .map(|k| {
                (0..=2 * m)
                    .map(|i| gamma_a[i.abs_diff(m)] * t[(k + m).abs_diff(i)])
                    .sum()
            })
            .collect()
    } else {
        let a: Vec<f64> = (0..=2 * m).map(|i| gamma_a[i.abs_diff(m)]).collect();
        let b: Vec<f64> = (0..=max_lag + 2 * m).map(|j| t[j.abs_diff(m)]).collect();
        let c = fft::convolve(&a, &b, max_lag + 2 * m + 1);
        c[2 * m..].to_vec()
    };
    Ok(Some(gamma))
}

/// Autocovariances `gamma(0..=max_lag)` of the (stationary) error process.
pub fn autocovariance(theta: &ParamVector, spec: &ModelSpec, max_lag: usize) -> Result<Vec<f64>> {
    theta
        .validate(&ModelSpec { m: theta.beta.len(), ..spec.clone() })
        .map_err(|e| e.within("spectral", "autocovariance needs a stationary process"))?;
    if is_white_noise(theta, spec) {
        let mut g = vec![0.0; max_lag + 1];
        g[0] = theta.sigma2;
        return Ok(g);
    }
    if spec.family == ErrorFamily::Artfima && theta.d != 0.0 {
        let lag_grid = (8 * max_lag).max(MIN_GRID);
        if 64.0 / theta.lambda > lag_grid as f64 {
            if let Some(gamma) = tempered_autocovariance(theta, spec, max_lag)? {
                return check_gamma(gamma);
            }
        }
    }
    let ev = SpectralEvaluator::new(theta, spec);
    let n = autocovariance_grid_size(theta, spec, max_lag);
    let gamma = autocovariance_on_grid(&ev, n, max_lag);
    let gamma = if spec.family == ErrorFamily::Arfima {
        let finer = autocovariance_on_grid(&ev, 2 * n, max_lag);
        let floor = 1e-10 * finer[0].abs();
        if let Some((k, _)) = gamma
            .iter()
            .zip(&finer)
            .enumerate()
            .find(|(_, (a, b))| (*a - *b).abs() > ARFIMA_CONVERGENCE_TOL * b.abs().max(floor))
        {
            return Err(Error::eval(format!(
                "ARFIMA autocovariance did not converge at lag {k} on a grid of {}",
                2 * n
            )));
        }
        finer
    } else {
        gamma
    };
    check_gamma(gamma)
}

fn check_gamma(gamma: Vec<f64>) -> Result<Vec<f64>> {
    if !(gamma[0] > 0.0) || gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::eval(format!("autocovariance is degenerate (gamma(0) = {})", gamma[0])));
    }
    Ok(gamma)
}
