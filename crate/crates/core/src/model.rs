//! Model specification, parameter vectors and their reparameterisation.
//!
//! The error process of the regression `y_t = x_t' beta + eta_t` is
//!
//! ```text
//! phi(B) phi*(B^s) (1 - e^{-lambda} B)^d eta_t = psi(B) psi*(B^s) eps_t
//! ```
//!
//! with `phi(z) = 1 - sum phi_i z^i` and `psi(z) = 1 + sum psi_i z^i`. ARMA drops the
//! fractional factor (`d = 0`), ARFIMA fixes `lambda = 0` and keeps `|d| < 1/2`.
//!
//! Samplers work in an unconstrained coordinate system: every AR and MA block is
//! mapped to partial autocorrelations in `(-1, 1)` and then through `atanh`, positive
//! scalars through `log`, and the ARFIMA memory parameter through `atanh(2d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorFamily {
    Arma,
    Arfima,
    Artfima,
}

impl ErrorFamily {
    pub fn has_memory(self) -> bool {
        !matches!(self, ErrorFamily::Arma)
    }

    pub fn has_tempering(self) -> bool {
        matches!(self, ErrorFamily::Artfima)
    }
}

impl std::fmt::Display for ErrorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorFamily::Arma => "arma",
            ErrorFamily::Arfima => "arfima",
            ErrorFamily::Artfima => "artfima",
        })
    }
}

impl std::str::FromStr for ErrorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arma" => Ok(ErrorFamily::Arma),
            "arfima" => Ok(ErrorFamily::Arfima),
            "artfima" => Ok(ErrorFamily::Artfima),
            other => Err(Error::Config(format!("unknown error family `{other}`"))),
        }
    }
}

/// Orders and family of a dynamic linear regression model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: ErrorFamily,
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub q: usize,
    /// Seasonal AR order `P`.
    #[serde(default)]
    pub seasonal_p: usize,
    /// Seasonal MA order `Q`.
    #[serde(default)]
    pub seasonal_q: usize,
    /// Seasonal period `s`; present iff a seasonal order or seasonal differencing is used.
    #[serde(default)]
    pub period: Option<usize>,
    /// Integer differencing order applied to the data before fitting.
    #[serde(default)]
    pub d_int: usize,
    /// Seasonal differencing order `D`.
    #[serde(default)]
    pub seasonal_d: usize,
    /// Number of regressors.
    #[serde(default)]
    pub m: usize,
}

impl ModelSpec {
    pub fn new(family: ErrorFamily, p: usize, q: usize, m: usize) -> Self {
        Self {
            family,
            p,
            q,
            seasonal_p: 0,
            seasonal_q: 0,
            period: None,
            d_int: 0,
            seasonal_d: 0,
            m,
        }
    }

    pub fn arma(p: usize, q: usize, m: usize) -> Self {
        Self::new(ErrorFamily::Arma, p, q, m)
    }

    pub fn arfima(p: usize, q: usize, m: usize) -> Self {
        Self::new(ErrorFamily::Arfima, p, q, m)
    }

    pub fn artfima(p: usize, q: usize, m: usize) -> Self {
        Self::new(ErrorFamily::Artfima, p, q, m)
    }

    pub fn with_seasonal(mut self, seasonal_p: usize, seasonal_q: usize, period: usize) -> Self {
        self.seasonal_p = seasonal_p;
        self.seasonal_q = seasonal_q;
        self.period = Some(period);
        self
    }

    pub fn with_differencing(mut self, d_int: usize, seasonal_d: usize) -> Self {
        self.d_int = d_int;
        self.seasonal_d = seasonal_d;
        self
    }

    pub fn with_family(mut self, family: ErrorFamily) -> Self {
        self.family = family;
        self
    }

    pub fn is_seasonal(&self) -> bool {
        self.seasonal_p + self.seasonal_q > 0
    }

    /// Seasonal period, or 1 when the model has no seasonal part.
    pub fn season(&self) -> usize {
        self.period.unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        let needs_period = self.seasonal_p + self.seasonal_q + self.seasonal_d > 0;
        match self.period {
            Some(s) if s < 2 => Err(Error::domain(format!("seasonal period must be >= 2, got {s}"))),
            None if needs_period => Err(Error::domain(
                "seasonal orders or seasonal differencing require a period",
            )),
            _ => Ok(()),
        }
    }

    /// Dimension of the parameter vector `(error-process parameters, beta)`.
    pub fn dim(&self) -> usize {
        self.p
            + self.q
            + self.seasonal_p
            + self.seasonal_q
            + usize::from(self.family.has_memory())
            + usize::from(self.family.has_tempering())
            + 1
            + self.m
    }

    /// Names of the natural parameters, in layout order.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        names.extend((1..=self.p).map(|i| format!("phi{i}")));
        names.extend((1..=self.q).map(|i| format!("psi{i}")));
        names.extend((1..=self.seasonal_p).map(|i| format!("sphi{i}")));
        names.extend((1..=self.seasonal_q).map(|i| format!("spsi{i}")));
        if self.family.has_memory() {
            names.push("d".into());
        }
        if self.family.has_tempering() {
            names.push("lambda".into());
        }
        names.push("sigma2".into());
        names.extend((1..=self.m).map(|i| format!("beta{i}")));
        names
    }

    /// Names of the unconstrained coordinates, in layout order.
    pub fn unconstrained_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        names.extend((1..=self.p).map(|i| format!("phi_tilde{i}")));
        names.extend((1..=self.q).map(|i| format!("psi_tilde{i}")));
        names.extend((1..=self.seasonal_p).map(|i| format!("sphi_tilde{i}")));
        names.extend((1..=self.seasonal_q).map(|i| format!("spsi_tilde{i}")));
        if self.family.has_memory() {
            names.push("d_raw".into());
        }
        if self.family.has_tempering() {
            names.push("log_lambda".into());
        }
        names.push("log_sigma2".into());
        names.extend((1..=self.m).map(|i| format!("beta{i}")));
        names
    }
}

/// Natural-space parameters `theta = (phi, psi, phi*, psi*, d, lambda, sigma2, beta)`.
///
/// `d` is ignored for ARMA and `lambda` for ARMA and ARFIMA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamVector {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_psi: Vec<f64>,
    pub d: f64,
    pub lambda: f64,
    pub sigma2: f64,
    pub beta: Vec<f64>,
}

impl Default for ParamVector {
    fn default() -> Self {
        Self::white_noise(1.0)
    }
}

impl ParamVector {
    /// White noise with variance `sigma2` and no regressors.
    pub fn white_noise(sigma2: f64) -> Self {
        Self {
            phi: vec![],
            psi: vec![],
            seasonal_phi: vec![],
            seasonal_psi: vec![],
            d: 0.0,
            lambda: 0.0,
            sigma2,
            beta: vec![],
        }
    }

    pub fn arma(phi: &[f64], psi: &[f64], sigma2: f64) -> Self {
        Self {
            phi: phi.to_vec(),
            psi: psi.to_vec(),
            ..Self::white_noise(sigma2)
        }
    }

    pub fn with_memory(mut self, d: f64, lambda: f64) -> Self {
        self.d = d;
        self.lambda = lambda;
        self
    }

    pub fn with_seasonal(mut self, seasonal_phi: &[f64], seasonal_psi: &[f64]) -> Self {
        self.seasonal_phi = seasonal_phi.to_vec();
        self.seasonal_psi = seasonal_psi.to_vec();
        self
    }

    pub fn with_beta(mut self, beta: &[f64]) -> Self {
        self.beta = beta.to_vec();
        self
    }

    /// Effective fractional parameters `(d, lambda)` under `family`.
    pub fn memory(&self, family: ErrorFamily) -> (f64, f64) {
        match family {
            ErrorFamily::Arma => (0.0, 0.0),
            ErrorFamily::Arfima => (self.d, 0.0),
            ErrorFamily::Artfima => (self.d, self.lambda),
        }
    }

    fn check_shape(&self, spec: &ModelSpec) -> Result<()> {
        let shapes = [
            ("phi", self.phi.len(), spec.p),
            ("psi", self.psi.len(), spec.q),
            ("seasonal_phi", self.seasonal_phi.len(), spec.seasonal_p),
            ("seasonal_psi", self.seasonal_psi.len(), spec.seasonal_q),
            ("beta", self.beta.len(), spec.m),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::domain(format!("{name} has length {got}, model expects {want}")));
            }
        }
        Ok(())
    }

    /// Checks shape, stationarity, invertibility and scalar ranges against `spec`.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        spec.validate()?;
        self.check_shape(spec)?;
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::domain(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        match spec.family {
            ErrorFamily::Arma => {}
            ErrorFamily::Arfima => {
                if !(self.d.abs() < 0.5) {
                    return Err(Error::domain(format!("ARFIMA requires |d| < 0.5, got {}", self.d)));
                }
            }
            ErrorFamily::Artfima => {
                if !self.d.is_finite() {
                    return Err(Error::domain("ARTFIMA d must be finite"));
                }
                if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                    return Err(Error::domain(format!(
                        "ARTFIMA requires lambda > 0, got {}",
                        self.lambda
                    )));
                }
            }
        }
        ar_to_pacf(&self.phi).map_err(|e| e.within("core-model", "AR block"))?;
        ar_to_pacf(&self.seasonal_phi).map_err(|e| e.within("core-model", "seasonal AR block"))?;
        ma_to_pacf(&self.psi).map_err(|e| e.within("core-model", "MA block"))?;
        ma_to_pacf(&self.seasonal_psi).map_err(|e| e.within("core-model", "seasonal MA block"))?;
        Ok(())
    }

    /// Flattens to the natural layout of [`ModelSpec::param_names`].
    pub fn to_vec(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut v = Vec::with_capacity(spec.dim());
        v.extend_from_slice(&self.phi);
        v.extend_from_slice(&self.psi);
        v.extend_from_slice(&self.seasonal_phi);
        v.extend_from_slice(&self.seasonal_psi);
        if spec.family.has_memory() {
            v.push(self.d);
        }
        if spec.family.has_tempering() {
            v.push(self.lambda);
        }
        v.push(self.sigma2);
        v.extend_from_slice(&self.beta);
        v
    }

    pub fn from_slice(values: &[f64], spec: &ModelSpec) -> Result<Self> {
        if values.len() != spec.dim() {
            return Err(Error::domain(format!(
                "parameter slice has length {}, model expects {}",
                values.len(),
                spec.dim()
            )));
        }
        let mut it = values.iter().copied();
        let mut take = |n: usize| -> Vec<f64> { it.by_ref().take(n).collect() };
        let phi = take(spec.p);
        let psi = take(spec.q);
        let seasonal_phi = take(spec.seasonal_p);
        let seasonal_psi = take(spec.seasonal_q);
        let d = if spec.family.has_memory() { take(1)[0] } else { 0.0 };
        let lambda = if spec.family.has_tempering() { take(1)[0] } else { 0.0 };
        let sigma2 = take(1)[0];
        let beta = take(spec.m);
        Ok(Self {
            phi,
            psi,
            seasonal_phi,
            seasonal_psi,
            d,
            lambda,
            sigma2,
            beta,
        })
    }

    /// Coefficients `c` of the full AR lag polynomial `phi(z) phi*(z^s) = 1 - sum c_i z^i`.
    pub fn full_ar(&self, spec: &ModelSpec) -> Vec<f64> {
        let poly = lag_product(&self.phi, &self.seasonal_phi, spec.season(), -1.0);
        poly[1..].iter().map(|c| -c).collect()
    }

    /// Coefficients `c` of the full MA lag polynomial `psi(z) psi*(z^s) = 1 + sum c_i z^i`.
    pub fn full_ma(&self, spec: &ModelSpec) -> Vec<f64> {
        let poly = lag_product(&self.psi, &self.seasonal_psi, spec.season(), 1.0);
        poly[1..].to_vec()
    }
}

/// Expands `(1 + sign sum a_i z^i)(1 + sign sum b_i z^{i s})` into plain coefficients.
fn lag_product(a: &[f64], b: &[f64], s: usize, sign: f64) -> Vec<f64> {
    let mut pa = vec![1.0];
    pa.extend(a.iter().map(|c| sign * c));
    let mut pb = vec![0.0; b.len() * s + 1];
    pb[0] = 1.0;
    for (i, c) in b.iter().enumerate() {
        pb[(i + 1) * s] = sign * c;
    }
    poly_mul(&pa, &pb)
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Unconstrained coordinates used by the optimiser and the sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconstrainedParams {
    /// `atanh` of the AR partial autocorrelations.
    pub phi_tilde: Vec<f64>,
    /// `atanh` of the MA partial autocorrelations.
    pub psi_tilde: Vec<f64>,
    pub seasonal_phi_tilde: Vec<f64>,
    pub seasonal_psi_tilde: Vec<f64>,
    /// `d` for ARTFIMA, `atanh(2d)` for ARFIMA, unused for ARMA.
    pub d_raw: f64,
    pub log_lambda: f64,
    pub log_sigma2: f64,
    pub beta: Vec<f64>,
}

impl UnconstrainedParams {
    /// The origin of the unconstrained space for `spec`.
    pub fn zeros(spec: &ModelSpec) -> Self {
        Self::from_slice(&vec![0.0; spec.dim()], spec).expect("dimension matches by construction")
    }

    pub fn to_vec(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut v = Vec::with_capacity(spec.dim());
        v.extend_from_slice(&self.phi_tilde);
        v.extend_from_slice(&self.psi_tilde);
        v.extend_from_slice(&self.seasonal_phi_tilde);
        v.extend_from_slice(&self.seasonal_psi_tilde);
        if spec.family.has_memory() {
            v.push(self.d_raw);
        }
        if spec.family.has_tempering() {
            v.push(self.log_lambda);
        }
        v.push(self.log_sigma2);
        v.extend_from_slice(&self.beta);
        v
    }

    pub fn from_slice(values: &[f64], spec: &ModelSpec) -> Result<Self> {
        let natural_shape = ParamVector::from_slice(values, spec)?;
        Ok(Self {
            phi_tilde: natural_shape.phi,
            psi_tilde: natural_shape.psi,
            seasonal_phi_tilde: natural_shape.seasonal_phi,
            seasonal_psi_tilde: natural_shape.seasonal_psi,
            d_raw: natural_shape.d,
            log_lambda: natural_shape.lambda,
            log_sigma2: natural_shape.sigma2,
            beta: natural_shape.beta,
        })
    }
}

/// Maps partial autocorrelations to AR coefficients by the Durbin-Levinson recursion.
///
/// The resulting polynomial `1 - sum phi_i z^i` has every root strictly outside the
/// unit circle.
pub fn pacf_to_ar(pacf: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = pacf.iter().find(|r| !(r.abs() < 1.0)) {
        return Err(Error::domain(format!("partial autocorrelation {bad} is outside (-1, 1)")));
    }
    let mut phi: Vec<f64> = Vec::with_capacity(pacf.len());
    let mut prev = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        prev.clone_from(&phi);
        for i in 0..k {
            phi[i] = prev[i] - r * prev[k - 1 - i];
        }
        phi.push(r);
    }
    Ok(phi)
}

/// Inverse of [`pacf_to_ar`] (the step-down recursion).
pub fn ar_to_pacf(phi: &[f64]) -> Result<Vec<f64>> {
    let p = phi.len();
    let mut pacf = vec![0.0; p];
    let mut cur = phi.to_vec();
    for k in (0..p).rev() {
        let r = cur[k];
        if !(r.abs() < 1.0) {
            return Err(Error::domain(format!(
                "AR polynomial {phi:?} is not stationary (step-down coefficient {r} at order {})",
                k + 1
            )));
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let next: Vec<f64> = (0..k).map(|i| (cur[i] + r * cur[k - 1 - i]) / denom).collect();
        cur = next;
    }
    Ok(pacf)
}

/// MA block: `psi = -pacf_to_ar(-pacf)`, so `1 + sum psi_i z^i` is invertible and the
/// first-order case is the identity.
pub fn pacf_to_ma(pacf: &[f64]) -> Result<Vec<f64>> {
    let neg: Vec<f64> = pacf.iter().map(|r| -r).collect();
    Ok(pacf_to_ar(&neg)?.into_iter().map(|c| -c).collect())
}

pub fn ma_to_pacf(psi: &[f64]) -> Result<Vec<f64>> {
    let neg: Vec<f64> = psi.iter().map(|c| -c).collect();
    ar_to_pacf(&neg)
        .map(|p| p.into_iter().map(|r| -r).collect())
        .map_err(|_| Error::domain(format!("MA polynomial {psi:?} is not invertible")))
}

fn tanh_all(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| x.tanh()).collect()
}

fn atanh_all(r: &[f64]) -> Vec<f64> {
    r.iter().map(|x| x.atanh()).collect()
}

/// Maps unconstrained coordinates to natural parameters. Total on consistent input.
pub fn to_natural(u: &UnconstrainedParams, spec: &ModelSpec) -> ParamVector {
    // tanh keeps every coordinate inside (-1, 1) except when it rounds to +-1 in
    // floating point; clamp so the recursion stays finite.
    let squash = |v: &[f64]| -> Vec<f64> {
        tanh_all(v)
            .into_iter()
            .map(|r| r.clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON))
            .collect()
    };
    let phi = pacf_to_ar(&squash(&u.phi_tilde)).expect("squashed pacf is inside (-1, 1)");
    let psi = pacf_to_ma(&squash(&u.psi_tilde)).expect("squashed pacf is inside (-1, 1)");
    let seasonal_phi = pacf_to_ar(&squash(&u.seasonal_phi_tilde)).expect("inside (-1, 1)");
    let seasonal_psi = pacf_to_ma(&squash(&u.seasonal_psi_tilde)).expect("inside (-1, 1)");
    let (d, lambda) = match spec.family {
        ErrorFamily::Arma => (0.0, 0.0),
        ErrorFamily::Arfima => (u.d_raw.tanh() / 2.0, 0.0),
        ErrorFamily::Artfima => (u.d_raw, u.log_lambda.exp()),
    };
    ParamVector {
        phi,
        psi,
        seasonal_phi,
        seasonal_psi,
        d,
        lambda,
        sigma2: u.log_sigma2.exp(),
        beta: u.beta.clone(),
    }
}

/// Inverse of [`to_natural`]; fails when `theta` violates its invariants.
pub fn to_unconstrained(theta: &ParamVector, spec: &ModelSpec) -> Result<UnconstrainedParams> {
    theta.validate(spec)?;
    let (d_raw, log_lambda) = match spec.family {
        ErrorFamily::Arma => (0.0, 0.0),
        ErrorFamily::Arfima => ((2.0 * theta.d).atanh(), 0.0),
        ErrorFamily::Artfima => (theta.d, theta.lambda.ln()),
    };
    Ok(UnconstrainedParams {
        phi_tilde: atanh_all(&ar_to_pacf(&theta.phi)?),
        psi_tilde: atanh_all(&ma_to_pacf(&theta.psi)?),
        seasonal_phi_tilde: atanh_all(&ar_to_pacf(&theta.seasonal_phi)?),
        seasonal_psi_tilde: atanh_all(&ma_to_pacf(&theta.seasonal_psi)?),
        d_raw,
        log_lambda,
        log_sigma2: theta.sigma2.ln(),
        beta: theta.beta.clone(),
    })
}

/// Prior variances. Defaults: `N(0, 100)` on `log sigma2`, `log lambda` and each
/// `beta_k`; `N(0, 1)` on `d` (ARTFIMA) or `atanh(2d)` (ARFIMA); uniform on every
/// partial autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prior {
    pub log_sigma2_var: f64,
    pub log_lambda_var: f64,
    pub beta_var: f64,
    pub d_var: f64,
}

impl Default for Prior {
    fn default() -> Self {
        Self {
            log_sigma2_var: 100.0,
            log_lambda_var: 100.0,
            beta_var: 100.0,
            d_var: 1.0,
        }
    }
}

pub(crate) fn log_normal_pdf(x: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * x * x / var
}

/// `log cosh(x)` without overflow.
fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Log density of `u = atanh(r)` when `r ~ Uniform(-1, 1)`.
fn log_uniform_pacf(u: f64) -> f64 {
    -std::f64::consts::LN_2 - 2.0 * log_cosh(u)
}

impl Prior {
    /// Log prior density in the unconstrained space, Jacobians included.
    pub fn log_density(&self, u: &UnconstrainedParams, spec: &ModelSpec) -> f64 {
        let pacf: f64 = u
            .phi_tilde
            .iter()
            .chain(&u.psi_tilde)
            .chain(&u.seasonal_phi_tilde)
            .chain(&u.seasonal_psi_tilde)
            .map(|&x| log_uniform_pacf(x))
            .sum();
        let mut lp = pacf + log_normal_pdf(u.log_sigma2, self.log_sigma2_var);
        if spec.family.has_memory() {
            lp += log_normal_pdf(u.d_raw, self.d_var);
        }
        if spec.family.has_tempering() {
            lp += log_normal_pdf(u.log_lambda, self.log_lambda_var);
        }
        lp + u.beta.iter().map(|&b| log_normal_pdf(b, self.beta_var)).sum::<f64>()
    }
}

/// Log prior under the default [`Prior`].
pub fn log_prior(u: &UnconstrainedParams, spec: &ModelSpec) -> f64 {
    Prior::default().log_density(u, spec)
}

/// Coefficients of `(1 - B)^d_int (1 - B^s)^D`, lowest lag first.
fn differencing_poly(d_int: usize, seasonal_d: usize, s: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    for _ in 0..d_int {
        poly = poly_mul(&poly, &[1.0, -1.0]);
    }
    let mut seasonal = vec![0.0; s + 1];
    seasonal[0] = 1.0;
    seasonal[s] = -1.0;
    for _ in 0..seasonal_d {
        poly = poly_mul(&poly, &seasonal);
    }
    poly
}

/// Applies `(1 - B)^d_int (1 - B^s)^D`; the output is `d_int + D s` shorter.
pub fn difference(series: &[f64], d_int: usize, seasonal_d: usize, s: usize) -> Result<Vec<f64>> {
    if seasonal_d > 0 && s < 1 {
        return Err(Error::domain("seasonal differencing needs a period >= 1"));
    }
    let lost = d_int + seasonal_d * s;
    if series.len() <= lost {
        return Err(Error::domain(format!(
            "series of length {} is too short for differencing that removes {lost} points",
            series.len()
        )));
    }
    let poly = differencing_poly(d_int, seasonal_d, s);
    Ok((lost..series.len())
        .map(|t| poly.iter().enumerate().map(|(j, c)| c * series[t - j]).sum())
        .collect())
}

/// Rebuilds a series from its differences and the first `d_int + D s` original values.
pub fn undifference(
    diffed: &[f64],
    initial: &[f64],
    d_int: usize,
    seasonal_d: usize,
    s: usize,
) -> Result<Vec<f64>> {
    let lost = d_int + seasonal_d * s;
    if initial.len() != lost {
        return Err(Error::domain(format!(
            "undifferencing needs {lost} initial values, got {}",
            initial.len()
        )));
    }
    let poly = differencing_poly(d_int, seasonal_d, s);
    let mut out = Vec::with_capacity(lost + diffed.len());
    out.extend_from_slice(initial);
    for (i, dv) in diffed.iter().enumerate() {
        let t = lost + i;
        let tail: f64 = poly[1..].iter().enumerate().map(|(j, c)| c * out[t - 1 - j]).sum();
        out.push(dv - tail);
    }
    Ok(out)
}
