//! Exact Gaussian likelihoods in the time domain.
//!
//! [`gaussian_loglik`] works for every family: it takes autocovariances from the
//! spectral density and runs the Durbin-Levinson recursion, `O(T^2)` time and `O(T)`
//! memory. [`kalman_loglik`] covers ARMA errors (seasonal terms multiplied out) with a
//! Harvey-form state space, `O(T r^2)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{ErrorFamily, ModelSpec, ParamVector};
use crate::spectral::autocovariance;

/// Log density of one prediction error `e` with prediction variance `v`.
#[inline]
fn innovation_term(e: f64, v: f64) -> f64 {
    -0.5 * ((2.0 * PI * v).ln() + e * e / v)
}

fn check_series(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::domain("series is empty"));
    }
    if let Some(t) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("series is not finite at index {t}")));
    }
    Ok(())
}

/// `sum_j a_j b_{n-1-j}` with independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot_rev(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.rchunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[3 - i];
        }
    }
    let mut tail = 0.0;
    for (j, x) in ra.iter().enumerate() {
        tail += x * rb[rb.len() - 1 - j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// One Durbin-Levinson order update `a_j <- a_j - k a_{n-1-j}`, then appends `k`.
#[inline]
pub(crate) fn levinson_update(coef: &mut Vec<f64>, k: f64) {
    let n = coef.len();
    let (lo, hi) = coef.split_at_mut(n / 2);
    if n % 2 == 1 {
        hi[0] *= 1.0 - k;
    }
    for (a, b) in lo.iter_mut().zip(hi.iter_mut().rev()) {
        let (x, y) = (*a, *b);
        *a = x - k * y;
        *b = y - k * x;
    }
    coef.push(k);
}

/// Log-likelihood of `z` under a zero-mean stationary Gaussian process with
/// autocovariances `gamma` (at least `z.len()` lags).
pub fn toeplitz_loglik(z: &[f64], gamma: &[f64]) -> Result<f64> {
    check_series(z)?;
    let len = z.len();
    if gamma.len() < len {
        return Err(Error::domain(format!("need {len} autocovariances, got {}", gamma.len())));
    }
    let mut v = gamma[0];
    if !(v > 0.0) {
        return Err(Error::eval(format!("prediction variance {v} is not positive at lag 0")));
    }
    let mut ll = innovation_term(z[0], v);
    let mut coef: Vec<f64> = Vec::with_capacity(len);
    for t in 1..len {
        let k = (gamma[t] - dot_rev(&coef, &gamma[1..t])) / v;
        levinson_update(&mut coef, k);
        v *= 1.0 - k * k;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::eval(format!(
                "covariance matrix is not positive definite: prediction variance {v} at lag {t}"
            )));
        }
        ll += innovation_term(z[t] - dot_rev(&coef, &z[..t]), v);
    }
    if !ll.is_finite() {
        return Err(Error::eval("Gaussian log-likelihood is not finite"));
    }
    Ok(ll)
}

/// Exact `log N(z | 0, Gamma(theta))` for the error process of `spec`.
///
/// `z` is the (demeaned) pseudo data `y - X beta`.
pub fn gaussian_loglik(z: &[f64], theta: &ParamVector, spec: &ModelSpec) -> Result<f64> {
    check_series(z)?;
    let gamma = autocovariance(theta, spec, z.len() - 1)?;
    toeplitz_loglik(z, &gamma)
}

/// `alpha_{t+1} = transition alpha_t + state_loading eps_{t+1}`, `y_t = observation' alpha_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub r: usize,
    /// Row-major `r x r`.
    pub transition: Vec<f64>,
    pub state_loading: Vec<f64>,
    pub observation: Vec<f64>,
    pub innovation_variance: f64,
    /// Stationary state covariance, row-major `r x r`.
    pub initial_cov: Vec<f64>,
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

/// Solves `P = A P A' + Q` by the doubling iteration `P <- P + A_k P A_k'`, `A_k <- A_k^2`.
fn lyapunov(a: &[f64], q: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut p = q.to_vec();
    let mut ak = a.to_vec();
    for _ in 0..100 {
        let step = mat_mul(&mat_mul(&ak, &p, n), &transpose(&ak, n), n);
        let size = p.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let change = step.iter().map(|x| x.abs()).fold(0.0, f64::max);
        p.iter_mut().zip(&step).for_each(|(x, s)| *x += s);
        if !change.is_finite() {
            break;
        }
        if change <= 1e-17 * size {
            return Ok(p);
        }
        ak = mat_mul(&ak, &ak, n);
    }
    Err(Error::eval("stationary state covariance did not converge (non-stationary AR part?)"))
}

/// Harvey-form state space of the ARMA error process, `r = max(p, q + 1)` after
/// multiplying out seasonal polynomials.
pub fn build_state_space(theta: &ParamVector, spec: &ModelSpec) -> Result<StateSpaceModel> {
    if spec.family != ErrorFamily::Arma {
        return Err(Error::UnsupportedFamily {
            family: spec.family,
            reason: "long-memory errors have no finite-dimensional state space representation",
        });
    }
    theta.validate(&ModelSpec { m: theta.beta.len(), ..spec.clone() })?;
    let ar = theta.full_ar(spec);
    let ma = theta.full_ma(spec);
    let r = ar.len().max(ma.len() + 1);
    let mut transition = vec![0.0; r * r];
    for (i, phi) in ar.iter().enumerate() {
        transition[i * r] = *phi;
    }
    for i in 0..r - 1 {
        transition[i * r + i + 1] = 1.0;
    }
    let mut state_loading = vec![0.0; r];
    state_loading[0] = 1.0;
    state_loading[1..=ma.len()].copy_from_slice(&ma);
    let mut observation = vec![0.0; r];
    observation[0] = 1.0;
    let mut q = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            q[i * r + j] = theta.sigma2 * state_loading[i] * state_loading[j];
        }
    }
    let initial_cov = lyapunov(&transition, &q, r)?;
    Ok(StateSpaceModel {
        r,
        transition,
        state_loading,
        observation,
        innovation_variance: theta.sigma2,
        initial_cov,
    })
}

/// Prediction-error-decomposition log-likelihood from the Kalman filter, started at
/// the stationary state distribution.
pub fn kalman_loglik(z: &[f64], theta: &ParamVector, spec: &ModelSpec) -> Result<f64> {
    check_series(z)?;
    let ss = build_state_space(theta, spec)?;
    let r = ss.r;
    let t_mat = &ss.transition;
    let mut a = vec![0.0; r];
    let mut p = ss.initial_cov.clone();
    let mut gain = vec![0.0; r];
    let mut a_upd = vec![0.0; r];
    let mut row0 = vec![0.0; r];
    let mut tp = vec![0.0; r * r];
    let mut ll = 0.0;
    for (t, &y) in z.iter().enumerate() {
        let f = p[0];
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::eval(format!("Kalman prediction variance {f} at time {t}")));
        }
        let v = y - a[0];
        ll += innovation_term(v, f);
        for i in 0..r {
            gain[i] = p[i * r] / f;
            a_upd[i] = a[i] + gain[i] * v;
        }
        // P_upd = P - K P[0, :], stored back in p
        row0.copy_from_slice(&p[..r]);
        for i in 0..r {
            for j in 0..r {
                p[i * r + j] -= gain[i] * row0[j];
            }
        }
        // a = T a_upd; T is companion-like, so apply it sparsely
        for i in 0..r {
            a[i] = t_mat[i * r] * a_upd[0] + if i + 1 < r { a_upd[i + 1] } else { 0.0 };
        }
        // tp = T P_upd
        for i in 0..r {
            for j in 0..r {
                let below = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                tp[i * r + j] = t_mat[i * r] * p[j] + below;
            }
        }
        // P = tp T' + sigma2 R R'
        for i in 0..r {
            for j in 0..r {
                let below = if j + 1 < r { tp[i * r + j + 1] } else { 0.0 };
                p[i * r + j] = tp[i * r] * t_mat[j * r]
                    + below
                    + ss.innovation_variance * ss.state_loading[i] * ss.state_loading[j];
            }
        }
    }
    if !ll.is_finite() {
        return Err(Error::eval("Kalman log-likelihood is not finite"));
    }
    Ok(ll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn dense_loglik(z: &[f64], gamma: impl Fn(usize) -> f64) -> f64 {
        let n = z.len();
        let cov = DMatrix::from_fn(n, n, |i, j| gamma(i.abs_diff(j)));
        let chol = cov.cholesky().unwrap();
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let zv = DVector::from_column_slice(z);
        let quad = zv.dot(&chol.solve(&zv));
        -0.5 * (n as f64 * (2.0 * PI).ln() + logdet + quad)
    }

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn section_arma31() -> ParamVector {
        ParamVector::arma(&[0.5, -0.248, 0.1], &[0.2], 2.0)
    }

    #[test]
    fn white_noise_at_zero() {
        let ll = gaussian_loglik(&[0.0; 3], &ParamVector::white_noise(1.0), &ModelSpec::arma(0, 0, 0))
            .unwrap();
        assert!((ll + 1.5 * (2.0 * PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn ar1_matches_dense_cholesky() {
        let z = normals(4, 1);
        let phi = 0.5f64;
        let ll = gaussian_loglik(&z, &ParamVector::arma(&[phi], &[], 1.0), &ModelSpec::arma(1, 0, 0))
            .unwrap();
        let oracle = dense_loglik(&z, |k| phi.powi(k as i32) / (1.0 - phi * phi));
        assert!((ll - oracle).abs() < 1e-10);
    }

    #[test]
    fn arfima_matches_closed_form_covariance() {
        let d = 0.3f64;
        let z = normals(128, 2);
        let ll = gaussian_loglik(
            &z,
            &ParamVector::white_noise(1.0).with_memory(d, 0.0),
            &ModelSpec::arfima(0, 0, 0),
        )
        .unwrap();
        let gamma0 = statrs::function::gamma::gamma(1.0 - 2.0 * d)
            / statrs::function::gamma::gamma(1.0 - d).powi(2);
        let mut gammas = vec![gamma0];
        for k in 1..128 {
            let prev = gammas[k - 1];
            gammas.push(prev * (k as f64 - 1.0 + d) / (k as f64 - d));
        }
        let oracle = dense_loglik(&z, |k| gammas[k]);
        assert!((ll - oracle).abs() < 1e-6, "{ll} vs {oracle}");
    }

    #[test]
    fn state_space_shapes() {
        let ss = build_state_space(&ParamVector::arma(&[0.6], &[], 1.5), &ModelSpec::arma(1, 0, 0))
            .unwrap();
        assert_eq!(ss.r, 1);
        assert_eq!(ss.transition, vec![0.6]);
        assert!((ss.initial_cov[0] - 1.5 / (1.0 - 0.36)).abs() < 1e-12);
        let ss = build_state_space(&ParamVector::arma(&[], &[0.4], 1.0), &ModelSpec::arma(0, 1, 0))
            .unwrap();
        assert_eq!(ss.r, 2);
        let err = build_state_space(
            &ParamVector::white_noise(1.0).with_memory(0.2, 0.0),
            &ModelSpec::arfima(0, 0, 0),
        );
        assert!(matches!(err, Err(Error::UnsupportedFamily { .. })));
    }

    #[test]
    fn kalman_equals_gaussian_for_white_noise() {
        let z = normals(50, 3);
        let theta = ParamVector::white_noise(1.7);
        let spec = ModelSpec::arma(0, 0, 0);
        assert_eq!(
            kalman_loglik(&z, &theta, &spec).unwrap(),
            gaussian_loglik(&z, &theta, &spec).unwrap()
        );
    }

    #[test]
    fn kalman_equals_gaussian_ar1() {
        let z = normals(1000, 4);
        let theta = ParamVector::arma(&[0.7], &[], 1.0);
        let spec = ModelSpec::arma(1, 0, 0);
        let k = kalman_loglik(&z, &theta, &spec).unwrap();
        let g = gaussian_loglik(&z, &theta, &spec).unwrap();
        assert!((k - g).abs() < 1e-8 * g.abs());
    }

    #[test]
    fn kalman_equals_gaussian_arma31() {
        let spec = ModelSpec::arma(3, 1, 0);
        for (len, tol) in [(500usize, 1e-8), (5001, 1e-7)] {
            let z = normals(len, 5);
            let k = kalman_loglik(&z, &section_arma31(), &spec).unwrap();
            let g = gaussian_loglik(&z, &section_arma31(), &spec).unwrap();
            assert!((k - g).abs() < tol * g.abs(), "T={len}: {k} vs {g}");
        }
    }

    #[test]
    fn kalman_equals_gaussian_seasonal() {
        let spec = ModelSpec::arma(1, 1, 0).with_seasonal(1, 1, 4);
        let theta = ParamVector::arma(&[0.4], &[0.3], 1.0).with_seasonal(&[0.5], &[-0.2]);
        let z = normals(300, 6);
        let k = kalman_loglik(&z, &theta, &spec).unwrap();
        let g = gaussian_loglik(&z, &theta, &spec).unwrap();
        assert!((k - g).abs() < 1e-8 * g.abs());
    }

    #[test]
    fn reversal_invariance() {
        let z = normals(200, 7);
        let rev: Vec<f64> = z.iter().rev().copied().collect();
        let spec = ModelSpec::artfima(1, 0, 0);
        let theta = ParamVector::arma(&[0.3], &[], 1.0).with_memory(0.8, 0.3);
        let a = gaussian_loglik(&z, &theta, &spec).unwrap();
        let b = gaussian_loglik(&rev, &theta, &spec).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn non_pd_names_the_lag() {
        let err = toeplitz_loglik(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("lag 1"), "{err}");
    }
}
