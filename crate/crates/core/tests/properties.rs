use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

mod common;

use common::{gamma_weight, hosking, noise, rel};
use semilong::exact::{gaussian_loglik, kalman_loglik};
use semilong::forecast::{conditional_forecast_path, crps, lpds, rmse};
use semilong::model::{
    difference, log_prior, pacf_to_ar, pacf_to_ma, to_natural, to_unconstrained, undifference, ModelSpec,
    ParamVector, UnconstrainedParams,
};
use semilong::sampler::{AdaptiveMetropolis, SamplerSettings};
use semilong::simulate::{periodogram_ratio_experiment, tempered_frac_weights, RatioSettings, SimConfig, SimMethod};
use semilong::spectral::{autocovariance, spectral_density};
use semilong::stats::{ks_two_sample, normal_log_pdf};
use semilong::whittle::{dft_positive, periodogram, precompute_dft, pseudo_dft, whittle_loglik};

fn pacfs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9f64..0.9, 0..=max_len)
}

fn arma_theta() -> impl Strategy<Value = (ModelSpec, ParamVector)> {
    (pacfs(3), pacfs(2), 0.2f64..4.0).prop_map(|(ar, ma, sigma2)| {
        let phi = pacf_to_ar(&ar).unwrap();
        let psi = pacf_to_ma(&ma).unwrap();
        (ModelSpec::arma(phi.len(), psi.len(), 0), ParamVector::arma(&phi, &psi, sigma2))
    })
}

/// Any family; fractional memory kept where the autocovariance is cheap to resolve.
fn any_theta() -> impl Strategy<Value = (ModelSpec, ParamVector)> {
    (pacfs(2), pacfs(1), 0.5f64..2.0, 0usize..3, -0.4f64..0.4, -0.8f64..2.2, 0.25f64..2.0).prop_map(
        |(ar, ma, sigma2, family, d_long, d_temp, lambda)| {
            let phi = pacf_to_ar(&ar).unwrap();
            let psi = pacf_to_ma(&ma).unwrap();
            let base = ParamVector::arma(&phi, &psi, sigma2);
            let (p, q) = (phi.len(), psi.len());
            match family {
                0 => (ModelSpec::arma(p, q, 0), base),
                1 => (ModelSpec::arfima(p, q, 0), base.with_memory(d_long, 0.0)),
                _ => (ModelSpec::artfima(p, q, 0), base.with_memory(d_temp, lambda)),
            }
        },
    )
}

/// Roots of `1 - sum phi_i z^i` from the companion matrix of the reversed polynomial.
fn ar_roots_outside(phi: &[f64]) -> bool {
    let p = phi.len();
    if p == 0 {
        return true;
    }
    let mut c = DMatrix::<f64>::zeros(p, p);
    for (j, v) in phi.iter().enumerate() {
        c[(0, j)] = *v;
    }
    for i in 1..p {
        c[(i, i - 1)] = 1.0;
    }
    // eigenvalues are inverse roots
    c.complex_eigenvalues().iter().all(|ev| ev.norm() < 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn kalman_matches_gaussian((spec, theta) in arma_theta(), len_pick in 0usize..3, seed in 0u64..1000) {
        let len = [64, 501, 2048][len_pick];
        let z = noise(len, seed);
        let g = gaussian_loglik(&z, &theta, &spec).unwrap();
        let k = kalman_loglik(&z, &theta, &spec).unwrap();
        prop_assert!(rel(k, g) < 1e-7, "{k} vs {g}");
    }

    #[test]
    fn weights_match_gamma_formula(d in -3.0f64..3.0, lambda in 0.0f64..2.0) {
        prop_assume!((d - d.round()).abs() > 1e-6);
        let w = tempered_frac_weights(d, lambda, 50);
        for (j, wj) in w.iter().enumerate() {
            let g = gamma_weight(d, lambda, j);
            prop_assert!((wj - g).abs() <= 1e-12 * g.abs().max(1e-300), "j={} {} vs {}", j, wj, g);
        }
    }

    #[test]
    fn tempered_weights_are_summable(d in -3.0f64..3.0, lambda in 0.05f64..2.0) {
        let l = semilong::simulate::truncation_length(d, lambda);
        let w = tempered_frac_weights(-d, lambda, 4 * l + 2000);
        let tail: f64 = w[l + 1..].iter().map(|v| v.abs()).sum();
        prop_assert!(tail < 1e-12, "L={} tail={}", l, tail);
    }

    #[test]
    fn pacf_map_is_stationary(pacf in prop::collection::vec(-0.999f64..0.999, 1..=5)) {
        let phi = pacf_to_ar(&pacf).unwrap();
        prop_assert!(ar_roots_outside(&phi));
        // invertible MA polynomial 1 + sum psi_j z^j, i.e. AR form with -psi
        let psi = pacf_to_ma(&pacf).unwrap();
        let neg: Vec<f64> = psi.iter().map(|v| -v).collect();
        prop_assert!(ar_roots_outside(&neg));
    }

    #[test]
    fn transforms_round_trip((spec, theta) in any_theta(), beta in prop::collection::vec(-5.0f64..5.0, 0..3)) {
        let spec = ModelSpec { m: beta.len(), ..spec };
        let theta = theta.with_beta(&beta);
        let u = to_unconstrained(&theta, &spec).unwrap();
        let back = to_natural(&u, &spec);
        let a = theta.to_vec(&spec);
        let b = back.to_vec(&spec);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn prior_is_finite_everywhere(values in prop::collection::vec(-40.0f64..40.0, 7)) {
        for spec in [ModelSpec::arma(2, 1, 2), ModelSpec::arfima(1, 1, 1), ModelSpec::artfima(2, 1, 0)] {
            let u = UnconstrainedParams::from_slice(&values[..spec.dim()], &spec).unwrap();
            prop_assert!(log_prior(&u, &spec).is_finite());
        }
    }

    #[test]
    fn differencing_round_trips(x in prop::collection::vec(-100.0f64..100.0, 30..80), d in 0usize..3, dd in 0usize..2, s in 1usize..6) {
        if d == 0 && dd == 0 {
            prop_assert_eq!(difference(&x, 0, 0, s).unwrap(), x.clone());
        }
        let lost = d + dd * s;
        let diffed = difference(&x, d, dd, s).unwrap();
        let back = undifference(&diffed, &x[..lost], d, dd, s).unwrap();
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn pseudo_dft_is_linear(len in 16usize..400, m in 0usize..4, seed in 0u64..10_000) {
        let y = noise(len, seed);
        let x: Vec<Vec<f64>> = (0..m).map(|k| noise(len, seed + 1 + k as u64)).collect();
        let beta: Vec<f64> = noise(m, seed + 100).iter().map(|b| 3.0 * b).collect();
        let cache = precompute_dft(&y, &x).unwrap();
        let fast = pseudo_dft(&cache, &beta).unwrap();
        let z: Vec<f64> = (0..len).map(|t| y[t] - x.iter().zip(&beta).map(|(c, b)| b * c[t]).sum::<f64>()).collect();
        let zm = z.iter().sum::<f64>() / len as f64;
        let direct = dft_positive(&z.iter().map(|v| v - zm).collect::<Vec<_>>());
        let norm: f64 = direct.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&direct) {
            prop_assert!((a - b).norm() <= 1e-9 * norm.max(1.0));
        }
    }

    #[test]
    fn parseval_holds(len in 16usize..600, seed in 0u64..10_000) {
        let y: Vec<f64> = noise(len, seed).iter().map(|v| 5.0 * v + 2.0).collect();
        let mean = y.iter().sum::<f64>() / len as f64;
        let z: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let i = periodogram(&dft_positive(&z), len);
        let mut freq = 2.0 * i.iter().sum::<f64>();
        if len % 2 == 0 {
            let nyq: f64 = z.iter().enumerate().map(|(t, v)| if t % 2 == 0 { *v } else { -v }).sum();
            freq += nyq * nyq / (2.0 * PI * len as f64);
        }
        let time = z.iter().map(|v| v * v).sum::<f64>() / (2.0 * PI);
        prop_assert!(rel(freq, time) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn autocovariance_matches_hosking(d in -0.45f64..0.45, sigma2 in 0.5f64..3.0) {
        prop_assume!(d.abs() > 1e-3);
        let spec = ModelSpec::arfima(0, 0, 0);
        let theta = ParamVector::white_noise(sigma2).with_memory(d, 0.0);
        let got = autocovariance(&theta, &spec, 200).unwrap();
        let want = hosking(d, sigma2, 200);
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            prop_assert!(rel(*g, *w) < 1e-4, "k={} {} vs {}", k, g, w);
        }
    }

    #[test]
    fn spectrum_is_even_and_integrates_to_variance((spec, theta) in any_theta(), omega in -PI..PI) {
        let a = spectral_density(omega, &theta, &spec);
        let b = spectral_density(-omega, &theta, &spec);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!(rel(a, b) < 1e-12),
            (a, b) => prop_assert!(a.is_err() && b.is_err()),
        }
        if spec.family != semilong::model::ErrorFamily::Arfima {
            let n = 1 << 16;
            let sum: f64 = (0..n)
                .map(|j| spectral_density(2.0 * PI * j as f64 / n as f64, &theta, &spec).unwrap())
                .sum();
            let g0 = autocovariance(&theta, &spec, 1).unwrap()[0];
            prop_assert!(rel(2.0 * PI * sum / n as f64, g0) < 1e-6);
        }
    }

    #[test]
    fn tempered_spectrum_is_bounded(ar in pacfs(2), d in -1.0f64..3.0, lambda in 0.05f64..2.0) {
        let phi = pacf_to_ar(&ar).unwrap();
        let spec = ModelSpec::artfima(phi.len(), 0, 0);
        let theta = ParamVector::arma(&phi, &[], 1.0).with_memory(d, lambda);
        let max = (0..=10_000)
            .map(|j| spectral_density(PI * j as f64 / 10_000.0, &theta, &spec).unwrap())
            .fold(0.0, f64::max);
        prop_assert!(max.is_finite());
    }

    #[test]
    fn toeplitz_is_positive_semidefinite((spec, theta) in any_theta(), dim in 2usize..=64) {
        let g = autocovariance(&theta, &spec, dim - 1).unwrap();
        let m = DMatrix::from_fn(dim, dim, |i, j| g[i.abs_diff(j)]);
        let min = SymmetricEigen::new(m).eigenvalues.min();
        prop_assert!(min >= -1e-8 * g[0], "min eigenvalue {}", min);
    }

    #[test]
    fn likelihoods_are_reversal_invariant((spec, theta) in arma_theta(), len in 50usize..400, seed in 0u64..1000) {
        let z = noise(len, seed);
        let rev: Vec<f64> = z.iter().rev().copied().collect();
        let a = gaussian_loglik(&z, &theta, &spec).unwrap();
        let b = gaussian_loglik(&rev, &theta, &spec).unwrap();
        prop_assert!(rel(a, b) < 1e-9);
        let ca = precompute_dft(&z, &[]).unwrap();
        let cb = precompute_dft(&rev, &[]).unwrap();
        let wa = whittle_loglik(&ca, &theta, &spec).unwrap();
        let wb = whittle_loglik(&cb, &theta, &spec).unwrap();
        prop_assert!(rel(wa, wb) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn forecast_variance_is_monotone((spec, theta) in any_theta(), seed in 0u64..1000) {
        // monotone for the infinite past; a finite window (and the quadrature behind
        // the ARFIMA autocovariance) lets antipersistent cases dip by ~1e-8 relative
        let z = noise(2048, seed);
        let path = conditional_forecast_path(&z, &theta, &spec, 40, 2048).unwrap();
        for w in path.variances.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-6), "{:?}", path.variances);
        }
    }

    #[test]
    fn acceptance_probability_is_a_probability(seed in 0u64..10_000, scale in 0.01f64..20.0) {
        let target = |x: &[f64]| if x[0] + x[1] < -1.0 { f64::NEG_INFINITY } else { -0.5 * (x[0] * x[0] + 3.0 * x[1] * x[1]) };
        let settings = SamplerSettings { seed, initial_scale: Some(scale), adapt_start: 20, ..Default::default() };
        let mut s = AdaptiveMetropolis::new(&target, &[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &settings, 0).unwrap();
        for _ in 0..200 {
            let rec = s.step();
            let alpha = rec.log_alpha.exp();
            prop_assert!((0.0..=1.0).contains(&alpha));
            prop_assert!(s.state().1.is_finite());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn crps_matches_cdf_quadrature(seed in 0u64..100_000, truth in -3.0f64..3.0, spread in 0.1f64..3.0) {
        let draws: Vec<f64> = noise(1000, seed).iter().map(|v| spread * v).collect();
        let got = crps(&draws, truth).unwrap();
        // integral of (F_M(x) - 1{x >= y})^2, exact on the piecewise-constant CDF
        let mut knots = draws.clone();
        knots.push(truth);
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let integral: f64 = knots
            .windows(2)
            .map(|w| {
                let x = 0.5 * (w[0] + w[1]);
                let f = draws.iter().filter(|v| **v <= x).count() as f64 / draws.len() as f64;
                let step = if x >= truth { 1.0 } else { 0.0 };
                (f - step).powi(2) * (w[1] - w[0])
            })
            .sum();
        prop_assert!((got - integral).abs() < 1e-3, "{} vs {}", got, integral);
    }
}

#[test]
fn crps_gaussian_closed_form() {
    let draws = noise(100_000, 4242);
    let got = crps(&draws, 0.0).unwrap();
    let want = (2f64.sqrt() - 1.0) / PI.sqrt();
    assert!((got - want).abs() < 0.01, "{got} vs {want}");
}

#[test]
fn scores_prefer_the_true_predictive() {
    // truths iid N(0, 1); predictive N(b, s^2) swept over s^2 (LPDS, CRPS) and b (RMSE)
    let truths = noise(2000, 77);
    let base = noise(400, 78);
    let scales = [0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0];
    let argmin = |v: &[f64]| v.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
    let neg_lpds: Vec<f64> = scales
        .iter()
        .map(|s2| {
            let l: Vec<f64> = truths.iter().map(|y| normal_log_pdf(*y, 0.0, *s2)).collect();
            lpds(&l).unwrap().neg_lpds
        })
        .collect();
    let mean_crps: Vec<f64> = scales
        .iter()
        .map(|s2: &f64| {
            let draws: Vec<f64> = base.iter().map(|v| v * s2.sqrt()).collect();
            truths.iter().map(|y| crps(&draws, *y).unwrap()).sum::<f64>() / truths.len() as f64
        })
        .collect();
    assert!((2..=4).contains(&argmin(&neg_lpds)), "{neg_lpds:?}");
    assert!((2..=4).contains(&argmin(&mean_crps)), "{mean_crps:?}");
    let biases = [-1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0];
    let rmses: Vec<f64> = biases
        .iter()
        .map(|b| rmse(&truths, &vec![*b; truths.len()]).unwrap())
        .collect();
    assert!((2..=4).contains(&argmin(&rmses)), "{rmses:?}");
}

#[test]
fn untempered_artfima_matches_arfima() {
    // vanishing tempering through the truncated filter vs the exact ARFIMA generator,
    // same seed; lambda itself must stay positive for the tempered family
    let d = 0.3;
    let len = 512;
    let theta = ParamVector::white_noise(1.0).with_memory(d, 1e-9);
    let settings = RatioSettings { n_reps: 600, n_low_freqs: 3, estimate_beta: false, ..Default::default() };
    let mut tempered = SimConfig::new(ModelSpec::artfima(0, 0, 0), theta.clone(), len, 31)
        .with_method(SimMethod::Truncated);
    tempered.trunc_len = Some(50_000);
    let long = SimConfig::new(ModelSpec::arfima(0, 0, 0), theta, len, 31);
    let a = periodogram_ratio_experiment(&tempered, &[], &settings).unwrap();
    let b = periodogram_ratio_experiment(&long, &[], &settings).unwrap();
    for k in 0..3 {
        let ks = ks_two_sample(&a.ratios[k], &b.ratios[k]).unwrap();
        assert!(ks.p_value > 0.001, "frequency {k}: {ks:?}");
    }
}
