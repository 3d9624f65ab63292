//! Effective sample size from FFT autocorrelations with Geyer's initial positive
//! sequence truncation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Ess {
    pub value: f64,
    /// Set when the chain is constant and no autocorrelation can be estimated.
    pub degenerate: bool,
}

/// Biased autocorrelations `rho_0..rho_{n-1}` via zero-padded FFT.
pub fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (b, v) in buf.iter_mut().zip(x) {
        b.re = v - mean;
    }
    fft::forward(&mut buf);
    for b in buf.iter_mut() {
        *b = Complex64::new(b.norm_sqr(), 0.0);
    }
    fft::inverse(&mut buf);
    let c0 = buf[0].re;
    buf.iter().take(n).map(|c| c.re / c0).collect()
}

/// `N / (1 + 2 sum rho_k)`, with the sum cut where consecutive pairs
/// `rho_{2m} + rho_{2m+1}` stop being positive and forced monotone.
///
/// The result is capped at `N log10 N`, which keeps antithetic chains (negative
/// lag-one correlation, ESS above `N`) finite.
pub fn effective_sample_size(chain: &[f64]) -> Result<Ess> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::domain(format!("ESS needs at least 100 draws, got {n}")));
    }
    if chain.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("chain contains non-finite values"));
    }
    let first = chain[0];
    let scale = chain.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if chain.iter().all(|v| (v - first).abs() <= 1e-14 * scale) {
        return Ok(Ess { value: 0.0, degenerate: true });
    }
    let rho = autocorrelation(chain);
    let mut sum_pairs = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = rho[2 * m] + rho[2 * m + 1];
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum_pairs += pair;
        prev = pair;
        m += 1;
    }
    let tau = (2.0 * sum_pairs - 1.0).max(0.0);
    let cap = n as f64 * (n as f64).log10();
    let value = if tau > 0.0 { (n as f64 / tau).min(cap) } else { cap };
    Ok(Ess { value, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn iid_chain_is_efficient() {
        let n = 10_000;
        let ess = effective_sample_size(&normals(n, 1)).unwrap();
        assert!(ess.value > 0.9 * n as f64 && ess.value < 1.1 * n as f64, "{}", ess.value);
    }

    #[test]
    fn ar1_chain_inefficiency() {
        let n = 200_000;
        let rho = 0.9;
        let e = normals(n, 2);
        let mut x = vec![0.0; n];
        for t in 1..n {
            x[t] = rho * x[t - 1] + e[t];
        }
        let expected = n as f64 * (1.0 - rho) / (1.0 + rho);
        let ess = effective_sample_size(&x).unwrap().value;
        assert!((ess / expected - 1.0).abs() < 0.2, "{ess} vs {expected}");
    }

    #[test]
    fn antithetic_chain_exceeds_n() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ess = effective_sample_size(&x).unwrap();
        assert!(ess.value > 1000.0 && ess.value.is_finite());
    }

    #[test]
    fn constant_chain_is_degenerate() {
        let ess = effective_sample_size(&[2.5; 200]).unwrap();
        assert_eq!(ess, Ess { value: 0.0, degenerate: true });
        assert!(effective_sample_size(&[1.0; 50]).is_err());
    }
}
