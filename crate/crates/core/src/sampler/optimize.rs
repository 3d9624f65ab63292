//! MAP search: multi-start Nelder-Mead followed by a finite-difference BFGS polish.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSettings {
    /// Random starting points in addition to the fixed ones.
    pub restarts: usize,
    pub seed: u64,
    /// Evaluation budget of each Nelder-Mead run.
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for MapSettings {
    fn default() -> Self {
        Self { restarts: 20, seed: 0, max_evals: 4000, initial_step: 0.25 }
    }
}

#[derive(Debug, Clone)]
pub struct MapResult {
    pub point: Vec<f64>,
    pub log_post: f64,
    /// Inverse negative Hessian at the mode when positive definite, else `0.01 I`.
    /// Row-major.
    pub proposal_cov: Vec<f64>,
    pub hessian_pd: bool,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Minimises `f` with the adaptive-parameter Nelder-Mead simplex method.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let fv = |x: &[f64]| finite_or_inf(f(x));
    if n == 0 {
        return (vec![], fv(x0));
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| fv(x)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let (best, worst) = (values[0], values[n]);
        let spread = (worst - best).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if best.is_finite() && spread <= 1e-11 * (1.0 + best.abs()) && size < 1e-7 {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / nf).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(alpha);
        let fr = fv(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(alpha * gamma);
            let fe = fv(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(alpha * rho);
            let fc = fv(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = fv(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> =
                simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + sigma * (x - b)).collect();
            values[i] = fv(&shrunk);
            simplex[i] = shrunk;
        }
        evals += n;
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best])
}

fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

fn gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Quasi-Newton refinement from `x0` with central-difference gradients and a
/// backtracking line search. Never returns a point worse than `x0`.
pub fn bfgs_polish(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let fv = |x: &[f64]| finite_or_inf(f(x));
    let mut x = x0.to_vec();
    let mut fx = fv(&x);
    if n == 0 || !fx.is_finite() {
        return (x, fx);
    }
    let mut g = gradient(&fv, &x);
    let mut h_inv = linalg::identity(n, 1.0);
    for _ in 0..max_iter {
        let gnorm = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !gnorm.is_finite() || gnorm < 1e-8 * (1.0 + fx.abs()) {
            break;
        }
        let dir: Vec<f64> =
            (0..n).map(|i| -(0..n).map(|j| h_inv[i * n + j] * g[j]).sum::<f64>()).collect();
        let slope: f64 = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
        let (dir, slope) = if slope < 0.0 {
            (dir, slope)
        } else {
            h_inv = linalg::identity(n, 1.0);
            (g.iter().map(|v| -v).collect::<Vec<_>>(), -g.iter().map(|v| v * v).sum::<f64>())
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let fnew = fv(&xn);
            if fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = gradient(&fv, &xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g = gn;
        if sy > 1e-12 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h_inv[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h_inv[i * n + j] += (sy + yhy) * s[i] * s[j] / (sy * sy)
                        - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        if improvement < 1e-12 * (1.0 + fx.abs()) {
            break;
        }
    }
    (x, fx)
}

/// Central-difference Hessian of `f` at `x`, row-major.
pub fn numerical_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-3 * v.abs().max(1.0)).collect();
    let f0 = f(x);
    let mut out = vec![0.0; n * n];
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + h[i];
        let fp = f(&xp);
        xp[i] = x[i] - h[i];
        let fm = f(&xp);
        xp[i] = x[i];
        out[i * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                xp[i] = x[i] + si * h[i];
                xp[j] = x[j] + sj * h[j];
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// Maximises `log_post` from each of `starts` plus `settings.restarts` points drawn by
/// `draw_start`, returning the best mode and a proposal covariance seed.
pub fn find_map<F, S>(
    log_post: &F,
    starts: &[Vec<f64>],
    settings: &MapSettings,
    mut draw_start: S,
) -> Result<MapResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    S: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    let neg = |x: &[f64]| -log_post(x);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut points: Vec<Vec<f64>> = starts.to_vec();
    for _ in 0..settings.restarts {
        points.push(draw_start(&mut rng));
    }
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &points {
        if !log_post(start).is_finite() {
            continue;
        }
        let (x, fx) = nelder_mead(&neg, start, settings.initial_step, settings.max_evals);
        if !fx.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (x, _) = best.ok_or_else(|| {
        Error::Optimization(format!("log posterior not finite at any of {} starts", points.len()))
    })?;
    // a second simplex from the best point guards against premature collapse
    let (x, _) = nelder_mead(&neg, &x, 0.05, settings.max_evals);
    let (x, fx) = bfgs_polish(&neg, &x, 200);
    let hess = numerical_hessian(&neg, &x);
    let (proposal_cov, hessian_pd) = match linalg::spd_inverse(&hess, dim) {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => (inv, true),
        _ => (linalg::identity(dim, 0.01), false),
    };
    Ok(MapResult { point: x, log_post: -fx, proposal_cov, hessian_pd })
}
