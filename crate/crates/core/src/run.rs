//! Command dispatch and run-directory management.
//!
//! Every command writes `config.echo` first and `diagnostics.json` last. A failed
//! command leaves an `error.json` record and an `INCOMPLETE` marker listing the files
//! it had already written.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::config::{LoadedConfig, RunConfig, SpectrumSource};
use crate::error::{Error, Result};
use crate::fit::{fit_posterior, natural_mean, posterior_map, FitResult, Likelihood, Posterior, WarmStart};
use crate::forecast::{crps, dic, posterior_predictive, rolling_cv, thin};
use crate::io::{load_csv, read_table, write_dataset, write_json, write_table, Dataset};
use crate::model::{ModelSpec, ParamVector};
use crate::simulate::{periodogram_ratio_experiment, simulate_dlr, SimConfig};
use crate::spectral::{spectral_density, SpectrumGrid};
use crate::stats;
use crate::whittle::{conditional_beta, fourier_frequencies, periodogram, precompute_dft, pseudo_dft};

/// Draws used for the DIC of a fit; the chain is thinned uniformly down to this.
const DIC_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Forecast,
    Evaluate,
    Simulate,
    QqExperiment,
    Compare,
    Spectrum,
    Periodogram,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Fit,
        Command::Forecast,
        Command::Evaluate,
        Command::Simulate,
        Command::QqExperiment,
        Command::Compare,
        Command::Spectrum,
        Command::Periodogram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::Simulate => "simulate",
            Command::QqExperiment => "qq-experiment",
            Command::Compare => "compare",
            Command::Spectrum => "spectrum",
            Command::Periodogram => "periodogram",
        }
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Machine-readable failure record, also printed by the binary.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub command: String,
    pub module: Option<&'static str>,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(command: Command, err: &Error) -> Self {
        Self { status: "error", command: command.to_string(), module: err.module(), message: err.to_string() }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub command: Command,
    pub run_dir: PathBuf,
    pub files: Vec<String>,
}

struct RunDir {
    root: PathBuf,
    written: Vec<String>,
}

impl RunDir {
    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    fn table(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
        let p = self.path(name);
        write_table(&p, header, rows)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        write_json(&p, value)
    }
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Runs `command` and writes its outputs under `config.run_dir`.
pub fn dispatch(command: Command, loaded: &LoadedConfig) -> Result<RunOutcome> {
    let cfg = &loaded.config;
    std::fs::create_dir_all(&cfg.run_dir)?;
    for stale in ["INCOMPLETE", "error.json"] {
        let p = cfg.run_dir.join(stale);
        if p.exists() {
            std::fs::remove_file(p)?;
        }
    }
    let mut dir = RunDir { root: cfg.run_dir.clone(), written: vec![] };
    std::fs::write(dir.path("config.echo"), loaded.echo())?;
    let started = Instant::now();
    let result = match command {
        Command::Simulate => cmd_simulate(cfg, &mut dir),
        Command::Fit => cmd_fit(cfg, &mut dir),
        Command::Forecast => cmd_forecast(cfg, &mut dir),
        Command::Evaluate => cmd_evaluate(cfg, &mut dir),
        Command::QqExperiment => cmd_qq(cfg, &mut dir),
        Command::Compare => cmd_compare(cfg, &mut dir),
        Command::Spectrum => cmd_spectrum(cfg, &mut dir),
        Command::Periodogram => cmd_periodogram(cfg, &mut dir),
    };
    match result {
        Ok(mut diag) => {
            diag["status"] = json!("complete");
            diag["seconds"] = json!(started.elapsed().as_secs_f64());
            // one section per command, so `forecast` keeps what `fit` reported
            let mut all = std::fs::read_to_string(dir.root.join("diagnostics.json"))
                .ok()
                .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
                .filter(|v| v.is_object())
                .unwrap_or_else(|| json!({}));
            all[command.name()] = diag;
            all["status"] = json!("complete");
            all["command"] = json!(command.name());
            dir.json("diagnostics.json", &all)?;
            Ok(RunOutcome { command, run_dir: dir.root, files: dir.written })
        }
        Err(err) => {
            let err = if err.module().is_some() { err } else { err.within("cli-io", format!("`{command}` failed")) };
            let marker = format!("incomplete: `{command}` failed\nwritten before the failure:\n{}\n", dir.written.join("\n"));
            // best effort: the original error is what the caller needs to see
            let _ = std::fs::write(dir.root.join("INCOMPLETE"), marker);
            let _ = write_json(&dir.root.join("error.json"), &ErrorRecord::new(command, &err));
            Err(err)
        }
    }
}

/// Seed for the `k`-th simulated regressor.
fn regressor_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(1 + k as u64)
}

fn sim_config(cfg: &RunConfig) -> SimConfig {
    SimConfig {
        spec: cfg.model.clone(),
        theta_true: cfg.simulate.truth.clone(),
        len: cfg.simulate.len,
        burn: cfg.simulate.burn,
        trunc_len: cfg.simulate.trunc_len,
        seed: cfg.seed,
        method: cfg.simulate.method,
    }
}

fn simulated_regressors(cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    if cfg.model.m == 0 {
        return Ok(vec![]);
    }
    let process = cfg
        .simulate
        .regressor
        .as_ref()
        .ok_or_else(|| Error::Config("model.m > 0 needs [simulate.regressor] to generate regressors".into()))?;
    (0..cfg.model.m).map(|k| process.simulate(cfg.simulate.len, regressor_seed(cfg.seed, k))).collect()
}

fn cmd_simulate(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let sc = sim_config(cfg);
    sc.theta_true.validate(&sc.spec).map_err(|e| e.within("simulate", "true parameters"))?;
    let x = simulated_regressors(cfg).map_err(|e| e.within("simulate", "regressors"))?;
    let data = simulate_dlr(&sc, &x).map_err(|e| e.within("simulate", "error process"))?;
    let ds = Dataset {
        time_index: (0..sc.len).map(|t| t.to_string()).collect(),
        y: data.y,
        x: data.x,
        y_name: cfg.data.y_column.clone(),
        x_names: cfg.regressor_names(),
        transform_log: vec![],
    };
    let p = dir.path("data.csv");
    write_dataset(&p, &ds)?;
    Ok(json!({ "len": sc.len, "burn": sc.burn(), "truth": sc.theta_true, "method": sc.method }))
}

/// Data for estimation: configured file or the run directory's `data.csv`, differenced
/// as the model asks. Returns `(estimation rows, held-out rows)`.
fn load_data(cfg: &RunConfig) -> Result<(Dataset, Option<Dataset>)> {
    let path = match &cfg.data.path {
        Some(p) => p.clone(),
        None => {
            let p = cfg.run_dir.join("data.csv");
            if !p.exists() {
                return Err(Error::Config("no data: set data.path or run `simulate` into this run directory".into()));
            }
            p
        }
    };
    let ds = load_csv(&path, &cfg.data.y_column, &cfg.regressor_names(), &cfg.data.lags)
        .map_err(|e| e.within("cli-io", "loading data"))?;
    let ds = ds.difference(cfg.model.d_int, cfg.model.seasonal_d, cfg.model.season())?;
    if cfg.data.holdout == 0 {
        return Ok((ds, None));
    }
    let (head, tail) = ds.split_tail(cfg.data.holdout)?;
    Ok((head, Some(tail)))
}

fn posterior_header(spec: &ModelSpec) -> Vec<String> {
    let mut h = spec.param_names();
    h.push("log_post".into());
    h
}

fn write_posterior(dir: &mut RunDir, name: &str, fit: &FitResult) -> Result<()> {
    let rows: Vec<Vec<f64>> = fit
        .natural_draws()
        .iter()
        .zip(&fit.chain.log_post)
        .map(|(t, lp)| {
            let mut r = t.to_vec(&fit.spec);
            r.push(*lp);
            r
        })
        .collect();
    dir.table(name, &posterior_header(&fit.spec), &rows)
}

/// Natural-space draws from a `posterior.csv` written for `spec`.
pub fn read_posterior(path: &Path, spec: &ModelSpec) -> Result<Vec<ParamVector>> {
    let (header, rows) = read_table(path)?;
    if header != posterior_header(spec) {
        return Err(Error::Config(format!(
            "{} has columns {:?}, the configured model expects {:?}",
            path.display(),
            header,
            posterior_header(spec)
        )));
    }
    rows.iter().map(|r| ParamVector::from_slice(&r[..spec.dim()], spec)).collect()
}

fn summary(spec: &ModelSpec, draws: &[ParamVector]) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = draws.iter().map(|t| t.to_vec(spec)).collect();
    let mut out = serde_json::Map::new();
    for (j, name) in spec.param_names().iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let s = stats::sorted(&col);
        out.insert(
            name.clone(),
            json!({
                "mean": stats::mean(&col),
                "sd": if col.len() > 1 { stats::variance(&col).sqrt() } else { 0.0 },
                "q025": stats::quantile_sorted(&s, 0.025),
                "q975": stats::quantile_sorted(&s, 0.975),
            }),
        );
    }
    serde_json::Value::Object(out)
}

fn fit_diagnostics(post: &Posterior, fit: &FitResult, seconds: f64) -> Result<serde_json::Value> {
    let spec = post.spec();
    let draws = fit.natural_draws();
    let ess: serde_json::Map<String, serde_json::Value> = spec
        .unconstrained_names()
        .into_iter()
        .zip(&fit.chain.ess)
        .map(|(n, e)| (n, json!(e)))
        .collect();
    let for_dic = thin(&draws, DIC_DRAWS);
    let dic = dic(&for_dic, spec, |t| post.log_likelihood(t)).map_err(|e| e.within("forecast-eval", "DIC"))?;
    Ok(json!({
        "model": spec,
        "likelihood": fit.likelihood,
        "map_point": post.natural(&fit.map_point)?.to_vec(spec),
        "map_log_post": fit.map_log_post,
        "kept_draws": fit.chain.draws.len(),
        "accept_rate": fit.chain.accept_rate,
        "scale_final": fit.chain.scale_final,
        "ess": ess,
        "posterior": summary(spec, &draws),
        "dic": dic,
        "dic_draws": for_dic.len(),
        "fit_seconds": seconds,
    }))
}

fn cmd_fit(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let (data, _) = load_data(cfg)?;
    let settings = cfg.fit_settings();
    let post = Posterior::new(&data.y, &data.x, &cfg.model, settings.likelihood, settings.prior)
        .map_err(|e| e.within("freq-likelihood", "building the posterior"))?;
    let t = Instant::now();
    let fit = fit_posterior(&post, &settings, None)?;
    let seconds = t.elapsed().as_secs_f64();
    write_posterior(dir, "posterior.csv", &fit)?;
    let mut diag = fit_diagnostics(&post, &fit, seconds)?;
    diag["data"] = json!({ "len": data.len(), "transform_log": data.transform_log });
    Ok(diag)
}

fn future_regressors(cfg: &RunConfig, holdout: Option<&Dataset>, h_max: usize) -> Result<Vec<Vec<f64>>> {
    if cfg.model.m == 0 {
        return Ok(vec![]);
    }
    if let Some(h) = holdout {
        return Ok(h.x.iter().map(|c| c[..h_max].to_vec()).collect());
    }
    let path = cfg.forecast.future_path.as_ref().ok_or_else(|| {
        Error::Config("forecasting with regressors needs data.holdout > 0 or forecast.future_path".into())
    })?;
    let names = cfg.regressor_names();
    let fut = load_csv(path, &names[0], &names, &Default::default())?;
    if fut.len() < h_max {
        return Err(Error::Config(format!("{} has {} rows, forecast.h_max is {h_max}", path.display(), fut.len())));
    }
    Ok(fut.x.iter().map(|c| c[..h_max].to_vec()).collect())
}

fn cmd_forecast(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let (data, holdout) = load_data(cfg)?;
    let draws = read_posterior(&cfg.run_dir.join("posterior.csv"), &cfg.model)
        .map_err(|e| e.within("cli-io", "reading posterior.csv (run `fit` first)"))?;
    let fs = cfg.forecast_settings();
    if let Some(h) = &holdout {
        if h.len() < fs.h_max {
            return Err(Error::Config(format!("data.holdout = {} is shorter than forecast.h_max = {}", h.len(), fs.h_max)));
        }
    }
    let xf = future_regressors(cfg, holdout.as_ref(), fs.h_max)?;
    let table = posterior_predictive(&data.y, &data.x, &xf, &draws, &cfg.model, &fs)
        .map_err(|e| e.within("forecast-eval", "posterior predictive"))?;
    let mut header = names(&["horizon", "point", "lower", "upper"]);
    let mut rows: Vec<Vec<f64>> = (0..fs.h_max)
        .map(|h| vec![(h + 1) as f64, table.point[h], table.lower[h], table.upper[h]])
        .collect();
    let mut scored = None;
    if let Some(h) = &holdout {
        header.extend(names(&["truth", "log_density", "crps"]));
        let mut ld = Vec::new();
        for (i, row) in rows.iter_mut().enumerate() {
            let truth = h.y[i];
            let l = table.log_predictive_density(i, truth);
            let c = crps(&table.draws[i], truth)?;
            ld.push(l);
            row.extend([truth, l, c]);
        }
        scored = Some(ld);
    }
    dir.table("forecast.csv", &header, &rows)?;
    let draw_header: Vec<String> = (1..=fs.h_max).map(|h| format!("h{h}")).collect();
    let draw_rows: Vec<Vec<f64>> = (0..table.draws[0].len()).map(|m| table.draws.iter().map(|d| d[m]).collect()).collect();
    dir.table("forecast_draws.csv", &draw_header, &draw_rows)?;
    Ok(json!({
        "h_max": fs.h_max,
        "draws_used": table.draws[0].len(),
        "level": fs.level,
        "window": fs.window.min(data.len()),
        "scored": scored.is_some(),
    }))
}

fn cmd_evaluate(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let (data, _) = load_data(cfg)?;
    let cv = cfg.cv_settings();
    let res = rolling_cv(&data.y, &data.x, &cfg.model, &cv).map_err(|e| e.within("forecast-eval", "rolling evaluation"))?;
    let rows: Vec<Vec<f64>> = res
        .metrics
        .iter()
        .map(|m| vec![m.horizon as f64, m.n_points as f64, m.neg_lpds, m.rmse, m.crps, m.n_excluded as f64])
        .collect();
    dir.table("metrics_h.csv", &names(&["horizon", "n_points", "neg_lpds", "rmse", "crps", "n_excluded"]), &rows)?;
    let score_rows: Vec<Vec<f64>> = res
        .scores
        .iter()
        .map(|s| vec![s.origin as f64, s.horizon as f64, s.truth, s.point, s.log_density, s.crps])
        .collect();
    dir.table("scores.csv", &names(&["origin", "horizon", "truth", "point", "log_density", "crps"]), &score_rows)?;
    Ok(json!({
        "policy": res.policy,
        "train_len": cv.train_len,
        "k": cv.k,
        "h_max": cv.forecast.h_max,
        "skipped_windows": res.skipped,
    }))
}

fn cmd_qq(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let sc = sim_config(cfg);
    let x = simulated_regressors(cfg)?;
    let exp = periodogram_ratio_experiment(&sc, &x, &cfg.qq).map_err(|e| e.within("simulate", "periodogram ratios"))?;
    let k = exp.omegas.len();
    let n = cfg.qq.n_reps;
    let mut header = vec!["replicate".to_string()];
    header.extend((1..=k).map(|j| format!("ratio{j}")));
    header.push("exp_quantile".into());
    header.extend((1..=k).map(|j| format!("sorted{j}")));
    let sorted: Vec<Vec<f64>> = exp.ratios.iter().map(|r| stats::sorted(r)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let p = (r as f64 + 0.5) / n as f64;
            let mut row = vec![r as f64];
            row.extend(exp.ratios.iter().map(|c| c[r]));
            row.push(-(1.0 - p).ln());
            row.extend(sorted.iter().map(|c| c[r]));
            row
        })
        .collect();
    dir.table("qq_ratios.csv", &header, &rows)?;
    Ok(json!({ "omegas": exp.omegas, "ks": exp.ks, "n_reps": n, "len": sc.len, "estimate_beta": cfg.qq.estimate_beta }))
}

/// Mean wall time of one log-likelihood evaluation at `theta`.
fn time_loglik(post: &Posterior, theta: &ParamVector, evals: usize) -> Result<f64> {
    post.log_likelihood(theta)?;
    let t = Instant::now();
    for _ in 0..evals.max(1) {
        std::hint::black_box(post.log_likelihood(std::hint::black_box(theta))?);
    }
    Ok(t.elapsed().as_secs_f64() / evals.max(1) as f64)
}

fn cmd_compare(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let (data, _) = load_data(cfg)?;
    let settings = cfg.fit_settings();
    let spec = &cfg.model;
    let t = Instant::now();
    let whittle = Posterior::new(&data.y, &data.x, spec, Likelihood::Whittle, settings.prior)?;
    let cache_seconds = t.elapsed().as_secs_f64();
    let warm = if cfg.compare.warm_start {
        let map = posterior_map(&whittle, &settings.map)?;
        Some(WarmStart { point: map.point, proposal_cov: map.proposal_cov })
    } else {
        None
    };
    let mut means = Vec::new();
    let mut sds = Vec::new();
    let mut timing = Vec::new();
    let mut report = serde_json::Map::new();
    for &lik in &cfg.compare.likelihoods {
        let post = Posterior::new(&data.y, &data.x, spec, lik, settings.prior)?;
        let t = Instant::now();
        let fit = fit_posterior(&post, &settings, warm.clone())?;
        let fit_seconds = t.elapsed().as_secs_f64();
        write_posterior(dir, &format!("posterior_{lik}.csv"), &fit)?;
        let draws = fit.natural_draws();
        let mean = natural_mean(&draws, spec);
        let rows: Vec<Vec<f64>> = draws.iter().map(|d| d.to_vec(spec)).collect();
        let sd: Vec<f64> = (0..mean.len())
            .map(|j| stats::variance(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()).sqrt())
            .collect();
        let theta = ParamVector::from_slice(&mean, spec)?;
        let per_eval = time_loglik(&post, &theta, cfg.compare.timing_evals)?;
        timing.push(vec![per_eval, fit_seconds, fit.chain.accept_rate]);
        report.insert(
            lik.to_string(),
            json!({ "posterior": summary(spec, &draws), "seconds_per_eval": per_eval,
                    "fit_seconds": fit_seconds, "accept_rate": fit.chain.accept_rate }),
        );
        means.push(mean);
        sds.push(sd);
    }
    let mut header = vec!["parameter".to_string()];
    for lik in &cfg.compare.likelihoods {
        header.push(format!("{lik}_mean"));
        header.push(format!("{lik}_sd"));
    }
    let mut w = csv::Writer::from_path(dir.path("compare.csv"))?;
    w.write_record(&header)?;
    for (j, name) in spec.param_names().iter().enumerate() {
        let mut rec = vec![name.clone()];
        for (m, s) in means.iter().zip(&sds) {
            rec.push(crate::io::fmt_f64(m[j]));
            rec.push(crate::io::fmt_f64(s[j]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.path("timing.csv"))?;
    w.write_record(["likelihood", "seconds_per_eval", "fit_seconds", "accept_rate"])?;
    for (lik, row) in cfg.compare.likelihoods.iter().zip(&timing) {
        let mut rec = vec![lik.to_string()];
        rec.extend(row.iter().map(|v| crate::io::fmt_f64(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(json!({ "likelihoods": report, "dft_cache_seconds": cache_seconds, "data_len": data.len() }))
}

/// Parameters for `spectrum` and `periodogram`: the configured truth or the posterior mean.
fn spectrum_theta(cfg: &RunConfig) -> Result<ParamVector> {
    match cfg.spectrum.source {
        SpectrumSource::Truth => {
            cfg.simulate.truth.validate(&cfg.model)?;
            Ok(cfg.simulate.truth.clone())
        }
        SpectrumSource::Posterior => {
            let draws = read_posterior(&cfg.run_dir.join("posterior.csv"), &cfg.model)?;
            ParamVector::from_slice(&natural_mean(&draws, &cfg.model), &cfg.model)
        }
    }
}

fn cmd_spectrum(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let theta = spectrum_theta(cfg)?;
    let grid = SpectrumGrid::uniform(cfg.spectrum.n_points, &theta, &cfg.model)
        .map_err(|e| e.within("spectral", "spectral density"))?;
    let rows: Vec<Vec<f64>> = grid.omegas.iter().zip(&grid.values).map(|(w, f)| vec![*w, *f, f.ln()]).collect();
    dir.table("spectrum.csv", &names(&["omega", "density", "log_density"]), &rows)?;
    Ok(json!({ "theta": theta, "source": cfg.spectrum.source, "n_points": cfg.spectrum.n_points }))
}

fn cmd_periodogram(cfg: &RunConfig, dir: &mut RunDir) -> Result<serde_json::Value> {
    let (data, _) = load_data(cfg)?;
    let theta = spectrum_theta(cfg)?;
    let cache = precompute_dft(&data.y, &data.x)?;
    let beta = if cfg.model.m == 0 {
        vec![]
    } else {
        conditional_beta(&cache, &theta, &cfg.model, f64::INFINITY)?
    };
    let i = periodogram(&pseudo_dft(&cache, &beta)?, data.len());
    let omegas = fourier_frequencies(data.len());
    let rows: Vec<Vec<f64>> = omegas
        .iter()
        .zip(&i)
        .map(|(&w, &iw)| -> Result<Vec<f64>> {
            let f = spectral_density(w, &theta, &cfg.model)?;
            Ok(vec![w, iw, f, iw / f])
        })
        .collect::<Result<_>>()?;
    dir.table("periodogram.csv", &names(&["omega", "periodogram", "density", "ratio"]), &rows)?;
    Ok(json!({ "theta": theta, "beta_gls": beta, "len": data.len(), "source": cfg.spectrum.source }))
}
