//! Run configuration: one TOML file plus `--set section.key=value` overrides.
//!
//! ```toml
//! seed = 7
//! run_dir = "runs/arma31"
//!
//! [model]
//! family = "arma"
//! p = 3
//! q = 1
//! m = 1
//!
//! [data]
//! path = "data.csv"
//! y_column = "y"
//! x_columns = ["x1"]
//! lags = { x1 = 0 }
//!
//! [sampler]
//! n_iter = 10000
//! burn_in = 3000
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{FitSettings, Likelihood};
use crate::forecast::{CvSettings, ForecastSettings, RefitPolicy};
use crate::model::{ModelSpec, ParamVector, Prior};
use crate::sampler::{MapSettings, SamplerSettings};
use crate::simulate::{RatioSettings, RegressorProcess, SimMethod};

fn default_model() -> ModelSpec {
    ModelSpec::arma(0, 0, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub y_column: String,
    pub x_columns: Vec<String>,
    /// Per-regressor integer lags.
    pub lags: BTreeMap<String, usize>,
    /// Final rows kept out of estimation; `forecast` uses their regressors and scores against them.
    pub holdout: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { path: None, y_column: "y".into(), x_columns: vec![], lags: BTreeMap::new(), holdout: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub h_max: usize,
    pub n_draws: usize,
    pub window: usize,
    pub level: f64,
    pub train_len: usize,
    pub k: usize,
    pub refit: Option<RefitPolicy>,
    /// CSV with the regressor columns for the forecast period, used when `data.holdout` is 0.
    pub future_path: Option<PathBuf>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        let f = ForecastSettings::default();
        let cv = CvSettings::default();
        Self {
            h_max: f.h_max,
            n_draws: f.n_draws,
            window: f.window,
            level: f.level,
            train_len: cv.train_len,
            k: cv.k,
            refit: None,
            future_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub len: usize,
    pub burn: Option<usize>,
    pub trunc_len: Option<usize>,
    pub method: SimMethod,
    /// True parameters; `beta` must have `model.m` entries.
    pub truth: ParamVector,
    /// ARMA process generating each regressor.
    pub regressor: Option<RegressorProcess>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { len: 1000, burn: None, trunc_len: None, method: SimMethod::Auto, truth: ParamVector::default(), regressor: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub likelihoods: Vec<Likelihood>,
    /// Likelihood evaluations timed per method.
    pub timing_evals: usize,
    /// Start every chain from the Whittle MAP.
    pub warm_start: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { likelihoods: vec![Likelihood::Whittle, Likelihood::Gaussian, Likelihood::Kalman], timing_evals: 50, warm_start: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    /// `simulate.truth`.
    #[default]
    Truth,
    /// Natural-space posterior mean from `posterior.csv` in the run directory.
    Posterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n_points: usize,
    pub source: SpectrumSource,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { n_points: 512, source: SpectrumSource::Truth }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every component seed is derived from it.
    pub seed: u64,
    pub run_dir: PathBuf,
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    pub likelihood: Likelihood,
    pub prior: Prior,
    pub sampler: SamplerSettings,
    pub map: MapSettings,
    pub data: DataConfig,
    pub forecast: ForecastConfig,
    pub simulate: SimulateConfig,
    pub qq: RatioSettings,
    pub compare: CompareConfig,
    pub spectrum: SpectrumConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            run_dir: PathBuf::from("run"),
            model: default_model(),
            likelihood: Likelihood::default(),
            prior: Prior::default(),
            sampler: SamplerSettings::default(),
            map: MapSettings::default(),
            data: DataConfig::default(),
            forecast: ForecastConfig::default(),
            simulate: SimulateConfig::default(),
            qq: RatioSettings::default(),
            compare: CompareConfig::default(),
            spectrum: SpectrumConfig::default(),
        }
    }
}

/// Parses the right-hand side of `--set key=value` as a TOML value, falling back to a string.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `section.key=value` to a parsed table, creating sections as needed.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad override key `{path}`")));
    }
    let mut node = table;
    for k in &keys[..keys.len() - 1] {
        let entry = node.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{path}`: `{k}` is not a section")))?;
    }
    node.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Resolved configuration together with the merged table that produced it.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub table: toml::Table,
}

impl LoadedConfig {
    /// TOML text that re-creates this configuration exactly.
    pub fn echo(&self) -> String {
        toml::to_string(&self.table).expect("a parsed table serializes")
    }
}

/// Parses TOML text, applies overrides, and validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<LoadedConfig> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let config: RunConfig = table.clone().try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(LoadedConfig { config, table })
}

pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<LoadedConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text, overrides)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.sampler.validate()?;
        for (name, seed) in [("sampler.seed", self.sampler.seed), ("map.seed", self.map.seed)] {
            if seed != 0 {
                return Err(Error::Config(format!("`{name}` is derived from the top-level `seed`; set that instead")));
            }
        }
        if self.data.x_columns.len() != self.model.m {
            if self.data.path.is_some() {
                return Err(Error::Config(format!(
                    "model.m = {} but data.x_columns lists {} columns",
                    self.model.m,
                    self.data.x_columns.len()
                )));
            }
        }
        if !(0.0 < self.forecast.level && self.forecast.level < 1.0) {
            return Err(Error::Config(format!("forecast.level {} must lie in (0, 1)", self.forecast.level)));
        }
        if self.forecast.h_max == 0 || self.forecast.n_draws < 2 || self.forecast.window == 0 {
            return Err(Error::Config("forecast.h_max, n_draws >= 2 and window must be positive".into()));
        }
        if self.spectrum.n_points == 0 {
            return Err(Error::Config("spectrum.n_points must be positive".into()));
        }
        Ok(())
    }

    /// Fit settings with seeds derived from the master seed.
    pub fn fit_settings(&self) -> FitSettings {
        let mut sampler = self.sampler.clone();
        sampler.seed = self.seed;
        let mut map = self.map.clone();
        map.seed = self.seed;
        FitSettings { likelihood: self.likelihood, prior: self.prior, sampler, map }
    }

    pub fn forecast_settings(&self) -> ForecastSettings {
        ForecastSettings {
            h_max: self.forecast.h_max,
            n_draws: self.forecast.n_draws,
            window: self.forecast.window,
            level: self.forecast.level,
            seed: self.seed,
        }
    }

    pub fn cv_settings(&self) -> CvSettings {
        CvSettings {
            train_len: self.forecast.train_len,
            k: self.forecast.k,
            refit: self.forecast.refit,
            fit: self.fit_settings(),
            forecast: self.forecast_settings(),
        }
    }

    /// Regressor names used by generated data: the configured columns, else `x1, x2, ...`.
    pub fn regressor_names(&self) -> Vec<String> {
        if self.data.x_columns.len() == self.model.m {
            self.data.x_columns.clone()
        } else {
            (1..=self.model.m).map(|k| format!("x{k}")).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = parse_config("", &[]).unwrap().config;
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(parse_config("sed = 3", &[]).is_err());
        assert!(parse_config("[sampler]\nn_iters = 5", &[]).is_err());
        assert!(parse_config("[model]\nfamily = \"arma\"\nr = 1", &[]).is_err());
    }

    #[test]
    fn overrides_win_and_echo_round_trips() {
        let text = "seed = 3\n[model]\nfamily = \"artfima\"\np = 1\n[sampler]\nn_iter = 500\nburn_in = 100\n";
        let sets = vec!["sampler.n_iter=800".to_string(), "model.q=2".into(), "likelihood=gaussian".into()];
        let loaded = parse_config(text, &sets).unwrap();
        let c = &loaded.config;
        assert_eq!((c.sampler.n_iter, c.model.q, c.likelihood), (800, 2, Likelihood::Gaussian));
        let again = parse_config(&loaded.echo(), &[]).unwrap();
        assert_eq!(again.config, loaded.config);
    }

    #[test]
    fn nested_seeds_are_rejected() {
        assert!(parse_config("[sampler]\nseed = 4", &[]).is_err());
        let c = parse_config("seed = 9", &[]).unwrap().config;
        assert_eq!(c.fit_settings().sampler.seed, 9);
    }

    #[test]
    fn parses_truth_and_lags() {
        let text = r#"
[model]
family = "artfima"
p = 2
m = 1
[data]
path = "d.csv"
x_columns = ["x1"]
lags = { x1 = 2 }
[simulate]
len = 1001
truth = { phi = [0.742, 0.227], d = 2.139, lambda = 0.616, sigma2 = 1.0, beta = [0.1] }
"#;
        let c = parse_config(text, &[]).unwrap().config;
        assert_eq!(c.simulate.truth.phi, vec![0.742, 0.227]);
        assert_eq!(c.data.lags["x1"], 2);
        assert!(parse_config(text, &["model.m=2".into()]).is_err());
    }
}
