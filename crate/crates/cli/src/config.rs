//! Experiment configuration: JSON file schema, defaults, and the resolution
//! step that turns a target sn into a radius and gates on the density
//! assumption.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ergg_core::filtering::FilterConfig;
use ergg_core::space::{
    assumption_a_s_min, assumption_a_holds, ball_mass_bounds, make_space, solve_r_for_sn,
    MassBounds, MetricSpace, SpaceKind,
};

use crate::{HarnessError, HarnessResult};

fn default_dim() -> usize {
    2
}
fn default_tau() -> f64 {
    2.0
}
fn default_filter() -> String {
    "clique".into()
}
fn default_trials() -> usize {
    50
}
fn default_budget() -> u64 {
    ergg_core::cliques::DEFAULT_CLIQUE_BUDGET
}
fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub n: usize,
    /// Exactly one of `r` and `target_sn` must be set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_sn: Option<f64>,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    /// Filter threshold: integer >= 2 for the clique method, [0,1] for
    /// jaccard.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_filter")]
    pub filter: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_budget")]
    pub clique_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub override_assumption_a: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub keep_artifacts: bool,
    #[serde(default = "default_c")]
    pub c1: f64,
    #[serde(default = "default_c")]
    pub c2: f64,
    #[serde(default = "default_c")]
    pub c3: f64,
    /// Parameters of record only: echoed into reports, never used in
    /// formulas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besicovitch_beta: Option<f64>,
}

impl ExperimentConfig {
    /// A minimal config; callers set the fields they care about.
    pub fn new(space: SpaceKind, n: usize) -> Self {
        ExperimentConfig {
            space,
            dim: default_dim(),
            n,
            r: None,
            target_sn: None,
            p: 0.0,
            q: 0.0,
            tau: default_tau(),
            filter: default_filter(),
            trials: default_trials(),
            base_seed: 0,
            clique_budget: default_budget(),
            out_dir: None,
            override_assumption_a: false,
            workers: None,
            keep_artifacts: false,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            doubling_l: None,
            besicovitch_beta: None,
        }
    }
}

/// Config with the radius and mass bounds pinned down.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub space: MetricSpace,
    pub r: f64,
    pub mass: MassBounds,
    pub assumption_a: bool,
}

impl ResolvedConfig {
    pub fn sn(&self) -> f64 {
        self.mass.s * self.config.n as f64
    }

    pub fn out_dir(&self) -> PathBuf {
        self.config
            .out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("ergg-out"))
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            method: self.config.filter.clone(),
            threshold: self.config.tau,
        }
    }
}

pub fn resolve(config: ExperimentConfig) -> HarnessResult<ResolvedConfig> {
    let space = make_space(config.space, config.dim)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    if config.n < 2 {
        return Err(HarnessError::Config("n must be >= 2".into()));
    }
    if config.trials < 1 {
        return Err(HarnessError::Config("trials must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&config.p) || !(0.0..=1.0).contains(&config.q) {
        return Err(HarnessError::Config("p and q must lie in [0, 1]".into()));
    }
    if let Some(w) = config.workers {
        if w < 1 {
            return Err(HarnessError::Config("workers must be >= 1".into()));
        }
    }
    let r = match (config.r, config.target_sn) {
        (Some(_), Some(_)) => {
            return Err(HarnessError::Config(
                "set exactly one of r and target_sn, not both".into(),
            ))
        }
        (None, None) => {
            return Err(HarnessError::Config(
                "one of r or target_sn is required".into(),
            ))
        }
        (Some(r), None) => r,
        (None, Some(sn)) => solve_r_for_sn(&space, config.n, sn)
            .map_err(|e| HarnessError::Infeasible(e.to_string()))?,
    };
    let mass = ball_mass_bounds(&space, r).map_err(|e| HarnessError::Config(e.to_string()))?;

    // the filter method/threshold must resolve against the registry
    FilterConfig {
        method: config.filter.clone(),
        threshold: config.tau,
    }
    .resolve()
    .map_err(|e| HarnessError::Config(e.to_string()))?;

    let assumption_a = assumption_a_holds(&mass, config.n);
    if !assumption_a && !config.override_assumption_a {
        return Err(HarnessError::Config(format!(
            "Assumption-A violated: s = {:.6} < 13 ln n / n = {:.6} (n = {}); \
             pass --override-assumption-a to proceed anyway",
            mass.s,
            assumption_a_s_min(config.n),
            config.n
        )));
    }
    if !assumption_a {
        log::warn!(
            "Assumption-A violated (s = {:.6} < {:.6}) but override set; theorems need not hold",
            mass.s,
            assumption_a_s_min(config.n)
        );
    }
    Ok(ResolvedConfig {
        config,
        space,
        r,
        mass,
        assumption_a,
    })
}

pub fn load_config(path: &Path) -> HarnessResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    log::info!(
        "loaded config from {}: space={} dim={} n={} trials={} filter={}@{}",
        path.display(),
        config.space,
        config.dim,
        config.n,
        config.trials,
        config.filter,
        config.tau
    );
    Ok(config)
}

pub fn save_config(config: &ExperimentConfig, path: &Path) -> HarnessResult<()> {
    let text = serde_json::to_string_pretty(config)
        .map_err(|e| HarnessError::Other(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}
