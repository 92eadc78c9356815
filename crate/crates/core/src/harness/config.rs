use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bamdp::DiscountConfig;
use crate::crp::{AlphaMode, PoolConfig};
use crate::error::{Error, Result};
use crate::planners::{BamcpConfig, RolloutPolicy};

/// Environments selectable by id.
/// Default cutoff: search stops once gamma^d falls below this.
pub const CUTOFF_FRACTION: f64 = 0.2;

pub const DOMAINS: [&str; 6] = [
    "chain1",
    "chain2",
    "payoff",
    "crp-bandit",
    "mushroom",
    "drilling",
];
/// Planners selectable by id.
pub const PLANNERS: [&str; 6] = ["bamcp", "ts", "psrl", "boss", "exit", "mean-greedy"];

/// One experiment, read from a flat TOML table. Missing keys take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub domain: String,
    pub planner: String,
    pub gamma: f64,
    pub steps: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Seeds the planner and inference streams instead of `seed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planner_seed: Option<u64>,
    /// Worker threads for replicates; 0 uses every core.
    pub threads: usize,

    pub simulations: usize,
    /// UCB constant; unset uses the reward range on subtask domains and
    /// range / (1 - gamma) elsewhere.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploration: Option<f64>,
    /// Search cutoff; unset uses `CUTOFF_FRACTION * rmax`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// `uniform` or `exit-biased`; unset picks per domain family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rollout: Option<String>,
    pub exit_prob: f64,

    pub chain_x: usize,
    pub payoff_p: f64,
    pub payoff_c1: f64,
    pub payoff_n: usize,

    /// Concentration of the synthetic true world.
    pub true_alpha: f64,
    /// `known` (the planner is given `true_alpha`) or `hyper`.
    pub alpha_mode: String,
    pub hyper_shape: f64,
    pub hyper_rate: f64,
    pub free_examples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<PathBuf>,

    pub burn_in: usize,
    /// Warm-start sweeps before each tree-search decision after the first.
    pub step_sweeps: usize,
    /// Sweeps before each posterior-sampling decision after the first.
    pub ts_sweeps: usize,
    pub pool_size: usize,
    pub pool_sweeps: usize,
    pub pool_period: usize,

    pub boss_samples: usize,
    pub boss_resample: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psrl_commit: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let pool = PoolConfig::default();
        Self {
            domain: "crp-bandit".into(),
            planner: "bamcp".into(),
            gamma: 0.96,
            steps: 120,
            replicates: 50,
            seed: 1,
            planner_seed: None,
            threads: 0,
            simulations: 5_000,
            exploration: None,
            epsilon: None,
            rollout: None,
            exit_prob: 0.8,
            chain_x: 3,
            payoff_p: 0.5,
            payoff_c1: -10.0,
            payoff_n: 0,
            true_alpha: 1.0,
            alpha_mode: "known".into(),
            hyper_shape: 0.5,
            hyper_rate: 0.5,
            free_examples: 0,
            data_dir: None,
            burn_in: 500,
            step_sweeps: 10,
            ts_sweeps: 500,
            pool_size: pool.pool_size,
            pool_sweeps: pool.sweeps_between_refresh,
            pool_period: pool.refresh_period,
            boss_samples: 2,
            boss_resample: 1,
            psrl_commit: None,
            out: None,
        }
    }
}

/// Named budget presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Reduced budgets for a workstation.
    Desk,
    /// Sixty thousand simulations per step.
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!(
                "unknown profile `{other}` (desk|paper)"
            ))),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat table serializes")
    }

    pub fn apply_profile(&mut self, profile: Profile) {
        self.simulations = match (profile, self.domain.as_str()) {
            (Profile::Paper, _) => 60_000,
            (Profile::Desk, "mushroom") => 10_000,
            (Profile::Desk, _) => 5_000,
        };
        if self.domain == "mushroom" {
            self.replicates = match profile {
                Profile::Desk => 20,
                Profile::Paper => self.replicates.max(20),
            };
        }
    }

    pub fn is_subtask_domain(&self) -> bool {
        matches!(self.domain.as_str(), "crp-bandit" | "mushroom" | "drilling")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !DOMAINS.contains(&self.domain.as_str()) {
            return bad(format!(
                "unknown domain `{}` (one of {DOMAINS:?})",
                self.domain
            ));
        }
        if !PLANNERS.contains(&self.planner.as_str()) {
            return bad(format!(
                "unknown planner `{}` (one of {PLANNERS:?})",
                self.planner
            ));
        }
        if self.replicates == 0 || self.steps == 0 {
            return bad("replicates and steps must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma {} outside (0,1)", self.gamma));
        }
        let subtask = self.is_subtask_domain();
        match self.planner.as_str() {
            "psrl" | "boss" if subtask => {
                return bad(format!(
                    "{} runs only on chain and payoff domains",
                    self.planner
                ))
            }
            "mean-greedy" if !subtask => {
                return bad("mean-greedy runs only on subtask domains".into())
            }
            "exit" if self.domain.starts_with("chain") => {
                return bad("chain domains have no neutral action".into())
            }
            _ => {}
        }
        if !matches!(self.alpha_mode.as_str(), "known" | "hyper") {
            return bad(format!(
                "alpha_mode `{}` is `known` or `hyper`",
                self.alpha_mode
            ));
        }
        if let Some(r) = &self.rollout {
            if !matches!(r.as_str(), "uniform" | "exit-biased") {
                return bad(format!("rollout `{r}` is `uniform` or `exit-biased`"));
            }
        }
        if !(self.true_alpha > 0.0) {
            return bad(format!("true_alpha {} must be positive", self.true_alpha));
        }
        if self.domain.starts_with("chain") && self.chain_x == 0 {
            return bad("chain_x must be at least 1".into());
        }
        if self.psrl_commit == Some(0) {
            return bad("psrl_commit must be at least 1".into());
        }
        if self.free_examples > 0 && self.domain != "mushroom" {
            return bad("free examples apply to the mushroom domain".into());
        }
        self.alpha()?;
        self.pool().validate()?;
        Ok(())
    }

    /// Concentration treatment the planner's model uses.
    pub fn alpha(&self) -> Result<AlphaMode> {
        let mode = match self.alpha_mode.as_str() {
            "hyper" => AlphaMode::Hyper {
                shape: self.hyper_shape,
                rate: self.hyper_rate,
            },
            _ => AlphaMode::Fixed(self.true_alpha),
        };
        if let AlphaMode::Hyper { shape, rate } = mode {
            if !(shape > 0.0 && rate > 0.0) {
                return Err(Error::Config(format!("hyperprior Gamma({shape}, {rate})")));
            }
        }
        Ok(mode)
    }

    pub fn pool(&self) -> PoolConfig {
        PoolConfig {
            pool_size: self.pool_size,
            sweeps_between_refresh: self.pool_sweeps,
            refresh_period: self.pool_period,
        }
    }

    pub fn rollout_policy(&self) -> RolloutPolicy {
        let exit_biased = match self.rollout.as_deref() {
            Some(r) => r == "exit-biased",
            None => self.is_subtask_domain(),
        };
        if exit_biased {
            RolloutPolicy::ExitBiased {
                exit_prob: self.exit_prob,
            }
        } else {
            RolloutPolicy::Uniform
        }
    }

    /// Search settings for a domain whose rewards span `range` with largest
    /// magnitude `rmax`.
    pub fn bamcp(&self, rmax: f64, range: f64) -> Result<BamcpConfig> {
        let cfg = BamcpConfig {
            simulations: self.simulations,
            exploration: self.exploration.unwrap_or(if self.is_subtask_domain() {
                range
            } else {
                range / (1.0 - self.gamma)
            }),
            discount: DiscountConfig::new(
                self.gamma,
                self.epsilon.unwrap_or(CUTOFF_FRACTION * rmax),
                rmax,
            )?,
            rollout: self.rollout_policy(),
            pool: self.pool(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
