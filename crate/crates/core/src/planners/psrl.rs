use std::sync::Arc;

use super::{solve_sampled_mdp, WorldSampler};
use crate::bamdp::{ActionId, FiniteMdp, Policy, StateId};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsrlConfig {
    /// Steps a sampled world is followed before resampling.
    pub commit_steps: usize,
    /// Drop the sample early when an observation has zero likelihood under it.
    pub resample_on_contradiction: bool,
}

impl PsrlConfig {
    /// Commitment of `ceil(1 / (1 - gamma))` steps.
    pub fn for_discount(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidInput(format!("gamma {gamma} outside (0,1)")));
        }
        Ok(Self {
            commit_steps: (1.0 / (1.0 - gamma) - 1e-9).ceil() as usize,
            resample_on_contradiction: true,
        })
    }
}

#[derive(Debug, Clone)]
struct Commitment {
    mdp: Arc<FiniteMdp>,
    policy: Policy,
    left: usize,
}

/// Posterior sampling that follows each sampled world for a fixed number of steps.
#[derive(Debug, Clone)]
pub struct PsrlAgent {
    config: PsrlConfig,
    gamma: f64,
    current: Option<Commitment>,
    resamples: usize,
}

impl PsrlAgent {
    pub fn new(config: PsrlConfig, gamma: f64) -> Result<Self> {
        if config.commit_steps == 0 {
            return Err(Error::InvalidInput(
                "commitment must be at least one step".into(),
            ));
        }
        Ok(Self {
            config,
            gamma,
            current: None,
            resamples: 0,
        })
    }

    pub fn resamples(&self) -> usize {
        self.resamples
    }

    pub fn act<P: WorldSampler<Arc<FiniteMdp>>>(
        &mut self,
        sampler: &mut P,
        state: StateId,
        rng: &mut SimRng,
    ) -> Result<ActionId> {
        if self.current.as_ref().is_none_or(|c| c.left == 0) {
            let mdp = sampler.draw(rng)?;
            let policy = solve_sampled_mdp(&mdp, self.gamma, rng);
            self.current = Some(Commitment {
                mdp,
                policy,
                left: self.config.commit_steps,
            });
            self.resamples += 1;
        }
        let c = self.current.as_mut().expect("commitment present");
        c.left -= 1;
        c.policy.action(state).ok_or_else(|| {
            Error::Contract(format!("sampled world has no action in state {}", state.0))
        })
    }

    pub fn observe(&mut self, s: StateId, a: ActionId, next: StateId, reward: f64) {
        if !self.config.resample_on_contradiction {
            return;
        }
        if let Some(c) = &self.current {
            if c.mdp.likelihood(s, a, next, reward) == 0.0 {
                self.current = None;
            }
        }
    }

    pub fn end_episode(&mut self) {
        self.current = None;
    }
}
