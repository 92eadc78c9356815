use std::sync::Arc;

use rand::seq::SliceRandom;

use super::WorldSampler;
use crate::bamdp::{ActionId, FiniteMdp, Policy, StateId};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BossConfig {
    /// Worlds merged into the optimistic model.
    pub samples: usize,
    /// Observations between resamples.
    pub resample_every: usize,
}

impl BossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.resample_every == 0 {
            return Err(Error::InvalidInput(format!(
                "sample count {} and resampling period {} must be positive",
                self.samples, self.resample_every
            )));
        }
        Ok(())
    }
}

/// Optimal policy of the MDP whose action set at each state is the union of
/// `(action, sample)` pairs, each following that sample's dynamics.
pub fn merged_optimistic_policy(
    samples: &[Arc<FiniteMdp>],
    gamma: f64,
    rng: &mut SimRng,
) -> Result<Policy> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("no samples to merge".into()))?;
    let n = first.n_states();
    for m in samples {
        if m.n_states() != n
            || (0..n).any(|s| m.action_list(StateId(s)) != first.action_list(StateId(s)))
        {
            return Err(Error::InvalidInput(
                "merged samples must share states and actions".into(),
            ));
        }
    }
    let q = |v: &[f64], s: usize, a: ActionId| -> f64 {
        samples
            .iter()
            .map(|m| {
                m.outcomes(StateId(s), a)
                    .expect("shared action")
                    .iter()
                    .map(|o| o.prob * (o.reward + gamma * v[o.next.0]))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut v = vec![0.0; n];
    loop {
        let mut delta: f64 = 0.0;
        for s in 0..n {
            if first.is_terminal(StateId(s)) {
                continue;
            }
            let best = first
                .actions(StateId(s))
                .map(|a| q(&v, s, a))
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < 1e-9 {
            break;
        }
    }
    let mut actions = Vec::with_capacity(n);
    for s in 0..n {
        let list = first.action_list(StateId(s));
        let qs: Vec<f64> = list.iter().map(|&a| q(&v, s, a)).collect();
        let best = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<ActionId> = list
            .iter()
            .zip(&qs)
            .filter(|(_, &x)| x >= best - 1e-10)
            .map(|(&a, _)| a)
            .collect();
        actions.push(ties.choose(rng).copied());
    }
    Ok(Policy { actions, values: v })
}

/// Optimistic planning over several posterior samples.
#[derive(Debug, Clone)]
pub struct BossAgent {
    config: BossConfig,
    gamma: f64,
    policy: Option<Policy>,
    since_resample: usize,
}

impl BossAgent {
    pub fn new(config: BossConfig, gamma: f64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            gamma,
            policy: None,
            since_resample: 0,
        })
    }

    pub fn act<P: WorldSampler<Arc<FiniteMdp>>>(
        &mut self,
        sampler: &mut P,
        state: StateId,
        rng: &mut SimRng,
    ) -> Result<ActionId> {
        if self.policy.is_none() || self.since_resample >= self.config.resample_every {
            let samples = (0..self.config.samples)
                .map(|_| sampler.draw(rng))
                .collect::<Result<Vec<_>>>()?;
            self.policy = Some(merged_optimistic_policy(&samples, self.gamma, rng)?);
            self.since_resample = 0;
        }
        self.policy
            .as_ref()
            .and_then(|p| p.action(state))
            .ok_or_else(|| Error::Contract(format!("no action in state {}", state.0)))
    }

    pub fn observe(&mut self) {
        self.since_resample += 1;
    }
}
