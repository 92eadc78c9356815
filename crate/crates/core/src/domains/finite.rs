use std::sync::Arc;

use crate::bamdp::{ActionId, DiscreteBelief, FiniteMdp, RewardBounds, StateId};
use crate::error::{Error, Result};
use crate::planners::{SimStep, Simulator};
use crate::rng::SimRng;

/// A posterior over finite MDPs sharing one state and action layout.
pub trait MdpPosterior {
    fn sample(&self, rng: &mut SimRng) -> Arc<FiniteMdp>;

    fn observe(&mut self, s: StateId, a: ActionId, next: StateId, reward: f64) -> Result<()>;
}

impl MdpPosterior for DiscreteBelief {
    fn sample(&self, rng: &mut SimRng) -> Arc<FiniteMdp> {
        DiscreteBelief::sample(self, rng)
    }

    fn observe(&mut self, s: StateId, a: ActionId, next: StateId, reward: f64) -> Result<()> {
        *self = DiscreteBelief::observe(self, s, a, next, reward)?;
        Ok(())
    }
}

/// Tree-search simulator over sampled finite MDPs. States are observed
/// directly, so the observation key is the next state and reward.
#[derive(Debug, Clone)]
pub struct FiniteMdpSim {
    template: Arc<FiniteMdp>,
    bounds: RewardBounds,
}

impl FiniteMdpSim {
    /// `template` supplies the legal actions of every state.
    pub fn new(template: Arc<FiniteMdp>, bounds: RewardBounds) -> Self {
        Self { template, bounds }
    }
}

impl Simulator for FiniteMdpSim {
    type State = StateId;
    type World = Arc<FiniteMdp>;

    fn actions(&self, state: &StateId, out: &mut Vec<ActionId>) {
        out.extend(self.template.actions(*state));
    }

    fn step(
        &self,
        world: &mut Arc<FiniteMdp>,
        state: &StateId,
        action: ActionId,
        rng: &mut SimRng,
    ) -> Result<SimStep<StateId>> {
        let t = world.step(*state, action, rng)?;
        if !self.bounds.contains(t.reward) {
            return Err(Error::Invariant(format!(
                "reward {} outside bounds",
                t.reward
            )));
        }
        Ok(SimStep {
            next: t.next,
            reward: t.reward,
            obs: ((t.next.0 as u128) << 64) | t.reward.to_bits() as u128,
        })
    }

    fn rmax(&self) -> f64 {
        self.bounds.abs_max()
    }
}
