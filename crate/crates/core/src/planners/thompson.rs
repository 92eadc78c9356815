use std::sync::Arc;

use super::WorldSampler;
use crate::bamdp::{ActionId, FiniteMdp, Policy, StateId};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Optimal behaviour inside one fully specified sampled world.
pub trait SampledSolver<W> {
    type State;

    fn greedy_action(
        &self,
        world: &mut W,
        state: &Self::State,
        rng: &mut SimRng,
    ) -> Result<ActionId>;
}

/// Draws one world from the posterior and acts optimally for it.
pub fn ts_get_action<W, P, S>(
    sampler: &mut P,
    solver: &S,
    state: &S::State,
    rng: &mut SimRng,
) -> Result<ActionId>
where
    P: WorldSampler<W>,
    S: SampledSolver<W>,
{
    let mut world = sampler.draw(rng)?;
    solver.greedy_action(&mut world, state, rng)
}

/// Optimal policy of a sampled finite MDP.
pub fn solve_sampled_mdp(mdp: &FiniteMdp, gamma: f64, rng: &mut SimRng) -> Policy {
    mdp.solve(gamma, rng)
}

/// Value-iteration solver for sampled finite MDPs.
#[derive(Debug, Clone, Copy)]
pub struct FiniteMdpSolver {
    pub gamma: f64,
}

impl SampledSolver<Arc<FiniteMdp>> for FiniteMdpSolver {
    type State = StateId;

    fn greedy_action(
        &self,
        world: &mut Arc<FiniteMdp>,
        state: &StateId,
        rng: &mut SimRng,
    ) -> Result<ActionId> {
        solve_sampled_mdp(world, self.gamma, rng)
            .action(*state)
            .ok_or_else(|| Error::Contract(format!("no action in state {}", state.0)))
    }
}
