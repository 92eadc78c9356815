//! Online planners over sampled worlds: root-sampled tree search, posterior
//! sampling variants, optimistic multi-sample planning and simple baselines.

mod bamcp;
mod baseline;
mod boss;
mod psrl;
mod thompson;
mod tree;

pub use bamcp::{bamcp_search, BackupEvent, Bamcp, BamcpConfig, SearchOutcome};
pub use baseline::{baseline_action, BaselineKind};
pub use boss::{merged_optimistic_policy, BossAgent, BossConfig};
pub use psrl::{PsrlAgent, PsrlConfig};
pub use thompson::{solve_sampled_mdp, ts_get_action, FiniteMdpSolver, SampledSolver};
pub use tree::{ucb_score, ucb_select, ActionStats, NodeId, SearchNode, SearchTree};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bamdp::ActionId;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Result of advancing a simulator by one action.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStep<S> {
    pub next: S,
    pub reward: f64,
    /// Everything the agent observes about the transition. Histories that
    /// agree on every observation share a search node.
    pub obs: u128,
}

/// Generative model of one domain, parameterised by a sampled world.
pub trait Simulator {
    type State: Clone;
    type World;

    /// Legal actions in `state`; empty means terminal.
    fn actions(&self, state: &Self::State, out: &mut Vec<ActionId>);

    fn step(
        &self,
        world: &mut Self::World,
        state: &Self::State,
        action: ActionId,
        rng: &mut SimRng,
    ) -> Result<SimStep<Self::State>>;

    /// The domain's "leave now" action, if it has one and it is legal here.
    fn exit_action(&self, _state: &Self::State) -> Option<ActionId> {
        None
    }

    /// Largest absolute one-step reward.
    fn rmax(&self) -> f64;
}

/// Source of posterior world samples.
pub trait WorldSampler<W> {
    fn draw(&mut self, rng: &mut SimRng) -> Result<W>;
}

impl<W, F> WorldSampler<W> for F
where
    F: FnMut(&mut SimRng) -> Result<W>,
{
    fn draw(&mut self, rng: &mut SimRng) -> Result<W> {
        self(rng)
    }
}

/// Action choice below the tree frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RolloutPolicy {
    Uniform,
    /// Takes the exit action with probability `exit_prob` when it is legal,
    /// otherwise a uniform choice among the remaining actions.
    ExitBiased {
        exit_prob: f64,
    },
}

impl RolloutPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RolloutPolicy::Uniform => Ok(()),
            RolloutPolicy::ExitBiased { exit_prob } if (0.0..=1.0).contains(&exit_prob) => Ok(()),
            RolloutPolicy::ExitBiased { exit_prob } => Err(Error::InvalidInput(format!(
                "exit probability {exit_prob} outside [0,1]"
            ))),
        }
    }

    /// Picks one of `actions`, which must be non-empty.
    pub fn choose<R: Rng + ?Sized>(
        &self,
        actions: &[ActionId],
        exit: Option<ActionId>,
        rng: &mut R,
    ) -> ActionId {
        match (*self, exit) {
            (RolloutPolicy::ExitBiased { exit_prob }, Some(e)) if actions.len() > 1 => {
                if rng.gen::<f64>() < exit_prob {
                    e
                } else {
                    let others: Vec<ActionId> =
                        actions.iter().copied().filter(|&a| a != e).collect();
                    *others.choose(rng).unwrap_or(&e)
                }
            }
            _ => *actions.choose(rng).expect("rollout from a terminal state"),
        }
    }
}

/// Uniform choice among indices whose value equals the maximum.
pub(crate) fn argmax_random<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Option<usize> {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
    ties.choose(rng).copied()
}
