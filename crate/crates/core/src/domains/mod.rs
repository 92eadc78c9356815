//! Environments and their closed-form reference values.

mod bernoulli;
mod chain;
mod finite;
mod oracles;
mod payoff;
mod subtask;

pub use bernoulli::{BernoulliBandit, BernoulliSim};
pub use chain::{ChainDomain, ChainEnd, ChainStart};
pub use finite::{FiniteMdpSim, MdpPosterior};
pub use oracles::{
    example2_commit_value_enumerated, oracle_example1_ts_steps, oracle_example2_values,
    oracle_example3, oracle_example4_boss_bound, ts_steps_to_reward,
};
pub use payoff::{PayoffDomain, PayoffPosterior};
pub use subtask::{
    EnvStep, SubtaskDomain, SubtaskEnv, SubtaskState, SubtaskTs, TaskKind, TrueWorld, EXIT,
};
