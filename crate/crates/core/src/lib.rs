//! Bayes-adaptive planning toolkit.
//!
//! * [`bamdp`]: histories, beliefs, discounted returns and an exact
//!   expectimax oracle for small finite-support priors.
//! * [`planners`]: root-sampled Monte-Carlo tree search plus myopic
//!   posterior-sampling baselines.
//! * [`crp`]: Chinese-restaurant-process mixture over categorical subtask
//!   vectors with collapsed Gibbs inference and a memoized sample pool.
//! * [`domains`]: chain and payoff counterexamples, the contextual-bandit
//!   subtask sequence, the mushroom task and the drilling task.
//! * [`mushroom`]: UCI Agaricus-Lepiota ingestion.
//! * [`harness`]: seeded replicated experiments, metrics and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bamdp;
pub mod crp;
pub mod domains;
pub mod error;
pub mod harness;
pub mod mushroom;
pub mod planners;
pub mod rng;

pub use error::{Error, Result};
