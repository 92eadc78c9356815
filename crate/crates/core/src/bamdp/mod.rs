//! Histories, beliefs and discounted-return accounting for Bayes-adaptive
//! planning, plus an exact expectimax solver used to certify the planners.

mod belief;
mod exact;
mod mdp;

pub use belief::{belief_update, DiscreteBelief};
pub use exact::{
    exact_bamdp_solve, horizon_for, solve_bayes_adaptive, BayesAdaptiveModel, BetaBernoulliModel,
    ExactSolution, FiniteSupportModel, Outcome, SupportBelief, DEFAULT_NODE_BUDGET,
};
pub use mdp::{FiniteMdp, MdpBuilder, Policy, Transition};

use crate::error::{Error, Result};

/// Index of an action within a domain's action alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

/// Index of a physical state of a finite MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

/// Declared reward range of a domain, in raw units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBounds {
    pub min: f64,
    pub max: f64,
}

impl RewardBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::InvalidInput(format!(
                "reward bounds [{min}, {max}] are not an interval"
            )));
        }
        Ok(Self { min, max })
    }

    /// Largest absolute reward.
    pub fn abs_max(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.min && r <= self.max
    }
}

/// Discount factor and the search-depth cutoff `gamma^d * rmax < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub rmax: f64,
}

impl DiscountConfig {
    pub fn new(gamma: f64, epsilon: f64, rmax: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidInput(format!("gamma {gamma} outside (0,1)")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon {epsilon} must be > 0"
            )));
        }
        if !(rmax.is_finite() && rmax >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "rmax {rmax} must be finite and >= 0"
            )));
        }
        Ok(Self {
            gamma,
            epsilon,
            rmax,
        })
    }

    /// True when a simulation at `depth` is past the cutoff.
    pub fn cut(&self, depth: usize) -> bool {
        self.gamma.powi(depth as i32) * self.rmax < self.epsilon
    }

    /// Smallest depth at which the cutoff fires.
    pub fn cutoff_depth(&self) -> usize {
        let mut d = 0;
        let mut g = 1.0;
        while g * self.rmax >= self.epsilon {
            g *= self.gamma;
            d += 1;
        }
        d
    }
}

/// Sum of `gamma^t * rewards[t]`, `t` starting at zero.
pub fn accumulate_return(rewards: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidInput(format!("gamma {gamma} outside (0,1)")));
    }
    let mut total = 0.0;
    let mut g = 1.0;
    for (t, &r) in rewards.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("reward at t={t} is {r}")));
        }
        total += g * r;
        g *= gamma;
    }
    Ok(total)
}

/// One observed transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: StateId,
    pub action: ActionId,
    pub reward: f64,
    pub next: StateId,
}

/// Observed record `s_1 a_1 s_2 ... s_t` of a finite-state interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    steps: Vec<Step>,
    current: StateId,
    bounds: RewardBounds,
}

impl History {
    pub fn new(start: StateId, bounds: RewardBounds) -> Self {
        Self {
            steps: Vec::new(),
            current: start,
            bounds,
        }
    }

    pub fn push(&mut self, action: ActionId, reward: f64, next: StateId) -> Result<()> {
        if !reward.is_finite() || !self.bounds.contains(reward) {
            return Err(Error::InvalidInput(format!(
                "reward {reward} outside [{}, {}]",
                self.bounds.min, self.bounds.max
            )));
        }
        self.steps.push(Step {
            state: self.current,
            action,
            reward,
            next,
        });
        self.current = next;
        Ok(())
    }

    pub fn current(&self) -> StateId {
        self.current
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    /// Checks chaining of consecutive entries.
    pub fn is_consistent(&self) -> bool {
        let chained = self.steps.windows(2).all(|w| w[0].next == w[1].state);
        let tail = self.steps.last().is_none_or(|s| s.next == self.current);
        chained && tail
    }
}
