use rand::seq::SliceRandom;
use rand::Rng;

use super::{ActionId, StateId};
use crate::error::{Error, Result};

/// One possible outcome of taking an action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: StateId,
    pub prob: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct ActionEntry {
    action: ActionId,
    outcomes: Vec<Transition>,
}

/// A fully specified finite MDP. States without actions are terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    states: Vec<Vec<ActionEntry>>,
}

/// Incremental constructor for [`FiniteMdp`].
#[derive(Debug, Clone)]
pub struct MdpBuilder {
    states: Vec<Vec<ActionEntry>>,
}

impl MdpBuilder {
    pub fn new(n_states: usize) -> Self {
        Self {
            states: vec![Vec::new(); n_states],
        }
    }

    /// Adds (or extends) action `a` in state `s` with one outcome.
    pub fn outcome(mut self, s: usize, a: usize, next: usize, prob: f64, reward: f64) -> Self {
        let entry = match self.states[s]
            .iter_mut()
            .position(|e| e.action == ActionId(a))
        {
            Some(i) => &mut self.states[s][i],
            None => {
                self.states[s].push(ActionEntry {
                    action: ActionId(a),
                    outcomes: Vec::new(),
                });
                self.states[s].last_mut().unwrap()
            }
        };
        entry.outcomes.push(Transition {
            next: StateId(next),
            prob,
            reward,
        });
        self
    }

    pub fn deterministic(self, s: usize, a: usize, next: usize, reward: f64) -> Self {
        self.outcome(s, a, next, 1.0, reward)
    }

    pub fn build(mut self) -> Result<FiniteMdp> {
        let n = self.states.len();
        for (s, actions) in self.states.iter_mut().enumerate() {
            actions.sort_by_key(|e| e.action);
            for e in actions.iter() {
                let total: f64 = e.outcomes.iter().map(|o| o.prob).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "state {s} action {} outcome mass {total}",
                        e.action.0
                    )));
                }
                if let Some(o) = e.outcomes.iter().find(|o| o.next.0 >= n || o.prob < 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "state {s} action {}: bad outcome {o:?}",
                        e.action.0
                    )));
                }
            }
        }
        Ok(FiniteMdp {
            states: self.states,
        })
    }
}

/// Greedy policy plus the action values it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub actions: Vec<Option<ActionId>>,
    pub values: Vec<f64>,
}

impl Policy {
    pub fn action(&self, s: StateId) -> Option<ActionId> {
        self.actions.get(s.0).copied().flatten()
    }
}

impl FiniteMdp {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn actions(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.states[s.0].iter().map(|e| e.action)
    }

    pub fn action_list(&self, s: StateId) -> Vec<ActionId> {
        self.actions(s).collect()
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.states[s.0].is_empty()
    }

    pub fn outcomes(&self, s: StateId, a: ActionId) -> Option<&[Transition]> {
        self.states[s.0]
            .iter()
            .find(|e| e.action == a)
            .map(|e| e.outcomes.as_slice())
    }

    fn outcomes_or_err(&self, s: StateId, a: ActionId) -> Result<&[Transition]> {
        self.outcomes(s, a)
            .ok_or_else(|| Error::Contract(format!("action {} is not legal in state {}", a.0, s.0)))
    }

    pub fn step<R: Rng + ?Sized>(
        &self,
        s: StateId,
        a: ActionId,
        rng: &mut R,
    ) -> Result<Transition> {
        let outs = self.outcomes_or_err(s, a)?;
        if outs.len() == 1 {
            return Ok(outs[0]);
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for o in outs {
            acc += o.prob;
            if u < acc {
                return Ok(*o);
            }
        }
        Ok(*outs.last().unwrap())
    }

    /// Probability of observing `(next, reward)` after `(s, a)`.
    pub fn likelihood(&self, s: StateId, a: ActionId, next: StateId, reward: f64) -> f64 {
        self.outcomes(s, a).map_or(0.0, |outs| {
            outs.iter()
                .filter(|o| o.next == next && o.reward == reward)
                .map(|o| o.prob)
                .sum()
        })
    }

    pub fn expected_reward(&self, s: StateId, a: ActionId) -> Result<f64> {
        Ok(self
            .outcomes_or_err(s, a)?
            .iter()
            .map(|o| o.prob * o.reward)
            .sum())
    }

    fn backup(e: &ActionEntry, gamma: f64, v: &[f64]) -> f64 {
        e.outcomes
            .iter()
            .map(|o| o.prob * (o.reward + gamma * v[o.next.0]))
            .sum()
    }

    /// Infinite-horizon value iteration until the sup-norm change is below `tol`.
    pub fn value_iteration(&self, gamma: f64, tol: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.n_states()];
        loop {
            let mut delta: f64 = 0.0;
            for s in 0..self.n_states() {
                if self.states[s].is_empty() {
                    continue;
                }
                let best = self.states[s]
                    .iter()
                    .map(|e| Self::backup(e, gamma, &v))
                    .fold(f64::NEG_INFINITY, f64::max);
                delta = delta.max((best - v[s]).abs());
                v[s] = best;
            }
            if delta < tol {
                return v;
            }
        }
    }

    /// `Q_H(s, a)` for a horizon of `horizon` decisions, as `q[s][i]` over `actions(s)`.
    pub fn finite_horizon_q(&self, gamma: f64, horizon: usize) -> Vec<Vec<f64>> {
        let mut v = vec![0.0; self.n_states()];
        let mut q: Vec<Vec<f64>> = self.states.iter().map(|a| vec![0.0; a.len()]).collect();
        for _ in 0..horizon {
            for (s, entries) in self.states.iter().enumerate() {
                for (i, e) in entries.iter().enumerate() {
                    q[s][i] = Self::backup(e, gamma, &v);
                }
            }
            for (s, qs) in q.iter().enumerate() {
                v[s] = if qs.is_empty() {
                    0.0
                } else {
                    qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                };
            }
        }
        q
    }

    /// Optimal policy of the discounted MDP, value iteration to `1e-9`, ties broken uniformly.
    pub fn solve<R: Rng + ?Sized>(&self, gamma: f64, rng: &mut R) -> Policy {
        let values = self.value_iteration(gamma, 1e-9);
        let mut actions = Vec::with_capacity(self.n_states());
        let mut ties = Vec::new();
        for s in 0..self.n_states() {
            let entries = &self.states[s];
            if entries.is_empty() {
                actions.push(None);
                continue;
            }
            let qs: Vec<f64> = entries
                .iter()
                .map(|e| Self::backup(e, gamma, &values))
                .collect();
            let best = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            ties.clear();
            ties.extend(
                entries
                    .iter()
                    .zip(&qs)
                    .filter(|(_, &q)| q >= best - 1e-10)
                    .map(|(e, _)| e.action),
            );
            actions.push(ties.choose(rng).copied());
        }
        Policy { actions, values }
    }
}
