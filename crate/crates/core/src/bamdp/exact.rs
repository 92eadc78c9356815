//! Exact finite-horizon expectimax over the Bayes-adaptive MDP.
//!
//! Augmented states are (physical state, posterior) pairs. Histories that lead
//! to the same augmented state at the same remaining depth are merged, which
//! keeps the chain and bandit certification problems small.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use super::{ActionId, DiscountConfig, DiscreteBelief, StateId};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// One branch of the augmented transition kernel.
#[derive(Debug, Clone)]
pub struct Outcome<B> {
    pub prob: f64,
    pub reward: f64,
    pub next: B,
}

/// A Bayes-adaptive MDP with a closed-form augmented kernel.
pub trait BayesAdaptiveModel {
    type Belief: Clone + Eq + Hash;

    /// Legal actions; empty means terminal.
    fn actions(&self, belief: &Self::Belief) -> Vec<ActionId>;

    /// Marginal outcomes of `action`, each carrying its updated posterior.
    fn outcomes(
        &self,
        belief: &Self::Belief,
        action: ActionId,
    ) -> Result<Vec<Outcome<Self::Belief>>>;
}

type QTable<B> = HashMap<(usize, B), Vec<(ActionId, f64)>>;

/// Optimal finite-horizon Q-values of every visited augmented state.
#[derive(Debug, Clone)]
pub struct ExactSolution<B: Eq + Hash> {
    pub horizon: usize,
    pub root_q: Vec<(ActionId, f64)>,
    table: QTable<B>,
}

impl<B: Eq + Hash + Clone> ExactSolution<B> {
    /// Q-values of `belief` with `remaining` decisions left.
    pub fn q_values(&self, belief: &B, remaining: usize) -> Option<&[(ActionId, f64)]> {
        self.table
            .get(&(remaining, belief.clone()))
            .map(|v| v.as_slice())
    }

    pub fn q(&self, belief: &B, remaining: usize, action: ActionId) -> Option<f64> {
        self.q_values(belief, remaining)?
            .iter()
            .find(|(a, _)| *a == action)
            .map(|(_, q)| *q)
    }

    pub fn root_value(&self) -> f64 {
        if self.root_q.is_empty() {
            return 0.0;
        }
        self.root_q
            .iter()
            .map(|(_, q)| *q)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn root_q_of(&self, action: ActionId) -> Option<f64> {
        self.root_q
            .iter()
            .find(|(a, _)| *a == action)
            .map(|(_, q)| *q)
    }

    /// Root actions within `tol` of the best.
    pub fn greedy_root_actions(&self, tol: f64) -> Vec<ActionId> {
        let best = self.root_value();
        self.root_q
            .iter()
            .filter(|(_, q)| *q >= best - tol)
            .map(|(a, _)| *a)
            .collect()
    }

    pub fn nodes(&self) -> usize {
        self.table.len()
    }
}

struct Solver<'m, M: BayesAdaptiveModel> {
    model: &'m M,
    gamma: f64,
    budget: usize,
    values: HashMap<(usize, M::Belief), f64>,
    table: QTable<M::Belief>,
}

impl<M: BayesAdaptiveModel> Solver<'_, M> {
    fn value(&mut self, belief: &M::Belief, remaining: usize) -> Result<f64> {
        if remaining == 0 {
            return Ok(0.0);
        }
        let key = (remaining, belief.clone());
        if let Some(v) = self.values.get(&key) {
            return Ok(*v);
        }
        let qs = self.q_values(belief, remaining)?;
        let v = qs.iter().map(|(_, q)| *q).fold(f64::NEG_INFINITY, f64::max);
        let v = if qs.is_empty() { 0.0 } else { v };
        self.values.insert(key.clone(), v);
        self.table.insert(key, qs);
        if self.table.len() > self.budget {
            return Err(Error::Capacity {
                what: "augmented tree",
                limit: self.budget,
            });
        }
        Ok(v)
    }

    fn q_values(&mut self, belief: &M::Belief, remaining: usize) -> Result<Vec<(ActionId, f64)>> {
        let actions = self.model.actions(belief);
        let mut qs = Vec::with_capacity(actions.len());
        for a in actions {
            let mut q = 0.0;
            for o in self.model.outcomes(belief, a)? {
                if o.prob == 0.0 {
                    continue;
                }
                q += o.prob * (o.reward + self.gamma * self.value(&o.next, remaining - 1)?);
            }
            qs.push((a, q));
        }
        Ok(qs)
    }
}

/// Expectimax over the augmented kernel of `model` from `root`, `horizon` decisions deep.
pub fn solve_bayes_adaptive<M: BayesAdaptiveModel>(
    model: &M,
    root: &M::Belief,
    horizon: usize,
    gamma: f64,
    node_budget: usize,
) -> Result<ExactSolution<M::Belief>> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let mut solver = Solver {
        model,
        gamma,
        budget: node_budget,
        values: HashMap::new(),
        table: HashMap::new(),
    };
    solver.value(root, horizon)?;
    let root_q = solver
        .table
        .get(&(horizon, root.clone()))
        .cloned()
        .unwrap_or_default();
    Ok(ExactSolution {
        horizon,
        root_q,
        table: solver.table,
    })
}

/// Smallest `H` with `gamma^H * rmax < tol`.
pub fn horizon_for(gamma: f64, rmax: f64, tol: f64) -> usize {
    let mut h = 0;
    let mut g = 1.0;
    while g * rmax >= tol {
        g *= gamma;
        h += 1;
    }
    h.max(1)
}

/// Posterior over the support of a [`DiscreteBelief`], paired with the current state.
#[derive(Debug, Clone)]
pub struct SupportBelief {
    pub state: StateId,
    pub weights: Vec<f64>,
}

impl SupportBelief {
    fn quantized(&self) -> impl Iterator<Item = u64> + '_ {
        self.weights
            .iter()
            .map(|w| (w * (1u64 << 40) as f64).round() as u64)
    }
}

impl PartialEq for SupportBelief {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state && self.quantized().eq(other.quantized())
    }
}

impl Eq for SupportBelief {}

impl Hash for SupportBelief {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.state.hash(h);
        for q in self.quantized() {
            q.hash(h);
        }
    }
}

/// Augmented MDP induced by a finite-support prior over finite MDPs.
pub struct FiniteSupportModel<'b> {
    belief: &'b DiscreteBelief,
}

impl<'b> FiniteSupportModel<'b> {
    pub fn new(belief: &'b DiscreteBelief) -> Self {
        Self { belief }
    }

    pub fn root(&self, state: StateId) -> SupportBelief {
        SupportBelief {
            state,
            weights: self.belief.weights().to_vec(),
        }
    }
}

impl BayesAdaptiveModel for FiniteSupportModel<'_> {
    type Belief = SupportBelief;

    fn actions(&self, b: &SupportBelief) -> Vec<ActionId> {
        let support = self.belief.support();
        let i = b.weights.iter().position(|&w| w > 0.0).unwrap_or(0);
        support[i].action_list(b.state)
    }

    fn outcomes(&self, b: &SupportBelief, a: ActionId) -> Result<Vec<Outcome<SupportBelief>>> {
        // group (next, reward) pairs across worlds
        let mut keys: Vec<(StateId, f64)> = Vec::new();
        for (m, &w) in self.belief.support().iter().zip(&b.weights) {
            if w == 0.0 {
                continue;
            }
            let outs = m.outcomes(b.state, a).ok_or_else(|| {
                Error::Contract(format!(
                    "action {} missing in state {} of a support world",
                    a.0, b.state.0
                ))
            })?;
            for o in outs {
                if !keys.iter().any(|(s, r)| *s == o.next && *r == o.reward) {
                    keys.push((o.next, o.reward));
                }
            }
        }
        let mut result = Vec::with_capacity(keys.len());
        for (next, reward) in keys {
            let joint: Vec<f64> = self
                .belief
                .support()
                .iter()
                .zip(&b.weights)
                .map(|(m, &w)| {
                    if w == 0.0 {
                        0.0
                    } else {
                        w * m.likelihood(b.state, a, next, reward)
                    }
                })
                .collect();
            let prob: f64 = joint.iter().sum();
            if prob <= 0.0 {
                continue;
            }
            result.push(Outcome {
                prob,
                reward,
                next: SupportBelief {
                    state: next,
                    weights: joint.iter().map(|j| j / prob).collect(),
                },
            });
        }
        Ok(result)
    }
}

/// Exact Q-values of the Bayes-adaptive MDP of `belief`, starting in `start`.
pub fn exact_bamdp_solve(
    belief: &DiscreteBelief,
    start: StateId,
    horizon: usize,
    discount: &DiscountConfig,
) -> Result<ExactSolution<SupportBelief>> {
    let model = FiniteSupportModel::new(belief);
    let root = model.root(start);
    solve_bayes_adaptive(&model, &root, horizon, discount.gamma, DEFAULT_NODE_BUDGET)
}

/// Independent Bernoulli arms with Beta priors; the posterior is the count table.
#[derive(Debug, Clone)]
pub struct BetaBernoulliModel {
    pub arms: usize,
    pub prior_a: f64,
    pub prior_b: f64,
}

impl BetaBernoulliModel {
    pub fn uniform(arms: usize) -> Self {
        Self {
            arms,
            prior_a: 1.0,
            prior_b: 1.0,
        }
    }

    /// Posterior-predictive success probability of `arm`.
    pub fn success_prob(&self, counts: &[(u32, u32)], arm: usize) -> f64 {
        let (s, f) = counts[arm];
        (s as f64 + self.prior_a) / ((s + f) as f64 + self.prior_a + self.prior_b)
    }
}

impl BayesAdaptiveModel for BetaBernoulliModel {
    type Belief = Vec<(u32, u32)>;

    fn actions(&self, _: &Self::Belief) -> Vec<ActionId> {
        (0..self.arms).map(ActionId).collect()
    }

    fn outcomes(&self, counts: &Self::Belief, a: ActionId) -> Result<Vec<Outcome<Self::Belief>>> {
        if a.0 >= self.arms {
            return Err(Error::Contract(format!("arm {} out of range", a.0)));
        }
        let p = self.success_prob(counts, a.0);
        let mut win = counts.clone();
        win[a.0].0 += 1;
        let mut lose = counts.clone();
        lose[a.0].1 += 1;
        Ok(vec![
            Outcome {
                prob: p,
                reward: 1.0,
                next: win,
            },
            Outcome {
                prob: 1.0 - p,
                reward: 0.0,
                next: lose,
            },
        ])
    }
}
