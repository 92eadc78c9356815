use super::tree::{ucb_select, ActionStats, NodeId, SearchTree};
use super::{argmax_random, RolloutPolicy, Simulator, WorldSampler};
use crate::bamdp::{ActionId, DiscountConfig};
use crate::crp::PoolConfig;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BamcpConfig {
    /// Number of simulations per decision.
    pub simulations: usize,
    /// Exploration constant `c` of the UCB rule.
    pub exploration: f64,
    pub discount: DiscountConfig,
    pub rollout: RolloutPolicy,
    /// Maintenance of the dynamics-sample pool for mixture-model domains.
    pub pool: PoolConfig,
}

impl BamcpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.simulations == 0 {
            return Err(Error::InvalidInput(
                "simulation budget must be positive".into(),
            ));
        }
        if !(self.exploration.is_finite() && self.exploration >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "exploration constant {} must be finite and >= 0",
                self.exploration
            )));
        }
        self.rollout.validate()?;
        self.pool.validate()
    }
}

/// One incremental-mean update `(node, action, return)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackupEvent {
    pub node: NodeId,
    pub action: ActionId,
    pub ret: f64,
}

/// Summary of one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub action: ActionId,
    pub root: Vec<ActionStats>,
    pub simulations: usize,
    pub nodes: usize,
}

/// Root-sampled Monte-Carlo tree search over one simulator.
pub struct Bamcp<'a, S: Simulator> {
    sim: &'a S,
    config: BamcpConfig,
    tree: SearchTree,
    trace: Option<Vec<BackupEvent>>,
    scratch: Vec<ActionId>,
}

impl<'a, S: Simulator> Bamcp<'a, S> {
    pub fn new(sim: &'a S, config: BamcpConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            sim,
            config,
            tree: SearchTree::default(),
            trace: None,
            scratch: Vec::new(),
        })
    }

    /// Records every backup of subsequent searches.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[BackupEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    /// Runs the configured number of simulations from `root` and returns the
    /// action with the highest estimated value.
    pub fn search<P: WorldSampler<S::World>>(
        &mut self,
        sampler: &mut P,
        root: &S::State,
        rng: &mut SimRng,
    ) -> Result<SearchOutcome> {
        let actions = self.legal(root);
        if actions.is_empty() {
            return Err(Error::Contract("search from a terminal state".into()));
        }
        self.tree = SearchTree::with_root(&actions);
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
        for _ in 0..self.config.simulations {
            let mut world = sampler.draw(rng)?;
            self.simulate(SearchTree::ROOT, root, &mut world, 0, rng)?;
        }
        let stats = &self.tree.root().actions;
        let values: Vec<f64> = stats.iter().map(|s| s.value).collect();
        let best = argmax_random(&values, rng).expect("non-empty root");
        Ok(SearchOutcome {
            action: stats[best].action,
            root: stats.clone(),
            simulations: self.config.simulations,
            nodes: self.tree.len(),
        })
    }

    fn legal(&mut self, state: &S::State) -> Vec<ActionId> {
        self.scratch.clear();
        self.sim.actions(state, &mut self.scratch);
        self.scratch.clone()
    }

    fn record(&mut self, node: NodeId, idx: usize, ret: f64, first: bool) {
        let n = self.tree.node_mut(node);
        let st = &mut n.actions[idx];
        if first {
            n.visits = 1;
            st.visits = 1;
            st.value = ret;
        } else {
            n.visits += 1;
            st.visits += 1;
            st.value += (ret - st.value) / st.visits as f64;
        }
        let action = st.action;
        if let Some(t) = self.trace.as_mut() {
            t.push(BackupEvent { node, action, ret });
        }
    }

    fn simulate(
        &mut self,
        node: NodeId,
        state: &S::State,
        world: &mut S::World,
        depth: usize,
        rng: &mut SimRng,
    ) -> Result<f64> {
        let gamma = self.config.discount.gamma;
        if self.config.discount.cut(depth) || self.tree.node(node).is_terminal() {
            return Ok(0.0);
        }
        if self.tree.node(node).visits == 0 {
            let actions: Vec<ActionId> = self
                .tree
                .node(node)
                .actions
                .iter()
                .map(|s| s.action)
                .collect();
            let a = self
                .config
                .rollout
                .choose(&actions, self.sim.exit_action(state), rng);
            let idx = actions
                .iter()
                .position(|&x| x == a)
                .expect("legal rollout action");
            let step = self.sim.step(world, state, a, rng)?;
            let ret = step.reward + gamma * self.rollout(&step.next, world, depth + 1, rng)?;
            self.record(node, idx, ret, true);
            return Ok(ret);
        }
        let idx = ucb_select(self.tree.node(node), self.config.exploration, rng);
        let a = self.tree.node(node).actions[idx].action;
        let step = self.sim.step(world, state, a, rng)?;
        let future = if self.config.discount.cut(depth + 1) {
            0.0
        } else {
            let next_actions = self.legal(&step.next);
            let child = self.tree.child_or_insert(node, a, step.obs, &next_actions);
            self.simulate(child, &step.next, world, depth + 1, rng)?
        };
        let ret = step.reward + gamma * future;
        self.record(node, idx, ret, false);
        Ok(ret)
    }

    fn rollout(
        &mut self,
        state: &S::State,
        world: &mut S::World,
        depth: usize,
        rng: &mut SimRng,
    ) -> Result<f64> {
        let gamma = self.config.discount.gamma;
        let mut total = 0.0;
        let mut g = 1.0;
        let mut d = depth;
        let mut s = state.clone();
        while !self.config.discount.cut(d) {
            self.scratch.clear();
            self.sim.actions(&s, &mut self.scratch);
            if self.scratch.is_empty() {
                break;
            }
            let a = self
                .config
                .rollout
                .choose(&self.scratch, self.sim.exit_action(&s), rng);
            let step = self.sim.step(world, &s, a, rng)?;
            total += g * step.reward;
            g *= gamma;
            d += 1;
            s = step.next;
        }
        Ok(total)
    }
}

/// One decision of root-sampled tree search.
pub fn bamcp_search<S: Simulator, P: WorldSampler<S::World>>(
    sim: &S,
    sampler: &mut P,
    root: &S::State,
    config: &BamcpConfig,
    rng: &mut SimRng,
) -> Result<SearchOutcome> {
    Bamcp::new(sim, config.clone())?.search(sampler, root, rng)
}
