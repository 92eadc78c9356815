use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use sha2::{Digest, Sha256};

use crate::bamdp::{ActionId, RewardBounds};
use crate::crp::{crp_assign_probs, AlphaMode, DynamicsSample, ModelSpec};
use crate::error::{Error, Result};
use crate::planners::{SampledSolver, SimStep, Simulator};
use crate::rng::SimRng;

/// Leaves the current subtask.
pub const EXIT: ActionId = ActionId(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Each outcome dimension is an arm that can be pulled once.
    Bandit,
    /// Two-stage decision: a preparation action routed by a latent bit to
    /// one of two states, then one of two payoff actions there.
    Drilling,
}

/// Position within the subtask sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubtaskState {
    /// Row of the current subtask in the model's data (free examples first).
    pub row: usize,
    /// Bit `a` set once arm `a` has been pulled.
    pub pulled: u32,
    /// Drilling stage: 0 before preparing, 1 or 2 afterwards.
    pub phase: u8,
}

impl SubtaskState {
    pub fn fresh(row: usize) -> Self {
        Self {
            row,
            pulled: 0,
            phase: 0,
        }
    }
}

/// A sequence of subtasks whose parameter vectors follow a CRP mixture.
#[derive(Debug, Clone)]
pub struct SubtaskDomain {
    spec: Arc<ModelSpec>,
    kind: TaskKind,
    rewards: Vec<f64>,
    bounds: RewardBounds,
}

const DRILL_DIMS: usize = 6;
const OBS_SHIFT: u32 = 120;

impl SubtaskDomain {
    fn build(spec: ModelSpec, kind: TaskKind, rewards: Vec<f64>) -> Result<Self> {
        if spec.context_bits() > OBS_SHIFT {
            return Err(Error::Unsupported(format!(
                "context needs {} bits, at most {OBS_SHIFT} are supported",
                spec.context_bits()
            )));
        }
        if spec.n_outcomes() == 0 || spec.n_outcomes() > 32 {
            return Err(Error::InvalidInput(format!(
                "{} outcome dims, need 1..=32",
                spec.n_outcomes()
            )));
        }
        if (spec.n_context()..spec.n_dims()).any(|d| spec.arity(d) != rewards.len()) {
            return Err(Error::InvalidInput(format!(
                "reward map has {} entries but outcome arities differ",
                rewards.len()
            )));
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidInput("rewards must be finite".into()));
        }
        let min = rewards.iter().cloned().fold(0.0, f64::min);
        let max = rewards.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            spec: Arc::new(spec),
            kind,
            rewards,
            bounds: RewardBounds::new(min, max)?,
        })
    }

    /// Contextual bandit: outcome value `v` of an arm pays `rewards[v]`.
    pub fn bandit(spec: ModelSpec, rewards: Vec<f64>) -> Result<Self> {
        Self::build(spec, TaskKind::Bandit, rewards)
    }

    /// Drilling task over six binary outcome dims: the routing bits of the
    /// two preparation actions, then the payoff bits of (s1,a2), (s1,a3),
    /// (s2,a2), (s2,a3).
    pub fn drilling(spec: ModelSpec, payoffs: [f64; 2]) -> Result<Self> {
        if spec.n_outcomes() != DRILL_DIMS {
            return Err(Error::InvalidInput(format!(
                "drilling needs {DRILL_DIMS} binary outcome dims, got {}",
                spec.n_outcomes()
            )));
        }
        Self::build(spec, TaskKind::Drilling, payoffs.to_vec())
    }

    /// Three context dims and three arms, five categories each.
    pub fn crp_bandit(alpha: AlphaMode) -> Result<Self> {
        Self::bandit(
            ModelSpec::uniform(3, 5, 3, 5, alpha)?,
            vec![5.0, 2.0, 0.0, -1.0, -10.0],
        )
    }

    /// Twenty-two attribute dims of twelve categories and one binary
    /// edibility arm (0 edible, 1 poisonous).
    pub fn mushroom(alpha: AlphaMode) -> Result<Self> {
        Self::bandit(ModelSpec::uniform(22, 12, 1, 2, alpha)?, vec![5.0, -15.0])
    }

    pub fn drilling_default(alpha: AlphaMode) -> Result<Self> {
        Self::drilling(ModelSpec::uniform(3, 5, DRILL_DIMS, 2, alpha)?, [-1.5, 1.0])
    }

    pub fn spec(&self) -> &Arc<ModelSpec> {
        &self.spec
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn bounds(&self) -> RewardBounds {
        self.bounds
    }

    pub fn reward_of(&self, v: u8) -> f64 {
        self.rewards[v as usize]
    }

    pub fn with_alpha(&self, alpha: AlphaMode) -> Result<Self> {
        Self::build(
            self.spec.with_alpha(alpha)?,
            self.kind,
            self.rewards.clone(),
        )
    }

    fn c(&self) -> usize {
        self.spec.n_context()
    }

    pub fn legal(&self, s: &SubtaskState, out: &mut Vec<ActionId>) {
        match self.kind {
            TaskKind::Bandit => {
                out.push(EXIT);
                out.extend(
                    (0..self.spec.n_outcomes())
                        .filter(|a| s.pulled & (1 << a) == 0)
                        .map(|a| ActionId(a + 1)),
                );
            }
            TaskKind::Drilling if s.phase == 0 => out.extend([EXIT, ActionId(1), ActionId(2)]),
            TaskKind::Drilling => out.extend([ActionId(3), ActionId(4)]),
        }
    }

    pub fn is_legal(&self, s: &SubtaskState, a: ActionId) -> bool {
        let mut v = Vec::with_capacity(8);
        self.legal(s, &mut v);
        v.contains(&a)
    }

    /// Whether some non-exit action is available, i.e. the agent could eat or pull.
    pub fn can_engage(&self, s: &SubtaskState) -> bool {
        match self.kind {
            TaskKind::Bandit => s.pulled.count_ones() < self.spec.n_outcomes() as u32,
            TaskKind::Drilling => s.phase == 0,
        }
    }

    /// Outcome dim read by `a` in `s`.
    pub fn dim_of(&self, s: &SubtaskState, a: ActionId) -> Option<usize> {
        match self.kind {
            TaskKind::Bandit if a != EXIT => Some(self.c() + a.0 - 1),
            TaskKind::Drilling if s.phase == 0 && (a.0 == 1 || a.0 == 2) => {
                Some(self.c() + a.0 - 1)
            }
            TaskKind::Drilling if s.phase > 0 && (a.0 == 3 || a.0 == 4) => {
                Some(self.c() + 2 + 2 * (s.phase as usize - 1) + (a.0 - 3))
            }
            _ => None,
        }
    }

    /// Applies `a` given the value of the dimension it reads.
    /// Returns the next state, the reward and whether the subtask ended.
    fn advance(&self, s: &SubtaskState, a: ActionId, v: Option<u8>) -> (SubtaskState, f64, bool) {
        match (self.kind, v) {
            (_, None) => (SubtaskState::fresh(s.row + 1), 0.0, true),
            (TaskKind::Bandit, Some(v)) => {
                let mut n = *s;
                n.pulled |= 1 << (a.0 - 1);
                (n, self.reward_of(v), false)
            }
            (TaskKind::Drilling, Some(v)) if s.phase == 0 => {
                let mut n = *s;
                n.phase = 1 + v;
                n.pulled |= 1 << (a.0 - 1);
                (n, 0.0, false)
            }
            (TaskKind::Drilling, Some(v)) => {
                (SubtaskState::fresh(s.row + 1), self.reward_of(v), true)
            }
        }
    }

    /// Best action when every value of the current subtask is known,
    /// looking no further than the end of the subtask. Ties go to the
    /// lowest action id, so exit wins over a zero-valued engagement.
    pub fn greedy_known(
        &self,
        s: &SubtaskState,
        gamma: f64,
        value: &mut dyn FnMut(usize) -> u8,
    ) -> ActionId {
        let c = self.c();
        match self.kind {
            TaskKind::Bandit => {
                let mut best = (EXIT, 0.0);
                for a in 0..self.spec.n_outcomes() {
                    if s.pulled & (1 << a) != 0 {
                        continue;
                    }
                    let r = self.reward_of(value(c + a));
                    if r > best.1 {
                        best = (ActionId(a + 1), r);
                    }
                }
                best.0
            }
            TaskKind::Drilling => {
                let stage = |phase: usize, value: &mut dyn FnMut(usize) -> u8| {
                    let base = c + 2 + 2 * (phase - 1);
                    let r2 = self.reward_of(value(base));
                    let r3 = self.reward_of(value(base + 1));
                    if r3 > r2 {
                        (ActionId(4), r3)
                    } else {
                        (ActionId(3), r2)
                    }
                };
                if s.phase > 0 {
                    return stage(s.phase as usize, value).0;
                }
                let mut best = (EXIT, 0.0);
                for prep in 0..2 {
                    let phase = 1 + value(c + prep) as usize;
                    let v = gamma * stage(phase, value).1;
                    if v > best.1 {
                        best = (ActionId(prep + 1), v);
                    }
                }
                best.0
            }
        }
    }
}

impl Simulator for SubtaskDomain {
    type State = SubtaskState;
    type World = DynamicsSample;

    fn actions(&self, s: &SubtaskState, out: &mut Vec<ActionId>) {
        self.legal(s, out);
    }

    fn step(
        &self,
        world: &mut DynamicsSample,
        s: &SubtaskState,
        a: ActionId,
        rng: &mut SimRng,
    ) -> Result<SimStep<SubtaskState>> {
        if !self.is_legal(s, a) {
            return Err(Error::Contract(format!("action {} illegal in {s:?}", a.0)));
        }
        let v = self.dim_of(s, a).map(|d| world.value(s.row, d, rng));
        let (next, reward, ended) = self.advance(s, a, v);
        let mut obs = v.map_or(0, |v| v as u128 + 1);
        if ended {
            obs = (obs << OBS_SHIFT) | world.context_key(next.row, rng);
        }
        Ok(SimStep { next, reward, obs })
    }

    fn exit_action(&self, s: &SubtaskState) -> Option<ActionId> {
        (self.kind == TaskKind::Bandit || s.phase == 0).then_some(EXIT)
    }

    fn rmax(&self) -> f64 {
        self.bounds.abs_max()
    }
}

/// Acts optimally for the current subtask of a sampled world.
#[derive(Debug, Clone, Copy)]
pub struct SubtaskTs<'d> {
    pub domain: &'d SubtaskDomain,
    pub gamma: f64,
}

impl SampledSolver<DynamicsSample> for SubtaskTs<'_> {
    type State = SubtaskState;

    fn greedy_action(
        &self,
        world: &mut DynamicsSample,
        s: &SubtaskState,
        rng: &mut SimRng,
    ) -> Result<ActionId> {
        let row = s.row;
        Ok(self
            .domain
            .greedy_known(s, self.gamma, &mut |d| world.value(row, d, rng)))
    }
}

/// The latent sequence one replicate is played against, drawn up front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrueWorld {
    /// Fully observed examples given to the agent before the first step.
    pub free: Vec<Vec<u8>>,
    pub subtasks: Vec<Vec<u8>>,
}

fn dirichlet<R: Rng + ?Sized>(d: usize, conc: f64, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(conc, 1.0).expect("positive concentration");
    let mut w: Vec<f64> = (0..d).map(|_| g.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    } else {
        let k = rng.gen_range(0..d);
        w.iter_mut()
            .enumerate()
            .for_each(|(i, x)| *x = (i == k) as u8 as f64);
    }
    w
}

fn categorical<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let mut u = rng.gen::<f64>();
    for (i, &x) in p.iter().enumerate() {
        u -= x;
        if u < 0.0 {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

impl TrueWorld {
    /// Draws `n_free + n` subtasks from the generative model with explicit
    /// cluster parameter vectors.
    pub fn synthetic<R: Rng + ?Sized>(
        spec: &ModelSpec,
        alpha: f64,
        n_free: usize,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sizes: Vec<usize> = Vec::new();
        let mut thetas: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut rows = Vec::with_capacity(n_free + n);
        for _ in 0..n_free + n {
            let p = crp_assign_probs(&sizes, alpha)?;
            let k = categorical(&p, rng);
            if k == sizes.len() {
                sizes.push(0);
                thetas.push(
                    (0..spec.n_dims())
                        .map(|i| dirichlet(spec.arity(i), spec.beta() / spec.arity(i) as f64, rng))
                        .collect(),
                );
            }
            sizes[k] += 1;
            rows.push(
                thetas[k]
                    .iter()
                    .map(|t| categorical(t, rng) as u8)
                    .collect(),
            );
        }
        let subtasks = rows.split_off(n_free);
        Ok(Self {
            free: rows,
            subtasks,
        })
    }

    /// Uniform draws with replacement from a fixed table of rows.
    pub fn resampled<R: Rng + ?Sized>(
        table: &[Vec<u8>],
        n_free: usize,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidInput("no rows to draw from".into()));
        }
        let mut draw = || table[rng.gen_range(0..table.len())].clone();
        let free = (0..n_free).map(|_| draw()).collect();
        let subtasks = (0..n).map(|_| draw()).collect();
        Ok(Self { free, subtasks })
    }

    /// Hex SHA-256 over every value, for logging.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (tag, rows) in [(b'f', &self.free), (b's', &self.subtasks)] {
            for r in rows.iter() {
                h.update([tag]);
                h.update(r);
            }
        }
        hex::encode(h.finalize())
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub reward: f64,
    /// Outcome dimension revealed by the action and its value.
    pub revealed: Option<(usize, u8)>,
    /// The subtask ended and `tau` advanced.
    pub advanced: bool,
}

/// The real environment of one replicate.
#[derive(Debug, Clone)]
pub struct SubtaskEnv<'a> {
    domain: &'a SubtaskDomain,
    world: &'a TrueWorld,
    tau: usize,
    state: SubtaskState,
}

impl<'a> SubtaskEnv<'a> {
    pub fn new(domain: &'a SubtaskDomain, world: &'a TrueWorld) -> Result<Self> {
        if world.subtasks.is_empty() {
            return Err(Error::InvalidInput("world has no subtasks".into()));
        }
        let n = domain.spec().n_dims();
        if world
            .free
            .iter()
            .chain(&world.subtasks)
            .any(|r| r.len() != n)
        {
            return Err(Error::InvalidInput(format!(
                "world rows must have {n} values"
            )));
        }
        Ok(Self {
            domain,
            world,
            tau: 0,
            state: SubtaskState::fresh(world.free.len()),
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn state(&self) -> SubtaskState {
        self.state
    }

    pub fn context(&self) -> &[u8] {
        &self.world.subtasks[self.tau][..self.domain.spec().n_context()]
    }

    pub fn step(&mut self, a: ActionId) -> Result<EnvStep> {
        if !self.domain.is_legal(&self.state, a) {
            return Err(Error::Contract(format!(
                "action {} illegal in {:?}",
                a.0, self.state
            )));
        }
        let dim = self.domain.dim_of(&self.state, a);
        let v = dim.map(|d| self.world.subtasks[self.tau][d]);
        let (next, reward, ended) = self.domain.advance(&self.state, a, v);
        if ended {
            if self.tau + 1 >= self.world.subtasks.len() {
                return Err(Error::Capacity {
                    what: "subtasks drawn for this replicate",
                    limit: self.world.subtasks.len(),
                });
            }
            self.tau += 1;
        }
        self.state = next;
        Ok(EnvStep {
            reward,
            revealed: dim.zip(v),
            advanced: ended,
        })
    }
}
