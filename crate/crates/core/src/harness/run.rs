use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{aggregate, MetricsSummary};
use crate::bamdp::{ActionId, FiniteMdp, RewardBounds, StateId};
use crate::crp::{
    CrpPosterior, DynamicsSample, PooledSampler, PosteriorSnapshot, SamplePool, SubtaskObservation,
};
use crate::domains::{
    ChainDomain, ChainEnd, ChainStart, FiniteMdpSim, MdpPosterior, PayoffDomain, SubtaskDomain,
    SubtaskEnv, SubtaskState, SubtaskTs, TaskKind, TrueWorld, EXIT,
};
use crate::error::{Error, Result};
use crate::mushroom;
use crate::planners::{
    baseline_action, ts_get_action, Bamcp, BaselineKind, BossAgent, BossConfig, FiniteMdpSolver,
    PsrlAgent, PsrlConfig, Simulator,
};
use crate::rng::{replicate_seed, stream_rng, SimRng, Stream};

/// One agent step. For finite-state domains `tau` holds the state id and
/// the posterior columns are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub step: usize,
    pub tau: usize,
    pub action: usize,
    pub reward: f64,
    pub discounted_return: f64,
    /// An engaging (eat or pull) action was available before acting.
    pub legal_eat: bool,
    pub cluster_count: usize,
    pub alpha: f64,
}

/// The latent world a replicate was played against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldLog {
    pub run_id: usize,
    pub world_seed: u64,
    pub world_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicateFailure {
    pub run_id: usize,
    pub cause: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    /// Sorted by run id, then step.
    pub records: Vec<RunRecord>,
    pub worlds: Vec<WorldLog>,
    pub failures: Vec<ReplicateFailure>,
    pub summary: MetricsSummary,
}

enum Family {
    Chain(ChainDomain),
    Payoff(PayoffDomain),
    Subtask {
        domain: SubtaskDomain,
        table: Option<Arc<Vec<Vec<u8>>>>,
    },
}

fn family(cfg: &ExperimentConfig) -> Result<Family> {
    let alpha = cfg.alpha()?;
    Ok(match cfg.domain.as_str() {
        "chain1" => Family::Chain(ChainDomain::new(cfg.chain_x, ChainStart::Middle)?),
        "chain2" => Family::Chain(ChainDomain::new(cfg.chain_x, ChainStart::SecondFromLeft)?),
        "payoff" => Family::Payoff(PayoffDomain::new(
            cfg.payoff_p,
            cfg.payoff_c1,
            cfg.payoff_n,
        )?),
        "crp-bandit" => Family::Subtask {
            domain: SubtaskDomain::crp_bandit(alpha)?,
            table: None,
        },
        "drilling" => Family::Subtask {
            domain: SubtaskDomain::drilling_default(alpha)?,
            table: None,
        },
        "mushroom" => {
            let dir = cfg.data_dir.clone().unwrap_or_else(mushroom::data_dir);
            let (data, audit) = mushroom::load_verified(&mushroom::dataset_path(&dir))?;
            info!("mushroom data {} rows, sha256 {}", audit.rows, audit.sha256);
            Family::Subtask {
                domain: SubtaskDomain::mushroom(alpha)?,
                table: Some(Arc::new(data.encoded())),
            }
        }
        other => return Err(Error::Config(format!("unknown domain `{other}`"))),
    })
}

/// Runs every replicate of `cfg`. A replicate that errors is logged and
/// left out; the others still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let fam = family(cfg)?;
    let run = || {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| (r, run_replicate(cfg, &fam, r)))
            .collect::<Vec<_>>()
    };
    let results = if cfg.threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)
    };
    let mut records = Vec::new();
    let mut worlds = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in results {
        match res {
            Ok((recs, world)) => {
                records.extend(recs);
                worlds.push(world);
            }
            Err(e) => {
                warn!("replicate {r} aborted: {e}");
                failures.push(ReplicateFailure {
                    run_id: r,
                    cause: e.to_string(),
                });
            }
        }
    }
    let summary = aggregate(&records);
    Ok(ExperimentOutput {
        config: cfg.clone(),
        records,
        worlds,
        failures,
        summary,
    })
}

/// Seeds of one replicate: the world stream follows `seed`, the planner and
/// inference streams follow `planner_seed` when it is set.
fn replicate_rngs(cfg: &ExperimentConfig, r: usize) -> (u64, SimRng, SimRng, SimRng, SimRng) {
    let world_seed = replicate_seed(cfg.seed, r);
    let agent_seed = replicate_seed(cfg.planner_seed.unwrap_or(cfg.seed), r);
    (
        world_seed,
        stream_rng(world_seed, Stream::World),
        stream_rng(agent_seed, Stream::Inference),
        stream_rng(agent_seed, Stream::Planner),
        stream_rng(world_seed, Stream::Environment),
    )
}

fn run_replicate(
    cfg: &ExperimentConfig,
    fam: &Family,
    r: usize,
) -> Result<(Vec<RunRecord>, WorldLog)> {
    let (world_seed, mut world_rng, mut inf, mut plan, mut env_rng) = replicate_rngs(cfg, r);
    let (records, hash) = match fam {
        Family::Chain(chain) => {
            let end = if rand::Rng::gen::<bool>(&mut world_rng) {
                ChainEnd::Left
            } else {
                ChainEnd::Right
            };
            let world = Arc::new(chain.world(end));
            let prior = chain.prior();
            let template = Arc::clone(&prior.support()[0]);
            let hash = mushroom::sha256_hex(format!("{end:?}").as_bytes());
            let f = FiniteRun {
                cfg,
                run_id: r,
                world,
                template,
                start: chain.start_state(),
                bounds: chain.bounds(),
                safe: None,
            };
            (f.run(prior, &mut plan, &mut env_rng)?, hash)
        }
        Family::Payoff(payoff) => {
            let cases = payoff.sample_cases(&mut world_rng);
            let world = Arc::new(payoff.world(&cases)?);
            let template = Arc::clone(&world);
            let hash = mushroom::sha256_hex(&cases.iter().map(|&c| c as u8).collect::<Vec<_>>());
            let f = FiniteRun {
                cfg,
                run_id: r,
                world,
                template,
                start: payoff.start_state(),
                bounds: payoff.bounds(),
                safe: Some(PayoffDomain::A2),
            };
            (f.run(payoff.prior(), &mut plan, &mut env_rng)?, hash)
        }
        Family::Subtask { domain, table } => {
            let n = cfg.steps + 1;
            let world = match table {
                Some(t) => TrueWorld::resampled(t, cfg.free_examples, n, &mut world_rng)?,
                None => TrueWorld::synthetic(domain.spec(), cfg.true_alpha, 0, n, &mut world_rng)?,
            };
            let hash = world.hash();
            (
                run_subtask(cfg, r, domain, &world, &mut inf, &mut plan)?,
                hash,
            )
        }
    };
    Ok((
        records,
        WorldLog {
            run_id: r,
            world_seed,
            world_hash: hash,
        },
    ))
}

struct FiniteRun<'a> {
    cfg: &'a ExperimentConfig,
    run_id: usize,
    world: Arc<FiniteMdp>,
    template: Arc<FiniteMdp>,
    start: StateId,
    bounds: RewardBounds,
    /// Zero-reward action of the exit-only baseline.
    safe: Option<ActionId>,
}

impl FiniteRun<'_> {
    fn run<B: MdpPosterior>(
        &self,
        mut post: B,
        plan: &mut SimRng,
        env_rng: &mut SimRng,
    ) -> Result<Vec<RunRecord>> {
        let cfg = self.cfg;
        let gamma = cfg.gamma;
        let sim = FiniteMdpSim::new(Arc::clone(&self.template), self.bounds);
        let mut bamcp = match cfg.planner.as_str() {
            "bamcp" => Some(Bamcp::new(
                &sim,
                cfg.bamcp(self.bounds.abs_max(), self.bounds.range())?,
            )?),
            _ => None,
        };
        let mut psrl = match cfg.planner.as_str() {
            "psrl" => {
                let mut pc = PsrlConfig::for_discount(gamma)?;
                if let Some(k) = cfg.psrl_commit {
                    pc.commit_steps = k;
                }
                Some(PsrlAgent::new(pc, gamma)?)
            }
            _ => None,
        };
        let mut boss = match cfg.planner.as_str() {
            "boss" => Some(BossAgent::new(
                BossConfig {
                    samples: cfg.boss_samples,
                    resample_every: cfg.boss_resample,
                },
                gamma,
            )?),
            _ => None,
        };
        let mut records = Vec::new();
        let (mut s, mut ret, mut g) = (self.start, 0.0, 1.0);
        for step in 0..cfg.steps {
            if self.world.is_terminal(s) {
                break;
            }
            let a = {
                let mut sampler = |rng: &mut SimRng| Ok(post.sample(rng));
                match cfg.planner.as_str() {
                    "bamcp" => {
                        bamcp
                            .as_mut()
                            .expect("built")
                            .search(&mut sampler, &s, plan)?
                            .action
                    }
                    "ts" => ts_get_action(&mut sampler, &FiniteMdpSolver { gamma }, &s, plan)?,
                    "psrl" => psrl.as_mut().expect("built").act(&mut sampler, s, plan)?,
                    "boss" => boss.as_mut().expect("built").act(&mut sampler, s, plan)?,
                    "exit" => self
                        .safe
                        .ok_or_else(|| Error::Unsupported("domain has no neutral action".into()))?,
                    other => return Err(Error::Unsupported(format!("{other} on a finite domain"))),
                }
            };
            let t = self.world.step(s, a, env_rng)?;
            post.observe(s, a, t.next, t.reward)?;
            if let Some(p) = psrl.as_mut() {
                p.observe(s, a, t.next, t.reward);
            }
            if let Some(b) = boss.as_mut() {
                b.observe();
            }
            ret += g * t.reward;
            g *= gamma;
            records.push(RunRecord {
                run_id: self.run_id,
                step,
                tau: s.0,
                action: a.0,
                reward: t.reward,
                discounted_return: ret,
                legal_eat: false,
                cluster_count: 0,
                alpha: 0.0,
            });
            s = t.next;
        }
        Ok(records)
    }
}

/// Posterior-mean value of each legal action in `s`, averaged over the
/// pooled snapshots. A preparation action is valued by the best payoff
/// action reachable after it, discounted once.
pub fn mean_action_values<'s>(
    domain: &SubtaskDomain,
    snapshots: impl Iterator<Item = &'s Arc<PosteriorSnapshot>>,
    s: &SubtaskState,
    gamma: f64,
) -> Vec<(ActionId, f64)> {
    let mut legal = Vec::new();
    domain.legal(s, &mut legal);
    let spec = domain.spec();
    let mut values = vec![0.0; legal.len()];
    // joint[i][b][j]: route bit b of action i, then payoff action j
    let mut joint = vec![[[0.0; 2]; 2]; legal.len()];
    let mut n = 0usize;
    for snap in snapshots {
        n += 1;
        let mix = snap.row_mixture(s.row);
        let mean = |table: &crate::crp::ClusterTable, dim: usize| -> f64 {
            (0..spec.arity(dim))
                .map(|v| table.predictive(spec, dim, v as u8) * domain.reward_of(v as u8))
                .sum()
        };
        for (i, &a) in legal.iter().enumerate() {
            let Some(dim) = domain.dim_of(s, a) else {
                continue;
            };
            let routed = domain.kind() == TaskKind::Drilling && s.phase == 0;
            for (w, table) in &mix {
                if !routed {
                    values[i] += w * mean(table, dim);
                    continue;
                }
                for b in 0..2u8 {
                    let next = SubtaskState { phase: 1 + b, ..*s };
                    let pb = table.predictive(spec, dim, b);
                    for (j, pay) in [ActionId(3), ActionId(4)].into_iter().enumerate() {
                        let pd = domain.dim_of(&next, pay).expect("payoff dim");
                        joint[i][b as usize][j] += w * pb * mean(table, pd);
                    }
                }
            }
        }
    }
    let n = n.max(1) as f64;
    legal
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let routed = domain.kind() == TaskKind::Drilling && s.phase == 0 && a != EXIT;
            let v = if routed {
                gamma * joint[i].iter().map(|r| r[0].max(r[1])).sum::<f64>()
            } else {
                values[i]
            };
            (a, v / n)
        })
        .collect()
}

fn run_subtask(
    cfg: &ExperimentConfig,
    run_id: usize,
    domain: &SubtaskDomain,
    world: &TrueWorld,
    inf: &mut SimRng,
    plan: &mut SimRng,
) -> Result<Vec<RunRecord>> {
    let gamma = cfg.gamma;
    let spec = Arc::clone(domain.spec());
    let mut env = SubtaskEnv::new(domain, world)?;
    let mut post = CrpPosterior::new(Arc::clone(&spec));
    for row in &world.free {
        post.push(SubtaskObservation::full(&spec, row)?, inf)?;
    }
    post.push(SubtaskObservation::from_context(&spec, env.context())?, inf)?;
    let infers = cfg.planner != "exit";
    if infers {
        post.sweeps(cfg.burn_in, inf)?;
    }
    let mut bamcp = match cfg.planner.as_str() {
        "bamcp" => Some(Bamcp::new(
            domain,
            cfg.bamcp(domain.rmax(), domain.bounds().range())?,
        )?),
        _ => None,
    };
    let pool_cfg = cfg.pool();
    let mut records = Vec::with_capacity(cfg.steps);
    let (mut ret, mut g) = (0.0, 1.0);
    for step in 0..cfg.steps {
        let s = env.state();
        let tau = env.tau();
        let legal_eat = domain.can_engage(&s);
        let a = match cfg.planner.as_str() {
            "bamcp" => {
                if step > 0 {
                    post.sweeps(cfg.step_sweeps, inf)?;
                }
                let mut sampler = PooledSampler::new(&mut post, pool_cfg, inf)?;
                bamcp
                    .as_mut()
                    .expect("built")
                    .search(&mut sampler, &s, plan)?
                    .action
            }
            "ts" => {
                if step > 0 {
                    post.sweeps(cfg.ts_sweeps, inf)?;
                }
                let snap = post.snapshot();
                let mut sampler = |_: &mut SimRng| Ok(DynamicsSample::new(Arc::clone(&snap)));
                ts_get_action(&mut sampler, &SubtaskTs { domain, gamma }, &s, plan)?
            }
            "mean-greedy" => {
                if step > 0 {
                    post.sweeps(cfg.step_sweeps, inf)?;
                }
                let pool = SamplePool::fill(&mut post, &pool_cfg, inf)?;
                let values = mean_action_values(domain, pool.snapshots(), &s, gamma);
                baseline_action(BaselineKind::MeanGreedy, EXIT, &values, plan)
            }
            "exit" => baseline_action(BaselineKind::ExitOnly, EXIT, &[], plan),
            other => return Err(Error::Unsupported(format!("{other} on a subtask domain"))),
        };
        let st = env.step(a)?;
        if let Some((dim, v)) = st.revealed {
            post.reveal(s.row, dim, v)?;
        }
        if st.advanced {
            post.push(SubtaskObservation::from_context(&spec, env.context())?, inf)?;
        }
        ret += g * st.reward;
        g *= gamma;
        records.push(RunRecord {
            run_id,
            step,
            tau,
            action: a.0,
            reward: st.reward,
            discounted_return: ret,
            legal_eat,
            cluster_count: post.n_clusters(),
            alpha: post.alpha(),
        });
    }
    Ok(records)
}
