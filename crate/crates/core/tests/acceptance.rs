//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,3,5` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use baplan::bamdp::{solve_bayes_adaptive, DiscountConfig, StateId, DEFAULT_NODE_BUDGET};
use baplan::crp::{
    exact_partition_posterior, forward_sample, gibbs_partition_frequencies, total_variation,
    AlphaMode, CrpPosterior, ModelSpec, PoolConfig, SubtaskObservation,
};
use baplan::domains::{
    example2_commit_value_enumerated, oracle_example1_ts_steps, oracle_example2_values,
    oracle_example3, BernoulliBandit, BernoulliSim, ChainDomain, ChainStart, FiniteMdpSim,
    SubtaskDomain, TrueWorld,
};
use baplan::harness::{
    mean_stderr, paired_t_test, run_experiment, write_outputs, ExperimentConfig, ExperimentOutput,
};
use baplan::planners::{Bamcp, BamcpConfig, RolloutPolicy};
use baplan::rng::SimRng;
use rand::SeedableRng;

const SEED: u64 = 20_240_601;
const ALPHAS: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

struct Gate {
    only: Option<Vec<usize>>,
    failed: usize,
    out_dir: PathBuf,
}

impl Gate {
    fn wants(&self, id: usize) -> bool {
        self.only.as_ref().is_none_or(|v| v.contains(&id))
    }

    fn report(&mut self, id: usize, pass: bool, detail: String, started: Instant) {
        if !pass {
            self.failed += 1;
        }
        println!(
            "[{}] criterion {id}: {detail} ({:.0}s)",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }

    fn run(&self, tag: &str, cfg: &ExperimentConfig) -> ExperimentOutput {
        let out = run_experiment(cfg).unwrap_or_else(|e| panic!("{tag}: {e}"));
        for f in &out.failures {
            eprintln!("{tag}: replicate {} failed: {}", f.run_id, f.cause);
        }
        let _ = write_outputs(&out, &self.out_dir.join(tag));
        eprintln!(
            "{tag}: return {:.3} ± {:.3}, skipped {:.2}",
            out.summary.mean_return, out.summary.stderr_return, out.summary.mean_skipped
        );
        out
    }
}

fn returns(out: &ExperimentOutput) -> BTreeMap<usize, f64> {
    out.summary
        .runs
        .iter()
        .map(|r| (r.run_id, r.discounted_return))
        .collect()
}

fn skips(out: &ExperimentOutput) -> BTreeMap<usize, f64> {
    out.summary
        .runs
        .iter()
        .map(|r| (r.run_id, r.skipped as f64))
        .collect()
}

/// Values of runs present in both maps, in run order.
fn paired(a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>) -> (Vec<f64>, Vec<f64>) {
    a.iter()
        .filter_map(|(k, x)| b.get(k).map(|y| (*x, *y)))
        .unzip()
}

fn finite(domain: &str, planner: &str, runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        domain: domain.into(),
        planner: planner.into(),
        replicates: runs,
        seed: SEED,
        steps: 100_000,
        ..ExperimentConfig::default()
    }
}

fn crp_bandit(planner: &str, alpha: f64) -> ExperimentConfig {
    ExperimentConfig {
        domain: "crp-bandit".into(),
        planner: planner.into(),
        true_alpha: alpha,
        replicates: 50,
        steps: 120,
        simulations: 5_000,
        seed: SEED,
        ..ExperimentConfig::default()
    }
}

fn criterion1(g: &mut Gate) {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for x in [3usize, 5, 8] {
        let mut cfg = finite("chain1", "ts", 10_000);
        cfg.chain_x = x;
        let out = run_experiment(&cfg).unwrap();
        let chain = ChainDomain::new(x, ChainStart::Middle).unwrap();
        let mut first_end: BTreeMap<usize, usize> = BTreeMap::new();
        for r in &out.records {
            if chain.is_end(StateId(r.tau)) {
                first_end.entry(r.run_id).or_insert(r.step);
            }
        }
        let steps: Vec<f64> = first_end.values().map(|&s| s as f64).collect();
        let (mean, _) = mean_stderr(&steps);
        let want = oracle_example1_ts_steps(x);
        let ok = steps.len() == 10_000 && ((mean - want) / want).abs() < 0.05;
        pass &= ok;
        parts.push(format!("x={x} mean {mean:.2} vs {want}"));
    }
    g.report(1, pass, parts.join(", "), t);
}

fn criterion2(g: &mut Gate) {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (x, gamma) in [(2usize, 0.9), (3, 0.95)] {
        let mut cfg = finite("chain2", "psrl", 10_000);
        cfg.chain_x = x;
        cfg.gamma = gamma;
        let out = run_experiment(&cfg).unwrap();
        let (mean, se) = (out.summary.mean_return, out.summary.stderr_return);
        let (_, published) = oracle_example2_values(x, gamma);
        let ok = (mean - published).abs() < 3.0 * se;
        pass &= ok;
        parts.push(format!(
            "x={x} g={gamma} psrl {mean:.4}±{se:.4} vs {published:.4} (enumerated {:.4})",
            example2_commit_value_enumerated(x, gamma)
        ));
    }
    for (x, gamma) in [(2usize, 0.9), (3, 0.95)] {
        let chain = ChainDomain::new(x, ChainStart::SecondFromLeft).unwrap();
        let prior = chain.prior();
        let fine = DiscountConfig::new(gamma, 1e-6, 1.0).unwrap();
        let exact =
            baplan::bamdp::exact_bamdp_solve(&prior, chain.start_state(), 400, &fine).unwrap();
        let disc = DiscountConfig::new(gamma, 0.05, 1.0).unwrap();
        let best = exact.greedy_root_actions(1e-12);
        let sim = FiniteMdpSim::new(Arc::clone(&prior.support()[0]), chain.bounds());
        let cfg = BamcpConfig {
            simulations: 50_000,
            exploration: chain.bounds().range() / (1.0 - gamma),
            discount: disc,
            rollout: RolloutPolicy::Uniform,
            pool: PoolConfig::default(),
        };
        let mut planner = Bamcp::new(&sim, cfg).unwrap();
        let mut rng = SimRng::seed_from_u64(SEED + x as u64);
        let mut sampler = |rng: &mut SimRng| Ok(prior.sample(rng));
        let hits = (0..100)
            .filter(|_| {
                let a = planner
                    .search(&mut sampler, &chain.start_state(), &mut rng)
                    .unwrap()
                    .action;
                best.contains(&a)
            })
            .count();
        pass &= best == vec![ChainDomain::LEFT] && hits >= 95;
        parts.push(format!("x={x} bamcp near-end {hits}/100"));
    }
    g.report(2, pass, parts.join(", "), t);
}

fn criterion3(g: &mut Gate) {
    let t = Instant::now();
    let (p, c1) = (0.5, -10.0);
    let runs = 100_000;
    let mut parts = Vec::new();
    let ts = run_experiment(&finite("payoff", "ts", runs))
        .unwrap()
        .summary;
    let (v_ts, _) = oracle_example3(p, c1, 1);
    let mut pass = (ts.mean_return - v_ts).abs() < 3.0 * ts.stderr_return;
    parts.push(format!(
        "ts {:.3}±{:.3} vs {v_ts:.3}",
        ts.mean_return, ts.stderr_return
    ));
    let mut boss = Vec::new();
    for k in [1u32, 2, 5] {
        let mut cfg = finite("payoff", "boss", runs);
        cfg.boss_samples = k as usize;
        cfg.seed = SEED + k as u64;
        let s = run_experiment(&cfg).unwrap().summary;
        let (_, z) = oracle_example3(p, c1, k);
        pass &= (s.mean_return - z).abs() < 3.0 * s.stderr_return;
        parts.push(format!(
            "boss k={k} {:.3}±{:.3} vs {z:.3}",
            s.mean_return, s.stderr_return
        ));
        boss.push(s.mean_return);
    }
    pass &= boss.windows(2).all(|w| w[1] < w[0]);
    let safe = run_experiment(&finite("payoff", "exit", runs)).unwrap();
    let zero = safe.records.iter().all(|r| r.reward == 0.0) && safe.summary.mean_return == 0.0;
    pass &= zero;
    parts.push(format!("always-a2 {}", safe.summary.mean_return));
    g.report(3, pass, parts.join(", "), t);
}

fn criterion4(g: &mut Gate) {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, (n, alpha)) in [(4usize, 0.5), (5, 1.0), (6, 2.0)].into_iter().enumerate() {
        let spec = ModelSpec::uniform(1, 3, 2, 2, AlphaMode::Fixed(alpha)).unwrap();
        let mut rng = SimRng::seed_from_u64(SEED + i as u64);
        let world = TrueWorld::synthetic(&spec, alpha, 0, n, &mut rng).unwrap();
        let data: Vec<_> = world
            .subtasks
            .iter()
            .map(|r| SubtaskObservation::full(&spec, r).unwrap())
            .collect();
        let exact = exact_partition_posterior(&data, &spec, alpha).unwrap();
        let gibbs =
            gibbs_partition_frequencies(&data, &spec, alpha, 1_000, 100_000, &mut rng).unwrap();
        let tv = total_variation(&exact, &gibbs);
        pass &= tv < 0.02;
        parts.push(format!("n={n} a={alpha} tv {tv:.4}"));
    }
    g.report(4, pass, parts.join(", "), t);
}

fn criterion5(g: &mut Gate) {
    let t = Instant::now();
    let d = SubtaskDomain::crp_bandit(AlphaMode::Fixed(1.0)).unwrap();
    let snap = CrpPosterior::new(Arc::clone(d.spec())).snapshot();
    let n_ctx = d.spec().n_context();
    let mut rng = SimRng::seed_from_u64(SEED);
    let n = 100_000;
    let hits = (0..n)
        .filter(|_| {
            let row = &forward_sample(Arc::clone(&snap), 0, 1, &mut rng).unwrap()[0];
            row.values[n_ctx..].iter().any(|&v| d.reward_of(v) > 0.0)
        })
        .count();
    let f = hits as f64 / n as f64;
    g.report(
        5,
        (f - 0.784).abs() < 0.01,
        format!("frequency {f:.4} vs 0.784"),
        t,
    );
}

struct BanditRuns {
    known: Vec<ExperimentOutput>,
}

fn criterion6(g: &mut Gate) -> BanditRuns {
    let t = Instant::now();
    let known: Vec<ExperimentOutput> = ALPHAS
        .iter()
        .map(|&a| g.run(&format!("c6-bamcp-{a}"), &crp_bandit("bamcp", a)))
        .collect();
    let ret: Vec<f64> = known.iter().map(|o| o.summary.mean_return).collect();
    let skip: Vec<f64> = known.iter().map(|o| o.summary.mean_skipped).collect();
    let a = ret[0] > 0.0;
    let b = (-0.5..=0.5).contains(&ret[5]);
    let c = skip.windows(2).all(|w| w[1] > w[0]);
    let mut d = true;
    let mut tests = Vec::new();
    for (i, alpha) in [(4usize, 5.0), (5, 10.0)] {
        let ts = g.run(&format!("c6-ts-{alpha}"), &crp_bandit("ts", alpha));
        let (x, y) = paired(&returns(&known[i]), &returns(&ts));
        let test = paired_t_test(&x, &y);
        d &= test.p_value < 0.05;
        tests.push(format!(
            "a={alpha} ts {:.2} p={:.4}",
            ts.summary.mean_return, test.p_value
        ));
    }
    let detail = format!(
        "returns {:?} (a {a}, b {b}); skipped {:?} (c {c}); bamcp>ts {} (d {d})",
        ret.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
        skip.iter().map(|s| format!("{s:.1}")).collect::<Vec<_>>(),
        tests.join(", ")
    );
    g.report(6, a && b && c && d, detail, t);
    BanditRuns { known }
}

fn criterion7(g: &mut Gate, runs: &BanditRuns) {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &alpha) in ALPHAS.iter().enumerate() {
        let mut cfg = crp_bandit("bamcp", alpha);
        cfg.alpha_mode = "hyper".into();
        let hyper = g.run(&format!("c7-hyper-{alpha}"), &cfg);
        let known = &runs.known[i].summary;
        let (ks, hs) = paired(&skips(&runs.known[i]), &skips(&hyper));
        let (ks, hs) = (mean_stderr(&ks).0, mean_stderr(&hs).0);
        let mut ok = hs >= ks;
        let gap = (known.mean_return - hyper.summary.mean_return).abs();
        let pooled = (known.stderr_return.powi(2) + hyper.summary.stderr_return.powi(2)).sqrt();
        if alpha <= 1.0 {
            ok &= gap < 2.0 * pooled;
        }
        pass &= ok;
        parts.push(format!(
            "a={alpha} skips {hs:.1}>={ks:.1} gap {gap:.2} (2se {:.2})",
            2.0 * pooled
        ));
    }
    g.report(7, pass, parts.join(", "), t);
}

fn criterion8(g: &mut Gate, runs: &BanditRuns) {
    let t = Instant::now();
    let alpha = 1.0;
    let mut cfg = crp_bandit("bamcp", alpha);
    cfg.gamma = 0.95;
    let low = g.run("c8-gamma-0.95", &cfg);
    let high = &runs.known[ALPHAS.iter().position(|&a| a == alpha).unwrap()];
    let (lo, hi) = paired(&skips(&low), &skips(high));
    let test = paired_t_test(&lo, &hi);
    g.report(
        8,
        test.p_value < 0.05,
        format!(
            "a={alpha} skipped g=.95 {:.2} vs g=.96 {:.2}, p={:.4}",
            mean_stderr(&lo).0,
            mean_stderr(&hi).0,
            test.p_value
        ),
        t,
    );
}

fn mushroom(planner: &str, free: usize) -> ExperimentConfig {
    ExperimentConfig {
        domain: "mushroom".into(),
        planner: planner.into(),
        gamma: 0.97,
        steps: 150,
        replicates: 20,
        simulations: 10_000,
        free_examples: free,
        alpha_mode: "hyper".into(),
        seed: SEED,
        data_dir: Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")),
        ..ExperimentConfig::default()
    }
}

fn criterion9(g: &mut Gate) {
    let t = Instant::now();
    let cfg = mushroom("bamcp", 0);
    if let Err(e) = cfg.validate().and_then(|_| {
        baplan::mushroom::load_verified(&baplan::mushroom::dataset_path(
            cfg.data_dir.as_ref().unwrap(),
        ))
    }) {
        g.report(9, false, format!("mushroom data unavailable: {e}"), t);
        return;
    }
    let b15 = g.run("c9-bamcp-15", &mushroom("bamcp", 15));
    let b0 = g.run("c9-bamcp-0", &cfg);
    let ts0 = g.run("c9-ts-0", &mushroom("ts", 0));
    let (m15, m0) = (b15.summary.mean_return, b0.summary.mean_return);
    let (x, y) = paired(&returns(&b0), &returns(&ts0));
    let test = paired_t_test(&x, &y);
    let pass = m15 > 0.0 && m15 >= m0 && test.p_value < 0.05;
    g.report(
        9,
        pass,
        format!(
            "bamcp 15-free {m15:.2}, 0-free {m0:.2}; ts 0-free {:.2}, p={:.4}",
            ts0.summary.mean_return, test.p_value
        ),
        t,
    );
}

fn criterion10(g: &mut Gate) {
    let t = Instant::now();
    let (gamma, eps) = (0.8, 0.005);
    let bandit = BernoulliBandit::uniform(2).unwrap();
    let disc = DiscountConfig::new(gamma, eps, 1.0).unwrap();
    let exact = solve_bayes_adaptive(
        &bandit.exact_model(),
        &bandit.counts,
        disc.cutoff_depth(),
        gamma,
        DEFAULT_NODE_BUDGET,
    )
    .unwrap();
    let sim = BernoulliSim { arms: 2 };
    let budgets = [100usize, 1_000, 10_000, 100_000];
    let mut errors = Vec::new();
    for &k in &budgets {
        let cfg = BamcpConfig {
            simulations: k,
            exploration: 1.0 / (1.0 - gamma),
            discount: disc,
            rollout: RolloutPolicy::Uniform,
            pool: PoolConfig::default(),
        };
        let mut planner = Bamcp::new(&sim, cfg).unwrap();
        let mut total = 0.0;
        let seeds = 50;
        for seed in 0..seeds {
            let mut rng = SimRng::seed_from_u64(SEED + seed);
            let mut sampler = |rng: &mut SimRng| bandit.sample_world(rng);
            let out = planner.search(&mut sampler, &(), &mut rng).unwrap();
            total += out
                .root
                .iter()
                .map(|s| (s.value - exact.root_q_of(s.action).unwrap()).abs())
                .sum::<f64>()
                / out.root.len() as f64;
        }
        errors.push(total / seeds as f64);
    }
    let pass = errors.windows(2).all(|w| w[1] < w[0]);
    let detail = budgets
        .iter()
        .zip(&errors)
        .map(|(k, e)| format!("K={k} {e:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    g.report(10, pass, format!("mean |dQ| {detail}"), t);
}

fn main() {
    let only = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut g = Gate {
        only,
        failed: 0,
        out_dir: PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance"),
    };
    type Step = fn(&mut Gate);
    let quick: [(usize, Step); 5] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
    ];
    for (id, f) in quick {
        if g.wants(id) {
            f(&mut g);
        }
    }
    if g.wants(6) || g.wants(7) || g.wants(8) {
        let runs = criterion6(&mut g);
        if g.wants(7) {
            criterion7(&mut g, &runs);
        }
        if g.wants(8) {
            criterion8(&mut g, &runs);
        }
    }
    if g.wants(9) {
        criterion9(&mut g);
    }
    if g.wants(10) {
        criterion10(&mut g);
    }
    println!("acceptance: {} failed", g.failed);
}
