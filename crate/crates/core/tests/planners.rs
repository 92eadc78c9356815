use std::cell::Cell;
use std::collections::HashMap;
use std::sync::Arc;

use baplan::bamdp::{
    exact_bamdp_solve, horizon_for, solve_bayes_adaptive, ActionId, DiscountConfig, DiscreteBelief,
    MdpBuilder, RewardBounds, StateId, DEFAULT_NODE_BUDGET,
};
use baplan::crp::PoolConfig;
use baplan::domains::{
    BernoulliBandit, BernoulliSim, ChainDomain, ChainStart, FiniteMdpSim, MdpPosterior,
    PayoffDomain,
};
use baplan::planners::{
    bamcp_search, ts_get_action, ucb_select, ActionStats, Bamcp, BamcpConfig, BossAgent,
    BossConfig, FiniteMdpSolver, RolloutPolicy, SearchNode, SimStep, Simulator,
};
use baplan::rng::SimRng;
use baplan::Result;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn config(simulations: usize, c: f64, gamma: f64, epsilon: f64, rmax: f64) -> BamcpConfig {
    BamcpConfig {
        simulations,
        exploration: c,
        discount: DiscountConfig::new(gamma, epsilon, rmax).unwrap(),
        rollout: RolloutPolicy::Uniform,
        pool: PoolConfig::default(),
    }
}

#[test]
fn ucb_prefers_the_less_visited_action() {
    let node = SearchNode {
        visits: 10,
        actions: vec![
            ActionStats {
                action: ActionId(0),
                visits: 5,
                value: 1.0,
            },
            ActionStats {
                action: ActionId(1),
                visits: 1,
                value: 0.5,
            },
        ],
    };
    let mut rng = SimRng::seed_from_u64(0);
    assert_eq!(ucb_select(&node, 3.0, &mut rng), 1);
}

#[test]
fn ucb_ties_split_evenly() {
    let stats = |a| ActionStats {
        action: ActionId(a),
        visits: 3,
        value: 0.4,
    };
    let node = SearchNode {
        visits: 6,
        actions: vec![stats(0), stats(1)],
    };
    let mut rng = SimRng::seed_from_u64(3);
    let first = (0..10_000)
        .filter(|_| ucb_select(&node, 1.0, &mut rng) == 0)
        .count();
    assert!((first as f64 / 1e4 - 0.5).abs() < 0.05, "{first}");
}

/// One state, one action paying `r` forever.
struct Constant(f64);

impl Simulator for Constant {
    type State = ();
    type World = ();

    fn actions(&self, _: &(), out: &mut Vec<ActionId>) {
        out.push(ActionId(0));
    }

    fn step(&self, _: &mut (), _: &(), _: ActionId, _: &mut SimRng) -> Result<SimStep<()>> {
        Ok(SimStep {
            next: (),
            reward: self.0,
            obs: 0,
        })
    }

    fn rmax(&self) -> f64 {
        self.0.abs()
    }
}

#[test]
fn single_simulation_is_a_truncated_geometric_sum() {
    let (r, gamma) = (0.7, 0.9);
    let cfg = config(1, 1.0, gamma, 1e-3, r);
    let h = cfg.discount.cutoff_depth() as i32;
    let mut rng = SimRng::seed_from_u64(0);
    let out = bamcp_search(
        &Constant(r),
        &mut |_: &mut SimRng| Ok(()),
        &(),
        &cfg,
        &mut rng,
    )
    .unwrap();
    let want = r * (1.0 - gamma.powi(h)) / (1.0 - gamma);
    assert!(
        (out.root[0].value - want).abs() < 1e-12,
        "{} vs {want}",
        out.root[0].value
    );
}

#[test]
fn search_past_the_cutoff_is_worthless() {
    let cfg = config(5, 1.0, 0.5, 2.0, 1.0);
    assert!(cfg.discount.cut(0));
    let mut rng = SimRng::seed_from_u64(0);
    let out = bamcp_search(
        &Constant(1.0),
        &mut |_: &mut SimRng| Ok(()),
        &(),
        &cfg,
        &mut rng,
    )
    .unwrap();
    assert_eq!(out.root[0].value, 0.0);
}

fn one_step_mdp() -> (FiniteMdpSim, Arc<baplan::bamdp::FiniteMdp>) {
    let m = Arc::new(
        MdpBuilder::new(2)
            .deterministic(0, 0, 1, 1.0)
            .deterministic(0, 1, 1, 0.0)
            .build()
            .unwrap(),
    );
    let sim = FiniteMdpSim::new(Arc::clone(&m), RewardBounds::new(0.0, 1.0).unwrap());
    (sim, m)
}

#[test]
fn degenerate_posterior_picks_the_paying_action() {
    let (sim, m) = one_step_mdp();
    let cfg = config(100, 1.0, 0.9, 1e-3, 1.0);
    for seed in 0..20 {
        let mut rng = SimRng::seed_from_u64(seed);
        let mut sampler = |_: &mut SimRng| Ok(Arc::clone(&m));
        let out = bamcp_search(&sim, &mut sampler, &StateId(0), &cfg, &mut rng).unwrap();
        assert_eq!(out.action, ActionId(0));
    }
}

#[test]
fn one_world_is_drawn_per_simulation() {
    let chain = ChainDomain::new(3, ChainStart::Middle).unwrap();
    let prior = chain.prior();
    let sim = FiniteMdpSim::new(Arc::clone(&prior.support()[0]), chain.bounds());
    let draws = Cell::new(0usize);
    let mut sampler = |rng: &mut SimRng| {
        draws.set(draws.get() + 1);
        Ok(prior.sample(rng))
    };
    let cfg = config(777, 1.0, 0.95, 0.01, 1.0);
    let mut rng = SimRng::seed_from_u64(1);
    bamcp_search(&sim, &mut sampler, &chain.start_state(), &cfg, &mut rng).unwrap();
    assert_eq!(draws.get(), 777);
}

#[test]
fn backups_are_running_means_of_simulation_returns() {
    let chain = ChainDomain::new(2, ChainStart::SecondFromLeft).unwrap();
    let prior = chain.prior();
    let sim = FiniteMdpSim::new(Arc::clone(&prior.support()[0]), chain.bounds());
    let mut planner = Bamcp::new(&sim, config(2_000, 1.0, 0.9, 0.01, 1.0))
        .unwrap()
        .with_trace();
    let mut rng = SimRng::seed_from_u64(5);
    let mut sampler = |rng: &mut SimRng| Ok(prior.sample(rng));
    planner
        .search(&mut sampler, &chain.start_state(), &mut rng)
        .unwrap();
    let mut replay: HashMap<(u32, usize), (u64, f64)> = HashMap::new();
    for e in planner.trace() {
        let slot = replay.entry((e.node, e.action.0)).or_insert((0, 0.0));
        slot.0 += 1;
        slot.1 += e.ret;
    }
    let tree = planner.tree();
    assert!(tree.is_count_consistent());
    let mut checked = 0;
    for id in 0..tree.len() as u32 {
        for st in &tree.node(id).actions {
            match replay.get(&(id, st.action.0)) {
                Some(&(n, total)) => {
                    assert_eq!(n, st.visits);
                    assert!((total / n as f64 - st.value).abs() < 1e-9);
                    checked += 1;
                }
                None => assert_eq!((st.visits, st.value), (0, 0.0)),
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn near_end_first_on_the_offset_chain() {
    let chain = ChainDomain::new(2, ChainStart::SecondFromLeft).unwrap();
    let prior = chain.prior();
    let disc = DiscountConfig::new(0.95, 0.05, 1.0).unwrap();
    let exact = exact_bamdp_solve(&prior, chain.start_state(), 30, &disc).unwrap();
    assert_eq!(exact.greedy_root_actions(1e-12), vec![ChainDomain::LEFT]);

    let sim = FiniteMdpSim::new(Arc::clone(&prior.support()[0]), chain.bounds());
    let cfg = BamcpConfig {
        discount: disc,
        ..config(50_000, 1.0, 0.95, 0.05, 1.0)
    };
    let mut planner = Bamcp::new(&sim, cfg).unwrap();
    let mut rng = SimRng::seed_from_u64(11);
    let mut sampler = |rng: &mut SimRng| Ok(prior.sample(rng));
    let left = (0..100)
        .filter(|_| {
            planner
                .search(&mut sampler, &chain.start_state(), &mut rng)
                .unwrap()
                .action
                == ChainDomain::LEFT
        })
        .count();
    assert!(left >= 95, "{left}/100");
}

#[test]
fn bandit_search_agrees_with_exact_values() {
    let gamma = 0.9;
    let eps = 0.05;
    let horizon = horizon_for(gamma, 1.0, eps);
    let cfg = config(50_000, 1.0 / (1.0 - gamma), gamma, eps, 1.0);
    assert_eq!(cfg.discount.cutoff_depth(), horizon);
    let sim = BernoulliSim { arms: 2 };
    let mut belief_rng = SimRng::seed_from_u64(2024);
    let mut rng = SimRng::seed_from_u64(7);
    let mut agree = 0;
    for _ in 0..10 {
        let mut bandit = BernoulliBandit::uniform(2).unwrap();
        for c in bandit.counts.iter_mut() {
            *c = (belief_rng.gen_range(0..4), belief_rng.gen_range(0..4));
        }
        let exact = solve_bayes_adaptive(
            &bandit.exact_model(),
            &bandit.counts,
            horizon,
            gamma,
            DEFAULT_NODE_BUDGET,
        )
        .unwrap();
        let best = exact.greedy_root_actions(1e-12);
        let mut planner = Bamcp::new(&sim, cfg.clone()).unwrap();
        let mut sampler = |rng: &mut SimRng| bandit.sample_world(rng);
        for _ in 0..10 {
            let a = planner.search(&mut sampler, &(), &mut rng).unwrap().action;
            agree += best.contains(&a) as usize;
        }
    }
    assert!(agree >= 95, "{agree}/100");
}

#[test]
fn thompson_flips_a_fair_coin_on_the_chain() {
    let chain = ChainDomain::new(3, ChainStart::Middle).unwrap();
    let prior = chain.prior();
    let solver = FiniteMdpSolver { gamma: 0.95 };
    let mut rng = SimRng::seed_from_u64(0);
    let mut sampler = |rng: &mut SimRng| Ok(prior.sample(rng));
    let left = (0..10_000)
        .filter(|_| {
            ts_get_action(&mut sampler, &solver, &chain.start_state(), &mut rng).unwrap()
                == ChainDomain::LEFT
        })
        .count();
    assert!((left as f64 / 1e4 - 0.5).abs() < 0.02, "{left}");
}

#[test]
fn thompson_takes_the_gamble_when_the_sample_is_benign() {
    let d = PayoffDomain::new(0.5, -10.0, 0).unwrap();
    let post = d.prior();
    let solver = FiniteMdpSolver { gamma: 0.9 };
    let mut rng = SimRng::seed_from_u64(1);
    let mut sampler = |rng: &mut SimRng| Ok(post.sample(rng));
    let n = 10_000;
    let a1 = (0..n)
        .filter(|_| {
            ts_get_action(&mut sampler, &solver, &d.start_state(), &mut rng).unwrap()
                == PayoffDomain::A1
        })
        .count();
    let sigma = (0.25f64 / n as f64).sqrt();
    assert!((a1 as f64 / n as f64 - 0.5).abs() < 3.0 * sigma, "{a1}");
}

fn boss_mean_reward(k: usize, runs: usize, seed: u64) -> f64 {
    let d = PayoffDomain::new(0.5, -10.0, 0).unwrap();
    let mut rng = SimRng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..runs {
        let world = d.world(&d.sample_cases(&mut rng)).unwrap();
        let post = d.prior();
        let mut agent = BossAgent::new(
            BossConfig {
                samples: k,
                resample_every: 1,
            },
            0.9,
        )
        .unwrap();
        let mut sampler = |rng: &mut SimRng| Ok(post.sample(rng));
        let a = agent.act(&mut sampler, d.start_state(), &mut rng).unwrap();
        total += world.step(d.start_state(), a, &mut rng).unwrap().reward;
    }
    total / runs as f64
}

#[test]
fn boss_expected_reward_with_two_samples() {
    let v = boss_mean_reward(2, 100_000, 9);
    assert!((v + 3.375).abs() < 0.1, "{v}");
}

#[test]
fn boss_value_decreases_with_samples() {
    let values: Vec<f64> = (1..=5)
        .map(|k| boss_mean_reward(k, 20_000, 100 + k as u64))
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn exact_chain_values_match_closed_form() {
    let chain = ChainDomain::new(3, ChainStart::SecondFromLeft).unwrap();
    let disc = DiscountConfig::new(0.95, 1e-6, 1.0).unwrap();
    let exact = exact_bamdp_solve(&chain.prior(), chain.start_state(), 200, &disc).unwrap();
    let (v_star, _) = baplan::domains::oracle_example2_values(3, 0.95);
    assert!((exact.root_value() - v_star).abs() < 1e-9);
}

fn random_chain_belief(w: f64) -> DiscreteBelief {
    let chain = ChainDomain::new(2, ChainStart::Middle).unwrap();
    chain.prior().with_weights(vec![w, 1.0 - w]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_counts_stay_consistent(seed in 0u64..1000, sims in 1usize..400, w in 0.05f64..0.95) {
        let belief = random_chain_belief(w);
        let chain = ChainDomain::new(2, ChainStart::Middle).unwrap();
        let sim = FiniteMdpSim::new(Arc::clone(&belief.support()[0]), chain.bounds());
        let mut planner = Bamcp::new(&sim, config(sims, 1.5, 0.9, 0.01, 1.0)).unwrap();
        let mut rng = SimRng::seed_from_u64(seed);
        let mut sampler = |rng: &mut SimRng| Ok(belief.sample(rng));
        let out = planner.search(&mut sampler, &chain.start_state(), &mut rng).unwrap();
        prop_assert!(planner.tree().is_count_consistent());
        let root_visits: u64 = out.root.iter().map(|s| s.visits).sum();
        prop_assert_eq!(root_visits, sims as u64);
    }
}
