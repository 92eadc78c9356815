use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;

use baplan::crp::{
    exact_partition_posterior, gibbs_partition_frequencies, total_variation, AlphaMode, ModelSpec,
    SubtaskObservation,
};
use baplan::domains::{
    example2_commit_value_enumerated, oracle_example1_ts_steps, oracle_example2_values,
    oracle_example3, oracle_example4_boss_bound, ts_steps_to_reward, TrueWorld,
};
use baplan::harness::{run_experiment, write_outputs, ExperimentConfig, Profile};
use baplan::mushroom;
use baplan::rng::SimRng;

#[derive(Parser)]
#[command(
    name = "baplan",
    version,
    about = "Bayes-adaptive planning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment.
    Run(RunArgs),
    /// Print closed-form values of the counterexample domains.
    Oracle(OracleArgs),
    /// Compare collapsed Gibbs against exact partition enumeration.
    GibbsCheck(GibbsArgs),
    /// Audit the mushroom data file.
    ValidateData(DataArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    planner: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Simulations per decision.
    #[arg(long)]
    sims: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Budget preset: desk or paper.
    #[arg(long)]
    profile: Option<Profile>,
    /// Directory holding the mushroom data file.
    #[arg(long, env = mushroom::DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Example number, 1 to 4.
    #[arg(long)]
    example: u8,
    #[arg(long, default_value_t = 3)]
    x: usize,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    c1: f64,
    /// Number of posterior samples.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Gambles after the first.
    #[arg(long, default_value_t = 20)]
    n: usize,
}

#[derive(Args)]
struct GibbsArgs {
    /// Subtasks in the synthetic dataset (at most 8).
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    sweeps: usize,
    #[arg(long, default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, env = mushroom::DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Also print the column maps as JSON.
    #[arg(long)]
    sidecar: bool,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = args.domain {
        cfg.domain = d;
    }
    if let Some(p) = args.planner {
        cfg.planner = p;
    }
    if let Some(p) = args.profile {
        cfg.apply_profile(p);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(k) = args.sims {
        cfg.simulations = k;
    }
    if let Some(o) = args.out {
        cfg.out = Some(o);
    }
    if let Some(d) = args.data_dir {
        cfg.data_dir = Some(d);
    }
    cfg.validate()?;
    info!(
        "running {} on {} ({} replicates)",
        cfg.planner, cfg.domain, cfg.replicates
    );
    let out = run_experiment(&cfg)?;
    let s = &out.summary;
    println!(
        "{} {} replicates={} return={:.4} stderr={:.4} skipped={:.2} failed={}",
        cfg.domain,
        cfg.planner,
        s.runs.len(),
        s.mean_return,
        s.stderr_return,
        s.mean_skipped,
        out.failures.len()
    );
    if let Some(dir) = &cfg.out {
        write_outputs(&out, dir).with_context(|| format!("writing {}", dir.display()))?;
        println!("wrote {}", dir.display());
    }
    if out.summary.runs.is_empty() {
        bail!("every replicate failed");
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    match a.example {
        1 => println!(
            "x={} steps_to_end={} steps_to_reward={}",
            a.x,
            oracle_example1_ts_steps(a.x),
            ts_steps_to_reward(a.x)
        ),
        2 => {
            let (v_star, v_commit) = oracle_example2_values(a.x, a.gamma);
            println!(
                "x={} gamma={} v_star={v_star:.10} v_commit={v_commit:.10} v_commit_enumerated={:.10}",
                a.x,
                a.gamma,
                example2_commit_value_enumerated(a.x, a.gamma)
            );
        }
        3 => {
            let (v_ts, z) = oracle_example3(a.p, a.c1, a.k);
            println!(
                "p={} c1={} k={} v_ts={v_ts:.10} z_k={z:.10}",
                a.p, a.c1, a.k
            );
        }
        4 => println!(
            "p={} c1={} k={} n={} gamma={} bound={:.10}",
            a.p,
            a.c1,
            a.k,
            a.n,
            a.gamma,
            oracle_example4_boss_bound(a.p, a.c1, a.k, a.n, a.gamma)
        ),
        e => bail!("no example {e}; choose 1 to 4"),
    }
    Ok(())
}

fn gibbs_check(a: GibbsArgs) -> Result<()> {
    let spec = ModelSpec::uniform(1, 3, 2, 2, AlphaMode::Fixed(a.alpha))?;
    let mut rng = SimRng::seed_from_u64(a.seed);
    let world = TrueWorld::synthetic(&spec, a.alpha, 0, a.n, &mut rng)?;
    let data = world
        .subtasks
        .iter()
        .map(|r| SubtaskObservation::full(&spec, r))
        .collect::<baplan::Result<Vec<_>>>()?;
    let exact = exact_partition_posterior(&data, &spec, a.alpha)?;
    let gibbs = gibbs_partition_frequencies(&data, &spec, a.alpha, a.burn_in, a.sweeps, &mut rng)?;
    println!(
        "n={} alpha={} sweeps={} partitions={} tv={:.5}",
        a.n,
        a.alpha,
        a.sweeps,
        exact.len(),
        total_variation(&exact, &gibbs)
    );
    Ok(())
}

fn validate_data(a: DataArgs) -> Result<()> {
    let dir = a.data_dir.unwrap_or_else(mushroom::data_dir);
    let path = mushroom::dataset_path(&dir);
    let (data, audit) = mushroom::load_verified(&path)?;
    println!(
        "{}: rows={} sha256={} edible_fraction={:.4} distinct={:?}",
        audit.path.display(),
        audit.rows,
        audit.sha256,
        audit.edible_fraction,
        audit.distinct
    );
    if a.sidecar {
        println!("{}", data.sidecar_json());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Oracle(a) => oracle(a),
        Command::GibbsCheck(a) => gibbs_check(a),
        Command::ValidateData(a) => validate_data(a),
    }
}
