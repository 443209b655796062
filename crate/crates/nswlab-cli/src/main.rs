//! Command-line front end: run episodes, sweep horizons and seeds, verify
//! the built-in hard instances, and demonstrate the bandit linear-regret
//! separation. Emits plot-ready CSV/JSON; no figure rendering.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use nswlab::env::{
    hard_stochastic_family, verify_gap, verify_marginal_equivalence, PairFamily, PairSide,
};
use nswlab::harness::{
    episode_regret, fit_rate, run_episode, sweep, write_csv, write_summary_json, EpisodeConfig,
    FeedbackModel, SweepConfig,
};
use nswlab::learners::LearnerSpec;
use nswlab::welfare::SwfSpec;
use nswlab::NswError;

#[derive(Parser)]
#[command(name = "nswlab", about = "Online multi-agent social welfare maximization lab")]
struct Cli {
    /// Worker threads for sweep cells (default: all physical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Added to every seed before running; shifts a sweep to fresh draws.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode from a JSON config and write its regret report.
    Run(IoArgs),
    /// Run a (T, seed) sweep from a JSON config; writes CSV and a summary.
    Sweep(IoArgs),
    /// Certify a built-in hard instance.
    VerifyHard(VerifyArgs),
    /// Average per-round regret of a bandit learner on both sides of the
    /// NSW lower-bound pair.
    DemoLinearRegret(DemoArgs),
}

#[derive(Args)]
struct IoArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HardTarget {
    Nsw,
    Nswprod,
    Stochastic,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    which: HardTarget,
    /// K for the stochastic family.
    #[arg(long, default_value_t = 4)]
    arms: usize,
    /// N for the stochastic family.
    #[arg(long, default_value_t = 2)]
    agents: usize,
    /// T for the stochastic family.
    #[arg(long, default_value_t = 1_000_000)]
    horizon: usize,
}

#[derive(Args)]
struct DemoArgs {
    /// Largest horizon; the demo also runs T/4 and T/2.
    #[arg(long, default_value_t = 50_000)]
    horizon: usize,
    /// Seeds per cell.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// Bandit learner to demonstrate.
    #[arg(long, default_value = "uniform")]
    learner: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum Status {
    Ok,
    ConfigError,
    RuntimeError,
    CheckFailed,
}

impl Status {
    fn finish(self, message: Option<String>) -> ExitCode {
        let (name, code) = match self {
            Status::Ok => ("ok", 0),
            Status::ConfigError => ("config_error", 1),
            Status::RuntimeError => ("runtime_error", 2),
            Status::CheckFailed => ("check_failed", 3),
        };
        if let Some(m) = message {
            eprintln!("{m}");
        }
        println!("status={name}");
        ExitCode::from(code)
    }
}

fn classify(err: &NswError) -> Status {
    match err {
        NswError::InvalidConfig(_)
        | NswError::InvalidParameter(_)
        | NswError::DimensionMismatch(_)
        | NswError::InsufficientData(_) => Status::ConfigError,
        NswError::SolverFailure { .. } | NswError::GridTooLarge { .. } | NswError::Io(_) => {
            Status::RuntimeError
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NSWLAB_LOG")).init();
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Status::ConfigError.finish(Some("--workers must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            return Status::RuntimeError.finish(Some(format!("thread pool: {e}")));
        }
    }
    let offset = cli.seed_offset;
    match cli.command {
        Command::Run(args) => cmd_run(&args, offset),
        Command::Sweep(args) => cmd_sweep(&args, offset),
        Command::VerifyHard(args) => cmd_verify_hard(&args),
        Command::DemoLinearRegret(args) => cmd_demo(&args, offset),
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn ensure_out_dir(dir: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}

fn cmd_run(args: &IoArgs, offset: u64) -> ExitCode {
    let mut cfg: EpisodeConfig = match load_config(&args.config) {
        Ok(c) => c,
        Err(m) => return Status::ConfigError.finish(Some(m)),
    };
    cfg.seed = cfg.seed.wrapping_add(offset);
    if let Err(m) = ensure_out_dir(&args.out) {
        return Status::RuntimeError.finish(Some(m));
    }
    info!("running episode: learner={} T={}", cfg.learner.kind, cfg.horizon);
    let traj = match run_episode(&cfg) {
        Ok(t) => t,
        Err(e) => return classify(&e).finish(Some(e.to_string())),
    };
    let report = match episode_regret(&cfg, &traj) {
        Ok(r) => r,
        Err(e) => return classify(&e).finish(Some(e.to_string())),
    };
    #[derive(serde::Serialize)]
    struct RunOutput<'a> {
        config: &'a EpisodeConfig,
        total_regret: f64,
        benchmark_value: f64,
        benchmark_strategy: Vec<f64>,
        final_strategy: Vec<f64>,
        mean_welfare: f64,
    }
    let t = traj.per_round_welfare.len() as f64;
    let out = RunOutput {
        config: &cfg,
        total_regret: report.total_regret,
        benchmark_value: report.benchmark_value,
        benchmark_strategy: report.benchmark_strategy.probs().to_vec(),
        final_strategy: traj.strategies.last().expect("T >= 1").probs().to_vec(),
        mean_welfare: traj.per_round_welfare.iter().sum::<f64>() / t,
    };
    let path = args.out.join("run.json");
    let text = serde_json::to_string_pretty(&out).expect("run output serializes");
    if let Err(e) = std::fs::write(&path, text + "\n") {
        return Status::RuntimeError.finish(Some(e.to_string()));
    }
    println!("regret={} benchmark={} out={}", report.total_regret, report.benchmark_value, path.display());
    Status::Ok.finish(None)
}

fn cmd_sweep(args: &IoArgs, offset: u64) -> ExitCode {
    let mut cfg: SweepConfig = match load_config(&args.config) {
        Ok(c) => c,
        Err(m) => return Status::ConfigError.finish(Some(m)),
    };
    for s in &mut cfg.seeds {
        *s = s.wrapping_add(offset);
    }
    if let Err(m) = ensure_out_dir(&args.out) {
        return Status::RuntimeError.finish(Some(m));
    }
    info!(
        "sweeping: learner={} cells={}",
        cfg.learner.kind,
        cfg.t_grid.len() * cfg.seeds.len()
    );
    let result = match sweep(&cfg) {
        Ok(r) => r,
        Err(e) => return classify(&e).finish(Some(e.to_string())),
    };
    let csv_path = args.out.join("sweep.csv");
    let json_path = args.out.join("summary.json");
    if let Err(e) =
        write_csv(&result.rows, &csv_path).and_then(|_| write_summary_json(&result, &json_path))
    {
        return classify(&e).finish(Some(e.to_string()));
    }
    if let Some(fit) = &result.fit {
        println!("fitted_exponent={} r_squared={}", fit.exponent, fit.r_squared);
    }
    println!("csv={} summary={}", csv_path.display(), json_path.display());
    Status::Ok.finish(None)
}

fn cmd_verify_hard(args: &VerifyArgs) -> ExitCode {
    match args.which {
        HardTarget::Stochastic => {
            let family = match hard_stochastic_family(args.arms, args.agents, args.horizon) {
                Ok(f) => f,
                Err(e) => return classify(&e).finish(Some(e.to_string())),
            };
            println!(
                "family K={} N={} T={} epsilon={} epsilon_raw={}",
                args.arms, args.agents, args.horizon, family.epsilon, family.epsilon_raw
            );
            for (i, env) in family.envs.iter().enumerate() {
                let col: Vec<f64> = (0..args.arms).map(|arm| env.mean.get(arm, 0)).collect();
                println!("env_{i} agent1_column={col:?}");
            }
            let structured = family.envs.iter().enumerate().all(|(i, env)| {
                (0..args.arms).all(|arm| {
                    let want = if arm == i { family.epsilon } else { 0.0 };
                    env.mean.get(arm, 0) == want
                        && (1..args.agents).all(|agent| env.mean.get(arm, agent) == 1.0)
                })
            });
            if structured && family.epsilon > 0.0 && family.epsilon <= 1.0 / 9.0 {
                Status::Ok.finish(None)
            } else {
                Status::CheckFailed.finish(Some("family structure check failed".into()))
            }
        }
        HardTarget::Nsw | HardTarget::Nswprod => {
            let family = if args.which == HardTarget::Nsw {
                PairFamily::Nsw
            } else {
                PairFamily::NswProd
            };
            verify_pair(family)
        }
    }
}

fn verify_pair(family: PairFamily) -> ExitCode {
    let pair = family.build();
    let swf = family.swf();
    let gap = *pair.meta.gap.numer() as f64 / *pair.meta.gap.denom() as f64;
    println!(
        "p_star={:?} p_star_alt={:?} delta={}",
        pair.meta.p_star.probs(),
        pair.meta.p_star_alt.probs(),
        gap
    );
    let sums_ok = pair.probabilities_sum_to_one();
    let marginals_ok = verify_marginal_equivalence(&pair);
    println!("probabilities_sum_to_one={sums_ok}");
    println!("marginals_equal={marginals_ok}");
    let resolution = 1e-4;
    let min_gap = match verify_gap(&pair, &swf, resolution) {
        Ok(g) => g,
        Err(e) => return classify(&e).finish(Some(e.to_string())),
    };
    let gap_ok = min_gap >= gap - resolution;
    println!("min_region_suboptimality={min_gap} required={}", gap - resolution);
    if sums_ok && marginals_ok && gap_ok {
        Status::Ok.finish(None)
    } else {
        Status::CheckFailed.finish(Some("hard-pair certification failed".into()))
    }
}

fn cmd_demo(args: &DemoArgs, offset: u64) -> ExitCode {
    if args.horizon < 1000 {
        return Status::ConfigError.finish(Some("demo horizon must be at least 1000".into()));
    }
    if args.seeds == 0 {
        return Status::ConfigError.finish(Some("demo needs at least one seed".into()));
    }
    if let Err(m) = ensure_out_dir(&args.out) {
        return Status::RuntimeError.finish(Some(m));
    }
    let t_grid = [args.horizon / 4, args.horizon / 2, args.horizon];
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|s| s.wrapping_add(offset)).collect();
    let mut lines = vec!["T,side_a_per_round,side_b_per_round,max_per_round".to_string()];
    let mut max_rows = Vec::new();
    for &t in &t_grid {
        let mut per_side = [0.0f64; 2];
        for (slot, side) in [(0, PairSide::A), (1, PairSide::B)] {
            let mut total = 0.0;
            for &seed in &seeds {
                let cfg = EpisodeConfig {
                    learner: LearnerSpec::by_kind(&args.learner),
                    env: nswlab::env::EnvSpec::HardPair { family: PairFamily::Nsw, side },
                    swf: SwfSpec::Nsw,
                    horizon: t,
                    feedback: FeedbackModel::Bandit,
                    seed,
                };
                let traj = match run_episode(&cfg) {
                    Ok(tr) => tr,
                    Err(e) => return classify(&e).finish(Some(e.to_string())),
                };
                let report = match episode_regret(&cfg, &traj) {
                    Ok(r) => r,
                    Err(e) => return classify(&e).finish(Some(e.to_string())),
                };
                total += report.total_regret;
            }
            per_side[slot] = total / (seeds.len() as f64 * t as f64);
        }
        let max_side = per_side[0].max(per_side[1]);
        lines.push(format!("{t},{},{},{max_side}", per_side[0], per_side[1]));
        max_rows.push((t as f64, max_side * t as f64));
        println!("T={t} per_round_regret_a={} per_round_regret_b={} max={max_side}", per_side[0], per_side[1]);
    }
    let path = args.out.join("demo_linear_regret.csv");
    if let Err(e) = std::fs::write(&path, lines.join("\n") + "\n") {
        return Status::RuntimeError.finish(Some(e.to_string()));
    }
    if let Ok(fit) = fit_rate(
        &max_rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        &max_rows.iter().map(|r| r.1).collect::<Vec<_>>(),
    ) {
        println!("fitted_exponent={}", fit.exponent);
    }
    println!("csv={}", path.display());
    Status::Ok.finish(None)
}
