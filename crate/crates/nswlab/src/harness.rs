//! Episode execution under both feedback models, regret computation,
//! multi-seed sweeps, and empirical rate fitting.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{pair_expected_welfare, EnvInstance, EnvSpec, OutcomePair, PairSide};
use crate::error::{NswError, Result};
use crate::learners::{FeedbackKind, Learner, LearnerSpec, Observation};
use crate::simplex::{
    maximize_concave_simplex, maximize_concave_simplex_from, Objective, SolveReport,
};
use crate::welfare::{
    swf_supergradient, welfare_of_strategy, Strategy, SwfSpec, UtilityMatrix,
};
use crate::DEFAULT_FLOOR;

/// Benchmark solver settings for single-matrix objectives.
const BENCH_TOL: f64 = 1e-8;
const BENCH_MAX_ITERS: usize = 100_000;

/// What the environment reveals each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackModel {
    FullInfo,
    Bandit,
}

/// One episode: a learner, an environment, a welfare function, a horizon,
/// a feedback model, and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    pub learner: LearnerSpec,
    pub env: EnvSpec,
    pub swf: SwfSpec,
    pub horizon: usize,
    pub feedback: FeedbackModel,
    pub seed: u64,
}

/// Everything an episode produced, round by round.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub strategies: Vec<Strategy>,
    pub actions: Vec<usize>,
    pub realized: Vec<UtilityMatrix>,
    pub per_round_welfare: Vec<f64>,
}

/// Regret against the best fixed strategy, plus the benchmark it was
/// measured against.
#[derive(Debug, Clone, Serialize)]
pub struct RegretReport {
    pub total_regret: f64,
    pub benchmark_value: f64,
    pub benchmark_strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_round: Option<Vec<f64>>,
}

fn check_feedback(learner: &dyn Learner, model: FeedbackModel) -> Result<()> {
    let ok = match learner.feedback() {
        FeedbackKind::Any => true,
        FeedbackKind::FullInfo => model == FeedbackModel::FullInfo,
        FeedbackKind::Bandit => model == FeedbackModel::Bandit,
    };
    if ok {
        Ok(())
    } else {
        Err(NswError::InvalidConfig(format!(
            "learner '{}' is not defined for {:?} feedback",
            learner.name(),
            model
        )))
    }
}

/// Draws an arm index by inverse CDF with a single uniform draw.
fn sample_action(p: &Strategy, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &pi) in p.probs().iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Runs one episode. Deterministic for a fixed config: the environment and
/// action draws use separate streams of a seeded generator.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<Trajectory> {
    if cfg.horizon == 0 {
        return Err(NswError::InvalidConfig("horizon must be at least 1".into()));
    }
    let env = cfg.env.instantiate(cfg.horizon)?;
    let (arms, agents) = (env.arms(), env.agents());
    cfg.swf.validate(agents)?;
    let mut learner = cfg.learner.build(arms, agents, cfg.horizon, &cfg.swf, cfg.seed)?;
    check_feedback(learner.as_ref(), cfg.feedback)?;

    let mut env_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    env_rng.set_stream(0);
    let mut action_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    action_rng.set_stream(1);

    let t_total = cfg.horizon;
    let mut traj = Trajectory {
        strategies: Vec::with_capacity(t_total),
        actions: Vec::with_capacity(t_total),
        realized: Vec::with_capacity(t_total),
        per_round_welfare: Vec::with_capacity(t_total),
    };
    for t in 0..t_total {
        let p = learner.act()?;
        let u = env.sample_round(t, &mut env_rng);
        if u.arms() != arms || u.agents() != agents {
            return Err(NswError::DimensionMismatch("environment changed shape".into()));
        }
        let action = sample_action(&p, &mut action_rng);
        match cfg.feedback {
            FeedbackModel::Bandit => {
                learner.observe(Observation::Arm { arm: action, utilities: u.row(action) })?
            }
            FeedbackModel::FullInfo => learner.observe(Observation::Full(&u))?,
        }
        traj.per_round_welfare.push(welfare_of_strategy(&cfg.swf, &u, &p)?);
        traj.strategies.push(p);
        traj.actions.push(action);
        traj.realized.push(u);
    }
    Ok(traj)
}

struct MatrixObjective<'a> {
    u: &'a UtilityMatrix,
    swf: &'a SwfSpec,
}

impl Objective for MatrixObjective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        let s = Strategy::from_weights(p.to_vec()).expect("simplex iterate");
        welfare_of_strategy(self.swf, self.u, &s).expect("dimensions checked by caller")
    }
    fn grad(&self, p: &[f64]) -> Vec<f64> {
        let s = Strategy::from_weights(p.to_vec()).expect("simplex iterate");
        swf_supergradient(self.swf, self.u, &s, DEFAULT_FLOOR)
            .expect("dimensions checked by caller")
    }
}

/// Best fixed strategy against a single matrix.
pub fn solve_single_benchmark(u: &UtilityMatrix, f: &SwfSpec) -> Result<SolveReport> {
    f.validate(u.agents())?;
    Ok(maximize_concave_simplex(&MatrixObjective { u, swf: f }, u.arms(), BENCH_TOL, BENCH_MAX_ITERS))
}

/// Pseudo-regret on the mean matrix: `T max_p f(u^T p) - sum_t f(u^T p_t)`.
pub fn stochastic_regret(
    traj: &Trajectory,
    mean: &UtilityMatrix,
    f: &SwfSpec,
) -> Result<RegretReport> {
    let bench = solve_single_benchmark(mean, f)?;
    let best = welfare_of_strategy(f, mean, &bench.solution)?;
    let t = traj.strategies.len() as f64;
    let mut earned = 0.0;
    for p in &traj.strategies {
        earned += welfare_of_strategy(f, mean, p)?;
    }
    Ok(RegretReport {
        total_regret: t * best - earned,
        benchmark_value: t * best,
        benchmark_strategy: bench.solution,
        per_round: None,
    })
}

struct ScheduleObjective<'a> {
    schedule: &'a [UtilityMatrix],
    swf: &'a SwfSpec,
}

impl Objective for ScheduleObjective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        let s = Strategy::from_weights(p.to_vec()).expect("simplex iterate");
        self.schedule
            .iter()
            .map(|u| welfare_of_strategy(self.swf, u, &s).expect("shapes fixed"))
            .sum()
    }
    fn grad(&self, p: &[f64]) -> Vec<f64> {
        let s = Strategy::from_weights(p.to_vec()).expect("simplex iterate");
        let mut g = vec![0.0; s.len()];
        for u in self.schedule {
            let part = swf_supergradient(self.swf, u, &s, DEFAULT_FLOOR).expect("shapes fixed");
            for (gi, pi) in g.iter_mut().zip(part) {
                *gi += pi;
            }
        }
        g
    }
}

/// Realized-schedule regret: best fixed strategy on the summed objective
/// minus the learner's accumulated welfare.
///
/// The benchmark solve is warm started from the learner's average strategy,
/// which is near optimal for no-regret learners and keeps the summed-
/// objective evaluations few. The tolerance scales with T; the slack is the
/// documented `-tol * T` bound on negative regret.
pub fn adversarial_regret(
    traj: &Trajectory,
    schedule: &[UtilityMatrix],
    f: &SwfSpec,
) -> Result<RegretReport> {
    if schedule.len() != traj.strategies.len() {
        return Err(NswError::DimensionMismatch("schedule and trajectory length differ".into()));
    }
    let first = schedule
        .first()
        .ok_or_else(|| NswError::InvalidParameter("empty schedule".into()))?;
    f.validate(first.agents())?;
    let arms = first.arms();
    let mut avg = vec![0.0; arms];
    for p in &traj.strategies {
        for (a, &pi) in avg.iter_mut().zip(p.probs()) {
            *a += pi;
        }
    }
    let warm = Strategy::from_weights(avg)?;
    let tol = (1e-6 * schedule.len() as f64).max(BENCH_TOL);
    let objective = ScheduleObjective { schedule, swf: f };
    let mut bench = maximize_concave_simplex_from(&objective, &warm, tol, 500);
    // uniform restart guards against a bad warm start
    let from_uniform = maximize_concave_simplex(&objective, arms, tol, 500);
    if objective.value(from_uniform.solution.probs()) > objective.value(bench.solution.probs()) {
        bench = from_uniform;
    }
    let benchmark_value = objective.value(bench.solution.probs());
    let earned: f64 = traj.per_round_welfare.iter().sum();
    Ok(RegretReport {
        total_regret: benchmark_value - earned,
        benchmark_value,
        benchmark_strategy: bench.solution,
        per_round: None,
    })
}

struct PairObjective<'a> {
    pair: &'a OutcomePair,
    side: PairSide,
    swf: &'a SwfSpec,
}

impl Objective for PairObjective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        let s = Strategy::from_weights(p.to_vec()).expect("simplex iterate");
        pair_expected_welfare(self.pair, self.side, self.swf, &s).expect("K = 2 pair")
    }
    fn grad(&self, p: &[f64]) -> Vec<f64> {
        let s = Strategy::from_weights(p.to_vec()).expect("simplex iterate");
        let mut g = vec![0.0; s.len()];
        for (q, o) in self.pair.dist(self.side) {
            let w = *q.numer() as f64 / *q.denom() as f64;
            if w == 0.0 {
                continue;
            }
            let part = swf_supergradient(self.swf, &o.to_matrix(), &s, DEFAULT_FLOOR)
                .expect("shapes fixed");
            for (gi, pi) in g.iter_mut().zip(part) {
                *gi += w * pi;
            }
        }
        g
    }
}

/// Expected regret against one side of an outcome pair, in expectation over
/// the outcome draw each round.
pub fn pair_regret(
    traj: &Trajectory,
    pair: &OutcomePair,
    side: PairSide,
    f: &SwfSpec,
) -> Result<RegretReport> {
    let objective = PairObjective { pair, side, swf: f };
    let bench = maximize_concave_simplex(&objective, pair.arms(), BENCH_TOL, BENCH_MAX_ITERS);
    let best = objective.value(bench.solution.probs());
    let mut earned = 0.0;
    for p in &traj.strategies {
        earned += pair_expected_welfare(pair, side, f, p)?;
    }
    let t = traj.strategies.len() as f64;
    Ok(RegretReport {
        total_regret: t * best - earned,
        benchmark_value: t * best,
        benchmark_strategy: bench.solution,
        per_round: None,
    })
}

/// Regret of an episode, using the notion that matches the environment:
/// pseudo-regret on the mean for stochastic environments, expected regret
/// for outcome pairs, and realized-schedule regret otherwise.
pub fn episode_regret(cfg: &EpisodeConfig, traj: &Trajectory) -> Result<RegretReport> {
    match cfg.env.instantiate(cfg.horizon)? {
        EnvInstance::Stochastic(env) => stochastic_regret(traj, &env.mean, &cfg.swf),
        EnvInstance::Pair { pair, side } => pair_regret(traj, &pair, side, &cfg.swf),
        EnvInstance::Schedule(_) | EnvInstance::RandomSchedule { .. } | EnvInstance::Indifferent(_) => {
            adversarial_regret(traj, &traj.realized, &cfg.swf)
        }
    }
}

/// A sweep over horizons and seeds of one episode shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub learner: LearnerSpec,
    pub env: EnvSpec,
    pub swf: SwfSpec,
    pub feedback: FeedbackModel,
    pub t_grid: Vec<usize>,
    pub seeds: Vec<u64>,
}

/// One sweep cell result.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: usize,
    pub seed: u64,
    pub regret: f64,
    pub benchmark: f64,
    pub runtime_ms: u128,
}

/// Per-horizon aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct TSummary {
    pub t: usize,
    pub mean_regret: f64,
    pub stderr: f64,
}

/// Least-squares fit of `ln regret` against `ln T`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Sweep output: rows sorted by `(T, seed)` plus aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub per_t: Vec<TSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
}

/// Runs every `(T, seed)` cell, in parallel when a rayon pool provides
/// threads. Rows are sorted afterwards, so output does not depend on the
/// execution schedule.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.t_grid.is_empty() || cfg.seeds.is_empty() {
        return Err(NswError::InvalidConfig("sweep needs non-empty T grid and seeds".into()));
    }
    let cells: Vec<(usize, u64)> = cfg
        .t_grid
        .iter()
        .flat_map(|&t| cfg.seeds.iter().map(move |&s| (t, s)))
        .collect();
    let mut rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(t, seed)| -> Result<SweepRow> {
            let episode = EpisodeConfig {
                learner: cfg.learner.clone(),
                env: cfg.env.clone(),
                swf: cfg.swf.clone(),
                horizon: t,
                feedback: cfg.feedback,
                seed,
            };
            let start = Instant::now();
            let traj = run_episode(&episode)?;
            let report = episode_regret(&episode, &traj)?;
            Ok(SweepRow {
                t,
                seed,
                regret: report.total_regret,
                benchmark: report.benchmark_value,
                runtime_ms: start.elapsed().as_millis(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (a.t, a.seed).cmp(&(b.t, b.seed)));

    let mut per_t = Vec::new();
    for &t in &cfg.t_grid {
        let vals: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.regret).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n.max(1.0);
        per_t.push(TSummary { t, mean_regret: mean, stderr: (var / n).sqrt() });
    }
    per_t.sort_by_key(|s| s.t);

    let fit = fit_rate(
        &per_t.iter().map(|s| s.t as f64).collect::<Vec<_>>(),
        &per_t.iter().map(|s| s.mean_regret).collect::<Vec<_>>(),
    )
    .ok();
    Ok(SweepResult { rows, per_t, fit })
}

/// Fits `ln regret = exponent ln T + intercept` by least squares.
/// Nonpositive regret values are excluded; at least 3 points must remain.
pub fn fit_rate(t_values: &[f64], regrets: &[f64]) -> Result<RateFit> {
    if t_values.len() != regrets.len() {
        return Err(NswError::DimensionMismatch("rate fit input lengths differ".into()));
    }
    let pts: Vec<(f64, f64)> = t_values
        .iter()
        .zip(regrets)
        .filter(|&(&t, &r)| t > 0.0 && r > 0.0)
        .map(|(&t, &r)| (t.ln(), r.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(NswError::InsufficientData(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(NswError::InvalidParameter("all T values identical".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit { exponent, intercept, r_squared })
}

/// Writes the sweep rows as CSV with a fixed header and row order.
pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "T,seed,regret,benchmark,runtime_ms")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.t, r.seed, r.regret, r.benchmark, r.runtime_ms)?;
    }
    Ok(())
}

/// Writes the aggregate summary (per-T stats plus the fitted rate) as JSON.
pub fn write_summary_json(result: &SweepResult, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Summary<'a> {
        per_t: &'a [TSummary],
        #[serde(skip_serializing_if = "Option::is_none")]
        fit: &'a Option<RateFit>,
    }
    let text = serde_json::to_string_pretty(&Summary { per_t: &result.per_t, fit: &result.fit })
        .expect("summary serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::NoiseModel;
    use approx::assert_abs_diff_eq;

    fn fixed_cfg(p: Vec<f64>, mean: Vec<Vec<f64>>, horizon: usize) -> EpisodeConfig {
        let mut learner = LearnerSpec::by_kind("fixed");
        learner.p = Some(p);
        EpisodeConfig {
            learner,
            env: EnvSpec::Stochastic { mean, noise: NoiseModel::Deterministic },
            swf: SwfSpec::Nsw,
            horizon,
            feedback: FeedbackModel::Bandit,
            seed: 7,
        }
    }

    #[test]
    fn fixed_point_mass_trajectory() {
        let cfg = fixed_cfg(vec![1.0, 0.0], vec![vec![0.6, 0.2], vec![0.2, 0.6]], 20);
        let traj = run_episode(&cfg).unwrap();
        assert!(traj.actions.iter().all(|&a| a == 0));
        assert!(traj.strategies.iter().all(|p| p.probs() == [1.0, 0.0]));
    }

    #[test]
    fn episodes_are_deterministic() {
        let mut learner = LearnerSpec::by_kind("uniform");
        learner.kind = "uniform".into();
        let cfg = EpisodeConfig {
            learner,
            env: EnvSpec::Stochastic {
                mean: vec![vec![0.6, 0.2], vec![0.2, 0.6]],
                noise: NoiseModel::Bernoulli,
            },
            swf: SwfSpec::Nsw,
            horizon: 50,
            feedback: FeedbackModel::Bandit,
            seed: 3,
        };
        let a = run_episode(&cfg).unwrap();
        let b = run_episode(&cfg).unwrap();
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.per_round_welfare, b.per_round_welfare);
    }

    #[test]
    fn ucb_rejects_full_info_episode() {
        let cfg = EpisodeConfig {
            learner: LearnerSpec::by_kind("ucb"),
            env: EnvSpec::Stochastic {
                mean: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
                noise: NoiseModel::Bernoulli,
            },
            swf: SwfSpec::Nsw,
            horizon: 10,
            feedback: FeedbackModel::FullInfo,
            seed: 0,
        };
        assert!(run_episode(&cfg).is_err());
    }

    #[test]
    fn symmetric_instance_uniform_is_optimal() {
        // columns (0.6, 0.2) and (0.2, 0.6): by symmetry the NSW optimum is
        // the uniform strategy with value 0.4, so its pseudo-regret is ~0
        let cfg = fixed_cfg(vec![0.5, 0.5], vec![vec![0.6, 0.2], vec![0.2, 0.6]], 1000);
        let traj = run_episode(&cfg).unwrap();
        let mean = UtilityMatrix::from_rows(&[vec![0.6, 0.2], vec![0.2, 0.6]]).unwrap();
        let report = stochastic_regret(&traj, &mean, &SwfSpec::Nsw).unwrap();
        assert_abs_diff_eq!(report.benchmark_value, 400.0, epsilon = 1e-4);
        assert!(report.total_regret.abs() <= 1e-4 * 1000.0);
    }

    #[test]
    fn all_ones_mean_gives_zero_regret() {
        let cfg = fixed_cfg(vec![0.3, 0.7], vec![vec![1.0, 1.0], vec![1.0, 1.0]], 100);
        let traj = run_episode(&cfg).unwrap();
        let mean = UtilityMatrix::constant(2, 2, 1.0).unwrap();
        let report = stochastic_regret(&traj, &mean, &SwfSpec::Nsw).unwrap();
        assert_abs_diff_eq!(report.total_regret, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn constant_schedule_matches_stochastic() {
        let mean = vec![vec![0.7, 0.3], vec![0.1, 0.9]];
        let cfg = fixed_cfg(vec![0.4, 0.6], mean.clone(), 50);
        let traj = run_episode(&cfg).unwrap();
        let m = UtilityMatrix::from_rows(&mean).unwrap();
        let sto = stochastic_regret(&traj, &m, &SwfSpec::Nsw).unwrap();
        let adv = adversarial_regret(&traj, &traj.realized, &SwfSpec::Nsw).unwrap();
        assert!((sto.total_regret - adv.total_regret).abs() <= 1e-4);
    }

    #[test]
    fn single_round_adversarial_regret() {
        let cfg = fixed_cfg(vec![1.0, 0.0], vec![vec![0.2, 0.2], vec![0.9, 0.9]], 1);
        let traj = run_episode(&cfg).unwrap();
        let report = adversarial_regret(&traj, &traj.realized, &SwfSpec::Nsw).unwrap();
        // best fixed strategy is arm 2 (value 0.9); the learner earned 0.2
        assert_abs_diff_eq!(report.total_regret, 0.7, epsilon = 1e-4);
    }

    #[test]
    fn fit_rate_recovers_power_laws() {
        let ts: Vec<f64> = (4..10).map(|i| (1u64 << i) as f64).collect();
        for (pow, c) in [(1.0, 0.3), (0.5, 2.0), (2.0 / 3.0, 1.7)] {
            let rs: Vec<f64> = ts.iter().map(|t| c * t.powf(pow)).collect();
            let fit = fit_rate(&ts, &rs).unwrap();
            assert_abs_diff_eq!(fit.exponent, pow, epsilon = 1e-9);
            assert_abs_diff_eq!(fit.intercept, c.ln(), epsilon = 1e-9);
            assert!(fit.r_squared > 1.0 - 1e-12);
        }
    }

    #[test]
    fn fit_rate_excludes_nonpositive() {
        let ts = [16.0, 32.0, 64.0, 128.0];
        let rs = [-1.0, 2.0, 3.0, 4.0];
        let fit = fit_rate(&ts, &rs).unwrap();
        assert!(fit.exponent > 0.0);
        assert!(fit_rate(&ts[..3], &rs[..3]).is_err());
    }

    #[test]
    fn sweep_shapes_and_determinism() {
        let cfg = SweepConfig {
            learner: LearnerSpec::by_kind("uniform"),
            env: EnvSpec::Stochastic {
                mean: vec![vec![0.8, 0.2], vec![0.3, 0.9]],
                noise: NoiseModel::Bernoulli,
            },
            swf: SwfSpec::Nsw,
            feedback: FeedbackModel::Bandit,
            t_grid: vec![64, 32],
            seeds: vec![2, 1],
        };
        let a = sweep(&cfg).unwrap();
        assert_eq!(a.rows.len(), 4);
        // sorted by (T, seed)
        let keys: Vec<(usize, u64)> = a.rows.iter().map(|r| (r.t, r.seed)).collect();
        assert_eq!(keys, vec![(32, 1), (32, 2), (64, 1), (64, 2)]);
        let b = sweep(&cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.regret, y.regret);
            assert_eq!(x.benchmark, y.benchmark);
        }
    }

    #[test]
    fn uniform_learner_pair_regret_matches_closed_form() {
        let pair = crate::env::hard_adversarial_nsw_pair();
        let cfg = EpisodeConfig {
            learner: LearnerSpec::by_kind("uniform"),
            env: EnvSpec::HardPair {
                family: crate::env::PairFamily::Nsw,
                side: PairSide::A,
            },
            swf: SwfSpec::Nsw,
            horizon: 500,
            feedback: FeedbackModel::Bandit,
            seed: 5,
        };
        let traj = run_episode(&cfg).unwrap();
        let report = pair_regret(&traj, &pair, PairSide::A, &SwfSpec::Nsw).unwrap();
        // per-round gap of the uniform strategy against p* = (0.2, 0.8)
        let val = |p1: f64| 0.2 * (1.0 - p1).sqrt() + 0.1 * p1.sqrt() + 0.3;
        let gap = val(0.2) - val(0.5);
        assert_abs_diff_eq!(report.total_regret / 500.0, gap, epsilon = 1e-6);
    }
}
