//! Utility-matrix generators: generic stochastic and scheduled environments
//! plus the hard-instance families, with exact-rational certification of
//! their published properties.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NswError, Result};
use crate::welfare::{swf_value_slice, Strategy, SwfSpec, UtilityMatrix};

/// Noise model for a stochastic environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    Bernoulli,
    Deterministic,
}

/// An i.i.d. environment: every round draws a matrix around a fixed mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticEnv {
    pub mean: UtilityMatrix,
    pub noise: NoiseModel,
}

/// Draws one utility matrix from the environment.
pub fn stochastic_sample(env: &StochasticEnv, rng: &mut impl Rng) -> UtilityMatrix {
    match env.noise {
        NoiseModel::Deterministic => env.mean.clone(),
        NoiseModel::Bernoulli => {
            let data: Vec<f64> = env
                .mean
                .rows()
                .flatten()
                .map(|&m| if rng.gen::<f64>() < m { 1.0 } else { 0.0 })
                .collect();
            UtilityMatrix::from_flat(env.mean.arms(), env.mean.agents(), data)
                .expect("binary entries are valid utilities")
        }
    }
}

/// A fully specified sequence of utility matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialScheduleEnv {
    pub schedule: Vec<UtilityMatrix>,
}

impl AdversarialScheduleEnv {
    pub fn new(schedule: Vec<UtilityMatrix>) -> Result<Self> {
        let first = schedule
            .first()
            .ok_or_else(|| NswError::InvalidParameter("empty schedule".into()))?;
        let (k, n) = (first.arms(), first.agents());
        if schedule.iter().any(|u| u.arms() != k || u.agents() != n) {
            return Err(NswError::DimensionMismatch(
                "schedule matrices have inconsistent shapes".into(),
            ));
        }
        Ok(Self { schedule })
    }
}

/// The hard stochastic family of K single-good instances plus its gap
/// parameter epsilon.
#[derive(Debug, Clone)]
pub struct HardStochasticFamily {
    pub envs: Vec<StochasticEnv>,
    /// Gap actually used, `min(1/9, epsilon_raw)`.
    pub epsilon: f64,
    /// The uncapped formula value `(ln K)^{2N} K / ((4N)^{2N} T)`.
    pub epsilon_raw: f64,
}

/// Builds the K-environment stochastic lower-bound family for horizon `t`.
///
/// Environment `i` gives agent 1 utility `epsilon` on arm `i` and zero
/// elsewhere; agents `2..N` always receive 1. The construction needs
/// `epsilon <= 1/9`, so the formula value is capped there.
pub fn hard_stochastic_family(k: usize, n: usize, t: usize) -> Result<HardStochasticFamily> {
    if k < 2 || n < 1 || t < 1 {
        return Err(NswError::InvalidParameter(format!(
            "hard stochastic family needs K >= 2, N >= 1, T >= 1, got ({k}, {n}, {t})"
        )));
    }
    let two_n = 2 * n as i32;
    let epsilon_raw =
        (k as f64).ln().powi(two_n) * k as f64 / ((4.0 * n as f64).powi(two_n) * t as f64);
    let epsilon = epsilon_raw.min(1.0 / 9.0);
    let mut envs = Vec::with_capacity(k);
    for i in 0..k {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|arm| {
                let mut row = vec![1.0; n];
                row[0] = if arm == i { epsilon } else { 0.0 };
                row
            })
            .collect();
        envs.push(StochasticEnv {
            mean: UtilityMatrix::from_rows(&rows)?,
            noise: NoiseModel::Bernoulli,
        });
    }
    Ok(HardStochasticFamily { envs, epsilon, epsilon_raw })
}

/// A binary K x N outcome matrix, stored exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BinaryOutcome {
    arms: usize,
    agents: usize,
    bits: Vec<u8>,
}

impl BinaryOutcome {
    pub fn new(arms: usize, agents: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != arms * agents || bits.iter().any(|&b| b > 1) {
            return Err(NswError::InvalidParameter("bad binary outcome".into()));
        }
        Ok(Self { arms, agents, bits })
    }

    pub fn bit(&self, arm: usize, agent: usize) -> u8 {
        self.bits[arm * self.agents + agent]
    }

    pub fn row_bits(&self, arm: usize) -> &[u8] {
        &self.bits[arm * self.agents..(arm + 1) * self.agents]
    }

    pub fn to_matrix(&self) -> UtilityMatrix {
        UtilityMatrix::from_flat(
            self.arms,
            self.agents,
            self.bits.iter().map(|&b| b as f64).collect(),
        )
        .expect("bits are valid utilities")
    }
}

/// Which of a pair's two outcome distributions to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSide {
    A,
    B,
}

/// Where each side of a pair is provably suboptimal, as a region of `p_1`.
#[derive(Debug, Clone, PartialEq)]
pub enum GapRegion {
    /// Side A penalized on `p_1 >= theta`, side B on `p_1 < theta`.
    Threshold { theta: Rational64 },
    /// Side A penalized on `p_1 <= lo` or `p_1 >= hi`, side B strictly
    /// between.
    Band { lo: Rational64, hi: Rational64 },
}

/// Certified constants attached to a lower-bound pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMeta {
    /// Optimal strategy under side A.
    pub p_star: Strategy,
    /// Optimal strategy under side B.
    pub p_star_alt: Strategy,
    /// Published suboptimality gap.
    pub gap: Rational64,
    pub region: GapRegion,
}

/// Two finite distributions over binary utility matrices with identical
/// per-arm observation marginals but different optimal strategies.
#[derive(Debug, Clone)]
pub struct OutcomePair {
    pub dist_a: Vec<(Rational64, BinaryOutcome)>,
    pub dist_b: Vec<(Rational64, BinaryOutcome)>,
    pub meta: PairMeta,
}

impl OutcomePair {
    pub fn arms(&self) -> usize {
        self.dist_a[0].1.arms
    }

    pub fn agents(&self) -> usize {
        self.dist_a[0].1.agents
    }

    pub fn dist(&self, side: PairSide) -> &[(Rational64, BinaryOutcome)] {
        match side {
            PairSide::A => &self.dist_a,
            PairSide::B => &self.dist_b,
        }
    }

    /// Exact check that each distribution's probabilities sum to one.
    pub fn probabilities_sum_to_one(&self) -> bool {
        let one = Rational64::new(1, 1);
        let sum = |d: &[(Rational64, BinaryOutcome)]| -> Rational64 {
            d.iter().map(|(q, _)| *q).sum()
        };
        sum(&self.dist_a) == one && sum(&self.dist_b) == one
    }
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// The two-arm, two-agent lower-bound pair for NSW.
///
/// Agent 2 always receives 1; agent 1's per-arm utilities `(x, y)` are drawn
/// with probabilities `(q_00, q_01, q_10, q_11) = (4, 2, 1, 3)/10` on side A
/// and `(3, 3, 2, 2)/10` on side B.
pub fn hard_adversarial_nsw_pair() -> OutcomePair {
    let outcome = |x: u8, y: u8| BinaryOutcome::new(2, 2, vec![x, 1, y, 1]).unwrap();
    let dist = |q: [i64; 4]| -> Vec<(Rational64, BinaryOutcome)> {
        vec![
            (rat(q[0], 10), outcome(0, 0)),
            (rat(q[1], 10), outcome(0, 1)),
            (rat(q[2], 10), outcome(1, 0)),
            (rat(q[3], 10), outcome(1, 1)),
        ]
    };
    OutcomePair {
        dist_a: dist([4, 2, 1, 3]),
        dist_b: dist([3, 3, 2, 2]),
        meta: PairMeta {
            p_star: Strategy::new(vec![0.2, 0.8]).unwrap(),
            p_star_alt: Strategy::new(vec![4.0 / 13.0, 9.0 / 13.0]).unwrap(),
            gap: rat(1, 500),
            region: GapRegion::Threshold { theta: rat(33, 130) },
        },
    }
}

/// The two-arm, two-agent lower-bound pair for NSW_prod, over all 16 binary
/// matrices.
///
/// Outcome index `i` encodes the matrix bits as
/// `i = u_11 + 2 u_12 + 4 u_21 + 8 u_22` (arm-major). Both sides are uniform
/// `1/16` except side A moves the mass of outcomes 2 and 4 onto 0 and 6,
/// and side B moves the mass of 1 and 7 onto 3 and 5.
pub fn hard_adversarial_nswprod_pair() -> OutcomePair {
    let outcome = |i: usize| {
        BinaryOutcome::new(
            2,
            2,
            vec![(i & 1) as u8, ((i >> 1) & 1) as u8, ((i >> 2) & 1) as u8, ((i >> 3) & 1) as u8],
        )
        .unwrap()
    };
    let dist = |boosted: [usize; 2], zeroed: [usize; 2]| -> Vec<(Rational64, BinaryOutcome)> {
        (0..16)
            .map(|i| {
                let q = if boosted.contains(&i) {
                    rat(1, 8)
                } else if zeroed.contains(&i) {
                    rat(0, 1)
                } else {
                    rat(1, 16)
                };
                (q, outcome(i))
            })
            .collect()
    };
    OutcomePair {
        dist_a: dist([0, 6], [2, 4]),
        dist_b: dist([3, 5], [1, 7]),
        meta: PairMeta {
            p_star: Strategy::new(vec![0.5, 0.5]).unwrap(),
            p_star_alt: Strategy::new(vec![0.0, 1.0]).unwrap(),
            gap: rat(1, 256),
            region: GapRegion::Band { lo: rat(1, 4), hi: rat(3, 4) },
        },
    }
}

/// Exact-arithmetic check that both distributions induce the same marginal
/// distribution of the observed row for every arm.
pub fn verify_marginal_equivalence(pair: &OutcomePair) -> bool {
    for arm in 0..pair.arms() {
        let marginal = |d: &[(Rational64, BinaryOutcome)]| {
            let mut m: BTreeMap<Vec<u8>, Rational64> = BTreeMap::new();
            for (q, o) in d {
                *m.entry(o.row_bits(arm).to_vec()).or_insert_with(|| rat(0, 1)) += *q;
            }
            m.retain(|_, q| *q != rat(0, 1));
            m
        };
        if marginal(&pair.dist_a) != marginal(&pair.dist_b) {
            return false;
        }
    }
    true
}

/// Expected welfare `E_{u ~ dist}[f(u^T p)]` of a strategy under one side.
pub fn pair_expected_welfare(
    pair: &OutcomePair,
    side: PairSide,
    f: &SwfSpec,
    p: &Strategy,
) -> Result<f64> {
    let mut total = 0.0;
    for (q, o) in pair.dist(side) {
        if *q == rat(0, 1) {
            continue;
        }
        let mu = o.to_matrix().agent_utilities(p)?;
        total += (*q.numer() as f64 / *q.denom() as f64) * swf_value_slice(f, &mu);
    }
    Ok(total)
}

/// Minimum expected-welfare suboptimality over each side's penalized region,
/// evaluated on a `p_1` grid with the given spacing.
///
/// The returned value is the smaller of the two per-side minima; the pair is
/// certified when it is at least `meta.gap` minus the grid resolution.
pub fn verify_gap(pair: &OutcomePair, f: &SwfSpec, resolution: f64) -> Result<f64> {
    if pair.arms() != 2 {
        return Err(NswError::InvalidParameter("gap verification needs K = 2".into()));
    }
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(NswError::InvalidParameter(format!("bad resolution {resolution}")));
    }
    let to_f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
    let in_region = |side: PairSide, p1: f64| -> bool {
        match (&pair.meta.region, side) {
            (GapRegion::Threshold { theta }, PairSide::A) => p1 >= to_f(*theta),
            (GapRegion::Threshold { theta }, PairSide::B) => p1 < to_f(*theta),
            (GapRegion::Band { lo, hi }, PairSide::A) => p1 <= to_f(*lo) || p1 >= to_f(*hi),
            (GapRegion::Band { lo, hi }, PairSide::B) => p1 > to_f(*lo) && p1 < to_f(*hi),
        }
    };
    let steps = (1.0 / resolution).ceil() as usize;
    let mut min_subopt = f64::INFINITY;
    for side in [PairSide::A, PairSide::B] {
        let best_p = match side {
            PairSide::A => &pair.meta.p_star,
            PairSide::B => &pair.meta.p_star_alt,
        };
        let best = pair_expected_welfare(pair, side, f, best_p)?;
        for s in 0..=steps {
            let p1 = (s as f64 / steps as f64).min(1.0);
            if !in_region(side, p1) {
                continue;
            }
            let p = Strategy::new(vec![p1, 1.0 - p1]).unwrap();
            let subopt = best - pair_expected_welfare(pair, side, f, &p)?;
            if subopt < min_subopt {
                min_subopt = subopt;
            }
        }
    }
    Ok(min_subopt)
}

/// Draws one matrix from the chosen side by inverse CDF over the outcome
/// list (a single uniform draw).
pub fn sample_from_pair(pair: &OutcomePair, side: PairSide, rng: &mut impl Rng) -> UtilityMatrix {
    let dist = pair.dist(side);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (q, o) in dist {
        acc += *q.numer() as f64 / *q.denom() as f64;
        if u < acc {
            return o.to_matrix();
        }
    }
    dist.last().expect("nonempty distribution").1.to_matrix()
}

/// Environment where at least `indifferent` agents see a constant column
/// each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndifferentAgentEnv {
    pub arms: usize,
    pub agents: usize,
    /// Constant-column count M; the exp-concavity parameter is `M / (N - M)`.
    pub indifferent: usize,
}

impl IndifferentAgentEnv {
    pub fn new(arms: usize, agents: usize, indifferent: usize) -> Result<Self> {
        if arms == 0 || agents == 0 {
            return Err(NswError::InvalidParameter("need at least one arm and agent".into()));
        }
        if indifferent == 0 || indifferent >= agents {
            return Err(NswError::InvalidParameter(format!(
                "indifferent count {indifferent} must satisfy 1 <= M < N = {agents}"
            )));
        }
        Ok(Self { arms, agents, indifferent })
    }

    /// `alpha = M / (N - M)`, the exp-concavity constant of the per-round
    /// loss.
    pub fn alpha(&self) -> f64 {
        self.indifferent as f64 / (self.agents - self.indifferent) as f64
    }
}

/// Draws a matrix with exactly M randomly chosen constant columns. Constant
/// levels are uniform on [0.1, 1] so welfare stays bounded away from zero;
/// free columns are uniform on [0, 1] entrywise.
pub fn indifferent_sample(env: &IndifferentAgentEnv, rng: &mut impl Rng) -> UtilityMatrix {
    let mut agents: Vec<usize> = (0..env.agents).collect();
    for i in 0..env.indifferent {
        let j = rng.gen_range(i..env.agents);
        agents.swap(i, j);
    }
    let constant: Vec<bool> = {
        let mut mask = vec![false; env.agents];
        for &a in &agents[..env.indifferent] {
            mask[a] = true;
        }
        mask
    };
    let levels: Vec<f64> = (0..env.agents)
        .map(|n| if constant[n] { rng.gen_range(0.1..=1.0) } else { 0.0 })
        .collect();
    let mut data = vec![0.0; env.arms * env.agents];
    for arm in 0..env.arms {
        for agent in 0..env.agents {
            data[arm * env.agents + agent] =
                if constant[agent] { levels[agent] } else { rng.gen() };
        }
    }
    UtilityMatrix::from_flat(env.arms, env.agents, data).expect("entries in [0, 1]")
}

/// Which built-in lower-bound pair to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFamily {
    Nsw,
    NswProd,
}

impl PairFamily {
    pub fn build(self) -> OutcomePair {
        match self {
            PairFamily::Nsw => hard_adversarial_nsw_pair(),
            PairFamily::NswProd => hard_adversarial_nswprod_pair(),
        }
    }

    /// The welfare function the pair's gap certificate is stated for.
    pub fn swf(self) -> SwfSpec {
        match self {
            PairFamily::Nsw => SwfSpec::Nsw,
            PairFamily::NswProd => SwfSpec::NswProd,
        }
    }
}

/// Serializable environment description; `instantiate` turns it into a
/// runnable instance for a given horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    /// i.i.d. draws around a fixed mean matrix.
    Stochastic { mean: Vec<Vec<f64>>, noise: NoiseModel },
    /// Explicit schedule, cycled if shorter than the horizon.
    Schedule { schedule: Vec<Vec<Vec<f64>>> },
    /// Fresh uniform-random matrix every round.
    RandomSchedule { arms: usize, agents: usize },
    /// Member `index` of the hard stochastic family, sized to the horizon.
    HardStochastic { arms: usize, agents: usize, index: usize },
    /// One side of a built-in lower-bound pair.
    HardPair { family: PairFamily, side: PairSide },
    /// Indifferent-agent environment with M constant columns per round.
    Indifferent { arms: usize, agents: usize, indifferent: usize },
}

impl EnvSpec {
    pub fn instantiate(&self, horizon: usize) -> Result<EnvInstance> {
        match self {
            EnvSpec::Stochastic { mean, noise } => Ok(EnvInstance::Stochastic(StochasticEnv {
                mean: UtilityMatrix::from_rows(mean)?,
                noise: *noise,
            })),
            EnvSpec::Schedule { schedule } => {
                let mats: Result<Vec<UtilityMatrix>> =
                    schedule.iter().map(|m| UtilityMatrix::from_rows(m)).collect();
                Ok(EnvInstance::Schedule(AdversarialScheduleEnv::new(mats?)?))
            }
            EnvSpec::RandomSchedule { arms, agents } => {
                if *arms == 0 || *agents == 0 {
                    return Err(NswError::InvalidParameter(
                        "need at least one arm and agent".into(),
                    ));
                }
                Ok(EnvInstance::RandomSchedule { arms: *arms, agents: *agents })
            }
            EnvSpec::HardStochastic { arms, agents, index } => {
                let family = hard_stochastic_family(*arms, *agents, horizon)?;
                let env = family.envs.get(*index).cloned().ok_or_else(|| {
                    NswError::InvalidParameter(format!(
                        "family index {index} out of range for K = {arms}"
                    ))
                })?;
                Ok(EnvInstance::Stochastic(env))
            }
            EnvSpec::HardPair { family, side } => {
                Ok(EnvInstance::Pair { pair: family.build(), side: *side })
            }
            EnvSpec::Indifferent { arms, agents, indifferent } => Ok(EnvInstance::Indifferent(
                IndifferentAgentEnv::new(*arms, *agents, *indifferent)?,
            )),
        }
    }
}

/// A runnable environment: knows its shape and can produce the round-`t`
/// matrix.
#[derive(Debug, Clone)]
pub enum EnvInstance {
    Stochastic(StochasticEnv),
    Schedule(AdversarialScheduleEnv),
    RandomSchedule { arms: usize, agents: usize },
    Pair { pair: OutcomePair, side: PairSide },
    Indifferent(IndifferentAgentEnv),
}

impl EnvInstance {
    pub fn arms(&self) -> usize {
        match self {
            EnvInstance::Stochastic(e) => e.mean.arms(),
            EnvInstance::Schedule(e) => e.schedule[0].arms(),
            EnvInstance::RandomSchedule { arms, .. } => *arms,
            EnvInstance::Pair { pair, .. } => pair.arms(),
            EnvInstance::Indifferent(e) => e.arms,
        }
    }

    pub fn agents(&self) -> usize {
        match self {
            EnvInstance::Stochastic(e) => e.mean.agents(),
            EnvInstance::Schedule(e) => e.schedule[0].agents(),
            EnvInstance::RandomSchedule { agents, .. } => *agents,
            EnvInstance::Pair { pair, .. } => pair.agents(),
            EnvInstance::Indifferent(e) => e.agents,
        }
    }

    /// The matrix for round `t` (0-based). Scheduled environments ignore the
    /// rng; sampled ones consume it in round order.
    pub fn sample_round(&self, t: usize, rng: &mut impl Rng) -> UtilityMatrix {
        match self {
            EnvInstance::Stochastic(e) => stochastic_sample(e, rng),
            EnvInstance::Schedule(e) => e.schedule[t % e.schedule.len()].clone(),
            EnvInstance::RandomSchedule { arms, agents } => {
                let data: Vec<f64> = (0..arms * agents).map(|_| rng.gen()).collect();
                UtilityMatrix::from_flat(*arms, *agents, data).expect("uniform draws in [0, 1]")
            }
            EnvInstance::Pair { pair, side } => sample_from_pair(pair, *side, rng),
            EnvInstance::Indifferent(e) => indifferent_sample(e, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stochastic_sample_degenerate_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ones = StochasticEnv {
            mean: UtilityMatrix::constant(3, 2, 1.0).unwrap(),
            noise: NoiseModel::Bernoulli,
        };
        let zeros = StochasticEnv {
            mean: UtilityMatrix::constant(3, 2, 0.0).unwrap(),
            noise: NoiseModel::Bernoulli,
        };
        for _ in 0..10 {
            assert_eq!(stochastic_sample(&ones, &mut rng), ones.mean);
            assert_eq!(stochastic_sample(&zeros, &mut rng), zeros.mean);
        }
    }

    #[test]
    fn stochastic_sample_monte_carlo_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let env = StochasticEnv {
            mean: UtilityMatrix::constant(2, 2, 0.5).unwrap(),
            noise: NoiseModel::Bernoulli,
        };
        let draws = 100_000;
        let mut sums = [0.0; 4];
        for _ in 0..draws {
            let u = stochastic_sample(&env, &mut rng);
            for arm in 0..2 {
                for agent in 0..2 {
                    sums[arm * 2 + agent] += u.get(arm, agent);
                }
            }
        }
        for s in sums {
            assert!((s / draws as f64 - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn hard_stochastic_structure() {
        let fam = hard_stochastic_family(4, 2, 1_000_000).unwrap();
        assert_eq!(fam.envs.len(), 4);
        for (i, env) in fam.envs.iter().enumerate() {
            for arm in 0..4 {
                assert_eq!(env.mean.get(arm, 1), 1.0);
                let want = if arm == i { fam.epsilon } else { 0.0 };
                assert_eq!(env.mean.get(arm, 0), want);
            }
        }
        // (ln 4)^4 * 4 / (8^4 * 1e6)
        let expect = 4.0f64.ln().powi(4) * 4.0 / (4096.0 * 1_000_000.0);
        assert_abs_diff_eq!(fam.epsilon_raw, expect, epsilon = 1e-18);
        assert_eq!(fam.epsilon, fam.epsilon_raw);
    }

    #[test]
    fn hard_stochastic_epsilon_cap() {
        let fam = hard_stochastic_family(8, 1, 1).unwrap();
        assert!(fam.epsilon_raw > 1.0 / 9.0);
        assert_eq!(fam.epsilon, 1.0 / 9.0);
    }

    #[test]
    fn hard_stochastic_uniform_gap_identity() {
        // per-round gap of the uniform strategy is (1 - K^{-1/N}) eps^{1/N}
        let (k, n) = (4usize, 2usize);
        let fam = hard_stochastic_family(k, n, 100_000).unwrap();
        let eps = fam.epsilon;
        let env = &fam.envs[1];
        let best = crate::simplex::maximize_concave_simplex(
            &(
                |p: &[f64]| {
                    let s = Strategy::from_weights(p.to_vec()).unwrap();
                    crate::welfare::welfare_of_strategy(&SwfSpec::Nsw, &env.mean, &s).unwrap()
                },
                |p: &[f64]| {
                    let s = Strategy::from_weights(p.to_vec()).unwrap();
                    crate::welfare::nsw_supergradient(&env.mean, &s, 1e-12).unwrap()
                },
            ),
            k,
            1e-12,
            50_000,
        );
        let best_arm = best
            .solution
            .probs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(best_arm, 1);
        // optimum is the point mass on arm 1 with value eps^{1/N}
        let opt = eps.powf(1.0 / n as f64);
        let uniform_val = crate::welfare::welfare_of_strategy(
            &SwfSpec::Nsw,
            &env.mean,
            &Strategy::uniform(k),
        )
        .unwrap();
        let gap = opt - uniform_val;
        let identity = (1.0 - (k as f64).powf(-1.0 / n as f64)) * eps.powf(1.0 / n as f64);
        assert_abs_diff_eq!(gap, identity, epsilon = 1e-9);
    }

    #[test]
    fn pairs_are_exact_distributions() {
        for pair in [hard_adversarial_nsw_pair(), hard_adversarial_nswprod_pair()] {
            assert!(pair.probabilities_sum_to_one());
            assert!(verify_marginal_equivalence(&pair));
        }
    }

    #[test]
    fn nsw_pair_marginal_means() {
        // arm-1 observation mean 4/10 and arm-2 mean 5/10 on both sides
        let pair = hard_adversarial_nsw_pair();
        for side in [PairSide::A, PairSide::B] {
            let mean = |arm: usize| -> Rational64 {
                pair.dist(side)
                    .iter()
                    .map(|(q, o)| *q * Rational64::from(o.bit(arm, 0) as i64))
                    .sum()
            };
            assert_eq!(mean(0), rat(4, 10));
            assert_eq!(mean(1), rat(5, 10));
        }
    }

    #[test]
    fn perturbed_pair_fails_marginal_check() {
        let mut pair = hard_adversarial_nsw_pair();
        pair.dist_b[0].0 -= rat(1, 100);
        pair.dist_b[1].0 += rat(1, 100);
        assert!(!verify_marginal_equivalence(&pair));
    }

    #[test]
    fn nsw_pair_expected_welfare_closed_form() {
        // E_a[NSW(u^T p)] = 0.2 sqrt(p2) + 0.1 sqrt(p1) + 0.3
        let pair = hard_adversarial_nsw_pair();
        for p1 in [0.0, 0.2, 0.5, 33.0 / 130.0, 1.0] {
            let p = Strategy::new(vec![p1, 1.0 - p1]).unwrap();
            let got = pair_expected_welfare(&pair, PairSide::A, &SwfSpec::Nsw, &p).unwrap();
            let want = 0.2 * (1.0 - p1).sqrt() + 0.1 * p1.sqrt() + 0.3;
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
            let got_b = pair_expected_welfare(&pair, PairSide::B, &SwfSpec::Nsw, &p).unwrap();
            let want_b = 0.3 * (1.0 - p1).sqrt() + 0.2 * p1.sqrt() + 0.2;
            assert_abs_diff_eq!(got_b, want_b, epsilon = 1e-12);
        }
    }

    #[test]
    fn nswprod_pair_expected_welfare_closed_form() {
        // E_a[NSW_prod(u^T p)] = -(1/16)p1^2 + (1/16)p1 + 1/4
        let pair = hard_adversarial_nswprod_pair();
        for p1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let p = Strategy::new(vec![p1, 1.0 - p1]).unwrap();
            let got = pair_expected_welfare(&pair, PairSide::A, &SwfSpec::NswProd, &p).unwrap();
            let want = -(1.0 / 16.0) * p1 * p1 + (1.0 / 16.0) * p1 + 0.25;
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        // suboptimality at p1 = 1/4 is exactly 1/256
        let p = Strategy::new(vec![0.25, 0.75]).unwrap();
        let best =
            pair_expected_welfare(&pair, PairSide::A, &SwfSpec::NswProd, &pair.meta.p_star)
                .unwrap();
        let val = pair_expected_welfare(&pair, PairSide::A, &SwfSpec::NswProd, &p).unwrap();
        assert_abs_diff_eq!(best - val, 1.0 / 256.0, epsilon = 1e-12);
    }

    #[test]
    fn nswprod_gap_certified() {
        let pair = hard_adversarial_nswprod_pair();
        let min_gap = verify_gap(&pair, &SwfSpec::NswProd, 1e-4).unwrap();
        assert!(min_gap >= 1.0 / 256.0 - 1e-4, "gap {min_gap}");
    }

    #[test]
    fn nsw_gap_is_nonnegative_on_regions() {
        // the published 1/500 constant overstates the minimum near theta;
        // the honest region minimum is still strictly positive
        let pair = hard_adversarial_nsw_pair();
        let min_gap = verify_gap(&pair, &SwfSpec::Nsw, 1e-4).unwrap();
        assert!(min_gap > 0.0, "gap {min_gap}");
        assert!(min_gap < 1.0 / 500.0);
    }

    #[test]
    fn sample_from_pair_frequencies() {
        let pair = hard_adversarial_nsw_pair();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let mut row11 = 0usize;
        for _ in 0..draws {
            let u = sample_from_pair(&pair, PairSide::A, &mut rng);
            assert_eq!(u.get(0, 1), 1.0);
            assert_eq!(u.get(1, 1), 1.0);
            if u.get(0, 0) == 1.0 && u.get(1, 0) == 1.0 {
                row11 += 1;
            }
        }
        assert!((row11 as f64 / draws as f64 - 0.3).abs() < 0.01);
    }

    #[test]
    fn indifferent_sample_structure() {
        let env = IndifferentAgentEnv::new(3, 4, 2).unwrap();
        assert_abs_diff_eq!(env.alpha(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(IndifferentAgentEnv::new(2, 3, 1).unwrap().alpha(), 0.5, epsilon = 1e-15);
        assert!(IndifferentAgentEnv::new(2, 2, 2).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let u = indifferent_sample(&env, &mut rng);
            let constant_cols = (0..4)
                .filter(|&agent| {
                    let col: Vec<f64> = (0..3).map(|arm| u.get(arm, agent)).collect();
                    col.iter().all(|&v| v == col[0])
                })
                .count();
            assert!(constant_cols >= 2);
        }
    }

    #[test]
    fn env_spec_round_trips_through_json() {
        let specs = vec![
            EnvSpec::Stochastic {
                mean: vec![vec![0.5, 0.5], vec![0.2, 0.8]],
                noise: NoiseModel::Bernoulli,
            },
            EnvSpec::RandomSchedule { arms: 5, agents: 8 },
            EnvSpec::HardStochastic { arms: 4, agents: 2, index: 1 },
            EnvSpec::HardPair { family: PairFamily::Nsw, side: PairSide::A },
            EnvSpec::Indifferent { arms: 3, agents: 4, indifferent: 2 },
        ];
        for spec in specs {
            let text = serde_json::to_string(&spec).unwrap();
            let back: EnvSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
            let inst = spec.instantiate(1024).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let u = inst.sample_round(0, &mut rng);
            assert_eq!(u.arms(), inst.arms());
            assert_eq!(u.agents(), inst.agents());
        }
    }

    #[test]
    fn env_spec_rejects_unknown_keys() {
        let text = r#"{"kind": "random_schedule", "arms": 2, "agents": 2, "bogus": 1}"#;
        assert!(serde_json::from_str::<EnvSpec>(text).is_err());
    }
}
