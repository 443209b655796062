//! Optimistic bandit learner with Bernstein-style confidence widths.
//!
//! Runs a deterministic warm-up that pulls every arm `N0` times, then plays
//! the welfare-optimal strategy against the optimistic utility matrix.

use crate::error::{NswError, Result};
use crate::learners::{FeedbackKind, Learner, Observation};
use crate::simplex::{maximize_concave_simplex_from, Objective};
use crate::welfare::{swf_value_slice, swf_supergradient, Strategy, SwfSpec, UtilityMatrix};
use crate::DEFAULT_FLOOR;

/// Inner argmax settings; the warm start keeps the per-round cost low.
const INNER_TOL: f64 = 1e-6;
const INNER_MAX_ITERS: usize = 20;

#[derive(Debug, Clone)]
pub struct UcbLearner {
    arms: usize,
    agents: usize,
    horizon: usize,
    n0: usize,
    /// `ln(N K T^2)`, the width scale of the confidence bound.
    confidence_log: f64,
    pull_counts: Vec<usize>,
    reward_sums: Vec<f64>,
    optimistic: UtilityMatrix,
    /// Completed rounds.
    round: usize,
    swf: SwfSpec,
    inner_start: Strategy,
}

impl UcbLearner {
    pub fn new(arms: usize, agents: usize, horizon: usize, swf: SwfSpec) -> Result<Self> {
        if arms == 0 || agents == 0 || horizon == 0 {
            return Err(NswError::InvalidParameter(
                "ucb needs K, N, T all at least 1".into(),
            ));
        }
        swf.validate(agents)?;
        let kt = arms as f64 * horizon as f64;
        let n0 = (1.0 + 18.0 * kt.ln()).ceil() as usize;
        let confidence_log =
            (agents as f64 * arms as f64 * (horizon as f64).powi(2)).ln();
        Ok(Self {
            arms,
            agents,
            horizon,
            n0,
            confidence_log,
            pull_counts: vec![0; arms],
            reward_sums: vec![0.0; arms * agents],
            optimistic: UtilityMatrix::constant(arms, agents, 1.0)?,
            round: 0,
            swf,
            inner_start: Strategy::uniform(arms),
        })
    }

    /// Warm-up pulls per arm, `ceil(1 + 18 ln(KT))`.
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn confidence_log(&self) -> f64 {
        self.confidence_log
    }

    pub fn pull_counts(&self) -> &[usize] {
        &self.pull_counts
    }

    pub fn optimistic(&self) -> &UtilityMatrix {
        &self.optimistic
    }

    pub fn completed_rounds(&self) -> usize {
        self.round
    }
}

struct OptimisticObjective<'a> {
    u: &'a UtilityMatrix,
    swf: &'a SwfSpec,
}

impl Objective for OptimisticObjective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        let mut mu = vec![0.0; self.u.agents()];
        for (&pi, row) in p.iter().zip(self.u.rows()) {
            for (m, &v) in mu.iter_mut().zip(row) {
                *m += pi * v;
            }
        }
        for m in &mut mu {
            *m = m.clamp(0.0, 1.0);
        }
        swf_value_slice(self.swf, &mu)
    }

    fn grad(&self, p: &[f64]) -> Vec<f64> {
        let s = Strategy::from_weights(p.to_vec()).expect("iterate stays on the simplex");
        swf_supergradient(self.swf, self.u, &s, DEFAULT_FLOOR)
            .expect("dimensions fixed at construction")
    }
}

impl Learner for UcbLearner {
    fn name(&self) -> &'static str {
        "ucb"
    }

    fn feedback(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self) -> Result<Strategy> {
        let t = self.round + 1;
        if t <= self.arms * self.n0 {
            // forced exploration: arm ceil(t / N0), 1-based
            return Ok(Strategy::point_mass(self.arms, (t - 1) / self.n0));
        }
        let objective = OptimisticObjective { u: &self.optimistic, swf: &self.swf };
        let report = maximize_concave_simplex_from(
            &objective,
            &self.inner_start,
            INNER_TOL,
            INNER_MAX_ITERS,
        );
        self.inner_start = report.solution.clone();
        Ok(report.solution)
    }

    fn observe(&mut self, obs: Observation<'_>) -> Result<()> {
        let (arm, utilities) = match obs {
            Observation::Arm { arm, utilities } => (arm, utilities),
            Observation::Full(_) => {
                return Err(NswError::InvalidConfig(
                    "ucb is defined for bandit feedback only".into(),
                ))
            }
        };
        if arm >= self.arms || utilities.len() != self.agents {
            return Err(NswError::DimensionMismatch(format!(
                "observation for arm {arm} with {} agents",
                utilities.len()
            )));
        }
        if self.round >= self.horizon {
            return Err(NswError::InvalidParameter("horizon exhausted".into()));
        }
        self.pull_counts[arm] += 1;
        let count = self.pull_counts[arm] as f64;
        let l = self.confidence_log;
        for (agent, &v) in utilities.iter().enumerate() {
            let sum = &mut self.reward_sums[arm * self.agents + agent];
            *sum += v;
            let mean = *sum / count;
            let width = 4.0 * (mean * l / count).sqrt() + 8.0 * l / count;
            self.optimistic.set(arm, agent, (mean + width).min(1.0));
        }
        self.round += 1;
        Ok(())
    }
}
