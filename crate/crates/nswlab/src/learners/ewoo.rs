//! Exponentially weighted online optimization for exp-concave welfare
//! losses.
//!
//! The prediction is the weighted average of fixed sample points under
//! `exp(alpha * cumulative welfare)`. Cumulative welfare per point is kept
//! incrementally, so each round costs one pass over the point set.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{NswError, Result};
use crate::learners::{FeedbackKind, Learner, Observation};
use crate::welfare::{swf_value_slice, Strategy, SwfSpec};
#[cfg(test)]
use crate::welfare::UtilityMatrix;

/// Default Monte-Carlo sample count.
pub const DEFAULT_MC_SAMPLES: usize = 20_000;
/// Default grid spacing used for small K.
pub const DEFAULT_GRID_RESOLUTION: f64 = 1.0 / 64.0;

#[derive(Debug, Clone)]
pub struct EwooLearner {
    alpha: f64,
    arms: usize,
    agents: usize,
    swf: SwfSpec,
    points: Vec<Vec<f64>>,
    /// Per point, the accumulated welfare of the observed rounds.
    cum_welfare: Vec<f64>,
    rounds: usize,
}

impl EwooLearner {
    /// `alpha = M / (N - M)` for M indifferent agents out of N.
    pub fn alpha_from_indifferent(agents: usize, indifferent: usize) -> Result<f64> {
        if indifferent == 0 || indifferent >= agents {
            return Err(NswError::InvalidParameter(format!(
                "alpha undefined for M = {indifferent}, N = {agents}"
            )));
        }
        Ok(indifferent as f64 / (agents - indifferent) as f64)
    }

    /// Monte-Carlo variant: `samples` points drawn uniformly on the simplex
    /// from the given seed.
    pub fn new_mc(
        arms: usize,
        agents: usize,
        alpha: f64,
        swf: SwfSpec,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(NswError::InvalidParameter("need at least one sample".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..samples)
            .map(|_| {
                // exponential spacings normalize to a uniform simplex draw
                let e: Vec<f64> = (0..arms).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                let sum: f64 = e.iter().sum();
                e.into_iter().map(|x| x / sum).collect()
            })
            .collect();
        Self::from_points(arms, agents, alpha, swf, points)
    }

    /// Grid variant: all simplex points with coordinates on a uniform grid
    /// of the given spacing. Deterministic; intended for small K.
    pub fn new_grid(
        arms: usize,
        agents: usize,
        alpha: f64,
        swf: SwfSpec,
        resolution: f64,
    ) -> Result<Self> {
        if !(resolution > 0.0 && resolution <= 1.0) {
            return Err(NswError::InvalidParameter(format!("bad resolution {resolution}")));
        }
        let steps = (1.0 / resolution).round().max(1.0) as u64;
        let mut points = Vec::new();
        let mut counts = vec![0u64; arms];
        push_compositions(steps, arms, 0, &mut counts, &mut |c| {
            points.push(c.iter().map(|&x| x as f64 / steps as f64).collect());
        });
        Self::from_points(arms, agents, alpha, swf, points)
    }

    fn from_points(
        arms: usize,
        agents: usize,
        alpha: f64,
        swf: SwfSpec,
        points: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if arms == 0 || agents == 0 {
            return Err(NswError::InvalidParameter("ewoo needs K, N at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(NswError::InvalidParameter(format!("alpha {alpha} must be positive")));
        }
        swf.validate(agents)?;
        let n_points = points.len();
        Ok(Self { alpha, arms, agents, swf, points, cum_welfare: vec![0.0; n_points], rounds: 0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn completed_rounds(&self) -> usize {
        self.rounds
    }
}

fn push_compositions(
    remaining: u64,
    arms: usize,
    index: usize,
    counts: &mut Vec<u64>,
    visit: &mut impl FnMut(&[u64]),
) {
    if index == arms - 1 {
        counts[index] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[index] = c;
        push_compositions(remaining - c, arms, index + 1, counts, visit);
    }
}

impl Learner for EwooLearner {
    fn name(&self) -> &'static str {
        "ewoo"
    }

    fn feedback(&self) -> FeedbackKind {
        FeedbackKind::FullInfo
    }

    fn act(&mut self) -> Result<Strategy> {
        let max = self.cum_welfare.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut mean = vec![0.0; self.arms];
        for (point, &cw) in self.points.iter().zip(&self.cum_welfare) {
            let w = (self.alpha * (cw - max)).exp();
            total += w;
            for (m, &x) in mean.iter_mut().zip(point) {
                *m += w * x;
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        Strategy::from_weights(mean)
    }

    fn observe(&mut self, obs: Observation<'_>) -> Result<()> {
        let u = match obs {
            Observation::Full(u) => u,
            Observation::Arm { .. } => {
                return Err(NswError::InvalidConfig(
                    "ewoo needs full-information feedback".into(),
                ))
            }
        };
        if u.arms() != self.arms || u.agents() != self.agents {
            return Err(NswError::DimensionMismatch(format!(
                "{}x{} matrix fed to a {}-arm {}-agent ewoo learner",
                u.arms(),
                u.agents(),
                self.arms,
                self.agents
            )));
        }
        let mut mu = vec![0.0; self.agents];
        for (point, cw) in self.points.iter().zip(&mut self.cum_welfare) {
            for m in &mut mu {
                *m = 0.0;
            }
            for (&pi, row) in point.iter().zip(u.rows()) {
                for (m, &v) in mu.iter_mut().zip(row) {
                    *m += pi * v;
                }
            }
            *cw += swf_value_slice(&self.swf, &mu);
        }
        self.rounds += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn alpha_construction() {
        assert_abs_diff_eq!(EwooLearner::alpha_from_indifferent(4, 2).unwrap(), 1.0);
        assert_abs_diff_eq!(EwooLearner::alpha_from_indifferent(3, 1).unwrap(), 0.5);
        assert!(EwooLearner::alpha_from_indifferent(2, 2).is_err());
    }

    #[test]
    fn empty_history_mc_is_near_uniform() {
        let samples = 20_000;
        let mut l = EwooLearner::new_mc(3, 2, 1.0, SwfSpec::Nsw, samples, 42).unwrap();
        let p = l.act().unwrap();
        let tol = 3.0 / (samples as f64).sqrt();
        for &pi in p.probs() {
            assert!((pi - 1.0 / 3.0).abs() <= tol, "coordinate {pi}");
        }
    }

    #[test]
    fn constant_welfare_keeps_uniform() {
        let mut l = EwooLearner::new_grid(2, 2, 1.0, SwfSpec::Nsw, 0.01).unwrap();
        let before = l.act().unwrap();
        let u = UtilityMatrix::constant(2, 2, 1.0).unwrap();
        for _ in 0..5 {
            l.observe(Observation::Full(&u)).unwrap();
        }
        let after = l.act().unwrap();
        for (a, b) in before.probs().iter().zip(after.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_dense_quadrature_after_one_round() {
        // K=2: the integrand is one-dimensional and can be integrated
        // directly on a dense grid
        let u = UtilityMatrix::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        let alpha = 1.0;
        let welfare = |p1: f64| {
            let mu1 = 0.9 * p1 + 0.1 * (1.0 - p1);
            let mu2 = 0.2 * p1 + 0.8 * (1.0 - p1);
            (mu1 * mu2).sqrt()
        };
        let n = 1_000_000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let p1 = i as f64 / n as f64;
            let w = (alpha * welfare(p1)).exp();
            num += w * p1;
            den += w;
        }
        let expect = num / den;

        let mut l = EwooLearner::new_grid(2, 2, alpha, SwfSpec::Nsw, 1e-4).unwrap();
        l.observe(Observation::Full(&u)).unwrap();
        let p = l.act().unwrap();
        assert!((p.probs()[0] - expect).abs() <= 1e-2, "{} vs {expect}", p.probs()[0]);
    }

    #[test]
    fn history_counter_increments() {
        let mut l = EwooLearner::new_grid(2, 2, 1.0, SwfSpec::Nsw, 0.1).unwrap();
        let u = UtilityMatrix::constant(2, 2, 0.5).unwrap();
        assert_eq!(l.completed_rounds(), 0);
        l.observe(Observation::Full(&u)).unwrap();
        assert_eq!(l.completed_rounds(), 1);
    }

    #[test]
    fn rejects_bandit_feedback() {
        let mut l = EwooLearner::new_grid(2, 2, 1.0, SwfSpec::Nsw, 0.1).unwrap();
        assert!(l.observe(Observation::Arm { arm: 0, utilities: &[0.5, 0.5] }).is_err());
    }
}
