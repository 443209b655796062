//! Control learners: play a fixed strategy regardless of feedback.

use crate::error::Result;
use crate::learners::{FeedbackKind, Learner, Observation};
use crate::welfare::Strategy;

/// Plays the uniform strategy every round.
#[derive(Debug, Clone)]
pub struct UniformLearner {
    strategy: Strategy,
}

impl UniformLearner {
    pub fn new(arms: usize) -> Self {
        Self { strategy: Strategy::uniform(arms) }
    }
}

impl Learner for UniformLearner {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn feedback(&self) -> FeedbackKind {
        FeedbackKind::Any
    }

    fn act(&mut self) -> Result<Strategy> {
        Ok(self.strategy.clone())
    }

    fn observe(&mut self, _obs: Observation<'_>) -> Result<()> {
        Ok(())
    }
}

/// Plays a caller-supplied strategy every round.
#[derive(Debug, Clone)]
pub struct FixedLearner {
    strategy: Strategy,
}

impl FixedLearner {
    /// Rejects non-simplex input through `Strategy::new` at construction.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Ok(Self { strategy: Strategy::new(probs)? })
    }

    pub fn from_strategy(strategy: Strategy) -> Self {
        Self { strategy }
    }
}

impl Learner for FixedLearner {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn feedback(&self) -> FeedbackKind {
        FeedbackKind::Any
    }

    fn act(&mut self) -> Result<Strategy> {
        Ok(self.strategy.clone())
    }

    fn observe(&mut self, _obs: Observation<'_>) -> Result<()> {
        Ok(())
    }
}
