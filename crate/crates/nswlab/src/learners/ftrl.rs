//! Follow-the-regularized-leader over the simplex under full information.
//!
//! Each round plays the minimizer of the accumulated negated welfare
//! supergradients plus the scaled regularizer; the supergradient at the
//! played strategy is then added to the accumulator.

use crate::error::{NswError, Result};
use crate::learners::{FeedbackKind, Learner, Observation};
use crate::simplex::{ftrl_step, RegularizerKind, RegularizerSpec};
use crate::welfare::{swf_supergradient, Strategy, SwfSpec};
#[cfg(test)]
use crate::welfare::UtilityMatrix;
use crate::DEFAULT_FLOOR;

#[derive(Debug, Clone)]
pub struct FtrlLearner {
    name: &'static str,
    reg: RegularizerSpec,
    swf: SwfSpec,
    cumulative_grad: Vec<f64>,
    last_strategy: Strategy,
    agents: usize,
    round: usize,
    /// The played strategy is cached between act and observe; observing
    /// before acting reuses the previous round's strategy.
    acted: bool,
}

impl FtrlLearner {
    pub fn new(
        name: &'static str,
        arms: usize,
        agents: usize,
        reg: RegularizerSpec,
        swf: SwfSpec,
    ) -> Result<Self> {
        if arms == 0 || agents == 0 {
            return Err(NswError::InvalidParameter("ftrl needs K, N at least 1".into()));
        }
        reg.validate()?;
        swf.validate(agents)?;
        Ok(Self {
            name,
            reg,
            swf,
            cumulative_grad: vec![0.0; arms],
            last_strategy: Strategy::uniform(arms),
            agents,
            round: 0,
            acted: false,
        })
    }

    /// The learning-rate choices balancing regularizer penalty against
    /// stability for each regularizer family.
    pub fn default_eta(kind: RegularizerKind, arms: usize, agents: usize, horizon: usize) -> f64 {
        let k = arms as f64;
        let n = agents as f64;
        let t = horizon as f64;
        match kind {
            RegularizerKind::LogBarrier => (k * t.ln().max(1.0) / t).sqrt(),
            RegularizerKind::Shannon => (k.ln().max(1.0) / t).sqrt(),
            RegularizerKind::Tsallis => {
                let beta = 2.0 / n;
                (k.powf(1.0 - beta) / (n * t)).sqrt()
            }
        }
    }

    pub fn regularizer(&self) -> &RegularizerSpec {
        &self.reg
    }

    pub fn cumulative_grad(&self) -> &[f64] {
        &self.cumulative_grad
    }

    pub fn completed_rounds(&self) -> usize {
        self.round
    }
}

impl Learner for FtrlLearner {
    fn name(&self) -> &'static str {
        self.name
    }

    fn feedback(&self) -> FeedbackKind {
        FeedbackKind::FullInfo
    }

    fn act(&mut self) -> Result<Strategy> {
        let report = ftrl_step(&self.cumulative_grad, &self.reg)?;
        self.last_strategy = report.solution.clone();
        self.acted = true;
        Ok(report.solution)
    }

    fn observe(&mut self, obs: Observation<'_>) -> Result<()> {
        let u = match obs {
            Observation::Full(u) => u,
            Observation::Arm { .. } => {
                return Err(NswError::InvalidConfig(
                    "ftrl needs full-information feedback".into(),
                ))
            }
        };
        if u.arms() != self.cumulative_grad.len() || u.agents() != self.agents {
            return Err(NswError::DimensionMismatch(format!(
                "{}x{} matrix fed to a {}-arm {}-agent ftrl learner",
                u.arms(),
                u.agents(),
                self.cumulative_grad.len(),
                self.agents
            )));
        }
        let g = swf_supergradient(&self.swf, u, &self.last_strategy, DEFAULT_FLOOR)?;
        for (acc, gi) in self.cumulative_grad.iter_mut().zip(g) {
            *acc += gi;
        }
        self.round += 1;
        self.acted = false;
        Ok(())
    }
}
