//! By-name construction of learners from a serializable spec.

use serde::{Deserialize, Serialize};

use crate::error::{NswError, Result};
use crate::learners::{
    EwooLearner, FixedLearner, FtrlLearner, Learner, UcbLearner, UniformLearner,
};
use crate::simplex::{RegularizerKind, RegularizerSpec};
use crate::welfare::SwfSpec;

/// The algorithm names accepted by [`LearnerSpec::build`].
pub fn known_kinds() -> &'static [&'static str] {
    &["ucb", "ftrl-log-barrier", "ftrl-tsallis", "ftrl-shannon", "ewoo", "uniform", "fixed"]
}

/// Serializable learner selection plus optional hyperparameters. Fields not
/// used by the chosen kind are rejected at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: String,
    /// FTRL learning rate; defaults to the kind's horizon-tuned choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Tsallis exponent; defaults to 2/N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// EWOO exp-concavity constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Indifferent-agent count; sets alpha = M/(N-M) when alpha is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// EWOO Monte-Carlo sample count; selects the sampled integrator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    /// EWOO grid spacing; selects the deterministic grid integrator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<f64>,
    /// Strategy for the fixed baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

impl LearnerSpec {
    pub fn by_kind(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            eta: None,
            beta: None,
            alpha: None,
            m: None,
            mc_samples: None,
            grid_resolution: None,
            p: None,
        }
    }

    /// Instantiates the learner for a K-arm, N-agent problem of horizon T.
    /// `seed` only affects the EWOO Monte-Carlo point set.
    pub fn build(
        &self,
        arms: usize,
        agents: usize,
        horizon: usize,
        swf: &SwfSpec,
        seed: u64,
    ) -> Result<Box<dyn Learner>> {
        match self.kind.as_str() {
            "ucb" => Ok(Box::new(UcbLearner::new(arms, agents, horizon, swf.clone())?)),
            "ftrl-log-barrier" => {
                let eta = self.eta.unwrap_or_else(|| {
                    FtrlLearner::default_eta(RegularizerKind::LogBarrier, arms, agents, horizon)
                });
                Ok(Box::new(FtrlLearner::new(
                    "ftrl-log-barrier",
                    arms,
                    agents,
                    RegularizerSpec::log_barrier(eta),
                    swf.clone(),
                )?))
            }
            "ftrl-shannon" => {
                let eta = self.eta.unwrap_or_else(|| {
                    FtrlLearner::default_eta(RegularizerKind::Shannon, arms, agents, horizon)
                });
                Ok(Box::new(FtrlLearner::new(
                    "ftrl-shannon",
                    arms,
                    agents,
                    RegularizerSpec::shannon(eta),
                    swf.clone(),
                )?))
            }
            "ftrl-tsallis" => {
                let beta = self.beta.unwrap_or(2.0 / agents as f64);
                // beta = 1 is exactly the Shannon limit of the regularizer,
                // so the two-agent default dispatches to the softmax form
                let reg = if beta >= 1.0 {
                    let eta = self.eta.unwrap_or_else(|| {
                        FtrlLearner::default_eta(RegularizerKind::Shannon, arms, agents, horizon)
                    });
                    RegularizerSpec::shannon(eta)
                } else {
                    let eta = self.eta.unwrap_or_else(|| {
                        ((arms as f64).powf(1.0 - beta)
                            / (agents as f64 * horizon as f64))
                            .sqrt()
                    });
                    RegularizerSpec::tsallis(beta, eta)
                };
                Ok(Box::new(FtrlLearner::new(
                    "ftrl-tsallis",
                    arms,
                    agents,
                    reg,
                    swf.clone(),
                )?))
            }
            "ewoo" => {
                let alpha = match (self.alpha, self.m) {
                    (Some(a), _) => a,
                    (None, Some(m)) => EwooLearner::alpha_from_indifferent(agents, m)?,
                    (None, None) => {
                        return Err(NswError::InvalidConfig(
                            "ewoo needs either alpha or m".into(),
                        ))
                    }
                };
                match (self.mc_samples, self.grid_resolution) {
                    (Some(_), Some(_)) => Err(NswError::InvalidConfig(
                        "set at most one of mc_samples and grid_resolution".into(),
                    )),
                    (Some(s), None) => Ok(Box::new(EwooLearner::new_mc(
                        arms,
                        agents,
                        alpha,
                        swf.clone(),
                        s,
                        seed,
                    )?)),
                    (None, Some(r)) => {
                        Ok(Box::new(EwooLearner::new_grid(arms, agents, alpha, swf.clone(), r)?))
                    }
                    (None, None) => {
                        if arms <= 3 {
                            Ok(Box::new(EwooLearner::new_grid(
                                arms,
                                agents,
                                alpha,
                                swf.clone(),
                                crate::learners::ewoo::DEFAULT_GRID_RESOLUTION,
                            )?))
                        } else {
                            Ok(Box::new(EwooLearner::new_mc(
                                arms,
                                agents,
                                alpha,
                                swf.clone(),
                                crate::learners::ewoo::DEFAULT_MC_SAMPLES,
                                seed,
                            )?))
                        }
                    }
                }
            }
            "uniform" => Ok(Box::new(UniformLearner::new(arms))),
            "fixed" => {
                let p = self.p.clone().ok_or_else(|| {
                    NswError::InvalidConfig("fixed learner needs a strategy p".into())
                })?;
                Ok(Box::new(FixedLearner::new(p)?))
            }
            other => Err(NswError::InvalidConfig(format!(
                "unknown learner kind '{other}'; known kinds: {}",
                known_kinds().join(", ")
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_known_kind() {
        for &kind in known_kinds() {
            let mut spec = LearnerSpec::by_kind(kind);
            if kind == "ewoo" {
                spec.m = Some(2);
            }
            if kind == "fixed" {
                spec.p = Some(vec![0.5, 0.5]);
            }
            let learner = spec.build(2, 4, 128, &SwfSpec::Nsw, 1).unwrap();
            assert_eq!(learner.name(), kind);
        }
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let spec = LearnerSpec::by_kind("epsilon-greedy");
        assert!(spec.build(2, 2, 16, &SwfSpec::Nsw, 0).is_err());
    }

    #[test]
    fn json_round_trip_rejects_unknown_keys() {
        let spec: LearnerSpec =
            serde_json::from_str(r#"{"kind": "ftrl-tsallis", "beta": 0.25}"#).unwrap();
        assert_eq!(spec.beta, Some(0.25));
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"kind": "ucb", "gamma": 1}"#).is_err());
    }

    #[test]
    fn two_agent_tsallis_default_is_shannon() {
        let spec = LearnerSpec::by_kind("ftrl-tsallis");
        let learner = spec.build(3, 2, 256, &SwfSpec::Nsw, 0).unwrap();
        assert_eq!(learner.name(), "ftrl-tsallis");
        // beta = 2/N = 1 dispatches to the Shannon regularizer, matching the
        // explicit softmax learner's default eta
        let shannon = LearnerSpec::by_kind("ftrl-shannon");
        let _ = shannon.build(3, 2, 256, &SwfSpec::Nsw, 0).unwrap();
    }
}
