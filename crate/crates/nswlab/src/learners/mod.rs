//! The learning algorithms, each a state machine behind the [`Learner`]
//! trait, plus a by-name registry for runtime selection.

mod baseline;
mod ewoo;
mod ftrl;
mod registry;
mod ucb;

pub use baseline::{FixedLearner, UniformLearner};
pub use ewoo::EwooLearner;
pub use ftrl::FtrlLearner;
pub use registry::{known_kinds, LearnerSpec};
pub use ucb::UcbLearner;

use crate::error::Result;
use crate::welfare::{Strategy, UtilityMatrix};

/// What the environment reveals to the learner after each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    /// The whole utility matrix is observed.
    FullInfo,
    /// Only the pulled arm's row is observed.
    Bandit,
    /// The learner ignores feedback and runs under either model.
    Any,
}

/// One round of feedback.
#[derive(Debug, Clone, Copy)]
pub enum Observation<'a> {
    /// Bandit feedback: the pulled arm and its per-agent utilities.
    Arm { arm: usize, utilities: &'a [f64] },
    /// Full-information feedback.
    Full(&'a UtilityMatrix),
}

/// A sequential decision maker over K arms.
///
/// The harness alternates `act` and `observe`; a learner sees exactly one
/// observation per strategy it emits. Implementations are deterministic
/// given their construction arguments and observation sequence.
pub trait Learner {
    /// Registry name of the algorithm.
    fn name(&self) -> &'static str;

    /// The feedback model this learner is defined for.
    fn feedback(&self) -> FeedbackKind;

    /// The strategy for the current round.
    fn act(&mut self) -> Result<Strategy>;

    /// Consumes the feedback for the round the last `act` was played in.
    fn observe(&mut self, obs: Observation<'_>) -> Result<()>;
}
