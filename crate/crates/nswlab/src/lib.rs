//! Simulation library for online multi-agent social welfare maximization.
//!
//! The crate is organized around a small set of building blocks:
//!
//! * [`welfare`] — social welfare functions (Nash social welfare and friends),
//!   their values on utility/strategy pairs, and their supergradients.
//! * [`simplex`] — solvers over the probability simplex: closed-form / dual
//!   root-finding FTRL steps for several regularizers and a Frank-Wolfe
//!   maximizer for general concave objectives.
//! * [`learners`] — the learning algorithms (UCB with Bernstein widths, FTRL
//!   with log-barrier / Tsallis / Shannon regularizers, EWOO, baselines),
//!   each behind the [`learners::Learner`] trait and buildable by name from
//!   a [`learners::LearnerSpec`].
//! * [`env`] — utility-matrix generators, including the hard-instance
//!   families with exact-rational certification of their properties.
//! * [`harness`] — episode execution, regret computation, multi-seed sweeps,
//!   and empirical rate fitting.

pub mod env;
pub mod error;
pub mod harness;
pub mod learners;
pub mod simplex;
pub mod welfare;

pub use error::NswError;

/// Default denominator guard used when evaluating welfare gradients near the
/// boundary of the simplex.
pub const DEFAULT_FLOOR: f64 = 1e-12;
