//! Social welfare functions, their values on utility/strategy pairs, and
//! their supergradients with respect to the strategy.
//!
//! All functions here are pure; they can be called concurrently.

use serde::{Deserialize, Serialize};

use crate::error::{NswError, Result};

/// Tolerance used when validating that probabilities sum to one.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Per-agent expected utilities, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector(Vec<f64>);

impl UtilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(NswError::InvalidParameter("utility vector is empty".into()));
        }
        for (n, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(NswError::InvalidParameter(format!(
                    "utility {v} for agent {n} outside [0, 1]"
                )));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A `K x N` matrix of per-arm, per-agent utilities in `[0, 1]`.
///
/// Stored row-major: row `i` holds the utilities of every agent when arm `i`
/// is selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityMatrix {
    arms: usize,
    agents: usize,
    data: Vec<f64>,
}

impl UtilityMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(NswError::InvalidParameter(
                "utility matrix needs at least one arm and one agent".into(),
            ));
        }
        let agents = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * agents);
        for row in rows {
            if row.len() != agents {
                return Err(NswError::DimensionMismatch(format!(
                    "ragged utility matrix: expected {agents} agents per row"
                )));
            }
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(NswError::InvalidParameter(format!(
                        "utility entry {v} outside [0, 1]"
                    )));
                }
                data.push(v);
            }
        }
        Ok(Self { arms: rows.len(), agents, data })
    }

    pub fn from_flat(arms: usize, agents: usize, data: Vec<f64>) -> Result<Self> {
        if arms == 0 || agents == 0 || data.len() != arms * agents {
            return Err(NswError::DimensionMismatch(format!(
                "flat data of length {} does not form a {arms}x{agents} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(NswError::InvalidParameter("utility entry outside [0, 1]".into()));
        }
        Ok(Self { arms, agents, data })
    }

    pub fn constant(arms: usize, agents: usize, value: f64) -> Result<Self> {
        Self::from_flat(arms, agents, vec![value; arms * agents])
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    #[inline]
    pub fn get(&self, arm: usize, agent: usize) -> f64 {
        self.data[arm * self.agents + agent]
    }

    #[inline]
    pub fn row(&self, arm: usize) -> &[f64] {
        &self.data[arm * self.agents..(arm + 1) * self.agents]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.agents)
    }

    /// Caller guarantees `value` is in `[0, 1]`.
    pub(crate) fn set(&mut self, arm: usize, agent: usize, value: f64) {
        debug_assert!((0.0..=1.0).contains(&value));
        self.data[arm * self.agents + agent] = value;
    }

    /// `u^T p`: the expected utility of each agent under strategy `p`.
    pub fn agent_utilities(&self, p: &Strategy) -> Result<Vec<f64>> {
        if p.len() != self.arms {
            return Err(NswError::DimensionMismatch(format!(
                "strategy over {} arms applied to {} x {} matrix",
                p.len(),
                self.arms,
                self.agents
            )));
        }
        let mut mu = vec![0.0; self.agents];
        for (pi, row) in p.probs().iter().zip(self.rows()) {
            for (m, &v) in mu.iter_mut().zip(row) {
                *m += pi * v;
            }
        }
        // inner products of simplex weights with [0,1] entries; trim fp spill
        for m in &mut mu {
            *m = m.clamp(0.0, 1.0);
        }
        Ok(mu)
    }
}

/// A point of the `(K-1)`-simplex: the learner's randomized action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(NswError::InvalidParameter("strategy is empty".into()));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(NswError::InvalidParameter("strategy entries must be nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(NswError::InvalidParameter(format!(
                "strategy sums to {sum}, expected 1"
            )));
        }
        Ok(Self(probs))
    }

    /// Builds a strategy from nonnegative weights by normalizing them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(NswError::InvalidParameter("strategy is empty".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(NswError::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(NswError::InvalidParameter("weights sum to zero".into()));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        // one re-normalization pass keeps the sum within tolerance
        let s: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= s;
        }
        Self::new(probs)
    }

    pub fn uniform(arms: usize) -> Self {
        Self(vec![1.0 / arms as f64; arms])
    }

    pub fn point_mass(arms: usize, arm: usize) -> Self {
        let mut probs = vec![0.0; arms];
        probs[arm] = 1.0;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for Strategy {
    type Error = NswError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Strategy::new(v)
    }
}

impl From<Strategy> for Vec<f64> {
    fn from(s: Strategy) -> Self {
        s.0
    }
}

/// A term of a convex combination of welfare functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComboTerm {
    pub coefficient: f64,
    pub swf: SwfSpec,
}

/// Which social welfare function to apply, plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SwfSpec {
    Nsw,
    NswProd,
    Utilitarian { weights: Vec<f64> },
    Ggi { weights: Vec<f64> },
    WeightedNsw { weights: Vec<f64> },
    ConvexCombo { combo: Vec<ComboTerm> },
}

impl SwfSpec {
    /// Checks weight vectors lie on the simplex and combo coefficients sum
    /// to one. `agents` is the expected N.
    pub fn validate(&self, agents: usize) -> Result<()> {
        match self {
            SwfSpec::Nsw | SwfSpec::NswProd => Ok(()),
            SwfSpec::Utilitarian { weights }
            | SwfSpec::Ggi { weights }
            | SwfSpec::WeightedNsw { weights } => validate_simplex_weights(weights, agents),
            SwfSpec::ConvexCombo { combo } => {
                if combo.is_empty() {
                    return Err(NswError::InvalidParameter("empty convex combination".into()));
                }
                let sum: f64 = combo.iter().map(|t| t.coefficient).sum();
                if combo.iter().any(|t| t.coefficient < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(NswError::InvalidParameter(
                        "combo coefficients must be a simplex point".into(),
                    ));
                }
                for term in combo {
                    term.swf.validate(agents)?;
                }
                Ok(())
            }
        }
    }
}

fn validate_simplex_weights(weights: &[f64], agents: usize) -> Result<()> {
    if weights.len() != agents {
        return Err(NswError::DimensionMismatch(format!(
            "{} weights for {agents} agents",
            weights.len()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(NswError::InvalidParameter("weights must lie on the simplex".into()));
    }
    Ok(())
}

/// Nash social welfare: the geometric mean of the coordinates.
///
/// A zero coordinate annihilates the whole product. With a single agent this
/// reduces to that agent's utility.
pub fn nsw(mu: &UtilityVector) -> f64 {
    nsw_of(mu.values())
}

pub(crate) fn nsw_of(mu: &[f64]) -> f64 {
    let n = mu.len() as f64;
    let mut log_sum = 0.0;
    for &x in mu {
        if x <= 0.0 {
            return 0.0;
        }
        log_sum += x.ln();
    }
    (log_sum / n).exp()
}

/// Product of the coordinates (the objective of prior work).
pub fn nsw_prod(mu: &UtilityVector) -> f64 {
    mu.values().iter().product()
}

/// Evaluates the named welfare function on a vector of expected utilities.
pub fn swf_value(f: &SwfSpec, mu: &UtilityVector) -> Result<f64> {
    f.validate(mu.len())?;
    Ok(swf_value_unchecked(f, mu.values()))
}

/// Evaluates `f` on raw expected utilities, skipping weight validation.
pub(crate) fn swf_value_slice(f: &SwfSpec, mu: &[f64]) -> f64 {
    swf_value_unchecked(f, mu)
}

fn swf_value_unchecked(f: &SwfSpec, mu: &[f64]) -> f64 {
    match f {
        SwfSpec::Nsw => nsw_of(mu),
        SwfSpec::NswProd => mu.iter().product(),
        SwfSpec::Utilitarian { weights } => {
            weights.iter().zip(mu).map(|(w, x)| w * x).sum()
        }
        SwfSpec::Ggi { weights } => {
            let (w_desc, mu_asc) = ggi_sorted(weights, mu);
            w_desc.iter().zip(mu_asc.iter()).map(|(&(w, _), &(x, _))| w * x).sum()
        }
        SwfSpec::WeightedNsw { weights } => weighted_nsw_of(weights, mu),
        SwfSpec::ConvexCombo { combo } => combo
            .iter()
            .map(|t| t.coefficient * swf_value_unchecked(&t.swf, mu))
            .sum(),
    }
}

fn weighted_nsw_of(weights: &[f64], mu: &[f64]) -> f64 {
    let mut log_sum = 0.0;
    for (&w, &x) in weights.iter().zip(mu) {
        if w == 0.0 {
            continue;
        }
        if x <= 0.0 {
            return 0.0;
        }
        log_sum += w * x.ln();
    }
    log_sum.exp()
}

/// Sorts weights descending and utilities ascending, each stably by index so
/// ties resolve to the lexicographically smallest permutation. Pairing the
/// two orders attains `min_pi <w_pi, mu>`.
fn ggi_sorted(weights: &[f64], mu: &[f64]) -> (Vec<(f64, usize)>, Vec<(f64, usize)>) {
    let mut w: Vec<(f64, usize)> = weights.iter().cloned().zip(0..).collect();
    let mut m: Vec<(f64, usize)> = mu.iter().cloned().zip(0..).collect();
    w.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    m.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    (w, m)
}

/// Welfare of a strategy: `f(u^T p)`.
pub fn welfare_of_strategy(f: &SwfSpec, u: &UtilityMatrix, p: &Strategy) -> Result<f64> {
    f.validate(u.agents())?;
    let mu = u.agent_utilities(p)?;
    Ok(swf_value_unchecked(f, &mu))
}

/// Gradient of `p -> NSW(u^T p)` with denominators clamped at `floor`.
///
/// All entries are nonnegative, and away from the clamp the Euler identity
/// `<p, g> = NSW(u^T p)` holds (degree-1 homogeneity).
pub fn nsw_supergradient(u: &UtilityMatrix, p: &Strategy, floor: f64) -> Result<Vec<f64>> {
    if floor <= 0.0 {
        return Err(NswError::InvalidParameter("floor must be positive".into()));
    }
    let mu = u.agent_utilities(p)?;
    Ok(nsw_grad_from_mu(u, &mu, floor))
}

fn nsw_grad_from_mu(u: &UtilityMatrix, mu: &[f64], floor: f64) -> Vec<f64> {
    let n = u.agents();
    let inv_n = 1.0 / n as f64;
    let clamped: Vec<f64> = mu.iter().map(|&x| x.max(floor)).collect();
    let value = nsw_of(&clamped);
    // d NSW / d mu_n = NSW / (N mu_n); chain rule through u^T p
    let coef: Vec<f64> = clamped.iter().map(|&x| inv_n * value / x).collect();
    let mut g = vec![0.0; u.arms()];
    for (gi, row) in g.iter_mut().zip(u.rows()) {
        *gi = row.iter().zip(&coef).map(|(&uin, &c)| uin * c).sum();
    }
    g
}

/// A supergradient of `p -> f(u^T p)` for any supported welfare function.
///
/// For GGI the gradient of a minimizing permutation is returned (ties broken
/// by the lexicographically smallest sorting permutation). Entries are
/// nonnegative for every supported kind.
pub fn swf_supergradient(
    f: &SwfSpec,
    u: &UtilityMatrix,
    p: &Strategy,
    floor: f64,
) -> Result<Vec<f64>> {
    if floor <= 0.0 {
        return Err(NswError::InvalidParameter("floor must be positive".into()));
    }
    f.validate(u.agents())?;
    let mu = u.agent_utilities(p)?;
    Ok(swf_grad_from_mu(f, u, &mu, floor))
}

fn swf_grad_from_mu(f: &SwfSpec, u: &UtilityMatrix, mu: &[f64], floor: f64) -> Vec<f64> {
    match f {
        SwfSpec::Nsw => nsw_grad_from_mu(u, mu, floor),
        SwfSpec::NswProd => {
            // d/d mu_n of the product is the product of the others; prefix and
            // suffix products keep exact zeros exact.
            let n = mu.len();
            let mut prefix = vec![1.0; n + 1];
            for i in 0..n {
                prefix[i + 1] = prefix[i] * mu[i];
            }
            let mut suffix = vec![1.0; n + 1];
            for i in (0..n).rev() {
                suffix[i] = suffix[i + 1] * mu[i];
            }
            let coef: Vec<f64> = (0..n).map(|i| prefix[i] * suffix[i + 1]).collect();
            matvec_coef(u, &coef)
        }
        SwfSpec::Utilitarian { weights } => matvec_coef(u, weights),
        SwfSpec::Ggi { weights } => {
            let (w_desc, mu_asc) = ggi_sorted(weights, mu);
            let mut coef = vec![0.0; mu.len()];
            for (&(w, _), &(_, agent)) in w_desc.iter().zip(mu_asc.iter()) {
                coef[agent] = w;
            }
            matvec_coef(u, &coef)
        }
        SwfSpec::WeightedNsw { weights } => {
            let clamped: Vec<f64> = mu.iter().map(|&x| x.max(floor)).collect();
            let value = weighted_nsw_of(weights, &clamped);
            let coef: Vec<f64> =
                weights.iter().zip(&clamped).map(|(&w, &x)| w * value / x).collect();
            matvec_coef(u, &coef)
        }
        SwfSpec::ConvexCombo { combo } => {
            let mut g = vec![0.0; u.arms()];
            for term in combo {
                let part = swf_grad_from_mu(&term.swf, u, mu, floor);
                for (gi, pi) in g.iter_mut().zip(part) {
                    *gi += term.coefficient * pi;
                }
            }
            g
        }
    }
}

/// `u * coef`: the gradient of `p -> <coef, u^T p>`.
fn matvec_coef(u: &UtilityMatrix, coef: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; u.arms()];
    for (gi, row) in g.iter_mut().zip(u.rows()) {
        *gi = row.iter().zip(coef).map(|(&uin, &c)| uin * c).sum();
    }
    g
}
