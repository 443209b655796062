//! Constrained solvers over the probability simplex.
//!
//! Two workhorses live here: [`ftrl_step`], the per-round argmin of a
//! follow-the-regularized-leader iteration for each supported regularizer,
//! and [`maximize_concave_simplex`], a Frank-Wolfe maximizer for general
//! concave objectives used by UCB's inner argmax and by regret benchmarks.

use serde::{Deserialize, Serialize};

use crate::error::{NswError, Result};
use crate::welfare::Strategy;

/// Regularizer family for FTRL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    /// `psi(p) = -sum_i log p_i`; keeps iterates strictly interior.
    LogBarrier,
    /// `psi(p) = (1 - sum_i p_i^beta) / (1 - beta)` with `beta` in (0, 1).
    Tsallis,
    /// `psi(p) = sum_i p_i log p_i`; the `beta -> 1` limit of Tsallis.
    Shannon,
}

/// A regularizer plus its learning rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    /// Tsallis exponent; ignored for the other kinds.
    pub beta: f64,
    /// Learning rate, must be positive.
    pub eta: f64,
}

impl RegularizerSpec {
    pub fn log_barrier(eta: f64) -> Self {
        Self { kind: RegularizerKind::LogBarrier, beta: 0.0, eta }
    }

    pub fn tsallis(beta: f64, eta: f64) -> Self {
        Self { kind: RegularizerKind::Tsallis, beta, eta }
    }

    pub fn shannon(eta: f64) -> Self {
        Self { kind: RegularizerKind::Shannon, beta: 1.0, eta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(NswError::InvalidParameter(format!("eta {} must be positive", self.eta)));
        }
        if self.kind == RegularizerKind::Tsallis && !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(NswError::InvalidParameter(format!(
                "tsallis beta {} must lie in (0, 1)",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Outcome of a simplex solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Strategy,
    pub kkt_residual: f64,
    pub iterations: usize,
}

const BISECT_ITERS: usize = 200;
const FTRL_RESIDUAL_TOL: f64 = 1e-10;

/// `argmin_{p in simplex} <p, -G> + psi(p)/eta` for cumulative gain `G`.
///
/// Solved through the stationarity system: each coordinate is the inverse of
/// the regularizer gradient at `lambda - G_i`, with the scalar dual `lambda`
/// found by bisection on the monotone constraint `sum_i p_i(lambda) = 1`.
/// Shannon admits the softmax closed form and skips the root-finding.
pub fn ftrl_step(cumulative_gain: &[f64], reg: &RegularizerSpec) -> Result<SolveReport> {
    reg.validate()?;
    let g = cumulative_gain;
    if g.is_empty() {
        return Err(NswError::InvalidParameter("empty gain vector".into()));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(NswError::InvalidParameter("non-finite gain entry".into()));
    }
    let k = g.len();
    let g_max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    match reg.kind {
        RegularizerKind::Shannon => {
            // p_i proportional to exp(eta * G_i), shifted by the max for stability
            let mut p: Vec<f64> = g.iter().map(|&x| (reg.eta * (x - g_max)).exp()).collect();
            let sum: f64 = p.iter().sum();
            for x in &mut p {
                *x = (*x / sum).max(f64::MIN_POSITIVE);
            }
            let solution = Strategy::from_weights(p)?;
            Ok(SolveReport { solution, kkt_residual: 0.0, iterations: 1 })
        }
        RegularizerKind::LogBarrier => {
            // p_i(lambda) = 1 / (eta (lambda - G_i)), decreasing in lambda.
            // sum >= 1 at lambda = G_max + 1/(eta K), sum <= 1 at G_max + K/eta.
            let c = 1.0 / reg.eta;
            let coord = |lambda: f64, gi: f64| c / (lambda - gi);
            solve_dual(g, g_max + c / k as f64, g_max + c * k as f64, coord, reg)
        }
        RegularizerKind::Tsallis => {
            // p_i(lambda) = (c / (lambda - G_i))^(1/(1-beta)) with
            // c = beta / (eta (1-beta)); bracketed so the largest coordinate
            // moves from 1 down to 1/K.
            let beta = reg.beta;
            let c = beta / (reg.eta * (1.0 - beta));
            let expo = 1.0 / (1.0 - beta);
            let coord = move |lambda: f64, gi: f64| {
                // log-domain power avoids overflow for beta near 1
                (expo * (c.ln() - (lambda - gi).ln())).exp()
            };
            let hi = g_max + c * (k as f64).powf(1.0 - beta);
            solve_dual(g, g_max + c, hi, coord, reg)
        }
    }
}

fn solve_dual<F>(
    g: &[f64],
    mut lo: f64,
    mut hi: f64,
    coord: F,
    reg: &RegularizerSpec,
) -> Result<SolveReport>
where
    F: Fn(f64, f64) -> f64,
{
    let sum_at = |lambda: f64| -> f64 { g.iter().map(|&gi| coord(lambda, gi)).sum() };
    // widen the bracket if rounding put the root outside
    let mut guard = 0;
    while sum_at(lo) < 1.0 && guard < 64 {
        lo = hi - (hi - lo) * 2.0;
        guard += 1;
    }
    while sum_at(hi) > 1.0 && guard < 128 {
        hi += (hi - lo) * 2.0;
        guard += 1;
    }
    let mut iterations = 0;
    for _ in 0..BISECT_ITERS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval collapsed to machine precision
        }
        if sum_at(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let raw: Vec<f64> = g.iter().map(|&gi| coord(lambda, gi).max(f64::MIN_POSITIVE)).collect();
    let sum: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let residual = kkt_residual(g, &probs, lambda, reg) + (sum - 1.0).abs();
    let solution = Strategy::from_weights(probs)?;
    if residual > 1e-6 {
        return Err(NswError::SolverFailure { residual, iterations });
    }
    Ok(SolveReport { solution, kkt_residual: residual.min(FTRL_RESIDUAL_TOL.max(residual)), iterations })
}

/// Stationarity norm of the FTRL optimality system at dual value `lambda`.
fn kkt_residual(g: &[f64], p: &[f64], lambda: f64, reg: &RegularizerSpec) -> f64 {
    let scale = 1.0 + g.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut norm2 = 0.0;
    for (&gi, &pi) in g.iter().zip(p) {
        let psi_grad = match reg.kind {
            RegularizerKind::LogBarrier => -1.0 / pi,
            RegularizerKind::Shannon => pi.ln() + 1.0,
            RegularizerKind::Tsallis => {
                -reg.beta * pi.powf(reg.beta - 1.0) / (1.0 - reg.beta)
            }
        };
        let r = (-gi + psi_grad / reg.eta + lambda) / scale;
        norm2 += r * r;
    }
    norm2.sqrt()
}

/// A concave objective over the simplex, exposing values and supergradients.
pub trait Objective {
    fn value(&self, p: &[f64]) -> f64;
    fn grad(&self, p: &[f64]) -> Vec<f64>;
}

impl<V, G> Objective for (V, G)
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value(&self, p: &[f64]) -> f64 {
        (self.0)(p)
    }
    fn grad(&self, p: &[f64]) -> Vec<f64> {
        (self.1)(p)
    }
}

/// Maximizes a concave objective over the simplex by Frank-Wolfe with
/// golden-section line search, starting from the uniform strategy.
///
/// On convergence the final Frank-Wolfe gap is at most `tol`, which for a
/// concave objective also bounds the value suboptimality. If the iteration
/// budget runs out the best iterate seen is returned with the last gap as
/// the residual.
pub fn maximize_concave_simplex(
    objective: &dyn Objective,
    arms: usize,
    tol: f64,
    max_iters: usize,
) -> SolveReport {
    maximize_concave_simplex_from(objective, &Strategy::uniform(arms), tol, max_iters)
}

/// Same as [`maximize_concave_simplex`] but warm-started from `start`.
pub fn maximize_concave_simplex_from(
    objective: &dyn Objective,
    start: &Strategy,
    tol: f64,
    max_iters: usize,
) -> SolveReport {
    let k = start.len();
    let mut p = start.probs().to_vec();
    let mut best_p = p.clone();
    let mut best_value = objective.value(&p);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut buf = vec![0.0; k];
    let mut stalled = 0usize;

    for _ in 0..max_iters {
        iterations += 1;
        let g = objective.grad(&p);
        // linear maximization oracle over the simplex: best vertex
        let (vertex, _) = g
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &gi)| if gi > acc.1 { (i, gi) } else { acc });
        gap = g[vertex] - g.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
        if gap <= tol {
            break;
        }
        // direction d = e_vertex - p; line search on the concave section
        let value_at = |gamma: f64, buf: &mut [f64]| {
            for (i, (&pi, qi)) in p.iter().zip(buf.iter_mut()).enumerate() {
                let di = if i == vertex { 1.0 - pi } else { -pi };
                *qi = (pi + gamma * di).max(0.0);
            }
            objective.value(buf)
        };
        let gamma = golden_section_max(|x| value_at(x, &mut buf), 0.0, 1.0, 32);
        for (i, pi) in p.iter_mut().enumerate() {
            let di = if i == vertex { 1.0 - *pi } else { -*pi };
            *pi = (*pi + gamma * di).max(0.0);
        }
        let sum: f64 = p.iter().sum();
        for pi in &mut p {
            *pi /= sum;
        }
        let value = objective.value(&p);
        let stall_tol = (0.1 * tol).max(1e-13);
        if value > best_value + stall_tol {
            best_value = value;
            best_p.clone_from(&p);
            stalled = 0;
        } else {
            if value > best_value {
                best_value = value;
                best_p.clone_from(&p);
            }
            // the gap over-estimates the reachable improvement; once the
            // line search stops making progress more iterations only zigzag
            stalled += 1;
            if stalled >= 2 {
                break;
            }
        }
    }

    let solution = Strategy::from_weights(best_p).unwrap_or_else(|_| Strategy::uniform(k));
    SolveReport { solution, kkt_residual: gap.max(0.0), iterations }
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
fn golden_section_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Cap on the number of grid points [`grid_oracle`] will enumerate.
pub const GRID_POINT_CAP: u64 = 30_000_000;

/// Exhaustively evaluates a value oracle on the uniform simplex grid with
/// the given spacing and returns the best point (first maximizer in
/// lexicographic grid order). Test-oracle quality, small `K` only.
pub fn grid_oracle(
    value_oracle: &dyn Fn(&[f64]) -> f64,
    arms: usize,
    resolution: f64,
) -> Result<(Strategy, f64)> {
    if arms == 0 || arms > 4 {
        return Err(NswError::InvalidParameter(format!("grid oracle supports 1 <= K <= 4, got {arms}")));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(NswError::InvalidParameter(format!("bad grid resolution {resolution}")));
    }
    let steps = (1.0 / resolution).round() as u64;
    let points = binomial(steps + arms as u64 - 1, arms as u64 - 1);
    if points > GRID_POINT_CAP {
        return Err(NswError::GridTooLarge { points, cap: GRID_POINT_CAP });
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut counts = vec![0u64; arms];
    enumerate_compositions(steps, arms, 0, &mut counts, &mut |c| {
        let p: Vec<f64> = c.iter().map(|&x| x as f64 / steps as f64).collect();
        let v = value_oracle(&p);
        match &best {
            Some((_, bv)) if v <= *bv => {}
            _ => best = Some((p, v)),
        }
    });
    let (p, v) = best.expect("grid is nonempty");
    Ok((Strategy::from_weights(p)?, v))
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn enumerate_compositions(
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
        enumerate_compositions(remaining - c, arms, index + 1, counts, visit);
    }
}

/// `(1 - gamma) p + gamma * uniform`; every entry ends up at least `gamma/K`.
pub fn mix_with_uniform(p: &Strategy, gamma: f64) -> Result<Strategy> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(NswError::InvalidParameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let k = p.len() as f64;
    let probs: Vec<f64> =
        p.probs().iter().map(|&pi| (1.0 - gamma) * pi + gamma / k).collect();
    Strategy::from_weights(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ftrl_step_zero_gain_is_uniform() {
        for reg in [
            RegularizerSpec::log_barrier(0.5),
            RegularizerSpec::tsallis(0.5, 0.3),
            RegularizerSpec::shannon(0.2),
        ] {
            let r = ftrl_step(&[0.0; 4], &reg).unwrap();
            for &p in r.solution.probs() {
                assert_abs_diff_eq!(p, 0.25, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ftrl_step_shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for reg in [
            RegularizerSpec::log_barrier(0.7),
            RegularizerSpec::tsallis(0.4, 0.2),
            RegularizerSpec::shannon(0.3),
        ] {
            for _ in 0..20 {
                let g: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let c = rng.gen_range(-10.0..10.0);
                let shifted: Vec<f64> = g.iter().map(|x| x + c).collect();
                let a = ftrl_step(&g, &reg).unwrap();
                let b = ftrl_step(&shifted, &reg).unwrap();
                for (x, y) in a.solution.probs().iter().zip(b.solution.probs()) {
                    assert!((x - y).abs() <= 1e-9, "shift changed the argmin: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn ftrl_step_shannon_closed_form() {
        // eta*G = (0, ln 3) gives the softmax (1/4, 3/4)
        let reg = RegularizerSpec::shannon(1.0);
        let r = ftrl_step(&[0.0, 3.0f64.ln()], &reg).unwrap();
        assert_abs_diff_eq!(r.solution.probs()[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(r.solution.probs()[1], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn ftrl_step_log_barrier_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let g: Vec<f64> = (0..6).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let r = ftrl_step(&g, &RegularizerSpec::log_barrier(0.1)).unwrap();
            assert!(r.solution.min_entry() > 0.0);
            assert!(r.kkt_residual <= 1e-10, "residual {}", r.kkt_residual);
        }
    }

    #[test]
    fn tsallis_near_one_matches_shannon() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let g: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t = ftrl_step(&g, &RegularizerSpec::tsallis(0.999, 0.5)).unwrap();
            let s = ftrl_step(&g, &RegularizerSpec::shannon(0.5)).unwrap();
            for (a, b) in t.solution.probs().iter().zip(s.solution.probs()) {
                assert!((a - b).abs() <= 1e-2, "tsallis {a} vs shannon {b}");
            }
        }
    }

    #[test]
    fn frank_wolfe_linear_objective_hits_vertex() {
        let c = [0.1, 0.9, 0.3];
        let obj = (
            move |p: &[f64]| p.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>(),
            move |_: &[f64]| c.to_vec(),
        );
        let r = maximize_concave_simplex(&obj, 3, 1e-8, 10_000);
        assert_abs_diff_eq!(r.solution.probs()[1], 1.0, epsilon = 1e-6);
        let v = obj.value(r.solution.probs());
        assert_abs_diff_eq!(v, 0.9, epsilon = 1e-7);
    }

    #[test]
    fn frank_wolfe_recovers_hard_pair_optimum() {
        // 0.2 sqrt(p2) + 0.1 sqrt(p1) + 0.3 is maximized at (0.2, 0.8)
        let obj = (
            |p: &[f64]| 0.2 * p[1].sqrt() + 0.1 * p[0].sqrt() + 0.3,
            |p: &[f64]| {
                vec![
                    0.05 / p[0].max(1e-18).sqrt(),
                    0.1 / p[1].max(1e-18).sqrt(),
                ]
            },
        );
        let r = maximize_concave_simplex(&obj, 2, 1e-10, 10_000);
        assert!((r.solution.probs()[0] - 0.2).abs() <= 1e-4);
        assert!((r.solution.probs()[1] - 0.8).abs() <= 1e-4);
    }

    #[test]
    fn frank_wolfe_matches_grid_oracle_on_random_nsw() {
        use crate::welfare::{welfare_of_strategy, SwfSpec, UtilityMatrix};
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let u = UtilityMatrix::from_flat(3, 2, (0..6).map(|_| rng.gen()).collect()).unwrap();
            let value = |p: &[f64]| {
                let s = Strategy::from_weights(p.to_vec()).unwrap();
                welfare_of_strategy(&SwfSpec::Nsw, &u, &s).unwrap()
            };
            let grad = |p: &[f64]| {
                let s = Strategy::from_weights(p.to_vec()).unwrap();
                crate::welfare::nsw_supergradient(&u, &s, 1e-12).unwrap()
            };
            let fw = maximize_concave_simplex(&(value, grad), 3, 1e-8, 10_000);
            let (_, grid_value) = grid_oracle(&value, 3, 1e-3).unwrap();
            let fw_value = value(fw.solution.probs());
            assert!(
                fw_value >= grid_value - 1e-3,
                "frank-wolfe {fw_value} below grid {grid_value}"
            );
        }
    }

    #[test]
    fn grid_oracle_cases() {
        let linear = |p: &[f64]| p[1];
        let (p, _) = grid_oracle(&linear, 2, 0.01).unwrap();
        assert_abs_diff_eq!(p.probs()[1], 1.0, epsilon = 1e-12);

        // constant objective: first grid point in lexicographic order, which
        // enumerates coordinate 0 from 0 upward
        let constant = |_: &[f64]| 1.0;
        let (p, _) = grid_oracle(&constant, 3, 0.25).unwrap();
        assert_eq!(p.probs(), &[0.0, 0.0, 1.0]);

        let obj = |p: &[f64]| 0.2 * p[1].sqrt() + 0.1 * p[0].sqrt() + 0.3;
        let (p, _) = grid_oracle(&obj, 2, 1e-3).unwrap();
        assert!((p.probs()[0] - 0.2).abs() <= 1e-3);
    }

    #[test]
    fn grid_oracle_rejects_large_grids() {
        let f = |_: &[f64]| 0.0;
        assert!(matches!(
            grid_oracle(&f, 4, 1e-4),
            Err(NswError::GridTooLarge { .. })
        ));
        assert!(grid_oracle(&f, 5, 0.5).is_err());
    }

    #[test]
    fn mix_with_uniform_cases() {
        let p = Strategy::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(mix_with_uniform(&p, 0.0).unwrap().probs(), p.probs());
        let u = mix_with_uniform(&p, 1.0).unwrap();
        assert_abs_diff_eq!(u.probs()[0], 0.5, epsilon = 1e-15);
        let m = mix_with_uniform(&p, 0.5).unwrap();
        assert_abs_diff_eq!(m.probs()[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m.probs()[1], 0.25, epsilon = 1e-15);
        assert!(m.min_entry() >= 0.25);
    }
}
