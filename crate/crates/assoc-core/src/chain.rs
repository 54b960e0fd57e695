//! The Markov chain induced by a threshold admission policy, and its
//! stationary distribution.
//!
//! A threshold policy accepts arrivals in states `<= t` and rejects above;
//! under it each mBS's controlled MDP collapses to an ordinary DTMC whose
//! stationary distribution drives the closed-form average-cost expressions
//! used to cross-check the value-function solvers.

use crate::error::Error;
use crate::linalg::lu_factor;
use crate::model::{Action, SystemConfig, TransitionKernel};
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Accept arrivals in states `<= threshold`, reject in states above it.
///
/// `threshold = -1` rejects everywhere; `threshold = B` accepts everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ThresholdPolicy {
    threshold: i64,
}

impl ThresholdPolicy {
    /// Builds a policy, checking `-1 <= threshold <= buffer`.
    pub fn new(threshold: i64, buffer: usize) -> Result<Self> {
        if threshold < -1 || threshold > buffer as i64 {
            return Err(Error::invalid(format!(
                "threshold {threshold} outside [-1, {buffer}]"
            )));
        }
        Ok(ThresholdPolicy { threshold })
    }

    /// The reject-everywhere policy (`t = -1`).
    pub fn reject_all() -> Self {
        ThresholdPolicy { threshold: -1 }
    }

    /// The accept-everywhere policy (`t = B`).
    pub fn accept_all(buffer: usize) -> Self {
        ThresholdPolicy {
            threshold: buffer as i64,
        }
    }

    /// The threshold value in `[-1, B]`.
    pub fn threshold(&self) -> i64 {
        self.threshold
    }

    /// Whether the policy accepts arrivals in state `x`.
    pub fn accepts(&self, x: usize) -> bool {
        (x as i64) <= self.threshold
    }

    /// The action taken in state `x`.
    pub fn action(&self, x: usize) -> Action {
        if self.accepts(x) {
            Action::Accept
        } else {
            Action::Reject
        }
    }
}

/// Stationary pmf of an induced chain over `{0..B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pmf: Vec<f64>,
}

impl StationaryDistribution {
    /// The pmf over `{0..B}`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of state `x`.
    pub fn prob(&self, x: usize) -> f64 {
        self.pmf[x]
    }

    /// Mean state `Σ_x x·π(x)`.
    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(x, &p)| x as f64 * p)
            .sum()
    }
}

/// Assembles the row-stochastic matrix of the chain induced by `policy`:
/// row `x` is the accept row for `x <= t` and the reject row above.
pub fn build_dtmc(
    policy: ThresholdPolicy,
    cfg: &SystemConfig,
    mbs_index: usize,
) -> Result<Vec<Vec<f64>>> {
    let kernel = TransitionKernel::build(cfg, mbs_index)?;
    Ok(build_dtmc_with_kernel(policy, &kernel))
}

/// As [`build_dtmc`], reusing an already-built kernel.
pub fn build_dtmc_with_kernel(policy: ThresholdPolicy, kernel: &TransitionKernel) -> Vec<Vec<f64>> {
    (0..kernel.num_states())
        .map(|x| kernel.row(policy.action(x), x).to_vec())
        .collect()
}

/// States reachable from state 0 under `p` (following positive-probability
/// edges). The set is closed under transitions, so the chain restricted to
/// it is still row-stochastic.
fn reachable_from_zero(p: &[Vec<f64>]) -> Vec<usize> {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for (y, &mass) in p[x].iter().enumerate() {
            if mass > 0.0 && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..n).filter(|&x| seen[x]).collect()
}

/// Solves `πP = π`, `Σπ = 1` for the stationary distribution of the class
/// reachable from state 0.
///
/// For the chain sizes this crate targets the solve is a direct dense one:
/// the balance equations on the reachable set with the last equation
/// replaced by normalization. Above 2000 states a power iteration takes
/// over. Restricting to the reachable set keeps reducible corner cases
/// (e.g. the reject-everywhere chain, absorbing at 0) well-posed: states
/// outside the set get probability zero.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<StationaryDistribution> {
    let n = p.len();
    if n == 0 {
        return Err(Error::invalid("empty transition matrix"));
    }
    for (x, row) in p.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid(format!("row {x} has length {}", row.len())));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || row.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid(format!("row {x} is not a pmf")));
        }
    }

    let pmf = if n <= 2000 {
        stationary_direct(p)?
    } else {
        stationary_power(p)?
    };

    // Always verify the balance residual on the full chain.
    let mut residual = 0.0f64;
    for y in 0..n {
        let mut flow = 0.0;
        for x in 0..n {
            flow += pmf[x] * p[x][y];
        }
        residual = residual.max((flow - pmf[y]).abs());
    }
    if residual >= 1e-10 {
        return Err(Error::NumericalFailure {
            context: "stationary distribution".into(),
            residual,
        });
    }
    Ok(StationaryDistribution { pmf })
}

fn stationary_direct(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let states = reachable_from_zero(p);
    let m = states.len();
    // Balance equations on the reachable set: for each state s (column of
    // P), Σ_u π(u)·P(u, s) − π(s) = 0; the last row is Σ π = 1.
    let mut a = vec![0.0f64; m * m];
    let mut rhs = vec![0.0f64; m];
    for (row, &s) in states.iter().enumerate().take(m - 1) {
        for (col, &u) in states.iter().enumerate() {
            a[row * m + col] = p[u][s] - if u == s { 1.0 } else { 0.0 };
        }
    }
    for col in 0..m {
        a[(m - 1) * m + col] = 1.0;
    }
    rhs[m - 1] = 1.0;

    let solved = lu_factor(a, m)?.solve(&rhs);
    let mut pmf = vec![0.0f64; n];
    for (idx, &s) in states.iter().enumerate() {
        // Transient states in the reachable set legitimately get ~0 mass;
        // clip the tiny negative round-off they can pick up.
        pmf[s] = solved[idx].max(0.0);
    }
    let total: f64 = pmf.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NumericalFailure {
            context: "stationary distribution normalization".into(),
            residual: total,
        });
    }
    pmf.iter_mut().for_each(|v| *v /= total);
    Ok(pmf)
}

fn stationary_power(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut pi = vec![0.0f64; n];
    pi[0] = 1.0;
    let mut next = vec![0.0f64; n];
    for _ in 0..1_000_000usize {
        next.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..n {
            let px = pi[x];
            if px == 0.0 {
                continue;
            }
            for (y, &mass) in p[x].iter().enumerate() {
                next[y] += px * mass;
            }
        }
        let diff = pi
            .iter()
            .zip(next.iter())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        core::mem::swap(&mut pi, &mut next);
        if diff < 1e-14 {
            return Ok(pi);
        }
    }
    Err(Error::NonConvergence {
        context: "stationary power iteration".into(),
        previous: f64::NAN,
        last: f64::NAN,
    })
}

/// Long-run fraction of slots the policy rejects: `Σ_{j > t} π(j)`.
pub fn passive_mass(policy: ThresholdPolicy, dist: &StationaryDistribution) -> f64 {
    dist.pmf()
        .iter()
        .enumerate()
        .filter(|&(x, _)| !policy.accepts(x))
        .map(|(_, &p)| p)
        .sum()
}
