//! Whittle index computation.
//!
//! The index of state `x` is the rejection tax `λ` at which accepting and
//! rejecting are equally attractive in `x` under the optimal (threshold)
//! policy. Two solvers are provided:
//!
//! * [`lambda_iteration`] — the recursive scheme
//!   `λ_{t+1} = λ_t + γ·(E_a[V_{λ_t}] − E_b[V_{λ_t}] − λ_t)`, re-solving the
//!   threshold-`x` relative values at every step; and
//! * [`direct_index`] — an exact closed form exploiting that the
//!   relative-value system is affine in `λ`, used as the iterative
//!   solver's oracle and as the default method.
//!
//! Indices are solved exactly on a state grid and interpolated linearly in
//! between; above the top grid state the last exact value extends as a
//! constant, keeping buffer-truncation distortion out of the table.

use crate::chain::ThresholdPolicy;
use crate::error::Error;
use crate::mdp::solve_relative_values_with_kernel;
use crate::model::{Action, SystemConfig, TransitionKernel};
use crate::Result;
use alloc::format;
use alloc::vec::Vec;

/// How index values are computed at grid states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexMethod {
    /// Exact affine-in-`λ` solve (two linear systems per state). Default.
    #[default]
    Direct,
    /// The fixed-step recursive scheme; retained as the faithful
    /// formulation and exercised against `Direct` in tests.
    Iterative,
}

/// Parameters of the index solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct WhittleSolverConfig {
    /// Step size `γ` of the iterative scheme.
    pub gamma: f64,
    /// Convergence threshold on the estimated remaining distance to the
    /// fixed point (the iteration is affine, so the step ratio yields the
    /// contraction factor and with it an error estimate).
    pub tol: f64,
    /// Iteration cap before reporting non-convergence.
    pub max_iter: usize,
    /// States solved exactly; `None` selects the default grid (every 5th
    /// state from 0 to `B − M`). Must be sorted, start at 0, and stay at
    /// least `M` below the buffer.
    pub grid: Option<Vec<usize>>,
    /// Which solver fills the grid.
    pub method: IndexMethod,
}

impl Default for WhittleSolverConfig {
    fn default() -> Self {
        WhittleSolverConfig {
            gamma: 0.05,
            tol: 1e-8,
            max_iter: 100_000,
            grid: None,
            method: IndexMethod::Direct,
        }
    }
}

impl WhittleSolverConfig {
    /// The default grid: every 5th state from 0 through `B − M`.
    pub fn default_grid(cfg: &SystemConfig) -> Vec<usize> {
        (0..=cfg.buffer - cfg.max_arrival).step_by(5).collect()
    }

    /// Resolves and validates the grid for `cfg`.
    pub fn resolve_grid(&self, cfg: &SystemConfig) -> Result<Vec<usize>> {
        let grid = match &self.grid {
            Some(g) => g.clone(),
            None => Self::default_grid(cfg),
        };
        let top = cfg.buffer - cfg.max_arrival;
        if grid.first() != Some(&0) {
            return Err(Error::invalid("index grid must start at state 0"));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("index grid must be strictly increasing"));
        }
        if *grid.last().expect("non-empty by the first check") > top {
            return Err(Error::invalid(format!(
                "index grid must stay within {{0..{top}}} (buffer minus max_arrival)"
            )));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::invalid("gamma must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        Ok(grid)
    }
}

/// Expected difference between accepting and rejecting at `x` under the
/// relative values `v`, *excluding* the tax itself.
fn indifference_gap(kernel: &TransitionKernel, x: usize, v: &[f64]) -> f64 {
    let a = kernel.row(Action::Accept, x);
    let b = kernel.row(Action::Reject, x);
    a.iter()
        .zip(b.iter())
        .zip(v.iter())
        .map(|((&pa, &pb), &vz)| (pa - pb) * vz)
        .sum()
}

/// Computes the index of state `x` by the recursive scheme, re-solving the
/// threshold-`x` relative values at the current `λ` on every step.
///
/// The iteration is affine in `λ`, so it converges geometrically with a
/// constant contraction factor; that factor is estimated on-line from the
/// ratio of successive steps, and the iteration stops once the implied
/// remaining distance to the fixed point drops below `tol`. Divergence (a
/// step size too large for this instance) is detected by iterate growth
/// and reported as non-convergence carrying the last two iterates.
pub fn lambda_iteration(
    x: usize,
    cfg: &SystemConfig,
    mbs_index: usize,
    solver: &WhittleSolverConfig,
) -> Result<f64> {
    cfg.validate()?;
    let kernel = TransitionKernel::build(cfg, mbs_index)?;
    lambda_iteration_with_kernel(x, cfg.mbs[mbs_index].holding_cost, &kernel, solver)
}

/// As [`lambda_iteration`], reusing an already-built kernel.
pub fn lambda_iteration_with_kernel(
    x: usize,
    holding_cost: f64,
    kernel: &TransitionKernel,
    solver: &WhittleSolverConfig,
) -> Result<f64> {
    let b = kernel.num_states() - 1;
    let policy = ThresholdPolicy::new(x as i64, b)?;
    let mut lambda = 0.0f64;
    let mut prev_lambda = f64::NAN;
    let mut prev_step = f64::NAN;
    for _ in 0..solver.max_iter {
        let sol = solve_relative_values_with_kernel(policy, lambda, holding_cost, kernel)?;
        let gap = indifference_gap(kernel, x, &sol.values);
        let next = lambda + solver.gamma * (gap - lambda);
        if !next.is_finite() || next.abs() > 1e15 {
            return Err(Error::NonConvergence {
                context: format!(
                    "index iteration at state {x} diverged; try a smaller gamma"
                ),
                previous: lambda,
                last: next,
            });
        }
        let step = (next - lambda).abs();
        prev_lambda = lambda;
        lambda = next;
        if step == 0.0 {
            return Ok(lambda);
        }
        // The update is affine in λ, so successive steps shrink by a fixed
        // contraction factor r and the remaining distance to the fixed
        // point is step·r/(1−r). Stopping on that estimate (rather than on
        // the raw step size) makes `tol` a bound on the error itself, which
        // matters when the contraction is slow and each step is a tiny
        // fraction of the outstanding error.
        if prev_step > 0.0 {
            let ratio = step / prev_step;
            if ratio < 1.0 && step * ratio / (1.0 - ratio) < solver.tol {
                return Ok(lambda);
            }
        }
        prev_step = step;
    }
    Err(Error::NonConvergence {
        context: format!("index iteration at state {x} hit max_iter"),
        previous: prev_lambda,
        last: lambda,
    })
}

/// Exact index of state `x`: solves the threshold-`x` relative values at
/// `λ = 0` and `λ = 1`, decomposes `V_λ = U + λ·W`, and returns the root of
/// `λ = (a − b)·(U + λ·W)` where `a`, `b` are the accept/reject kernel rows
/// at `x`.
pub fn direct_index(x: usize, cfg: &SystemConfig, mbs_index: usize) -> Result<f64> {
    cfg.validate()?;
    let kernel = TransitionKernel::build(cfg, mbs_index)?;
    direct_index_with_kernel(x, cfg.mbs[mbs_index].holding_cost, &kernel)
}

/// As [`direct_index`], reusing an already-built kernel.
pub fn direct_index_with_kernel(
    x: usize,
    holding_cost: f64,
    kernel: &TransitionKernel,
) -> Result<f64> {
    let b = kernel.num_states() - 1;
    let policy = ThresholdPolicy::new(x as i64, b)?;
    let u = solve_relative_values_with_kernel(policy, 0.0, holding_cost, kernel)?;
    let v1 = solve_relative_values_with_kernel(policy, 1.0, holding_cost, kernel)?;
    let w: Vec<f64> = v1
        .values
        .iter()
        .zip(u.values.iter())
        .map(|(a, b)| a - b)
        .collect();
    let numerator = indifference_gap(kernel, x, &u.values);
    let denominator = 1.0 - indifference_gap(kernel, x, &w);
    if denominator.abs() < 1e-12 {
        return Err(Error::DegenerateIndifference {
            state: x,
            denominator,
        });
    }
    Ok(numerator / denominator)
}

/// Per-mBS Whittle index over the whole state space: exact on the grid,
/// linearly interpolated between grid states, constant above the top grid
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    mbs_index: usize,
    values: Vec<f64>,
    exact: Vec<bool>,
}

impl IndexTable {
    /// Which mBS the table belongs to.
    pub fn mbs_index(&self) -> usize {
        self.mbs_index
    }

    /// The index of state `x`.
    pub fn index_at(&self, x: usize) -> f64 {
        self.values[x]
    }

    /// Whether state `x` was solved exactly (vs interpolated).
    pub fn is_exact(&self, x: usize) -> bool {
        self.exact[x]
    }

    /// Number of tabulated states, `B + 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Whether the table is empty (it never is for a valid build).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All values, indexed by state.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Reassembles a table from parts (primarily for tests and IO).
    pub fn from_parts(mbs_index: usize, values: Vec<f64>, exact: Vec<bool>) -> Result<Self> {
        if values.len() != exact.len() || values.is_empty() {
            return Err(Error::invalid("index table parts have mismatched lengths"));
        }
        Ok(IndexTable {
            mbs_index,
            values,
            exact,
        })
    }
}

/// Builds the full index table of one mBS: exact solves on the grid,
/// linear interpolation between adjacent grid states, constant
/// extrapolation above the top grid state.
///
/// Indexability makes the exact grid values non-decreasing in the state;
/// that is *checked* (within a tiny numerical slack), not assumed, and a
/// violation surfaces as a structural error naming the offending state.
pub fn index_table(
    cfg: &SystemConfig,
    mbs_index: usize,
    solver: &WhittleSolverConfig,
) -> Result<IndexTable> {
    cfg.validate()?;
    let grid = solver.resolve_grid(cfg)?;
    let kernel = TransitionKernel::build(cfg, mbs_index)?;
    let holding_cost = cfg.mbs[mbs_index].holding_cost;

    let mut grid_values = Vec::with_capacity(grid.len());
    for &g in &grid {
        let value = match solver.method {
            IndexMethod::Direct => direct_index_with_kernel(g, holding_cost, &kernel),
            IndexMethod::Iterative => {
                lambda_iteration_with_kernel(g, holding_cost, &kernel, solver)
            }
        }
        .map_err(|e| annotate(e, g, mbs_index))?;
        grid_values.push(value);
    }
    for pair in grid_values.windows(2).zip(grid.windows(2)) {
        let ((prev, next), states) = ((pair.0[0], pair.0[1]), pair.1);
        // The slack must absorb linear-solve round-off at the index's own
        // magnitude: fast-draining queues have genuinely flat index
        // plateaus (adjacent states tied to ~1e-12 relative), and the tie
        // order out of the solver is arbitrary. Genuine indexability
        // violations are orders of magnitude above this.
        let slack = 1e-9 + 1e-9 * prev.abs();
        if next < prev - slack {
            return Err(Error::StructuralViolation(format!(
                "index decreases from state {} ({prev}) to state {} ({next}) on mBS {mbs_index}",
                states[0], states[1]
            )));
        }
    }

    let b = cfg.buffer;
    let mut values = alloc::vec![0.0f64; b + 1];
    let mut exact = alloc::vec![false; b + 1];
    for (&g, &v) in grid.iter().zip(grid_values.iter()) {
        values[g] = v;
        exact[g] = true;
    }
    for seg in 0..grid.len().saturating_sub(1) {
        let (x0, x1) = (grid[seg], grid[seg + 1]);
        let (v0, v1) = (grid_values[seg], grid_values[seg + 1]);
        for x in (x0 + 1)..x1 {
            let frac = (x - x0) as f64 / (x1 - x0) as f64;
            values[x] = v0 + frac * (v1 - v0);
        }
    }
    let top = *grid.last().expect("grid verified non-empty");
    for x in (top + 1)..=b {
        values[x] = grid_values[grid.len() - 1];
    }
    Ok(IndexTable {
        mbs_index,
        values,
        exact,
    })
}

fn annotate(e: Error, state: usize, mbs_index: usize) -> Error {
    match e {
        Error::InvalidArgument(m) => {
            Error::InvalidArgument(format!("state {state}, mBS {mbs_index}: {m}"))
        }
        Error::NumericalFailure { context, residual } => Error::NumericalFailure {
            context: format!("state {state}, mBS {mbs_index}: {context}"),
            residual,
        },
        Error::NonConvergence {
            context,
            previous,
            last,
        } => Error::NonConvergence {
            context: format!("state {state}, mBS {mbs_index}: {context}"),
            previous,
            last,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MbsParams, OverflowPolicy};

    fn tiny_config(buffer: usize) -> SystemConfig {
        SystemConfig {
            mini_slots: 1,
            max_arrival: 1,
            arrival_pmf: alloc::vec![0.5, 0.5],
            mbs: alloc::vec![MbsParams {
                rate: 0.5,
                holding_cost: 1.0,
            }],
            buffer,
            horizon: 10,
            warmup: 0,
            overflow: OverflowPolicy::default(),
        }
    }

    #[test]
    fn direct_index_matches_hand_solved_values() {
        // For the tiny instance the adjacent-threshold balance equations
        // solve by hand: the chains under thresholds -1/0/1/2 give average
        // costs λ, 0.5 + λ/2, 1 + λ/4, 1.5 + λ/6, whose consecutive
        // crossings are λ = 1, 2, 6.
        let cfg = tiny_config(10);
        assert!((direct_index(0, &cfg, 0).unwrap() - 1.0).abs() < 1e-9);
        assert!((direct_index(1, &cfg, 0).unwrap() - 2.0).abs() < 1e-9);
        assert!((direct_index(2, &cfg, 0).unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn lambda_iteration_agrees_with_direct_solve() {
        let cfg = tiny_config(8);
        let solver = WhittleSolverConfig {
            gamma: 0.2,
            tol: 1e-12,
            ..WhittleSolverConfig::default()
        };
        for x in 0..=7usize {
            let it = lambda_iteration(x, &cfg, 0, &solver).unwrap();
            let exact = direct_index(x, &cfg, 0).unwrap();
            assert!(
                (it - exact).abs() < 100.0 * solver.tol.max(1e-10),
                "state {x}: {it} vs {exact}"
            );
        }
    }

    #[test]
    fn returned_index_makes_accept_and_reject_indifferent() {
        let cfg = tiny_config(9);
        let kernel = TransitionKernel::build(&cfg, 0).unwrap();
        for x in [0usize, 2, 5] {
            let lambda = direct_index(x, &cfg, 0).unwrap();
            let policy = ThresholdPolicy::new(x as i64, 9).unwrap();
            let sol = solve_relative_values_with_kernel(policy, lambda, 1.0, &kernel).unwrap();
            let gap = indifference_gap(&kernel, x, &sol.values);
            assert!((gap - lambda).abs() < 1e-8, "state {x}");
        }
    }

    #[test]
    fn relative_values_are_affine_in_lambda() {
        let cfg = tiny_config(12);
        let kernel = TransitionKernel::build(&cfg, 0).unwrap();
        let policy = ThresholdPolicy::new(4, 12).unwrap();
        let u = solve_relative_values_with_kernel(policy, 0.0, 1.0, &kernel).unwrap();
        let v1 = solve_relative_values_with_kernel(policy, 1.0, 1.0, &kernel).unwrap();
        let v2 = solve_relative_values_with_kernel(policy, 2.0, 1.0, &kernel).unwrap();
        for x in 0..=12usize {
            let w = v1.values[x] - u.values[x];
            let predicted = u.values[x] + 2.0 * w;
            assert!((predicted - v2.values[x]).abs() < 1e-9, "state {x}");
        }
    }

    #[test]
    fn table_interpolates_linearly_and_extends_constantly() {
        let mut cfg = tiny_config(12);
        cfg.max_arrival = 1;
        let solver = WhittleSolverConfig {
            grid: Some(alloc::vec![0, 10]),
            ..WhittleSolverConfig::default()
        };
        let table = index_table(&cfg, 0, &solver).unwrap();
        let a = table.index_at(0);
        let b = table.index_at(10);
        assert!(table.is_exact(0) && table.is_exact(10));
        assert!(!table.is_exact(5));
        assert!((table.index_at(5) - 0.5 * (a + b)).abs() < 1e-12);
        // Constant extrapolation above the top grid state.
        assert_eq!(table.index_at(11), b);
        assert_eq!(table.index_at(12), b);
        // Exact grid states carry the exact solve bit-for-bit.
        assert_eq!(table.index_at(0), direct_index(0, &cfg, 0).unwrap());
        assert_eq!(table.index_at(10), direct_index(10, &cfg, 0).unwrap());
    }

    #[test]
    fn default_grid_covers_the_safe_range_every_fifth_state() {
        let mut cfg = tiny_config(50);
        cfg.max_arrival = 10;
        cfg.arrival_pmf = SystemConfig::uniform_arrival_pmf(0.5, 10);
        let grid = WhittleSolverConfig::default_grid(&cfg);
        assert_eq!(grid.first(), Some(&0));
        assert_eq!(grid.last(), Some(&40));
        assert!(grid.windows(2).all(|w| w[1] - w[0] == 5));
    }

    #[test]
    fn grid_validation_rejects_bad_grids() {
        let cfg = tiny_config(10);
        for grid in [
            alloc::vec![1, 5],     // must start at 0
            alloc::vec![0, 5, 5],  // strictly increasing
            alloc::vec![0, 10],    // exceeds B - M = 9
        ] {
            let solver = WhittleSolverConfig {
                grid: Some(grid),
                ..WhittleSolverConfig::default()
            };
            assert!(solver.resolve_grid(&cfg).is_err());
        }
    }
}
