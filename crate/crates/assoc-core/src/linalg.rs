//! Minimal dense linear algebra: LU factorization with partial pivoting.
//!
//! The systems solved in this crate (threshold-policy value equations and
//! stationary-distribution balance equations) are dense and small — a few
//! hundred unknowns — so a straightforward `O(n^3)` factorization is exact
//! enough and faster than bringing in an external solver.

use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// A row-major dense matrix factored as `P·A = L·U`.
pub struct LuFactors {
    n: usize,
    /// Combined L (strict lower, unit diagonal implied) and U (upper).
    lu: Vec<f64>,
    /// Row permutation: `perm[k]` is the original row index pivoted into row `k`.
    perm: Vec<usize>,
}

/// Factors the `n x n` row-major matrix `a`. Consumes the buffer.
///
/// Fails with a numerical-failure error if a pivot column is numerically
/// zero relative to the matrix magnitude (singular system).
pub fn lu_factor(mut a: Vec<f64>, n: usize) -> Result<LuFactors> {
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        // Partial pivoting: bring the largest remaining entry of column k up.
        let mut pivot_row = k;
        let mut pivot_mag = a[k * n + k].abs();
        for r in (k + 1)..n {
            let mag = a[r * n + k].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag < scale * 1e-14 {
            return Err(Error::NumericalFailure {
                context: format!("LU factorization (singular at column {k})"),
                residual: pivot_mag,
            });
        }
        if pivot_row != k {
            perm.swap(k, pivot_row);
            for c in 0..n {
                a.swap(k * n + c, pivot_row * n + c);
            }
        }
        let pivot = a[k * n + k];
        for r in (k + 1)..n {
            let factor = a[r * n + k] / pivot;
            a[r * n + k] = factor;
            if factor != 0.0 {
                for c in (k + 1)..n {
                    a[r * n + c] -= factor * a[k * n + c];
                }
            }
        }
    }
    Ok(LuFactors { n, lu: a, perm })
}

impl LuFactors {
    /// Solves `A·x = b` for one right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = vec![0.0; n];
        // Forward substitution on the permuted right-hand side.
        for k in 0..n {
            let mut sum = b[self.perm[k]];
            for c in 0..k {
                sum -= self.lu[k * n + c] * x[c];
            }
            x[k] = sum;
        }
        // Back substitution.
        for k in (0..n).rev() {
            let mut sum = x[k];
            for c in (k + 1)..n {
                sum -= self.lu[k * n + c] * x[c];
            }
            x[k] = sum / self.lu[k * n + k];
        }
        x
    }

    /// Solves `A·x = b` with `passes` rounds of iterative refinement
    /// against the original (unfactored) matrix.
    ///
    /// Each round solves `A·δ = b − A·x` and corrects `x`, driving the
    /// backward error toward machine level; the value systems here carry
    /// entries spanning several orders of magnitude, where a raw LU solve
    /// can miss the crate-wide residual budgets by a small factor.
    pub fn solve_refined(&self, a: &[f64], b: &[f64], passes: usize) -> Vec<f64> {
        debug_assert_eq!(a.len(), self.n * self.n);
        let n = self.n;
        let mut x = self.solve(b);
        for _ in 0..passes {
            let mut residual = vec![0.0; n];
            let mut worst = 0.0f64;
            for r in 0..n {
                let mut sum = b[r];
                for c in 0..n {
                    sum -= a[r * n + c] * x[c];
                }
                residual[r] = sum;
                worst = worst.max(sum.abs());
            }
            if worst == 0.0 {
                break;
            }
            let delta = self.solve(&residual);
            for (xi, di) in x.iter_mut().zip(delta.iter()) {
                *xi += di;
            }
        }
        x
    }
}
