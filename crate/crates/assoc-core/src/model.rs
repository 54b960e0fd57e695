//! System parameters and the probabilistic kernels every other module
//! consumes: per-slot departure distributions, controlled transition rows,
//! rate normalization, and the drift-based stability check.
//!
//! The model: each base station (mBS) serves one packet per mini-slot with
//! success probability `rate`, over `mini_slots` mini-slots per slot. At the
//! end of each slot a single network-wide user may arrive carrying `j`
//! packets with probability `arrival_pmf[j]`; an association rule routes the
//! user to one mBS. Holding one packet for one slot at mBS `i` costs
//! `holding_cost`.

use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Admission decision for an mBS in a given slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Admit an arriving user's packets.
    Accept,
    /// Turn the arrival away.
    Reject,
}

/// How the simulator treats an arrival that does not fit the buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    /// The whole user is lost if its file does not fit in the remaining
    /// buffer space. Default: matches the measurement conventions of the
    /// published reference results.
    #[default]
    DropUser,
    /// Admit as many packets as fit and drop the rest of the file; users
    /// truncated to zero packets are discarded.
    Truncate,
}

/// Per-base-station parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbsParams {
    /// Probability that one mini-slot serves one packet, in `(0, 1]`.
    pub rate: f64,
    /// Cost per held packet per slot, strictly positive.
    pub holding_cost: f64,
}

impl MbsParams {
    fn validate(&self, i: usize) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) || !self.rate.is_finite() {
            return Err(Error::invalid(format!(
                "mbs {i}: rate must lie in (0, 1], got {}",
                self.rate
            )));
        }
        if !(self.holding_cost > 0.0) || !self.holding_cost.is_finite() {
            return Err(Error::invalid(format!(
                "mbs {i}: holding_cost must be positive, got {}",
                self.holding_cost
            )));
        }
        Ok(())
    }
}

/// Network-level parameters shared by the solvers and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Mini-slots per slot (`L >= 1`).
    pub mini_slots: usize,
    /// Largest possible packet count of an arriving user (`M >= 1`).
    pub max_arrival: usize,
    /// Arrival-size pmf `p_0..p_M`; entries in `[0, 1]` summing to 1
    /// within 1e-12 (`p_0` is the no-arrival probability).
    pub arrival_pmf: Vec<f64>,
    /// Per-mBS parameters; the list length is the network size `K`.
    pub mbs: Vec<MbsParams>,
    /// Per-mBS buffer: the state space is truncated to `{0..buffer}`.
    /// Must be at least `max_arrival` so a user fits an empty mBS.
    pub buffer: usize,
    /// Slots per simulated episode.
    pub horizon: usize,
    /// Leading slots excluded from cost averaging (`warmup < horizon`).
    pub warmup: usize,
    /// Admission behavior when an arrival exceeds the free buffer space.
    pub overflow: OverflowPolicy,
}

impl SystemConfig {
    /// Number of base stations `K`.
    pub fn num_mbs(&self) -> usize {
        self.mbs.len()
    }

    /// The arrival-size pmf with mass `p_0` on "no arrival" and the
    /// remainder spread uniformly over `{1..m}`: `p_j = (1 - p_0) / m`.
    pub fn uniform_arrival_pmf(p0: f64, m: usize) -> Vec<f64> {
        let mut pmf = vec![(1.0 - p0) / m as f64; m + 1];
        pmf[0] = p0;
        pmf
    }

    /// Checks every type invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.mini_slots == 0 {
            return Err(Error::invalid("mini_slots must be at least 1"));
        }
        if self.max_arrival == 0 {
            return Err(Error::invalid("max_arrival must be at least 1"));
        }
        if self.mbs.is_empty() {
            return Err(Error::invalid("at least one mBS is required"));
        }
        for (i, p) in self.mbs.iter().enumerate() {
            p.validate(i)?;
        }
        if self.arrival_pmf.len() != self.max_arrival + 1 {
            return Err(Error::invalid(format!(
                "arrival_pmf must have max_arrival + 1 = {} entries, got {}",
                self.max_arrival + 1,
                self.arrival_pmf.len()
            )));
        }
        for (j, &p) in self.arrival_pmf.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::invalid(format!(
                    "arrival_pmf[{j}] must lie in [0, 1], got {p}"
                )));
            }
        }
        let sum: f64 = self.arrival_pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "arrival_pmf must sum to 1 within 1e-12, got {sum}"
            )));
        }
        if self.buffer < self.max_arrival {
            return Err(Error::invalid(format!(
                "buffer ({}) must be at least max_arrival ({}) so a user fits an empty mBS",
                self.buffer, self.max_arrival
            )));
        }
        if self.horizon <= self.warmup {
            return Err(Error::invalid(format!(
                "horizon ({}) must exceed warmup ({})",
                self.horizon, self.warmup
            )));
        }
        Ok(())
    }

    /// Mean packets per slot offered to the network, `Σ_j j·p_j`.
    pub fn mean_arrival(&self) -> f64 {
        self.arrival_pmf
            .iter()
            .enumerate()
            .map(|(j, &p)| j as f64 * p)
            .sum()
    }

    fn check_mbs_index(&self, mbs_index: usize) -> Result<()> {
        if mbs_index >= self.mbs.len() {
            return Err(Error::invalid(format!(
                "mbs_index {mbs_index} out of range for {} mBSs",
                self.mbs.len()
            )));
        }
        Ok(())
    }
}

/// Maps raw physical rates (e.g. bits/s) into serving probabilities:
/// `r_i = R_i / (max_l R_l + zeta)`. Strictly order-preserving, and every
/// output lies strictly inside `(0, 1)` because the denominator exceeds
/// every numerator.
pub fn normalize_rates(raw_rates: &[f64], zeta: f64) -> Result<Vec<f64>> {
    if raw_rates.is_empty() {
        return Err(Error::invalid("raw_rates must be non-empty"));
    }
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::invalid(format!("zeta must be positive, got {zeta}")));
    }
    let mut max = 0.0f64;
    for (i, &r) in raw_rates.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!(
                "raw_rates[{i}] must be positive, got {r}"
            )));
        }
        max = max.max(r);
    }
    let denom = max + zeta;
    Ok(raw_rates.iter().map(|&r| r / denom).collect())
}

/// `base^exp` by repeated squaring; exact for the small exponents used here.
fn powi(base: f64, mut exp: usize) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

/// Binomial pmf over `{0..l}` with success probability `r`, built from
/// Pascal's triangle so it stays exact-ish for the small `l` used here.
fn binomial_pmf(l: usize, r: f64) -> Vec<f64> {
    // Pascal row of C(l, d); l stays far below the ~1e15 integer-precision
    // limit of f64 binomials for every configuration this crate targets.
    let mut coeff = vec![1.0f64; l + 1];
    for d in 1..=l {
        coeff[d] = coeff[d - 1] * (l - d + 1) as f64 / d as f64;
    }
    let q = 1.0 - r;
    (0..=l)
        .map(|d| coeff[d] * powi(r, d) * powi(q, l - d))
        .collect()
}

/// Distribution of the number of packets departing an mBS holding `x`
/// packets during one slot of `l` mini-slots with per-mini-slot success
/// probability `r`.
///
/// Support is `{0..min(x, l)}`: below the upper end the mass is the plain
/// binomial; at `d = min(x, l)` the binomial upper tail folds in (the queue
/// empties before the slot does). `x = 0` yields a point mass at 0.
pub fn departure_pmf(x: usize, l: usize, r: f64) -> Vec<f64> {
    let top = x.min(l);
    if top == 0 {
        // Nothing can depart an empty queue; exact by construction rather
        // than as a rounded binomial total.
        return vec![1.0];
    }
    let bin = binomial_pmf(l, r);
    let mut pmf = vec![0.0; top + 1];
    pmf[..top].copy_from_slice(&bin[..top]);
    pmf[top] = bin[top..].iter().sum();
    pmf
}

/// One row of the controlled transition kernel: the distribution of the
/// next state from `x` under `action`, on the truncated space `{0..B}`.
///
/// Departures convolve with the arrival pmf when accepting, or with the
/// zero-arrival point mass when rejecting; overflow past the buffer is
/// clamped onto state `B` (which keeps every row a pmf).
pub fn transition_row(
    x: usize,
    action: Action,
    cfg: &SystemConfig,
    mbs_index: usize,
) -> Result<Vec<f64>> {
    cfg.check_mbs_index(mbs_index)?;
    if x > cfg.buffer {
        return Err(Error::invalid(format!(
            "state {x} exceeds buffer {}",
            cfg.buffer
        )));
    }
    let b = cfg.buffer;
    let dep = departure_pmf(x, cfg.mini_slots, cfg.mbs[mbs_index].rate);
    let mut row = vec![0.0; b + 1];
    match action {
        Action::Accept => {
            for (d, &pd) in dep.iter().enumerate() {
                if pd == 0.0 {
                    continue;
                }
                for (j, &pj) in cfg.arrival_pmf.iter().enumerate() {
                    row[(x - d + j).min(b)] += pd * pj;
                }
            }
        }
        Action::Reject => {
            for (d, &pd) in dep.iter().enumerate() {
                row[x - d] += pd;
            }
        }
    }
    Ok(row)
}

/// The full controlled kernel of one mBS: accept and reject rows for every
/// state of the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    accept: Vec<Vec<f64>>,
    reject: Vec<Vec<f64>>,
}

impl TransitionKernel {
    /// Builds and validates the kernel for one mBS.
    pub fn build(cfg: &SystemConfig, mbs_index: usize) -> Result<Self> {
        cfg.validate()?;
        cfg.check_mbs_index(mbs_index)?;
        let b = cfg.buffer;
        let mut accept = Vec::with_capacity(b + 1);
        let mut reject = Vec::with_capacity(b + 1);
        for x in 0..=b {
            accept.push(transition_row(x, Action::Accept, cfg, mbs_index)?);
            reject.push(transition_row(x, Action::Reject, cfg, mbs_index)?);
        }
        let kernel = TransitionKernel { accept, reject };
        kernel.validate()?;
        Ok(kernel)
    }

    /// Number of states, `B + 1`.
    pub fn num_states(&self) -> usize {
        self.accept.len()
    }

    /// Top of the arrival support: the largest upward jump any accept
    /// transition can make. States at or below `B − arrival_span()` are
    /// free of buffer clamping.
    ///
    /// Read off the accept row of state 0, which is exactly the arrival
    /// pmf (nothing departs an empty queue).
    pub fn arrival_span(&self) -> usize {
        self.accept[0]
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(0)
    }

    /// The next-state pmf from `x` under `action`.
    pub fn row(&self, action: Action, x: usize) -> &[f64] {
        match action {
            Action::Accept => &self.accept[x],
            Action::Reject => &self.reject[x],
        }
    }

    /// Checks row-stochasticity (within 1e-12) and the structure of the
    /// reject rows (no mass above the source state; state 0 absorbing).
    pub fn validate(&self) -> Result<()> {
        for (name, rows) in [("accept", &self.accept), ("reject", &self.reject)] {
            for (x, row) in rows.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::NumericalFailure {
                        context: format!("{name} row {x} is not a pmf"),
                        residual: (sum - 1.0).abs(),
                    });
                }
                if row.iter().any(|&p| p < 0.0) {
                    return Err(Error::invalid(format!("{name} row {x} has negative mass")));
                }
            }
        }
        if self.reject[0][0] != 1.0 {
            return Err(Error::StructuralViolation(
                "reject row from state 0 must be a point mass at 0".into(),
            ));
        }
        for (x, row) in self.reject.iter().enumerate() {
            if row[x + 1..].iter().any(|&p| p != 0.0) {
                return Err(Error::StructuralViolation(format!(
                    "reject row {x} places mass above its source state"
                )));
            }
        }
        Ok(())
    }
}

/// Verdict of the mean-drift stability condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Whether the sufficient condition holds.
    pub stable: bool,
    /// `L·r_min − Σ_j j·p_j`: slowest service capacity minus offered load.
    pub margin: f64,
}

/// Sufficient (not necessary) condition for every always-accept chain to be
/// positive recurrent: the slowest mBS alone out-serves the offered load.
///
/// Advisory only: the simulator runs regardless, because buffer truncation
/// bounds every chain even when the condition fails.
pub fn check_stability(cfg: &SystemConfig) -> StabilityReport {
    let r_min = cfg
        .mbs
        .iter()
        .map(|p| p.rate)
        .fold(f64::INFINITY, f64::min);
    let margin = cfg.mini_slots as f64 * r_min - cfg.mean_arrival();
    StabilityReport {
        stable: margin > 0.0,
        margin,
    }
}
