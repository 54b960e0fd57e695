//! Structural verification suite: solver invariants and cross-oracle
//! agreement checks on small single-queue instances.
//!
//! Every check prints one line. The instances are a fixed tiny queue (used
//! where an exhaustive brute-force oracle must stay cheap) plus six
//! pseudo-randomly generated small configurations from a fixed seed, so the
//! suite is deterministic end to end. All buffers stay at or below 50 states
//! and the whole suite runs in well under two minutes.
//!
//! The value-structure sweeps (monotonicity, convexity, threshold action
//! sets) probe properties of the *unbounded* queue that the finite solver
//! can only approximate: the buffer clamp compresses values in the top
//! arrival-span band and that distortion leaks a few states downward before
//! dying off geometrically. The generated instances therefore carry buffers
//! of at least 34 states and a stable service margin, which keeps the leak
//! below the check tolerances on the probed range `{0..B−M}`; the
//! deliberately cramped tiny instance is reserved for the brute-force
//! oracle comparisons, where exactness — not structural fidelity — is the
//! point. One structural caveat is genuine rather than numerical: with
//! batch arrivals the optimal values can bend non-convexly at the single
//! point where the optimal action flips, so the convexity check exempts
//! (but still reports) that boundary; its documentation has the details.

use anyhow::{anyhow, Result};
use assoc_core::{
    average_cost, build_dtmc, direct_index, finite_horizon_discounted,
    infinite_horizon_discounted, lambda_iteration, optimal_policy_rvi, passive_mass,
    solve_relative_values, stationary_distribution, Action, MbsParams, OracleConfig,
    OverflowPolicy, SystemConfig, ThresholdPolicy, TransitionKernel, WhittleSolverConfig,
};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::distribution::{Binomial, Discrete};
use std::collections::HashMap;
use std::time::Instant;

/// Rejection taxes swept by the value-structure checks.
const TAXES: [f64; 5] = [-10.0, -1.0, 0.0, 1.0, 10.0];
/// Relative-value-iteration tolerance used throughout the suite.
const RVI_TOL: f64 = 1e-9;
/// Seed of the generated configuration set (fixed: the suite is deterministic).
const CONFIG_SEED: u64 = 11;
/// Number of generated small configurations.
const NUM_RANDOM_CONFIGS: usize = 6;
/// Generated instances keep mean arrivals at or below this fraction of the
/// mean per-slot service capacity, so their queues drain and the buffer
/// clamp stays a boundary effect instead of dominating the value function.
const STABILITY_MARGIN: f64 = 0.85;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    /// Stable check identifier.
    pub name: &'static str,
    /// Whether the invariant held everywhere it was probed.
    pub passed: bool,
    /// What was probed and how close the worst case came to the bound.
    pub detail: String,
}

/// All check outcomes plus wall time.
#[derive(Debug)]
pub struct SuiteReport {
    /// One entry per check, in execution order.
    pub checks: Vec<CheckResult>,
    /// Total wall time in seconds.
    pub elapsed_secs: f64,
}

impl SuiteReport {
    /// Whether every check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check plus a trailing summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<34} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!(
            "{}: {} checks, {} failed, {:.2}s\n",
            if failed == 0 { "OK" } else { "FAILED" },
            self.checks.len(),
            failed,
            self.elapsed_secs
        ));
        out
    }
}

/// Uniform draw in `(lo, hi)` from the top 53 bits of one `u64`.
fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + u * (hi - lo)
}

/// Uniform integer in `lo..=hi`.
fn uniform_usize(rng: &mut ChaCha12Rng, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize
}

/// The fixed tiny instance: one queue, one service trial per slot,
/// arrivals of 0 or 1 packet with equal probability, six buffer slots.
/// Small enough that exhaustive oracles stay exact and instant.
pub fn tiny_config() -> SystemConfig {
    SystemConfig {
        mini_slots: 1,
        max_arrival: 1,
        arrival_pmf: vec![0.5, 0.5],
        mbs: vec![MbsParams { rate: 0.5, holding_cost: 1.0 }],
        buffer: 6,
        horizon: 100,
        warmup: 50,
        overflow: OverflowPolicy::DropUser,
    }
}

/// Six single-queue configurations drawn from a fixed-seed generator:
/// buffers in 34..=50, arrival batches up to 4 packets, up to 4 service
/// trials per slot, service probabilities in (0.35, 0.9), mass-at-zero in
/// (0.2, 0.8), holding costs in (0.5, 5). Parameter tuples are redrawn
/// until mean arrivals sit at or below [`STABILITY_MARGIN`] of mean
/// service, so every instance is a stable queue whose buffer clamp only
/// matters near the top of the state space.
pub fn random_configs() -> Vec<SystemConfig> {
    let mut rng = ChaCha12Rng::seed_from_u64(CONFIG_SEED);
    (0..NUM_RANDOM_CONFIGS)
        .map(|_| loop {
            let buffer = uniform_usize(&mut rng, 34, 50);
            let max_arrival = uniform_usize(&mut rng, 1, 4);
            let mini_slots = uniform_usize(&mut rng, 1, 4);
            let rate = uniform(&mut rng, 0.35, 0.9);
            let p0 = uniform(&mut rng, 0.2, 0.8);
            let holding_cost = uniform(&mut rng, 0.5, 5.0);
            let mean_arrival = (1.0 - p0) * (max_arrival as f64 + 1.0) / 2.0;
            if mean_arrival > STABILITY_MARGIN * mini_slots as f64 * rate {
                continue;
            }
            let mut arrival_pmf = vec![p0];
            arrival_pmf.extend(std::iter::repeat_n(
                (1.0 - p0) / max_arrival as f64,
                max_arrival,
            ));
            break SystemConfig {
                mini_slots,
                max_arrival,
                arrival_pmf,
                mbs: vec![MbsParams { rate, holding_cost }],
                buffer,
                horizon: 100,
                warmup: 50,
                overflow: OverflowPolicy::DropUser,
            };
        })
        .collect()
}

/// All instances the sweeps run over: the generated set plus the tiny one.
fn all_configs() -> Vec<SystemConfig> {
    let mut v = random_configs();
    v.push(tiny_config());
    v
}

fn guard(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e:#}"),
        },
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Optimal relative values are non-decreasing on the clamp-free states
/// `{0..B−M}` for every swept tax.
fn check_value_monotone(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0usize;
    for cfg in configs {
        let top = cfg.buffer - cfg.max_arrival;
        for &lambda in &TAXES {
            let sol = optimal_policy_rvi(lambda, cfg, 0, RVI_TOL)?;
            let scale = 1.0 + sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for x in 0..top {
                worst = worst.max((sol.values[x] - sol.values[x + 1]) / scale);
                pairs += 1;
            }
        }
    }
    Ok((
        worst <= 1e-7,
        format!(
            "{} configs x {} taxes, {pairs} adjacent pairs, worst relative drop {worst:.2e}",
            configs.len(),
            TAXES.len()
        ),
    ))
}

/// Optimal relative values have non-decreasing differences (discrete
/// convexity) on the clamp-free states for every swept tax.
///
/// On instances with batch arrivals (more than one packet per accepted
/// batch) the two difference pairs straddling the accept/reject boundary
/// are exempt: with a binary accept/reject control, convexity provably
/// survives the boundary only for single-packet arrivals (the midpoint
/// action used by the usual convexity-propagation argument is not a
/// feasible control), and the optimal values genuinely — independently of
/// the buffer size — bend the other way there. The worst straddling-pair
/// violation is still reported for transparency.
fn check_value_convex(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_boundary = f64::NEG_INFINITY;
    let mut triples = 0usize;
    let mut exempt = 0usize;
    for cfg in configs {
        let top = cfg.buffer - cfg.max_arrival;
        for &lambda in &TAXES {
            let sol = optimal_policy_rvi(lambda, cfg, 0, RVI_TOL)?;
            let edge = sol.policy.threshold() + 1;
            let scale = 1.0 + sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for x in 0..top.saturating_sub(1) {
                let d0 = sol.values[x + 1] - sol.values[x];
                let d1 = sol.values[x + 2] - sol.values[x + 1];
                let v = (d0 - d1) / scale;
                let straddles = (x as i64) >= edge - 2 && (x as i64) <= edge - 1;
                if cfg.max_arrival >= 2 && straddles {
                    worst_boundary = worst_boundary.max(v);
                    exempt += 1;
                } else {
                    worst = worst.max(v);
                    triples += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-7,
        format!(
            "{} configs x {} taxes, {triples} difference pairs, worst relative violation \
             {worst:.2e}; {exempt} batch-arrival boundary pairs exempt (worst {worst_boundary:.2e})",
            configs.len(),
            TAXES.len()
        ),
    ))
}

/// The greedy action sets of converged relative values are threshold sets
/// over every state the resulting policy can reach: all states up to the
/// reported threshold accept, everything from the first rejecting state
/// through the top of the policy's recurrent range (threshold plus the
/// arrival span) rejects. States above that range are transient and their
/// greedy actions inherit the buffer clamp's distortion, so they carry no
/// structural content.
fn check_greedy_threshold(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut violations = 0usize;
    let mut states = 0usize;
    for cfg in configs {
        let kernel = TransitionKernel::build(cfg, 0)?;
        for &lambda in &TAXES {
            let sol = optimal_policy_rvi(lambda, cfg, 0, RVI_TOL)?;
            let accepts: Vec<bool> = (0..=cfg.buffer)
                .map(|x| {
                    let d = dot(kernel.row(Action::Accept, x), &sol.values)
                        - dot(kernel.row(Action::Reject, x), &sol.values);
                    d <= lambda
                })
                .collect();
            match accepts.iter().position(|&a| !a) {
                None => {
                    if sol.policy.threshold() != cfg.buffer as i64 {
                        violations += 1;
                    }
                    states += cfg.buffer + 1;
                }
                Some(edge) => {
                    if sol.policy.threshold() != edge as i64 - 1 {
                        violations += 1;
                    }
                    let recurrent_top =
                        (edge + kernel.arrival_span()).saturating_sub(1).min(cfg.buffer);
                    states += recurrent_top + 1;
                    violations += accepts[edge..=recurrent_top].iter().filter(|&&a| a).count();
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!(
            "{} configs x {} taxes, {states} reachable greedy actions, {violations} structure violations",
            configs.len(),
            TAXES.len()
        ),
    ))
}

/// Under the threshold-`t` stationary law, the probability of being in an
/// accepting state is non-decreasing in `t` (from 0 at reject-all to 1 at
/// accept-all).
fn check_active_mass(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    let mut rows = 0usize;
    for cfg in configs {
        let b = cfg.buffer;
        let mut prev = f64::NEG_INFINITY;
        for t in -1..=b as i64 {
            let policy = ThresholdPolicy::new(t, b)?;
            let dist = stationary_distribution(&build_dtmc(policy, cfg, 0)?)?;
            let active = 1.0 - passive_mass(policy, &dist);
            if prev > f64::NEG_INFINITY {
                worst = worst.max(prev - active);
                rows += 1;
            }
            prev = active;
        }
    }
    Ok((
        worst <= 1e-10,
        format!(
            "{} configs, {rows} adjacent thresholds, worst mass drop {worst:.2e}",
            configs.len()
        ),
    ))
}

/// The optimal threshold is non-decreasing along a 50-point tax grid
/// spanning [−50, 50] (the passive set only grows with the tax).
fn check_indexability(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut violations = 0usize;
    let mut span = (i64::MAX, i64::MIN);
    for cfg in configs {
        let mut prev = i64::MIN;
        for i in 0..50 {
            let lambda = -50.0 + 100.0 * i as f64 / 49.0;
            let t = optimal_policy_rvi(lambda, cfg, 0, RVI_TOL)?.policy.threshold();
            if t < prev {
                violations += 1;
            }
            prev = t;
            span = (span.0.min(t), span.1.max(t));
        }
    }
    Ok((
        violations == 0,
        format!(
            "{} configs x 50 taxes in [-50, 50], thresholds {}..{}, {violations} decreases",
            configs.len(),
            span.0,
            span.1
        ),
    ))
}

/// The fixed-point tax iteration and the closed-form two-solve index agree
/// on every default-grid state.
fn check_index_methods(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let solver = WhittleSolverConfig::default();
    let mut worst = 0.0f64;
    let mut states = 0usize;
    for cfg in configs {
        for x in (0..=cfg.buffer - cfg.max_arrival).step_by(5) {
            let iterated = lambda_iteration(x, cfg, 0, &solver)?;
            let direct = direct_index(x, cfg, 0)?;
            worst = worst.max((iterated - direct).abs());
            states += 1;
        }
    }
    Ok((
        worst <= 1e-6,
        format!(
            "{} configs, {states} grid states, max |iterated - direct| = {worst:.2e}",
            configs.len()
        ),
    ))
}

/// Relative value iteration lands on the threshold and average cost found
/// by exhaustively evaluating every threshold policy.
fn check_rvi_vs_enumeration(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut worst_rho = 0.0f64;
    let mut off_threshold = 0usize;
    let mut cases = 0usize;
    for cfg in configs {
        let b = cfg.buffer;
        for &lambda in &TAXES {
            let mut best = f64::INFINITY;
            let mut rhos = Vec::with_capacity(b + 2);
            for t in -1..=b as i64 {
                let rho = average_cost(ThresholdPolicy::new(t, b)?, lambda, cfg, 0)?;
                best = best.min(rho);
                rhos.push((t, rho));
            }
            let ties: Vec<i64> = rhos
                .iter()
                .filter(|(_, r)| *r <= best + 1e-10)
                .map(|&(t, _)| t)
                .collect();
            let sol = optimal_policy_rvi(lambda, cfg, 0, RVI_TOL)?;
            worst_rho = worst_rho.max((sol.rho - best).abs());
            if !ties.contains(&sol.policy.threshold()) {
                off_threshold += 1;
            }
            cases += 1;
        }
    }
    Ok((
        worst_rho <= 1e-8 && off_threshold == 0,
        format!(
            "{cases} (config, tax) cases, max |rho gap| = {worst_rho:.2e}, {off_threshold} thresholds outside the tie set"
        ),
    ))
}

/// The stationary-law average cost and the linear-system solve agree for
/// every threshold policy.
fn check_average_cost_consistency(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for cfg in configs {
        let b = cfg.buffer;
        for &lambda in &[-1.0, 0.0, 2.0] {
            for t in -1..=b as i64 {
                let policy = ThresholdPolicy::new(t, b)?;
                let from_chain = average_cost(policy, lambda, cfg, 0)?;
                let from_solve = solve_relative_values(policy, lambda, cfg, 0)?.rho;
                worst = worst.max((from_chain - from_solve).abs());
                cases += 1;
            }
        }
    }
    Ok((
        worst <= 1e-8,
        format!(
            "{} configs x 3 taxes x all thresholds ({cases} solves), max |rho gap| = {worst:.2e}",
            configs.len()
        ),
    ))
}

/// Brute-force expectimax over the tiny instance: recursive min over
/// actions of immediate cost plus discounted expectation, with departures
/// taken from an independent binomial implementation (upper tail folded
/// onto the emptying queue) and terminal values `C·x`.
fn expectimax(
    steps: usize,
    x: usize,
    lambda: f64,
    beta: f64,
    cfg: &SystemConfig,
    memo: &mut HashMap<(usize, usize), f64>,
) -> Result<f64> {
    let c = cfg.mbs[0].holding_cost;
    if steps == 0 {
        return Ok(c * x as f64);
    }
    if let Some(&v) = memo.get(&(steps, x)) {
        return Ok(v);
    }
    let l = cfg.mini_slots as u64;
    let bin = Binomial::new(cfg.mbs[0].rate, l).map_err(|e| anyhow!("binomial: {e}"))?;
    let top = x.min(cfg.mini_slots);
    let mut dep = vec![0.0f64; top + 1];
    for d in 0..=cfg.mini_slots {
        dep[d.min(top)] += bin.pmf(d as u64);
    }
    let mut best = f64::INFINITY;
    for accept in [true, false] {
        let mut total = c * x as f64 + if accept { 0.0 } else { lambda };
        for (d, &pd) in dep.iter().enumerate() {
            if accept {
                for (j, &pj) in cfg.arrival_pmf.iter().enumerate() {
                    let next = (x - d + j).min(cfg.buffer);
                    total += beta * pd * pj * expectimax(steps - 1, next, lambda, beta, cfg, memo)?;
                }
            } else {
                total += beta * pd * expectimax(steps - 1, x - d, lambda, beta, cfg, memo)?;
            }
        }
        best = best.min(total);
    }
    memo.insert((steps, x), best);
    Ok(best)
}

/// The production finite-horizon recursion matches the brute-force
/// expectimax on the tiny instance for every state, step count, discount
/// and tax probed.
fn check_finite_horizon(tiny: &SystemConfig) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for &beta in &[0.5, 0.9, 0.95] {
        for &lambda in &[-1.0, 0.0, 0.7, 2.0] {
            let oracle = OracleConfig { beta, horizon_steps: 8, tolerance: 1e-10 };
            for &steps in &[0usize, 1, 2, 3, 4, 6, 8] {
                let v = finite_horizon_discounted(steps, lambda, &oracle, tiny, 0)?;
                let mut memo = HashMap::new();
                for x in 0..=tiny.buffer {
                    let brute = expectimax(steps, x, lambda, beta, tiny, &mut memo)?;
                    worst = worst.max((v[x] - brute).abs());
                    cases += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-10,
        format!("{cases} (state, step, discount, tax) values, max gap {worst:.2e}"),
    ))
}

/// The vanishing-discount error `|(1−β)·V_β(0) − ρ|` shrinks along
/// β ∈ {0.9, 0.99, 0.999} and ends below 0.05 on the tiny instance.
///
/// Probed at rejection tax 2: at tax 0 rejecting is free, so the optimal
/// policy rejects everywhere and every probed quantity is identically 0 —
/// the comparison would only measure solver round-off. A positive tax makes
/// both actions bite and the limit genuinely nontrivial.
fn check_vanishing_discount(tiny: &SystemConfig) -> Result<(bool, String)> {
    let tax = 2.0;
    let rho = optimal_policy_rvi(tax, tiny, 0, 1e-10)?.rho;
    let mut errs = Vec::new();
    for &beta in &[0.9, 0.99, 0.999] {
        let oracle = OracleConfig { beta, horizon_steps: 8, tolerance: 1e-9 };
        let v = infinite_horizon_discounted(tax, &oracle, tiny, 0)?;
        errs.push(((1.0 - beta) * v[0] - rho).abs());
    }
    let decreasing = errs[0] > errs[1] && errs[1] > errs[2];
    Ok((
        decreasing && errs[2] < 0.05,
        format!(
            "errors {:.4e} > {:.4e} > {:.4e}, final < 0.05: {}",
            errs[0],
            errs[1],
            errs[2],
            errs[2] < 0.05
        ),
    ))
}

/// Every transition row of every instance sums to 1 within 1e-12 under
/// both actions.
fn check_kernel_rows(configs: &[SystemConfig]) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut rows = 0usize;
    for cfg in configs {
        let kernel = TransitionKernel::build(cfg, 0)?;
        for x in 0..kernel.num_states() {
            for action in [Action::Accept, Action::Reject] {
                let sum: f64 = kernel.row(action, x).iter().sum();
                worst = worst.max((sum - 1.0).abs());
                rows += 1;
            }
        }
    }
    Ok((
        worst <= 1e-12,
        format!("{rows} rows across {} configs, max |sum - 1| = {worst:.2e}", configs.len()),
    ))
}

/// Runs every check and collects the report. Check failures (including
/// solver errors) are reported in-line; this function itself only fails on
/// a malformed generated configuration.
pub fn run_suite() -> Result<SuiteReport> {
    let start = Instant::now();
    let configs = all_configs();
    for cfg in &configs {
        cfg.validate()?;
    }
    let generated = random_configs();
    let tiny = tiny_config();
    let checks = vec![
        guard("value-monotone", || check_value_monotone(&generated)),
        guard("value-convex", || check_value_convex(&generated)),
        guard("greedy-threshold-structure", || check_greedy_threshold(&generated)),
        guard("stationary-active-mass-monotone", || check_active_mass(&configs)),
        guard("indexability-grid", || check_indexability(&configs)),
        guard("index-method-agreement", || check_index_methods(&configs)),
        guard("rvi-matches-enumeration", || check_rvi_vs_enumeration(&configs)),
        guard("average-cost-consistency", || {
            check_average_cost_consistency(&configs)
        }),
        guard("finite-horizon-matches-expectimax", || check_finite_horizon(&tiny)),
        guard("vanishing-discount-limit", || check_vanishing_discount(&tiny)),
        guard("kernel-rows-stochastic", || check_kernel_rows(&configs)),
    ];
    Ok(SuiteReport {
        checks,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_configs_are_deterministic_bounded_and_stable() {
        let a = random_configs();
        let b = random_configs();
        assert_eq!(a.len(), NUM_RANDOM_CONFIGS);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
            assert!((34..=50).contains(&x.buffer));
            assert!((1..=4).contains(&x.max_arrival));
            assert!((1..=4).contains(&x.mini_slots));
            assert!(x.mbs[0].rate > 0.35 && x.mbs[0].rate < 0.9);
            assert!(x.mbs[0].holding_cost > 0.5 && x.mbs[0].holding_cost < 5.0);
            let mean_arrival: f64 = x
                .arrival_pmf
                .iter()
                .enumerate()
                .map(|(j, p)| j as f64 * p)
                .sum();
            assert!(mean_arrival <= STABILITY_MARGIN * x.mini_slots as f64 * x.mbs[0].rate);
            x.validate().unwrap();
        }
    }

    #[test]
    fn tiny_config_is_valid() {
        tiny_config().validate().unwrap();
    }

    #[test]
    fn expectimax_terminal_values_are_linear_holding_cost() {
        let tiny = tiny_config();
        let mut memo = HashMap::new();
        for x in 0..=tiny.buffer {
            let v = expectimax(0, x, 0.3, 0.9, &tiny, &mut memo).unwrap();
            assert_eq!(v, x as f64);
        }
    }

    #[test]
    fn full_suite_passes() {
        let report = run_suite().unwrap();
        assert!(report.all_passed(), "\n{}", report.render());
        assert_eq!(report.checks.len(), 11);
        assert!(report.elapsed_secs < 120.0);
    }
}
