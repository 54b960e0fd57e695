//! Parallel experiment execution.
//!
//! Episodes are pure functions of `(config, policy, seed)`, so the
//! (policy × seed) grid runs on a rayon pool with positional collection:
//! results are identical — bit for bit — for every thread count,
//! including 1.

use anyhow::Result;
use assoc_core::{
    compute_metrics, index_table, run_episode, IndexTable, Metrics, MetricsSummary, PolicyKind,
    PolicyResult, SystemConfig, WhittleSolverConfig,
};
use rayon::prelude::*;

/// Mean per-slot cost across seeds for one policy.
#[derive(Debug, Clone)]
pub struct CostTrace {
    /// Policy the trace belongs to.
    pub policy: PolicyKind,
    /// Per-slot cost, averaged over the experiment's seeds.
    pub mean_cost: Vec<f64>,
}

impl CostTrace {
    /// Trailing moving average with the given window (in slots).
    pub fn moving_average(&self, window: usize) -> Vec<f64> {
        moving_average(&self.mean_cost, window)
    }
}

/// Trailing moving average; entry `n` averages the last `min(n+1, window)`
/// values.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (n, &v) in series.iter().enumerate() {
        sum += v;
        if n >= window {
            sum -= series[n - window];
        }
        out.push(sum / (n + 1).min(window) as f64);
    }
    out
}

/// Everything one experiment produces.
#[derive(Debug)]
pub struct ExperimentOutput {
    /// Per-policy metrics (per seed and summarized), in input policy order.
    pub results: Vec<PolicyResult>,
    /// Per-policy mean cost traces, present when requested.
    pub traces: Option<Vec<CostTrace>>,
    /// Index tables, present when the index policy was run.
    pub tables: Option<Vec<IndexTable>>,
}

/// Builds the per-mBS index tables in parallel.
pub fn build_index_tables(
    cfg: &SystemConfig,
    solver: &WhittleSolverConfig,
) -> Result<Vec<IndexTable>> {
    let tables = (0..cfg.num_mbs())
        .into_par_iter()
        .map(|i| index_table(cfg, i, solver))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tables)
}

/// Runs every (policy, seed) episode on the rayon pool and aggregates.
///
/// `with_traces` additionally returns each policy's per-slot cost averaged
/// over seeds (for trace artifacts and plots).
pub fn run_parallel(
    cfg: &SystemConfig,
    kinds: &[PolicyKind],
    seeds: &[u64],
    solver: &WhittleSolverConfig,
    with_traces: bool,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    anyhow::ensure!(!kinds.is_empty(), "need at least one policy");
    anyhow::ensure!(!seeds.is_empty(), "need at least one seed");

    let tables = if kinds.contains(&PolicyKind::Whittle) {
        Some(build_index_tables(cfg, solver)?)
    } else {
        None
    };

    let jobs: Vec<(PolicyKind, u64)> = kinds
        .iter()
        .flat_map(|&kind| seeds.iter().map(move |&seed| (kind, seed)))
        .collect();
    let episodes: Vec<(Metrics, Option<Vec<f64>>)> = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            let record = run_episode(cfg, kind, tables.as_deref(), seed)?;
            let metrics = compute_metrics(&record, cfg)?;
            let cost = with_traces.then_some(record.cost);
            Ok::<_, assoc_core::Error>((metrics, cost))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut results = Vec::with_capacity(kinds.len());
    let mut traces = with_traces.then(|| Vec::with_capacity(kinds.len()));
    for (p, &kind) in kinds.iter().enumerate() {
        let chunk = &episodes[p * seeds.len()..(p + 1) * seeds.len()];
        let per_seed: Vec<Metrics> = chunk.iter().map(|(m, _)| m.clone()).collect();
        if let Some(traces) = traces.as_mut() {
            let mut mean = vec![0.0f64; cfg.horizon];
            for (_, cost) in chunk {
                let cost = cost.as_ref().expect("traces requested");
                for (acc, &c) in mean.iter_mut().zip(cost) {
                    *acc += c;
                }
            }
            for acc in &mut mean {
                *acc /= seeds.len() as f64;
            }
            traces.push(CostTrace {
                policy: kind,
                mean_cost: mean,
            });
        }
        let summary = MetricsSummary::from_metrics(kind, &per_seed)?;
        results.push(PolicyResult {
            policy: kind,
            per_seed,
            summary,
        });
    }
    Ok(ExperimentOutput {
        results,
        traces,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use assoc_core::{run_experiment, MbsParams, OverflowPolicy};

    fn small_cfg() -> SystemConfig {
        SystemConfig {
            mini_slots: 2,
            max_arrival: 3,
            arrival_pmf: vec![0.55, 0.15, 0.15, 0.15],
            mbs: vec![
                MbsParams { rate: 0.6, holding_cost: 2.0 },
                MbsParams { rate: 0.5, holding_cost: 1.5 },
            ],
            buffer: 12,
            horizon: 400,
            warmup: 200,
            overflow: OverflowPolicy::DropUser,
        }
    }

    fn metric_bits(results: &[PolicyResult]) -> Vec<u64> {
        results
            .iter()
            .flat_map(|r| r.per_seed.iter())
            .flat_map(|m| {
                [
                    m.avg_cost.to_bits(),
                    m.avg_delay.unwrap_or(-1.0).to_bits(),
                    m.avg_throughput.unwrap_or(-1.0).to_bits(),
                    m.jfi.unwrap_or(-1.0).to_bits(),
                ]
            })
            .collect()
    }

    #[test]
    fn parallel_matches_the_sequential_reference_bit_for_bit() {
        let cfg = small_cfg();
        let seeds: Vec<u64> = (0..4).collect();
        let solver = WhittleSolverConfig::default();
        let sequential = run_experiment(&cfg, &PolicyKind::ALL, &seeds, &solver).unwrap();
        let parallel = run_parallel(&cfg, &PolicyKind::ALL, &seeds, &solver, false).unwrap();
        assert_eq!(metric_bits(&sequential), metric_bits(&parallel.results));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = small_cfg();
        let seeds: Vec<u64> = (0..3).collect();
        let solver = WhittleSolverConfig::default();
        let run_in_pool = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_parallel(&cfg, &PolicyKind::ALL, &seeds, &solver, true).unwrap())
        };
        let one = run_in_pool(1);
        let four = run_in_pool(4);
        assert_eq!(metric_bits(&one.results), metric_bits(&four.results));
        let bits = |t: &Vec<CostTrace>| -> Vec<u64> {
            t.iter()
                .flat_map(|tr| tr.mean_cost.iter().map(|c| c.to_bits()))
                .collect()
        };
        assert_eq!(
            bits(one.traces.as_ref().unwrap()),
            bits(four.traces.as_ref().unwrap())
        );
    }

    #[test]
    fn traces_average_the_recorded_costs() {
        let cfg = small_cfg();
        let seeds = [7u64, 11];
        let solver = WhittleSolverConfig::default();
        let out = run_parallel(&cfg, &[PolicyKind::Load], &seeds, &solver, true).unwrap();
        let trace = &out.traces.as_ref().unwrap()[0];
        let records: Vec<_> = seeds
            .iter()
            .map(|&s| assoc_core::run_episode(&cfg, PolicyKind::Load, None, s).unwrap())
            .collect();
        for n in [0usize, 137, 399] {
            let expect = (records[0].cost[n] + records[1].cost[n]) / 2.0;
            assert!((trace.mean_cost[n] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn moving_average_handles_the_leading_ramp() {
        let series = [2.0, 4.0, 6.0, 8.0];
        let ma = moving_average(&series, 2);
        assert_eq!(ma, vec![2.0, 3.0, 5.0, 7.0]);
        let ma1 = moving_average(&series, 1);
        assert_eq!(ma1, series.to_vec());
    }
}
