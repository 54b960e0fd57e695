//! Named experiment presets: the exact parameter sets of the reference
//! figures and tables, including sweep expansion.
//!
//! Two caption construction rules are corrected here, with evidence in the
//! project ledger: the delay/throughput/fairness-table rate rule uses slope
//! 0.005 (the published 0.05 is a 10× typo contradicted by the explicit
//! K=2 anchors and by the published results themselves), and the
//! cost-vs-K figure's rate rule uses slope 0.03 (the published 0.3 yields
//! negative service probabilities).

use crate::config::{ExperimentSpec, MbsDto, OverflowDto, SolverDto, SystemDto, SCHEMA_VERSION};
use anyhow::{bail, Result};
use assoc_core::PolicyKind;

/// All preset names, in presentation order.
pub const PRESET_NAMES: [&str; 12] = [
    "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "table1", "table2",
    "table3", "table4",
];

/// Default number of seeds a preset runs.
pub const DEFAULT_SEED_COUNT: usize = 10;

/// One concrete configuration of a preset (sweeps expand to several).
#[derive(Debug, Clone)]
pub struct PresetCase {
    /// Human-readable point label, e.g. `K=5` or `L=20`.
    pub label: String,
    /// Numeric sweep coordinate behind the label.
    pub param: usize,
    /// The full experiment document for this point.
    pub spec: ExperimentSpec,
}

/// What a preset's comparison against the reference values measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetGoal {
    /// Mean per-user delay compared row-by-row against reference values.
    Delay,
    /// Mean per-user throughput compared row-by-row.
    Throughput,
    /// Jain's fairness index compared row-by-row.
    Fairness,
    /// Mean post-warmup cost, checked for ordering (index policy strictly
    /// minimal, rate-only policy maximal) rather than absolute values.
    CostOrdering,
}

/// The comparison goal of each preset.
pub fn preset_goal(name: &str) -> Result<PresetGoal> {
    Ok(match name {
        "table1" | "table2" => PresetGoal::Delay,
        "table3" => PresetGoal::Throughput,
        "table4" => PresetGoal::Fairness,
        "fig2a" | "fig2b" | "fig3a" | "fig3b" | "fig4a" | "fig4b" | "fig5a" | "fig5b" => {
            PresetGoal::CostOrdering
        }
        other => bail!("unknown preset `{other}` (expected one of {PRESET_NAMES:?})"),
    })
}

fn pmf(p0: f64, pj: f64, m: usize) -> Vec<f64> {
    let mut v = vec![pj; m + 1];
    v[0] = p0;
    v
}

fn mbs(rates: &[f64], costs: &[f64]) -> Vec<MbsDto> {
    assert_eq!(rates.len(), costs.len());
    rates
        .iter()
        .zip(costs)
        .map(|(&rate, &holding_cost)| MbsDto { rate, holding_cost })
        .collect()
}

fn spec(preset: &str, label: &str, param: usize, system: SystemDto) -> PresetCase {
    PresetCase {
        label: label.to_string(),
        param,
        spec: ExperimentSpec {
            version: SCHEMA_VERSION,
            preset: Some(preset.to_string()),
            system,
            policies: PolicyKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            seeds: (0..DEFAULT_SEED_COUNT as u64).collect(),
            solver: SolverDto::default(),
            output_dir: None,
        },
    }
}

fn base_system(l: usize, m: usize, p0: f64, pj: f64, mbs: Vec<MbsDto>) -> SystemDto {
    SystemDto {
        mini_slots: l,
        max_arrival: m,
        arrival_pmf: pmf(p0, pj, m),
        mbs,
        buffer: 200,
        horizon: 20_000,
        warmup: 10_000,
        overflow: OverflowDto::DropUser,
    }
}

/// Rates/costs of the delay-vs-K family: anchors `[0.77, 0.765]` /
/// `[70, 69.75]`, extended by `r_i = 0.775 − 0.005·i`, `C_i = 70.25 −
/// 0.25·i` for the i-th mBS (1-based), i ≥ 3.
fn table1_mbs(k: usize) -> Vec<MbsDto> {
    let mut rates = vec![0.77, 0.765];
    let mut costs = vec![70.0, 69.75];
    for i in 3..=k {
        rates.push(0.775 - 0.005 * i as f64);
        costs.push(70.25 - 0.25 * i as f64);
    }
    rates.truncate(k);
    costs.truncate(k);
    mbs(&rates, &costs)
}

/// Rates/costs of the cost-vs-K sweep: anchors for K=5, extended by
/// `r_i = 0.81 − 0.03·i`, `C_i = 94 − 4·i` (1-based i ≥ 6).
fn fig5b_mbs(k: usize) -> Vec<MbsDto> {
    let mut rates = vec![0.78, 0.75, 0.72, 0.69, 0.66];
    let mut costs = vec![90.0, 86.0, 82.0, 78.0, 74.0];
    for i in 6..=k {
        rates.push(0.81 - 0.03 * i as f64);
        costs.push(94.0 - 4.0 * i as f64);
    }
    rates.truncate(k);
    costs.truncate(k);
    mbs(&rates, &costs)
}

/// Expands a preset into its concrete sweep points.
pub fn preset_cases(name: &str) -> Result<Vec<PresetCase>> {
    let cases = match name {
        "fig2a" => vec![spec(
            name,
            "C=[95..32]",
            0,
            base_system(
                20,
                100,
                0.6,
                0.004,
                mbs(
                    &[0.78, 0.65, 0.56, 0.50, 0.45],
                    &[95.0, 75.0, 58.0, 40.0, 32.0],
                ),
            ),
        )],
        "fig2b" => vec![spec(
            name,
            "C=[32..95]",
            0,
            base_system(
                20,
                100,
                0.6,
                0.004,
                mbs(
                    &[0.78, 0.65, 0.56, 0.50, 0.45],
                    &[32.0, 40.0, 58.0, 75.0, 95.0],
                ),
            ),
        )],
        "fig3a" => vec![spec(
            name,
            "K=8,L=20",
            0,
            base_system(
                20,
                100,
                0.4,
                0.006,
                mbs(
                    &[0.78, 0.70, 0.65, 0.60, 0.56, 0.50, 0.48, 0.45],
                    &[95.0, 80.0, 72.0, 65.0, 58.0, 47.0, 40.0, 32.0],
                ),
            ),
        )],
        "fig3b" => vec![spec(
            name,
            "K=8,L=10",
            0,
            base_system(
                10,
                150,
                0.7,
                0.002,
                mbs(
                    &[0.78, 0.70, 0.65, 0.60, 0.56, 0.50, 0.48, 0.45],
                    &[85.0, 75.0, 68.0, 63.0, 57.0, 49.0, 45.0, 36.0],
                ),
            ),
        )],
        "fig4a" => vec![spec(
            name,
            "K=10,L=15",
            0,
            base_system(
                15,
                100,
                0.4,
                0.006,
                mbs(
                    &[0.78, 0.75, 0.70, 0.65, 0.58, 0.52, 0.48, 0.46, 0.44, 0.42],
                    &[95.0, 85.0, 75.0, 65.0, 58.0, 47.0, 40.0, 32.0, 28.0, 25.0],
                ),
            ),
        )],
        "fig4b" => [20usize, 45, 70, 95, 120]
            .iter()
            .map(|&l| {
                spec(
                    name,
                    &format!("L={l}"),
                    l,
                    base_system(
                        l,
                        100,
                        0.6,
                        0.004,
                        mbs(
                            &[0.78, 0.65, 0.56, 0.50, 0.45],
                            &[95.0, 75.0, 58.0, 40.0, 32.0],
                        ),
                    ),
                )
            })
            .collect(),
        "fig5a" => [100usize, 125, 150, 175, 200]
            .iter()
            .map(|&m| {
                let mut system = base_system(
                    30,
                    m,
                    0.8,
                    0.2 / m as f64,
                    mbs(
                        &[0.78, 0.70, 0.65, 0.60, 0.52, 0.46],
                        &[92.0, 81.0, 70.0, 63.0, 52.0, 40.0],
                    ),
                );
                system.buffer = 250;
                spec(name, &format!("M={m}"), m, system)
            })
            .collect(),
        "fig5b" => (5usize..=15)
            .map(|k| {
                spec(
                    name,
                    &format!("K={k}"),
                    k,
                    base_system(30, 100, 0.8, 0.002, fig5b_mbs(k)),
                )
            })
            .collect(),
        "table1" | "table3" | "table4" => (2usize..=10)
            .map(|k| {
                spec(
                    name,
                    &format!("K={k}"),
                    k,
                    base_system(35, 100, 0.3, 0.007, table1_mbs(k)),
                )
            })
            .collect(),
        "table2" => (15usize..=55)
            .step_by(5)
            .map(|l| {
                spec(
                    name,
                    &format!("L={l}"),
                    l,
                    base_system(
                        l,
                        100,
                        0.6,
                        0.004,
                        mbs(
                            &[0.77, 0.76, 0.75, 0.74, 0.73],
                            &[70.0, 69.5, 69.0, 68.5, 68.0],
                        ),
                    ),
                )
            })
            .collect(),
        other => bail!("unknown preset `{other}` (expected one of {PRESET_NAMES:?})"),
    };
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Caption constants, hardcoded independently of the builders.
    #[test]
    fn preset_parameters_match_the_captioned_values() {
        let fig2a = &preset_cases("fig2a").unwrap()[0].spec.system;
        assert_eq!(fig2a.mini_slots, 20);
        assert_eq!(fig2a.max_arrival, 100);
        assert_eq!(fig2a.arrival_pmf[0], 0.6);
        assert!(fig2a.arrival_pmf[1..].iter().all(|&p| p == 0.004));
        assert_eq!(
            fig2a.mbs.iter().map(|m| m.rate).collect::<Vec<_>>(),
            vec![0.78, 0.65, 0.56, 0.50, 0.45]
        );
        assert_eq!(
            fig2a.mbs.iter().map(|m| m.holding_cost).collect::<Vec<_>>(),
            vec![95.0, 75.0, 58.0, 40.0, 32.0]
        );

        let fig2b = &preset_cases("fig2b").unwrap()[0].spec.system;
        assert_eq!(
            fig2b.mbs.iter().map(|m| m.holding_cost).collect::<Vec<_>>(),
            vec![32.0, 40.0, 58.0, 75.0, 95.0]
        );

        let fig3b = &preset_cases("fig3b").unwrap()[0].spec.system;
        assert_eq!((fig3b.mini_slots, fig3b.max_arrival), (10, 150));
        assert_eq!(fig3b.arrival_pmf[0], 0.7);
        assert!(fig3b.arrival_pmf[1..].iter().all(|&p| p == 0.002));
        assert_eq!(
            fig3b.mbs.iter().map(|m| m.holding_cost).collect::<Vec<_>>(),
            vec![85.0, 75.0, 68.0, 63.0, 57.0, 49.0, 45.0, 36.0]
        );

        let fig4a = &preset_cases("fig4a").unwrap()[0].spec.system;
        assert_eq!(fig4a.mbs.len(), 10);
        assert_eq!(fig4a.mini_slots, 15);
        assert_eq!(fig4a.mbs[9].rate, 0.42);
        assert_eq!(fig4a.mbs[9].holding_cost, 25.0);

        let fig5a = preset_cases("fig5a").unwrap();
        assert_eq!(
            fig5a.iter().map(|c| c.param).collect::<Vec<_>>(),
            vec![100, 125, 150, 175, 200]
        );
        for case in &fig5a {
            let s = &case.spec.system;
            assert_eq!(s.buffer, 250);
            assert_eq!(s.mini_slots, 30);
            assert_eq!(s.arrival_pmf[0], 0.8);
            assert_eq!(s.arrival_pmf[1], 0.2 / s.max_arrival as f64);
        }
    }

    /// The two corrected construction rules still hit their captioned
    /// anchors exactly.
    #[test]
    fn corrected_slopes_match_the_published_anchors() {
        // K=2 anchors of the delay-table family lie on 0.775 − 0.005·i.
        let t1 = preset_cases("table1").unwrap();
        let k2 = &t1[0].spec.system.mbs;
        assert_eq!(k2[0].rate, 0.77);
        assert_eq!(k2[1].rate, 0.765);
        assert!((k2[0].rate - (0.775 - 0.005 * 1.0)).abs() < 1e-15);
        assert!((k2[1].rate - (0.775 - 0.005 * 2.0)).abs() < 1e-15);
        let k10 = &t1[8].spec.system.mbs;
        assert_eq!(k10.len(), 10);
        assert!((k10[9].rate - 0.725).abs() < 1e-12);
        assert!((k10[9].holding_cost - 67.75).abs() < 1e-12);
        // All rates must be valid service probabilities.
        for case in t1.iter().chain(preset_cases("fig5b").unwrap().iter()) {
            for m in &case.spec.system.mbs {
                assert!(m.rate > 0.0 && m.rate < 1.0, "invalid rate {}", m.rate);
            }
        }
        // K=5 anchors of the cost-vs-K family lie on 0.81 − 0.03·i.
        let f5 = preset_cases("fig5b").unwrap();
        for (i, m) in f5[0].spec.system.mbs.iter().enumerate() {
            assert!((m.rate - (0.81 - 0.03 * (i + 1) as f64)).abs() < 1e-12);
        }
        let k15 = &f5[10].spec.system.mbs;
        assert!((k15[14].rate - (0.81 - 0.03 * 15.0)).abs() < 1e-12);
        assert_eq!(k15[14].holding_cost, 94.0 - 4.0 * 15.0);
    }

    #[test]
    fn sweeps_expand_to_the_captioned_ranges() {
        assert_eq!(preset_cases("table1").unwrap().len(), 9);
        assert_eq!(
            preset_cases("table2")
                .unwrap()
                .iter()
                .map(|c| c.param)
                .collect::<Vec<_>>(),
            vec![15, 20, 25, 30, 35, 40, 45, 50, 55]
        );
        assert_eq!(preset_cases("fig5b").unwrap().len(), 11);
        assert_eq!(
            preset_cases("fig4b")
                .unwrap()
                .iter()
                .map(|c| c.param)
                .collect::<Vec<_>>(),
            vec![20, 45, 70, 95, 120]
        );
        // The throughput/fairness tables reuse the delay table's runs.
        let t1 = preset_cases("table1").unwrap();
        let t3 = preset_cases("table3").unwrap();
        assert_eq!(t1.len(), t3.len());
        for (a, b) in t1.iter().zip(t3.iter()) {
            assert_eq!(a.spec.system, b.spec.system);
        }
    }

    #[test]
    fn every_preset_resolves() {
        for name in PRESET_NAMES {
            preset_goal(name).unwrap();
            for case in preset_cases(name).unwrap() {
                case.spec.resolve().unwrap();
            }
        }
        assert!(preset_cases("fig9z").is_err());
    }
}
