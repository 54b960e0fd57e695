//! Subcommand implementations: index tables, free-form simulation, preset
//! reproduction against reference values, and the verification suite.

use crate::config::{ExperimentSpec, MethodDto};
use crate::output::{
    comparison_csv, index_csv, metrics_csv, summary_json, trace_csv, write_atomic, Comparison,
    TRACE_MA_WINDOW,
};
use crate::plot::{line_chart, Series};
use crate::presets::{preset_cases, preset_goal, PresetGoal};
use crate::reference::{reference_value, row_for, table_for_preset};
use crate::runner::{build_index_tables, run_parallel, ExperimentOutput};
use crate::suite::run_suite;
use anyhow::{ensure, Context, Result};
use assoc_core::{index_table, PolicyKind, PolicyResult, SummaryStat};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Command-line overrides applied on top of a loaded config document.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    /// Replace the seed list with `0..n`.
    pub seed_count: Option<usize>,
    /// Replace the episode length (slots).
    pub horizon: Option<usize>,
    /// Replace the warmup length (slots).
    pub warmup: Option<usize>,
    /// Replace the per-mBS buffer bound.
    pub buffer: Option<usize>,
    /// Replace the solver's indifference band.
    pub gamma: Option<f64>,
    /// Replace the solver's exact-state grid step.
    pub grid_step: Option<usize>,
    /// Replace the index computation method.
    pub method: Option<MethodDto>,
}

/// Applies overrides in place (validation happens at resolve time).
pub fn apply_overrides(spec: &mut ExperimentSpec, o: &Overrides) {
    if let Some(n) = o.seed_count {
        spec.seeds = (0..n as u64).collect();
    }
    if let Some(h) = o.horizon {
        spec.system.horizon = h;
    }
    if let Some(w) = o.warmup {
        spec.system.warmup = w;
    }
    if let Some(b) = o.buffer {
        spec.system.buffer = b;
    }
    if let Some(g) = o.gamma {
        spec.solver.gamma = g;
    }
    if let Some(s) = o.grid_step {
        spec.solver.grid_step = Some(s);
        spec.solver.grid = None;
    }
    if let Some(m) = o.method {
        spec.solver.method = m;
    }
}

fn fmt_stat(s: &SummaryStat, prec: usize) -> String {
    match s.stderr {
        Some(e) => format!("{:.prec$} ± {:.prec$}", s.mean, e),
        None => format!("{:.prec$}", s.mean),
    }
}

fn fmt_stat_opt(s: Option<&SummaryStat>, prec: usize) -> String {
    s.map(|s| fmt_stat(s, prec)).unwrap_or_else(|| "-".into())
}

/// Fixed-width cross-seed summary table.
pub fn summary_table(results: &[PolicyResult]) -> String {
    let mut out = format!(
        "{:<11} {:>20} {:>18} {:>18} {:>18}\n",
        "policy", "avg_cost", "avg_delay", "avg_throughput", "jfi"
    );
    for r in results {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{:<11} {:>20} {:>18} {:>18} {:>18}",
            r.policy.name(),
            fmt_stat(&s.avg_cost, 2),
            fmt_stat_opt(s.avg_delay.as_ref(), 3),
            fmt_stat_opt(s.avg_throughput.as_ref(), 3),
            fmt_stat_opt(s.jfi.as_ref(), 4),
        );
    }
    out
}

fn resolve_out(cli_out: Option<&Path>, spec_out: &Option<String>) -> Option<PathBuf> {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| spec_out.as_ref().map(PathBuf::from))
}

/// `index`: build the per-mBS Whittle tables and report/write them.
pub fn cmd_index(
    spec: &ExperimentSpec,
    mbs: Option<usize>,
    cli_out: Option<&Path>,
) -> Result<String> {
    let resolved = spec.resolve()?;
    let tables = match mbs {
        Some(i) => {
            ensure!(
                i < resolved.system.num_mbs(),
                "mbs index {i} out of range (config has {})",
                resolved.system.num_mbs()
            );
            vec![index_table(&resolved.system, i, &resolved.solver)?]
        }
        None => build_index_tables(&resolved.system, &resolved.solver)?,
    };
    let mut text = String::new();
    for t in &tables {
        let b = t.len() - 1;
        let exact = (0..t.len()).filter(|&x| t.is_exact(x)).count();
        let _ = writeln!(
            text,
            "mBS {}: {} states, {} exact grid states; index[0]={:.4}, index[{}]={:.4}, index[{b}]={:.4}",
            t.mbs_index(),
            t.len(),
            exact,
            t.index_at(0),
            b / 2,
            t.index_at(b / 2),
            t.index_at(b),
        );
    }
    if let Some(dir) = resolve_out(cli_out, &spec.output_dir) {
        let path = dir.join("index.csv");
        write_atomic(&path, index_csv(&tables)?.as_bytes())?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    Ok(text)
}

/// `simulate`: run the configured policies and write metric artifacts.
pub fn cmd_simulate(
    spec: &ExperimentSpec,
    with_traces: bool,
    cli_out: Option<&Path>,
) -> Result<String> {
    let resolved = spec.resolve()?;
    let out = run_parallel(
        &resolved.system,
        &resolved.policies,
        &resolved.seeds,
        &resolved.solver,
        with_traces,
    )?;
    let mut text = summary_table(&out.results);
    if let Some(dir) = resolve_out(cli_out, &spec.output_dir) {
        let metrics_path = dir.join("metrics.csv");
        write_atomic(&metrics_path, metrics_csv(&out.results, &resolved.seeds)?.as_bytes())?;
        let summary_path = dir.join("summary.json");
        write_atomic(
            &summary_path,
            serde_json::to_string_pretty(&summary_json(&out.results))?.as_bytes(),
        )?;
        let _ = writeln!(text, "wrote {}", metrics_path.display());
        let _ = writeln!(text, "wrote {}", summary_path.display());
        if let Some(traces) = &out.traces {
            let path = dir.join("traces.csv");
            write_atomic(&path, trace_csv(traces)?.as_bytes())?;
            let _ = writeln!(text, "wrote {}", path.display());
        }
        if let Some(tables) = &out.tables {
            let path = dir.join("index.csv");
            write_atomic(&path, index_csv(tables)?.as_bytes())?;
            let _ = writeln!(text, "wrote {}", path.display());
        }
    }
    Ok(text)
}

fn goal_metric(goal: PresetGoal) -> &'static str {
    match goal {
        PresetGoal::Delay => "avg_delay",
        PresetGoal::Throughput => "avg_throughput",
        PresetGoal::Fairness => "jfi",
        PresetGoal::CostOrdering => "avg_cost",
    }
}

fn goal_label(goal: PresetGoal) -> &'static str {
    match goal {
        PresetGoal::Delay => "average delay (mini-slots)",
        PresetGoal::Throughput => "average throughput (packets per slot)",
        PresetGoal::Fairness => "Jain fairness index",
        PresetGoal::CostOrdering => "average cost per slot",
    }
}

fn param_axis(preset: &str) -> &'static str {
    match preset {
        "table2" | "fig4b" => "mini-slots per slot (L)",
        "fig5a" => "largest arrival batch (M)",
        _ => "number of mBSs (K)",
    }
}

fn goal_mean(goal: PresetGoal, r: &PolicyResult) -> Result<f64> {
    let s = &r.summary;
    Ok(match goal {
        PresetGoal::Delay => s.avg_delay.as_ref().context("no departures recorded")?.mean,
        PresetGoal::Throughput => {
            s.avg_throughput.as_ref().context("no departures recorded")?.mean
        }
        PresetGoal::Fairness => s.jfi.as_ref().context("no departures recorded")?.mean,
        PresetGoal::CostOrdering => s.avg_cost.mean,
    })
}

fn mean_for(means: &[(PolicyKind, f64)], kind: PolicyKind) -> Result<f64> {
    means
        .iter()
        .find(|(k, _)| *k == kind)
        .map(|&(_, v)| v)
        .with_context(|| format!("policy {} missing from the run", kind.name()))
}

/// Builds the comparison rows of one sweep point.
pub fn compare_case(
    preset: &str,
    goal: PresetGoal,
    param: usize,
    label: &str,
    results: &[PolicyResult],
) -> Result<Vec<Comparison>> {
    let metric = goal_metric(goal);
    let mut means = Vec::with_capacity(results.len());
    for r in results {
        means.push((r.policy, goal_mean(goal, r)?));
    }
    let row = table_for_preset(preset).and_then(|t| row_for(t, param));
    let mut rows = Vec::new();
    let base = |policy: &str, metric: &str| Comparison {
        preset: preset.into(),
        case: label.into(),
        metric: metric.into(),
        policy: policy.into(),
        reference: None,
        obtained: f64::NAN,
        rel_err: None,
        ok: true,
        rule: String::new(),
    };

    // Per-policy value rows.
    for &(kind, obtained) in &means {
        let mut c = base(kind.name(), metric);
        c.obtained = obtained;
        if let Some(row) = row {
            let reference = reference_value(row, kind);
            let rel = (obtained - reference).abs() / reference.abs();
            c.reference = Some(reference);
            c.rel_err = Some(rel);
            (c.ok, c.rule) = match goal {
                PresetGoal::Delay => (rel <= 0.05, "within 5% of reference".into()),
                PresetGoal::Fairness => (
                    (obtained - reference).abs() <= 0.005,
                    "within 0.005 of reference".into(),
                ),
                _ => (true, "informational".into()),
            };
        } else {
            c.rule = "informational".into();
        }
        rows.push(c);
    }

    // Goal rows on the measured policy ordering.
    let whittle = mean_for(&means, PolicyKind::Whittle)?;
    let others = |skip: PolicyKind| {
        means
            .iter()
            .filter(move |(k, _)| *k != skip)
            .map(|&(_, v)| v)
    };
    match goal {
        PresetGoal::Delay => {
            let mut c = base("whittle", "row_minimum");
            c.obtained = whittle;
            c.ok = others(PolicyKind::Whittle).all(|v| whittle < v);
            c.rule = "lowest measured delay in the row".into();
            rows.push(c);
        }
        PresetGoal::Throughput | PresetGoal::Fairness => {
            let best = means.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
            let mut c = base("whittle", "row_maximum");
            c.obtained = whittle;
            c.ok = whittle >= 0.97 * best;
            c.rule = "within 3% of the measured row maximum".into();
            if let Some(row) = row {
                let ref_best = row.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                c.reference = Some(ref_best);
                c.rel_err = Some((whittle - ref_best).abs() / ref_best.abs());
            }
            rows.push(c);
        }
        PresetGoal::CostOrdering => {
            let snr = mean_for(&means, PolicyKind::Snr)?;
            let mut cmin = base("whittle", "strict_minimum");
            cmin.obtained = whittle;
            cmin.ok = others(PolicyKind::Whittle).all(|v| whittle < v);
            cmin.rule = "strictly lowest measured cost".into();
            rows.push(cmin);
            let mut cmax = base("snr", "maximum");
            cmax.obtained = snr;
            cmax.ok = others(PolicyKind::Snr).all(|v| snr >= v);
            cmax.rule = "highest measured cost".into();
            rows.push(cmax);
        }
    }
    Ok(rows)
}

fn render_case(label: &str, rows: &[Comparison]) -> String {
    let mut out = format!("case {label}\n");
    let has_reference = rows.iter().any(|r| r.reference.is_some() && r.rel_err.is_some());
    if has_reference {
        let _ = writeln!(
            out,
            "  {:<11} {:>12} {:>12} {:>9}  {}",
            "policy", "reference", "measured", "rel_err", "status"
        );
    }
    for r in rows {
        match (r.reference, r.rel_err) {
            (Some(reference), Some(rel)) if r.metric != "row_maximum" => {
                let _ = writeln!(
                    out,
                    "  {:<11} {:>12.4} {:>12.4} {:>8.2}%  {}",
                    r.policy,
                    reference,
                    r.obtained,
                    rel * 100.0,
                    if r.ok { "ok" } else { "MISMATCH" }
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "  check {} [{}] = {:.4}: {} ({})",
                    r.metric,
                    r.policy,
                    r.obtained,
                    if r.ok { "ok" } else { "MISMATCH" },
                    r.rule
                );
            }
        }
    }
    out
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

fn downsample(values: &[f64], max_points: usize) -> Vec<(f64, f64)> {
    let step = (values.len() / max_points).max(1);
    values
        .iter()
        .enumerate()
        .step_by(step)
        .map(|(i, &v)| (i as f64, v))
        .collect()
}

/// `reproduce`: run one preset, compare it against the reference values,
/// and write comparison/metric/plot artifacts under `<out>/<preset>/`.
///
/// Returns the report text and whether every comparison rule held.
pub fn cmd_reproduce(
    preset: &str,
    seed_count: usize,
    cli_out: Option<&Path>,
) -> Result<(String, bool)> {
    ensure!(seed_count >= 1, "seed count must be at least 1");
    let goal = preset_goal(preset)?;
    let cases = preset_cases(preset)?;
    let dir = cli_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("out"))
        .join(preset);
    let single_case = cases.len() == 1;

    let mut text = format!(
        "preset {preset}: {} across {} case(s), {} seed(s)\n",
        goal_label(goal),
        cases.len(),
        seed_count
    );
    let mut comparisons = Vec::new();
    let mut sweep: Vec<(usize, Vec<(PolicyKind, f64)>)> = Vec::new();
    let mut trace_svg: Option<String> = None;

    for case in &cases {
        let mut spec = case.spec.clone();
        spec.seeds = (0..seed_count as u64).collect();
        let resolved = spec.resolve()?;
        let with_traces = single_case && goal == PresetGoal::CostOrdering;
        let out: ExperimentOutput = run_parallel(
            &resolved.system,
            &resolved.policies,
            &resolved.seeds,
            &resolved.solver,
            with_traces,
        )?;
        let rows = compare_case(preset, goal, case.param, &case.label, &out.results)?;
        text.push_str(&render_case(&case.label, &rows));
        comparisons.extend(rows);

        let mut means = Vec::new();
        for r in &out.results {
            means.push((r.policy, goal_mean(goal, r)?));
        }
        sweep.push((case.param, means));

        write_atomic(
            &dir.join(format!("metrics-{}.csv", sanitize(&case.label))),
            metrics_csv(&out.results, &resolved.seeds)?.as_bytes(),
        )?;
        if let Some(traces) = &out.traces {
            write_atomic(&dir.join("traces.csv"), trace_csv(traces)?.as_bytes())?;
            let series: Vec<Series> = traces
                .iter()
                .map(|t| Series {
                    label: t.policy.name().into(),
                    points: downsample(&t.moving_average(TRACE_MA_WINDOW), 250),
                })
                .collect();
            trace_svg = Some(line_chart(
                &format!("{preset}: smoothed average cost"),
                "slot",
                &format!("cost ({TRACE_MA_WINDOW}-slot moving average)"),
                &series,
            ));
        }
    }

    write_atomic(&dir.join("comparison.csv"), comparison_csv(&comparisons)?.as_bytes())?;
    let svg = match trace_svg {
        Some(svg) => svg,
        None => {
            let series: Vec<Series> = PolicyKind::ALL
                .iter()
                .map(|&kind| Series {
                    label: kind.name().into(),
                    points: sweep
                        .iter()
                        .filter_map(|(param, means)| {
                            mean_for(means, kind).ok().map(|v| (*param as f64, v))
                        })
                        .collect(),
                })
                .collect();
            line_chart(
                &format!("{preset}: {}", goal_label(goal)),
                param_axis(preset),
                goal_label(goal),
                &series,
            )
        }
    };
    write_atomic(&dir.join("plot.svg"), svg.as_bytes())?;

    let ok = comparisons.iter().all(|c| c.ok);
    let bad = comparisons.iter().filter(|c| !c.ok).count();
    let _ = writeln!(
        text,
        "artifacts under {}\nREPRODUCE {preset}: {} ({} of {} comparison lines ok)",
        dir.display(),
        if ok { "OK" } else { "MISMATCH" },
        comparisons.len() - bad,
        comparisons.len()
    );
    Ok((text, ok))
}

/// `verify`: run the structural verification suite.
///
/// Returns the rendered report and whether every check passed.
pub fn cmd_verify() -> Result<(String, bool)> {
    let report = run_suite()?;
    Ok((report.render(), report.all_passed()))
}
