//! Artifact serialization: CSV/JSON writers and atomic file output.

use crate::runner::CostTrace;
use anyhow::{Context, Result};
use assoc_core::{IndexTable, PolicyResult, SummaryStat};
use serde_json::json;
use std::path::Path;

/// Window (slots) of the smoothed cost trace column.
pub const TRACE_MA_WINDOW: usize = 100;

/// Writes `bytes` to `path` atomically (temp file + rename), creating
/// parent directories as needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
    }
    let dir = parent.map(Path::to_path_buf).unwrap_or_else(|| ".".into());
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("cannot create temp file in {}", dir.display()))?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Per-episode metrics as CSV with columns
/// `policy,seed,avg_cost,avg_delay,avg_throughput,jfi`.
pub fn metrics_csv(results: &[PolicyResult], seeds: &[u64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["policy", "seed", "avg_cost", "avg_delay", "avg_throughput", "jfi"])?;
    for r in results {
        anyhow::ensure!(
            r.per_seed.len() == seeds.len(),
            "metrics rows do not match the seed list"
        );
        for (m, &seed) in r.per_seed.iter().zip(seeds) {
            w.write_record([
                r.policy.name().to_string(),
                seed.to_string(),
                format!("{}", m.avg_cost),
                fmt_opt(m.avg_delay),
                fmt_opt(m.avg_throughput),
                fmt_opt(m.jfi),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn stat_json(stat: &SummaryStat) -> serde_json::Value {
    json!({ "mean": stat.mean, "stderr": stat.stderr, "n": stat.n })
}

/// Cross-seed summary (mean/standard error per metric per policy) as JSON.
pub fn summary_json(results: &[PolicyResult]) -> serde_json::Value {
    json!({
        "policies": results.iter().map(|r| {
            let s = &r.summary;
            json!({
                "policy": r.policy.name(),
                "episodes": s.episodes,
                "avg_cost": stat_json(&s.avg_cost),
                "avg_delay": s.avg_delay.as_ref().map(stat_json),
                "avg_throughput": s.avg_throughput.as_ref().map(stat_json),
                "jfi": s.jfi.as_ref().map(stat_json),
            })
        }).collect::<Vec<_>>()
    })
}

/// Index tables as CSV with columns `mbs_id,state,index,exact_flag`.
pub fn index_csv(tables: &[IndexTable]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mbs_id", "state", "index", "exact_flag"])?;
    for table in tables {
        for x in 0..table.len() {
            w.write_record([
                table.mbs_index().to_string(),
                x.to_string(),
                format!("{}", table.index_at(x)),
                (table.is_exact(x) as u8).to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Cost traces as CSV with columns `policy,slot,cost,ma100` (raw per-slot
/// mean over seeds plus a 100-slot trailing moving average).
pub fn trace_csv(traces: &[CostTrace]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["policy", "slot", "cost", "ma100"])?;
    for t in traces {
        let ma = t.moving_average(TRACE_MA_WINDOW);
        for (slot, (&c, &m)) in t.mean_cost.iter().zip(&ma).enumerate() {
            w.write_record([
                t.policy.name().to_string(),
                slot.to_string(),
                format!("{c}"),
                format!("{m}"),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One reference-vs-obtained comparison line.
#[derive(Debug, Clone)]
pub struct Comparison {
    /// Preset the line belongs to.
    pub preset: String,
    /// Sweep-point label.
    pub case: String,
    /// Metric compared (for example `avg_delay`).
    pub metric: String,
    /// Policy name.
    pub policy: String,
    /// Reference value, when one exists for this line.
    pub reference: Option<f64>,
    /// Measured value.
    pub obtained: f64,
    /// |obtained − reference| / |reference|.
    pub rel_err: Option<f64>,
    /// Whether this line satisfies its acceptance rule.
    pub ok: bool,
    /// The rule the line was checked against.
    pub rule: String,
}

/// Comparison lines as CSV.
pub fn comparison_csv(rows: &[Comparison]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "preset", "case", "metric", "policy", "reference", "obtained", "rel_err", "status", "rule",
    ])?;
    for r in rows {
        w.write_record([
            r.preset.clone(),
            r.case.clone(),
            r.metric.clone(),
            r.policy.clone(),
            fmt_opt(r.reference),
            format!("{}", r.obtained),
            fmt_opt(r.rel_err),
            if r.ok { "ok" } else { "MISMATCH" }.to_string(),
            r.rule.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
