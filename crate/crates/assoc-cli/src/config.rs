//! Versioned JSON experiment configuration: parsing, validation, and the
//! mapping onto core types.

use anyhow::{bail, Context, Result};
use assoc_core::{
    IndexMethod, MbsParams, OverflowPolicy, PolicyKind, SystemConfig, WhittleSolverConfig,
};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

/// Schema version accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// A full experiment document: one network configuration plus the policies,
/// seeds, and solver settings to run it with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Schema version; must equal [`SCHEMA_VERSION`].
    pub version: u32,
    /// Name of the preset this spec was derived from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Network and episode parameters.
    pub system: SystemDto,
    /// Policies to simulate, by name (`random`, `load`, `snr`,
    /// `throughput`, `mixed`, `whittle`).
    pub policies: Vec<String>,
    /// Episode seeds; one episode per (policy, seed).
    pub seeds: Vec<u64>,
    /// Index-solver settings (used only when `whittle` is in `policies`).
    #[serde(default)]
    pub solver: SolverDto,
    /// Default output directory for artifacts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

/// Serialized form of [`SystemConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDto {
    /// Mini-slots per slot (`L`).
    pub mini_slots: usize,
    /// Largest batch an arriving user may bring (`M`).
    pub max_arrival: usize,
    /// Batch-size pmf `p_0..p_M`; must sum to 1.
    pub arrival_pmf: Vec<f64>,
    /// Per-mBS parameters, one entry per base station.
    pub mbs: Vec<MbsDto>,
    /// Per-mBS buffer bound `B` (packets).
    pub buffer: usize,
    /// Slots per episode.
    pub horizon: usize,
    /// Leading slots excluded from cost averaging.
    pub warmup: usize,
    /// What happens when an admitted batch exceeds the buffer room.
    #[serde(default)]
    pub overflow: OverflowDto,
}

/// Serialized form of [`MbsParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MbsDto {
    /// Per-mini-slot packet service probability, in (0, 1).
    pub rate: f64,
    /// Holding cost per packet per slot, positive.
    pub holding_cost: f64,
}

/// Buffer-overflow behavior on admission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowDto {
    /// Reject the whole user when its batch does not fit (default; this is
    /// the behavior the reference delay tables are consistent with).
    #[default]
    DropUser,
    /// Admit as many packets as fit and discard the rest.
    Truncate,
}

/// Serialized index-solver settings; every field has the core default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverDto {
    /// Step size of the iterative index scheme.
    pub gamma: f64,
    /// Convergence threshold of the iterative scheme.
    pub tol: f64,
    /// Iteration cap of the iterative scheme.
    pub max_iter: usize,
    /// Spacing of the exact-solve grid `{0, step, 2·step, …, B − M}`;
    /// ignored when `grid` is given explicitly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<usize>,
    /// Explicit exact-solve grid (sorted, starting at 0, at most `B − M`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    /// Index solver: `direct` (closed form) or `iterative`.
    pub method: MethodDto,
}

impl Default for SolverDto {
    fn default() -> Self {
        let core = WhittleSolverConfig::default();
        SolverDto {
            gamma: core.gamma,
            tol: core.tol,
            max_iter: core.max_iter,
            grid_step: None,
            grid: None,
            method: MethodDto::Direct,
        }
    }
}

/// Index-computation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodDto {
    /// Closed form from the affine dependence of the values on λ.
    #[default]
    Direct,
    /// Fixed-point iteration on λ.
    Iterative,
}

impl FromStr for MethodDto {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(MethodDto::Direct),
            "iterative" => Ok(MethodDto::Iterative),
            other => bail!("unknown method `{other}` (expected `direct` or `iterative`)"),
        }
    }
}

/// A spec resolved against core types, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedSpec {
    /// Validated network configuration.
    pub system: SystemConfig,
    /// Parsed policy list, order preserved.
    pub policies: Vec<PolicyKind>,
    /// Episode seeds.
    pub seeds: Vec<u64>,
    /// Validated solver settings with the grid made explicit.
    pub solver: WhittleSolverConfig,
}

impl SystemDto {
    /// Maps onto the core configuration (no validation).
    pub fn to_core(&self) -> SystemConfig {
        SystemConfig {
            mini_slots: self.mini_slots,
            max_arrival: self.max_arrival,
            arrival_pmf: self.arrival_pmf.clone(),
            mbs: self
                .mbs
                .iter()
                .map(|m| MbsParams {
                    rate: m.rate,
                    holding_cost: m.holding_cost,
                })
                .collect(),
            buffer: self.buffer,
            horizon: self.horizon,
            warmup: self.warmup,
            overflow: match self.overflow {
                OverflowDto::DropUser => OverflowPolicy::DropUser,
                OverflowDto::Truncate => OverflowPolicy::Truncate,
            },
        }
    }
}

impl SolverDto {
    /// Maps onto the core solver config for a given system (resolving
    /// `grid_step` into an explicit grid).
    pub fn to_core(&self, system: &SystemConfig) -> Result<WhittleSolverConfig> {
        let grid = match (&self.grid, self.grid_step) {
            (Some(g), _) => Some(g.clone()),
            (None, Some(step)) => {
                if step == 0 {
                    bail!("solver.grid_step must be positive");
                }
                if system.buffer < system.max_arrival {
                    bail!("buffer must be at least max_arrival");
                }
                Some((0..=system.buffer - system.max_arrival).step_by(step).collect())
            }
            (None, None) => None,
        };
        Ok(WhittleSolverConfig {
            gamma: self.gamma,
            tol: self.tol,
            max_iter: self.max_iter,
            grid,
            method: match self.method {
                MethodDto::Direct => IndexMethod::Direct,
                MethodDto::Iterative => IndexMethod::Iterative,
            },
        })
    }
}

impl ExperimentSpec {
    /// Validates the document and resolves it against core types.
    ///
    /// Every `model`-level invariant is enforced here (via
    /// [`SystemConfig::validate`]), plus the schema-level ones: version
    /// match, non-empty policy and seed lists, no duplicate policies, and a
    /// solver grid consistent with the buffer.
    pub fn resolve(&self) -> Result<ResolvedSpec> {
        if self.version != SCHEMA_VERSION {
            bail!(
                "config version {} not supported (expected {SCHEMA_VERSION})",
                self.version
            );
        }
        let system = self.system.to_core();
        system
            .validate()
            .map_err(|e| anyhow::anyhow!("invalid system config: {e}"))?;
        if self.policies.is_empty() {
            bail!("policies list must not be empty");
        }
        let mut policies = Vec::with_capacity(self.policies.len());
        for name in &self.policies {
            let kind: PolicyKind = name
                .parse()
                .map_err(|e| anyhow::anyhow!("invalid policy `{name}`: {e}"))?;
            if policies.contains(&kind) {
                bail!("duplicate policy `{name}`");
            }
            policies.push(kind);
        }
        if self.seeds.is_empty() {
            bail!("seeds list must not be empty");
        }
        let solver = self.solver.to_core(&system)?;
        solver
            .resolve_grid(&system)
            .map_err(|e| anyhow::anyhow!("invalid solver grid: {e}"))?;
        Ok(ResolvedSpec {
            system,
            policies,
            seeds: self.seeds.clone(),
            solver,
        })
    }

    /// Pretty JSON serialization of the document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }
}

/// Loads and validates an experiment document from a JSON file.
///
/// Parse errors carry the line/column from the JSON parser; validation
/// errors name the violated invariant.
pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let spec: ExperimentSpec = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    spec.resolve()
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn round_trip_preserves_the_document() {
        for name in presets::PRESET_NAMES {
            for case in presets::preset_cases(name).unwrap() {
                let json = case.spec.to_json();
                let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
                assert_eq!(back, case.spec, "round-trip mismatch for {name}");
                back.resolve().unwrap();
            }
        }
    }

    #[test]
    fn rejects_wrong_version() {
        let mut spec = presets::preset_cases("fig2a").unwrap().remove(0).spec;
        spec.version = 99;
        let err = spec.resolve().unwrap_err().to_string();
        assert!(err.contains("version"), "unexpected error: {err}");
    }

    #[test]
    fn rejects_bad_pmf() {
        let mut spec = presets::preset_cases("fig2a").unwrap().remove(0).spec;
        spec.system.arrival_pmf[0] += 0.25;
        let err = spec.resolve().unwrap_err().to_string();
        assert!(err.contains("sum"), "unexpected error: {err}");
    }

    #[test]
    fn rejects_unknown_policy_and_duplicates() {
        let mut spec = presets::preset_cases("fig2a").unwrap().remove(0).spec;
        spec.policies = vec!["nearest".into()];
        assert!(spec.resolve().is_err());
        spec.policies = vec!["load".into(), "load".into()];
        let err = spec.resolve().unwrap_err().to_string();
        assert!(err.contains("duplicate"), "unexpected error: {err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        let json = r#"{"version":1,"systme":{}}"#;
        assert!(serde_json::from_str::<ExperimentSpec>(json).is_err());
    }

    #[test]
    fn grid_step_resolves_to_the_clamp_free_range() {
        let mut spec = presets::preset_cases("fig2a").unwrap().remove(0).spec;
        spec.solver.grid_step = Some(25);
        let resolved = spec.resolve().unwrap();
        let grid = resolved.solver.grid.as_deref().unwrap();
        assert_eq!(grid.first(), Some(&0));
        assert_eq!(grid.last(), Some(&100));
        assert_eq!(grid.len(), 5);
    }

    #[test]
    fn parse_error_reports_position() {
        let dir = std::env::temp_dir().join("assoc-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.json");
        std::fs::write(&path, "{\n  \"version\": 1,,\n}").unwrap();
        let err = format!("{:#}", load_config(&path).unwrap_err());
        assert!(err.contains("line"), "no position in: {err}");
    }
}
