//! `assoc`: Whittle-index user association experiments.
//!
//! Exit codes: 0 success; 1 usage error; 2 configuration or input error;
//! 3 numerical failure inside a solver; 4 verification or comparison
//! failure (`verify` check failed, or `reproduce` found mismatches).

use anyhow::Result;
use assoc_cli::commands::{
    apply_overrides, cmd_index, cmd_reproduce, cmd_simulate, cmd_verify, Overrides,
};
use assoc_cli::config::{load_config, MethodDto};
use assoc_cli::presets::PRESET_NAMES;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "assoc",
    version,
    about = "Whittle-index user association: index tables, simulation, reference reproduction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Indifference band for iterative index refinement
    #[arg(long)]
    gamma: Option<f64>,
    /// Step between exactly-solved states in the index tables
    #[arg(long)]
    grid_step: Option<usize>,
    /// Index computation method: `direct` or `iterative`
    #[arg(long)]
    method: Option<MethodDto>,
}

impl SolverArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            gamma: self.gamma,
            grid_step: self.grid_step,
            method: self.method,
            ..Overrides::default()
        }
    }
}

#[derive(Args, Debug)]
struct EpisodeArgs {
    /// Run seeds 0..N instead of the config's seed list
    #[arg(long)]
    seed_count: Option<usize>,
    /// Override the episode length (slots)
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the warmup length (slots)
    #[arg(long)]
    warmup: Option<usize>,
    /// Override the per-mBS buffer bound (packets)
    #[arg(long)]
    buffer: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-mBS index tables from a config file
    Index {
        /// Experiment config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Only this mBS (default: all)
        #[arg(long)]
        mbs: Option<usize>,
        /// Directory for index.csv (default: the config's output_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Simulate the configured policies and collect metrics
    Simulate {
        /// Experiment config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Directory for metrics.csv / summary.json (default: the config's
        /// output_dir; no files when neither is set)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also record per-slot cost traces (traces.csv)
        #[arg(long)]
        traces: bool,
        #[command(flatten)]
        episode: EpisodeArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run a built-in preset and compare against its reference values
    Reproduce {
        /// Preset name
        #[arg(long, value_parser = PRESET_NAMES, conflicts_with = "all", required_unless_present = "all")]
        preset: Option<String>,
        /// Run every preset
        #[arg(long)]
        all: bool,
        /// Seeds 0..N per configuration
        #[arg(long, default_value_t = 10)]
        seed_count: usize,
        /// Base directory for artifacts (default `out/`; files land in
        /// `<out>/<preset>/`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the structural verification suite
    Verify,
}

/// Maps an error chain onto the documented exit codes.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<assoc_core::Error>() {
            return match core {
                assoc_core::Error::InvalidArgument(_) | assoc_core::Error::MissingIndexTables => 2,
                assoc_core::Error::NumericalFailure { .. }
                | assoc_core::Error::NonConvergence { .. }
                | assoc_core::Error::StructuralViolation(_)
                | assoc_core::Error::DegenerateIndifference { .. } => 3,
            };
        }
    }
    2
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Index { config, mbs, out, solver } => {
            let mut spec = load_config(&config)?;
            apply_overrides(&mut spec, &solver.into_overrides());
            print!("{}", cmd_index(&spec, mbs, out.as_deref())?);
            Ok(0)
        }
        Command::Simulate { config, out, traces, episode, solver } => {
            let mut spec = load_config(&config)?;
            let overrides = Overrides {
                seed_count: episode.seed_count,
                horizon: episode.horizon,
                warmup: episode.warmup,
                buffer: episode.buffer,
                ..solver.into_overrides()
            };
            apply_overrides(&mut spec, &overrides);
            print!("{}", cmd_simulate(&spec, traces, out.as_deref())?);
            Ok(0)
        }
        Command::Reproduce { preset, all, seed_count, out } => {
            let names: Vec<String> = if all {
                PRESET_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                vec![preset.expect("clap enforces preset unless --all")]
            };
            let mut ok = true;
            for name in &names {
                let (text, case_ok) = cmd_reproduce(name, seed_count, out.as_deref())?;
                print!("{text}");
                ok &= case_ok;
            }
            Ok(if ok { 0 } else { 4 })
        }
        Command::Verify => {
            let (text, ok) = cmd_verify()?;
            print!("{text}");
            Ok(if ok { 0 } else { 4 })
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests print to stdout and exit cleanly; real
            // usage errors go to stderr with exit code 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code.into()),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code_for(&e).into());
        }
    }
}
