//! Core algorithms for index-based user association in slotted multi-queue
//! networks: controlled transition kernels, threshold-policy Markov chains,
//! average-cost MDP solvers, Whittle index computation, association policies,
//! and a deterministic slot/mini-slot simulator.
//!
//! The crate is `no_std`-compatible (with `alloc`); all file formats, CLI
//! plumbing, and parallel orchestration live in the companion `assoc-cli`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod chain;
pub mod error;
pub mod linalg;
pub mod mdp;
pub mod model;
pub mod policies;
pub mod sim;
pub mod whittle;

pub use chain::{
    build_dtmc, passive_mass, stationary_distribution, StationaryDistribution, ThresholdPolicy,
};
pub use error::Error;
pub use mdp::{
    average_cost, finite_horizon_discounted, infinite_horizon_discounted, optimal_policy_rvi,
    solve_relative_values, OracleConfig, ValueSolution,
};
pub use model::{
    check_stability, departure_pmf, normalize_rates, transition_row, Action, MbsParams,
    OverflowPolicy, StabilityReport, SystemConfig, TransitionKernel,
};
pub use policies::{
    associate, associate_with, score, score_with, NetworkSnapshot, PolicyKind, PolicyOptions,
};
pub use sim::{
    compute_metrics, jfi, run_episode, run_episode_with, run_experiment, EpisodeRecord,
    MbsCounters, Metrics, MetricsSummary, PolicyResult, SummaryStat, UserRecord,
};
pub use whittle::{direct_index, index_table, lambda_iteration, IndexMethod, IndexTable, WhittleSolverConfig};

/// A convenient result alias for fallible core operations.
pub type Result<T> = core::result::Result<T, Error>;
