//! Simulator of bandit-learning firms competing for reputation-driven
//! customers.
//!
//! Two (or more) firms each run a multi-armed bandit algorithm over the same
//! K Bernoulli arms. A shared *realization table* pre-draws every (round,
//! arm) reward, so a problem instance is a pure function of the seed. Each
//! arriving agent picks a firm by comparing sliding-window reputation scores,
//! the chosen firm pulls an arm, and the realized reward feeds both that
//! firm's posterior and its reputation. The crate provides:
//!
//! - [`bandit`]: Beta-Bernoulli posteriors and the three firm strategies —
//!   greedy (`DG`), ε-greedy (`DEG`), and Thompson sampling (`TS`);
//! - [`instances`]: mean-reward-vector families (needle-in-haystack,
//!   uniform, heavy-tail) and bit-packed realization tables;
//! - [`market`]: the game engine — warm starts, temporary monopolies with
//!   data/reputation head-start ablations, agent choice rules, and the
//!   round loop, for one firm in isolation up to F competing firms;
//! - [`metrics`]: market share, effective end of game, market regret,
//!   reputation trajectories/snapshots, cell aggregation, and pure-Nash
//!   extraction with ties broken toward simpler algorithms;
//! - [`sweep`]: deterministic parallel Monte Carlo over experiment grids —
//!   byte-identical results for any thread count;
//! - [`report`]: stable CSV/JSON emission of summaries, trajectories,
//!   entrant-share matrices, and equilibrium reports.
//!
//! # Determinism
//!
//! Every random draw comes from a ChaCha8 stream keyed by (master seed,
//! purpose, identity): mean reward vectors and realization tables by
//! (instance, K, simulation index), firm and agent streams by (cell id,
//! simulation index, firm index). Scheduling never touches a stream, so a
//! sweep's outputs depend only on its spec and seed.
//!
//! ```
//! use bandit_market::sweep::{run_sweep, FamilyKind, SweepSpec};
//!
//! let mut spec = SweepSpec::new(FamilyKind::Duopoly);
//! spec.instances = vec![bandit_market::instances::MabInstanceKind::heavy_tail()];
//! spec.k = 4;
//! spec.n = 5;
//! spec.t_list = vec![50];
//! spec.t0_list = vec![5];
//! spec.window = 10;
//! let out = run_sweep(&spec).unwrap();
//! assert_eq!(out.summary.len(), 3); // TS~DG, TS~DEG, DG~DEG
//! ```

pub mod bandit;
pub mod error;
pub mod instances;
pub mod market;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod sweep;

pub use bandit::{AlgorithmKind, AlgorithmState, BetaPosterior, TieBreak};
pub use error::{Error, Result};
pub use instances::{
    build_realization_table, draw_mrv, MabInstanceKind, MeanRewardVector, RealizationTable,
};
pub use market::{
    choose_firm, run_competition, run_isolation, AdvantageVariant, ChoiceRule, FirmState,
    GameConfig, GameTrace, IsolationTrace, Regime, ReputationWindow, RngBundle,
};
pub use metrics::{
    aggregate_cell, eeog, exploration_disadvantage_period, find_pure_nash, market_regret,
    market_share, relative_reputation, CellSummary, Snapshot, TrajectorySeries,
};
pub use sweep::{nash_from_summary, run_sweep, Cell, FamilyKind, SweepOutput, SweepSpec};
