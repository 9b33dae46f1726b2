//! Interpretable survival regression via evolutionary symbolic regression.
//!
//! The central model is a set of small expression trees whose outputs are
//! linearly combined inside a Cox proportional-hazards model. An NSGA-2 loop
//! searches for trade-offs between concordance and the number of distinct
//! dataset features used. Two glass-box baselines produce comparable Pareto
//! fronts: a Cox elastic-net regularization path (CX) and depth-swept
//! survival trees (ST).
//!
//! Modules:
//! - [`data`]: CSV loading, categorical encoding, z-score normalization, splits
//! - [`exprtree`]: expression trees, random generation, variation operators
//! - [`coxcore`]: Kaplan-Meier, partial likelihood, elastic-net coordinate
//!   descent, Breslow baseline, IPCW concordance
//! - [`multimodel`]: multi-expression Cox model (trees + fitted coefficients)
//! - [`evolve`]: NSGA-2 evolution with duplicate penalization
//! - [`baselines`]: CX lambda-path and ST depth-sweep Pareto fronts
//! - [`metrics`]: hypervolume, front filtering, repetition aggregation
//! - [`synth`]: synthetic right-censored dataset generator
//! - [`runner`]: batch orchestration behind the CLI subcommands

pub mod baselines;
pub mod coxcore;
pub mod data;
pub mod evolve;
pub mod exprtree;
pub mod metrics;
pub mod multimodel;
pub mod runner;
pub mod seed;
pub mod synth;

pub use data::{SplitSpec, SurvivalDataset};
pub use exprtree::ExprTree;
pub use multimodel::MultiExprModel;
