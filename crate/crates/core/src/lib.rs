//! Entity-centric information extraction tooling.
//!
//! The crate covers the full evaluation path for document-level IE where
//! annotations live on entity clusters rather than on individual mentions:
//!
//! - [`corpus`]: the canonical JSON Lines document model and its validator
//! - [`decoder`]: turning mention-level predictions into entity-level ones
//! - [`metrics`]: mention, hard and soft entity-level P/R/F1 plus MUC, B³
//!   and CEAF_e coreference scores
//! - [`rules`]: Horn-rule consistency checks and fixpoint closure
//! - [`agreement`]: Cohen's kappa between two annotators
//! - [`stats`]: corpus statistics, relation distance profiles and the
//!   train-prior linking baseline
//! - [`kernels`]: reference implementations of span scoring, losses and
//!   graph propagation updates
//! - [`cli`]: the `ecie` command line front end

pub mod agreement;
pub mod cli;
pub mod corpus;
pub mod decoder;
mod error;
pub mod kernels;
pub mod metrics;
pub mod rules;
pub mod stats;

pub use error::{Error, Result};

/// Version tag written into every machine-readable CLI payload.
pub const SCHEMA_VERSION: u32 = 1;
