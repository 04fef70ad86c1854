//! Mining directed "similar sector" relations from company/sector records.
//!
//! Companies declare the sectors they operate in; each record is the set of
//! sectors one company picked. This crate turns those set-valued records into
//! directed binary relations between sectors through three families of
//! engines, and scores any of them against expert labels under a shared
//! ranking protocol:
//!
//! - [`fim`]: frequent-itemset mining (negFIN with a naive oracle); the
//!   support of a sector pair is its similarity score.
//! - [`cf`]: a binary sector-by-company ratings matrix with item-item
//!   similarity measures (Pearson, Kendall, Spearman) and ALS matrix
//!   factorization over singleton-augmented data.
//! - [`relations`]: top-K extraction of the directed relation set from any
//!   engine's scores, plus combined-score candidate generation for labeling.
//! - [`eval`]: Precision@K, MAP@K and MRR against ground-truth labels.
//!
//! [`dataset`] owns ingestion, statistics, singleton augmentation and a
//! planted-block synthetic generator; [`io`] owns the on-disk formats shared
//! by the CLI and other front ends.

pub mod cf;
pub mod dataset;
pub mod engines;
pub mod error;
pub mod eval;
pub mod fim;
pub mod io;
pub mod relations;

pub use error::{Error, Result};
