//! Evaluation engine for text-based person retrieval.
//!
//! - [`metrics`]: rank-k (CMC), AP/mAP and the similarity-distribution
//!   metrics (PNR, ASP, SD, mSD) over ranked lists.
//! - [`harness`]: annotation and embedding I/O, cosine similarity, ranking,
//!   the evaluation protocol and report rendering.
//! - [`stats`]: caption word-count and entropy statistics.

pub mod error;
pub mod harness;
pub mod metrics;
pub mod stats;

pub use error::{Error, FormatError, Result};
