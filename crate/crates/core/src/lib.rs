//! Domain-knowledge analysis of student performance.
//!
//! The crate turns a course catalog and a registration history into
//! per-registration knowledge and improvement labels, then counts how often
//! each knowledge level co-occurs with non-negative and positive improvement
//! within each student-quality stratum.
//!
//! Pipeline stages, one module each:
//!
//! - [`model`]: records, CSV ingestion, filtering
//! - [`textsim`]: syllabus similarity (LSA plus a lexical knowledge base)
//! - [`simmatrix`]: the normalized course similarity matrix and its file format
//! - [`scoring`]: grade conversion, quality and knowledge bands, improvement
//! - [`mining`]: support/confidence counting and report emitters
//! - [`synth`]: seeded synthetic datasets with a planted association
//! - [`pipeline`]: configuration and end-to-end orchestration

pub mod error;
pub mod mining;
pub mod model;
pub mod pipeline;
pub mod scoring;
pub mod simmatrix;
pub mod synth;
pub mod textsim;

pub use error::{Error, ErrorKind, Result};
