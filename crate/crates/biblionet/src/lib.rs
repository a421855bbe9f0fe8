//! Journal citation mapping and country co-authorship analysis.
//!
//! The crate turns field-tagged bibliographic exports into
//! journal-journal citation matrices, factor-analyzes the citing
//! patterns around a seed journal, embeds the resulting environment
//! into a 2D stimulus space, and builds country-level co-authorship
//! networks with k-core and cosine analysis. Everything is exportable
//! as CSV reports, Pajek `.net` files, UCINET `.dl` files, and SVG
//! plots, either through the library API or the `biblionet` CLI.
//!
//! The `parallel` feature (on by default) runs the data-parallel inner
//! loops and per-year pipeline stages on rayon; disabling it selects
//! sequential fallbacks that produce identical results.
// indexed loops are clearer than iterator chains for the symmetric-matrix math here
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod country_network;
pub mod error;
pub mod exchange_formats;
pub mod factor_model;
pub mod journal_citation;
pub mod linalg;
pub mod pipeline;
pub mod record_ingest;
pub mod stimulus_space;

pub use error::{Error, Result};
