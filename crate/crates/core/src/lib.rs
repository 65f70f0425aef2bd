//! InterMo: a time-aligned text representation of piano scores.
//!
//! The crate covers the text grammar and its validator, projections between the
//! task dialects, MIDI interchange, chunk splitting and stitching, the
//! interval-piece tokenizer, and evaluation metrics.

pub mod cli;
pub mod dialect;
pub mod metrics;
pub mod midi;
pub mod score;
pub mod stitch;
pub mod text;
pub mod tokenizer;
pub mod train_utils;

pub use dialect::Dialect;
pub use score::ScoreDoc;
