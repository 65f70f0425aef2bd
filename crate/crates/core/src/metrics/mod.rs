//! Evaluation: note and beat F1, token edit distance, shingle retrieval.

mod beats;
mod notes;
mod retrieval;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::{Element, ScoreDoc, Timestamp};
use crate::text::render;

pub use beats::{beat_f1, beat_times, DEFAULT_BEAT_TOL_S};
pub use notes::{match_notes, note_f1, NoteMode, DEFAULT_ONSET_TOL_S, VELOCITY_TOL};
pub use retrieval::{
    average_precision, jaccard, map_retrieval, shingle, MapReport, Relevance, RetrievalCorpus, RetrievalItem,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no item has a relevant counterpart")]
    NoQueries,
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_ref: usize,
    pub n_pred: usize,
    pub n_matched: usize,
}

impl MatchReport {
    /// Empty sides score zero.
    pub fn from_counts(n_ref: usize, n_pred: usize, n_matched: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(n_matched, n_pred);
        let recall = ratio(n_matched, n_ref);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        MatchReport {
            precision,
            recall,
            f1,
            n_ref,
            n_pred,
            n_matched,
        }
    }
}

/// Whitespace tokens of the document with timestamps removed.
pub fn score_tokens(doc: &ScoreDoc) -> Vec<String> {
    render(&doc.strip_timestamps())
        .split_whitespace()
        .map(String::from)
        .collect()
}

/// Token-level Levenshtein distance over the longer length; 0 for two empty documents.
pub fn token_ned(reference: &ScoreDoc, pred: &ScoreDoc) -> f64 {
    let a = score_tokens(reference);
    let b = score_tokens(pred);
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    strsim::generic_levenshtein(&a, &b) as f64 / longest as f64
}

/// Replaces each stamp by the time since the previous one (the first becomes 0).
pub fn relative_timestamps(doc: &ScoreDoc) -> ScoreDoc {
    let mut out = doc.clone();
    let mut prev: Option<u32> = None;
    for el in &mut out.elements {
        if let Element::Timestamp(t) = el {
            let bin = t.bin;
            *t = Timestamp::new(prev.map_or(0, |p| bin.saturating_sub(p)));
            prev = Some(bin);
        }
    }
    out.meta.relative_timestamps = true;
    out
}

pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Percentile bootstrap interval of the mean.
pub fn bootstrap_ci<R: Rng + ?Sized>(values: &[f64], resamples: usize, level: f64, rng: &mut R) -> Option<(f64, f64)> {
    if values.is_empty() || resamples == 0 || !(0.0..1.0).contains(&level) {
        return None;
    }
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let q = |p: f64| means[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    let tail = (1.0 - level) / 2.0;
    Some((q(tail), q(1.0 - tail)))
}
