//! Numeric helpers for training: ordinal label smoothing over timestamp bins,
//! length-based loss weights and window tiling offsets.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RangeError {
    #[error("target bin {y} outside 0..{num_bins}")]
    Bin { y: usize, num_bins: usize },
    #[error("sequence length must be at least 1")]
    Length,
    #[error("utterance of {len_s} s does not fit a {window_s} s window")]
    Window { len_s: f64, window_s: f64 },
    #[error("invalid smoothing spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSpec {
    pub p_center: f64,
    pub w: usize,
    pub num_bins: usize,
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        SmoothingSpec {
            p_center: 0.9,
            w: 5,
            num_bins: 4001,
        }
    }
}

/// Target distribution over bins: `p_center` on `y`, the rest spread over the
/// in-range neighbours within `w` with weights `(w + 1 - |i - y|)^2`.
pub fn smoothing_distribution(y: usize, spec: &SmoothingSpec) -> Result<Vec<f64>, RangeError> {
    if !(spec.p_center > 0.0 && spec.p_center <= 1.0) {
        return Err(RangeError::Spec(format!("p_center {}", spec.p_center)));
    }
    if y >= spec.num_bins {
        return Err(RangeError::Bin {
            y,
            num_bins: spec.num_bins,
        });
    }
    let mut q = vec![0.0; spec.num_bins];
    let lo = y.saturating_sub(spec.w);
    let hi = (y + spec.w).min(spec.num_bins - 1);
    let weight = |i: usize| {
        let d = (spec.w + 1 - i.abs_diff(y)) as f64;
        d * d
    };
    let z: f64 = (lo..=hi).filter(|&i| i != y).map(weight).sum();
    if z == 0.0 {
        q[y] = 1.0;
        return Ok(q);
    }
    let rest = 1.0 - spec.p_center;
    for (i, qi) in q.iter_mut().enumerate().take(hi + 1).skip(lo) {
        *qi = if i == y { spec.p_center } else { rest * weight(i) / z };
    }
    Ok(q)
}

/// Per-sequence loss weight `1 / sqrt(len)`.
pub fn token_weight(seq_len: usize) -> Result<f64, RangeError> {
    if seq_len == 0 {
        return Err(RangeError::Length);
    }
    Ok(1.0 / (seq_len as f64).sqrt())
}

pub const DEFAULT_WINDOW_S: f64 = 40.0;

/// Start offset drawn uniformly from the slack left in the window.
pub fn tile_offset<R: Rng + ?Sized>(utterance_len_s: f64, window_len_s: f64, rng: &mut R) -> Result<f64, RangeError> {
    if !(utterance_len_s >= 0.0 && utterance_len_s <= window_len_s) {
        return Err(RangeError::Window {
            len_s: utterance_len_s,
            window_s: window_len_s,
        });
    }
    let slack = window_len_s - utterance_len_s;
    Ok(if slack > 0.0 { rng.gen_range(0.0..=slack) } else { 0.0 })
}
