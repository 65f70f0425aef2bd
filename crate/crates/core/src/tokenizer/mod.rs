//! Interval-piece pretokenization and a unigram subword model over the fixed
//! 8,000-token vocabulary.

mod model;
mod pretok;
mod train;
pub mod vocab;

use thiserror::Error;

pub use model::{UnigramModel, DEFAULT_ALPHA, MODEL_FORMAT, MODEL_VERSION};
pub use pretok::{pretoken_spans, pretokenize, ALPHABET};
pub use train::{train_unigram, TrainConfig, TrainReport, TrainRound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TokenizerError {
    #[error("tokenizer configuration: {0}")]
    Config(String),
    #[error("training corpus has no interval pieces")]
    EmptyCorpus,
    #[error("token id {0} is outside the vocabulary")]
    UnknownId(u32),
    #[error("model file: {0}")]
    Model(String),
    #[error("input rejected: {0}")]
    Input(String),
}
