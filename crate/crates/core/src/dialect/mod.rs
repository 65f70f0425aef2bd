//! The eight task dialects, their prompt tuples, and projections between them.

mod beats;
mod project;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::ValidationReport;

pub use beats::{beat_unit, beats_from_meter};
pub use project::{is_reachable, project};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dialect {
    #[serde(rename = "TAST")]
    Tast,
    #[serde(rename = "TAST_lite")]
    TastLite,
    #[serde(rename = "A2S")]
    A2s,
    #[serde(rename = "A2S_lite")]
    A2sLite,
    #[serde(rename = "AMT_lite")]
    AmtLite,
    #[serde(rename = "AMT")]
    Amt,
    #[serde(rename = "DBD_plus")]
    DbdPlus,
    #[serde(rename = "DBD")]
    Dbd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prompt {
    Piano,
    Beats,
    Score,
    Timestamp,
    Spell,
    #[serde(rename = "MIDI")]
    Midi,
}

impl Prompt {
    pub const ALL: [Prompt; 6] = [
        Prompt::Piano,
        Prompt::Beats,
        Prompt::Score,
        Prompt::Timestamp,
        Prompt::Spell,
        Prompt::Midi,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Prompt::Piano => "<piano>",
            Prompt::Beats => "<beats>",
            Prompt::Score => "<score>",
            Prompt::Timestamp => "<timestamp>",
            Prompt::Spell => "<spell>",
            Prompt::Midi => "<MIDI>",
        }
    }
}

/// Ordered prompt tokens that select a dialect.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptTuple(pub Vec<Prompt>);

impl fmt::Display for PromptTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            f.write_str(p.token())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DialectError {
    #[error("unknown dialect {0:?}")]
    Unknown(String),
    #[error("no dialect for prompt tuple {0}")]
    NoDialect(PromptTuple),
    #[error("cannot project {from} to {to}")]
    Unreachable { from: Dialect, to: Dialect },
    #[error("projection to {to} needs a timestamp on element {index}")]
    MissingTimestamps { to: Dialect, index: usize },
    #[error("measure starting at element {index} has no stamped moment")]
    Interpolation { index: usize },
    #[error("projection output is invalid: {0}")]
    Projection(String),
    #[error("source document is invalid")]
    InvalidSource(ValidationReport),
}

impl Dialect {
    pub const ALL: [Dialect; 8] = [
        Dialect::Tast,
        Dialect::TastLite,
        Dialect::A2s,
        Dialect::A2sLite,
        Dialect::AmtLite,
        Dialect::Amt,
        Dialect::DbdPlus,
        Dialect::Dbd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dialect::Tast => "TAST",
            Dialect::TastLite => "TAST_lite",
            Dialect::A2s => "A2S",
            Dialect::A2sLite => "A2S_lite",
            Dialect::AmtLite => "AMT_lite",
            Dialect::Amt => "AMT",
            Dialect::DbdPlus => "DBD_plus",
            Dialect::Dbd => "DBD",
        }
    }

    pub fn prompts(self) -> PromptTuple {
        use Prompt::*;
        PromptTuple(match self {
            Dialect::Tast => vec![Piano, Score, Timestamp, Spell],
            Dialect::TastLite => vec![Piano, Score, Timestamp],
            Dialect::A2s => vec![Piano, Score, Spell],
            Dialect::A2sLite => vec![Piano, Score],
            Dialect::AmtLite => vec![Piano, Timestamp],
            Dialect::Amt => vec![Piano, Timestamp, Midi],
            Dialect::DbdPlus => vec![Beats, Score, Timestamp],
            Dialect::Dbd => vec![Beats, Timestamp],
        })
    }

    pub fn from_prompts(t: &PromptTuple) -> Result<Dialect, DialectError> {
        Dialect::ALL
            .into_iter()
            .find(|d| d.prompts() == *t)
            .ok_or_else(|| DialectError::NoDialect(t.clone()))
    }

    pub fn has(self, p: Prompt) -> bool {
        self.prompts().0.contains(&p)
    }

    /// Pitched dialects with measures: TAST, TAST_lite, A2S, A2S_lite.
    pub fn is_pitched_score(self) -> bool {
        self.has(Prompt::Piano) && self.has(Prompt::Score)
    }

    pub fn is_amt(self) -> bool {
        matches!(self, Dialect::Amt | Dialect::AmtLite)
    }

    pub fn is_beats(self) -> bool {
        self.has(Prompt::Beats)
    }

    pub fn has_timestamps(self) -> bool {
        self.has(Prompt::Timestamp)
    }

    pub fn is_spelled(self) -> bool {
        self.has(Prompt::Spell)
    }

    /// Uses barlines carrying meter and key (everything with `<score>`).
    pub fn has_measures(self) -> bool {
        self.has(Prompt::Score)
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dialect {
    type Err = DialectError;

    /// Case-insensitive; `-` and `_` are interchangeable.
    fn from_str(s: &str) -> Result<Self, DialectError> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Dialect::ALL
            .into_iter()
            .find(|d| d.name().to_ascii_lowercase() == norm)
            .ok_or_else(|| DialectError::Unknown(s.to_string()))
    }
}
