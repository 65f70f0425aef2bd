//! Fixed id layout of the 8,000-token vocabulary.
//!
//! | ids          | partition                                   |
//! |--------------|---------------------------------------------|
//! | 0..256       | byte fallback `<0xNN>`                      |
//! | 256..296     | prompt tokens (six named, the rest padding) |
//! | 296..4297    | timestamps `[0.00]`..`[40.00]`              |
//! | 4297..4426   | `vel:1`..`vel:127`, `CC64:on`, `CC64:off`   |
//! | 4426         | beat `*`                                    |
//! | 4427..8000   | learned interval pieces                     |
//!
//! Non-byte token strings carry the separating space in front, like every piece.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dialect::Prompt;
use crate::score::Timestamp;

pub const VOCAB_SIZE: u32 = 8000;
pub const BYTE_START: u32 = 0;
pub const PROMPT_START: u32 = 256;
pub const PROMPT_SLOTS: u32 = 40;
pub const STAMP_START: u32 = PROMPT_START + PROMPT_SLOTS;
pub const STAMP_COUNT: u32 = 4001;
pub const MIDI_START: u32 = STAMP_START + STAMP_COUNT;
pub const MIDI_COUNT: u32 = 129;
pub const BEAT_ID: u32 = MIDI_START + MIDI_COUNT;
pub const SEMANTIC_START: u32 = BEAT_ID + 1;
pub const MAX_SEMANTIC: usize = (VOCAB_SIZE - SEMANTIC_START) as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Byte,
    Prompt,
    Timestamp,
    Midi,
    Beat,
    Semantic,
}

pub fn partition_of(id: u32) -> Option<Partition> {
    Some(match id {
        _ if id < PROMPT_START => Partition::Byte,
        _ if id < STAMP_START => Partition::Prompt,
        _ if id < MIDI_START => Partition::Timestamp,
        _ if id < BEAT_ID => Partition::Midi,
        BEAT_ID => Partition::Beat,
        _ if id < VOCAB_SIZE => Partition::Semantic,
        _ => return None,
    })
}

fn special_string(id: u32) -> String {
    match partition_of(id) {
        Some(Partition::Prompt) => {
            let k = (id - PROMPT_START) as usize;
            match Prompt::ALL.get(k) {
                Some(p) => format!(" {}", p.token()),
                None => format!(" <prompt_{k}>"),
            }
        }
        Some(Partition::Timestamp) => format!(" {}", Timestamp::new(id - STAMP_START)),
        Some(Partition::Midi) => match id - MIDI_START {
            k @ 0..=126 => format!(" vel:{}", k + 1),
            127 => " CC64:on".to_string(),
            _ => " CC64:off".to_string(),
        },
        Some(Partition::Beat) => " *".to_string(),
        _ => String::new(),
    }
}

struct Specials {
    strings: Vec<String>,
    ids: HashMap<String, u32>,
}

fn specials() -> &'static Specials {
    static S: OnceLock<Specials> = OnceLock::new();
    S.get_or_init(|| {
        let strings: Vec<String> = (PROMPT_START..SEMANTIC_START).map(special_string).collect();
        let ids = strings
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), PROMPT_START + i as u32))
            .collect();
        Specials { strings, ids }
    })
}

/// Id of a reserved non-semantic token (with its leading space), if any.
pub fn special_id(s: &str) -> Option<u32> {
    specials().ids.get(s).copied()
}

/// Text of a reserved non-semantic token.
pub fn special_str(id: u32) -> Option<&'static str> {
    if (PROMPT_START..SEMANTIC_START).contains(&id) {
        Some(&specials().strings[(id - PROMPT_START) as usize])
    } else {
        None
    }
}

pub fn byte_token_name(b: u8) -> String {
    format!("<0x{b:02X}>")
}
