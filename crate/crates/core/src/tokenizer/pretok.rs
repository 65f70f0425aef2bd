use crate::dialect::Dialect;
use crate::text::{parse, render};

use super::TokenizerError;

/// Characters of the semantic InterMo alphabet; each one is always a piece.
pub const ALPHABET: &str = " |/0123456789k-PRL:ABCDEFGabcdefg#.>";

/// Words kept out of semantic pieces: stamps, velocity, pedal, beats and prompts.
pub(crate) fn is_special_word(w: &str) -> bool {
    w.starts_with('[') || w.starts_with("vel:") || w.starts_with("CC64:") || w == "*" || w.starts_with('<')
}

/// Words at which score time advances or a measure opens.
fn is_starter(w: &str) -> bool {
    let b = w.as_bytes();
    w.starts_with('|') || (b.first().is_some_and(u8::is_ascii_digit) && w.contains('/'))
}

/// Splits `" " + text` into contiguous pretokens, each keeping the whitespace in
/// front of its first word. Concatenating the result gives back `" " + text`.
pub fn pretoken_spans(text: &str) -> Vec<String> {
    let norm = format!(" {text}");
    let bytes = norm.as_bytes();
    let mut out: Vec<String> = Vec::new();
    let mut cur_start = 0usize;
    let mut prev_special = false;
    let mut i = 0usize;
    let mut first = true;
    while i < bytes.len() {
        let seg_start = i;
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let word_start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let word = &norm[word_start..i];
        let special = is_special_word(word);
        let boundary = word.is_empty() || special || prev_special || is_starter(word);
        if boundary && !first {
            out.push(norm[cur_start..seg_start].to_string());
            cur_start = seg_start;
        }
        first = false;
        prev_special = special;
    }
    out.push(norm[cur_start..].to_string());
    out
}

/// Pretokens of a valid document in `dialect`, without separators.
pub fn pretokenize(text: &str, dialect: Dialect) -> Result<Vec<String>, TokenizerError> {
    let doc = parse(text, dialect).map_err(|e| TokenizerError::Input(e.to_string()))?;
    Ok(pretoken_spans(&render(&doc))
        .into_iter()
        .map(|p| p[1..].to_string())
        .collect())
}

/// Pretokens that take part in piece learning.
pub(crate) fn is_semantic_pretoken(p: &str) -> bool {
    let word = p.trim_start();
    !word.is_empty() && !is_special_word(word) && p.chars().all(|c| ALPHABET.contains(c))
}
