use thiserror::Error;

use crate::score::{
    Articulation, Barline, EventKind, MetricInterval, PedalToken, SpelledPitch, Staff, Step,
    Timestamp,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown token {token:?} at byte {position}: {reason}")]
pub struct LexError {
    pub position: usize,
    pub token: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Barline(Barline),
    Downbeat,
    Interval(MetricInterval),
    Staff(Staff),
    Pitch {
        kind: EventKind,
        pitch: SpelledPitch,
        articulations: Vec<Articulation>,
    },
    Velocity(u8),
    Pedal(PedalToken),
    Beat,
    Timestamp(Timestamp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexeme<'a> {
    pub token: Token,
    pub text: &'a str,
    /// Byte offset of the token in the input.
    pub position: usize,
}

/// Strips one optional trailing newline.
pub fn trim_newline(text: &str) -> &str {
    text.strip_suffix("\r\n")
        .or_else(|| text.strip_suffix('\n'))
        .unwrap_or(text)
}

/// Splits on single spaces and classifies every token.
pub fn lex(text: &str) -> Result<Vec<Lexeme<'_>>, LexError> {
    let body = trim_newline(text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut pos = 0;
    for raw in body.split(' ') {
        let err = |reason| LexError {
            position: pos,
            token: raw.to_string(),
            reason,
        };
        if raw.is_empty() {
            return Err(err("empty token (separators are single spaces)"));
        }
        let token = lex_token(raw).map_err(err)?;
        out.push(Lexeme {
            token,
            text: raw,
            position: pos,
        });
        pos += raw.len() + 1;
    }
    Ok(out)
}

/// Classifies a single token.
pub fn lex_token(t: &str) -> Result<Token, &'static str> {
    if !t.is_ascii() {
        return Err("non-ASCII input");
    }
    match t {
        "|" => return Ok(Token::Downbeat),
        "*" => return Ok(Token::Beat),
        "PR:" => return Ok(Token::Staff(Staff::PR)),
        "PL:" => return Ok(Token::Staff(Staff::PL)),
        "CC64:on" => return Ok(Token::Pedal(PedalToken::On)),
        "CC64:off" => return Ok(Token::Pedal(PedalToken::Off)),
        _ => {}
    }
    let first = t.as_bytes()[0];
    if first == b'|' {
        return lex_barline(&t[1..]);
    }
    if first == b'[' {
        return lex_timestamp(t);
    }
    if let Some(v) = t.strip_prefix("vel:") {
        let n = parse_uint(v).ok_or("bad velocity")?;
        if !(1..=127).contains(&n) {
            return Err("velocity outside [1, 127]");
        }
        return Ok(Token::Velocity(n as u8));
    }
    if first.is_ascii_digit() {
        let (n, d) = t.split_once('/').ok_or("bad interval")?;
        let n = parse_uint(n).ok_or("bad interval numerator")?;
        let d = parse_uint(d).ok_or("bad interval denominator")?;
        return MetricInterval::new(n, d)
            .map(Token::Interval)
            .map_err(|_| "interval is not a positive reduced fraction");
    }
    if Step::from_char(first as char).is_some() {
        return lex_pitch(t);
    }
    Err("not in the InterMo alphabet")
}

/// Decimal without sign or superfluous leading zeros.
fn parse_uint(s: &str) -> Option<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse().ok()
}

fn lex_barline(s: &str) -> Result<Token, &'static str> {
    let (meter, key) = s.split_once('k').ok_or("barline lacks key")?;
    let (n, d) = meter.split_once('/').ok_or("barline lacks meter")?;
    let n = parse_uint(n).ok_or("bad meter numerator")?;
    let d = parse_uint(d).ok_or("bad meter denominator")?;
    let (neg, digits) = match key.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, key),
    };
    let k = parse_uint(digits).ok_or("bad key")?;
    if neg && k == 0 {
        return Err("key zero is written k0");
    }
    if k > 7 {
        return Err("key outside [-7, 7]");
    }
    let k = if neg { -(k as i8) } else { k as i8 };
    Barline::new(n, d, k)
        .map(Token::Barline)
        .map_err(|_| "invalid meter")
}

fn lex_timestamp(t: &str) -> Result<Token, &'static str> {
    let inner = t
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or("unterminated timestamp")?;
    let (secs, frac) = inner.split_once('.').ok_or("timestamp needs two decimals")?;
    if frac.len() != 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err("timestamp needs two decimals");
    }
    let secs = parse_uint(secs).ok_or("bad timestamp seconds")?;
    let frac: u32 = frac.parse().map_err(|_| "bad timestamp")?;
    let bin = secs
        .checked_mul(100)
        .and_then(|b| b.checked_add(frac))
        .ok_or("timestamp overflow")?;
    Ok(Token::Timestamp(Timestamp::new(bin)))
}

fn lex_pitch(t: &str) -> Result<Token, &'static str> {
    let b = t.as_bytes();
    let letter = b[0] as char;
    let step = Step::from_char(letter).ok_or("bad pitch letter")?;
    let kind = if letter.is_ascii_uppercase() {
        EventKind::Onset
    } else {
        EventKind::Offset
    };
    let mut i = 1;
    let mut alter: i8 = 0;
    if i < b.len() && (b[i] == b'#' || b[i] == b'-') {
        let acc = b[i];
        while i < b.len() && b[i] == acc {
            alter += if acc == b'#' { 1 } else { -1 };
            i += 1;
        }
        if alter.abs() > 2 {
            return Err("more than two accidentals");
        }
    }
    if i >= b.len() || !b[i].is_ascii_digit() {
        return Err("pitch lacks octave digit");
    }
    let octave = b[i] - b'0';
    i += 1;
    let mut articulations = Vec::new();
    for &c in &b[i..] {
        articulations.push(Articulation::from_symbol(c as char).ok_or("bad pitch suffix")?);
    }
    let pitch = SpelledPitch::new(step, alter, octave).map_err(|_| "pitch outside piano range")?;
    Ok(Token::Pitch {
        kind,
        pitch,
        articulations,
    })
}
