use thiserror::Error;

use super::lexer::{lex, LexError, Token};
use super::validate::{validate, ValidationReport};
use crate::dialect::Dialect;
use crate::score::{Element, EventKind, LitePitch, Moment, Pitch, PitchEvent, ScoreDoc, Staff};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("byte {position}: {message}")]
    Structure { position: usize, message: String },
    #[error("{}", .0.summary())]
    Invalid(ValidationReport),
}

/// Parses text and rejects it when validation finds errors.
pub fn parse(text: &str, dialect: Dialect) -> Result<ScoreDoc, ParseError> {
    let doc = parse_lenient(text, dialect)?;
    let report = validate(&doc);
    if report.has_errors() {
        return Err(ParseError::Invalid(report));
    }
    Ok(doc)
}

/// Builds a document from text without running validation. Only lexical errors and
/// tokens that cannot be attached anywhere (dangling staff markers, stray velocities)
/// are reported here.
pub fn parse_lenient(text: &str, dialect: Dialect) -> Result<ScoreDoc, ParseError> {
    let lexemes = lex(text)?;
    let mut doc = ScoreDoc::new(dialect);
    let mut moment = Moment::default();
    let mut staff: Option<Staff> = None;
    let mut pending_mark: Option<usize> = None;
    let lite = !dialect.is_spelled();

    fn flush(doc: &mut ScoreDoc, moment: &mut Moment) {
        if !moment.is_empty() {
            doc.elements.push(Element::Moment(std::mem::take(moment)));
        }
    }

    for lx in lexemes {
        let structure = |message: &str| ParseError::Structure {
            position: lx.position,
            message: message.to_string(),
        };
        let structural = !matches!(
            lx.token,
            Token::Pitch { .. } | Token::Staff(_) | Token::Velocity(_) | Token::Pedal(_)
        );
        if structural {
            if let Some(p) = pending_mark {
                return Err(ParseError::Structure {
                    position: p,
                    message: "staff marker not followed by a pitch".into(),
                });
            }
            flush(&mut doc, &mut moment);
        }
        match lx.token {
            Token::Barline(b) => doc.elements.push(Element::Barline(b)),
            Token::Downbeat => doc.elements.push(Element::Downbeat),
            Token::Interval(iv) => doc.elements.push(Element::Interval(iv)),
            Token::Beat => doc.elements.push(Element::Beat),
            Token::Timestamp(t) => doc.elements.push(Element::Timestamp(t)),
            Token::Staff(s) => {
                if pending_mark.is_some() {
                    return Err(structure("consecutive staff markers"));
                }
                staff = Some(s);
                pending_mark = Some(lx.position);
            }
            Token::Pitch {
                kind,
                pitch,
                articulations,
            } => {
                let pitch = if lite && LitePitch::is_canonical_spelling(&pitch) {
                    Pitch::Lite(pitch.to_lite())
                } else {
                    Pitch::Spelled(pitch)
                };
                moment.events.push(PitchEvent {
                    kind,
                    staff,
                    pitch,
                    velocity: None,
                    articulations,
                    marked: pending_mark.take().is_some(),
                });
            }
            Token::Velocity(v) => match moment.events.last_mut() {
                Some(e) if e.kind == EventKind::Onset && e.velocity.is_none() => {
                    e.velocity = Some(v)
                }
                _ => return Err(structure("velocity must follow an onset")),
            },
            Token::Pedal(p) => {
                if pending_mark.is_some() {
                    return Err(structure("staff marker not followed by a pitch"));
                }
                if !moment.events.is_empty() {
                    return Err(structure("pedal token after note events in the same moment"));
                }
                moment.pedal.push(p);
            }
        }
    }
    if let Some(p) = pending_mark {
        return Err(ParseError::Structure {
            position: p,
            message: "staff marker not followed by a pitch".into(),
        });
    }
    flush(&mut doc, &mut moment);
    Ok(doc)
}
