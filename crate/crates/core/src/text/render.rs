use thiserror::Error;

use super::validate::{validate, ValidationReport};
use crate::score::{Element, Moment, ScoreDoc};

/// Token separator and timestamp brackets of the text form. Fixed; exists so that
/// golden files can name the rendering they pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrammarConfig {
    pub token_separator: char,
    pub timestamp_open: char,
    pub timestamp_close: char,
}

pub const GRAMMAR: GrammarConfig = GrammarConfig {
    token_separator: ' ',
    timestamp_open: '[',
    timestamp_close: ']',
};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot serialize an invalid document: {}", .0.summary())]
pub struct SerializeError(pub ValidationReport);

/// Canonical text of a valid document.
pub fn serialize(doc: &ScoreDoc) -> Result<String, SerializeError> {
    let report = validate(doc);
    if report.has_errors() {
        return Err(SerializeError(report));
    }
    Ok(render(doc))
}

/// Renders whatever the document holds, valid or not.
pub fn render(doc: &ScoreDoc) -> String {
    let mut tokens: Vec<String> = Vec::new();
    for el in &doc.elements {
        match el {
            Element::Barline(b) => tokens.push(b.to_string()),
            Element::Downbeat => tokens.push("|".into()),
            Element::Interval(iv) => tokens.push(iv.to_string()),
            Element::Moment(m) => render_moment(m, &mut tokens),
            Element::Beat => tokens.push("*".into()),
            Element::Timestamp(t) => tokens.push(t.to_string()),
        }
    }
    tokens.join(" ")
}

/// Element-aligned token strings: one entry per element, tokens inside joined by spaces.
pub fn render_elements(doc: &ScoreDoc) -> Vec<String> {
    doc.elements
        .iter()
        .map(|el| render(&ScoreDoc::with_elements(doc.dialect, vec![el.clone()])))
        .collect()
}

fn render_moment(m: &Moment, out: &mut Vec<String>) {
    for p in &m.pedal {
        out.push(p.text().into());
    }
    for e in &m.events {
        if e.marked {
            if let Some(s) = e.staff {
                out.push(s.marker().into());
            }
        }
        out.push(e.render_pitch());
        if let Some(v) = e.velocity {
            out.push(format!("vel:{v}"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::Dialect;
    use crate::score::{Barline, Pitch, PitchEvent, SpelledPitch, Staff, Step};

    #[test]
    fn minimal_document() {
        let mut doc = ScoreDoc::with_elements(
            Dialect::A2s,
            vec![
                Element::Barline(Barline::new(4, 4, 0).unwrap()),
                Element::Moment(Moment::new(vec![PitchEvent::onset(
                    Some(Staff::PR),
                    Pitch::Spelled(SpelledPitch::new(Step::C, 0, 4).unwrap()),
                )])),
            ],
        );
        doc.remark();
        assert_eq!(serialize(&doc).unwrap(), "|4/4k0 PR: C4");
    }

    #[test]
    fn invalid_document_is_refused() {
        let doc = ScoreDoc::with_elements(
            Dialect::A2s,
            vec![Element::Moment(Moment::new(vec![PitchEvent::onset(
                Some(Staff::PR),
                Pitch::Spelled(SpelledPitch::new(Step::C, 0, 4).unwrap()),
            )]))],
        );
        assert!(serialize(&doc).is_err());
        assert_eq!(render(&doc), "C4");
    }
}
