use super::notes::EPS;
use super::MatchReport;
use crate::score::{Element, ScoreDoc};

pub const DEFAULT_BEAT_TOL_S: f64 = 0.07;

/// One-to-one matching of two sorted time lists within `tol_s`, scanning both in time
/// order. On a line this greedy scan is a maximum matching.
pub fn beat_f1(reference: &[f64], pred: &[f64], tol_s: f64) -> MatchReport {
    let (mut i, mut j, mut m) = (0, 0, 0);
    while i < reference.len() && j < pred.len() {
        let d = pred[j] - reference[i];
        if d.abs() <= tol_s + EPS {
            m += 1;
            i += 1;
            j += 1;
        } else if d > 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    MatchReport::from_counts(reference.len(), pred.len(), m)
}

/// Beat and downbeat times of a document: stamps directly after barlines, downbeats and
/// beat markers. Downbeats are the barline subset.
pub fn beat_times(doc: &ScoreDoc) -> (Vec<f64>, Vec<f64>) {
    let mut beats = Vec::new();
    let mut downbeats = Vec::new();
    let els = &doc.elements;
    for (i, el) in els.iter().enumerate() {
        let Some(Element::Timestamp(t)) = els.get(i + 1) else { continue };
        match el {
            Element::Barline(_) | Element::Downbeat => {
                beats.push(t.seconds());
                downbeats.push(t.seconds());
            }
            Element::Beat => beats.push(t.seconds()),
            _ => {}
        }
    }
    (beats, downbeats)
}
