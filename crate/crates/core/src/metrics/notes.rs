use serde::{Deserialize, Serialize};

use super::MatchReport;
use crate::midi::{extend_pedoff, MidiNote, MidiPerformance};

/// Slack for floating-point comparisons against tolerances.
pub(crate) const EPS: f64 = 1e-9;

pub const DEFAULT_ONSET_TOL_S: f64 = 0.05;
pub const OFFSET_MIN_TOL_S: f64 = 0.05;
pub const OFFSET_RATIO: f64 = 0.2;
/// Velocity tolerance as a fraction of the MIDI range.
pub const VELOCITY_TOL: f64 = 0.1 * 127.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteMode {
    Onset,
    Velocity,
    KeyOff,
    PedOff,
}

impl std::str::FromStr for NoteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().trim_start_matches('+') {
            "onset" | "n" => Ok(NoteMode::Onset),
            "velocity" | "vel" => Ok(NoteMode::Velocity),
            "keyoff" => Ok(NoteMode::KeyOff),
            "pedoff" => Ok(NoteMode::PedOff),
            _ => Err(format!("unknown note mode {s:?}")),
        }
    }
}

/// Same key and onsets within `tol` of each other.
pub(crate) fn onset_candidate(r: &MidiNote, p: &MidiNote, tol: f64) -> bool {
    r.midi == p.midi && (r.onset_s - p.onset_s).abs() <= tol + EPS
}

pub(crate) fn offset_ok(r: &MidiNote, p: &MidiNote) -> bool {
    let tol = OFFSET_MIN_TOL_S.max(OFFSET_RATIO * r.duration());
    (r.keyoff_s - p.keyoff_s).abs() <= tol + EPS
}

/// Least-squares scale mapping predicted velocities onto the reference ones.
pub(crate) fn velocity_scale(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (num, den) = pairs.fold((0.0, 0.0), |(n, d), (r, p)| (n + r * p, d + p * p));
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

/// Candidate lists per reference note, nearest onset first.
pub(crate) fn candidates(
    reference: &[MidiNote],
    pred: &[MidiNote],
    tol: f64,
    mode: NoteMode,
) -> Vec<Vec<usize>> {
    let onset: Vec<Vec<usize>> = reference
        .iter()
        .map(|r| {
            (0..pred.len())
                .filter(|&j| onset_candidate(r, &pred[j], tol))
                .collect()
        })
        .collect();
    let scale = velocity_scale(
        onset
            .iter()
            .enumerate()
            .flat_map(|(i, js)| js.iter().map(move |&j| (i, j)))
            .map(|(i, j)| (reference[i].velocity as f64, pred[j].velocity as f64)),
    );
    onset
        .into_iter()
        .enumerate()
        .map(|(i, js)| {
            let r = &reference[i];
            let mut js: Vec<usize> = js
                .into_iter()
                .filter(|&j| {
                    let p = &pred[j];
                    match mode {
                        NoteMode::Onset => true,
                        NoteMode::Velocity => {
                            (p.velocity as f64 * scale - r.velocity as f64).abs() <= VELOCITY_TOL + EPS
                        }
                        NoteMode::KeyOff | NoteMode::PedOff => offset_ok(r, p),
                    }
                })
                .collect();
            js.sort_by(|&a, &b| {
                let da = (pred[a].onset_s - r.onset_s).abs();
                let db = (pred[b].onset_s - r.onset_s).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            });
            js
        })
        .collect()
}

/// Maximum-cardinality matching by augmenting paths; references are tried in index
/// order and each tries its nearest candidates first.
pub(crate) fn max_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<(usize, usize)> {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; n_right];
    for u in 0..adj.len() {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut seen, &mut owner);
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(v, u)| u.map(|u| (u, v)))
        .collect();
    pairs.sort();
    pairs
}

/// Matched `(reference, prediction)` index pairs under `mode`.
pub fn match_notes(
    reference: &MidiPerformance,
    pred: &MidiPerformance,
    onset_tol_s: f64,
    mode: NoteMode,
) -> Vec<(usize, usize)> {
    let (r, p) = if mode == NoteMode::PedOff {
        (extend_pedoff(reference), extend_pedoff(pred))
    } else {
        (reference.clone(), pred.clone())
    };
    let adj = candidates(&r.notes, &p.notes, onset_tol_s, mode);
    max_matching(&adj, p.notes.len())
}

pub fn note_f1(
    reference: &MidiPerformance,
    pred: &MidiPerformance,
    onset_tol_s: f64,
    mode: NoteMode,
) -> MatchReport {
    let matched = match_notes(reference, pred, onset_tol_s, mode).len();
    MatchReport::from_counts(reference.notes.len(), pred.notes.len(), matched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::midi::PedalStream;

    fn perf(notes: &[(u8, f64, f64, u8)]) -> MidiPerformance {
        MidiPerformance::new(
            notes
                .iter()
                .map(|&(m, a, b, v)| MidiNote::new(m, a, b, v).unwrap())
                .collect(),
            PedalStream::default(),
        )
        .unwrap()
    }

    #[test]
    fn identity_scores_one_in_every_mode() {
        let r = perf(&[(60, 0.0, 0.5, 80), (64, 0.5, 1.0, 60), (67, 1.0, 2.0, 40)]);
        for mode in [NoteMode::Onset, NoteMode::Velocity, NoteMode::KeyOff, NoteMode::PedOff] {
            let m = note_f1(&r, &r, DEFAULT_ONSET_TOL_S, mode);
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn onset_tolerance_boundary() {
        let r = perf(&[(60, 1.000, 2.0, 64)]);
        let hit = perf(&[(60, 1.049, 2.0, 64)]);
        let miss = perf(&[(60, 1.051, 2.0, 64)]);
        assert_eq!(note_f1(&r, &hit, 0.05, NoteMode::Onset).n_matched, 1);
        assert_eq!(note_f1(&r, &miss, 0.05, NoteMode::Onset).n_matched, 0);
    }

    #[test]
    fn one_wrong_pitch_of_three() {
        let r = perf(&[(60, 0.0, 1.0, 64), (62, 1.0, 2.0, 64), (64, 2.0, 3.0, 64)]);
        let p = perf(&[(60, 0.0, 1.0, 64), (63, 1.0, 2.0, 64), (64, 2.0, 3.0, 64)]);
        let m = note_f1(&r, &p, 0.05, NoteMode::Onset);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn velocity_is_compared_after_rescaling() {
        let r = perf(&[(60, 0.0, 1.0, 100), (62, 1.0, 2.0, 50)]);
        let p = perf(&[(60, 0.0, 1.0, 50), (62, 1.0, 2.0, 25)]);
        assert_eq!(note_f1(&r, &p, 0.05, NoteMode::Velocity).n_matched, 2);
        // scale 5500/2600: 105.8 vs 100 passes, 21.2 vs 50 fails
        let q = perf(&[(60, 0.0, 1.0, 50), (62, 1.0, 2.0, 10)]);
        assert_eq!(note_f1(&r, &q, 0.05, NoteMode::Velocity).n_matched, 1);
    }

    #[test]
    fn greedy_would_lose_a_match() {
        // the nearest candidate of ref 0 is the only candidate of ref 1
        let r = perf(&[(60, 1.00, 1.5, 64), (60, 1.06, 1.6, 64)]);
        let p = perf(&[(60, 0.96, 1.5, 64), (60, 1.02, 1.6, 64)]);
        assert_eq!(note_f1(&r, &p, 0.05, NoteMode::Onset).n_matched, 2);
    }
}
