use std::collections::{BTreeMap, HashMap};

use super::{MidiError, MidiNote, MidiPerformance, PedalStream, PEDAL_THRESHOLD};
use crate::dialect::Dialect;
use crate::score::{
    canonical_sort_moment, Element, EventKind, LitePitch, Moment, PedalToken, Pitch, PitchEvent, ScoreDoc,
    Timestamp,
};

/// Length of one encoder window; every event of a single AMT document lies before it.
pub const WINDOW_S: f64 = 40.0;

/// Velocity used for AMT_lite input, which carries none.
const DEFAULT_VELOCITY: u8 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct AmtImport {
    pub performance: MidiPerformance,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Bin {
    pedal: Vec<PedalToken>,
    events: Vec<PitchEvent>,
}

/// Renders a performance as AMT (with velocity and pedal) or AMT_lite.
pub fn midi_to_amt(p: &MidiPerformance, include_vel_pedal: bool) -> Result<ScoreDoc, MidiError> {
    let times = p
        .notes
        .iter()
        .flat_map(|n| [n.onset_s, n.keyoff_s])
        .chain(p.pedal.events.iter().map(|e| e.time_s));
    for t in times {
        if t >= WINDOW_S {
            return Err(MidiError::WindowOverflow { time: t });
        }
    }

    let mut bins: BTreeMap<u32, Bin> = BTreeMap::new();
    let mut by_key: HashMap<u8, Vec<&MidiNote>> = HashMap::new();
    for n in &p.notes {
        by_key.entry(n.midi).or_default().push(n);
    }
    for (key, mut notes) in by_key {
        notes.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
        let pitch = Pitch::Lite(LitePitch::new(key).map_err(|e| MidiError::Note(e.to_string()))?);
        let onsets: Vec<u32> = notes.iter().map(|n| Timestamp::from_seconds(n.onset_s).bin).collect();
        for (i, n) in notes.iter().enumerate() {
            let on = onsets[i];
            // a release lands at least one bin after its press and no later than the next press
            let mut off = Timestamp::from_seconds(n.keyoff_s).bin.max(on + 1);
            if let Some(&next) = onsets.get(i + 1) {
                if next <= on {
                    return Err(MidiError::Collision {
                        midi: key,
                        time: n.onset_s,
                    });
                }
                off = off.min(next);
            }
            let mut onset = PitchEvent::onset(None, pitch);
            if include_vel_pedal {
                onset.velocity = Some(n.velocity);
            }
            bins.entry(on).or_default().events.push(onset);
            bins.entry(off).or_default().events.push(PitchEvent::offset(None, pitch));
        }
    }
    if include_vel_pedal {
        let mut held = false;
        for e in &p.pedal.events {
            let now = e.value >= PEDAL_THRESHOLD;
            if now != held {
                let tok = if now { PedalToken::On } else { PedalToken::Off };
                bins.entry(Timestamp::from_seconds(e.time_s).bin)
                    .or_default()
                    .pedal
                    .push(tok);
                held = now;
            }
        }
    }

    let dialect = if include_vel_pedal {
        Dialect::Amt
    } else {
        Dialect::AmtLite
    };
    let mut doc = ScoreDoc::new(dialect);
    for (bin, b) in bins {
        let events = canonical_sort_moment(&b.events).map_err(|e| MidiError::Note(e.to_string()))?;
        doc.elements.push(Element::Moment(Moment {
            events,
            pedal: b.pedal,
        }));
        doc.elements.push(Element::Timestamp(Timestamp::new(bin)));
    }
    Ok(doc)
}

/// Inverse of [`midi_to_amt`]. Notes still sounding at the end close at the last stamp.
pub fn amt_to_midi(doc: &ScoreDoc) -> Result<AmtImport, MidiError> {
    if !doc.dialect.is_amt() {
        return Err(MidiError::Dialect(doc.dialect));
    }
    let carried: Vec<u8> = doc.meta.carried.iter().map(|c| c.midi).collect();
    let mut warnings = Vec::new();
    let mut open: HashMap<u8, (f64, u8)> = HashMap::new();
    let mut notes = Vec::new();
    let mut pedal = Vec::new();
    let mut last = 0.0f64;
    let els = &doc.elements;
    for (i, el) in els.iter().enumerate() {
        let Element::Moment(m) = el else { continue };
        let Some(Element::Timestamp(t)) = els.get(i + 1) else {
            return Err(MidiError::Note(format!("element {i}: moment without timestamp")));
        };
        let time = t.seconds();
        last = last.max(time);
        for p in &m.pedal {
            pedal.push((time, if *p == PedalToken::On { 127 } else { 0 }));
        }
        let offsets = m.events.iter().filter(|e| e.kind == EventKind::Offset);
        let onsets = m.events.iter().filter(|e| e.kind == EventKind::Onset);
        for e in offsets {
            let key = e.pitch.midi();
            match open.remove(&key) {
                Some((on, vel)) => notes.push(MidiNote::new(key, on, time, vel)?),
                None if carried.contains(&key) => {
                    warnings.push(format!("dropped release of carried key {key} at {time:.2} s"))
                }
                None => return Err(MidiError::UnmatchedOffset { index: i, midi: key }),
            }
        }
        for e in onsets {
            let vel = e.velocity.unwrap_or(DEFAULT_VELOCITY);
            if open.insert(e.pitch.midi(), (time, vel)).is_some() {
                return Err(MidiError::Note(format!(
                    "element {i}: onset of sounding key {}",
                    e.pitch.midi()
                )));
            }
        }
    }
    let mut still: Vec<_> = open.into_iter().collect();
    still.sort_by_key(|(k, _)| *k);
    for (key, (on, vel)) in still {
        let off = if last > on { last } else { on + 0.01 };
        warnings.push(format!("key {key} never released; closed at {off:.2} s"));
        notes.push(MidiNote::new(key, on, off, vel)?);
    }
    Ok(AmtImport {
        performance: MidiPerformance::new(notes, PedalStream::from_pairs(&pedal))?,
        warnings,
    })
}
