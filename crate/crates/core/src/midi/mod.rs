//! Performance MIDI: note lists with sustain pedal, Standard MIDI File I/O,
//! the KeyOff/PedOff offset conventions, and conversion to and from AMT text.

mod amt;
mod smf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use amt::{amt_to_midi, midi_to_amt, AmtImport, WINDOW_S};
pub use smf::{read_smf, write_smf, SmfImport, TICKS_PER_SECOND};

/// Pedal values at or above this count as held.
pub const PEDAL_THRESHOLD: u8 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MidiError {
    #[error("malformed MIDI file at byte {offset}: {message}")]
    Smf { offset: usize, message: String },
    #[error("event at {time:.3} s falls outside the {WINDOW_S} s window")]
    WindowOverflow { time: f64 },
    #[error("element {index}: offset of MIDI {midi} without a sounding note")]
    UnmatchedOffset { index: usize, midi: u8 },
    #[error("two onsets of MIDI {midi} fall in the same 10 ms bin at {time:.2} s")]
    Collision { midi: u8, time: f64 },
    #[error("{0} is not a MIDI transcription dialect")]
    Dialect(crate::Dialect),
    #[error("invalid note: {0}")]
    Note(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidiNote {
    pub midi: u8,
    pub onset_s: f64,
    pub keyoff_s: f64,
    pub velocity: u8,
}

impl MidiNote {
    pub fn new(midi: u8, onset_s: f64, keyoff_s: f64, velocity: u8) -> Result<Self, MidiError> {
        let n = MidiNote {
            midi,
            onset_s,
            keyoff_s,
            velocity,
        };
        n.check()?;
        Ok(n)
    }

    fn check(&self) -> Result<(), MidiError> {
        if self.midi > 127 {
            return Err(MidiError::Note(format!("MIDI number {}", self.midi)));
        }
        if !(1..=127).contains(&self.velocity) {
            return Err(MidiError::Note(format!("velocity {}", self.velocity)));
        }
        if !(self.onset_s >= 0.0 && self.keyoff_s > self.onset_s) {
            return Err(MidiError::Note(format!(
                "onset {} / keyoff {}",
                self.onset_s, self.keyoff_s
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.keyoff_s - self.onset_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedalEvent {
    pub time_s: f64,
    pub value: u8,
}

/// CC64 stream with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PedalStream {
    pub events: Vec<PedalEvent>,
}

impl PedalStream {
    /// Sorts by time; of several values at one time the last one given wins.
    pub fn from_pairs(pairs: &[(f64, u8)]) -> Self {
        let mut events: Vec<PedalEvent> = pairs
            .iter()
            .map(|&(time_s, value)| PedalEvent { time_s, value })
            .collect();
        events.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        let mut out: Vec<PedalEvent> = Vec::with_capacity(events.len());
        for e in events {
            match out.last_mut() {
                Some(last) if last.time_s == e.time_s => *last = e,
                _ => out.push(e),
            }
        }
        PedalStream { events: out }
    }

    /// Controller value in effect at `t` (the last event at or before it), 0 before any event.
    pub fn value_at(&self, t: f64) -> u8 {
        let i = self.events.partition_point(|e| e.time_s <= t);
        if i == 0 {
            0
        } else {
            self.events[i - 1].value
        }
    }

    /// First time strictly after `t` at which the pedal is released.
    pub fn release_after(&self, t: f64) -> Option<f64> {
        let i = self.events.partition_point(|e| e.time_s <= t);
        self.events[i..]
            .iter()
            .find(|e| e.value < PEDAL_THRESHOLD)
            .map(|e| e.time_s)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MidiPerformance {
    pub notes: Vec<MidiNote>,
    pub pedal: PedalStream,
}

impl MidiPerformance {
    /// Validates every note and sorts by (onset, MIDI).
    pub fn new(mut notes: Vec<MidiNote>, pedal: PedalStream) -> Result<Self, MidiError> {
        for n in &notes {
            n.check()?;
        }
        notes.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s).then(a.midi.cmp(&b.midi)));
        Ok(MidiPerformance { notes, pedal })
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty() && self.pedal.events.is_empty()
    }

    /// Latest key release or pedal event.
    pub fn end_time(&self) -> f64 {
        let notes = self.notes.iter().map(|n| n.keyoff_s);
        let pedal = self.pedal.events.iter().map(|e| e.time_s);
        notes.chain(pedal).fold(0.0, f64::max)
    }
}

/// Moves each key release that happens while the pedal is held (CC64 >= 64) to the
/// next pedal release, or to the end of the performance when none follows.
pub fn extend_pedoff(p: &MidiPerformance) -> MidiPerformance {
    let end = p.end_time();
    let notes = p
        .notes
        .iter()
        .map(|n| {
            if p.pedal.value_at(n.keyoff_s) < PEDAL_THRESHOLD {
                return *n;
            }
            let off = p.pedal.release_after(n.keyoff_s).unwrap_or(end);
            MidiNote {
                keyoff_s: off.max(n.keyoff_s),
                ..*n
            }
        })
        .collect();
    MidiPerformance {
        notes,
        pedal: p.pedal.clone(),
    }
}
