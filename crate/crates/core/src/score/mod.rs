//! In-memory InterMo content: pitches, events, moments and documents.

mod pitch;

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::dialect::Dialect;
pub use pitch::{midi_number, LitePitch, Pitch, SpelledPitch, Step, PIANO_HIGH, PIANO_LOW};

/// Largest timestamp bin inside one 40 s window.
pub const MAX_BIN: u32 = 4000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("alteration {0} outside [-2, 2]")]
    Alteration(i8),
    #[error("octave {0} outside [0, 9]")]
    Octave(u8),
    #[error("MIDI number {0} outside [0, 127]")]
    MidiRange(i32),
    #[error("MIDI number {0} outside the piano range [21, 108]")]
    OutsidePiano(i32),
    #[error("interval {0}/{1} is not a positive reduced fraction")]
    Interval(u32, u32),
    #[error("invalid meter {0}/{1}")]
    Meter(u32, u32),
    #[error("key signature {0} outside [-7, 7]")]
    Key(i8),
    #[error("duplicate event {kind} {staff} MIDI {midi} in one moment")]
    DuplicateEvent {
        staff: StaffLabel,
        kind: EventKind,
        midi: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Staff {
    /// Left-hand (lower) staff.
    PL,
    /// Right-hand (upper) staff.
    PR,
}

impl Staff {
    pub fn marker(self) -> &'static str {
        match self {
            Staff::PL => "PL:",
            Staff::PR => "PR:",
        }
    }
}

/// Display helper for an optional staff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaffLabel(pub Option<Staff>);

impl fmt::Display for StaffLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(Staff::PL) => f.write_str("PL"),
            Some(Staff::PR) => f.write_str("PR"),
            None => f.write_str("-"),
        }
    }
}

/// Offsets sort before onsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Offset,
    Onset,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Offset => "offset",
            EventKind::Onset => "onset",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Articulation {
    Staccato,
    Accent,
}

impl Articulation {
    pub fn symbol(self) -> char {
        match self {
            Articulation::Staccato => '.',
            Articulation::Accent => '>',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '.' => Some(Articulation::Staccato),
            '>' => Some(Articulation::Accent),
            _ => None,
        }
    }
}

/// A (staff, key) pair; the unit of onset/offset balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub staff: Option<Staff>,
    pub midi: u8,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, MIDI {})", StaffLabel(self.staff), self.midi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PitchEvent {
    pub kind: EventKind,
    pub staff: Option<Staff>,
    pub pitch: Pitch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub articulations: Vec<Articulation>,
    /// A staff marker precedes this event in the text form.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub marked: bool,
}

impl PitchEvent {
    pub fn onset(staff: Option<Staff>, pitch: Pitch) -> Self {
        PitchEvent {
            kind: EventKind::Onset,
            staff,
            pitch,
            velocity: None,
            articulations: Vec::new(),
            marked: false,
        }
    }

    pub fn offset(staff: Option<Staff>, pitch: Pitch) -> Self {
        PitchEvent {
            kind: EventKind::Offset,
            ..PitchEvent::onset(staff, pitch)
        }
    }

    pub fn with_velocity(mut self, v: u8) -> Self {
        self.velocity = Some(v);
        self
    }

    pub fn channel(&self) -> Channel {
        Channel {
            staff: self.staff,
            midi: self.pitch.midi(),
        }
    }

    fn sort_key(&self) -> (Option<Staff>, EventKind, u8) {
        (self.staff, self.kind, self.pitch.midi())
    }

    /// Pitch token text including articulation suffixes.
    pub fn render_pitch(&self) -> String {
        let mut s = self.pitch.render(self.kind == EventKind::Onset);
        for a in &self.articulations {
            s.push(a.symbol());
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PedalToken {
    On,
    Off,
}

impl PedalToken {
    pub fn text(self) -> &'static str {
        match self {
            PedalToken::On => "CC64:on",
            PedalToken::Off => "CC64:off",
        }
    }
}

/// Simultaneous pitch-state changes. In AMT text, sustain-pedal tokens that share
/// the bin are carried here and render ahead of the note events.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Moment {
    pub events: Vec<PitchEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pedal: Vec<PedalToken>,
}

impl Moment {
    pub fn new(events: Vec<PitchEvent>) -> Self {
        Moment {
            events,
            pedal: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty() && self.pedal.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.events
            .windows(2)
            .all(|w| w[0].sort_key() < w[1].sort_key())
    }
}

/// Stable canonical order: staff (PL before PR), offsets before onsets, ascending MIDI.
/// Articulations play no part in the order.
pub fn canonical_sort_moment(events: &[PitchEvent]) -> Result<Vec<PitchEvent>, ScoreError> {
    let mut out = events.to_vec();
    out.sort_by_key(PitchEvent::sort_key);
    for w in out.windows(2) {
        if w[0].sort_key() == w[1].sort_key() {
            return Err(ScoreError::DuplicateEvent {
                staff: StaffLabel(w[0].staff),
                kind: w[0].kind,
                midi: w[0].pitch.midi(),
            });
        }
    }
    Ok(out)
}

/// Notated duration between consecutive moments, a positive reduced fraction of a whole note.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr")]
pub struct MetricInterval {
    num: u32,
    den: u32,
}

#[derive(Deserialize)]
struct IntervalRepr {
    num: u32,
    den: u32,
}

impl TryFrom<IntervalRepr> for MetricInterval {
    type Error = ScoreError;
    fn try_from(r: IntervalRepr) -> Result<Self, ScoreError> {
        MetricInterval::new(r.num, r.den)
    }
}

impl MetricInterval {
    /// Requires `num > 0`, `den > 0` and `gcd(num, den) = 1`.
    pub fn new(num: u32, den: u32) -> Result<Self, ScoreError> {
        if num == 0 || den == 0 || num_integer::gcd(num, den) != 1 {
            return Err(ScoreError::Interval(num, den));
        }
        Ok(MetricInterval { num, den })
    }

    /// Reduces `r` first; fails only on non-positive values.
    pub fn from_ratio(r: Ratio<u64>) -> Result<Self, ScoreError> {
        let (n, d) = (*r.numer(), *r.denom());
        match (u32::try_from(n), u32::try_from(d)) {
            (Ok(n), Ok(d)) => MetricInterval::new(n, d),
            _ => Err(ScoreError::Interval(u32::MAX, u32::MAX)),
        }
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn value(&self) -> Ratio<u64> {
        Ratio::new_raw(self.num as u64, self.den as u64)
    }
}

impl fmt::Display for MetricInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

pub const METER_DENOMINATORS: [u32; 6] = [1, 2, 4, 8, 16, 32];

/// Measure boundary with meter and key signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BarlineRepr")]
pub struct Barline {
    meter_num: u32,
    meter_den: u32,
    key: i8,
}

#[derive(Deserialize)]
struct BarlineRepr {
    meter_num: u32,
    meter_den: u32,
    key: i8,
}

impl TryFrom<BarlineRepr> for Barline {
    type Error = ScoreError;
    fn try_from(r: BarlineRepr) -> Result<Self, ScoreError> {
        Barline::new(r.meter_num, r.meter_den, r.key)
    }
}

impl Barline {
    pub fn new(meter_num: u32, meter_den: u32, key: i8) -> Result<Self, ScoreError> {
        if meter_num == 0 || !METER_DENOMINATORS.contains(&meter_den) {
            return Err(ScoreError::Meter(meter_num, meter_den));
        }
        if !(-7..=7).contains(&key) {
            return Err(ScoreError::Key(key));
        }
        Ok(Barline {
            meter_num,
            meter_den,
            key,
        })
    }

    pub fn meter_num(&self) -> u32 {
        self.meter_num
    }

    pub fn meter_den(&self) -> u32 {
        self.meter_den
    }

    pub fn key(&self) -> i8 {
        self.key
    }

    /// Measure length as a fraction of a whole note.
    pub fn measure_len(&self) -> Ratio<u64> {
        Ratio::new(self.meter_num as u64, self.meter_den as u64)
    }
}

impl fmt::Display for Barline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}/{}k{}", self.meter_num, self.meter_den, self.key)
    }
}

/// 10 ms time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Timestamp {
    pub bin: u32,
}

impl Timestamp {
    pub fn new(bin: u32) -> Self {
        Timestamp { bin }
    }

    /// Rounds half away from zero onto the 10 ms grid; negative input clamps to 0.
    pub fn from_seconds(s: f64) -> Self {
        let b = (s * 100.0).round();
        Timestamp {
            bin: if b <= 0.0 { 0 } else { b as u32 },
        }
    }

    pub fn seconds(&self) -> f64 {
        self.bin as f64 / 100.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}.{:02}]", self.bin / 100, self.bin % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    Barline(Barline),
    /// Bare `|` of the DBD dialect.
    Downbeat,
    Interval(MetricInterval),
    Moment(Moment),
    /// `*` beat marker.
    Beat,
    Timestamp(Timestamp),
}

impl Element {
    pub fn as_moment(&self) -> Option<&Moment> {
        match self {
            Element::Moment(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_timestamp(&self) -> Option<Timestamp> {
        match self {
            Element::Timestamp(t) => Some(*t),
            _ => None,
        }
    }

    pub fn is_bar(&self) -> bool {
        matches!(self, Element::Barline(_) | Element::Downbeat)
    }
}

/// Metadata that travels with a document but has no text form.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DocMeta {
    /// Channels sounding when the document starts (chunk continuation).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub carried: Vec<Channel>,
    /// Element indices of timestamps obtained by interpolation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interpolated: Vec<usize>,
    /// Stamps hold deltas to the previous stamp rather than absolute times.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub relative_timestamps: bool,
}

impl DocMeta {
    pub fn is_empty(&self) -> bool {
        *self == DocMeta::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreDoc {
    pub dialect: Dialect,
    pub elements: Vec<Element>,
    #[serde(default, skip_serializing_if = "DocMeta::is_empty")]
    pub meta: DocMeta,
}

impl ScoreDoc {
    pub fn new(dialect: Dialect) -> Self {
        ScoreDoc {
            dialect,
            elements: Vec::new(),
            meta: DocMeta::default(),
        }
    }

    pub fn with_elements(dialect: Dialect, elements: Vec<Element>) -> Self {
        ScoreDoc {
            dialect,
            elements,
            meta: DocMeta::default(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = Timestamp> + '_ {
        self.elements.iter().filter_map(Element::as_timestamp)
    }

    pub fn moments(&self) -> impl Iterator<Item = &Moment> + '_ {
        self.elements.iter().filter_map(Element::as_moment)
    }

    /// Sorts every moment canonically and recomputes staff markers so that one
    /// appears exactly where the staff context changes.
    pub fn canonicalize(&mut self) -> Result<(), ScoreError> {
        for el in &mut self.elements {
            if let Element::Moment(m) = el {
                m.events = canonical_sort_moment(&m.events)?;
            }
        }
        self.remark();
        Ok(())
    }

    /// Recomputes staff markers without touching event order.
    pub fn remark(&mut self) {
        let mut ctx: Option<Staff> = None;
        for el in &mut self.elements {
            if let Element::Moment(m) = el {
                for e in &mut m.events {
                    e.marked = e.staff.is_some() && e.staff != ctx;
                    if e.staff.is_some() {
                        ctx = e.staff;
                    }
                }
            }
        }
    }

    /// Same document with all timestamps removed.
    pub fn strip_timestamps(&self) -> ScoreDoc {
        ScoreDoc {
            dialect: self.dialect,
            elements: self
                .elements
                .iter()
                .filter(|e| !matches!(e, Element::Timestamp(_)))
                .cloned()
                .collect(),
            meta: DocMeta {
                interpolated: Vec::new(),
                relative_timestamps: false,
                ..self.meta.clone()
            },
        }
    }
}
