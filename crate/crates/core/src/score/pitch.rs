use std::fmt;

use serde::{Deserialize, Serialize};

use super::ScoreError;

/// Lowest and highest piano keys (A0, C8).
pub const PIANO_LOW: u8 = 21;
pub const PIANO_HIGH: u8 = 108;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Step {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Step {
    pub const ALL: [Step; 7] = [Step::C, Step::D, Step::E, Step::F, Step::G, Step::A, Step::B];

    /// Semitones above C.
    pub fn offset(self) -> i32 {
        match self {
            Step::C => 0,
            Step::D => 2,
            Step::E => 4,
            Step::F => 5,
            Step::G => 7,
            Step::A => 9,
            Step::B => 11,
        }
    }

    pub fn upper(self) -> char {
        match self {
            Step::C => 'C',
            Step::D => 'D',
            Step::E => 'E',
            Step::F => 'F',
            Step::G => 'G',
            Step::A => 'A',
            Step::B => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Step> {
        Some(match c.to_ascii_uppercase() {
            'C' => Step::C,
            'D' => Step::D,
            'E' => Step::E,
            'F' => Step::F,
            'G' => Step::G,
            'A' => Step::A,
            'B' => Step::B,
            _ => return None,
        })
    }
}

/// A pitch with its notational spelling, e.g. `A-3` (A flat 3) or `A#4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpelledRepr")]
pub struct SpelledPitch {
    step: Step,
    alter: i8,
    octave: u8,
}

#[derive(Deserialize)]
struct SpelledRepr {
    step: Step,
    alter: i8,
    octave: u8,
}

impl TryFrom<SpelledRepr> for SpelledPitch {
    type Error = ScoreError;
    fn try_from(r: SpelledRepr) -> Result<Self, ScoreError> {
        SpelledPitch::new(r.step, r.alter, r.octave)
    }
}

impl SpelledPitch {
    /// Builds a spelled pitch, enforcing alteration in [-2, 2], octave in [0, 9]
    /// and the piano range for the resulting key.
    pub fn new(step: Step, alter: i8, octave: u8) -> Result<Self, ScoreError> {
        if !(-2..=2).contains(&alter) {
            return Err(ScoreError::Alteration(alter));
        }
        if octave > 9 {
            return Err(ScoreError::Octave(octave));
        }
        let midi = midi_number(step, alter, octave)?;
        if !(PIANO_LOW..=PIANO_HIGH).contains(&midi) {
            return Err(ScoreError::OutsidePiano(midi as i32));
        }
        Ok(SpelledPitch { step, alter, octave })
    }

    pub fn step(&self) -> Step {
        self.step
    }

    pub fn alter(&self) -> i8 {
        self.alter
    }

    pub fn octave(&self) -> u8 {
        self.octave
    }

    pub fn midi(&self) -> u8 {
        // range was checked at construction
        (12 * (self.octave as i32 + 1) + self.step.offset() + self.alter as i32) as u8
    }

    /// Collapses the spelling to the sharp-preferred key name.
    pub fn to_lite(&self) -> LitePitch {
        LitePitch { midi: self.midi() }
    }

    pub fn render(&self, onset: bool) -> String {
        let mut s = String::with_capacity(4);
        let letter = self.step.upper();
        s.push(if onset { letter } else { letter.to_ascii_lowercase() });
        let acc = if self.alter > 0 { '#' } else { '-' };
        for _ in 0..self.alter.unsigned_abs() {
            s.push(acc);
        }
        s.push(char::from(b'0' + self.octave));
        s
    }
}

/// `12 * (octave + 1) + step offset + alter`, checked against the MIDI range.
pub fn midi_number(step: Step, alter: i8, octave: u8) -> Result<u8, ScoreError> {
    let n = 12 * (octave as i32 + 1) + step.offset() + alter as i32;
    if !(0..=127).contains(&n) {
        return Err(ScoreError::MidiRange(n));
    }
    Ok(n as u8)
}

/// A piano key without notational spelling. Renders sharp-preferred (`G#3`, never `A-3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "LiteRepr")]
pub struct LitePitch {
    midi: u8,
}

#[derive(Deserialize)]
struct LiteRepr {
    midi: u8,
}

impl TryFrom<LiteRepr> for LitePitch {
    type Error = ScoreError;
    fn try_from(r: LiteRepr) -> Result<Self, ScoreError> {
        LitePitch::new(r.midi)
    }
}

const SHARP_NAMES: [(Step, i8); 12] = [
    (Step::C, 0),
    (Step::C, 1),
    (Step::D, 0),
    (Step::D, 1),
    (Step::E, 0),
    (Step::F, 0),
    (Step::F, 1),
    (Step::G, 0),
    (Step::G, 1),
    (Step::A, 0),
    (Step::A, 1),
    (Step::B, 0),
];

impl LitePitch {
    pub fn new(midi: u8) -> Result<Self, ScoreError> {
        if !(PIANO_LOW..=PIANO_HIGH).contains(&midi) {
            return Err(ScoreError::OutsidePiano(midi as i32));
        }
        Ok(LitePitch { midi })
    }

    pub fn midi(&self) -> u8 {
        self.midi
    }

    /// The sharp-preferred spelling of this key.
    pub fn spelling(&self) -> SpelledPitch {
        let (step, alter) = SHARP_NAMES[(self.midi % 12) as usize];
        SpelledPitch {
            step,
            alter,
            octave: self.midi / 12 - 1,
        }
    }

    pub fn render(&self, onset: bool) -> String {
        self.spelling().render(onset)
    }

    /// True when `p` is exactly the sharp-preferred spelling of its key.
    pub fn is_canonical_spelling(p: &SpelledPitch) -> bool {
        p.to_lite().spelling() == *p
    }
}

/// Pitch as carried by an event: spelled in `spell` dialects, lite elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pitch {
    Spelled(SpelledPitch),
    Lite(LitePitch),
}

impl Pitch {
    pub fn midi(&self) -> u8 {
        match self {
            Pitch::Spelled(p) => p.midi(),
            Pitch::Lite(p) => p.midi(),
        }
    }

    pub fn is_spelled(&self) -> bool {
        matches!(self, Pitch::Spelled(_))
    }

    pub fn to_lite(&self) -> Pitch {
        match self {
            Pitch::Spelled(p) => Pitch::Lite(p.to_lite()),
            Pitch::Lite(p) => Pitch::Lite(*p),
        }
    }

    pub fn render(&self, onset: bool) -> String {
        match self {
            Pitch::Spelled(p) => p.render(onset),
            Pitch::Lite(p) => p.render(onset),
        }
    }
}

impl fmt::Display for SpelledPitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(true))
    }
}

impl fmt::Display for LitePitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(step: Step, alter: i8, octave: u8) -> SpelledPitch {
        SpelledPitch::new(step, alter, octave).unwrap()
    }

    #[test]
    fn midi_numbers() {
        assert_eq!(sp(Step::C, 0, 4).midi(), 60);
        assert_eq!(sp(Step::A, 1, 4).midi(), 70);
        assert_eq!(sp(Step::B, -1, 4).midi(), 70);
        assert_eq!(sp(Step::C, -2, 5).midi(), 70);
        assert_eq!(midi_number(Step::C, -2, 5).unwrap(), 70);
    }

    #[test]
    fn midi_number_range_error() {
        assert!(matches!(midi_number(Step::C, -1, 0), Ok(11)));
        assert!(matches!(midi_number(Step::B, 2, 9), Err(ScoreError::MidiRange(133))));
    }

    #[test]
    fn piano_range_enforced() {
        assert!(SpelledPitch::new(Step::A, 0, 0).is_ok());
        assert!(SpelledPitch::new(Step::G, 0, 0).is_err());
        assert!(SpelledPitch::new(Step::C, 0, 8).is_ok());
        assert!(SpelledPitch::new(Step::C, 1, 8).is_err());
        assert!(SpelledPitch::new(Step::C, 3, 4).is_err());
        assert!(LitePitch::new(20).is_err());
    }

    #[test]
    fn to_lite_examples() {
        let a_flat3 = sp(Step::A, -1, 3);
        assert_eq!(a_flat3.render(true), "A-3");
        assert_eq!(a_flat3.to_lite().midi(), 56);
        assert_eq!(a_flat3.to_lite().render(true), "G#3");
        assert_eq!(sp(Step::C, 0, 5).to_lite().render(true), "C5");
        assert_eq!(sp(Step::D, -1, 5).to_lite().render(true), "C#5");
        assert_eq!(sp(Step::D, -1, 5).to_lite().midi(), 73);
    }

    #[test]
    fn to_lite_preserves_midi_on_full_grid() {
        for octave in 0..=9u8 {
            for step in Step::ALL {
                for alter in -2..=2i8 {
                    if let Ok(p) = SpelledPitch::new(step, alter, octave) {
                        let lite = p.to_lite();
                        assert_eq!(lite.midi(), p.midi());
                        assert!(!lite.render(true).contains('-'));
                    }
                }
            }
        }
    }

    #[test]
    fn offsets_render_lowercase() {
        assert_eq!(sp(Step::A, 1, 4).render(false), "a#4");
        assert_eq!(sp(Step::E, -2, 3).render(false), "e--3");
    }
}
