//! Fixtures and a random generator of valid score documents shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use intermo::score::{
    Articulation, Barline, Channel, Element, EventKind, LitePitch, MetricInterval, Moment, Pitch,
    PitchEvent, SpelledPitch, Staff, Step, Timestamp,
};
use intermo::text::{validate_with, ValidateOptions};
use intermo::{Dialect, ScoreDoc};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

/// The two-bar excerpt of the banner figure.
pub const FIG1_A2S: &str = "|3/4k-4 PR: C5 1/4 PL: A-3 C4 F4 1/8 PR: c5 D-5 1/8 PL: a-3 c4 f4 A-3 C4 F4 \
PR: d-5 D-5 1/8 d-5 C5 1/8 PL: a-3 c4 f4 PR: c5 |3/4k-4 B4 1/8 b4 A#4 1/8 PL: G3 D4 F4 PR: a#4 B4 \
1/4 PL: g3 d4 f4 G3 D-4 F4 PR: b4 G5 1/4 PL: g3 d-4 f4 PR: g5";

/// Same excerpt with stamps. Bar 1 and the first stamp of bar 2 are the figure's;
/// the remaining bar 2 stamps are made up.
pub const FIG1_TAST: &str = "|3/4k-4 PR: C5 [0.20] 1/4 PL: A-3 C4 F4 [1.40] 1/8 PR: c5 D-5 [1.80] \
1/8 PL: a-3 c4 f4 A-3 C4 F4 PR: d-5 D-5 [2.10] 1/8 d-5 C5 [2.70] 1/8 PL: a-3 c4 f4 PR: c5 [3.20] \
|3/4k-4 B4 [3.20] 1/8 b4 A#4 [3.55] 1/8 PL: G3 D4 F4 PR: a#4 B4 [3.90] 1/4 PL: g3 d4 f4 G3 D-4 F4 \
PR: b4 G5 [4.60] 1/4 PL: g3 d-4 f4 PR: g5 [5.30]";

const METERS: [(u32, u32); 7] = [(2, 4), (3, 4), (4, 4), (6, 8), (3, 8), (2, 2), (5, 8)];
const STEPS_16: [u64; 8] = [1, 2, 2, 3, 4, 4, 6, 8];

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    /// TAST, TAST_lite, A2S or A2S_lite.
    pub dialect: Dialect,
    /// Performance length to reach, in seconds (the last measure may overshoot).
    pub seconds: f64,
    /// Allow an incomplete first measure.
    pub pickup: bool,
}

impl GenConfig {
    pub fn new(dialect: Dialect, seconds: f64) -> Self {
        GenConfig {
            dialect,
            seconds,
            pickup: true,
        }
    }
}

pub fn spelled_candidates(midi: u8) -> Vec<(SpelledPitch, u32)> {
    let mut out = Vec::new();
    for step in Step::ALL {
        for alter in -2i8..=2 {
            let base = midi as i32 - step.offset() - alter as i32;
            if base % 12 != 0 {
                continue;
            }
            let octave = base / 12 - 1;
            if !(0..=9).contains(&octave) {
                continue;
            }
            if let Ok(p) = SpelledPitch::new(step, alter, octave as u8) {
                let w = match alter.abs() {
                    0 => 12,
                    1 => 6,
                    _ => 1,
                };
                out.push((p, w));
            }
        }
    }
    out
}

pub fn random_pitch<R: Rng>(rng: &mut R, midi: u8, spelled: bool) -> Pitch {
    if !spelled {
        return Pitch::Lite(LitePitch::new(midi).unwrap());
    }
    let cands = spelled_candidates(midi);
    let p = cands.choose_weighted(rng, |c| c.1).unwrap().0;
    Pitch::Spelled(p)
}

fn staff_range(s: Staff) -> (u8, u8) {
    match s {
        Staff::PL => (33, 62),
        Staff::PR => (57, 91),
    }
}

struct State {
    open: BTreeMap<Channel, Pitch>,
    age: BTreeMap<Channel, u32>,
}

impl State {
    fn offsets<R: Rng>(&mut self, rng: &mut R, all: bool) -> Vec<PitchEvent> {
        let mut out = Vec::new();
        let chans: Vec<Channel> = self.open.keys().copied().collect();
        for ch in chans {
            let age = self.age[&ch];
            if all || rng.gen_bool(0.45) || age >= 5 {
                let p = self.open.remove(&ch).unwrap();
                self.age.remove(&ch);
                out.push(PitchEvent::offset(ch.staff, p));
            }
        }
        out
    }

    fn onsets<R: Rng>(&mut self, rng: &mut R, spelled: bool, force: bool) -> Vec<PitchEvent> {
        let mut n = *[0usize, 1, 1, 1, 2, 2, 3].choose(rng).unwrap();
        if force {
            n = n.max(1);
        }
        if self.open.len() >= 8 {
            n = n.min(usize::from(force));
        }
        let mut out: Vec<PitchEvent> = Vec::new();
        // chords stay on one staff most of the time
        let main = if rng.gen_bool(0.5) { Staff::PL } else { Staff::PR };
        let mut tries = 0;
        while out.len() < n && tries < 50 {
            tries += 1;
            let staff = if rng.gen_bool(0.8) { main } else if main == Staff::PL { Staff::PR } else { Staff::PL };
            let (lo, hi) = staff_range(staff);
            let midi = rng.gen_range(lo..=hi);
            // one key cannot be held on both staves
            if self.open.keys().any(|c| c.midi == midi) || out.iter().any(|e| e.pitch.midi() == midi) {
                continue;
            }
            let mut e = PitchEvent::onset(Some(staff), random_pitch(rng, midi, spelled));
            if rng.gen_bool(0.08) {
                e.articulations.push(if rng.gen_bool(0.5) {
                    Articulation::Staccato
                } else {
                    Articulation::Accent
                });
            }
            out.push(e);
        }
        for e in &out {
            self.open.insert(e.channel(), e.pitch);
            self.age.insert(e.channel(), 0);
        }
        out
    }

    fn tick(&mut self) {
        for a in self.age.values_mut() {
            *a += 1;
        }
    }
}

/// Splits `len` sixteenths into interval values, with the odd triplet group.
fn measure_steps<R: Rng>(rng: &mut R, len16: u64) -> Vec<Ratio<u64>> {
    let mut out = Vec::new();
    let mut left = len16;
    while left > 0 {
        if left >= 4 && rng.gen_bool(0.06) {
            for _ in 0..3 {
                out.push(Ratio::new(1, 12));
            }
            left -= 4;
            continue;
        }
        let s = *STEPS_16.iter().filter(|s| **s <= left).collect::<Vec<_>>().choose(rng).unwrap();
        out.push(Ratio::new(*s, 16));
        left -= s;
    }
    out
}

/// A random document that validates without errors (long form for stamps past 40 s).
/// Every staff context change carries a marker; all notes are closed at the end.
pub fn random_doc<R: Rng>(rng: &mut R, cfg: GenConfig) -> ScoreDoc {
    let spelled = cfg.dialect.is_spelled();
    let stamped = cfg.dialect.has_timestamps();
    let secs_per_whole = rng.gen_range(1.6..3.2);
    let start = rng.gen_range(0.05..0.6);
    let mut st = State {
        open: BTreeMap::new(),
        age: BTreeMap::new(),
    };
    let mut elements: Vec<Element> = Vec::new();
    let mut pos = Ratio::<u64>::new(0, 1);
    let mut last_bin = 0u32;
    let mut stamp = |elements: &mut Vec<Element>, pos: Ratio<u64>, rng: &mut R| {
        if !stamped {
            return;
        }
        let t = start + (*pos.numer() as f64 / *pos.denom() as f64) * secs_per_whole + rng.gen_range(-0.02..0.02);
        let bin = Timestamp::from_seconds(t).bin.max(last_bin);
        last_bin = bin;
        elements.push(Element::Timestamp(Timestamp::new(bin)));
    };
    let (mut num, mut den) = *METERS.choose(rng).unwrap();
    let key = rng.gen_range(-7i8..=7);
    let mut first = true;
    loop {
        if !first && rng.gen_bool(0.05) {
            (num, den) = *METERS.choose(rng).unwrap();
        }
        let bar = Barline::new(num, den, key).unwrap();
        let full16 = 16 * num as u64 / den as u64;
        let len16 = if first && cfg.pickup && rng.gen_bool(0.25) {
            rng.gen_range(1..full16)
        } else {
            full16
        };
        // pitch changes at the barline: releases stay in the closing measure half the time
        if !first {
            let offs = st.offsets(rng, false);
            let split = !offs.is_empty() && rng.gen_bool(0.5);
            let mut events = offs;
            if split {
                elements.push(Element::Moment(Moment::new(events)));
                stamp(&mut elements, pos, rng);
                events = Vec::new();
            }
            elements.push(Element::Barline(bar));
            events.extend(st.onsets(rng, spelled, events.is_empty()));
            elements.push(Element::Moment(Moment::new(events)));
            stamp(&mut elements, pos, rng);
        } else {
            elements.push(Element::Barline(bar));
            // a chord opens every piece
            let mut events = Vec::new();
            while events.len() < 2 {
                events.extend(st.onsets(rng, spelled, true));
            }
            elements.push(Element::Moment(Moment::new(events)));
            stamp(&mut elements, pos, rng);
        }
        let steps = measure_steps(rng, len16);
        for (j, s) in steps.iter().enumerate() {
            elements.push(Element::Interval(MetricInterval::from_ratio(*s).unwrap()));
            pos += *s;
            st.tick();
            if j + 1 < steps.len() {
                let mut events = st.offsets(rng, false);
                let force = events.is_empty();
                events.extend(st.onsets(rng, spelled, force));
                elements.push(Element::Moment(Moment::new(events)));
                stamp(&mut elements, pos, rng);
            }
        }
        first = false;
        let now = start + (*pos.numer() as f64 / *pos.denom() as f64) * secs_per_whole;
        if now >= cfg.seconds {
            break;
        }
    }
    let closing = st.offsets(rng, true);
    if !closing.is_empty() {
        elements.push(Element::Moment(Moment::new(closing)));
        stamp(&mut elements, pos, rng);
    }
    let mut doc = ScoreDoc::with_elements(cfg.dialect, elements);
    doc.canonicalize().unwrap();
    let r = validate_with(&doc, ValidateOptions::long_form());
    assert!(!r.has_errors(), "generator produced an invalid doc: {r:?}");
    doc
}

/// Per-channel Dyck check written independently of the validator: offsets are applied
/// before onsets inside a moment and no channel may go below zero or above one.
pub fn channels_balanced(doc: &ScoreDoc) -> bool {
    let mut depth: BTreeMap<Channel, i32> = doc.meta.carried.iter().map(|c| (*c, 1)).collect();
    for m in doc.moments() {
        for kind in [EventKind::Offset, EventKind::Onset] {
            for e in m.events.iter().filter(|e| e.kind == kind) {
                let d = depth.entry(e.channel()).or_insert(0);
                *d += if kind == EventKind::Onset { 1 } else { -1 };
                if !(0..=1).contains(d) {
                    return false;
                }
            }
        }
    }
    true
}

/// Onsets minus offsets per channel.
pub fn channel_balance(doc: &ScoreDoc) -> BTreeMap<Channel, i64> {
    let mut out = BTreeMap::new();
    for m in doc.moments() {
        for e in &m.events {
            *out.entry(e.channel()).or_insert(0) += if e.kind == EventKind::Onset { 1 } else { -1 };
        }
    }
    out.retain(|_, v| *v != 0);
    out
}
