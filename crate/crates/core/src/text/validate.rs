use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dialect::Dialect;
use crate::score::{
    Barline, Channel, Element, EventKind, PedalToken, ScoreDoc, Staff, StaffLabel, MAX_BIN,
};

/// Rule families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Element sequence grammar.
    G1,
    /// Dialect-level content restrictions.
    B1,
    /// Interval sums per measure.
    M1,
    /// Onset/offset balance per channel.
    D1,
    /// Canonical event order and staff markers.
    O1,
    /// Timestamp presence and monotonicity.
    T1,
    /// Pitch representation versus the dialect's spelling setting.
    S1,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Element index, or `None` for whole-document findings.
    pub index: Option<usize>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "[{}] element {}: {}", self.rule, i, self.message),
            None => write!(f, "[{}] {}", self.rule, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        !self.errors.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    pub fn has_rule(&self, rule: Rule) -> bool {
        self.errors.iter().chain(&self.warnings).any(|d| d.rule == rule)
    }

    pub fn errors_of(&self, rule: Rule) -> impl Iterator<Item = &Diagnostic> {
        self.errors.iter().filter(move |d| d.rule == rule)
    }

    pub fn summary(&self) -> String {
        match self.errors.first() {
            Some(first) if self.errors.len() > 1 => {
                format!("{first} (and {} more errors)", self.errors.len() - 1)
            }
            Some(first) => first.to_string(),
            None => format!("{} warnings", self.warnings.len()),
        }
    }

    fn error(&mut self, index: Option<usize>, rule: Rule, message: impl Into<String>) {
        self.errors.push(Diagnostic {
            index,
            rule,
            message: message.into(),
        });
    }

    fn warn(&mut self, index: Option<usize>, rule: Rule, message: impl Into<String>) {
        self.warnings.push(Diagnostic {
            index,
            rule,
            message: message.into(),
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Upper bound on timestamp bins; `None` accepts any length.
    pub max_bin: Option<u32>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            max_bin: Some(MAX_BIN),
        }
    }
}

impl ValidateOptions {
    /// For multi-window documents such as stitcher output.
    pub fn long_form() -> Self {
        ValidateOptions { max_bin: None }
    }
}

pub fn validate(doc: &ScoreDoc) -> ValidationReport {
    validate_with(doc, ValidateOptions::default())
}

pub fn validate_with(doc: &ScoreDoc, opts: ValidateOptions) -> ValidationReport {
    let mut r = ValidationReport::default();
    if doc.elements.is_empty() {
        r.warn(None, Rule::G1, "no content");
        return r;
    }
    check_grammar(doc, &mut r);
    check_dialect(doc, &mut r);
    if doc.dialect.has_measures() {
        check_measures(doc, &mut r);
    }
    check_balance(doc, &mut r);
    check_order(doc, &mut r);
    check_timestamps(doc, opts, &mut r);
    check_spelling(doc, &mut r);
    r
}

fn check_grammar(doc: &ScoreDoc, r: &mut ValidationReport) {
    let d = doc.dialect;
    let mut prev: Option<&Element> = None;
    // last element other than a timestamp, for the moment-after-moment check
    let mut prev_core: Option<&Element> = None;
    for (i, el) in doc.elements.iter().enumerate() {
        match el {
            Element::Interval(_) => {
                if matches!(prev, Some(Element::Interval(_))) {
                    r.error(Some(i), Rule::G1, "adjacent metric intervals");
                }
            }
            Element::Moment(m) => {
                if m.is_empty() {
                    r.error(Some(i), Rule::G1, "empty moment");
                }
                if d.is_pitched_score() && matches!(prev_core, Some(Element::Moment(_))) {
                    r.error(Some(i), Rule::G1, "consecutive moments without an interval");
                }
                for e in &m.events {
                    if e.kind == EventKind::Offset && !e.articulations.is_empty() {
                        r.error(Some(i), Rule::G1, "offset carries articulations");
                    }
                    if e.kind == EventKind::Offset && e.velocity.is_some() {
                        r.error(Some(i), Rule::G1, "offset carries a velocity");
                    }
                    if let Some(v) = e.velocity {
                        if !(1..=127).contains(&v) {
                            r.error(Some(i), Rule::G1, format!("velocity {v} outside [1, 127]"));
                        }
                    }
                }
            }
            Element::Timestamp(_) => {
                let attached = if d.is_beats() {
                    matches!(prev, Some(Element::Barline(_) | Element::Downbeat | Element::Beat))
                } else {
                    matches!(prev, Some(Element::Moment(_)))
                };
                if !attached {
                    let what = if d.is_beats() {
                        "a barline or beat"
                    } else {
                        "a moment"
                    };
                    r.error(Some(i), Rule::G1, format!("timestamp does not follow {what}"));
                }
            }
            _ => {}
        }
        if !matches!(el, Element::Timestamp(_)) {
            prev_core = Some(el);
        }
        prev = Some(el);
    }
}

fn check_dialect(doc: &ScoreDoc, r: &mut ValidationReport) {
    let d = doc.dialect;
    let first = &doc.elements[0];
    if d.has_measures() && !matches!(first, Element::Barline(_)) {
        r.error(Some(0), Rule::B1, "content before first barline");
    }
    if d == Dialect::Dbd && !matches!(first, Element::Downbeat) {
        r.error(Some(0), Rule::B1, "content before first barline");
    }
    for (i, el) in doc.elements.iter().enumerate() {
        match el {
            Element::Barline(_) if !d.has_measures() => {
                r.error(Some(i), Rule::B1, format!("{d} has no meter barlines"))
            }
            Element::Downbeat if d != Dialect::Dbd => {
                r.error(Some(i), Rule::B1, format!("bare barline in {d}"))
            }
            Element::Interval(_) if !d.has_measures() => {
                r.error(Some(i), Rule::B1, format!("{d} has no metric intervals"))
            }
            Element::Beat if !d.is_beats() => {
                r.error(Some(i), Rule::B1, format!("beat marker in {d}"))
            }
            Element::Timestamp(_) if !d.has_timestamps() => {
                r.error(Some(i), Rule::B1, format!("timestamp in {d}"))
            }
            Element::Moment(m) => {
                if d.is_beats() {
                    r.error(Some(i), Rule::B1, format!("pitched content in {d}"));
                    continue;
                }
                if !m.pedal.is_empty() && d != Dialect::Amt {
                    r.error(Some(i), Rule::B1, format!("pedal token in {d}"));
                }
                for e in &m.events {
                    if d.is_amt() && e.staff.is_some() {
                        r.error(Some(i), Rule::B1, format!("staff marker in {d}"));
                    }
                    if d.is_amt() && !e.articulations.is_empty() {
                        r.error(Some(i), Rule::B1, format!("articulation in {d}"));
                    }
                    let needs_vel = d == Dialect::Amt && e.kind == EventKind::Onset;
                    if needs_vel && e.velocity.is_none() {
                        r.error(Some(i), Rule::B1, "onset without velocity");
                    }
                    if d != Dialect::Amt && e.velocity.is_some() {
                        r.error(Some(i), Rule::B1, format!("velocity in {d}"));
                    }
                }
            }
            _ => {}
        }
    }
}

struct Measure {
    start: usize,
    barline: Barline,
    sum: Ratio<u64>,
}

fn check_measures(doc: &ScoreDoc, r: &mut ValidationReport) {
    let mut measures: Vec<Measure> = Vec::new();
    for (i, el) in doc.elements.iter().enumerate() {
        match el {
            Element::Barline(b) => measures.push(Measure {
                start: i,
                barline: *b,
                sum: Ratio::zero(),
            }),
            Element::Interval(iv) => {
                if let Some(m) = measures.last_mut() {
                    m.sum += iv.value();
                }
            }
            _ => {}
        }
    }
    let last = measures.len().saturating_sub(1);
    for (j, m) in measures.iter().enumerate() {
        let want = m.barline.measure_len();
        let show = |x: Ratio<u64>| format!("{}/{}", x.numer(), x.denom());
        if m.sum > want {
            r.error(
                Some(m.start),
                Rule::M1,
                format!("measure sums to {}, over {}", show(m.sum), show(want)),
            );
        } else if m.sum < want {
            if j == last {
                r.warn(Some(m.start), Rule::M1, "partial final measure");
            } else if j == 0 {
                r.warn(Some(m.start), Rule::M1, "pickup measure");
            } else {
                r.error(
                    Some(m.start),
                    Rule::M1,
                    format!("measure sums to {}, expected {}", show(m.sum), show(want)),
                );
            }
        }
    }
}

fn check_balance(doc: &ScoreDoc, r: &mut ValidationReport) {
    let mut open: HashSet<Channel> = doc.meta.carried.iter().copied().collect();
    let mut seen: HashSet<Channel> = open.clone();
    let mut pedal_down = false;
    let mut last_moment = 0;
    for (i, el) in doc.elements.iter().enumerate() {
        let Element::Moment(m) = el else { continue };
        last_moment = i;
        for p in &m.pedal {
            match (p, pedal_down) {
                (PedalToken::On, true) => r.error(Some(i), Rule::D1, "pedal pressed while down"),
                (PedalToken::Off, false) => r.error(Some(i), Rule::D1, "pedal released while up"),
                _ => {}
            }
            pedal_down = *p == PedalToken::On;
        }
        let mut in_moment: HashSet<(Channel, EventKind)> = HashSet::new();
        for e in &m.events {
            if !in_moment.insert((e.channel(), e.kind)) {
                r.error(
                    Some(i),
                    Rule::D1,
                    format!("duplicate {} on channel {}", e.kind, e.channel()),
                );
            }
        }
        for kind in [EventKind::Offset, EventKind::Onset] {
            let mut done: HashSet<Channel> = HashSet::new();
            for e in m.events.iter().filter(|e| e.kind == kind) {
                let ch = e.channel();
                if !done.insert(ch) {
                    continue;
                }
                match kind {
                    EventKind::Offset => {
                        if open.remove(&ch) {
                            continue;
                        }
                        if seen.contains(&ch) {
                            r.error(Some(i), Rule::D1, format!("offset of closed note on {ch}"));
                        } else {
                            r.warn(
                                Some(i),
                                Rule::D1,
                                format!("offset on {ch} closes a note opened before the document"),
                            );
                        }
                    }
                    EventKind::Onset => {
                        if !open.insert(ch) {
                            r.error(Some(i), Rule::D1, format!("onset of open note on {ch}"));
                        }
                    }
                }
                seen.insert(ch);
            }
        }
    }
    let mut still: Vec<Channel> = open.into_iter().collect();
    still.sort();
    for ch in still {
        r.warn(Some(last_moment), Rule::D1, format!("note left open on {ch}"));
    }
}

fn check_order(doc: &ScoreDoc, r: &mut ValidationReport) {
    let score = doc.dialect.is_pitched_score();
    let mut ctx: Option<Staff> = None;
    for (i, el) in doc.elements.iter().enumerate() {
        let Element::Moment(m) = el else { continue };
        let keys: Vec<_> = m
            .events
            .iter()
            .map(|e| (e.staff, e.kind, e.pitch.midi()))
            .collect();
        if keys.windows(2).any(|w| w[0] > w[1]) {
            r.error(Some(i), Rule::O1, "events out of canonical order");
        }
        if !score {
            continue;
        }
        for e in &m.events {
            match e.staff {
                None => r.error(Some(i), Rule::O1, "event without staff context"),
                Some(s) => {
                    let change = ctx != Some(s);
                    if e.marked && !change {
                        r.error(
                            Some(i),
                            Rule::O1,
                            format!("redundant staff marker {}", StaffLabel(Some(s))),
                        );
                    } else if !e.marked && change {
                        r.error(
                            Some(i),
                            Rule::O1,
                            format!("missing staff marker {}", StaffLabel(Some(s))),
                        );
                    }
                    ctx = Some(s);
                }
            }
        }
    }
}

fn check_timestamps(doc: &ScoreDoc, opts: ValidateOptions, r: &mut ValidationReport) {
    let d = doc.dialect;
    let mut last: Option<u32> = None;
    let els = &doc.elements;
    for (i, el) in els.iter().enumerate() {
        let stamped_next = matches!(els.get(i + 1), Some(Element::Timestamp(_)));
        match el {
            Element::Timestamp(t) => {
                if let Some(max) = opts.max_bin {
                    if t.bin > max {
                        r.error(Some(i), Rule::T1, format!("timestamp {t} beyond the window"));
                    }
                }
                if !doc.meta.relative_timestamps {
                    if let Some(prev) = last {
                        if t.bin < prev {
                            r.error(
                                Some(i),
                                Rule::T1,
                                format!("timestamp {t} earlier than the previous one"),
                            );
                        }
                    }
                }
                last = Some(t.bin);
            }
            Element::Moment(_) if d.is_amt() && !stamped_next => {
                r.error(Some(i), Rule::T1, "moment without timestamp")
            }
            Element::Barline(_) | Element::Downbeat | Element::Beat
                if d.is_beats() && !stamped_next =>
            {
                r.error(Some(i), Rule::T1, "beat or barline without timestamp")
            }
            _ => {}
        }
    }
}

fn check_spelling(doc: &ScoreDoc, r: &mut ValidationReport) {
    let spelled = doc.dialect.is_spelled();
    for (i, el) in doc.elements.iter().enumerate() {
        let Element::Moment(m) = el else { continue };
        for e in &m.events {
            if e.pitch.is_spelled() != spelled {
                let msg = if spelled {
                    format!("unspelled pitch {} in {}", e.render_pitch(), doc.dialect)
                } else {
                    format!("spelled pitch {} in {}", e.render_pitch(), doc.dialect)
                };
                r.error(Some(i), Rule::S1, msg);
            }
        }
    }
}
