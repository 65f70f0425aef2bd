use super::{beats_from_meter, Dialect, DialectError, Prompt};
use crate::score::{
    canonical_sort_moment, DocMeta, Element, Moment, PitchEvent, ScoreDoc, Timestamp,
};
use crate::text::{validate_with, ValidateOptions};

/// Whether `to` can be obtained from `from` by removing components.
pub fn is_reachable(from: Dialect, to: Dialect) -> bool {
    if from == to {
        return true;
    }
    let src = from.prompts().0;
    let dst = to.prompts().0;
    if to.is_beats() {
        from.has(Prompt::Score)
            && from.has(Prompt::Timestamp)
            && dst.iter().filter(|p| **p != Prompt::Beats).all(|p| src.contains(p))
    } else {
        from.has(Prompt::Piano) && dst.iter().all(|p| src.contains(p))
    }
}

/// Projects a valid document onto a dialect reachable from its own.
pub fn project(doc: &ScoreDoc, target: Dialect) -> Result<ScoreDoc, DialectError> {
    let opts = ValidateOptions::long_form();
    let report = validate_with(doc, opts);
    if report.has_errors() {
        return Err(DialectError::InvalidSource(report));
    }
    if doc.dialect == target {
        return Ok(doc.clone());
    }
    if !is_reachable(doc.dialect, target) {
        return Err(DialectError::Unreachable {
            from: doc.dialect,
            to: target,
        });
    }
    let out = match target {
        Dialect::DbdPlus => beats_from_meter(doc)?,
        Dialect::Dbd => {
            let plus = if doc.dialect == Dialect::DbdPlus {
                doc.clone()
            } else {
                beats_from_meter(doc)?
            };
            plus_to_dbd(&plus)
        }
        Dialect::AmtLite => to_amt_lite(doc)?,
        _ => to_score(doc, target),
    };
    let report = validate_with(&out, opts);
    if report.has_errors() {
        return Err(DialectError::Projection(report.summary()));
    }
    Ok(out)
}

fn to_score(doc: &ScoreDoc, target: Dialect) -> ScoreDoc {
    let keep_stamps = target.has_timestamps();
    let lite = !target.is_spelled();
    let mut elements = Vec::with_capacity(doc.elements.len());
    for el in &doc.elements {
        match el {
            Element::Timestamp(_) if !keep_stamps => {}
            Element::Moment(m) if lite => {
                let events = m
                    .events
                    .iter()
                    .map(|e| PitchEvent {
                        pitch: e.pitch.to_lite(),
                        ..e.clone()
                    })
                    .collect();
                elements.push(Element::Moment(Moment {
                    events,
                    pedal: m.pedal.clone(),
                }));
            }
            other => elements.push(other.clone()),
        }
    }
    ScoreDoc {
        dialect: target,
        elements,
        meta: DocMeta {
            carried: doc.meta.carried.clone(),
            ..DocMeta::default()
        },
    }
}

fn to_amt_lite(doc: &ScoreDoc) -> Result<ScoreDoc, DialectError> {
    let from_amt = doc.dialect.is_amt();
    let mut groups: Vec<(Timestamp, Vec<PitchEvent>)> = Vec::new();
    let els = &doc.elements;
    for (i, el) in els.iter().enumerate() {
        let Element::Moment(m) = el else { continue };
        let Some(Element::Timestamp(t)) = els.get(i + 1) else {
            return Err(DialectError::MissingTimestamps {
                to: Dialect::AmtLite,
                index: i,
            });
        };
        let events: Vec<PitchEvent> = m
            .events
            .iter()
            .map(lite_event)
            .collect();
        if events.is_empty() {
            continue;
        }
        match groups.last_mut() {
            Some((bin, evs)) if *bin == *t => evs.extend(events),
            _ => groups.push((*t, events)),
        }
    }
    let mut elements = Vec::new();
    for (t, events) in groups {
        let events = canonical_sort_moment(&events).map_err(|e| {
            DialectError::Projection(format!("events collide at {t}: {e}"))
        })?;
        elements.push(Element::Moment(Moment::new(events)));
        elements.push(Element::Timestamp(t));
    }
    let carried = if from_amt {
        doc.meta.carried.clone()
    } else {
        let mut c: Vec<_> = doc
            .meta
            .carried
            .iter()
            .map(|ch| crate::score::Channel {
                staff: None,
                midi: ch.midi,
            })
            .collect();
        c.sort();
        c.dedup();
        c
    };
    Ok(ScoreDoc {
        dialect: Dialect::AmtLite,
        elements,
        meta: DocMeta {
            carried,
            ..DocMeta::default()
        },
    })
}

/// Staff-less, unspelled copy without velocity, articulations or marker.
fn lite_event(e: &PitchEvent) -> PitchEvent {
    PitchEvent {
        kind: e.kind,
        staff: None,
        pitch: e.pitch.to_lite(),
        velocity: None,
        articulations: Vec::new(),
        marked: false,
    }
}

fn plus_to_dbd(plus: &ScoreDoc) -> ScoreDoc {
    let mut elements = Vec::new();
    let mut remap = vec![usize::MAX; plus.elements.len()];
    for (i, el) in plus.elements.iter().enumerate() {
        match el {
            Element::Interval(_) => continue,
            Element::Barline(_) => elements.push(Element::Downbeat),
            other => elements.push(other.clone()),
        }
        remap[i] = elements.len() - 1;
    }
    ScoreDoc {
        dialect: Dialect::Dbd,
        elements,
        meta: DocMeta {
            interpolated: plus.meta.interpolated.iter().map(|&i| remap[i]).collect(),
            ..DocMeta::default()
        },
    }
}
