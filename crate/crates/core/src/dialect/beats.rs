use num_rational::Ratio;
use num_traits::Zero;

use super::{Dialect, DialectError};
use crate::score::{Barline, DocMeta, Element, MetricInterval, ScoreDoc, Timestamp};

type Q = Ratio<u64>;

/// One beat: `1/den`, or `3/den` for compound meters (numerator divisible by 3, den >= 8).
pub fn beat_unit(b: &Barline) -> Q {
    if b.meter_num().is_multiple_of(3) && b.meter_den() >= 8 {
        Q::new(3, b.meter_den() as u64)
    } else {
        Q::new(1, b.meter_den() as u64)
    }
}

struct StampedMoment {
    pos: Q,
    bin: u32,
    index: usize,
}

struct MeasureSpan {
    index: usize,
    barline: Barline,
    start: Q,
    len: Q,
    has_stamp: bool,
}

/// Derives the DBD_plus form of a stamped pitched-score document: barlines and beat
/// markers with stamps, separated by beat-length intervals.
pub fn beats_from_meter(doc: &ScoreDoc) -> Result<ScoreDoc, DialectError> {
    if !(doc.dialect.is_pitched_score() && doc.dialect.has_timestamps()) {
        return Err(DialectError::Unreachable {
            from: doc.dialect,
            to: Dialect::DbdPlus,
        });
    }
    let (points, measures) = scan(doc);
    for m in &measures {
        if !m.has_stamp {
            return Err(DialectError::Interpolation { index: m.index });
        }
    }

    let mut out = ScoreDoc {
        dialect: Dialect::DbdPlus,
        elements: Vec::new(),
        meta: DocMeta::default(),
    };
    let last = measures.len().saturating_sub(1);
    for (j, m) in measures.iter().enumerate() {
        let unit = beat_unit(&m.barline);
        let full = m.barline.measure_len();
        let mut beats = Vec::new();
        let mut k = 0u64;
        loop {
            let local = unit * Q::from_integer(k);
            let inside = if j == last {
                local < full && local <= m.len
            } else {
                local < m.len || (k == 0 && m.len.is_zero())
            };
            if !inside {
                break;
            }
            beats.push(local);
            k += 1;
        }
        let mut prev = Q::zero();
        for (bi, local) in beats.iter().enumerate() {
            if bi == 0 {
                out.elements.push(Element::Barline(m.barline));
            } else {
                push_interval(&mut out, *local - prev)?;
                out.elements.push(Element::Beat);
            }
            let (t, exact) = stamp_at(&points, m.start + *local, m.index, bi == 0)
                .ok_or(DialectError::Interpolation { index: m.index })?;
            if !exact {
                out.meta.interpolated.push(out.elements.len());
            }
            out.elements.push(Element::Timestamp(t));
            prev = *local;
        }
        if j != last && m.len > prev {
            push_interval(&mut out, m.len - prev)?;
        }
    }
    Ok(out)
}

fn push_interval(out: &mut ScoreDoc, q: Q) -> Result<(), DialectError> {
    let iv = MetricInterval::from_ratio(q)
        .map_err(|e| DialectError::Projection(e.to_string()))?;
    out.elements.push(Element::Interval(iv));
    Ok(())
}

/// Global metric positions of stamped moments, plus per-measure extents.
fn scan(doc: &ScoreDoc) -> (Vec<StampedMoment>, Vec<MeasureSpan>) {
    let mut points = Vec::new();
    let mut measures: Vec<MeasureSpan> = Vec::new();
    let mut pos = Q::zero();
    let els = &doc.elements;
    for (i, el) in els.iter().enumerate() {
        match el {
            Element::Barline(b) => measures.push(MeasureSpan {
                index: i,
                barline: *b,
                start: pos,
                len: Q::zero(),
                has_stamp: false,
            }),
            Element::Interval(iv) => {
                pos += iv.value();
                if let Some(m) = measures.last_mut() {
                    m.len += iv.value();
                }
            }
            Element::Moment(_) => {
                if let Some(Element::Timestamp(t)) = els.get(i + 1) {
                    points.push(StampedMoment {
                        pos,
                        bin: t.bin,
                        index: i,
                    });
                    if let Some(m) = measures.last_mut() {
                        m.has_stamp = true;
                    }
                }
            }
            _ => {}
        }
    }
    (points, measures)
}

/// Stamp for global position `g`. Exact when a stamped moment sits there (for a
/// downbeat the measure's own moment wins over the previous bar-end moment);
/// otherwise linear in metric position between the nearest stamped neighbours, or
/// extrapolated from the two nearest on one side.
fn stamp_at(
    points: &[StampedMoment],
    g: Q,
    barline_index: usize,
    downbeat: bool,
) -> Option<(Timestamp, bool)> {
    let at: Vec<&StampedMoment> = points.iter().filter(|p| p.pos == g).collect();
    if !at.is_empty() {
        let pick = if downbeat {
            at.iter()
                .find(|p| p.index > barline_index)
                .or_else(|| at.iter().rev().find(|p| p.index < barline_index))
                .copied()
        } else {
            at.first().copied()
        };
        if let Some(p) = pick {
            return Some((Timestamp::new(p.bin), true));
        }
    }
    // left neighbour: latest stamp before g; right neighbour: earliest stamp after g
    let left: Vec<&StampedMoment> = points.iter().filter(|p| p.pos < g).collect();
    let right: Vec<&StampedMoment> = points.iter().filter(|p| p.pos > g).collect();
    let (a, b) = match (left.last(), right.first()) {
        (Some(a), Some(b)) => (*a, *b),
        (Some(a), None) => {
            let b = *a;
            let a = left.iter().rev().find(|p| p.pos < b.pos)?;
            (*a, b)
        }
        (None, Some(a)) => {
            let a = *a;
            let b = right.iter().find(|p| p.pos > a.pos)?;
            (a, *b)
        }
        (None, None) => return None,
    };
    let signed = |q: Q| Ratio::new(*q.numer() as i128, *q.denom() as i128);
    let (pa, pb, pg) = (signed(a.pos), signed(b.pos), signed(g));
    let v = Ratio::from_integer(a.bin as i128)
        + Ratio::from_integer(b.bin as i128 - a.bin as i128) * (pg - pa) / (pb - pa);
    let bin = v.round().to_integer().clamp(0, u32::MAX as i128) as u32;
    Some((Timestamp::new(bin), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse, render};

    #[test]
    fn compound_beat_unit() {
        let q = |n, d| beat_unit(&Barline::new(n, d, 0).unwrap());
        assert_eq!(q(3, 4), Q::new(1, 4));
        assert_eq!(q(6, 8), Q::new(3, 8));
        assert_eq!(q(3, 8), Q::new(3, 8));
        assert_eq!(q(12, 16), Q::new(3, 16));
        assert_eq!(q(4, 8), Q::new(1, 8));
    }

    #[test]
    fn beats_on_stamped_moments_are_exact() {
        let doc = parse(
            "|4/4k0 PR: C5 [1.00] 1/4 c5 D5 [1.50] 1/4 d5 E5 [2.00] 1/4 e5 F5 [2.50] 1/4 f5 [3.00]",
            Dialect::Tast,
        )
        .unwrap();
        let dbd = beats_from_meter(&doc).unwrap();
        assert_eq!(
            render(&dbd),
            "|4/4k0 [1.00] 1/4 * [1.50] 1/4 * [2.00] 1/4 * [2.50]"
        );
        assert!(dbd.meta.interpolated.is_empty());
    }

    #[test]
    fn interpolates_between_stamps() {
        let doc = parse("|3/4k0 PR: C5 [1.00] 1/2 c5 D5 [2.50] 1/4 d5", Dialect::Tast).unwrap();
        let dbd = beats_from_meter(&doc).unwrap();
        assert_eq!(render(&dbd), "|3/4k0 [1.00] 1/4 * [1.75] 1/4 * [2.50]");
        assert_eq!(dbd.meta.interpolated, vec![4]);
    }

    #[test]
    fn extrapolates_past_the_last_stamp() {
        let doc = parse("|3/4k0 PR: C5 [1.00] 1/4 c5 D5 [2.00] 1/2 d5", Dialect::Tast).unwrap();
        let dbd = beats_from_meter(&doc).unwrap();
        assert_eq!(render(&dbd), "|3/4k0 [1.00] 1/4 * [2.00] 1/4 * [3.00]");
    }

    #[test]
    fn unstamped_measure_fails() {
        let doc = parse(
            "|2/4k0 PR: C5 [1.00] 1/2 c5 [2.00] |2/4k0 D5 1/2 d5",
            Dialect::Tast,
        )
        .unwrap();
        assert!(matches!(
            beats_from_meter(&doc),
            Err(DialectError::Interpolation { index: 6 })
        ));
    }
}
