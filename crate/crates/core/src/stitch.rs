//! Splitting long stamped documents into window-sized chunks and merging chunk
//! transcripts back at barlines.

use std::collections::HashSet;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialect::Dialect;
use crate::score::{Barline, Channel, DocMeta, Element, EventKind, ScoreDoc, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkSpec {
    pub window_s: f64,
    pub hop_s: f64,
    pub decode_s: f64,
}

impl Default for ChunkSpec {
    fn default() -> Self {
        ChunkSpec {
            window_s: 40.0,
            hop_s: 20.0,
            decode_s: 20.0,
        }
    }
}

impl ChunkSpec {
    fn hop_bins(&self) -> Result<u32, StitchError> {
        let ok = self.hop_s > 0.0 && self.hop_s == self.decode_s && self.decode_s <= self.window_s;
        if !ok {
            return Err(StitchError::Spec(*self));
        }
        Ok(Timestamp::from_seconds(self.hop_s).bin)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StitchError {
    #[error("chunk spec needs 0 < hop = decode <= window, got {0:?}")]
    Spec(ChunkSpec),
    #[error("{0} documents cannot be chunked")]
    Unsupported(Dialect),
    #[error("element {index} has no timestamp")]
    MissingTimestamps { index: usize },
    #[error("chunks use different dialects")]
    MixedDialects,
    #[error("no barline near the seam before chunk {chunk}")]
    Seam { chunk: usize },
    #[error("seam before chunk {chunk}: anchor barline stamps differ by {diff_s:.2} s")]
    SeamMismatch { chunk: usize, diff_s: f64 },
}

/// Anchor tolerance for barline stamps at a seam.
pub const SEAM_TOLERANCE_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Stitched {
    pub doc: ScoreDoc,
    pub warnings: Vec<String>,
}

fn check_dialect(d: Dialect) -> Result<(), StitchError> {
    match d {
        Dialect::Tast | Dialect::TastLite | Dialect::Dbd => Ok(()),
        other => Err(StitchError::Unsupported(other)),
    }
}

/// Element runs that end at a timestamp; trailing unstamped elements join the last run.
fn units(doc: &ScoreDoc) -> Result<Vec<(usize, usize, u32)>, StitchError> {
    let els = &doc.elements;
    let mut out: Vec<(usize, usize, u32)> = Vec::new();
    let mut start = 0;
    for (i, el) in els.iter().enumerate() {
        let needs_stamp = match el {
            Element::Moment(_) => true,
            Element::Barline(_) | Element::Downbeat | Element::Beat => doc.dialect.is_beats(),
            _ => false,
        };
        if needs_stamp && !matches!(els.get(i + 1), Some(Element::Timestamp(_))) {
            return Err(StitchError::MissingTimestamps { index: i });
        }
        if let Element::Timestamp(t) = el {
            out.push((start, i + 1, t.bin));
            start = i + 1;
        }
    }
    if start < els.len() {
        match out.last_mut() {
            Some(last) => last.1 = els.len(),
            None => return Err(StitchError::MissingTimestamps { index: start }),
        }
    }
    Ok(out)
}

fn replay_open(elements: &[Element], open: &mut HashSet<Channel>) {
    for el in elements {
        if let Element::Moment(m) = el {
            for e in m.events.iter().filter(|e| e.kind == EventKind::Offset) {
                open.remove(&e.channel());
            }
            for e in m.events.iter().filter(|e| e.kind == EventKind::Onset) {
                open.insert(e.channel());
            }
        }
    }
}

fn shift(elements: &mut [Element], delta: i64) {
    for el in elements {
        if let Element::Timestamp(t) = el {
            t.bin = (t.bin as i64 + delta).max(0) as u32;
        }
    }
}

/// Chunk `k` holds the runs stamped in `[k*hop, k*hop + decode)`, rebased to local
/// time. Chunks that start mid-measure get a copy of the governing barline; notes
/// sounding at a chunk start are listed in its `carried` metadata.
pub fn split_chunks(doc: &ScoreDoc, spec: &ChunkSpec) -> Result<Vec<ScoreDoc>, StitchError> {
    check_dialect(doc.dialect)?;
    let hop = spec.hop_bins()?;
    if doc.elements.is_empty() {
        return Ok(Vec::new());
    }
    let units = units(doc)?;
    let last_bin = units.iter().map(|u| u.2).max().unwrap_or(0);
    let n_chunks = (last_bin / hop + 1) as usize;
    let mut chunks = Vec::with_capacity(n_chunks);
    let mut open: HashSet<Channel> = doc.meta.carried.iter().copied().collect();
    let mut consumed = 0usize;
    let mut last_barline: Option<Barline> = None;
    for k in 0..n_chunks {
        let lo = k as u32 * hop;
        let hi = lo + hop;
        let mine: Vec<_> = units.iter().filter(|u| u.2 >= lo && u.2 < hi).collect();
        let mut out = ScoreDoc::new(doc.dialect);
        let (Some(first), Some(last)) = (mine.first(), mine.last()) else {
            chunks.push(out);
            continue;
        };
        // state at the chunk start
        let before = &doc.elements[consumed..first.0];
        replay_open(before, &mut open);
        for el in before {
            if let Element::Barline(b) = el {
                last_barline = Some(*b);
            }
        }
        let body = &doc.elements[first.0..last.1];
        if doc.dialect.is_pitched_score() && !matches!(body.first(), Some(Element::Barline(_))) {
            if let Some(b) = last_barline {
                out.elements.push(Element::Barline(b));
            }
        }
        out.elements.extend_from_slice(body);
        shift(&mut out.elements, -(lo as i64));
        out.remark();
        let mut carried: Vec<Channel> = open.iter().copied().collect();
        carried.sort();
        out.meta = DocMeta {
            carried,
            ..DocMeta::default()
        };
        replay_open(body, &mut open);
        for el in body {
            if let Element::Barline(b) = el {
                last_barline = Some(*b);
            }
        }
        consumed = last.1;
        chunks.push(out);
    }
    Ok(chunks)
}

struct MeasureTail {
    barline: Option<(usize, Barline)>,
    sum: Ratio<u64>,
    has_content: bool,
}

fn last_measure(els: &[Element]) -> MeasureTail {
    let start = els.iter().rposition(|e| matches!(e, Element::Barline(_)));
    let mut tail = MeasureTail {
        barline: start.map(|i| match els[i] {
            Element::Barline(b) => (i, b),
            _ => unreachable!(),
        }),
        sum: Ratio::zero(),
        has_content: false,
    };
    for el in &els[start.map_or(0, |i| i + 1)..] {
        match el {
            Element::Interval(iv) => {
                tail.sum += iv.value();
                tail.has_content = true;
            }
            Element::Moment(_) => tail.has_content = true,
            _ => {}
        }
    }
    tail
}

fn first_measure_sum(els: &[Element]) -> Ratio<u64> {
    els.iter()
        .skip(1)
        .take_while(|e| !e.is_bar())
        .filter_map(|e| match e {
            Element::Interval(iv) => Some(iv.value()),
            _ => None,
        })
        .sum()
}

/// Anchor times of every barline: the stamp of the next moment in its measure, else
/// the stamp of the moment just before it (a bar-end moment), else the stamp right
/// after it (beat dialects).
fn barline_anchors(els: &[Element]) -> Vec<(usize, u32)> {
    let stamp_after = |i: usize| match els.get(i + 1) {
        Some(Element::Timestamp(t)) => Some(t.bin),
        _ => None,
    };
    let mut out = Vec::new();
    for (i, el) in els.iter().enumerate() {
        if !el.is_bar() {
            continue;
        }
        let mut anchor = stamp_after(i);
        if anchor.is_none() {
            for (j, e) in els.iter().enumerate().skip(i + 1) {
                if e.is_bar() {
                    break;
                }
                if matches!(e, Element::Moment(_)) {
                    anchor = stamp_after(j);
                    break;
                }
            }
        }
        if anchor.is_none() && i >= 2 {
            if let (Element::Moment(_), Element::Timestamp(t)) = (&els[i - 2], &els[i - 1]) {
                anchor = Some(t.bin);
            }
        }
        if let Some(a) = anchor {
            out.push((i, a));
        }
    }
    out
}

fn first_stamp(els: &[Element]) -> Option<u32> {
    els.iter().find_map(Element::as_timestamp).map(|t| t.bin)
}

fn last_stamp(els: &[Element]) -> Option<u32> {
    els.iter().rev().find_map(Element::as_timestamp).map(|t| t.bin)
}

/// Typical measure length in bins, from consecutive barline anchors.
fn measure_bins(anchors: &[(usize, u32)]) -> Option<u32> {
    anchors
        .windows(2)
        .rev()
        .map(|w| w[1].1.saturating_sub(w[0].1))
        .find(|d| *d > 0)
}

/// Merges chunk transcripts in order. Stamps are rebased by `k * hop`; at each seam the
/// later chunk wins from the anchor barline onward.
pub fn stitch(chunks: &[ScoreDoc], spec: &ChunkSpec) -> Result<Stitched, StitchError> {
    let hop = spec.hop_bins()? as i64;
    let mut warnings = Vec::new();
    let Some(first) = chunks.first() else {
        return Ok(Stitched {
            doc: ScoreDoc::new(Dialect::Tast),
            warnings,
        });
    };
    let dialect = first.dialect;
    check_dialect(dialect)?;
    if chunks.iter().any(|c| c.dialect != dialect) {
        return Err(StitchError::MixedDialects);
    }
    let mut out: Vec<Element> = Vec::new();
    let mut carried: Option<Vec<Channel>> = None;
    for (k, chunk) in chunks.iter().enumerate() {
        if chunk.elements.is_empty() {
            continue;
        }
        let mut b = chunk.elements.clone();
        shift(&mut b, k as i64 * hop);
        if carried.is_none() {
            carried = Some(chunk.meta.carried.clone());
            out = b;
            continue;
        }
        merge(&mut out, b, k, &mut warnings)?;
    }
    let mut doc = ScoreDoc {
        dialect,
        elements: out,
        meta: DocMeta {
            carried: carried.unwrap_or_default(),
            ..DocMeta::default()
        },
    };
    doc.remark();
    Ok(Stitched { doc, warnings })
}

fn merge(
    out: &mut Vec<Element>,
    b: Vec<Element>,
    chunk: usize,
    warnings: &mut Vec<String>,
) -> Result<(), StitchError> {
    let b_first = first_stamp(&b);
    let later = match (last_stamp(out), b_first) {
        (Some(a), Some(f)) => f > a,
        _ => true,
    };
    if later {
        // a chunk that resumes a measure opens with a copy of its barline
        let tail = last_measure(out);
        if let (Some((_, bar_a)), Some(Element::Barline(bar_b))) = (tail.barline, b.first()) {
            let meter = bar_a.measure_len();
            let resumes = tail.has_content
                && tail.sum < meter
                && bar_a == *bar_b
                && tail.sum + first_measure_sum(&b) <= meter;
            if resumes {
                out.extend(b.into_iter().skip(1));
                return Ok(());
            }
        }
        out.extend(b);
        return Ok(());
    }

    // overlapping content: align on the nearest pair of barlines
    let anchors_a = barline_anchors(out);
    let anchors_b = barline_anchors(&b);
    let seam = b_first.unwrap_or(0) as i64;
    let span = measure_bins(&anchors_a)
        .or_else(|| measure_bins(&anchors_b))
        .unwrap_or(200) as i64
        * 2;
    let near = |t: u32| (t as i64 - seam).abs() <= span;
    let mut best: Option<(i64, usize, usize)> = None;
    for &(ia, ta) in anchors_a.iter().filter(|x| near(x.1)) {
        for &(ib, tb) in anchors_b.iter().filter(|x| near(x.1)) {
            let d = (ta as i64 - tb as i64).abs();
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, ia, ib));
            }
        }
    }
    let Some((diff, ia, ib)) = best else {
        return Err(StitchError::Seam { chunk });
    };
    let diff_s = diff as f64 / 100.0;
    if diff_s > SEAM_TOLERANCE_S {
        return Err(StitchError::SeamMismatch { chunk, diff_s });
    }
    if diff > 0 {
        warnings.push(format!(
            "seam before chunk {chunk}: anchor stamps differ by {diff_s:.2} s, later chunk kept"
        ));
    }
    out.truncate(ia);
    out.extend(b.into_iter().skip(ib));
    Ok(())
}
