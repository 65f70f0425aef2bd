mod common;

use std::sync::OnceLock;

use common::{channel_balance, channels_balanced, random_doc, GenConfig};
use intermo::dialect::{is_reachable, project};
use intermo::metrics::{
    beat_f1, jaccard, note_f1, relative_timestamps, score_tokens, shingle, token_ned, NoteMode,
};
use intermo::midi::{MidiNote, MidiPerformance, PedalStream};
use intermo::score::{canonical_sort_moment, Element};
use intermo::stitch::{split_chunks, stitch, ChunkSpec};
use intermo::text::{parse, parse_lenient, render, serialize, validate_with, ValidateOptions};
use intermo::tokenizer::{train_unigram, TrainConfig, UnigramModel};
use intermo::train_utils::{smoothing_distribution, tile_offset, token_weight, SmoothingSpec};
use intermo::{Dialect, ScoreDoc};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SOURCES: [Dialect; 4] = [Dialect::Tast, Dialect::TastLite, Dialect::A2s, Dialect::A2sLite];

fn doc_from(seed: u64, dialect: Dialect, secs: f64) -> ScoreDoc {
    random_doc(&mut ChaCha8Rng::seed_from_u64(seed), GenConfig::new(dialect, secs))
}

fn any_doc() -> impl Strategy<Value = ScoreDoc> {
    (any::<u64>(), 0..SOURCES.len(), 2.0..30.0f64).prop_map(|(s, d, secs)| doc_from(s, SOURCES[d], secs))
}

fn perf() -> impl Strategy<Value = MidiPerformance> {
    let note = (60u8..64, 0u32..40, 1u32..20, 1u8..128)
        .prop_map(|(m, on, len, v)| MidiNote::new(m, on as f64 * 0.02, (on + len) as f64 * 0.02, v).unwrap());
    (prop::collection::vec(note, 0..8), prop::option::of((0u32..20, 1u32..30))).prop_map(|(notes, ped)| {
        let pedal = match ped {
            Some((a, len)) => PedalStream::from_pairs(&[(a as f64 * 0.05, 100), ((a + len) as f64 * 0.05, 0)]),
            None => PedalStream::default(),
        };
        MidiPerformance::new(notes, pedal).unwrap()
    })
}

fn shifted(p: &MidiPerformance, dt: f64) -> MidiPerformance {
    let notes = p
        .notes
        .iter()
        .map(|n| MidiNote::new(n.midi, n.onset_s + dt, n.keyoff_s + dt, n.velocity).unwrap())
        .collect();
    let pairs: Vec<(f64, u8)> = p.pedal.events.iter().map(|e| (e.time_s + dt, e.value)).collect();
    MidiPerformance::new(notes, PedalStream::from_pairs(&pairs)).unwrap()
}

fn model() -> &'static UnigramModel {
    static MODEL: OnceLock<UnigramModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let texts: Vec<String> = (0..60).map(|s| render(&doc_from(s, SOURCES[s as usize % 4], 8.0))).collect();
        let cfg = TrainConfig {
            target_semantic: 150,
            ..TrainConfig::default()
        };
        train_unigram(&texts, &cfg).unwrap().0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn text_round_trip(doc in any_doc()) {
        let text = serialize(&doc).unwrap();
        prop_assert_eq!(&parse(&text, doc.dialect).unwrap(), &doc);
        prop_assert_eq!(render(&parse_lenient(&text, doc.dialect).unwrap()), text);
    }

    #[test]
    fn projections_round_trip_and_validate(doc in any_doc()) {
        for target in Dialect::ALL {
            if !is_reachable(doc.dialect, target) {
                prop_assert!(project(&doc, target).is_err());
                continue;
            }
            let out = project(&doc, target).unwrap();
            prop_assert_eq!(out.dialect, target);
            let r = validate_with(&out, ValidateOptions::long_form());
            prop_assert!(!r.has_errors(), "{} -> {}: {}", doc.dialect, target, r.summary());
            let text = render(&out);
            prop_assert_eq!(render(&parse_lenient(&text, target).unwrap()), text);
        }
    }

    #[test]
    fn projections_compose(doc in any_doc()) {
        let score = if doc.dialect.is_spelled() { Dialect::A2s } else { Dialect::A2sLite };
        let via = project(&project(&doc, score).unwrap(), Dialect::A2sLite).unwrap();
        prop_assert_eq!(render(&via), render(&project(&doc, Dialect::A2sLite).unwrap()));
        if doc.dialect.has_timestamps() {
            let dbd = project(&doc, Dialect::Dbd).unwrap();
            let twice = project(&project(&doc, Dialect::DbdPlus).unwrap(), Dialect::Dbd).unwrap();
            prop_assert_eq!(render(&dbd), render(&twice));
        }
    }

    #[test]
    fn projection_keeps_balance(doc in any_doc()) {
        let lite = project(&doc, if doc.dialect.has_timestamps() { Dialect::TastLite } else { Dialect::A2sLite }).unwrap();
        prop_assert!(channels_balanced(&lite));
        prop_assert_eq!(channel_balance(&lite), channel_balance(&doc));
    }

    #[test]
    fn canonical_sort_is_a_normal_form(doc in any_doc(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in doc.moments() {
            let mut shuffled = m.events.clone();
            shuffled.shuffle(&mut rng);
            let sorted = canonical_sort_moment(&shuffled).unwrap();
            let strip = |v: &[intermo::score::PitchEvent]| v.iter().map(|e| { let mut e = e.clone(); e.marked = false; e }).collect::<Vec<_>>();
            prop_assert_eq!(strip(&sorted), strip(&m.events));
            prop_assert_eq!(canonical_sort_moment(&sorted).unwrap(), sorted);
        }
        let mut again = doc.clone();
        again.canonicalize().unwrap();
        prop_assert_eq!(again, doc);
    }

    #[test]
    fn relative_stamps_keep_shape(doc in any_doc()) {
        let rel = relative_timestamps(&doc);
        prop_assert_eq!(rel.elements.len(), doc.elements.len());
        prop_assert_eq!(rel.timestamps().count(), doc.timestamps().count());
        prop_assert_eq!(rel.strip_timestamps().elements, doc.strip_timestamps().elements);
        let first = rel.timestamps().next();
        prop_assert!(first.is_none_or(|t| t.bin == 0));
    }

    #[test]
    fn ned_bounds(a in any_doc(), b in any_doc()) {
        let d = token_ned(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, token_ned(&b, &a));
        prop_assert_eq!(token_ned(&a, &a), 0.0);
        if score_tokens(&a) != score_tokens(&b) {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn shingles_and_jaccard(tokens in prop::collection::vec(0u8..5, 0..30), other in prop::collection::vec(0u8..5, 0..30), n in 1usize..6) {
        let s = shingle(&tokens, n);
        prop_assert!(s.len() <= tokens.len().saturating_sub(n - 1));
        prop_assert!(s.iter().all(|g| g.len() == n));
        let t = shingle(&other, n);
        let j = jaccard(&s, &t);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&t, &s));
        if !s.is_empty() {
            prop_assert_eq!(jaccard(&s, &s), 1.0);
        }
    }

    #[test]
    fn tokenizer_is_lossless(text in "[ -~]{0,80}") {
        let m = model();
        prop_assert_eq!(&m.decode(&m.encode(&text)).unwrap(), &text);
    }

    #[test]
    fn sampling_is_lossless(doc in any_doc(), seed in any::<u64>(), alpha in 0.05..2.0f64) {
        let m = model();
        let text = render(&doc);
        let ids = m.encode_sampled(&text, alpha, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&m.decode(&ids).unwrap(), &text);
        prop_assert!(m.score(&ids) <= m.score(&m.encode(&text)) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stitch_round_trip(seed in any::<u64>(), lite in any::<bool>(), secs in 30.0..150.0f64, narrow in any::<bool>()) {
        let doc = doc_from(seed, if lite { Dialect::TastLite } else { Dialect::Tast }, secs);
        let spec = if narrow {
            ChunkSpec { window_s: 20.0, hop_s: 10.0, decode_s: 10.0 }
        } else {
            ChunkSpec::default()
        };
        let chunks = split_chunks(&doc, &spec).unwrap();
        for c in &chunks {
            prop_assert!(c.timestamps().all(|t| t.seconds() <= spec.window_s + 1e-9));
        }
        let merged = stitch(&chunks, &spec).unwrap();
        prop_assert_eq!(merged.doc.elements, doc.elements);
    }

    #[test]
    fn stitch_beats_round_trip(seed in any::<u64>(), secs in 30.0..120.0f64) {
        let doc = project(&doc_from(seed, Dialect::Tast, secs), Dialect::Dbd).unwrap();
        let spec = ChunkSpec::default();
        let merged = stitch(&split_chunks(&doc, &spec).unwrap(), &spec).unwrap();
        prop_assert_eq!(merged.doc.elements, doc.elements);
    }
}

proptest! {
    #[test]
    fn smoothing_is_a_distribution(bins in 1usize..300, w in 0usize..12, p in 0.01..1.0f64, y_frac in 0.0..1.0f64) {
        let y = ((bins as f64 * y_frac) as usize).min(bins - 1);
        let spec = SmoothingSpec { p_center: p, w, num_bins: bins };
        let q = smoothing_distribution(y, &spec).unwrap();
        let total: f64 = q.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        // with no neighbour in range the target keeps all the mass
        prop_assert_eq!(q[y], if bins > 1 && w > 0 { p } else { 1.0 });
        prop_assert!(q.iter().all(|x| *x >= 0.0));
        for (i, x) in q.iter().enumerate() {
            if i.abs_diff(y) > w {
                prop_assert_eq!(*x, 0.0);
            }
        }
        // closer bins never get less mass than farther ones on the same side
        for d in 1..w {
            if y + d + 1 < bins {
                prop_assert!(q[y + d] >= q[y + d + 1]);
            }
        }
    }

    #[test]
    fn token_weight_decreases(a in 1usize..100_000, b in 1usize..100_000) {
        let (wa, wb) = (token_weight(a).unwrap(), token_weight(b).unwrap());
        prop_assert!(wa > 0.0 && wa <= 1.0);
        if a < b {
            prop_assert!(wa > wb);
        }
        prop_assert!((wa * wa * a as f64 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tile_offset_stays_in_window(len in 0.0..40.0f64, seed in any::<u64>()) {
        let s = tile_offset(len, 40.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(s >= 0.0 && s + len <= 40.0 + 1e-9);
    }

    #[test]
    fn onset_f1_swaps_precision_and_recall(r in perf(), p in perf()) {
        // offset tolerance scales with the reference duration, so only onsets are symmetric
        let a = note_f1(&r, &p, 0.05, NoteMode::Onset);
        let b = note_f1(&p, &r, 0.05, NoteMode::Onset);
        prop_assert_eq!(a.n_matched, b.n_matched);
        prop_assert_eq!(a.precision, b.recall);
        prop_assert!((a.f1 - b.f1).abs() < 1e-12);
    }

    #[test]
    fn note_f1_ignores_global_shift(r in perf(), p in perf(), k in 1u32..50) {
        let dt = k as f64 * 0.25;
        for mode in [NoteMode::Onset, NoteMode::Velocity, NoteMode::KeyOff, NoteMode::PedOff] {
            prop_assert_eq!(
                note_f1(&r, &p, 0.05, mode).n_matched,
                note_f1(&shifted(&r, dt), &shifted(&p, dt), 0.05, mode).n_matched
            );
        }
    }

    #[test]
    fn stricter_modes_match_less(r in perf(), p in perf()) {
        let onset = note_f1(&r, &p, 0.05, NoteMode::Onset).n_matched;
        for mode in [NoteMode::Velocity, NoteMode::KeyOff, NoteMode::PedOff] {
            prop_assert!(note_f1(&r, &p, 0.05, mode).n_matched <= onset);
        }
        prop_assert_eq!(note_f1(&r, &r, 0.05, NoteMode::PedOff).f1, if r.notes.is_empty() { 0.0 } else { 1.0 });
    }

    #[test]
    fn beat_f1_is_symmetric(mut a in prop::collection::vec(0u32..2000, 0..20), mut b in prop::collection::vec(0u32..2000, 0..20)) {
        a.sort();
        a.dedup();
        b.sort();
        b.dedup();
        let (a, b): (Vec<f64>, Vec<f64>) = (a.iter().map(|x| *x as f64 * 0.01).collect(), b.iter().map(|x| *x as f64 * 0.01).collect());
        let x = beat_f1(&a, &b, 0.07);
        let y = beat_f1(&b, &a, 0.07);
        prop_assert_eq!(x.n_matched, y.n_matched);
        prop_assert!(x.n_matched <= a.len().min(b.len()));
    }
}

#[test]
fn generator_docs_contain_every_element_kind() {
    let doc = doc_from(1, Dialect::Tast, 30.0);
    let has = |f: fn(&Element) -> bool| doc.elements.iter().any(f);
    assert!(has(|e| matches!(e, Element::Barline(_))));
    assert!(has(|e| matches!(e, Element::Interval(_))));
    assert!(has(|e| matches!(e, Element::Moment(_))));
    assert!(has(|e| matches!(e, Element::Timestamp(_))));
}
