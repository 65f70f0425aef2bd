use std::collections::HashMap;

use midly::num::{u15, u24, u28, u4, u7};
use midly::{EventIter, Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};

use super::{MidiError, MidiNote, MidiPerformance, PedalStream};

/// Fixed write resolution: 480 ticks per quarter at 120 BPM.
pub const WRITE_PPQ: u16 = 480;
pub const WRITE_TEMPO_US: u32 = 500_000;
pub const TICKS_PER_SECOND: f64 = 960.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SmfImport {
    pub performance: MidiPerformance,
    pub warnings: Vec<String>,
}

struct RawChunk<'a> {
    offset: usize,
    id: [u8; 4],
    data: &'a [u8],
}

fn smf_err(offset: usize, message: impl Into<String>) -> MidiError {
    MidiError::Smf {
        offset,
        message: message.into(),
    }
}

fn chunks(bytes: &[u8]) -> Result<Vec<RawChunk<'_>>, MidiError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes.len() - pos < 8 {
            return Err(smf_err(pos, "truncated chunk header"));
        }
        let id = [bytes[pos], bytes[pos + 1], bytes[pos + 2], bytes[pos + 3]];
        let len = u32::from_be_bytes([bytes[pos + 4], bytes[pos + 5], bytes[pos + 6], bytes[pos + 7]])
            as usize;
        let start = pos + 8;
        if len > bytes.len() - start {
            return Err(smf_err(pos, "chunk length runs past end of file"));
        }
        out.push(RawChunk {
            offset: pos,
            id,
            data: &bytes[start..start + len],
        });
        pos = start + len;
    }
    Ok(out)
}

enum Clock {
    Metrical { ppq: f64, tempo: Vec<(u64, u32)> },
    Timecode { ticks_per_second: f64 },
}

impl Clock {
    fn seconds(&self, tick: u64) -> f64 {
        match self {
            Clock::Timecode { ticks_per_second } => tick as f64 / ticks_per_second,
            Clock::Metrical { ppq, tempo } => {
                let mut t = 0.0;
                let mut last_tick = 0u64;
                let mut us = WRITE_TEMPO_US as f64;
                for &(at, val) in tempo {
                    if at >= tick {
                        break;
                    }
                    t += (at - last_tick) as f64 * us / ppq / 1e6;
                    last_tick = at;
                    us = val as f64;
                }
                t + (tick - last_tick) as f64 * us / ppq / 1e6
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Ev {
    Off(u8),
    Pedal(u8),
    On(u8, u8),
}

impl Ev {
    fn rank(&self) -> u8 {
        match self {
            Ev::Off(_) => 0,
            Ev::Pedal(_) => 1,
            Ev::On(..) => 2,
        }
    }
}

/// Reads format 0 or 1 files. All channels are merged into one piano part.
pub fn read_smf(bytes: &[u8]) -> Result<SmfImport, MidiError> {
    let chunks = chunks(bytes)?;
    let head = chunks.first().ok_or_else(|| smf_err(0, "empty file"))?;
    if &head.id != b"MThd" || head.data.len() < 6 {
        return Err(smf_err(0, "missing MThd header"));
    }
    let d = head.data;
    let format = u16::from_be_bytes([d[0], d[1]]);
    if format > 1 {
        return Err(smf_err(8, format!("unsupported format {format}")));
    }
    let division = u16::from_be_bytes([d[4], d[5]]);
    let mut warnings = Vec::new();

    let mut events: Vec<(u64, usize, Ev)> = Vec::new();
    let mut tempo: Vec<(u64, u32)> = Vec::new();
    let mut seq = 0usize;
    for ch in chunks.iter().skip(1) {
        if &ch.id != b"MTrk" {
            warnings.push(format!("skipped unknown chunk at byte {}", ch.offset));
            continue;
        }
        let mut tick = 0u64;
        for ev in EventIter::new(ch.data) {
            let ev = ev.map_err(|e| smf_err(ch.offset, e.to_string()))?;
            tick += ev.delta.as_int() as u64;
            seq += 1;
            match ev.kind {
                TrackEventKind::Meta(MetaMessage::Tempo(us)) => tempo.push((tick, us.as_int())),
                TrackEventKind::Midi { message, .. } => {
                    let e = match message {
                        MidiMessage::NoteOn { key, vel } if vel.as_int() > 0 => {
                            Ev::On(key.as_int(), vel.as_int())
                        }
                        MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                            Ev::Off(key.as_int())
                        }
                        MidiMessage::Controller { controller, value } if controller.as_int() == 64 => {
                            Ev::Pedal(value.as_int())
                        }
                        _ => continue,
                    };
                    events.push((tick, seq, e));
                }
                _ => {}
            }
        }
    }
    tempo.sort_by_key(|t| t.0);
    let clock = if division & 0x8000 != 0 {
        let fps = -((division >> 8) as u8 as i8) as f64;
        let fps = if fps == 29.0 { 29.97 } else { fps };
        let sub = (division & 0xff) as f64;
        if fps <= 0.0 || sub == 0.0 {
            return Err(smf_err(12, "invalid SMPTE division"));
        }
        Clock::Timecode {
            ticks_per_second: fps * sub,
        }
    } else {
        if division == 0 {
            return Err(smf_err(12, "zero ticks per quarter"));
        }
        Clock::Metrical {
            ppq: division as f64,
            tempo,
        }
    };

    // releases before pedal changes before presses at the same tick
    events.sort_by_key(|(tick, seq, e)| (*tick, e.rank(), *seq));
    let mut open: HashMap<u8, (f64, u8)> = HashMap::new();
    let mut notes = Vec::new();
    let mut pedal = Vec::new();
    let mut last_time = 0.0f64;
    let close = |notes: &mut Vec<MidiNote>, warnings: &mut Vec<String>, key: u8, on: (f64, u8), t: f64| {
        if t > on.0 {
            notes.push(MidiNote {
                midi: key,
                onset_s: on.0,
                keyoff_s: t,
                velocity: on.1,
            });
        } else {
            warnings.push(format!("dropped zero-length note {key} at {:.3} s", on.0));
        }
    };
    for (tick, _, e) in events {
        let t = clock.seconds(tick);
        last_time = last_time.max(t);
        match e {
            Ev::On(key, vel) => {
                if let Some(prev) = open.insert(key, (t, vel)) {
                    warnings.push(format!(
                        "overlapping notes on key {key}: closed at the next onset {t:.3} s"
                    ));
                    close(&mut notes, &mut warnings, key, prev, t);
                }
            }
            Ev::Off(key) => match open.remove(&key) {
                Some(on) => close(&mut notes, &mut warnings, key, on, t),
                None => warnings.push(format!("note-off for silent key {key} at {t:.3} s")),
            },
            Ev::Pedal(v) => pedal.push((t, v)),
        }
    }
    let mut still: Vec<_> = open.into_iter().collect();
    still.sort_by_key(|(k, _)| *k);
    for (key, on) in still {
        warnings.push(format!("key {key} never released; closed at {last_time:.3} s"));
        close(&mut notes, &mut warnings, key, on, last_time);
    }
    let performance = MidiPerformance::new(notes, PedalStream::from_pairs(&pedal))?;
    Ok(SmfImport {
        performance,
        warnings,
    })
}

fn to_tick(t: f64) -> u64 {
    (t * TICKS_PER_SECOND).round().max(0.0) as u64
}

/// Writes a format 0 file at 480 PPQ and a fixed 120 BPM.
pub fn write_smf(p: &MidiPerformance) -> Vec<u8> {
    let mut evs: Vec<(u64, u8, MidiMessage)> = Vec::new();
    for n in &p.notes {
        let on = to_tick(n.onset_s);
        let off = to_tick(n.keyoff_s).max(on + 1);
        let key = u7::new(n.midi);
        evs.push((on, 2, MidiMessage::NoteOn { key, vel: u7::new(n.velocity) }));
        evs.push((off, 0, MidiMessage::NoteOff { key, vel: u7::new(0) }));
    }
    for e in &p.pedal.events {
        evs.push((
            to_tick(e.time_s),
            1,
            MidiMessage::Controller {
                controller: u7::new(64),
                value: u7::new(e.value.min(127)),
            },
        ));
    }
    evs.sort_by_key(|(tick, rank, _)| (*tick, *rank));

    let mut track: Vec<TrackEvent<'static>> = vec![TrackEvent {
        delta: u28::new(0),
        kind: TrackEventKind::Meta(MetaMessage::Tempo(u24::new(WRITE_TEMPO_US))),
    }];
    let mut last = 0u64;
    for (tick, _, message) in evs {
        track.push(TrackEvent {
            delta: u28::new((tick - last) as u32),
            kind: TrackEventKind::Midi {
                channel: u4::new(0),
                message,
            },
        });
        last = tick;
    }
    track.push(TrackEvent {
        delta: u28::new(0),
        kind: TrackEventKind::Meta(MetaMessage::EndOfTrack),
    });
    let mut smf = Smf::new(Header::new(Format::SingleTrack, Timing::Metrical(u15::new(WRITE_PPQ))));
    smf.tracks.push(track);
    let mut out = Vec::new();
    smf.write_std(&mut out).expect("writing to a Vec cannot fail");
    out
}
