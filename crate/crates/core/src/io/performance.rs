use std::fs;
use std::path::Path;

use midly::{Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};

use crate::error::{Error, Result};
use crate::follower::PerformanceEvent;

const DEFAULT_TEMPO_US: u32 = 500_000;

fn check_event(line: usize, e: &PerformanceEvent, prev: Option<f64>) -> Result<()> {
    if !e.t_ms.is_finite() {
        return Err(Error::parse(line, "onset time must be finite"));
    }
    if e.pitch > 127 {
        return Err(Error::parse(line, format!("pitch {} is not a MIDI note", e.pitch)));
    }
    if let Some(p) = prev {
        if e.t_ms < p {
            return Err(Error::parse(line, format!("onset {} ms precedes {} ms", e.t_ms, p)));
        }
    }
    Ok(())
}

pub fn performance_from_jsonl(text: &str) -> Result<Vec<PerformanceEvent>> {
    let mut out: Vec<PerformanceEvent> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: PerformanceEvent =
            serde_json::from_str(line).map_err(|err| Error::parse(k + 1, err.to_string()))?;
        check_event(k + 1, &e, out.last().map(|p| p.t_ms))?;
        out.push(e);
    }
    Ok(out)
}

pub fn performance_to_jsonl(events: &[PerformanceEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect()
}

/// Rows `t_ms,pitch[,vel]`, with an optional header row.
pub fn performance_from_csv(text: &str) -> Result<Vec<PerformanceEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out: Vec<PerformanceEvent> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if k == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if !(2..=3).contains(&record.len()) {
            return Err(Error::parse(line, format!("expected 2 or 3 fields, got {}", record.len())));
        }
        let t_ms: f64 = record[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad onset time {:?}", &record[0])))?;
        let pitch: u8 = record[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad pitch {:?}", &record[1])))?;
        let velocity = match record.get(2) {
            Some(v) if !v.is_empty() => Some(
                v.parse::<u8>()
                    .map_err(|_| Error::parse(line, format!("bad velocity {v:?}")))?,
            ),
            _ => None,
        };
        let e = PerformanceEvent { t_ms, pitch, velocity };
        check_event(line, &e, out.last().map(|p| p.t_ms))?;
        out.push(e);
    }
    Ok(out)
}

pub fn performance_to_csv(events: &[PerformanceEvent]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_ms", "pitch", "vel"]).expect("in-memory write");
    for e in events {
        let vel = e.velocity.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([e.t_ms.to_string(), e.pitch.to_string(), vel])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Converts absolute ticks to milliseconds through a tempo map.
struct TempoMap {
    /// `(tick, ms at tick, µs per beat from there on)`.
    segments: Vec<(u64, f64, f64)>,
    ticks_per_beat: f64,
}

impl TempoMap {
    fn new(timing: Timing, mut changes: Vec<(u64, u32)>) -> Result<Self> {
        match timing {
            Timing::Timecode(fps, sub) => Ok(TempoMap {
                segments: vec![(0, 0.0, 1e6)],
                ticks_per_beat: fps.as_f32() as f64 * sub.max(1) as f64,
            }),
            Timing::Metrical(tpq) => {
                let ticks_per_beat = tpq.as_int() as f64;
                if ticks_per_beat == 0.0 {
                    return Err(Error::parse(0, "zero ticks per quarter note"));
                }
                changes.sort_by_key(|c| c.0);
                let mut map = TempoMap {
                    segments: vec![(0, 0.0, DEFAULT_TEMPO_US as f64)],
                    ticks_per_beat,
                };
                for (tick, tempo) in changes {
                    let ms = map.ms(tick);
                    if map.segments.last().is_some_and(|s| s.0 == tick) {
                        map.segments.pop();
                    }
                    map.segments.push((tick, ms, tempo as f64));
                }
                Ok(map)
            }
        }
    }

    fn ms(&self, tick: u64) -> f64 {
        let k = self.segments.partition_point(|s| s.0 <= tick) - 1;
        let (t0, ms0, tempo) = self.segments[k];
        ms0 + (tick - t0) as f64 * tempo / (self.ticks_per_beat * 1000.0)
    }
}

/// Note-on events (velocity > 0) of every track, merged by time.
pub fn performance_from_smf(bytes: &[u8]) -> Result<Vec<PerformanceEvent>> {
    let smf = Smf::parse(bytes).map_err(|e| Error::parse(0, format!("invalid MIDI file: {e}")))?;
    let mut tempos = Vec::new();
    let mut notes: Vec<(u64, usize, u8, u8)> = Vec::new();
    for track in &smf.tracks {
        let mut tick = 0u64;
        for ev in track {
            tick += ev.delta.as_int() as u64;
            match ev.kind {
                TrackEventKind::Meta(MetaMessage::Tempo(t)) => tempos.push((tick, t.as_int())),
                TrackEventKind::Midi {
                    message: MidiMessage::NoteOn { key, vel },
                    ..
                } if vel.as_int() > 0 => {
                    notes.push((tick, notes.len(), key.as_int(), vel.as_int()));
                }
                _ => {}
            }
        }
    }
    // Stable by input order for equal ticks.
    notes.sort_by_key(|n| (n.0, n.1));
    let map = TempoMap::new(smf.header.timing, tempos)?;
    Ok(notes
        .into_iter()
        .map(|(tick, _, key, vel)| PerformanceEvent {
            t_ms: map.ms(tick),
            pitch: key,
            velocity: Some(vel),
        })
        .collect())
}

/// Single-track SMF with one tick per millisecond. Onsets are rounded to
/// whole milliseconds; notes last 1 tick unless cut short.
pub fn performance_to_smf(events: &[PerformanceEvent]) -> Result<Vec<u8>> {
    let header = Header::new(Format::SingleTrack, Timing::Metrical(500.into()));
    let mut timeline: Vec<(u64, bool, u8, u8)> = Vec::new();
    for e in events {
        if !(e.t_ms >= 0.0) {
            return Err(Error::ParameterInconsistency("MIDI onsets must be nonnegative".into()));
        }
        let tick = e.t_ms.round() as u64;
        timeline.push((tick, true, e.pitch, e.velocity.unwrap_or(64).max(1)));
        timeline.push((tick + 1, false, e.pitch, 0));
    }
    // Note-offs before note-ons at the same tick.
    timeline.sort_by_key(|x| (x.0, x.1));
    let mut track = vec![TrackEvent {
        delta: 0.into(),
        kind: TrackEventKind::Meta(MetaMessage::Tempo(DEFAULT_TEMPO_US.into())),
    }];
    let mut last = 0;
    for (tick, on, key, vel) in timeline {
        let message = if on {
            MidiMessage::NoteOn {
                key: key.into(),
                vel: vel.into(),
            }
        } else {
            MidiMessage::NoteOff {
                key: key.into(),
                vel: 0.into(),
            }
        };
        track.push(TrackEvent {
            delta: ((tick - last) as u32).into(),
            kind: TrackEventKind::Midi {
                channel: 0.into(),
                message,
            },
        });
        last = tick;
    }
    track.push(TrackEvent {
        delta: 0.into(),
        kind: TrackEventKind::Meta(MetaMessage::EndOfTrack),
    });
    let mut smf = Smf::new(header);
    smf.tracks.push(track);
    let mut out = Vec::new();
    smf.write_std(&mut out)?;
    Ok(out)
}

/// Reads a performance, choosing the format from the extension
/// (`.mid`/`.midi`, `.csv`, otherwise JSONL).
pub fn parse_performance(path: impl AsRef<Path>) -> Result<Vec<PerformanceEvent>> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "mid" | "midi" | "smf" => performance_from_smf(&fs::read(path)?),
        "csv" => performance_from_csv(&fs::read_to_string(path)?),
        _ => performance_from_jsonl(&fs::read_to_string(path)?),
    }
}

pub fn write_performance(events: &[PerformanceEvent], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    match ext {
        "mid" | "midi" | "smf" => fs::write(path, performance_to_smf(events)?)?,
        "csv" => fs::write(path, performance_to_csv(events))?,
        _ => fs::write(path, performance_to_jsonl(events))?,
    }
    Ok(())
}
