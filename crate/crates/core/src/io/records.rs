use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalkit::{AlignmentAnnotation, BenchRow, EvalReport, EventLabel, EventTruth, SkipRecord};
use crate::follower::FollowerOutput;
use crate::io::score::json_error;

/// One line of an annotation file. Chord numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum AnnotationRecord {
    Event {
        index: usize,
        chord: Option<usize>,
        label: EventLabel,
    },
    Skip {
        stop: usize,
        resume: usize,
        event_index: usize,
    },
}

fn to_one_based(c: usize) -> usize {
    c + 1
}

fn from_one_based(line: usize, c: usize) -> Result<usize> {
    c.checked_sub(1)
        .ok_or_else(|| Error::parse(line, "chord numbers start at 1"))
}

pub fn annotation_to_jsonl(annotation: &AlignmentAnnotation) -> String {
    let events = annotation.events.iter().enumerate().map(|(m, e)| AnnotationRecord::Event {
        index: m,
        chord: e.chord.map(to_one_based),
        label: e.label,
    });
    let skips = annotation.skips.iter().map(|s| AnnotationRecord::Skip {
        stop: to_one_based(s.stop),
        resume: to_one_based(s.resume),
        event_index: s.event_index,
    });
    events
        .chain(skips)
        .map(|r| serde_json::to_string(&r).expect("record serializes") + "\n")
        .collect()
}

pub fn annotation_from_jsonl(text: &str) -> Result<AlignmentAnnotation> {
    let mut ann = AlignmentAnnotation::default();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotationRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        match record {
            AnnotationRecord::Event { index, chord, label } => {
                if index != ann.events.len() {
                    return Err(Error::parse(
                        line_no,
                        format!("expected event {} but found {index}", ann.events.len()),
                    ));
                }
                let chord = chord.map(|c| from_one_based(line_no, c)).transpose()?;
                ann.events.push(EventTruth { chord, label });
            }
            AnnotationRecord::Skip {
                stop,
                resume,
                event_index,
            } => ann.skips.push(SkipRecord {
                stop: from_one_based(line_no, stop)?,
                resume: from_one_based(line_no, resume)?,
                event_index,
            }),
        }
    }
    ann.validate()?;
    Ok(ann)
}

pub fn parse_annotation(path: impl AsRef<Path>) -> Result<AlignmentAnnotation> {
    annotation_from_jsonl(&fs::read_to_string(path)?)
}

pub fn write_annotation(annotation: &AlignmentAnnotation, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, annotation_to_jsonl(annotation))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputRecord {
    event_index: usize,
    chord: usize,
    log_score: f64,
    #[serde(default)]
    clipped: bool,
}

/// Follower estimates as JSONL, chords 1-based.
pub fn follower_output_to_jsonl(outputs: &[FollowerOutput]) -> String {
    outputs
        .iter()
        .map(|o| {
            let r = OutputRecord {
                event_index: o.event_index,
                chord: to_one_based(o.chord),
                log_score: o.log_score,
                clipped: o.clipped,
            };
            serde_json::to_string(&r).expect("record serializes") + "\n"
        })
        .collect()
}

pub fn follower_output_from_jsonl(text: &str) -> Result<Vec<FollowerOutput>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: OutputRecord = serde_json::from_str(line).map_err(|e| Error::parse(k + 1, e.to_string()))?;
        out.push(FollowerOutput {
            event_index: r.event_index,
            chord: from_one_based(k + 1, r.chord)?,
            log_score: r.log_score,
            clipped: r.clipped,
        });
    }
    Ok(out)
}

pub fn report_to_json(report: &EvalReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn report_from_json(text: &str) -> Result<EvalReport> {
    serde_json::from_str(text).map_err(json_error)
}

pub fn write_report(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report_to_json(report) + "\n")?;
    Ok(())
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["N", "D", "algorithm", "mean_us", "sd_us"]).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.d.to_string(),
            r.algorithm.to_string(),
            format!("{:.4}", r.mean_us),
            format!("{:.4}", r.sd_us),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// One point of a following-time curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtCurvePoint {
    #[serde(rename = "H_prime")]
    pub h_prime: f64,
    pub ft_mean: f64,
    pub ft_stderr: f64,
}

pub fn ft_curve_to_csv(points: &[FtCurvePoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn ft_curve_from_csv(text: &str) -> Result<Vec<FtCurvePoint>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|rec| {
            rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::parse(line, e.to_string())
            })
        })
        .collect()
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
