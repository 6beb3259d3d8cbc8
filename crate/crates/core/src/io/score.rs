use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perf_model::{Chord, Score};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChordRecord {
    pitches: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bar: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreFile {
    #[serde(default)]
    name: String,
    chords: Vec<ChordRecord>,
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    if e.is_io() {
        Error::Io(e.into())
    } else {
        Error::parse(e.line(), e.to_string())
    }
}

pub fn score_from_json(text: &str) -> Result<Score> {
    let file: ScoreFile = serde_json::from_str(text).map_err(json_error)?;
    let has_bars = file.chords.iter().any(|c| c.bar.is_some());
    let bars: Vec<Option<u32>> = file.chords.iter().map(|c| c.bar).collect();
    let chords = file
        .chords
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            Chord::new(c.pitches).map_err(|e| Error::InvalidScore(format!("chord {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let score = Score::new(file.name, chords)?;
    if has_bars {
        score.with_bars(bars)
    } else {
        Ok(score)
    }
}

pub fn score_to_json(score: &Score) -> String {
    let file = ScoreFile {
        name: score.name().to_string(),
        chords: score
            .chords()
            .iter()
            .enumerate()
            .map(|(i, c)| ChordRecord {
                pitches: c.pitches().to_vec(),
                bar: score.bar(i),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("score serializes")
}

pub fn parse_score(path: impl AsRef<Path>) -> Result<Score> {
    score_from_json(&fs::read_to_string(path)?)
}

pub fn write_score(score: &Score, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, score_to_json(score) + "\n")?;
    Ok(())
}

/// Reads a JSON array of probabilities. The sum must be within 1e-6 of one;
/// the result is rescaled to sum to one exactly.
pub fn distribution_from_json(text: &str, expected_len: Option<usize>) -> Result<Vec<f64>> {
    let mut p: Vec<f64> = serde_json::from_str(text).map_err(json_error)?;
    if let Some(n) = expected_len {
        if p.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: p.len(),
            });
        }
    }
    if p.is_empty() || p.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::DegenerateDistribution(
            "distribution must be a nonempty array of nonnegative numbers".into(),
        ));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::DegenerateDistribution(format!("distribution sums to {total}")));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

pub fn parse_distribution(path: impl AsRef<Path>, expected_len: Option<usize>) -> Result<Vec<f64>> {
    distribution_from_json(&fs::read_to_string(path)?, expected_len)
}

pub fn write_distribution(p: &[f64], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_string(p).expect("floats serialize") + "\n")?;
    Ok(())
}
