use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// The 88 keys of a piano, `A0..=C8`.
pub const PIANO_RANGE: RangeInclusive<u8> = 21..=108;

/// Set of MIDI pitches sounded together. Stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chord {
    pitches: Vec<u8>,
}

impl Chord {
    pub fn new(pitches: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut pitches: Vec<u8> = pitches.into_iter().collect();
        if pitches.is_empty() {
            return Err(Error::InvalidScore("empty chord".into()));
        }
        if let Some(&p) = pitches.iter().find(|&&p| p > 127) {
            return Err(Error::InvalidScore(format!("pitch {p} is not a MIDI note number")));
        }
        pitches.sort_unstable();
        if let Some(w) = pitches.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidScore(format!("duplicate pitch {} in chord", w[0])));
        }
        Ok(Chord { pitches })
    }

    pub fn single(pitch: u8) -> Result<Self> {
        Self::new([pitch])
    }

    pub fn pitches(&self) -> &[u8] {
        &self.pitches
    }

    pub fn len(&self) -> usize {
        self.pitches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pitches.is_empty()
    }

    pub fn contains(&self, pitch: u8) -> bool {
        self.pitches.binary_search(&pitch).is_ok()
    }
}

/// A symbolic score: a sequence of `N >= 1` chords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    name: String,
    chords: Vec<Chord>,
    bars: Option<Vec<Option<u32>>>,
}

impl Score {
    pub fn new(name: impl Into<String>, chords: Vec<Chord>) -> Result<Self> {
        if chords.is_empty() {
            return Err(Error::InvalidScore("score has no chords".into()));
        }
        Ok(Score {
            name: name.into(),
            chords,
            bars: None,
        })
    }

    /// Attaches per-chord bar numbers; `bars` must have one entry per chord.
    pub fn with_bars(mut self, bars: Vec<Option<u32>>) -> Result<Self> {
        if bars.len() != self.chords.len() {
            return Err(Error::Dimension {
                expected: self.chords.len(),
                got: bars.len(),
            });
        }
        self.bars = Some(bars);
        Ok(self)
    }

    /// Score of single-note chords.
    pub fn monophonic(name: impl Into<String>, pitches: &[u8]) -> Result<Self> {
        let chords = pitches.iter().map(|&p| Chord::single(p)).collect::<Result<_>>()?;
        Self::new(name, chords)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    pub fn chord(&self, i: usize) -> &Chord {
        &self.chords[i]
    }

    pub fn bar(&self, i: usize) -> Option<u32> {
        self.bars.as_ref().and_then(|b| b[i])
    }

    pub fn bars(&self) -> Option<&[Option<u32>]> {
        self.bars.as_deref()
    }

    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    /// Mean number of pitches per chord.
    pub fn mean_chord_size(&self) -> f64 {
        self.chords.iter().map(Chord::len).sum::<usize>() as f64 / self.len() as f64
    }
}
