use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest `|resume - stop|` recorded as a skip.
pub const MIN_SKIP_DISTANCE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventLabel {
    Match,
    PitchError,
    Insertion,
    NonAssociated,
}

/// Ground truth for one performed note. `chord` is 0-based and `None` only
/// for non-associated notes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventTruth {
    pub chord: Option<usize>,
    pub label: EventLabel,
}

impl EventTruth {
    pub fn new(chord: usize, label: EventLabel) -> Self {
        EventTruth {
            chord: Some(chord),
            label,
        }
    }

    pub fn non_associated() -> Self {
        EventTruth {
            chord: None,
            label: EventLabel::NonAssociated,
        }
    }
}

/// A jump from chord `stop` to chord `resume`; `event_index` is the first
/// event played after resuming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkipRecord {
    pub stop: usize,
    pub resume: usize,
    pub event_index: usize,
}

impl SkipRecord {
    pub fn distance(&self) -> usize {
        self.stop.abs_diff(self.resume)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentAnnotation {
    pub events: Vec<EventTruth>,
    pub skips: Vec<SkipRecord>,
}

impl AlignmentAnnotation {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (m, e) in self.events.iter().enumerate() {
            if e.chord.is_none() != (e.label == EventLabel::NonAssociated) {
                return Err(Error::Annotation(format!(
                    "event {m}: only non-associated events may lack a chord"
                )));
            }
        }
        let mut prev = 0;
        for (k, s) in self.skips.iter().enumerate() {
            if s.distance() < MIN_SKIP_DISTANCE {
                return Err(Error::Annotation(format!(
                    "skip {k} from {} to {} is shorter than {MIN_SKIP_DISTANCE} chords",
                    s.stop, s.resume
                )));
            }
            if s.event_index > self.events.len() {
                return Err(Error::Annotation(format!(
                    "skip {k} starts at event {} past the end of the stream ({} events)",
                    s.event_index,
                    self.events.len()
                )));
            }
            if s.event_index < prev {
                return Err(Error::Annotation(format!("skip {k} is out of order")));
            }
            prev = s.event_index;
        }
        Ok(())
    }

    /// Number of events with each label, in the order match, pitch error,
    /// insertion, non-associated.
    pub fn label_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for e in &self.events {
            c[e.label as usize] += 1;
        }
        c
    }
}
