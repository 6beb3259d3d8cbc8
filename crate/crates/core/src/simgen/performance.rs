use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evalkit::{AlignmentAnnotation, EventLabel, EventTruth, SkipRecord, MIN_SKIP_DISTANCE};
use crate::follower::PerformanceEvent;
use crate::perf_model::{Score, PIANO_RANGE, TABLE5};

/// Skip structure of a synthetic performance.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipParams {
    /// Stop distribution `s`.
    pub s: Vec<f64>,
    /// Resumption distribution `r`.
    pub r: Vec<f64>,
    pub n_skips: usize,
    /// Chords played after each resumption before the next stop is allowed.
    pub min_segment: usize,
    /// Longest stretch played between resumption and the next stop.
    pub max_segment: Option<usize>,
}

impl SkipParams {
    pub fn uniform(n: usize, n_skips: usize) -> Self {
        let u = vec![1.0 / n as f64; n];
        SkipParams {
            s: u.clone(),
            r: u,
            n_skips,
            min_segment: 8,
            max_segment: Some(30),
        }
    }

    /// A straight run through the score.
    pub fn none(n: usize) -> Self {
        SkipParams {
            n_skips: 0,
            ..Self::uniform(n, 0)
        }
    }
}

/// Per-note mistake probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MistakeParams {
    pub semitone: f64,
    pub whole_tone: f64,
    pub octave: f64,
    /// Any other wrong pitch.
    pub other: f64,
    /// Extra note after the played one.
    pub insertion: f64,
    pub deletion: f64,
}

impl MistakeParams {
    pub fn none() -> Self {
        Self::default()
    }

    /// Pitch error rates of the published emission table, no insertions or
    /// deletions.
    pub fn table5() -> Self {
        let total: f64 = TABLE5.iter().sum();
        MistakeParams {
            semitone: TABLE5[1] / total,
            whole_tone: TABLE5[2] / total,
            octave: TABLE5[3] / total,
            other: TABLE5[4] / total,
            insertion: 0.0,
            deletion: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.semitone,
            self.whole_tone,
            self.octave,
            self.other,
            self.insertion,
            self.deletion,
        ];
        if all.iter().any(|&p| !(0.0..1.0).contains(&p)) || all.iter().sum::<f64>() >= 1.0 {
            return Err(Error::ParameterInconsistency(
                "mistake probabilities must lie in [0, 1) and sum below 1".into(),
            ));
        }
        Ok(())
    }

    fn pitch_error(&self) -> f64 {
        self.semitone + self.whole_tone + self.octave + self.other
    }
}

/// Onset spacing of synthetic performances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub inter_chord_ms: f64,
    pub intra_chord_ms: f64,
    /// Offset of an inserted note from the start of its chord.
    pub insertion_ms: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            inter_chord_ms: 500.0,
            intra_chord_ms: 10.0,
            insertion_ms: 250.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPerformance {
    pub events: Vec<PerformanceEvent>,
    pub annotation: AlignmentAnnotation,
    /// Chords in the order they were played.
    pub traversal: Vec<usize>,
}

fn check_distribution(name: &str, p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::ParameterInconsistency(format!(
            "{name} has {} entries for a score of {n} chords",
            p.len()
        )));
    }
    let total: f64 = p.iter().sum();
    if p.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > 1e-6 {
        return Err(Error::ParameterInconsistency(format!("{name} is not a distribution")));
    }
    Ok(())
}

fn sample_masked(rng: &mut ChaCha8Rng, p: &[f64], keep: impl Fn(usize) -> bool) -> Option<usize> {
    let w: Vec<f64> = p.iter().enumerate().map(|(i, &x)| if keep(i) { x } else { 0.0 }).collect();
    WeightedIndex::new(&w).ok().map(|d| d.sample(rng))
}

fn shift(pitch: u8, rng: &mut ChaCha8Rng, step: i16) -> u8 {
    let (lo, hi) = (*PIANO_RANGE.start() as i16, *PIANO_RANGE.end() as i16);
    let p = pitch as i16;
    let up = p + step <= hi;
    let down = p - step >= lo;
    let q = match (up, down) {
        (true, true) => {
            if rng.gen_bool(0.5) {
                p + step
            } else {
                p - step
            }
        }
        (true, false) => p + step,
        (false, true) => p - step,
        (false, false) => p,
    };
    q as u8
}

fn wrong_pitch(pitch: u8, rng: &mut ChaCha8Rng) -> u8 {
    loop {
        let q = rng.gen_range(PIANO_RANGE);
        let d = q.abs_diff(pitch);
        if !matches!(d, 0 | 1 | 2 | 12) {
            return q;
        }
    }
}

/// Plays the chord sequence `traversal` with mistakes.
struct Player<'a> {
    score: &'a Score,
    mistakes: MistakeParams,
    timing: Timing,
    rng: ChaCha8Rng,
    events: Vec<PerformanceEvent>,
    truth: Vec<EventTruth>,
    t: f64,
}

impl Player<'_> {
    fn play_chord(&mut self, chord: usize) {
        let mut pitches = self.score.chord(chord).pitches().to_vec();
        pitches.shuffle(&mut self.rng);
        let start = self.t;
        let mut offset = 0.0;
        let mut inserted = Vec::new();
        let m = self.mistakes;
        for &p in &pitches {
            if self.rng.gen::<f64>() < m.deletion {
                continue;
            }
            let u: f64 = self.rng.gen::<f64>() * (1.0 - m.deletion);
            let (pitch, label) = if u < m.semitone {
                (shift(p, &mut self.rng, 1), EventLabel::PitchError)
            } else if u < m.semitone + m.whole_tone {
                (shift(p, &mut self.rng, 2), EventLabel::PitchError)
            } else if u < m.semitone + m.whole_tone + m.octave {
                (shift(p, &mut self.rng, 12), EventLabel::PitchError)
            } else if u < m.pitch_error() {
                (wrong_pitch(p, &mut self.rng), EventLabel::PitchError)
            } else {
                (p, EventLabel::Match)
            };
            self.events.push(PerformanceEvent::new(start + offset, pitch));
            self.truth.push(EventTruth::new(chord, label));
            offset += self.timing.intra_chord_ms;
            if self.rng.gen::<f64>() < m.insertion {
                inserted.push(self.rng.gen_range(PIANO_RANGE));
            }
        }
        for (k, p) in inserted.into_iter().enumerate() {
            let t = start + self.timing.insertion_ms + k as f64 * self.timing.intra_chord_ms;
            self.events.push(PerformanceEvent::new(t, p));
            self.truth.push(EventTruth::new(chord, EventLabel::Insertion));
        }
        self.t = start + self.timing.inter_chord_ms;
    }
}

/// Synthetic performance of `score` with skips drawn from `(s, r)` and
/// per-note mistakes.
///
/// Playing starts at the first chord. Each stop is drawn from `s` restricted
/// to `[resume + min_segment, resume + max_segment]` (the last chord if that
/// window carries no mass); each resumption is drawn from `r` restricted to
/// positions at least four chords from the stop. After the last skip the
/// performer plays on to one more stop drawn the same way.
pub fn generate_performance(
    score: &Score,
    skips: &SkipParams,
    mistakes: &MistakeParams,
    timing: &Timing,
    seed: u64,
) -> Result<SimulatedPerformance> {
    let n = score.len();
    check_distribution("stop distribution", &skips.s, n)?;
    check_distribution("resumption distribution", &skips.r, n)?;
    mistakes.validate()?;
    if !(timing.intra_chord_ms >= 0.0 && timing.inter_chord_ms > 0.0) {
        return Err(Error::ParameterInconsistency("invalid timing".into()));
    }
    if skips.max_segment.is_some_and(|m| m < skips.min_segment) {
        return Err(Error::ParameterInconsistency("max_segment below min_segment".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut player = Player {
        score,
        mistakes: *mistakes,
        timing: *timing,
        rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
        events: Vec::new(),
        truth: Vec::new(),
        t: 0.0,
    };
    let mut traversal = Vec::new();
    let mut records = Vec::with_capacity(skips.n_skips);
    let mut pos = 0;
    for k in 0..=skips.n_skips {
        let lo = pos + skips.min_segment;
        let hi = skips.max_segment.map_or(n - 1, |m| (pos + m).min(n - 1));
        let stop = if skips.n_skips == 0 {
            n - 1
        } else {
            sample_masked(&mut rng, &skips.s, |i| i >= lo && i <= hi).unwrap_or(n - 1)
        };
        for c in pos..=stop {
            player.play_chord(c);
            traversal.push(c);
        }
        if k == skips.n_skips {
            break;
        }
        let resume = sample_masked(&mut rng, &skips.r, |j| j.abs_diff(stop) >= MIN_SKIP_DISTANCE)
            .ok_or_else(|| {
                Error::ParameterInconsistency(format!(
                    "resumption distribution has no mass at least {MIN_SKIP_DISTANCE} chords from {stop}"
                ))
            })?;
        records.push(SkipRecord {
            stop,
            resume,
            event_index: player.events.len(),
        });
        pos = resume;
    }
    Ok(SimulatedPerformance {
        events: player.events,
        annotation: AlignmentAnnotation {
            events: player.truth,
            skips: records,
        },
        traversal,
    })
}
