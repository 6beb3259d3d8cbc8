use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::hmm::MooreOutput;
use crate::perf_model::score::{Score, PIANO_RANGE};

const SUM_TOL: f64 = 1e-9;

/// Emission parameters: probabilities of playing a chord tone, a semitone or
/// whole-tone neighbour, an octave displacement, or anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputParams {
    pub p_chord: f64,
    pub p_st: f64,
    pub p_wt: f64,
    pub p_oct: f64,
    pub p_rest: f64,
    pub pitch_universe: RangeInclusive<u8>,
}

/// Published empirical rates. They sum to 0.9999; [`OutputParams::table5`]
/// rescales them to exactly one.
pub const TABLE5: [f64; 5] = [0.9497, 0.0145, 0.0224, 0.0047, 0.0086];

impl Default for OutputParams {
    fn default() -> Self {
        Self::table5()
    }
}

impl OutputParams {
    pub fn new(probs: [f64; 5], pitch_universe: RangeInclusive<u8>) -> Result<Self> {
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::ParameterInconsistency("output probabilities must be nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::ParameterInconsistency(format!(
                "output probabilities sum to {sum}"
            )));
        }
        if pitch_universe.is_empty() || *pitch_universe.end() > 127 {
            return Err(Error::ParameterInconsistency("invalid pitch universe".into()));
        }
        let [p_chord, p_st, p_wt, p_oct, p_rest] = probs;
        Ok(OutputParams {
            p_chord,
            p_st,
            p_wt,
            p_oct,
            p_rest,
            pitch_universe,
        })
    }

    pub fn table5() -> Self {
        Self::table5_with_universe(PIANO_RANGE)
    }

    pub fn table5_with_universe(pitch_universe: RangeInclusive<u8>) -> Self {
        let sum: f64 = TABLE5.iter().sum();
        Self::new(TABLE5.map(|p| p / sum), pitch_universe).expect("published rates are valid")
    }

    pub fn n_symbols(&self) -> usize {
        self.pitch_universe.len()
    }

    /// Symbol index of `pitch`, clipped into the universe. The flag is set
    /// when clipping happened.
    pub fn symbol(&self, pitch: u8) -> (usize, bool) {
        let (lo, hi) = (*self.pitch_universe.start(), *self.pitch_universe.end());
        let clipped = pitch.clamp(lo, hi);
        ((clipped - lo) as usize, clipped != pitch)
    }

    pub fn pitch_of(&self, symbol: usize) -> u8 {
        self.pitch_universe.start() + symbol as u8
    }

    fn masses(&self) -> [f64; 5] {
        [self.p_chord, self.p_st, self.p_wt, self.p_oct, self.p_rest]
    }
}

/// Which exclusive pitch class a symbol belongs to for one chord.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitchClass {
    Chord = 0,
    Semitone = 1,
    WholeTone = 2,
    Octave = 3,
    Rest = 4,
}

/// Partition of the pitch universe relative to a set of chord pitches
/// (already expressed as symbol indices).
pub fn classify_pitches(chord_symbols: &[usize], n_symbols: usize) -> Vec<PitchClass> {
    let mut class = vec![PitchClass::Rest; n_symbols];
    for &o in chord_symbols {
        class[o] = PitchClass::Chord;
    }
    for (step, label) in [
        (1, PitchClass::Semitone),
        (2, PitchClass::WholeTone),
        (12, PitchClass::Octave),
    ] {
        for &o in chord_symbols {
            for q in [o.checked_sub(step), Some(o + step)].into_iter().flatten() {
                if q < n_symbols && class[q] == PitchClass::Rest {
                    class[q] = label;
                }
            }
        }
    }
    class
}

/// Moore output `b_i(o) = p_A / |c_i^A|` where `A` is the exclusive class of
/// `o` relative to chord `i`.
///
/// Mass of an empty class goes to the rest class (or, if that is empty too,
/// to the chord tones).
pub fn build_output_model(score: &Score, params: &OutputParams) -> Result<MooreOutput> {
    let k = params.n_symbols();
    let n = score.len();
    let mut rows = vec![0.0; n * k];
    for (i, chord) in score.chords().iter().enumerate() {
        if chord.is_empty() {
            return Err(Error::InvalidScore(format!("chord {i} is empty")));
        }
        let mut symbols: Vec<usize> = chord.pitches().iter().map(|&p| params.symbol(p).0).collect();
        symbols.dedup();
        let class = classify_pitches(&symbols, k);
        let mut sizes = [0usize; 5];
        for &c in &class {
            sizes[c as usize] += 1;
        }
        let mut mass = params.masses();
        for a in 1..4 {
            if sizes[a] == 0 {
                mass[4] += mass[a];
                mass[a] = 0.0;
            }
        }
        if sizes[4] == 0 {
            mass[0] += mass[4];
            mass[4] = 0.0;
        }
        let row = &mut rows[i * k..(i + 1) * k];
        for (o, &c) in class.iter().enumerate() {
            row[o] = mass[c as usize] / sizes[c as usize] as f64;
        }
    }
    MooreOutput::new(n, k, &rows)
}
