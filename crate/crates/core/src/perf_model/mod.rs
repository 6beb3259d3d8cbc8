//! Compiling a symbolic score and empirical parameters into HMM components.

mod band;
mod emission;
mod score;

pub use band::{
    build_transition_model, select_band, smooth_histogram, table3, transition_for, uniform_model_of,
    BandParams, ModelKind, TABLE3,
};
pub use emission::{build_output_model, classify_pitches, OutputParams, PitchClass, TABLE5};
pub use score::{Chord, Score, PIANO_RANGE};
