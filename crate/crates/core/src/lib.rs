//! Score following for polyphonic MIDI performances with arbitrary repeats
//! and skips.
//!
//! The performance model is an HMM over score chords whose transition matrix
//! is a band matrix plus the outer product of a per-state skip mass and a
//! resumption distribution. That structure allows Viterbi, forward and
//! backward updates in `O(D·N)` per observation instead of `O(N²)`.

pub mod error;
pub mod evalkit;
pub mod follower;
pub mod hmm;
pub mod io;
pub mod perf_model;
pub mod simgen;

pub use error::{Error, Result};
