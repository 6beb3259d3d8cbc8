//! Inference for hidden Markov models whose transition matrix is a band
//! matrix plus a rank-1 outer product.
//!
//! All probabilities are carried in log domain with [`LOG_FLOOR`] standing in
//! for `ln 0`. Every argmax breaks ties toward the lowest state index, so the
//! fast and naive recursions produce identical backpointers.

mod forward_backward;
mod general;
mod logspace;
mod output;
mod transition;
mod viterbi;

pub use forward_backward::{
    backward_step_fast, forward_backward_fast, forward_backward_naive, forward_step_fast, Lattice,
};
pub use general::{
    backward_step_general, forward_backward_general, forward_step_general, viterbi_step_general,
};
pub use logspace::{argmax, ln_or_floor, log_sum_exp, LogSumAcc, LOG_FLOOR};
pub use output::{MealyOutput, MooreOutput, OutputModel};
pub use transition::{Regime, TransitionModel};
pub use viterbi::{
    init_state, init_state_with, viterbi_backtrack, viterbi_step_fast, viterbi_step_hold,
    viterbi_step_naive, ViterbiState, NO_PREDECESSOR,
};
