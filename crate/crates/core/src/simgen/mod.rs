//! Synthetic scores and performances, and the following-time theory.

mod performance;
mod resumption;
mod score_gen;
mod theory;

pub use performance::{generate_performance, MistakeParams, SimulatedPerformance, SkipParams, Timing};
pub use resumption::sample_resumption_distribution;
pub use score_gen::{alphabet, generate_score, ScoreKind};
pub use theory::{
    exact_iid_following_time, h_prime, h_prime_uniform, n_tilde, n_tilde_all, predict_following_time,
    predict_following_time_general, FtPrediction,
};
