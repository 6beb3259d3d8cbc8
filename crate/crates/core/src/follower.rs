//! Streaming score follower.
//!
//! Each note onset is one observation. Onsets closer than `dt_limit_ms` to the
//! previous one are treated as part of the same chord: the state is held and
//! only the emission is applied.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::{
    init_state_with, viterbi_backtrack, viterbi_step_fast, viterbi_step_hold, viterbi_step_naive,
    OutputModel, Regime, TransitionModel, ViterbiState,
};
use crate::perf_model::{
    build_output_model, transition_for, BandParams, ModelKind, OutputParams, Score,
};

pub const DEFAULT_DT_LIMIT_MS: f64 = 35.0;

/// One note onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceEvent {
    pub t_ms: f64,
    pub pitch: u8,
    #[serde(default, rename = "vel", skip_serializing_if = "Option::is_none")]
    pub velocity: Option<u8>,
}

impl PerformanceEvent {
    pub fn new(t_ms: f64, pitch: u8) -> Self {
        PerformanceEvent {
            t_ms,
            pitch,
            velocity: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Online,
    /// Keeps backpointers so the whole alignment can be recovered.
    Offline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerConfig {
    pub dt_limit_ms: f64,
    pub mode: Mode,
    pub model_kind: ModelKind,
    /// Band width `D`.
    pub band_width: usize,
    /// Average skip probability. `None` uses the band's residual mass.
    pub gamma_bar: Option<f64>,
}

impl Default for FollowerConfig {
    fn default() -> Self {
        FollowerConfig {
            dt_limit_ms: DEFAULT_DT_LIMIT_MS,
            mode: Mode::Online,
            model_kind: ModelKind::Uniform,
            band_width: 10,
            gamma_bar: None,
        }
    }
}

impl FollowerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_limit_ms > 0.0) {
            return Err(Error::ParameterInconsistency(format!(
                "dt_limit_ms must be positive, got {}",
                self.dt_limit_ms
            )));
        }
        if self.band_width == 0 {
            return Err(Error::ParameterInconsistency("band width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Estimate emitted for one event. `chord` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerOutput {
    pub event_index: usize,
    pub chord: usize,
    pub log_score: f64,
    /// The pitch lay outside the model's pitch universe and was clipped.
    pub clipped: bool,
}

/// Transition and output models compiled for one score.
#[derive(Debug, Clone)]
pub struct CompiledScore {
    pub transition: TransitionModel,
    pub output: OutputModel,
    pub params: OutputParams,
}

impl CompiledScore {
    pub fn new(transition: TransitionModel, output: OutputModel, params: OutputParams) -> Result<Self> {
        if transition.n_states() != output.n_states() {
            return Err(Error::ModelInconsistency(format!(
                "transition model has {} states but output model has {}",
                transition.n_states(),
                output.n_states()
            )));
        }
        Ok(CompiledScore {
            transition,
            output,
            params,
        })
    }

    /// Builds the model selected by `config`. `stop_resume` is required for
    /// [`ModelKind::Outer`].
    pub fn compile(
        score: &Score,
        config: &FollowerConfig,
        params: &OutputParams,
        stop_resume: Option<(&[f64], &[f64])>,
    ) -> Result<Self> {
        config.validate()?;
        let band = BandParams::table3(config.band_width)?;
        let gamma_bar = config.gamma_bar.unwrap_or_else(|| band.residual_mass());
        let transition = transition_for(config.model_kind, score.len(), &band, gamma_bar, stop_resume)?;
        let output = build_output_model(score, params)?.into();
        Self::new(transition, output, params.clone())
    }

    pub fn n_states(&self) -> usize {
        self.transition.n_states()
    }
}

/// One follower run over a stream of events.
#[derive(Debug, Clone)]
pub struct Session {
    models: Arc<CompiledScore>,
    config: FollowerConfig,
    prior: Vec<f64>,
    state: Option<ViterbiState>,
    last_t: Option<f64>,
    events: usize,
}

impl Session {
    pub fn new(models: Arc<CompiledScore>, config: FollowerConfig) -> Result<Self> {
        config.validate()?;
        let prior = models.transition.resume().to_vec();
        Ok(Session {
            models,
            config,
            prior,
            state: None,
            last_t: None,
            events: 0,
        })
    }

    pub fn models(&self) -> &CompiledScore {
        &self.models
    }

    pub fn config(&self) -> &FollowerConfig {
        &self.config
    }

    pub fn events_processed(&self) -> usize {
        self.events
    }

    pub fn state(&self) -> Option<&ViterbiState> {
        self.state.as_ref()
    }

    /// Clears the decoding state. The next event starts from `initial`, or
    /// from the resumption distribution if `None`.
    pub fn reset(&mut self, initial: Option<&[f64]>) -> Result<()> {
        let n = self.models.n_states();
        match initial {
            Some(p) if p.len() != n => {
                return Err(Error::Dimension {
                    expected: n,
                    got: p.len(),
                })
            }
            Some(p) => self.prior = p.to_vec(),
            None => self.prior = self.models.transition.resume().to_vec(),
        }
        self.state = None;
        self.last_t = None;
        self.events = 0;
        Ok(())
    }

    pub fn process_event(&mut self, event: &PerformanceEvent) -> Result<FollowerOutput> {
        if !event.t_ms.is_finite() {
            return Err(Error::Ordering {
                t_ms: event.t_ms,
                prev_ms: self.last_t.unwrap_or(f64::NAN),
            });
        }
        if let Some(prev) = self.last_t {
            if event.t_ms < prev {
                return Err(Error::Ordering {
                    t_ms: event.t_ms,
                    prev_ms: prev,
                });
            }
        }
        let (obs, clipped) = self.models.params.symbol(event.pitch);
        let models = &*self.models;
        match (&mut self.state, self.last_t) {
            (Some(state), Some(prev)) if event.t_ms - prev < self.config.dt_limit_ms => {
                viterbi_step_hold(state, obs, &models.output)?;
            }
            (Some(state), _) => step(state, obs, models)?,
            (None, _) => {
                let keep = self.config.mode == Mode::Offline;
                self.state = Some(init_state_with(&self.prior, &models.output, obs, keep)?);
            }
        }
        self.last_t = Some(event.t_ms);
        let index = self.events;
        self.events += 1;
        let (chord, log_score) = self.state.as_ref().expect("state initialized above").best();
        Ok(FollowerOutput {
            event_index: index,
            chord,
            log_score,
            clipped,
        })
    }

    pub fn process_all(&mut self, events: &[PerformanceEvent]) -> Result<Vec<FollowerOutput>> {
        events.iter().map(|e| self.process_event(e)).collect()
    }

    /// Most likely alignment of every event processed so far.
    pub fn decode_offline(&self) -> Result<Vec<usize>> {
        match &self.state {
            None => Ok(Vec::new()),
            Some(s) if !s.keeps_backpointers() => Err(Error::Unsupported(
                "offline decoding needs a session created in offline mode".into(),
            )),
            Some(s) => viterbi_backtrack(s),
        }
    }
}

fn step(state: &mut ViterbiState, obs: usize, models: &CompiledScore) -> Result<()> {
    match (&models.output, models.transition.regime()) {
        (OutputModel::Moore(_), Regime::Nonnegative) => {
            viterbi_step_fast(state, obs, &models.transition, &models.output)
        }
        _ => viterbi_step_naive(state, obs, &models.transition, &models.output),
    }
}

/// Offline alignment of a complete performance.
pub fn decode_offline(
    models: Arc<CompiledScore>,
    config: &FollowerConfig,
    events: &[PerformanceEvent],
) -> Result<Vec<usize>> {
    let config = FollowerConfig {
        mode: Mode::Offline,
        ..config.clone()
    };
    let mut session = Session::new(models, config)?;
    session.process_all(events)?;
    session.decode_offline()
}
