//! Learning dynamics: FTRL and fictitious play learners, the ε-lazy filter, and the
//! round engine that streams telemetry to observers.

mod checkpoint;
mod engine;
mod record;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use engine::{Engine, RunOptions, RunSummary};
pub use record::{Flow, Observer, Recorder, Thinning, TrajectoryRecord};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{dot, StrategyProfile};
use crate::hexfloat;
use crate::regularizers::{ftrl_argmax_into, RegularizerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ftrl,
    FictitiousPlay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    Simultaneous,
    /// One round is one player's turn, round-robin from player 1; a player observes
    /// utilities only on its own turns.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Keep the current action whenever it is among the maximizers.
    AdversarialStay,
    /// Smallest maximizing index.
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRate {
    /// η⁽ᵗ⁾ = 1/t^α.
    Schedule { alpha: f64 },
    Constant { eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Uniform,
    /// 0-based action per player.
    Pure(Vec<usize>),
    Custom(StrategyProfile),
}

/// Validated dynamics configuration. See [`crate::experiment`] for the TOML form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub algorithm: Algorithm,
    pub regularizer: RegularizerSpec,
    pub learning_rate: LearningRate,
    pub update_mode: UpdateMode,
    pub lazy_epsilon: Option<f64>,
    pub tie_break: TieBreak,
    pub horizon: u64,
    pub record_every: Thinning,
    pub checkpoint_every: Option<u64>,
    pub init: Init,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            algorithm: Algorithm::Ftrl,
            regularizer: RegularizerSpec::Entropy,
            learning_rate: LearningRate::Schedule { alpha: 0.0 },
            update_mode: UpdateMode::Simultaneous,
            lazy_epsilon: None,
            tie_break: TieBreak::AdversarialStay,
            horizon: 1000,
            record_every: Thinning::PowersOfTwo,
            checkpoint_every: None,
            init: Init::Uniform,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        match self.learning_rate {
            LearningRate::Schedule { alpha } if !(0.0..1.0).contains(&alpha) => {
                return Err(Error::Config(format!("alpha must lie in [0, 1), got {alpha}")))
            }
            LearningRate::Constant { eta } if !(eta > 0.0 && eta.is_finite()) => {
                return Err(Error::Config(format!("eta must be positive and finite, got {eta}")))
            }
            _ => {}
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if let Some(eps) = self.lazy_epsilon {
            if !(eps > 0.0) {
                return Err(Error::Config(format!("lazy_epsilon must be positive, got {eps}")));
            }
        }
        if self.checkpoint_every == Some(0) || self.record_every == Thinning::Every(0) {
            return Err(Error::Config("strides must be positive".into()));
        }
        Ok(())
    }

    /// Constant learning rate, if the schedule is constant.
    pub fn constant_eta(&self) -> Option<f64> {
        match self.learning_rate {
            LearningRate::Constant { eta } => Some(eta),
            LearningRate::Schedule { alpha } if alpha == 0.0 => Some(1.0),
            LearningRate::Schedule { .. } => None,
        }
    }
}

/// η⁽ᵗ⁾ for t ≥ 1; nonincreasing in t.
pub fn learning_rate(config: &DynamicsConfig, t: u64) -> f64 {
    rate(config.learning_rate, t)
}

pub fn rate(lr: LearningRate, t: u64) -> f64 {
    match lr {
        LearningRate::Constant { eta } => eta,
        LearningRate::Schedule { alpha } if alpha == 0.0 => 1.0,
        LearningRate::Schedule { alpha } => (t.max(1) as f64).powf(-alpha),
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompensatedSum {
    #[serde(with = "hexfloat")]
    sum: f64,
    #[serde(with = "hexfloat")]
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-player learner state. `round` counts this player's observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub cumulative: Vec<CompensatedSum>,
    #[serde(with = "hexfloat::vec")]
    pub current_strategy: Vec<f64>,
    pub round: u64,
    #[serde(with = "hexfloat::vec")]
    pub last_utility: Vec<f64>,
    /// Σ⟨x, u⟩ of the strategies actually played.
    pub realized: CompensatedSum,
    /// Strategy the unfiltered base learner would play now.
    #[serde(with = "hexfloat::vec")]
    pub base_strategy: Vec<f64>,
    /// Σ⟨x̃, u⟩ of the base learner's strategies.
    pub base_realized: CompensatedSum,
    /// Number of accepted lazy updates (or action switches under fictitious play).
    pub updates: u64,
    /// Own observation count at the latest update of any player.
    pub round_at_last_update: u64,
}

impl LearnerState {
    pub fn new(strategy: Vec<f64>) -> Self {
        let m = strategy.len();
        LearnerState {
            cumulative: vec![CompensatedSum::default(); m],
            base_strategy: strategy.clone(),
            current_strategy: strategy,
            round: 0,
            last_utility: vec![0.0; m],
            realized: CompensatedSum::default(),
            base_realized: CompensatedSum::default(),
            updates: 0,
            round_at_last_update: 0,
        }
    }

    pub fn cumulative_values(&self) -> Vec<f64> {
        self.cumulative.iter().map(CompensatedSum::value).collect()
    }

    pub fn cumulative_into(&self, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.cumulative) {
            *o = c.value();
        }
    }

    /// Adds one observed utility vector to the history and regret accumulators.
    pub fn observe(&mut self, u: &[f64]) {
        for (c, &v) in self.cumulative.iter_mut().zip(u) {
            c.add(v);
        }
        self.realized.add(dot(&self.current_strategy, u));
        self.base_realized.add(dot(&self.base_strategy, u));
        self.last_utility.copy_from_slice(u);
        self.round += 1;
    }

    /// max_a Σu[a] − Σ⟨x, u⟩ for the played strategies.
    pub fn regret(&self) -> f64 {
        max_value(&self.cumulative) - self.realized.value()
    }

    /// Regret of the unfiltered base learner.
    pub fn base_regret(&self) -> f64 {
        max_value(&self.cumulative) - self.base_realized.value()
    }
}

fn max_value(c: &[CompensatedSum]) -> f64 {
    c.iter().map(CompensatedSum::value).fold(f64::NEG_INFINITY, f64::max)
}

/// Adds `utility` to the history and returns the FTRL strategy for the new history.
pub fn step_ftrl(state: &mut LearnerState, utility: &[f64], eta: f64, spec: &RegularizerSpec) -> Result<Vec<f64>> {
    if utility.len() != state.cumulative.len() {
        return Err(Error::Dimension("utility length differs from action count".into()));
    }
    state.observe(utility);
    let mut out = vec![0.0; utility.len()];
    ftrl_argmax_into(spec, &state.cumulative_values(), eta, &mut out)?;
    Ok(out)
}

/// Index of the vertex fictitious play selects given the current (pure) action.
pub fn fictitious_play_choice(cumulative: &[f64], current: Option<usize>, tie_break: TieBreak) -> usize {
    let best = cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let (TieBreak::AdversarialStay, Some(c)) = (tie_break, current) {
        if cumulative[c] == best {
            return c;
        }
    }
    cumulative.iter().position(|&v| v == best).expect("non-empty cumulative")
}

/// Best-response vertex to the cumulative utilities under the tie-break policy.
pub fn step_fictitious_play(state: &LearnerState, tie_break: TieBreak) -> Vec<f64> {
    let cum = state.cumulative_values();
    let a = fictitious_play_choice(&cum, pure_action(&state.current_strategy), tie_break);
    crate::games::vertex(cum.len(), a)
}

/// The action of a vertex strategy, or `None` for a mixed strategy.
pub fn pure_action(x: &[f64]) -> Option<usize> {
    let a = x.iter().position(|&v| v == 1.0)?;
    x.iter().enumerate().all(|(i, &v)| i == a || v == 0.0).then_some(a)
}

/// Accepts `proposed` iff it improves the instantaneous utility by at least `epsilon`.
pub fn lazy_filter(current: &[f64], proposed: &[f64], utility: &[f64], epsilon: f64) -> (Vec<f64>, bool) {
    if lazy_gain(current, proposed, utility) >= epsilon {
        (proposed.to_vec(), true)
    } else {
        (current.to_vec(), false)
    }
}

pub fn lazy_gain(current: &[f64], proposed: &[f64], utility: &[f64]) -> f64 {
    proposed.iter().zip(current).zip(utility).map(|((p, c), u)| (p - c) * u).sum()
}

/// max_a Σ_t u_t[a] − Σ_t ⟨x_t, u_t⟩ over the rounds in which `player` observed utilities.
///
/// Requires an unthinned trajectory starting at round 1.
pub fn regret(trajectory: &[TrajectoryRecord], player: usize) -> Result<f64> {
    let mut expected = 1;
    let mut cum: Vec<CompensatedSum> = Vec::new();
    let mut realized = CompensatedSum::default();
    for r in trajectory {
        if r.round != expected {
            return Err(Error::InvalidArgument(format!("trajectory is thinned: round {} after {}", r.round, expected - 1)));
        }
        expected += 1;
        if !r.observed[player] {
            continue;
        }
        let u = &r.utilities[player];
        if cum.is_empty() {
            cum = vec![CompensatedSum::default(); u.len()];
        }
        for (c, &v) in cum.iter_mut().zip(u) {
            c.add(v);
        }
        realized.add(dot(&r.strategies[player], u));
    }
    if cum.is_empty() {
        return Ok(0.0);
    }
    Ok(max_value(&cum) - realized.value())
}
