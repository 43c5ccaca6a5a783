use std::path::{Path, PathBuf};

use super::{
    fictitious_play_choice, lazy_gain, pure_action, rate, Algorithm, Checkpoint, DynamicsConfig, Flow, Init,
    LearnerState, Observer, TrajectoryRecord, UpdateMode,
};
use crate::error::{Error, Result};
use crate::games::{dot, uniform, Game, StrategyProfile};
use crate::regularizers::ftrl_argmax_into;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory receiving `ckpt_<round>.json` files at the configured cadence.
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Rounds completed in total (including rounds before a resume).
    pub rounds: u64,
    pub stopped_by_observer: bool,
    pub last_checkpoint: Option<PathBuf>,
}

/// Single-threaded round engine. Round t plays x⁽ᵗ⁾, lets the scheduled players observe
/// u⁽ᵗ⁾, and computes x⁽ᵗ⁺¹⁾.
pub struct Engine<'g> {
    game: &'g Game,
    config: DynamicsConfig,
    learners: Vec<LearnerState>,
    round: u64,
    record: TrajectoryRecord,
    proposal: Vec<Vec<f64>>,
    identical: bool,
}

impl<'g> Engine<'g> {
    pub fn new(game: &'g Game, config: DynamicsConfig) -> Result<Self> {
        config.validate()?;
        let counts = game.action_counts();
        let strategies: Vec<Vec<f64>> = match &config.init {
            Init::Uniform => counts.iter().map(|&m| uniform(m)).collect(),
            Init::Pure(actions) => StrategyProfile::pure(counts, actions)?.into_inner(),
            Init::Custom(p) => {
                let p = StrategyProfile::new(p.strategies().to_vec())?;
                if p.players() != counts.len() || p.strategies().iter().zip(counts).any(|(x, &m)| x.len() != m) {
                    return Err(Error::Dimension("initial profile does not match the game".into()));
                }
                p.into_inner()
            }
        };
        let learners = strategies.into_iter().map(LearnerState::new).collect();
        Ok(Self::assemble(game, config, learners, 0))
    }

    /// Continues a run from a checkpoint; the continuation is bit-identical to an uninterrupted run.
    pub fn resume(game: &'g Game, config: DynamicsConfig, checkpoint: &Checkpoint) -> Result<Self> {
        config.validate()?;
        checkpoint.validate_for(game, &config)?;
        Ok(Self::assemble(game, config, checkpoint.learners.clone(), checkpoint.round))
    }

    fn assemble(game: &'g Game, config: DynamicsConfig, learners: Vec<LearnerState>, round: u64) -> Self {
        let counts = game.action_counts();
        Engine {
            identical: game.is_identical_interest(),
            record: TrajectoryRecord::empty(counts),
            proposal: counts.iter().map(|&m| vec![0.0; m]).collect(),
            game,
            config,
            learners,
            round,
        }
    }

    pub fn game(&self) -> &Game {
        self.game
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.config
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn learners(&self) -> &[LearnerState] {
        &self.learners
    }

    /// Strategy profile to be played in the next round.
    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile::from_raw(self.learners.iter().map(|l| l.current_strategy.clone()).collect())
    }

    /// Telemetry of the latest completed round in this session.
    pub fn last_record(&self) -> Option<&TrajectoryRecord> {
        (self.record.round > 0).then_some(&self.record)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::capture(&self.config, self.round, &self.learners)
    }

    /// Plays one round and returns its telemetry.
    pub fn step(&mut self) -> Result<&TrajectoryRecord> {
        let t = self.round + 1;
        let n = self.learners.len();
        let active = match self.config.update_mode {
            UpdateMode::Simultaneous => None,
            UpdateMode::Alternating => Some(((t - 1) % n as u64) as usize),
        };
        let rec = &mut self.record;
        rec.round = t;
        for (x, l) in rec.strategies.iter_mut().zip(&self.learners) {
            x.copy_from_slice(&l.current_strategy);
        }
        for i in 0..n {
            self.game.utility_gradient_into(&rec.strategies, i, &mut rec.utilities[i]);
            let u = &rec.utilities[i];
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rec.nash_gap[i] = (best - dot(u, &rec.strategies[i])).max(0.0);
        }
        rec.potential = if self.identical {
            Some(dot(&rec.strategies[0], &rec.utilities[0]))
        } else {
            self.game.potential_raw(&rec.strategies).ok()
        };

        let mut any_update = false;
        rec.event = false;
        for i in 0..n {
            let observes = active.map_or(true, |a| a == i);
            rec.observed[i] = observes;
            rec.updated[i] = false;
            rec.eta[i] = None;
            let learner = &mut self.learners[i];
            if observes {
                learner.observe(&rec.utilities[i]);
            }
            learner.cumulative_into(&mut rec.cumulative[i]);
            let cum = &rec.cumulative[i];
            let top = cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (g, &c) in rec.gaps[i].iter_mut().zip(cum) {
                *g = top - c;
            }
            if !observes {
                continue;
            }
            let proposal = &mut self.proposal[i];
            match self.config.algorithm {
                Algorithm::Ftrl => {
                    let eta = rate(self.config.learning_rate, learner.round);
                    ftrl_argmax_into(&self.config.regularizer, cum, eta, proposal)?;
                    rec.eta[i] = Some(eta);
                }
                Algorithm::FictitiousPlay => {
                    let a = fictitious_play_choice(cum, pure_action(&learner.current_strategy), self.config.tie_break);
                    proposal.iter_mut().for_each(|p| *p = 0.0);
                    proposal[a] = 1.0;
                }
            }
            learner.base_strategy.copy_from_slice(proposal);
            let accept = match self.config.lazy_epsilon {
                None => true,
                Some(eps) => lazy_gain(&learner.current_strategy, proposal, &rec.utilities[i]) >= eps,
            };
            if accept && learner.current_strategy != *proposal {
                learner.current_strategy.copy_from_slice(proposal);
                rec.updated[i] = true;
                any_update = true;
                if self.config.lazy_epsilon.is_some() || self.config.algorithm == Algorithm::FictitiousPlay {
                    learner.updates += 1;
                    rec.event = true;
                }
            }
        }
        for (i, l) in self.learners.iter_mut().enumerate() {
            if any_update {
                l.round_at_last_update = l.round;
            }
            rec.own_rounds[i] = l.round;
            rec.own_round_at_last_update[i] = l.round_at_last_update;
            rec.regret[i] = l.regret();
            rec.base_regret[i] = l.base_regret();
        }
        rec.period = None;
        self.round = t;
        Ok(&self.record)
    }

    /// Runs until the horizon or until the observer stops the run.
    pub fn run(&mut self, observer: &mut dyn Observer, options: &RunOptions) -> Result<RunSummary> {
        let mut last_checkpoint = None;
        let mut stopped = false;
        while self.round < self.config.horizon {
            if let Err(e) = self.step() {
                return Err(Error::Engine { round: self.round + 1, checkpoint: last_checkpoint, source: Box::new(e) });
            }
            let flow = observer.observe(&self.record);
            if let (Some(every), Some(dir)) = (self.config.checkpoint_every, &options.checkpoint_dir) {
                if self.round % every == 0 {
                    last_checkpoint = Some(self.write_checkpoint(dir)?);
                }
            }
            if flow == Flow::Stop {
                stopped = true;
                break;
            }
        }
        Ok(RunSummary { rounds: self.round, stopped_by_observer: stopped, last_checkpoint })
    }

    pub fn write_checkpoint(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("ckpt_{:012}.json", self.round));
        self.checkpoint().save(&path)?;
        Ok(path)
    }
}
