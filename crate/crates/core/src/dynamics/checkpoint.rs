use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DynamicsConfig, LearnerState};
use crate::error::{Error, Result};
use crate::games::Game;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Complete engine state after `round` rounds; all reals are hex-float strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub round: u64,
    /// Hash of the update rule (everything except horizon, thinning and checkpoint cadence).
    pub dynamics_fingerprint: String,
    pub learners: Vec<LearnerState>,
}

pub(crate) fn fingerprint(config: &DynamicsConfig) -> String {
    let rule = serde_json::json!({
        "algorithm": config.algorithm,
        "regularizer": config.regularizer,
        "learning_rate": config.learning_rate,
        "update_mode": config.update_mode,
        "lazy_epsilon": config.lazy_epsilon.map(crate::hexfloat::format),
        "tie_break": config.tie_break,
    });
    hex::encode(Sha256::digest(rule.to_string().as_bytes()))
}

impl Checkpoint {
    pub(crate) fn capture(config: &DynamicsConfig, round: u64, learners: &[LearnerState]) -> Self {
        Checkpoint { version: CHECKPOINT_VERSION, round, dynamics_fingerprint: fingerprint(config), learners: learners.to_vec() }
    }

    pub(crate) fn validate_for(&self, game: &Game, config: &DynamicsConfig) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {}", self.version)));
        }
        if self.dynamics_fingerprint != fingerprint(config) {
            return Err(Error::Config("checkpoint was written under a different update rule".into()));
        }
        let dims: Vec<usize> = self.learners.iter().map(|l| l.current_strategy.len()).collect();
        if dims != game.action_counts() {
            return Err(Error::Dimension("checkpoint does not match the game".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use crate::dynamics::{DynamicsConfig, Engine, LearningRate, Recorder, RunOptions, UpdateMode};
    use crate::games::Game;
    use crate::matrix::Matrix;
    use crate::regularizers::RegularizerSpec;

    use super::Checkpoint;

    #[test]
    fn resume_is_bit_identical() {
        let a = Matrix::from_rows(&[vec![0.3, -1.0, 2.0], vec![1.5, 0.1, -0.7], vec![0.0, 2.2, 1.1]]).unwrap();
        let game = Game::identical_matrix(a).unwrap();
        for (reg, mode, lazy) in [
            ("entropy", UpdateMode::Simultaneous, None),
            ("tsallis:q=0.4", UpdateMode::Alternating, Some(0.05)),
            ("log", UpdateMode::Simultaneous, None),
        ] {
            let cfg = DynamicsConfig {
                regularizer: reg.parse::<RegularizerSpec>().unwrap(),
                learning_rate: LearningRate::Schedule { alpha: 0.5 },
                update_mode: mode,
                lazy_epsilon: lazy,
                horizon: 400,
                ..DynamicsConfig::default()
            };
            let mut full = Recorder::dense();
            Engine::new(&game, cfg.clone()).unwrap().run(&mut full, &RunOptions::default()).unwrap();

            let mut first = Engine::new(&game, DynamicsConfig { horizon: 150, ..cfg.clone() }).unwrap();
            let mut head = Recorder::dense();
            first.run(&mut head, &RunOptions::default()).unwrap();
            let text = first.checkpoint().to_json().unwrap();
            let ckpt = Checkpoint::from_json(&text).unwrap();
            let mut second = Engine::resume(&game, cfg.clone(), &ckpt).unwrap();
            let mut tail = Recorder::dense();
            second.run(&mut tail, &RunOptions::default()).unwrap();

            let joined: Vec<_> = head.records.into_iter().chain(tail.records).collect();
            assert_eq!(joined.len(), full.records.len());
            for (x, y) in joined.iter().zip(&full.records) {
                assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
            }
        }
    }

    #[test]
    fn resume_rejects_other_rules() {
        let game = Game::identical_matrix(Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()).unwrap();
        let cfg = DynamicsConfig { horizon: 10, ..DynamicsConfig::default() };
        let mut e = Engine::new(&game, cfg.clone()).unwrap();
        e.run(&mut (), &RunOptions::default()).unwrap();
        let ckpt = e.checkpoint();
        let other = DynamicsConfig { regularizer: RegularizerSpec::Euclidean, ..cfg };
        assert!(Engine::resume(&game, other, &ckpt).is_err());
    }
}
