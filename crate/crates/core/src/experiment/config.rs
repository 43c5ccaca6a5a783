//! TOML experiment configuration. Action indices in configs are 1-based.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::constructions::{auto_gamma, find_snake, padded_matrix, snake_game, spiral_matrix, PaddedMatrix, SnakePath};
use crate::dynamics::{Algorithm, DynamicsConfig, Init, LearningRate, Thinning, TieBreak, UpdateMode};
use crate::error::{Error, Result};
use crate::games::{Game, StrategyProfile};
use crate::matrix::Matrix;
use crate::regularizers::{reg_range, RegularizerSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Seeds random game sampling; the dynamics are deterministic.
    #[serde(default)]
    pub seed: u64,
    /// Relative to the output root (`PDL_OUT` or the working directory). Defaults to `runs/<name>`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub game: GameSource,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GameSource {
    /// JSON game file, relative to the config file.
    File { path: PathBuf },
    /// Identical-interest matrix, or a pair `a1`, `a2`.
    Inline {
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        a1: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        a2: Option<Vec<Vec<f64>>>,
    },
    Spiral {
        m: usize,
        #[serde(default)]
        r: i64,
    },
    /// `gamma` omitted means the theory value for the configured schedule and regularizer.
    Padded {
        m: usize,
        #[serde(default)]
        gamma: Option<f64>,
    },
    Snake {
        n: usize,
        #[serde(default = "default_budget")]
        budget: u64,
    },
    /// Entries uniform in [low, high).
    RandomIdentical {
        m: usize,
        #[serde(default = "default_players")]
        players: usize,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_high")]
        high: f64,
    },
}

fn default_budget() -> u64 {
    50_000_000
}
fn default_players() -> usize {
    2
}
fn default_low() -> f64 {
    -1.0
}
fn default_high() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordEvery {
    Stride(u64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    /// `uniform` or `path_start` (snake games).
    Named(String),
    /// 1-based action per player.
    Pure { pure: Vec<usize> },
    Custom { custom: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub regularizer: RegularizerSpec,
    /// η⁽ᵗ⁾ = 1/t^α; exclusive with `eta`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_mode")]
    pub update_mode: UpdateMode,
    #[serde(default)]
    pub lazy_epsilon: Option<f64>,
    #[serde(default = "default_tie_break")]
    pub tie_break: TieBreak,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_record_every")]
    pub record_every: RecordEvery,
    #[serde(default)]
    pub checkpoint_every: Option<u64>,
    /// Defaults to `path_start` for snake games and `uniform` otherwise.
    #[serde(default)]
    pub init: Option<InitSpec>,
}

fn default_algorithm() -> Algorithm {
    Algorithm::Ftrl
}
fn default_mode() -> UpdateMode {
    UpdateMode::Simultaneous
}
fn default_tie_break() -> TieBreak {
    TieBreak::AdversarialStay
}
fn default_horizon() -> u64 {
    1000
}
fn default_record_every() -> RecordEvery {
    RecordEvery::Named("powers_of_two".into())
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            algorithm: default_algorithm(),
            regularizer: RegularizerSpec::Entropy,
            alpha: None,
            eta: None,
            update_mode: default_mode(),
            lazy_epsilon: None,
            tie_break: default_tie_break(),
            horizon: default_horizon(),
            record_every: default_record_every(),
            checkpoint_every: None,
            init: None,
        }
    }
}

impl DynamicsSection {
    pub fn learning_rate(&self) -> Result<LearningRate> {
        match (self.alpha, self.eta) {
            (Some(_), Some(_)) => Err(Error::Config("set either dynamics.alpha or dynamics.eta, not both".into())),
            (None, Some(eta)) => Ok(LearningRate::Constant { eta }),
            (alpha, None) => Ok(LearningRate::Schedule { alpha: alpha.unwrap_or(0.0) }),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.0)
    }

    fn thinning(&self) -> Result<Thinning> {
        match &self.record_every {
            RecordEvery::Stride(k) => Ok(Thinning::Every(*k)),
            RecordEvery::Named(s) if s == "powers_of_two" => Ok(Thinning::PowersOfTwo),
            RecordEvery::Named(s) => Err(Error::Config(format!("record_every must be a stride or \"powers_of_two\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Periods,
    Improvement,
    PotentialMonotone,
    PathLength,
    GapProbability,
    OrderPreservation,
    RegretBound,
    Lazy,
    Snake,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Omitted: every check that applies to the game and dynamics.
    #[serde(default)]
    pub checks: Option<Vec<CheckKind>>,
    /// Threshold for rounds-to-ε-equilibrium; 1/(8m) on padded games, 0.01 otherwise.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Padded games: stop this many rounds after the last period starts.
    #[serde(default)]
    pub stop_after_final_period: Option<u64>,
    /// Snake games: stop when play reaches the end of the path.
    #[serde(default)]
    pub stop_at_path_end: bool,
    /// Lazy runs: stop at the first termination certificate.
    #[serde(default)]
    pub stop_on_certificate: bool,
}

/// Parameter grid; an empty axis keeps the base value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub regularizer: Vec<RegularizerSpec>,
    #[serde(default)]
    pub eta: Vec<f64>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
}

/// A config with its game built and its checks resolved.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub game: Game,
    pub padded: Option<PaddedMatrix>,
    pub snake: Option<SnakePath>,
    pub dynamics: DynamicsConfig,
    pub checks: Vec<CheckKind>,
    pub epsilon: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the game and dynamics. `base` resolves relative game file paths.
    pub fn prepare(&self, base: &Path) -> Result<Prepared> {
        let lr = self.dynamics.learning_rate()?;
        let mut padded = None;
        let mut snake = None;
        let game = match &self.game {
            GameSource::File { path } => {
                let p = if path.is_absolute() { path.clone() } else { base.join(path) };
                Game::load(&p).map_err(|e| match e {
                    Error::Io { path, source } => Error::Config(format!("cannot read game file {}: {source}", path.display())),
                    other => other,
                })?
            }
            GameSource::Inline { matrix, a1, a2 } => match (matrix, a1, a2) {
                (Some(m), None, None) => Game::identical_matrix(Matrix::from_rows(m)?)?,
                (None, Some(a1), Some(a2)) => Game::matrix_pair(Matrix::from_rows(a1)?, Matrix::from_rows(a2)?, None)?,
                _ => return Err(Error::Config("inline game needs `matrix`, or both `a1` and `a2`".into())),
            },
            GameSource::Spiral { m, r } => Game::identical_matrix(spiral_matrix(*m, *r)?.matrix)?.with_metadata("construction", "spiral"),
            GameSource::Padded { m, gamma } => {
                let g = match gamma {
                    Some(g) => *g,
                    None => {
                        let alpha = match lr {
                            LearningRate::Schedule { alpha } => alpha,
                            LearningRate::Constant { .. } => {
                                return Err(Error::Config("automatic gamma needs a 1/t^alpha schedule".into()))
                            }
                        };
                        auto_gamma(*m, alpha, reg_range(&self.dynamics.regularizer, *m))?
                    }
                };
                let p = padded_matrix(*m, g)?;
                let game = p.game();
                padded = Some(p);
                game
            }
            GameSource::Snake { n, budget } => {
                let path = find_snake(*n, *budget)?;
                let game = snake_game(&path)?;
                snake = Some(path);
                game
            }
            GameSource::RandomIdentical { m, players, low, high } => {
                if !(low < high) || *players < 2 || *m < 1 {
                    return Err(Error::Config("random game needs players ≥ 2, m ≥ 1 and low < high".into()));
                }
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
                if *players == 2 {
                    Game::identical_matrix(Matrix::from_fn(*m, *m, |_, _| rng.gen_range(*low..*high)))?
                } else {
                    let size = m.pow(*players as u32);
                    Game::identical_tensor(vec![*m; *players], (0..size).map(|_| rng.gen_range(*low..*high)).collect())?
                }
            }
        };
        let init = match &self.dynamics.init {
            None if snake.is_some() => path_start(snake.as_ref().unwrap()),
            None => Init::Uniform,
            Some(InitSpec::Named(s)) if s == "uniform" => Init::Uniform,
            Some(InitSpec::Named(s)) if s == "path_start" => match &snake {
                Some(p) => path_start(p),
                None => return Err(Error::Config("init = \"path_start\" needs a snake game".into())),
            },
            Some(InitSpec::Named(s)) => return Err(Error::Config(format!("unknown init {s:?}"))),
            Some(InitSpec::Pure { pure }) => {
                if pure.iter().any(|&a| a == 0) {
                    return Err(Error::Config("pure init actions are 1-based".into()));
                }
                Init::Pure(pure.iter().map(|a| a - 1).collect())
            }
            Some(InitSpec::Custom { custom }) => Init::Custom(StrategyProfile::new(custom.clone())?),
        };
        let dynamics = DynamicsConfig {
            algorithm: self.dynamics.algorithm,
            regularizer: self.dynamics.regularizer,
            learning_rate: lr,
            update_mode: self.dynamics.update_mode,
            lazy_epsilon: self.dynamics.lazy_epsilon,
            tie_break: self.dynamics.tie_break,
            horizon: self.dynamics.horizon,
            record_every: self.dynamics.thinning()?,
            checkpoint_every: self.dynamics.checkpoint_every,
            init,
        };
        dynamics.validate()?;
        let checks = resolve_checks(&self.analysis.checks, &dynamics, padded.is_some(), snake.is_some())?;
        let epsilon = match (self.analysis.epsilon, &padded) {
            (Some(e), _) => e,
            (None, Some(p)) => 1.0 / (8.0 * p.m as f64),
            (None, None) => 0.01,
        };
        Ok(Prepared { config: self.clone(), game, padded, snake, dynamics, checks, epsilon })
    }

    /// The `m` of constructions that have one.
    pub fn m(&self) -> Option<usize> {
        match &self.game {
            GameSource::Spiral { m, .. } | GameSource::Padded { m, .. } | GameSource::RandomIdentical { m, .. } => Some(*m),
            GameSource::Snake { n, .. } => Some(*n),
            _ => None,
        }
    }

    pub fn set_m(&mut self, value: usize) -> Result<()> {
        match &mut self.game {
            GameSource::Spiral { m, .. } | GameSource::Padded { m, .. } | GameSource::RandomIdentical { m, .. } => *m = value,
            GameSource::Snake { n, .. } => *n = value,
            _ => return Err(Error::Config("this game source has no size parameter".into())),
        }
        Ok(())
    }
}

fn path_start(path: &SnakePath) -> Init {
    let v = path.vertices[0];
    Init::Pure((0..path.n).map(|i| (v >> i & 1) as usize).collect())
}

fn applicable(kind: CheckKind, d: &DynamicsConfig, padded: bool, snake: bool) -> std::result::Result<(), &'static str> {
    let ftrl = d.algorithm == Algorithm::Ftrl;
    let plain = ftrl && d.lazy_epsilon.is_none();
    let constant = d.constant_eta().is_some();
    match kind {
        CheckKind::Periods if !padded => Err("needs a padded game"),
        CheckKind::Snake if !(snake && d.algorithm == Algorithm::FictitiousPlay) => {
            Err("needs fictitious play on a snake game")
        }
        CheckKind::Lazy if d.lazy_epsilon.is_none() => Err("needs lazy_epsilon"),
        CheckKind::Improvement | CheckKind::PotentialMonotone | CheckKind::PathLength if !(plain && constant) => {
            Err("needs non-lazy FTRL with a constant learning rate")
        }
        CheckKind::GapProbability | CheckKind::OrderPreservation | CheckKind::RegretBound if !plain => {
            Err("needs non-lazy FTRL")
        }
        _ => Ok(()),
    }
}

fn resolve_checks(requested: &Option<Vec<CheckKind>>, d: &DynamicsConfig, padded: bool, snake: bool) -> Result<Vec<CheckKind>> {
    use CheckKind::*;
    match requested {
        Some(list) => {
            for &k in list {
                applicable(k, d, padded, snake).map_err(|why| Error::Config(format!("check {k:?} {why}")))?;
            }
            let mut list = list.clone();
            list.sort();
            list.dedup();
            Ok(list)
        }
        None => {
            let all = [Periods, Improvement, PotentialMonotone, PathLength, GapProbability, OrderPreservation, RegretBound, Lazy, Snake];
            let mut out: Vec<CheckKind> = all.into_iter().filter(|&k| applicable(k, d, padded, snake).is_ok()).collect();
            if padded {
                // Pairwise order checks are quadratic per round and add nothing on long padded runs.
                out.retain(|k| !matches!(k, OrderPreservation | RegretBound));
            }
            Ok(out)
        }
    }
}
