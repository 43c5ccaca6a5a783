//! Learning dynamics on potential games: FTRL and fictitious play engines, lower-bound game
//! constructions, and streaming checkers for the inequalities that govern their behavior.

pub mod analysis;
pub mod constructions;
pub mod dynamics;
pub mod experiment;
pub mod error;
pub mod games;
pub mod hexfloat;
pub mod matrix;
pub mod regularizers;

pub use error::{Error, Result};
pub use games::{Game, NormFamily, StrategyProfile};
pub use matrix::Matrix;
pub use regularizers::RegularizerSpec;
