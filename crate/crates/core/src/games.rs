//! Normal-form games: payoff storage, expected utilities, potentials, equilibrium gaps.
//!
//! Actions and players are 0-based in memory. Dense tensors use a mixed-radix index with
//! player 0 as the fastest-varying digit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::matrix::Matrix;

/// Tolerance for simplex membership of strategies.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Tolerance for the exact potential check.
pub const POTENTIAL_TOL: f64 = 1e-12;

/// Per-player norm used for smoothness and strong convexity; the dual is paired implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFamily {
    /// ℓ1 primal, ℓ∞ dual.
    L1,
    /// ℓ2 primal, ℓ2 dual.
    L2,
}

impl NormFamily {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormFamily::L1 => v.iter().map(|x| x.abs()).sum(),
            NormFamily::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn dual_norm(self, v: &[f64]) -> f64 {
        match self {
            NormFamily::L1 => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormFamily::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// Squared norm of the difference `a - b`.
    pub fn dist_sq(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            NormFamily::L1 => {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
                d * d
            }
            NormFamily::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormFamily::L1 => "l1/linf",
            NormFamily::L2 => "l2/l2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payoffs {
    /// Two-player game with separate payoff matrices; `potential`, when present, is an exact potential.
    MatrixPair { a1: Matrix, a2: Matrix, potential: Option<Matrix> },
    /// Two-player identical-interest game (A, A).
    IdenticalMatrix(Matrix),
    /// n-player identical-interest game with a dense common payoff tensor.
    IdenticalTensor(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    action_counts: Vec<usize>,
    payoffs: Payoffs,
    pub metadata: Map<String, Value>,
}

/// Range and smoothness data of a potential game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialInfo {
    pub phi_range: f64,
    pub smoothness: f64,
    pub norm_family: NormFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashGap {
    pub per_player: Vec<f64>,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialCheck {
    pub is_potential: bool,
    pub worst_violation: f64,
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile(#[serde(with = "hexfloat::vec2")] Vec<Vec<f64>>);

pub fn check_simplex(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Dimension("empty strategy".into()));
    }
    if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("strategy has negative or non-finite entries: {x:?}")));
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidArgument(format!("strategy sums to {s}, not 1")));
    }
    Ok(())
}

pub fn uniform(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

pub fn vertex(m: usize, a: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[a] = 1.0;
    v
}

impl StrategyProfile {
    pub fn new(strategies: Vec<Vec<f64>>) -> Result<Self> {
        strategies.iter().try_for_each(|x| check_simplex(x))?;
        Ok(StrategyProfile(strategies))
    }

    /// Wraps strategies without validation; callers guarantee simplex membership.
    pub(crate) fn from_raw(strategies: Vec<Vec<f64>>) -> Self {
        StrategyProfile(strategies)
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        StrategyProfile(action_counts.iter().map(|&m| uniform(m)).collect())
    }

    pub fn pure(action_counts: &[usize], actions: &[usize]) -> Result<Self> {
        if action_counts.len() != actions.len() {
            return Err(Error::Dimension("one action per player required".into()));
        }
        action_counts
            .iter()
            .zip(actions)
            .map(|(&m, &a)| {
                if a < m {
                    Ok(vertex(m, a))
                } else {
                    Err(Error::Dimension(format!("action {a} out of range for {m} actions")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.0[i]
    }

    pub fn strategies(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.0
    }
}

/// Probability distribution over joint pure profiles, indexed like the payoff tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    action_counts: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(action_counts: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size: usize = action_counts.iter().product();
        if probs.len() != size {
            return Err(Error::Dimension(format!("expected {size} joint probabilities, got {}", probs.len())));
        }
        Ok(JointDistribution { action_counts, probs })
    }

    pub fn zeros(action_counts: &[usize]) -> Self {
        let size = action_counts.iter().product();
        JointDistribution { action_counts: action_counts.to_vec(), probs: vec![0.0; size] }
    }

    pub fn point(action_counts: &[usize], actions: &[usize]) -> Self {
        let mut d = Self::zeros(action_counts);
        d.probs[profile_index(action_counts, actions)] = 1.0;
        d
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        let mut d = Self::zeros(action_counts);
        let p = 1.0 / d.probs.len() as f64;
        d.probs.iter_mut().for_each(|v| *v = p);
        d
    }

    /// Adds `weight` times the product distribution of `profile`.
    pub fn accumulate(&mut self, profile: &[Vec<f64>], weight: f64) {
        let mut actions = vec![0; self.action_counts.len()];
        for idx in 0..self.probs.len() {
            decode_index(&self.action_counts, idx, &mut actions);
            let p: f64 = actions.iter().enumerate().map(|(i, &a)| profile[i][a]).product();
            self.probs[idx] += weight * p;
        }
    }

    pub fn normalized(mut self) -> Self {
        let s: f64 = self.probs.iter().sum();
        if s > 0.0 {
            self.probs.iter_mut().for_each(|v| *v /= s);
        }
        self
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Mixed-radix index of a pure profile, player 0 fastest.
pub fn profile_index(action_counts: &[usize], actions: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for (&m, &a) in action_counts.iter().zip(actions) {
        idx += a * stride;
        stride *= m;
    }
    idx
}

pub fn decode_index(action_counts: &[usize], mut idx: usize, out: &mut [usize]) {
    for (o, &m) in out.iter_mut().zip(action_counts) {
        *o = idx % m;
        idx /= m;
    }
}

impl Game {
    pub fn identical_matrix(a: Matrix) -> Result<Self> {
        check_finite(a.as_slice())?;
        Ok(Game { action_counts: vec![a.rows(), a.cols()], payoffs: Payoffs::IdenticalMatrix(a), metadata: Map::new() })
    }

    pub fn matrix_pair(a1: Matrix, a2: Matrix, potential: Option<Matrix>) -> Result<Self> {
        let dims = (a1.rows(), a1.cols());
        if (a2.rows(), a2.cols()) != dims || potential.as_ref().is_some_and(|p| (p.rows(), p.cols()) != dims) {
            return Err(Error::Dimension("payoff matrices must share one shape".into()));
        }
        check_finite(a1.as_slice())?;
        check_finite(a2.as_slice())?;
        if let Some(p) = &potential {
            check_finite(p.as_slice())?;
        }
        Ok(Game { action_counts: vec![dims.0, dims.1], payoffs: Payoffs::MatrixPair { a1, a2, potential }, metadata: Map::new() })
    }

    pub fn identical_tensor(action_counts: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if action_counts.len() < 2 || action_counts.iter().any(|&m| m == 0) {
            return Err(Error::Dimension("need at least two players with positive action counts".into()));
        }
        let size: usize = action_counts.iter().product();
        if values.len() != size {
            return Err(Error::Dimension(format!("tensor needs {size} entries, got {}", values.len())));
        }
        check_finite(&values)?;
        Ok(Game { action_counts, payoffs: Payoffs::IdenticalTensor(values), metadata: Map::new() })
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn payoffs(&self) -> &Payoffs {
        &self.payoffs
    }

    pub fn is_identical_interest(&self) -> bool {
        match &self.payoffs {
            Payoffs::IdenticalMatrix(_) | Payoffs::IdenticalTensor(_) => true,
            Payoffs::MatrixPair { a1, a2, .. } => {
                a1.as_slice().iter().zip(a2.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
            }
        }
    }

    /// Payoff of `player` at a pure profile.
    pub fn pure_payoff(&self, player: usize, actions: &[usize]) -> f64 {
        match &self.payoffs {
            Payoffs::IdenticalMatrix(a) => a.get(actions[0], actions[1]),
            Payoffs::MatrixPair { a1, a2, .. } => {
                if player == 0 {
                    a1.get(actions[0], actions[1])
                } else {
                    a2.get(actions[0], actions[1])
                }
            }
            Payoffs::IdenticalTensor(v) => v[profile_index(&self.action_counts, actions)],
        }
    }

    /// Potential at a pure profile, when the game carries one.
    pub fn pure_potential(&self, actions: &[usize]) -> Result<f64> {
        match &self.payoffs {
            Payoffs::IdenticalMatrix(a) => Ok(a.get(actions[0], actions[1])),
            Payoffs::IdenticalTensor(v) => Ok(v[profile_index(&self.action_counts, actions)]),
            Payoffs::MatrixPair { a1, potential, .. } => match potential {
                Some(p) => Ok(p.get(actions[0], actions[1])),
                None if self.is_identical_interest() => Ok(a1.get(actions[0], actions[1])),
                None => Err(Error::NoPotential),
            },
        }
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.players() != self.players() {
            return Err(Error::Dimension(format!("profile has {} players, game has {}", profile.players(), self.players())));
        }
        for (i, (x, &m)) in profile.strategies().iter().zip(&self.action_counts).enumerate() {
            if x.len() != m {
                return Err(Error::Dimension(format!("player {i} strategy has {} entries, expected {m}", x.len())));
            }
        }
        Ok(())
    }

    /// Gradient of player `i`'s expected utility, written into `out`; no validation.
    pub fn utility_gradient_into(&self, profile: &[Vec<f64>], player: usize, out: &mut [f64]) {
        match &self.payoffs {
            Payoffs::IdenticalMatrix(a) => matrix_gradient(a, profile, player, out),
            Payoffs::MatrixPair { a1, a2, .. } => {
                matrix_gradient(if player == 0 { a1 } else { a2 }, profile, player, out)
            }
            Payoffs::IdenticalTensor(v) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut actions = vec![0; self.players()];
                for (idx, &u) in v.iter().enumerate() {
                    if u == 0.0 {
                        continue;
                    }
                    decode_index(&self.action_counts, idx, &mut actions);
                    let mut p = 1.0;
                    for (j, &a) in actions.iter().enumerate() {
                        if j != player {
                            p *= profile[j][a];
                        }
                    }
                    out[actions[player]] += p * u;
                }
            }
        }
    }

    /// Potential value without validation.
    pub fn potential_raw(&self, profile: &[Vec<f64>]) -> Result<f64> {
        match &self.payoffs {
            Payoffs::IdenticalMatrix(a) => Ok(a.bilinear(&profile[0], &profile[1])),
            Payoffs::MatrixPair { a1, potential, .. } => match potential {
                Some(p) => Ok(p.bilinear(&profile[0], &profile[1])),
                None if self.is_identical_interest() => Ok(a1.bilinear(&profile[0], &profile[1])),
                None => Err(Error::NoPotential),
            },
            Payoffs::IdenticalTensor(_) => {
                let mut g = vec![0.0; self.action_counts[0]];
                self.utility_gradient_into(profile, 0, &mut g);
                Ok(dot(&g, &profile[0]))
            }
        }
    }

    /// Largest and smallest potential over pure profiles (a multilinear potential attains both at vertices).
    pub fn potential_extremes(&self) -> Result<(f64, f64)> {
        let size: usize = self.action_counts.iter().product();
        let mut actions = vec![0; self.players()];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for idx in 0..size {
            decode_index(&self.action_counts, idx, &mut actions);
            let v = self.pure_potential(&actions)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }

    pub fn phi_range(&self) -> Result<f64> {
        let (lo, hi) = self.potential_extremes()?;
        Ok(hi - lo)
    }

    pub fn potential_info(&self, norm: NormFamily) -> Result<PotentialInfo> {
        Ok(PotentialInfo { phi_range: self.phi_range()?, smoothness: smoothness_bound(self, norm)?, norm_family: norm })
    }

    /// Largest absolute payoff over all players and profiles.
    pub fn max_abs_payoff(&self) -> f64 {
        match &self.payoffs {
            Payoffs::IdenticalMatrix(a) => a.max_abs(),
            Payoffs::MatrixPair { a1, a2, .. } => a1.max_abs().max(a2.max_abs()),
            Payoffs::IdenticalTensor(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

fn matrix_gradient(a: &Matrix, profile: &[Vec<f64>], player: usize, out: &mut [f64]) {
    if player == 0 {
        a.mul_vec_into(&profile[1], out)
    } else {
        a.tmul_vec_into(&profile[0], out)
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("payoff entries must be finite".into()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn expected_utility(game: &Game, profile: &StrategyProfile, player: usize) -> Result<f64> {
    let g = utility_gradient(game, profile, player)?;
    Ok(dot(&g, profile.get(player)))
}

pub fn utility_gradient(game: &Game, profile: &StrategyProfile, player: usize) -> Result<Vec<f64>> {
    game.check_profile(profile)?;
    if player >= game.players() {
        return Err(Error::Dimension(format!("player {player} out of range")));
    }
    let mut out = vec![0.0; game.action_counts[player]];
    game.utility_gradient_into(profile.strategies(), player, &mut out);
    Ok(out)
}

pub fn potential_value(game: &Game, profile: &StrategyProfile) -> Result<f64> {
    game.check_profile(profile)?;
    game.potential_raw(profile.strategies())
}

/// Per-player best pure deviation gain, written into `gaps`; returns the maximum.
pub fn nash_gap_into(game: &Game, profile: &[Vec<f64>], scratch: &mut [Vec<f64>], gaps: &mut [f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..game.players() {
        game.utility_gradient_into(profile, i, &mut scratch[i]);
        let u = &scratch[i];
        let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gaps[i] = (best - dot(u, &profile[i])).max(0.0);
        worst = worst.max(gaps[i]);
    }
    worst
}

pub fn nash_gap(game: &Game, profile: &StrategyProfile) -> Result<NashGap> {
    game.check_profile(profile)?;
    let mut scratch: Vec<Vec<f64>> = game.action_counts.iter().map(|&m| vec![0.0; m]).collect();
    let mut per_player = vec![0.0; game.players()];
    let max = nash_gap_into(game, profile.strategies(), &mut scratch, &mut per_player);
    Ok(NashGap { per_player, max })
}

pub fn cce_gap(game: &Game, empirical: &JointDistribution) -> Result<f64> {
    if empirical.action_counts != game.action_counts {
        return Err(Error::Dimension("distribution shape differs from game".into()));
    }
    let total: f64 = empirical.probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 || empirical.probs.iter().any(|p| *p < 0.0) {
        return Err(Error::InvalidArgument(format!("distribution is not normalized (total {total})")));
    }
    let n = game.players();
    let mut actions = vec![0; n];
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let mut realized = 0.0;
        let mut deviation = vec![0.0; game.action_counts[i]];
        for (idx, &p) in empirical.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            decode_index(&game.action_counts, idx, &mut actions);
            realized += p * game.pure_payoff(i, &actions);
            let own = actions[i];
            for (a, d) in deviation.iter_mut().enumerate() {
                actions[i] = a;
                *d += p * game.pure_payoff(i, &actions);
            }
            actions[i] = own;
        }
        let best = deviation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(best - realized);
    }
    Ok(worst.max(0.0))
}

/// Conservative Lipschitz constant of the potential gradient under `norm`, floored at machine epsilon.
pub fn smoothness_bound(game: &Game, norm: NormFamily) -> Result<f64> {
    let l = match (&game.payoffs, norm) {
        (Payoffs::IdenticalMatrix(a), NormFamily::L1) => a.max_abs(),
        (Payoffs::IdenticalMatrix(a), NormFamily::L2) => a.frobenius(),
        (Payoffs::MatrixPair { potential: Some(p), .. }, NormFamily::L1) => p.max_abs(),
        (Payoffs::MatrixPair { potential: Some(p), .. }, NormFamily::L2) => p.frobenius(),
        (Payoffs::MatrixPair { a1, .. }, _) if game.is_identical_interest() => match norm {
            NormFamily::L1 => a1.max_abs(),
            NormFamily::L2 => a1.frobenius(),
        },
        (Payoffs::MatrixPair { .. }, _) => return Err(Error::NotPotential("no potential to bound".into())),
        (Payoffs::IdenticalTensor(_), NormFamily::L1) => game.players() as f64 * game.max_abs_payoff(),
        (Payoffs::IdenticalTensor(_), NormFamily::L2) => {
            let widest = *game.action_counts.iter().max().unwrap_or(&1) as f64;
            game.players() as f64 * widest * game.max_abs_payoff()
        }
    };
    Ok(l.max(f64::EPSILON))
}

/// Exact check that unilateral payoff differences equal potential differences on pure profiles.
///
/// Games without an explicit potential are tested against the canonical candidate built
/// along the path through the all-zero profile, which is a valid potential iff one exists.
pub fn verify_potential(game: &Game) -> PotentialCheck {
    let n = game.players();
    let size: usize = game.action_counts.iter().product();
    let candidate = |actions: &[usize]| -> f64 {
        if let Ok(v) = game.pure_potential(actions) {
            return v;
        }
        // Two-player candidate: Φ(a1,a2) = u1(a1,a2) − u1(0,a2) + u2(0,a2) − u2(0,0).
        game.pure_payoff(0, actions) - game.pure_payoff(0, &[0, actions[1]]) + game.pure_payoff(1, &[0, actions[1]])
            - game.pure_payoff(1, &[0, 0])
    };
    let mut worst: f64 = 0.0;
    let mut actions = vec![0; n];
    let mut other = vec![0; n];
    for idx in 0..size {
        decode_index(&game.action_counts, idx, &mut actions);
        let phi = candidate(&actions);
        for i in 0..n {
            other.copy_from_slice(&actions);
            for a in 0..game.action_counts[i] {
                if a == actions[i] {
                    continue;
                }
                other[i] = a;
                let du = game.pure_payoff(i, &actions) - game.pure_payoff(i, &other);
                let dphi = phi - candidate(&other);
                worst = worst.max((du - dphi).abs());
            }
        }
    }
    PotentialCheck { is_potential: worst <= POTENTIAL_TOL, worst_violation: worst }
}

// ---------------------------------------------------------------------------
// JSON game files

#[derive(Serialize, Deserialize)]
struct GameFile {
    players: usize,
    action_counts: Vec<usize>,
    payoff_kind: String,
    data: Value,
    #[serde(default)]
    metadata: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct MatrixData {
    #[serde(with = "hexfloat::vec2")]
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PairData {
    #[serde(with = "hexfloat::vec2")]
    a1: Vec<Vec<f64>>,
    #[serde(with = "hexfloat::vec2")]
    a2: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    potential: Option<Potential>,
}

#[derive(Serialize, Deserialize)]
struct Potential(#[serde(with = "hexfloat::vec2")] Vec<Vec<f64>>);

#[derive(Serialize, Deserialize)]
struct TensorData {
    /// Mixed-radix order, player 1 varying fastest.
    #[serde(with = "hexfloat::vec")]
    values: Vec<f64>,
}

impl Game {
    pub fn payoff_kind(&self) -> &'static str {
        match self.payoffs {
            Payoffs::MatrixPair { .. } => "matrix_pair",
            Payoffs::IdenticalMatrix(_) => "identical_matrix",
            Payoffs::IdenticalTensor(_) => "identical_tensor",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let data = match &self.payoffs {
            Payoffs::IdenticalMatrix(a) => serde_json::to_value(MatrixData { matrix: a.to_rows() }),
            Payoffs::MatrixPair { a1, a2, potential } => serde_json::to_value(PairData {
                a1: a1.to_rows(),
                a2: a2.to_rows(),
                potential: potential.as_ref().map(|p| Potential(p.to_rows())),
            }),
            Payoffs::IdenticalTensor(v) => serde_json::to_value(TensorData { values: v.clone() }),
        }
        .map_err(|e| Error::Format(e.to_string()))?;
        let file = GameFile {
            players: self.players(),
            action_counts: self.action_counts.clone(),
            payoff_kind: self.payoff_kind().into(),
            data,
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.players != file.action_counts.len() {
            return Err(Error::Format("players does not match action_counts length".into()));
        }
        let fmt = |e: serde_json::Error| Error::Format(e.to_string());
        let mut game = match file.payoff_kind.as_str() {
            "identical_matrix" => {
                let d: MatrixData = serde_json::from_value(file.data).map_err(fmt)?;
                Game::identical_matrix(Matrix::from_rows(&d.matrix)?)?
            }
            "matrix_pair" => {
                let d: PairData = serde_json::from_value(file.data).map_err(fmt)?;
                let p = d.potential.map(|p| Matrix::from_rows(&p.0)).transpose()?;
                Game::matrix_pair(Matrix::from_rows(&d.a1)?, Matrix::from_rows(&d.a2)?, p)?
            }
            "identical_tensor" => {
                let d: TensorData = serde_json::from_value(file.data).map_err(fmt)?;
                Game::identical_tensor(file.action_counts.clone(), d.values)?
            }
            other => return Err(Error::Format(format!("unknown payoff_kind {other:?}"))),
        };
        if game.action_counts != file.action_counts {
            return Err(Error::Format("action_counts disagree with payoff data".into()));
        }
        game.metadata = file.metadata;
        Ok(game)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
