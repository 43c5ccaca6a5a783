//! Checkers for the single-step and cumulative FTRL inequalities.

use serde_json::json;

use super::{feed, Check, CheckReport, Tally};
use crate::dynamics::{CompensatedSum, Flow, Observer, TrajectoryRecord};
use crate::games::NormFamily;

pub const IMPROVEMENT_TOL: f64 = 1e-8;
pub const MONOTONE_TOL: f64 = 1e-8;
pub const PATH_LENGTH_TOL: f64 = 1e-6;
pub const GAP_PROBABILITY_TOL: f64 = 1e-12;
pub const ORDER_TIE_TOL: f64 = 1e-12;
pub const REGRET_TOL: f64 = 1e-6;

/// Copy of the previous round's telemetry, reused without reallocation.
#[derive(Debug, Clone, Default)]
pub(crate) struct Prev {
    pub round: u64,
    pub strategies: Vec<Vec<f64>>,
    pub utilities: Vec<Vec<f64>>,
    pub cumulative: Vec<Vec<f64>>,
    pub gaps: Vec<Vec<f64>>,
    pub eta: Vec<Option<f64>>,
    pub observed: Vec<bool>,
    pub potential: Option<f64>,
}

fn copy_nested(dst: &mut Vec<Vec<f64>>, src: &[Vec<f64>]) {
    if dst.len() == src.len() && dst.iter().zip(src).all(|(d, s)| d.len() == s.len()) {
        for (d, s) in dst.iter_mut().zip(src) {
            d.copy_from_slice(s);
        }
    } else {
        *dst = src.to_vec();
    }
}

impl Prev {
    pub fn store(&mut self, r: &TrajectoryRecord) {
        self.round = r.round;
        copy_nested(&mut self.strategies, &r.strategies);
        copy_nested(&mut self.utilities, &r.utilities);
        copy_nested(&mut self.cumulative, &r.cumulative);
        copy_nested(&mut self.gaps, &r.gaps);
        self.eta.clone_from(&r.eta);
        self.observed.clone_from(&r.observed);
        self.potential = r.potential;
    }

    /// True when `r` is the round right after the stored one.
    pub fn precedes(&self, r: &TrajectoryRecord) -> bool {
        self.round > 0 && r.round == self.round + 1
    }
}

/// ⟨x⁽ᵗ⁺¹⁾ − x⁽ᵗ⁾, u⁽ᵗ⁾⟩ ≥ ‖x⁽ᵗ⁺¹⁾ − x⁽ᵗ⁾‖²/η for every observing player and consecutive pair.
#[derive(Debug, Clone)]
pub struct ImprovementCheck {
    eta: f64,
    norm: NormFamily,
    prev: Prev,
    tally: Tally,
    skipped_pairs: u64,
}

impl ImprovementCheck {
    pub fn new(eta: f64, norm: NormFamily) -> Self {
        ImprovementCheck { eta, norm, prev: Prev::default(), tally: Tally::new(IMPROVEMENT_TOL), skipped_pairs: 0 }
    }
}

impl Observer for ImprovementCheck {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        if self.prev.precedes(r) {
            for i in 0..r.strategies.len() {
                if !self.prev.observed[i] {
                    continue;
                }
                let (x0, x1, u) = (&self.prev.strategies[i], &r.strategies[i], &self.prev.utilities[i]);
                let gain: f64 = x1.iter().zip(x0).zip(u).map(|((a, b), c)| (a - b) * c).sum();
                let need = self.norm.dist_sq(x1, x0) / self.eta;
                self.tally.push(self.prev.round, need - gain);
            }
        } else if self.prev.round > 0 {
            self.skipped_pairs += 1;
        }
        self.prev.store(r);
        Flow::Continue
    }
}

impl Check for ImprovementCheck {
    fn report(&self) -> CheckReport {
        self.tally
            .report("one_step_improvement")
            .with_detail("eta", self.eta)
            .with_detail("norm", self.norm.name())
            .with_detail("non_consecutive_pairs", self.skipped_pairs)
    }
}

pub fn check_improvement(trajectory: &[TrajectoryRecord], eta: f64, norm: NormFamily) -> CheckReport {
    let mut c = ImprovementCheck::new(eta, norm);
    feed(&mut c, trajectory);
    c.report()
}

/// Φ(x⁽ᵗ⁺¹⁾) − Φ(x⁽ᵗ⁾) ≥ Σ_i ‖Δx_i‖²/(2η). Hard only when η ≤ 1/L.
#[derive(Debug, Clone)]
pub struct PotentialMonotoneCheck {
    eta: f64,
    smoothness: f64,
    norm: NormFamily,
    prev: Prev,
    tally: Tally,
    min_increase: f64,
}

impl PotentialMonotoneCheck {
    pub fn new(eta: f64, smoothness: f64, norm: NormFamily) -> Self {
        PotentialMonotoneCheck {
            eta,
            smoothness,
            norm,
            prev: Prev::default(),
            tally: Tally::new(MONOTONE_TOL),
            min_increase: f64::INFINITY,
        }
    }
}

impl Observer for PotentialMonotoneCheck {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        if self.prev.precedes(r) {
            if let (Some(p0), Some(p1)) = (self.prev.potential, r.potential) {
                let moved: f64 =
                    r.strategies.iter().zip(&self.prev.strategies).map(|(a, b)| self.norm.dist_sq(a, b)).sum();
                self.tally.push(self.prev.round, moved / (2.0 * self.eta) - (p1 - p0));
                self.min_increase = self.min_increase.min(p1 - p0);
            }
        }
        self.prev.store(r);
        Flow::Continue
    }
}

impl Check for PotentialMonotoneCheck {
    fn report(&self) -> CheckReport {
        let within = self.eta * self.smoothness <= 1.0 + 1e-12;
        let r = self
            .tally
            .report("potential_monotone")
            .with_detail("eta", self.eta)
            .with_detail("smoothness", self.smoothness)
            .with_detail("eta_within_1_over_L", within)
            .with_detail("norm", self.norm.name());
        let r = if self.min_increase.is_finite() { r.with_detail("min_increase", self.min_increase) } else { r };
        if within {
            r
        } else {
            r.soft()
        }
    }
}

pub fn check_potential_monotone(trajectory: &[TrajectoryRecord], eta: f64, smoothness: f64, norm: NormFamily) -> CheckReport {
    let mut c = PotentialMonotoneCheck::new(eta, smoothness, norm);
    feed(&mut c, trajectory);
    c.report()
}

/// Σ_t Σ_i ‖x_i⁽ᵗ⁺¹⁾ − x_i⁽ᵗ⁾‖² ≤ 2ηΦ_range over the consecutive pairs seen.
#[derive(Debug, Clone)]
pub struct PathLengthCheck {
    eta: f64,
    phi_range: f64,
    norm: NormFamily,
    prev: Prev,
    total: CompensatedSum,
    pairs: u64,
    gaps_in_stream: u64,
    last_round: u64,
}

impl PathLengthCheck {
    pub fn new(eta: f64, phi_range: f64, norm: NormFamily) -> Self {
        PathLengthCheck {
            eta,
            phi_range,
            norm,
            prev: Prev::default(),
            total: CompensatedSum::default(),
            pairs: 0,
            gaps_in_stream: 0,
            last_round: 0,
        }
    }
}

impl Observer for PathLengthCheck {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        if self.prev.precedes(r) {
            for (a, b) in r.strategies.iter().zip(&self.prev.strategies) {
                self.total.add(self.norm.dist_sq(a, b));
            }
            self.pairs += 1;
        } else if self.prev.round > 0 {
            self.gaps_in_stream += 1;
        }
        self.last_round = r.round;
        self.prev.store(r);
        Flow::Continue
    }
}

impl Check for PathLengthCheck {
    fn report(&self) -> CheckReport {
        let mut t = Tally::new(PATH_LENGTH_TOL);
        let budget = 2.0 * self.eta * self.phi_range;
        if self.pairs > 0 {
            t.push(self.last_round, self.total.value() - budget);
        }
        t.report("second_order_path_length")
            .with_detail("path_length", self.total.value())
            .with_detail("budget", budget)
            .with_detail("pairs", self.pairs)
            .with_detail("complete", self.gaps_in_stream == 0)
    }
}

pub fn check_path_length(trajectory: &[TrajectoryRecord], eta: f64, phi_range: f64, norm: NormFamily) -> CheckReport {
    let mut c = PathLengthCheck::new(eta, phi_range, norm);
    feed(&mut c, trajectory);
    c.report()
}

/// x⁽ᵗ⁺¹⁾[a] ≤ R/(η⁽ᵗ⁾·Gap⁽ᵗ⁾[a]) whenever Gap⁽ᵗ⁾[a] > 0, for unfiltered FTRL play.
#[derive(Debug, Clone)]
pub struct GapProbabilityCheck {
    ranges: Vec<f64>,
    prev: Prev,
    tally: Tally,
}

impl GapProbabilityCheck {
    /// `ranges[i]` is the regularizer range on player i's simplex.
    pub fn new(ranges: Vec<f64>) -> Self {
        GapProbabilityCheck { ranges, prev: Prev::default(), tally: Tally::new(GAP_PROBABILITY_TOL) }
    }
}

impl Observer for GapProbabilityCheck {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        if self.prev.precedes(r) {
            for i in 0..r.strategies.len() {
                let Some(eta) = self.prev.eta[i] else { continue };
                for (a, &gap) in self.prev.gaps[i].iter().enumerate() {
                    if gap > 0.0 {
                        let bound = self.ranges[i] / (eta * gap);
                        self.tally.push(self.prev.round, r.strategies[i][a] - bound);
                    }
                }
            }
        }
        self.prev.store(r);
        Flow::Continue
    }
}

impl Check for GapProbabilityCheck {
    fn report(&self) -> CheckReport {
        self.tally.report("gap_probability").with_detail("ranges", self.ranges.clone())
    }
}

pub fn check_gap_probability(trajectory: &[TrajectoryRecord], ranges: Vec<f64>) -> CheckReport {
    let mut c = GapProbabilityCheck::new(ranges);
    feed(&mut c, trajectory);
    c.report()
}

/// Largest order violations of `x` against `cumulative`:
/// `.0` covers U[a] > U[a′] ⇒ x[a] ≥ x[a′] and U[a] = U[a′] ⇒ x[a] = x[a′] (fail above the
/// tie tolerance); `.1` covers strictness on the support, U[a] < U[a′] and x[a′] > 0 ⇒
/// x[a] < x[a′] (fail at ≥ 0).
pub fn order_violations(cumulative: &[f64], x: &[f64]) -> (f64, f64) {
    let mut weak = f64::NEG_INFINITY;
    let mut strict = f64::NEG_INFINITY;
    for a in 0..x.len() {
        for b in 0..x.len() {
            if a == b {
                continue;
            }
            let (ua, ub) = (cumulative[a], cumulative[b]);
            if ua == ub {
                weak = weak.max((x[a] - x[b]).abs());
            } else if ua > ub {
                weak = weak.max(x[b] - x[a]);
            } else if ub - ua > ORDER_TIE_TOL * (1.0 + ua.abs().max(ub.abs())) && x[b] > 0.0 {
                strict = strict.max(x[a] - x[b]);
            }
        }
    }
    (weak, strict)
}

/// Cumulative ordering against the next strategy, for every observing player.
#[derive(Debug, Clone)]
pub struct OrderPreservationCheck {
    prev: Prev,
    weak: Tally,
    strict: Tally,
}

impl Default for OrderPreservationCheck {
    fn default() -> Self {
        OrderPreservationCheck {
            prev: Prev::default(),
            weak: Tally::new(ORDER_TIE_TOL),
            // Passes exactly when every violation is negative, subnormal gaps included.
            strict: Tally::new(-f64::from_bits(1)),
        }
    }
}

impl OrderPreservationCheck {
    pub fn push(&mut self, round: u64, cumulative: &[f64], x: &[f64]) {
        let (w, s) = order_violations(cumulative, x);
        if w > f64::NEG_INFINITY {
            self.weak.push(round, w);
        }
        if s > f64::NEG_INFINITY {
            self.strict.push(round, s);
        }
    }
}

impl Observer for OrderPreservationCheck {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        if self.prev.precedes(r) {
            for i in 0..r.strategies.len() {
                if self.prev.observed[i] {
                    let cum = std::mem::take(&mut self.prev.cumulative[i]);
                    self.push(self.prev.round, &cum, &r.strategies[i]);
                    self.prev.cumulative[i] = cum;
                }
            }
        }
        self.prev.store(r);
        Flow::Continue
    }
}

impl Check for OrderPreservationCheck {
    fn report(&self) -> CheckReport {
        let mut r = self.weak.report("order_preservation");
        let s = self.strict.report("strict");
        r.passed &= s.passed;
        r.failures += s.failures;
        r.witness_rounds.extend(s.witness_rounds);
        r.with_detail("tie_tolerance", ORDER_TIE_TOL)
            .with_detail("strict_pairs_checked", s.checked)
            .with_detail("strict_worst", json!(s.worst_violation))
    }
}

pub fn check_order_preservation(trajectory: &[TrajectoryRecord]) -> CheckReport {
    let mut c = OrderPreservationCheck::default();
    feed(&mut c, trajectory);
    c.report()
}

/// Reg⁽ᵀ⁾ ≤ R/η⁽ᵀ⁾ + Σ_t η⁽ᵗ⁾‖u⁽ᵗ⁾‖²_* at every prefix T, with the dual of the regularizer's norm.
#[derive(Debug, Clone)]
pub struct RegretBoundCheck {
    player: usize,
    range: f64,
    norm: NormFamily,
    weighted: CompensatedSum,
    tally: Tally,
    last_regret: f64,
    last_bound: f64,
}

impl RegretBoundCheck {
    pub fn new(player: usize, range: f64, norm: NormFamily) -> Self {
        RegretBoundCheck {
            player,
            range,
            norm,
            weighted: CompensatedSum::default(),
            tally: Tally::new(REGRET_TOL),
            last_regret: 0.0,
            last_bound: 0.0,
        }
    }

    /// One observed round: `eta` is the rate applied after observing `utility`, `regret` the
    /// regret through this round.
    pub fn push(&mut self, round: u64, utility: &[f64], eta: f64, regret: f64) {
        self.weighted.add(eta * self.norm.dual_norm(utility).powi(2));
        let bound = self.range / eta + self.weighted.value();
        self.last_regret = regret;
        self.last_bound = bound;
        self.tally.push(round, regret - bound);
    }
}

impl Observer for RegretBoundCheck {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        if r.observed[self.player] {
            if let Some(eta) = r.eta[self.player] {
                self.push(r.round, &r.utilities[self.player], eta, r.regret[self.player]);
            }
        }
        Flow::Continue
    }
}

impl Check for RegretBoundCheck {
    fn report(&self) -> CheckReport {
        self.tally
            .report("regret_bound")
            .with_detail("player", self.player + 1)
            .with_detail("final_regret", self.last_regret)
            .with_detail("final_bound", self.last_bound)
            .with_detail("dual_norm", self.norm.name())
    }
}

/// Requires an unthinned trajectory (every observed round contributes to the sum).
pub fn check_regret_bound(trajectory: &[TrajectoryRecord], player: usize, range: f64, norm: NormFamily) -> CheckReport {
    let mut c = RegretBoundCheck::new(player, range, norm);
    feed(&mut c, trajectory);
    c.report()
}
