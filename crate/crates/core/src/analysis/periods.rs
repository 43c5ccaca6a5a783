//! Period segmentation of play on the padded matrix and the checks built on it.
//!
//! Period 3 is round 1. From round 2 on, a round belongs to the largest k ∈ 4..=2m−1 whose
//! clause holds with δ = 1/(4m):
//! even k: x₂[a₂(k)] ≥ 1−δ and x₁[a₁(k−1)] + x₁[a₁(k)] ≥ 1−δ;
//! odd k: x₁[a₁(k)] ≥ 1−δ and x₂[a₂(k−1)] + x₂[a₂(k)] ≥ 1−δ.

use serde::{Deserialize, Serialize};

use super::{feed, Check, CheckReport, Tally};
use crate::constructions::PaddedMatrix;
use crate::dynamics::{Flow, Observer, TrajectoryRecord};

pub const NASH_FLOOR_TOL: f64 = 1e-10;
pub const GAP_GROWTH_TOL: f64 = 1e-9;

/// Rounds `t_start..=t_end` classified as period `k`. A censored segment was still open when
/// the data ended, so its length is a lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub k: usize,
    pub t_start: u64,
    pub t_end: u64,
    pub length: u64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodViolation {
    pub round: u64,
    /// `no_clause`, `skip` or `regress`.
    pub kind: String,
    pub from: Option<usize>,
    pub to: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSegmentation {
    pub m: usize,
    pub delta: f64,
    pub segments: Vec<Segment>,
    pub violations: Vec<PeriodViolation>,
    pub rounds_seen: u64,
}

impl PeriodSegmentation {
    pub fn max_period(&self) -> Option<usize> {
        self.segments.iter().map(|s| s.k).max()
    }

    /// Period of `round`, if it falls inside a segment.
    pub fn period_of(&self, round: u64) -> Option<usize> {
        let i = self.segments.partition_point(|s| s.t_end < round);
        self.segments.get(i).filter(|s| s.t_start <= round).map(|s| s.k)
    }

    /// The unique segment with index `k`.
    pub fn segment(&self, k: usize) -> Option<&Segment> {
        let mut it = self.segments.iter().filter(|s| s.k == k);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    /// Consecutive segment indices differ by exactly one and every round was classified.
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty() && self.segments.windows(2).all(|w| w[1].k == w[0].k + 1)
    }

    /// CSV: k, t_start, t_end, length, censored.
    pub fn write_csv(&self, out: impl std::io::Write) -> crate::error::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| crate::error::Error::Format(e.to_string());
        w.write_record(["k", "t_start", "t_end", "length", "censored"]).map_err(fmt)?;
        for s in &self.segments {
            w.write_record([
                s.k.to_string(),
                s.t_start.to_string(),
                s.t_end.to_string(),
                s.length.to_string(),
                s.censored.to_string(),
            ])
            .map_err(fmt)?;
        }
        w.flush().map_err(|e| crate::error::Error::Format(e.to_string()))
    }
}

/// Streaming period classifier.
#[derive(Debug, Clone)]
pub struct PeriodDetector {
    m: usize,
    delta: f64,
    locators: Vec<(usize, usize)>,
    done: Vec<Segment>,
    open: Option<Segment>,
    violations: Vec<PeriodViolation>,
    rounds_seen: u64,
    current: Option<usize>,
}

impl PeriodDetector {
    pub fn new(padded: &PaddedMatrix) -> Self {
        PeriodDetector {
            m: padded.m,
            delta: 1.0 / (4.0 * padded.m as f64),
            locators: padded.locators.clone(),
            done: Vec::new(),
            open: None,
            violations: Vec::new(),
            rounds_seen: 0,
            current: None,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn loc(&self, k: usize) -> (usize, usize) {
        self.locators[k - 3]
    }

    /// Competing actions for the clause of period `k`.
    pub fn clause_holds(&self, k: usize, x1: &[f64], x2: &[f64]) -> bool {
        let hi = 1.0 - self.delta;
        let (cur, prev) = (self.loc(k), self.loc(k - 1));
        if k % 2 == 0 {
            x2[cur.1] >= hi && x1[prev.0] + x1[cur.0] >= hi
        } else {
            x1[cur.0] >= hi && x2[prev.1] + x2[cur.1] >= hi
        }
    }

    /// Largest clause that holds; round 1 is period 3.
    pub fn classify(&self, round: u64, strategies: &[Vec<f64>]) -> Option<usize> {
        if round == 1 {
            return Some(3);
        }
        (4..=2 * self.m - 1).rev().find(|&k| self.clause_holds(k, &strategies[0], &strategies[1]))
    }

    /// Period of the most recent round, if classified.
    pub fn current(&self) -> Option<usize> {
        self.current
    }

    pub fn max_period(&self) -> Option<usize> {
        self.open.iter().chain(&self.done).map(|s| s.k).max()
    }

    pub fn push(&mut self, round: u64, strategies: &[Vec<f64>]) -> Option<usize> {
        self.rounds_seen += 1;
        let k = self.classify(round, strategies);
        self.current = k;
        let Some(k) = k else {
            self.violations.push(PeriodViolation {
                round,
                kind: "no_clause".into(),
                from: self.open.as_ref().map(|s| s.k),
                to: None,
            });
            return None;
        };
        match &mut self.open {
            Some(s) if s.k == k => {
                s.t_end = round;
                s.length = round - s.t_start + 1;
            }
            open => {
                if let Some(s) = open.take() {
                    if k != s.k + 1 {
                        self.violations.push(PeriodViolation {
                            round,
                            kind: if k > s.k { "skip" } else { "regress" }.into(),
                            from: Some(s.k),
                            to: Some(k),
                        });
                    }
                    self.done.push(s);
                }
                *open = Some(Segment { k, t_start: round, t_end: round, length: 1, censored: true });
            }
        }
        Some(k)
    }

    pub fn segmentation(&self) -> PeriodSegmentation {
        let mut segments: Vec<Segment> = self.done.iter().cloned().map(|s| Segment { censored: false, ..s }).collect();
        segments.extend(self.open.clone());
        PeriodSegmentation {
            m: self.m,
            delta: self.delta,
            segments,
            violations: self.violations.clone(),
            rounds_seen: self.rounds_seen,
        }
    }
}

impl Observer for PeriodDetector {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        self.push(r.round, &r.strategies);
        Flow::Continue
    }
}

pub fn detect_periods(trajectory: &[TrajectoryRecord], padded: &PaddedMatrix) -> PeriodSegmentation {
    let mut d = PeriodDetector::new(padded);
    feed(&mut d, trajectory);
    d.segmentation()
}

/// T_k + T_{k−1} ≥ ½ Σ_{ℓ=4}^{k−2} (ℓ−2) T_ℓ for every observed k ≥ 6. A censored left side
/// that already satisfies the bound passes; one that does not is inconclusive.
pub fn check_period_recursion(seg: &PeriodSegmentation) -> CheckReport {
    let mut tally = Tally::new(0.0);
    let mut verified = Vec::new();
    let mut inconclusive = Vec::new();
    let max_k = seg.max_period().unwrap_or(0);
    for k in 6..=max_k {
        let lens: Option<Vec<&Segment>> = (4..=k).map(|l| seg.segment(l)).collect();
        let Some(lens) = lens else { continue };
        let t = |l: usize| lens[l - 4].length as f64;
        if lens[..k - 5].iter().any(|s| s.censored) {
            continue;
        }
        let lhs = t(k) + t(k - 1);
        let rhs = 0.5 * (4..=k - 2).map(|l| (l as f64 - 2.0) * t(l)).sum::<f64>();
        let censored = lens[k - 4].censored || lens[k - 5].censored;
        if censored && lhs < rhs {
            inconclusive.push(k);
            continue;
        }
        tally.push(lens[k - 4].t_start, rhs - lhs);
        verified.push(k);
    }
    tally.report("period_recursion").with_detail("verified_k", verified).with_detail("inconclusive_k", inconclusive)
}

/// T₄ ≥ γ⁽¹⁾/2 and T_{2m−3} + T_{2m−4} ≥ (γ⁽¹⁾/4)((m−3)/e)^{m−3}, where γ⁽¹⁾ is the round-1 gap
/// of the gadget action. Unobserved periods are skipped.
pub fn check_period_lower_bounds(seg: &PeriodSegmentation, gamma1: f64) -> CheckReport {
    let mut tally = Tally::new(0.0);
    let m = seg.m;
    let mut checked = Vec::new();
    let mut inconclusive = Vec::new();
    let mut judge = |name: &str, lhs: f64, rhs: f64, round: u64, censored: bool, tally: &mut Tally| {
        if censored && lhs < rhs {
            inconclusive.push(name.to_string());
        } else {
            tally.push(round, rhs - lhs);
            checked.push(name.to_string());
        }
    };
    if let Some(s4) = seg.segment(4) {
        judge("t4", s4.length as f64, gamma1 / 2.0, s4.t_start, s4.censored, &mut tally);
    }
    if let (Some(a), Some(b)) = (seg.segment(2 * m - 4), seg.segment(2 * m - 3)) {
        let c = (m as f64 - 3.0) / std::f64::consts::E;
        let rhs = gamma1 / 4.0 * c.powi(m as i32 - 3);
        judge("exponential", (a.length + b.length) as f64, rhs, b.t_start, b.censored, &mut tally);
    }
    tally
        .report("period_lower_bounds")
        .with_detail("gamma1", gamma1)
        .with_detail("checked", checked)
        .with_detail("inconclusive", inconclusive)
}

/// Nash gap ≥ 1/(8m) at every round in periods 3..=2m−2.
#[derive(Debug, Clone)]
pub struct NashFloorCheck {
    m: usize,
    tally: Tally,
}

impl NashFloorCheck {
    pub fn new(m: usize) -> Self {
        NashFloorCheck { m, tally: Tally::new(NASH_FLOOR_TOL) }
    }

    pub fn floor(&self) -> f64 {
        1.0 / (8.0 * self.m as f64)
    }

    pub fn push(&mut self, round: u64, period: Option<usize>, nash_gap: f64) {
        if matches!(period, Some(k) if (3..=2 * self.m - 2).contains(&k)) {
            self.tally.push(round, self.floor() - nash_gap);
        }
    }

    pub fn report(&self) -> CheckReport {
        self.tally.report("nash_gap_floor").with_detail("floor", self.floor())
    }
}

pub fn check_nash_gap_floor(trajectory: &[TrajectoryRecord], seg: &PeriodSegmentation, m: usize) -> CheckReport {
    let mut c = NashFloorCheck::new(m);
    for r in trajectory {
        c.push(r.round, seg.period_of(r.round), r.max_nash_gap());
    }
    c.report()
}

/// Per-round growth of gaps outside the competing actions during periods 4..=2m−2:
/// ΔGap ≥ (1−δ)(k−1) − δ(2m−1), which is itself ≥ k−2.
///
/// The player mixing between a(k−1) and a(k) excludes those two actions. The player
/// concentrated on a(k) excludes a(k), a(k+1) and also a(k−2): the opponent's row or column
/// a(k−1) carries payoff k−2 against a(k−2), so that gap can grow by as little as about 1 per
/// round while the opponent still favors a(k−1). The statement without a(k−2) is kept as a
/// soft diagnostic.
#[derive(Debug, Clone)]
pub struct GapGrowthCheck {
    m: usize,
    delta: f64,
    locators: Vec<(usize, usize)>,
    prev_round: u64,
    prev_gaps: Vec<Vec<f64>>,
    tally: Tally,
    without_k_minus_2: Tally,
    weaker_floor_holds: bool,
    /// (violation, round, period, player, action, increase) at the worst violation.
    worst_case: Option<(f64, u64, usize, usize, usize, f64)>,
}

impl GapGrowthCheck {
    pub fn new(padded: &PaddedMatrix) -> Self {
        let m = padded.m;
        let delta = 1.0 / (4.0 * m as f64);
        let weaker_floor_holds = (4..=2 * m - 2).all(|k| Self::floor_for(m, delta, k) >= k as f64 - 2.0);
        GapGrowthCheck {
            m,
            delta,
            locators: padded.locators.clone(),
            prev_round: 0,
            prev_gaps: Vec::new(),
            tally: Tally::new(GAP_GROWTH_TOL),
            without_k_minus_2: Tally::new(GAP_GROWTH_TOL),
            weaker_floor_holds,
            worst_case: None,
        }
    }

    fn floor_for(m: usize, delta: f64, k: usize) -> f64 {
        (1.0 - delta) * (k as f64 - 1.0) - delta * (2.0 * m as f64 - 1.0)
    }

    fn action(&self, player: usize, k: usize) -> usize {
        let (r, c) = self.locators[k - 3];
        if player == 0 {
            r
        } else {
            c
        }
    }

    /// Excluded actions of `player` (0 or 1) in period `k`, and the extra a(k−2) exclusion.
    fn competing(&self, player: usize, k: usize) -> ([usize; 3], Option<usize>) {
        let a = |j: usize| self.action(player, j);
        if (k % 2 == 0) == (player == 0) {
            ([a(k), a(k - 1), a(k - 1)], None)
        } else {
            ([a(k), a(k + 1), a(k + 1)], (k >= 5).then(|| a(k - 2)))
        }
    }

    pub fn push(&mut self, r: &TrajectoryRecord, period: Option<usize>) {
        let consecutive = self.prev_round > 0 && r.round == self.prev_round + 1;
        if let (true, Some(k)) = (consecutive, period) {
            if (4..=2 * self.m - 2).contains(&k) {
                let floor = Self::floor_for(self.m, self.delta, k);
                for p in 0..2 {
                    let (ex, extra) = self.competing(p, k);
                    let scale = r.cumulative[p].iter().fold(0.0f64, |s, v| s.max(v.abs()));
                    let allowance = 16.0 * f64::EPSILON * scale;
                    for (a, (&g1, &g0)) in r.gaps[p].iter().zip(&self.prev_gaps[p]).enumerate() {
                        if ex.contains(&a) {
                            continue;
                        }
                        let v = floor - (g1 - g0) - allowance;
                        self.without_k_minus_2.push(r.round, v);
                        if extra == Some(a) {
                            continue;
                        }
                        if self.worst_case.map_or(true, |w| v > w.0) {
                            self.worst_case = Some((v, r.round, k, p + 1, a + 1, g1 - g0));
                        }
                        self.tally.push(r.round, v);
                    }
                }
            }
        }
        self.prev_round = r.round;
        if self.prev_gaps.len() == r.gaps.len() {
            for (d, s) in self.prev_gaps.iter_mut().zip(&r.gaps) {
                d.copy_from_slice(s);
            }
        } else {
            self.prev_gaps = r.gaps.clone();
        }
    }

    pub fn report(&self) -> CheckReport {
        let mut r = self
            .tally
            .report("gap_growth")
            .with_detail("delta", self.delta)
            .with_detail("floor_at_least_k_minus_2", self.weaker_floor_holds);
        if let Some((_, round, k, player, action, inc)) = self.worst_case {
            r = r.with_detail(
                "worst_case",
                serde_json::json!({"round": round, "period": k, "player": player, "action": action, "increase": inc}),
            );
        }
        r
    }

    /// The same floor without excluding a(k−2) for the concentrated player; informative.
    pub fn report_without_k_minus_2(&self) -> CheckReport {
        self.without_k_minus_2.report("gap_growth_without_k_minus_2").soft()
    }
}

pub fn check_gap_growth(trajectory: &[TrajectoryRecord], seg: &PeriodSegmentation, padded: &PaddedMatrix) -> CheckReport {
    let mut c = GapGrowthCheck::new(padded);
    for r in trajectory {
        c.push(r, seg.period_of(r.round));
    }
    c.report()
}

/// Period detection, nash-gap floor, gap growth and ε-equilibrium tracking in one pass,
/// with an optional stop once a target period has lasted long enough.
#[derive(Debug, Clone)]
pub struct PaddedMonitor {
    pub detector: PeriodDetector,
    pub floor: NashFloorCheck,
    pub growth: GapGrowthCheck,
    epsilon: f64,
    first_epsilon_ne: Option<u64>,
    stop_after: Option<(usize, u64)>,
    gamma1: f64,
}

impl PaddedMonitor {
    /// `epsilon` is the equilibrium threshold tracked; `gamma1` is γ/m.
    pub fn new(padded: &PaddedMatrix, epsilon: f64) -> Self {
        PaddedMonitor {
            detector: PeriodDetector::new(padded),
            floor: NashFloorCheck::new(padded.m),
            growth: GapGrowthCheck::new(padded),
            epsilon,
            first_epsilon_ne: None,
            stop_after: None,
            gamma1: padded.gamma / padded.m as f64,
        }
    }

    /// Stop once period `k` has been reached and `extra` further rounds have run.
    pub fn stop_after(mut self, k: usize, extra: u64) -> Self {
        self.stop_after = Some((k, extra));
        self
    }

    pub fn rounds_to_epsilon_ne(&self) -> Option<u64> {
        self.first_epsilon_ne
    }

    pub fn segmentation(&self) -> PeriodSegmentation {
        self.detector.segmentation()
    }

    pub fn reports(&self) -> Vec<CheckReport> {
        let seg = self.segmentation();
        let mut consistency = Tally::new(0.0);
        for v in &seg.violations {
            consistency.push(v.round, 1.0);
        }
        let consistency = consistency
            .report("period_consistency")
            .with_detail("segments", seg.segments.len())
            .with_detail("max_period", seg.max_period())
            .with_detail("rounds", seg.rounds_seen);
        let rounds = CheckReport { checked: seg.rounds_seen, ..consistency };
        vec![
            rounds,
            check_period_recursion(&seg),
            check_period_lower_bounds(&seg, self.gamma1),
            self.floor.report(),
            self.growth.report(),
            self.growth.report_without_k_minus_2(),
        ]
    }
}

impl Observer for PaddedMonitor {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        let k = self.detector.push(r.round, &r.strategies);
        let gap = r.max_nash_gap();
        self.floor.push(r.round, k, gap);
        self.growth.push(r, k);
        if self.first_epsilon_ne.is_none() && gap <= self.epsilon {
            self.first_epsilon_ne = Some(r.round);
        }
        if let Some((target, extra)) = self.stop_after {
            if let Some(s) = self.detector.open.as_ref().filter(|s| s.k >= target) {
                if r.round >= s.t_start + extra {
                    return Flow::Stop;
                }
            }
        }
        Flow::Continue
    }
}

impl Check for PeriodDetector {
    fn report(&self) -> CheckReport {
        let seg = self.segmentation();
        let mut t = Tally::new(0.0);
        for v in &seg.violations {
            t.push(v.round, 1.0);
        }
        let r = t.report("period_consistency");
        CheckReport { checked: seg.rounds_seen, ..r }.with_detail("max_period", seg.max_period())
    }
}
