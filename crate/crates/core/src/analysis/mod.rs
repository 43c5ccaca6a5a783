//! Verification over trajectory streams: gap series, period segmentation and one checker
//! per quantitative claim. Every checker is an [`Observer`] so it can run during a long
//! simulation; the free functions feed a stored trajectory through the same code.

mod lazy;
mod lemmas;
mod periods;
mod snake;

pub use lazy::{check_epoch_growth, check_lazy_update_count, LazyMonitor, LazyOutcome};
pub use lemmas::{
    check_gap_probability, check_improvement, check_order_preservation, check_path_length,
    check_potential_monotone, check_regret_bound, order_violations, GapProbabilityCheck, ImprovementCheck, OrderPreservationCheck,
    PathLengthCheck, PotentialMonotoneCheck, RegretBoundCheck,
};
pub use periods::{
    check_gap_growth, check_nash_gap_floor, check_period_lower_bounds, check_period_recursion, detect_periods,
    GapGrowthCheck, NashFloorCheck, PaddedMonitor, PeriodDetector, PeriodSegmentation, PeriodViolation, Segment,
};
pub use snake::{check_snake_recursion, SnakeMonitor};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::{Flow, Observer, TrajectoryRecord};
use crate::error::{Error, Result};

/// Outcome of one check. `worst_violation` is the largest amount by which the checked
/// inequality failed (negative values are slack); it is `None` when nothing was checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Hard checks decide the exit status; soft ones are informative.
    pub hard: bool,
    pub tolerance: f64,
    pub worst_violation: Option<f64>,
    pub checked: u64,
    pub failures: u64,
    pub witness_rounds: Vec<u64>,
    #[serde(default)]
    pub details: Map<String, Value>,
}

impl CheckReport {
    pub fn with_detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.into(), value.into());
        self
    }

    pub fn soft(mut self) -> Self {
        self.hard = false;
        self
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else if self.hard { "FAIL" } else { "WARN" };
        let worst = self.worst_violation.map_or("-".to_string(), |w| format!("{w:.3e}"));
        format!("{status} {} (checked {}, worst {worst}, tol {:.0e})", self.name, self.checked, self.tolerance)
    }
}

/// Streaming checker.
pub trait Check: Observer {
    fn report(&self) -> CheckReport;
}

/// Accumulates violations `rhs − lhs` of an inequality `lhs ≥ rhs`.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    tolerance: f64,
    worst: Option<f64>,
    worst_round: u64,
    first_failure: Option<u64>,
    failures: u64,
    checked: u64,
}

impl Tally {
    pub(crate) fn new(tolerance: f64) -> Self {
        Tally { tolerance, worst: None, worst_round: 0, first_failure: None, failures: 0, checked: 0 }
    }

    pub(crate) fn push(&mut self, round: u64, violation: f64) {
        self.checked += 1;
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.worst.map_or(true, |w| violation > w) {
            self.worst = Some(violation);
            self.worst_round = round;
        }
        if violation > self.tolerance {
            self.failures += 1;
            self.first_failure.get_or_insert(round);
        }
    }

    pub(crate) fn passed(&self) -> bool {
        self.failures == 0
    }

    pub(crate) fn report(&self, name: &str) -> CheckReport {
        let mut witness = Vec::new();
        if let Some(f) = self.first_failure {
            witness.push(f);
            if self.worst_round != f {
                witness.push(self.worst_round);
            }
        }
        CheckReport {
            name: name.into(),
            passed: self.passed(),
            hard: true,
            tolerance: self.tolerance,
            worst_violation: self.worst,
            checked: self.checked,
            failures: self.failures,
            witness_rounds: witness,
            details: Map::new(),
        }
    }
}

/// Feeds a stored trajectory through a streaming checker.
pub fn feed<C: Observer>(check: &mut C, trajectory: &[TrajectoryRecord]) {
    for r in trajectory {
        if check.observe(r) == Flow::Stop {
            break;
        }
    }
}

/// Nonzero (1) iff a hard check failed.
pub fn exit_status(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(|r| r.hard && !r.passed) {
        1
    } else {
        0
    }
}

/// Per-action cumulative utility gaps of one player at every recorded round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    pub player: usize,
    pub rounds: Vec<u64>,
    pub gaps: Vec<Vec<f64>>,
}

pub fn gap_series(trajectory: &[TrajectoryRecord], player: usize) -> Result<GapSeries> {
    let mut s = GapSeries { player, rounds: Vec::new(), gaps: Vec::new() };
    for r in trajectory {
        let cum = r
            .cumulative
            .get(player)
            .ok_or_else(|| Error::InvalidArgument(format!("round {} has no telemetry for player {player}", r.round)))?;
        let top = cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        s.rounds.push(r.round);
        s.gaps.push(cum.iter().map(|c| top - c).collect());
    }
    Ok(s)
}

impl GapSeries {
    /// Long-format CSV: round, player, action (1-based), gap.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["round", "player", "action", "gap"]).map_err(fmt)?;
        for (t, g) in self.rounds.iter().zip(&self.gaps) {
            for (a, v) in g.iter().enumerate() {
                w.write_record([t.to_string(), (self.player + 1).to_string(), (a + 1).to_string(), v.to_string()])
                    .map_err(fmt)?;
            }
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn write_reports(path: &Path, reports: &[CheckReport]) -> Result<()> {
    let text = serde_json::to_string_pretty(reports).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
