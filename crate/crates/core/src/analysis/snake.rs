//! Fictitious play along a snake: on-path invariance and dwell-time growth.

use super::{feed, Check, CheckReport, Tally};
use crate::constructions::SnakePath;
use crate::dynamics::{pure_action, Flow, Observer, TrajectoryRecord};

/// Tracks the path position of pure play. Dwell time T_k is the number of rounds spent at
/// the profile paying k; it is known once the switch away from that profile is seen, either
/// on consecutive records or on a record flagged as an event (its last round).
#[derive(Debug, Clone)]
pub struct SnakeMonitor {
    path: SnakePath,
    position: Option<usize>,
    prev_round: u64,
    prev_event: bool,
    /// `ends[k]` is the last round at position k; `ends[0] = 0` when play starts at round 1.
    ends: Vec<Option<u64>>,
    path_violations: Tally,
    records: u64,
    stop_at_end: bool,
}

impl SnakeMonitor {
    pub fn new(path: &SnakePath) -> Self {
        SnakeMonitor {
            path: path.clone(),
            position: None,
            prev_round: 0,
            prev_event: false,
            ends: vec![None; path.vertices.len() + 1],
            path_violations: Tally::new(0.0),
            records: 0,
            stop_at_end: false,
        }
    }

    /// Stop the run once play reaches the last vertex.
    pub fn stop_at_end(mut self) -> Self {
        self.stop_at_end = true;
        self
    }

    pub fn position(&self) -> Option<usize> {
        self.position
    }

    /// Rounds spent so far at the current, not yet left, position: a lower bound on its
    /// dwell time.
    pub fn open_dwell(&self) -> Option<(usize, u64)> {
        let p = self.position?;
        match (self.ends[p - 1], self.ends[p]) {
            (Some(start), None) => Some((p, self.prev_round - start)),
            _ => None,
        }
    }

    /// `T_k` for k = 1.. up to the last completed dwell; `None` where unresolved.
    pub fn dwell_times(&self) -> Vec<Option<u64>> {
        let last = self.ends.iter().rposition(Option::is_some).unwrap_or(0);
        (1..=last).map(|k| Some(self.ends[k]? - self.ends[k - 1]?)).collect()
    }

    fn vertex_of(&self, strategies: &[Vec<f64>]) -> Option<u32> {
        let mut v = 0u32;
        for (i, x) in strategies.iter().enumerate() {
            match pure_action(x)? {
                0 => {}
                1 => v |= 1 << i,
                _ => return None,
            }
        }
        Some(v)
    }

    pub fn report(&self) -> CheckReport {
        let dwell = self.dwell_times();
        let t = |k: usize| -> Option<f64> {
            if k == 0 {
                return Some(0.0);
            }
            dwell.get(k - 1).copied().flatten().map(|v| v as f64)
        };
        let mut recursion = Tally::new(0.0);
        let mut factorial = Tally::new(0.0);
        let mut fact = 1.0f64;
        for k in 1..=dwell.len() {
            if k >= 2 {
                fact *= (k - 1) as f64;
            }
            let Some(tk) = t(k) else { continue };
            factorial.push(k as u64, fact - tk);
            if k >= 2 {
                let terms: Option<Vec<f64>> = (1..k).map(t).collect();
                if let Some(terms) = terms {
                    let tt = |j: usize| if j == 0 { 0.0 } else { terms[j - 1] };
                    let neg: f64 = (1..k.saturating_sub(3)).map(|kk| kk as f64 * tt(kk)).sum();
                    let rhs = (k - 1) as f64 * tt(k - 1) + tt(k.saturating_sub(2)) + tt(k.saturating_sub(3)) - neg;
                    recursion.push(k as u64, rhs - tk);
                }
            }
        }
        // A censored dwell can only confirm the bounds: count it once its lower bound
        // already meets them.
        let open = self.open_dwell().filter(|&(k, _)| k == dwell.len() + 1);
        let mut open_confirmed = false;
        if let Some((k, lower)) = open {
            let fact_k = fact * (k - 1).max(1) as f64;
            let terms: Option<Vec<f64>> = (1..k).map(t).collect();
            if let Some(terms) = terms {
                let tt = |j: usize| if j == 0 { 0.0 } else { terms[j - 1] };
                let neg: f64 = (1..k.saturating_sub(3)).map(|kk| kk as f64 * tt(kk)).sum();
                let rhs = (k - 1) as f64 * tt(k - 1) + tt(k.saturating_sub(2)) + tt(k.saturating_sub(3)) - neg;
                let lower = lower as f64;
                if lower >= fact_k && (k < 2 || lower >= rhs) {
                    factorial.push(k as u64, fact_k - lower);
                    if k >= 2 {
                        recursion.push(k as u64, rhs - lower);
                    }
                    open_confirmed = true;
                }
            }
        }
        let path = self.path_violations.report("on_path");
        let rec = recursion.report("recursion");
        let fac = factorial.report("factorial");
        let parts = [&path, &rec, &fac];
        let mut rep = path.clone();
        rep.name = "snake_dwell_times".into();
        rep.passed = parts.iter().all(|r| r.passed);
        rep.checked = self.records + rec.checked + fac.checked;
        rep.failures = parts.iter().map(|r| r.failures).sum();
        rep.worst_violation = parts.iter().filter_map(|r| r.worst_violation).reduce(f64::max);
        rep.witness_rounds.extend(rec.witness_rounds.iter().chain(&fac.witness_rounds));
        rep.with_detail("on_path", self.path_violations.passed())
            .with_detail("dwell_times", dwell.clone())
            .with_detail("completed", dwell.iter().filter(|d| d.is_some()).count())
            .with_detail("open_dwell", open.map(|(k, lower)| serde_json::json!({"k": k, "lower_bound": lower, "confirmed": open_confirmed})))
            .with_detail("recursion_checked", rec.checked)
            .with_detail("recursion_passed", rec.passed)
            .with_detail("factorial_checked", fac.checked)
            .with_detail("factorial_passed", fac.passed)
            .with_detail("last_position", self.position)
    }
}

impl Observer for SnakeMonitor {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        self.records += 1;
        let pos = self.vertex_of(&r.strategies).and_then(|v| self.path.position(v));
        match (self.position, pos) {
            (_, None) => self.path_violations.push(r.round, 1.0),
            (None, Some(p)) => {
                if p == 1 && r.round == 1 {
                    self.ends[0] = Some(0);
                }
            }
            (Some(q), Some(p)) if p == q => {}
            (Some(q), Some(p)) if p == q + 1 => {
                if self.prev_event || r.round == self.prev_round + 1 {
                    self.ends[q] = Some(self.prev_round);
                }
            }
            (Some(_), Some(_)) => self.path_violations.push(r.round, 1.0),
        }
        if pos.is_some() {
            self.position = pos;
        }
        self.prev_round = r.round;
        self.prev_event = r.event;
        if self.stop_at_end && pos == Some(self.path.vertices.len()) {
            return Flow::Stop;
        }
        Flow::Continue
    }
}

impl Check for SnakeMonitor {
    fn report(&self) -> CheckReport {
        SnakeMonitor::report(self)
    }
}

/// Dwell-time recursion T_k ≥ (k−1)T_{k−1} + T_{k−2} + T_{k−3} − Σ_{κ=1}^{k−4} κT_κ and
/// T_k ≥ (k−1)! for every completed dwell, plus the on-path invariant.
pub fn check_snake_recursion(trajectory: &[TrajectoryRecord], path: &SnakePath) -> CheckReport {
    let mut m = SnakeMonitor::new(path);
    feed(&mut m, trajectory);
    m.report()
}
