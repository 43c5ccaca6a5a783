//! Lazy dynamics: update count, epoch growth and a termination certificate.
//!
//! Certificate: once a full sweep passes without updates, every player i has faced a fixed
//! utility vector u since its own round s⁰ᵢ, and each base proposal p was rejected, so
//! ⟨p − xᵢ, u⟩ < ε. Splitting the base regret at s⁰ᵢ and bounding the prefix by s⁰ᵢ·B·D
//! (B = max |payoff|, D = 2 the ℓ1 diameter) gives
//! Gapᵢ ≤ ε + (Reg_baseᵢ + s⁰ᵢBD)/(sᵢ − s⁰ᵢ), so Reg_baseᵢ ≤ ε(sᵢ − s⁰ᵢ) − s⁰ᵢBD for all i
//! certifies a 2ε-Nash equilibrium.

use serde::{Deserialize, Serialize};

use super::{feed, CheckReport, Tally};
use crate::dynamics::{Flow, Observer, TrajectoryRecord};

pub const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LazyOutcome {
    pub updates: u64,
    pub update_bound: f64,
    pub update_rounds: Vec<u64>,
    pub max_ratio: Option<f64>,
    pub empirical_p: Option<f64>,
    pub certified_round: Option<u64>,
    pub nash_gap_at_certificate: Option<f64>,
    /// Whether every player's realized regret was at most εsᵢ/2 at the certificate.
    pub regret_below_half_eps_t: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct LazyMonitor {
    epsilon: f64,
    phi_range: f64,
    payoff_bound: f64,
    update_rounds: Vec<u64>,
    updates: u64,
    last_update_round: u64,
    certified: Option<(u64, f64, bool)>,
    stop_on_certificate: bool,
}

impl LazyMonitor {
    /// `payoff_bound` is max |payoff| of the game.
    pub fn new(epsilon: f64, phi_range: f64, payoff_bound: f64) -> Self {
        LazyMonitor {
            epsilon,
            phi_range,
            payoff_bound,
            update_rounds: Vec::new(),
            updates: 0,
            last_update_round: 0,
            certified: None,
            stop_on_certificate: false,
        }
    }

    pub fn stop_on_certificate(mut self) -> Self {
        self.stop_on_certificate = true;
        self
    }

    fn certificate_holds(&self, r: &TrajectoryRecord) -> bool {
        let n = r.strategies.len() as u64;
        if r.round < self.last_update_round + n || r.round < n {
            return false;
        }
        (0..r.strategies.len()).all(|i| {
            let s = r.own_rounds[i] as f64;
            let s0 = r.own_round_at_last_update[i] as f64;
            s > s0 && r.base_regret[i] <= self.epsilon * (s - s0) - s0 * self.payoff_bound * 2.0
        })
    }

    pub fn outcome(&self) -> LazyOutcome {
        let ratios = epoch_ratios(&self.update_rounds);
        let max_ratio = ratios.iter().copied().fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        LazyOutcome {
            updates: self.updates,
            update_bound: self.phi_range / self.epsilon,
            update_rounds: self.update_rounds.clone(),
            max_ratio,
            empirical_p: max_ratio.map(|r| self.epsilon * (r - 1.0)),
            certified_round: self.certified.map(|c| c.0),
            nash_gap_at_certificate: self.certified.map(|c| c.1),
            regret_below_half_eps_t: self.certified.map(|c| c.2),
        }
    }

    pub fn reports(&self) -> Vec<CheckReport> {
        let o = self.outcome();
        let mut count = Tally::new(0.0);
        count.push(o.update_rounds.last().copied().unwrap_or(0), o.updates as f64 - o.update_bound);
        let count = count.report("lazy_update_count").with_detail("updates", o.updates).with_detail("bound", o.update_bound);
        let mut cert = Tally::new(CERTIFICATE_TOL);
        if let (Some(t), Some(g)) = (o.certified_round, o.nash_gap_at_certificate) {
            cert.push(t, g - 2.0 * self.epsilon);
        }
        let mut cert = cert
            .report("lazy_termination")
            .with_detail("certified_round", o.certified_round)
            .with_detail("nash_gap", o.nash_gap_at_certificate)
            .with_detail("regret_below_half_eps_t", o.regret_below_half_eps_t);
        if o.certified_round.is_none() {
            cert = cert.soft().with_detail("reached", false);
        }
        vec![count, epoch_report(&self.update_rounds, self.epsilon), cert]
    }
}

impl Observer for LazyMonitor {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        let k = r.updated.iter().filter(|&&u| u).count() as u64;
        if k > 0 {
            self.updates += k;
            self.update_rounds.push(r.round);
            self.last_update_round = r.round;
        }
        if self.certified.is_none() && self.certificate_holds(r) {
            let gap = r.max_nash_gap();
            let half = (0..r.strategies.len()).all(|i| r.regret[i] <= self.epsilon * r.own_rounds[i] as f64 / 2.0);
            self.certified = Some((r.round, gap, half));
            if self.stop_on_certificate {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }
}

fn epoch_ratios(rounds: &[u64]) -> Vec<f64> {
    rounds.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect()
}

fn epoch_report(rounds: &[u64], epsilon: f64) -> CheckReport {
    let mut t = Tally::new(0.0);
    let ratios = epoch_ratios(rounds);
    for (w, r) in rounds.windows(2).zip(&ratios) {
        // Bounded and increasing update times.
        t.push(w[1], if r.is_finite() && *r > 1.0 { -1.0 } else { 1.0 });
    }
    let max = ratios.iter().copied().fold(f64::NAN, f64::max);
    let mut rep = t.report("epoch_growth").with_detail("ratios", ratios.clone());
    if max.is_finite() {
        rep = rep.with_detail("max_ratio", max).with_detail("empirical_p", epsilon * (max - 1.0));
    }
    rep
}

/// Total number of accepted updates against Φ_range/ε.
pub fn check_lazy_update_count(trajectory: &[TrajectoryRecord], phi_range: f64, epsilon: f64) -> CheckReport {
    let mut m = LazyMonitor::new(epsilon, phi_range, 0.0);
    feed(&mut m, trajectory);
    m.reports().swap_remove(0)
}

/// Ratios between consecutive update rounds and the implied P = ε(max ratio − 1).
pub fn check_epoch_growth(trajectory: &[TrajectoryRecord], epsilon: f64) -> CheckReport {
    let rounds: Vec<u64> = trajectory.iter().filter(|r| r.updated.iter().any(|&u| u)).map(|r| r.round).collect();
    epoch_report(&rounds, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsConfig, Engine, LearningRate, RunOptions, UpdateMode};
    use crate::games::Game;
    use crate::matrix::Matrix;

    fn lazy_cfg(eps: f64, horizon: u64) -> DynamicsConfig {
        DynamicsConfig {
            learning_rate: LearningRate::Schedule { alpha: 0.5 },
            update_mode: UpdateMode::Alternating,
            lazy_epsilon: Some(eps),
            horizon,
            ..DynamicsConfig::default()
        }
    }

    #[test]
    fn doubling_update_times_have_ratio_two() {
        let recs: Vec<TrajectoryRecord> = [1u64, 2, 4, 8]
            .iter()
            .map(|&t| {
                let mut r = TrajectoryRecord::empty(&[2, 2]);
                r.round = t;
                r.updated = vec![true, false];
                r
            })
            .collect();
        let rep = check_epoch_growth(&recs, 0.1);
        assert!(rep.passed);
        assert_eq!(rep.details["ratios"], serde_json::json!([2.0, 2.0, 2.0]));
        assert!((rep.details["empirical_p"].as_f64().unwrap() - 0.1).abs() < 1e-15);
        assert!(check_lazy_update_count(&recs, 0.5, 0.1).passed);
        assert!(!check_lazy_update_count(&recs, 0.2, 0.1).passed);
    }

    #[test]
    fn lazy_mwu_on_b20_terminates_at_two_eps_equilibrium() {
        let g = Game::identical_matrix(Matrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 3.0]]).unwrap()).unwrap();
        let mut mon = LazyMonitor::new(0.1, 3.0, 3.0).stop_on_certificate();
        Engine::new(&g, lazy_cfg(0.1, 200_000)).unwrap().run(&mut mon, &RunOptions::default()).unwrap();
        let o = mon.outcome();
        assert!(o.updates as f64 <= 30.0);
        assert!(o.certified_round.is_some(), "{o:?}");
        for r in mon.reports() {
            assert!(r.passed, "{}", r.summary_line());
        }
    }

    #[test]
    fn certificate_is_sound_on_random_games() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let g = Game::identical_matrix(a).unwrap();
            let (lo, hi) = g.potential_extremes().unwrap();
            let mut mon = LazyMonitor::new(0.1, hi - lo, g.max_abs_payoff()).stop_on_certificate();
            Engine::new(&g, lazy_cfg(0.1, 100_000)).unwrap().run(&mut mon, &RunOptions::default()).unwrap();
            let o = mon.outcome();
            assert!(o.updates as f64 <= (hi - lo) / 0.1 + 1e-9);
            if let Some(gap) = o.nash_gap_at_certificate {
                assert!(gap <= 0.2 + 1e-9);
            }
        }
    }
}
