use serde::{Deserialize, Serialize};

use crate::hexfloat;

/// Telemetry for one round t: strategies x⁽ᵗ⁾ and utilities u⁽ᵗ⁾ played at t, and the
/// learner state after the round-t observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub round: u64,
    #[serde(with = "hexfloat::vec2")]
    pub strategies: Vec<Vec<f64>>,
    /// Utility gradients at x⁽ᵗ⁾ for every player, observed or not.
    #[serde(with = "hexfloat::vec2")]
    pub utilities: Vec<Vec<f64>>,
    /// Whether each player added u⁽ᵗ⁾ to its history this round.
    pub observed: Vec<bool>,
    #[serde(with = "hexfloat::vec2")]
    pub cumulative: Vec<Vec<f64>>,
    /// max_a U[a] − U[a] per player and action.
    #[serde(with = "hexfloat::vec2")]
    pub gaps: Vec<Vec<f64>>,
    #[serde(default, with = "opt_hex")]
    pub potential: Option<f64>,
    #[serde(with = "hexfloat::vec")]
    pub nash_gap: Vec<f64>,
    /// Learning rate used for the update ending this round, per observing player.
    #[serde(with = "opt_hex_vec")]
    pub eta: Vec<Option<f64>>,
    /// x_i⁽ᵗ⁺¹⁾ ≠ x_i⁽ᵗ⁾.
    pub updated: Vec<bool>,
    /// A lazy update was accepted or a fictitious-play action changed.
    pub event: bool,
    /// Own observation counts after this round.
    pub own_rounds: Vec<u64>,
    #[serde(with = "hexfloat::vec")]
    pub regret: Vec<f64>,
    #[serde(with = "hexfloat::vec")]
    pub base_regret: Vec<f64>,
    /// Own observation count at the latest update of any player.
    pub own_round_at_last_update: Vec<u64>,
    #[serde(default)]
    pub period: Option<usize>,
}

impl TrajectoryRecord {
    pub(crate) fn empty(action_counts: &[usize]) -> Self {
        let n = action_counts.len();
        let per_action = || action_counts.iter().map(|&m| vec![0.0; m]).collect::<Vec<_>>();
        TrajectoryRecord {
            round: 0,
            strategies: per_action(),
            utilities: per_action(),
            observed: vec![false; n],
            cumulative: per_action(),
            gaps: per_action(),
            potential: None,
            nash_gap: vec![0.0; n],
            eta: vec![None; n],
            updated: vec![false; n],
            event: false,
            own_rounds: vec![0; n],
            regret: vec![0.0; n],
            base_regret: vec![0.0; n],
            own_round_at_last_update: vec![0; n],
            period: None,
        }
    }

    pub fn max_nash_gap(&self) -> f64 {
        self.nash_gap.iter().copied().fold(0.0, f64::max)
    }
}

mod opt_hex {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Hex(#[serde(with = "crate::hexfloat")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Hex).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Hex>::deserialize(d)?.map(|h| h.0))
    }
}

mod opt_hex_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Hex(#[serde(with = "crate::hexfloat")] f64);

    pub fn serialize<S: Serializer>(v: &[Option<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|o| o.map(Hex)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<f64>>, D::Error> {
        Ok(Vec::<Option<Hex>>::deserialize(d)?.into_iter().map(|o| o.map(|h| h.0)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Sequential consumer of per-round telemetry. Records arrive in strictly increasing round order.
pub trait Observer {
    fn observe(&mut self, record: &TrajectoryRecord) -> Flow;
}

impl<F: FnMut(&TrajectoryRecord) -> Flow> Observer for F {
    fn observe(&mut self, record: &TrajectoryRecord) -> Flow {
        self(record)
    }
}

impl Observer for () {
    fn observe(&mut self, _: &TrajectoryRecord) -> Flow {
        Flow::Continue
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, record: &TrajectoryRecord) -> Flow {
        let a = self.0.observe(record);
        let b = self.1.observe(record);
        if a == Flow::Stop || b == Flow::Stop {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

impl Observer for Vec<&mut dyn Observer> {
    fn observe(&mut self, record: &TrajectoryRecord) -> Flow {
        let mut flow = Flow::Continue;
        for o in self.iter_mut() {
            if o.observe(record) == Flow::Stop {
                flow = Flow::Stop;
            }
        }
        flow
    }
}

/// Which rounds a [`Recorder`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thinning {
    /// Rounds 2^k plus every round flagged as an event.
    PowersOfTwo,
    /// Every k-th round plus every event.
    Every(u64),
}

impl Thinning {
    pub fn keeps(&self, record: &TrajectoryRecord) -> bool {
        record.event
            || match *self {
                Thinning::PowersOfTwo => record.round.is_power_of_two(),
                Thinning::Every(k) => record.round % k == 0 || record.round == 1,
            }
    }
}

/// Stores a thinned copy of the stream.
#[derive(Debug, Clone)]
pub struct Recorder {
    pub thinning: Thinning,
    pub records: Vec<TrajectoryRecord>,
}

impl Recorder {
    pub fn new(thinning: Thinning) -> Self {
        Recorder { thinning, records: Vec::new() }
    }

    pub fn dense() -> Self {
        Recorder::new(Thinning::Every(1))
    }

    /// Appends `record` unless it is already the last one stored.
    pub fn push_final(&mut self, record: &TrajectoryRecord) {
        if self.records.last().map(|r| r.round) != Some(record.round) && record.round > 0 {
            self.records.push(record.clone());
        }
    }
}

impl Observer for Recorder {
    fn observe(&mut self, record: &TrajectoryRecord) -> Flow {
        if self.thinning.keeps(record) {
            self.records.push(record.clone());
        }
        Flow::Continue
    }
}
