//! Discrete-event simulation: Poisson request arrivals, exponential holding
//! times and residual bandwidth that shrinks and recovers as requests come
//! and go.

mod replay;
mod sweep;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{embed, Algorithm, EmbedOptions, FailReason};
use crate::topology::{ResidualState, SubstrateNetwork, TopologyError};
use crate::vnr::{generate_vnr, Vnr, VnrError, VnrParams};

pub use replay::{replay_arrivals, ReplayRecord};
pub use sweep::{sweep, write_csv, SweepRow, CSV_HEADER};

/// Requests with at most this many pairs count as small in the metrics.
pub const SMALL_PAIRS: usize = 5;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Vnr(#[from] VnrError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Mean arrivals per time unit.
    pub arrival_rate: f64,
    pub mean_duration: f64,
    /// Arrivals stop at this time; departures after it still run.
    pub horizon: f64,
    pub algorithm: Algorithm,
    pub embed: EmbedOptions,
    pub seed: u64,
    pub vnr: VnrParams,
    /// `None` integrates utilization exactly between events; `Some(dt)`
    /// samples it every `dt` time units instead.
    pub utility_interval: Option<f64>,
    /// When false, embedding time is not measured, which keeps repeated
    /// runs byte-identical.
    pub record_timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            arrival_rate: 5.0,
            mean_duration: 10.0,
            horizon: 500.0,
            algorithm: Algorithm::MparMporHybrid,
            embed: EmbedOptions::default(),
            seed: 0,
            vnr: VnrParams::default(),
            utility_interval: None,
            record_timing: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SimError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("arrival rate", self.arrival_rate)?;
        positive("mean duration", self.mean_duration)?;
        positive("horizon", self.horizon)?;
        if let Some(dt) = self.utility_interval {
            positive("utility interval", dt)?;
        }
        if self.embed.k == 0 {
            return Err(SimError::Config("path count k must be at least 1".into()));
        }
        self.vnr.validate().map_err(SimError::Config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `None` when nothing arrived.
    pub acceptance_rate: Option<f64>,
    /// Time-weighted mean over `[0, horizon]` of the mean link utilization.
    pub avg_link_utility: f64,
    pub avg_cost_all: Option<f64>,
    /// Mean cost over accepted requests with at most [`SMALL_PAIRS`] pairs.
    pub avg_cost_small: Option<f64>,
    /// Wall-clock seconds spent in the embedder, if measured.
    pub total_embed_time: Option<f64>,
    pub arrivals: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub small_accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Arrival { time: f64, vnr: usize, pairs: usize },
    Accept { time: f64, vnr: usize, cost: f64 },
    Reject { time: f64, vnr: usize, reason: FailReason },
    Depart { time: f64, vnr: usize },
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub metrics: Metrics,
    pub events: Vec<Event>,
    /// Residual bandwidth after the last departure.
    pub final_residual: ResidualState,
    pub initial_residual: ResidualState,
}

/// One request of the workload, fixed before any embedding happens.
#[derive(Debug, Clone)]
pub struct Arrival {
    pub time: f64,
    pub duration: f64,
    pub vnr: Vnr,
}

/// Draws the request stream for `config`. Arrival times, durations and
/// request contents come from separate streams of the seed, so the stream is
/// the same whatever algorithm runs on it.
pub fn workload(sn: &SubstrateNetwork, config: &SimConfig) -> Result<Vec<Arrival>, SimError> {
    config.validate()?;
    let stream = |n: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(n);
        rng
    };
    let (mut gaps, mut lengths, mut contents) = (stream(0), stream(1), stream(2));
    let gap = Exp::new(config.arrival_rate).map_err(|e| SimError::Config(e.to_string()))?;
    let length =
        Exp::new(1.0 / config.mean_duration).map_err(|e| SimError::Config(e.to_string()))?;
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut gaps);
        if t >= config.horizon {
            break;
        }
        let duration = sample_positive(&length, &mut lengths);
        let vnr = generate_vnr(sn, &config.vnr, &mut contents)?;
        out.push(Arrival {
            time: t,
            duration,
            vnr,
        });
    }
    Ok(out)
}

fn sample_positive<R: Rng>(d: &Exp<f64>, rng: &mut R) -> f64 {
    loop {
        let v = d.sample(rng);
        if v > 0.0 {
            return v;
        }
    }
}

/// Time-ordered departure key; departures at equal times leave in arrival
/// order.
#[derive(Debug, PartialEq, PartialOrd)]
struct DepartAt(f64, usize);

impl Eq for DepartAt {}

impl Ord for DepartAt {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Accumulates the time integral of mean utilization over `[0, horizon]`.
struct Utility {
    horizon: f64,
    interval: Option<f64>,
    last: f64,
    integral: f64,
    next_sample: f64,
    samples: usize,
    sum: f64,
}

impl Utility {
    fn new(horizon: f64, interval: Option<f64>) -> Self {
        Utility {
            horizon,
            interval,
            last: 0.0,
            integral: 0.0,
            next_sample: 0.0,
            samples: 0,
            sum: 0.0,
        }
    }

    /// Accounts for the state `current` holding from the last event up to `t`.
    fn advance(&mut self, t: f64, current: f64) {
        let t = t.min(self.horizon);
        match self.interval {
            None => {
                if t > self.last {
                    self.integral += (t - self.last) * current;
                }
            }
            Some(dt) => {
                while self.next_sample < t {
                    self.sum += current;
                    self.samples += 1;
                    self.next_sample = dt * self.samples as f64;
                }
            }
        }
        self.last = self.last.max(t);
    }

    fn mean(&self) -> f64 {
        match self.interval {
            None => self.integral / self.horizon,
            Some(_) if self.samples == 0 => 0.0,
            Some(_) => self.sum / self.samples as f64,
        }
    }
}

/// Runs one simulation.
pub fn run_simulation(sn: &SubstrateNetwork, config: &SimConfig) -> Result<SimResult, SimError> {
    let arrivals = workload(sn, config)?;
    simulate(sn, config, &arrivals, |_, _| {})
}

/// Event loop over a fixed workload. `on_arrival` sees every arrival with
/// the residual it meets, before the configured algorithm runs.
pub(crate) fn simulate(
    sn: &SubstrateNetwork,
    config: &SimConfig,
    arrivals: &[Arrival],
    mut on_arrival: impl FnMut(&Arrival, &ResidualState),
) -> Result<SimResult, SimError> {
    let initial = ResidualState::new(sn);
    let mut residual = initial.clone();
    let mut departures: BinaryHeap<Reverse<DepartAt>> = BinaryHeap::new();
    let mut held: Vec<Option<Vec<f64>>> = vec![None; arrivals.len()];
    let mut events = Vec::new();
    let mut utility = Utility::new(config.horizon, config.utility_interval);
    let (mut accepted, mut small_accepted) = (0usize, 0usize);
    let (mut cost_all, mut cost_small) = (0.0, 0.0);
    let mut embed_time = 0.0;
    let mut next = 0usize;

    loop {
        let arrival_time = arrivals.get(next).map(|a| a.time);
        let depart_time = departures.peek().map(|d| d.0 .0);
        let departs_first = match (depart_time, arrival_time) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(d), Some(a)) => d <= a,
        };
        if departs_first {
            let Reverse(DepartAt(t, id)) = departures.pop().expect("peeked");
            utility.advance(t, residual.mean_utilization());
            let allocation = held[id].take().expect("held until departure");
            residual.release(&allocation)?;
            events.push(Event::Depart { time: t, vnr: id });
            continue;
        }
        let id = next;
        next += 1;
        let arrival = &arrivals[id];
        let t = arrival.time;
        utility.advance(t, residual.mean_utilization());
        events.push(Event::Arrival {
            time: t,
            vnr: id,
            pairs: arrival.vnr.n_pairs(),
        });
        on_arrival(arrival, &residual);
        let clock = config.record_timing.then(Instant::now);
        let result = embed(config.algorithm, sn, &residual, &arrival.vnr, &config.embed);
        if let Some(c) = clock {
            embed_time += c.elapsed().as_secs_f64();
        }
        let outcome = result.and_then(|e| {
            residual.reserve(&e.allocation).map(|_| e).map_err(|err| {
                crate::embed::EmbedFailure::new(FailReason::CapacityExhausted, err.to_string())
            })
        });
        match outcome {
            Ok(e) => {
                accepted += 1;
                cost_all += e.cost;
                if arrival.vnr.n_pairs() <= SMALL_PAIRS {
                    small_accepted += 1;
                    cost_small += e.cost;
                }
                events.push(Event::Accept {
                    time: t,
                    vnr: id,
                    cost: e.cost,
                });
                held[id] = Some(e.allocation);
                departures.push(Reverse(DepartAt(t + arrival.duration, id)));
            }
            Err(f) => events.push(Event::Reject {
                time: t,
                vnr: id,
                reason: f.reason,
            }),
        }
    }
    utility.advance(config.horizon, residual.mean_utilization());

    let n = arrivals.len();
    let mean = |sum: f64, count: usize| (count > 0).then(|| sum / count as f64);
    let metrics = Metrics {
        acceptance_rate: mean(accepted as f64, n),
        avg_link_utility: utility.mean(),
        avg_cost_all: mean(cost_all, accepted),
        avg_cost_small: mean(cost_small, small_accepted),
        total_embed_time: config.record_timing.then_some(embed_time),
        arrivals: n,
        accepted,
        rejected: n - accepted,
        small_accepted,
    };
    Ok(SimResult {
        metrics,
        events,
        final_residual: residual,
        initial_residual: initial,
    })
}

/// The event log as a JSON array.
pub fn events_to_json(events: &[Event]) -> String {
    serde_json::to_string_pretty(events).expect("events serialize")
}
