//! Forward simulation of SIR epidemics and Poisson event streams.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Event, EventKind, Population};
use crate::models::EventData;
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirOutcome {
    /// Infection times, starting with the initial infective at 0.
    pub infections: Vec<f64>,
    /// Sorted removal times.
    pub removals: Vec<f64>,
    /// Removal time of each individual, in the order of `infections`.
    pub removal_of: Vec<f64>,
    pub events: Vec<Event>,
}

impl SirOutcome {
    pub fn final_size(&self) -> usize {
        self.removals.len()
    }
}

/// `f64` with a total order, for the removal queue.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Event-driven simulation until no infectives remain. Contacts happen at rate
/// `β/N` per pair; infectious periods are `Gamma(inf_shape, inf_rate)`.
pub fn simulate_sir<R: Rng + ?Sized>(
    pop: Population,
    beta: f64,
    inf_shape: f64,
    inf_rate: f64,
    rng: &mut R,
) -> SirOutcome {
    let n = f64::from(pop.susceptibles);
    let mut s = pop.susceptibles;
    let mut t = 0.0;
    let mut queue = BinaryHeap::new();
    let mut infections = vec![0.0];
    let mut removals = Vec::new();
    let mut events = vec![Event {
        time: 0.0,
        kind: EventKind::Infection,
    }];
    let mut removal_of = vec![f64::NAN];
    queue.push(Reverse((Time(sampling::gamma(rng, inf_shape, inf_rate)), 0usize)));
    while let Some(&Reverse((Time(next_removal), who))) = queue.peek() {
        let pressure = beta * f64::from(s) * queue.len() as f64 / n;
        let next_infection = if pressure > 0.0 {
            t + sampling::exponential(rng, pressure)
        } else {
            f64::INFINITY
        };
        if next_infection < next_removal {
            t = next_infection;
            s -= 1;
            infections.push(t);
            events.push(Event {
                time: t,
                kind: EventKind::Infection,
            });
            removal_of.push(f64::NAN);
            queue.push(Reverse((Time(t + sampling::gamma(rng, inf_shape, inf_rate)), infections.len() - 1)));
        } else {
            t = next_removal;
            queue.pop();
            removals.push(t);
            removal_of[who] = t;
            events.push(Event {
                time: t,
                kind: EventKind::Removal,
            });
        }
    }
    SirOutcome {
        infections,
        removals,
        removal_of,
        events,
    }
}

/// Homogeneous Poisson process of rate `lambda` on `[0, horizon]`.
pub fn simulate_poisson<R: Rng + ?Sized>(lambda: f64, horizon: f64, rng: &mut R) -> EventData {
    let mean = lambda * horizon;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive Poisson mean").sample(rng) as usize
    } else {
        0
    };
    let times = (0..count).map(|_| rng.random::<f64>() * horizon).collect();
    EventData::new(times, horizon).expect("uniform times lie in the window")
}

/// One row of the two-infectious-period simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: char,
    pub susceptibles: u32,
    pub beta: f64,
    /// True infectious-period law `Gamma(shape, rate)`.
    pub true_shape: f64,
    pub true_rate: f64,
    /// Shape assumed by the second model.
    pub model_shape: f64,
}

impl Scenario {
    pub fn preset(name: char) -> Option<Self> {
        let (beta, true_shape, true_rate, model_shape) = match name.to_ascii_uppercase() {
            'A' => (2.0, 5.0, 5.0, 5.0),
            'B' => (1.0, 1.0, 0.75, 1.0),
            'C' => (3.0, 1.0, 1.0, 2.0),
            _ => return None,
        };
        Some(Self {
            name: name.to_ascii_uppercase(),
            susceptibles: 50,
            beta,
            true_shape,
            true_rate,
            model_shape,
        })
    }

    pub fn population(&self) -> Population {
        Population {
            susceptibles: self.susceptibles,
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> SirOutcome {
        simulate_sir(self.population(), self.beta, self.true_shape, self.true_rate, rng)
    }
}

/// Final size at or above this fraction of `N` counts as a major epidemic.
pub const MAJOR_EPIDEMIC_FRACTION: f64 = 0.2;

pub fn is_major(outcome: &SirOutcome, pop: Population) -> bool {
    outcome.final_size() as f64 >= MAJOR_EPIDEMIC_FRACTION * f64::from(pop.susceptibles)
}
