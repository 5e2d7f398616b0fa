//! Piecewise-constant `S(t)`, `I(t)` paths built from infection and removal times.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Infection,
    Removal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// Path started at `start` with `s0` susceptibles and `i0` infectives.
///
/// Events are kept in time order; at equal times infections come first.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    start: f64,
    s0: i64,
    i0: i64,
    events: Vec<Event>,
}

impl Trajectory {
    pub fn new(start: f64, s0: u32, i0: u32, infections: &[f64], removals: &[f64]) -> Self {
        let mut events: Vec<Event> = infections
            .iter()
            .map(|&time| Event {
                time,
                kind: EventKind::Infection,
            })
            .chain(removals.iter().map(|&time| Event {
                time,
                kind: EventKind::Removal,
            }))
            .collect();
        events.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then_with(|| (a.kind == EventKind::Removal).cmp(&(b.kind == EventKind::Removal)))
        });
        Self {
            start,
            s0: i64::from(s0),
            i0: i64::from(i0),
            events,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// `(S, I)` just before each event, in event order.
    pub fn pre_event_states(&self) -> Vec<(i64, i64)> {
        let (mut s, mut i) = (self.s0, self.i0);
        self.events
            .iter()
            .map(|e| {
                let before = (s, i);
                match e.kind {
                    EventKind::Infection => {
                        s -= 1;
                        i += 1;
                    }
                    EventKind::Removal => i -= 1,
                }
                before
            })
            .collect()
    }

    /// Every event happens after `start` with `I(t−) ≥ 1`, and no infection
    /// finds the susceptibles exhausted.
    pub fn is_feasible(&self) -> bool {
        self.events.iter().all(|e| e.time >= self.start)
            && self
                .events
                .iter()
                .zip(self.pre_event_states())
                .all(|(e, (s, i))| i >= 1 && (e.kind == EventKind::Removal || s >= 1))
    }

    /// `(S(t), I(t))`, right-continuous.
    pub fn state_at(&self, t: f64) -> (i64, i64) {
        let (mut s, mut i) = (self.s0, self.i0);
        for e in self.events.iter().take_while(|e| e.time <= t) {
            match e.kind {
                EventKind::Infection => {
                    s -= 1;
                    i += 1;
                }
                EventKind::Removal => i -= 1,
            }
        }
        (s, i)
    }

    /// Removed count at `t`; `S + I + R` is constant.
    pub fn removed_at(&self, t: f64) -> i64 {
        self.events
            .iter()
            .take_while(|e| e.time <= t)
            .filter(|e| e.kind == EventKind::Removal)
            .count() as i64
    }

    /// `(∫S·I dt, ∫I dt)` over `[t0, t1]`, exact for the step functions.
    pub fn integrals(&self, t0: f64, t1: f64) -> (f64, f64) {
        let (mut s, mut i) = (self.s0 as f64, self.i0 as f64);
        let mut prev = self.start;
        let (mut si, mut ii) = (0.0, 0.0);
        let add = |from: f64, to: f64, s: f64, i: f64, si: &mut f64, ii: &mut f64| {
            let lo = from.max(t0);
            let hi = to.min(t1);
            if hi > lo {
                *si += s * i * (hi - lo);
                *ii += i * (hi - lo);
            }
        };
        for e in &self.events {
            if e.time >= t1 {
                break;
            }
            add(prev, e.time, s, i, &mut si, &mut ii);
            match e.kind {
                EventKind::Infection => {
                    s -= 1.0;
                    i += 1.0;
                }
                EventKind::Removal => i -= 1.0,
            }
            prev = e.time;
        }
        add(prev, t1, s, i, &mut si, &mut ii);
        (si, ii)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_segment() {
        let t = Trajectory::new(0.0, 10, 1, &[], &[1.0]);
        assert_eq!(t.integrals(0.0, 1.0), (10.0, 1.0));
    }

    #[test]
    fn two_segments() {
        let t = Trajectory::new(0.0, 10, 1, &[0.5], &[1.0]);
        let (si, ii) = t.integrals(0.0, 1.0);
        assert_relative_eq!(si, 14.0);
        assert_relative_eq!(ii, 1.5);
    }

    #[test]
    fn window_clipping() {
        let t = Trajectory::new(0.0, 10, 1, &[0.5], &[1.0, 2.0]);
        // on [0.25, 1.5]: 0.25 at (10,1), 0.5 at (9,2), 0.5 at (9,1)
        let (si, ii) = t.integrals(0.25, 1.5);
        assert_relative_eq!(si, 2.5 + 9.0 + 4.5);
        assert_relative_eq!(ii, 0.25 + 1.0 + 0.5);
    }

    #[test]
    fn feasibility_and_conservation() {
        let t = Trajectory::new(0.0, 3, 1, &[0.2, 0.4], &[0.5, 0.9, 1.0]);
        assert!(t.is_feasible());
        for x in [0.0, 0.3, 0.45, 0.7, 0.95, 2.0] {
            let (s, i) = t.state_at(x);
            assert_eq!(s + i + t.removed_at(x), 4);
        }
        // the second infection happens after everyone has been removed
        let dead = Trajectory::new(0.0, 3, 1, &[0.6], &[0.5, 0.9]);
        assert!(!dead.is_feasible());
    }
}
