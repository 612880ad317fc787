use crate::mitigator::strategy::{Strategy, StrategyId};
use crate::model::FailSlowEvent;

/// Default relative improvement over the pre-action level that counts a
/// strategy as effective.
pub const DEFAULT_MIN_IMPROVEMENT: f64 = 0.01;

/// Default relative excess below which no impact accrues. Measurement
/// jitter is rectified by the max(0, ..) accumulation and would otherwise
/// drift the impact across break-even thresholds on perfectly mitigated
/// events.
pub const DEFAULT_IMPACT_NOISE_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Monitoring,
    /// One sample after a real action: the action's one-off cost is booked
    /// as overhead, not impact, and the following sample decides whether
    /// the strategy worked.
    Transition { pre_level: f64 },
}

/// Ladder position and accumulated slowdown for one fail-slow event.
///
/// Impact accrues as `max(0, iter_time - t_healthy)` per iteration; a
/// strategy fires as soon as the accumulated impact reaches its one-off
/// overhead (the rent-vs-buy break-even). After an effective strategy the
/// healthy baseline is re-anchored to the improved level, which freezes
/// accumulation and halts escalation; an ineffective strategy leaves the
/// baseline alone so impact keeps growing toward the next level.
#[derive(Debug, Clone)]
pub struct MitigationState {
    pub event: FailSlowEvent,
    /// Strategies applicable to the event's root cause, sorted by overhead.
    pub candidates: Vec<Strategy>,
    /// Next ladder position to arm; only ever increases.
    pub next_index: usize,
    pub accumulated_impact: f64,
    pub t_healthy: f64,
    /// Latest iteration time observed above the healthy baseline.
    pub t_slow: f64,
    /// Total one-off overhead paid so far.
    pub overhead_paid: f64,
    pub applied: Vec<StrategyId>,
    min_improvement: f64,
    noise_band: f64,
    phase: Phase,
}

impl MitigationState {
    pub fn new(event: FailSlowEvent, candidates: Vec<Strategy>, t_healthy: f64) -> Self {
        debug_assert!(
            candidates.windows(2).all(|w| w[0].overhead <= w[1].overhead),
            "candidates must be sorted by overhead"
        );
        Self {
            event,
            candidates,
            next_index: 0,
            accumulated_impact: 0.0,
            t_healthy,
            t_slow: t_healthy,
            overhead_paid: 0.0,
            applied: Vec::new(),
            min_improvement: DEFAULT_MIN_IMPROVEMENT,
            noise_band: DEFAULT_IMPACT_NOISE_BAND,
            phase: Phase::Monitoring,
        }
    }

    pub fn with_min_improvement(mut self, min_improvement: f64) -> Self {
        self.min_improvement = min_improvement;
        self
    }

    pub fn with_noise_band(mut self, noise_band: f64) -> Self {
        self.noise_band = noise_band;
        self
    }

    pub fn exhausted(&self) -> bool {
        self.next_index >= self.candidates.len()
    }

    /// Feeds one iteration time; returns the strategy to apply now, if the
    /// accumulated impact just reached the next rung's overhead.
    pub fn step(&mut self, iter_time: f64) -> Option<StrategyId> {
        if let Phase::Transition { pre_level } = self.phase {
            // Effectiveness check on the first steady sample after the
            // action.
            if iter_time <= pre_level * (1.0 - self.min_improvement) {
                self.t_healthy = iter_time;
            }
            self.phase = Phase::Monitoring;
            return None;
        }

        let excess = iter_time - self.t_healthy;
        if excess > self.noise_band * self.t_healthy {
            self.accumulated_impact += excess;
            self.t_slow = iter_time;
        }
        if self.exhausted() {
            return None;
        }
        let next = self.candidates[self.next_index];
        if self.accumulated_impact >= next.overhead {
            self.next_index += 1;
            self.overhead_paid += next.overhead;
            self.applied.push(next.id);
            if next.id != StrategyId::S1 {
                self.phase = Phase::Transition {
                    pre_level: iter_time,
                };
            }
            return Some(next.id);
        }
        None
    }

    /// Impact plus overhead: the planner's total cost so far.
    pub fn total_cost(&self) -> f64 {
        self.accumulated_impact + self.overhead_paid
    }
}
