//! Decision traces for online runs.
//!
//! Every algorithm execution produces a `RunRecord`: one decision per
//! arriving interval, the resulting feasible schedule, the switch event if a
//! framework changed phase, the seed, and any bound checks attached by the
//! harness. Records serialize to JSON for replay and debugging.

use serde::Serialize;

use crate::domain::{Instance, Interval, Schedule};
use crate::error::Error;
use crate::rational::{serde_exact, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Accept,
    Reject,
}

/// Why a decision came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Reason {
    /// Overlap with an already accepted interval.
    Conflict,
    /// Dictated by the binary advice bit.
    Prediction,
    /// Outcome of a random coin.
    CoinFlip,
    /// Blocked by a live virtual hold.
    VirtualHold,
    /// Any deterministic rule of the algorithm itself.
    Policy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OnlineDecision {
    pub interval_id: usize,
    pub action: Action,
    pub reason: Reason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchCause {
    Overlap,
    Suboptimal,
}

/// The one-shot transition of a switching framework.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchEvent {
    pub trigger_interval_id: usize,
    #[serde(with = "serde_exact")]
    pub evaluation_point: Rational,
    #[serde(with = "serde_exact")]
    pub effective_switch_time: Rational,
    pub cause: SwitchCause,
}

/// One checked inequality, exact on both sides.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    #[serde(with = "serde_exact")]
    pub lhs: Rational,
    #[serde(with = "serde_exact")]
    pub rhs: Rational,
    pub holds: bool,
}

impl BoundCheck {
    /// Records `lhs <= rhs`.
    pub fn le(name: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        let holds = lhs <= rhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds,
        }
    }
}

/// Full trace of one algorithm execution.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub seed: u64,
    pub decisions: Vec<OnlineDecision>,
    pub schedule: Schedule,
    pub switch_event: Option<SwitchEvent>,
    /// Set when advice marked an interval that could not be feasibly accepted.
    pub infeasible_prediction: bool,
    pub bound_checks: Vec<BoundCheck>,
}

impl RunRecord {
    pub fn value(&self) -> &Rational {
        self.schedule.total_length()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run record serializes")
    }
}

/// An algorithm that consumes one interval at a time and commits to each
/// decision immediately. Arrivals must come in non-decreasing release order.
pub trait OnlineAlgorithm {
    fn algorithm_name(&self) -> String;

    /// Irrevocable decision for the arriving interval.
    fn on_arrival(&mut self, iv: &Interval) -> (Action, Reason);

    /// Switch event, once the run is over (frameworks only).
    fn switch_event(&self) -> Option<SwitchEvent> {
        None
    }

    /// True if advice requested an interval the run could not accept.
    fn infeasible_prediction(&self) -> bool {
        false
    }
}

/// Feeds a full instance through an online algorithm and assembles the
/// record. Verifies that the accepted set is feasible.
pub fn drive(
    inst: &Instance,
    mut alg: Box<dyn OnlineAlgorithm>,
    seed: u64,
) -> Result<RunRecord, Error> {
    let mut decisions = Vec::with_capacity(inst.len());
    let mut accepted: Vec<&Interval> = Vec::new();
    for iv in inst.intervals() {
        let (action, reason) = alg.on_arrival(iv);
        decisions.push(OnlineDecision {
            interval_id: iv.id,
            action,
            reason,
        });
        if action == Action::Accept {
            accepted.push(iv);
        }
    }
    let schedule = Schedule::new(&accepted)?;
    Ok(RunRecord {
        algorithm: alg.algorithm_name(),
        seed,
        decisions,
        schedule,
        switch_event: alg.switch_event(),
        infeasible_prediction: alg.infeasible_prediction(),
        bound_checks: Vec::new(),
    })
}
