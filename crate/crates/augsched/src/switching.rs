//! One-shot switching frameworks.
//!
//! The framework starts in a trust phase that follows the advice. At every
//! arrival it computes an evaluation point and tests the advice: first for
//! internal consistency (no two marked intervals may overlap), then against
//! the offline optimum of the completed prefix. The moment either test fails
//! it switches, irrevocably and at most once, to a classic algorithm running
//! on the remaining suffix.
//!
//! The semi-trusting variant additionally accepts any interval longer than a
//! threshold `tau` during the trust phase, trading a bit of consistency for
//! robustness; its evaluation and switching logic is identical.

use num_traits::Zero;

use crate::domain::{BinaryPrediction, Instance, Interval};
use crate::error::Error;
use crate::offline::dp_opt_value;
use crate::online::{virtual_long_length, AcceptedWatermark, GreedyState, VirtualState};
use crate::rational::{ratio, Rational};
use crate::record::{drive, Action, OnlineAlgorithm, Reason, RunRecord, SwitchCause, SwitchEvent};

/// A classic algorithm pluggable into the independent phase, addressable by
/// name from the harness.
#[derive(Debug, Clone)]
pub enum ClassicAlgorithm {
    Greedy,
    /// The randomized two-value rule; `long_len` pins the short/long split
    /// when the surrounding instance cannot (see [`crate::online`]).
    Virtual {
        long_len: Option<Rational>,
    },
}

impl ClassicAlgorithm {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "greedy" => Some(Self::Greedy),
            "virtual" => Some(Self::Virtual { long_len: None }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Greedy => "greedy",
            Self::Virtual { .. } => "virtual",
        }
    }

    /// Runs the algorithm standalone on an instance.
    pub fn run(&self, inst: &Instance, seed: u64) -> Result<RunRecord, Error> {
        drive(inst, self.make_stepper(inst, seed)?, seed)
    }

    /// Competitive-ratio label used to annotate bound checks: the multiplier
    /// `theta` such that `|Opt| <= theta * |Alg|` is claimed on instances
    /// with the given parameters.
    pub fn theta_claim(&self, inst: &Instance) -> Option<Rational> {
        let delta = inst.delta()?;
        match self {
            Self::Greedy => {
                if inst.two_value() {
                    Some(delta.clone().max(ratio(2, 1)))
                } else {
                    Some(delta + ratio(1, 1))
                }
            }
            Self::Virtual { .. } => inst.two_value().then(|| ratio(2, 1)),
        }
    }

    /// Instantiates the online stepper. `context` supplies instance-level
    /// parameters (the virtual rule's short/long split is taken from the
    /// whole run, not from whatever suffix it ends up seeing).
    pub(crate) fn make_stepper(
        &self,
        context: &Instance,
        seed: u64,
    ) -> Result<Box<dyn OnlineAlgorithm>, Error> {
        match self {
            Self::Greedy => Ok(Box::new(GreedyState::new())),
            Self::Virtual { long_len } => {
                let long = virtual_long_length(context, long_len.as_ref())?;
                Ok(Box::new(VirtualState::new(long, seed)))
            }
        }
    }
}

/// The evaluation point for arrival `j`: the latest deadline among marked
/// intervals released up to that arrival, or the release itself when no
/// marked interval is pending.
pub fn evaluation_point(inst: &Instance, pred: &BinaryPrediction, j: usize) -> Rational {
    let prefix = &inst.intervals()[..=j];
    let mut t = prefix[j].release.clone();
    for iv in prefix {
        if pred.get(iv.id) && iv.deadline > t {
            t = iv.deadline.clone();
        }
    }
    t
}

/// Decides whether the framework must leave the trust phase at arrival `j`.
/// An overlap between marked intervals dominates; otherwise the advice is
/// compared to the offline optimum of the prefix completed by the
/// evaluation point.
pub fn should_switch(inst: &Instance, pred: &BinaryPrediction, j: usize) -> Option<SwitchCause> {
    let prefix = &inst.intervals()[..=j];
    let marked: Vec<&Interval> = prefix.iter().filter(|iv| pred.get(iv.id)).collect();
    for (a, rest) in marked.iter().zip(1..) {
        for b in &marked[rest..] {
            if a.overlaps(b) {
                return Some(SwitchCause::Overlap);
            }
        }
    }
    let t = evaluation_point(inst, pred, j);
    let (opt, trust) = prefix_window_gap(prefix, pred, &t);
    (opt > trust).then_some(SwitchCause::Suboptimal)
}

/// Offline optimum and advice value over the prefix window `deadline <= t`.
/// Assumes the marked intervals in the window are pairwise disjoint (an
/// overlap would have switched already), so their value is a plain sum.
fn prefix_window_gap(
    prefix: &[Interval],
    pred: &BinaryPrediction,
    t: &Rational,
) -> (Rational, Rational) {
    let window: Vec<Interval> = prefix
        .iter()
        .filter(|iv| iv.deadline <= *t)
        .cloned()
        .collect();
    let mut trust = Rational::zero();
    for iv in &window {
        if pred.get(iv.id) {
            trust += iv.length();
        }
    }
    let opt = dp_opt_value(&Instance::from_sorted(window));
    (opt, trust)
}

/// Trust phase acceptance rule.
#[derive(Debug, Clone)]
enum TrustRule {
    /// Accept exactly the marked intervals.
    AdviceOnly,
    /// Accept marked intervals, plus any interval longer than the threshold.
    AdviceOrLong { tau: Rational },
}

enum Phase {
    Trust,
    Independent {
        switch_time: Rational,
        classic: Box<dyn OnlineAlgorithm>,
    },
}

struct FrameworkState {
    name: String,
    bits: BinaryPrediction,
    rule: TrustRule,
    phase: Phase,
    /// Pending classic stepper, created up front so construction errors
    /// surface before the run starts.
    classic: Option<Box<dyn OnlineAlgorithm>>,
    arrived: Vec<Interval>,
    accepted: AcceptedWatermark,
    /// Watermark over every marked arrival, accepted or not; detects advice
    /// that marks overlapping intervals.
    marked: AcceptedWatermark,
    switch_event: Option<SwitchEvent>,
    infeasible: bool,
}

impl FrameworkState {
    fn evaluation_point(&self, iv: &Interval, marked_now: bool) -> Rational {
        let mut t = iv.release.clone();
        if let Some(d) = self.marked.latest_deadline() {
            if *d > t {
                t = d.clone();
            }
        }
        if marked_now && iv.deadline > t {
            t = iv.deadline.clone();
        }
        t
    }
}

impl OnlineAlgorithm for FrameworkState {
    fn algorithm_name(&self) -> String {
        self.name.clone()
    }

    fn on_arrival(&mut self, iv: &Interval) -> (Action, Reason) {
        if let Phase::Independent {
            switch_time,
            classic,
        } = &mut self.phase
        {
            if iv.release < *switch_time {
                // Released while a trust-phase acceptance is still running;
                // it necessarily conflicts with that acceptance.
                return (Action::Reject, Reason::Policy);
            }
            return classic.on_arrival(iv);
        }

        self.arrived.push(iv.clone());
        let marked_now = self.bits.get(iv.id);
        let t = self.evaluation_point(iv, marked_now);

        let cause = if marked_now && self.marked.conflicts(iv) {
            Some(SwitchCause::Overlap)
        } else {
            let (opt, trust) = prefix_window_gap(&self.arrived, &self.bits, &t);
            (opt > trust).then_some(SwitchCause::Suboptimal)
        };

        if let Some(cause) = cause {
            // Start the classic algorithm as soon as possible: at this
            // release, or once the last trust-phase acceptance ends. The
            // independent phase handles every arrival from that moment on,
            // the trigger included, so no interval falls between phases.
            let mut switch_time = iv.release.clone();
            if let Some(d) = self.accepted.latest_deadline() {
                if *d > switch_time {
                    switch_time = d.clone();
                }
            }
            self.switch_event = Some(SwitchEvent {
                trigger_interval_id: iv.id,
                evaluation_point: t,
                effective_switch_time: switch_time.clone(),
                cause,
            });
            self.phase = Phase::Independent {
                switch_time: switch_time.clone(),
                classic: self.classic.take().expect("classic stepper prepared"),
            };
            if iv.release >= switch_time {
                let Phase::Independent { classic, .. } = &mut self.phase else {
                    unreachable!()
                };
                return classic.on_arrival(iv);
            }
            return (Action::Reject, Reason::Policy);
        }

        if marked_now {
            self.marked.accept(iv);
        }

        let (wanted, reason) = match (&self.rule, marked_now) {
            (_, true) => (true, Reason::Prediction),
            (TrustRule::AdviceOrLong { tau }, false) if iv.length() > *tau => {
                (true, Reason::Policy)
            }
            _ => (false, Reason::Prediction),
        };
        if !wanted {
            return (Action::Reject, reason);
        }
        if self.accepted.conflicts(iv) {
            if marked_now {
                self.infeasible = true;
            }
            return (Action::Reject, Reason::Conflict);
        }
        self.accepted.accept(iv);
        (Action::Accept, reason)
    }

    fn switch_event(&self) -> Option<SwitchEvent> {
        self.switch_event.clone()
    }

    fn infeasible_prediction(&self) -> bool {
        self.infeasible
    }
}

fn make_framework(
    name: String,
    pred: &BinaryPrediction,
    rule: TrustRule,
    classic: &ClassicAlgorithm,
    context: &Instance,
    seed: u64,
) -> Result<Box<dyn OnlineAlgorithm>, Error> {
    Ok(Box::new(FrameworkState {
        name,
        bits: pred.clone(),
        rule,
        phase: Phase::Trust,
        classic: Some(classic.make_stepper(context, seed)?),
        arrived: Vec::new(),
        accepted: AcceptedWatermark::default(),
        marked: AcceptedWatermark::default(),
        switch_event: None,
        infeasible: false,
    }))
}

/// Online stepper form of [`trust_and_switch`], for adversarial dialogues
/// where arrivals are not known up front. Advice bits are indexed by
/// interval id; `context` supplies instance-level parameters to the classic
/// algorithm.
pub fn trust_and_switch_stepper(
    pred: &BinaryPrediction,
    classic: &ClassicAlgorithm,
    context: &Instance,
    seed: u64,
) -> Result<Box<dyn OnlineAlgorithm>, Error> {
    make_framework(
        format!("trust-and-switch({})", classic.name()),
        pred,
        TrustRule::AdviceOnly,
        classic,
        context,
        seed,
    )
}

/// Online stepper form of [`semi_trust_and_switch`].
pub fn semi_trust_and_switch_stepper(
    pred: &BinaryPrediction,
    tau: &Rational,
    classic: &ClassicAlgorithm,
    context: &Instance,
    seed: u64,
) -> Result<Box<dyn OnlineAlgorithm>, Error> {
    if *tau <= Rational::zero() {
        return Err(Error::BadParameter(format!(
            "threshold tau must be positive, got {tau}"
        )));
    }
    make_framework(
        format!("semitrust-and-switch({})", classic.name()),
        pred,
        TrustRule::AdviceOrLong { tau: tau.clone() },
        classic,
        context,
        seed,
    )
}

fn run_framework(
    name: String,
    inst: &Instance,
    pred: &BinaryPrediction,
    rule: TrustRule,
    classic: &ClassicAlgorithm,
    seed: u64,
) -> Result<RunRecord, Error> {
    pred.matches(inst)?;
    let stepper = make_framework(name, pred, rule, classic, inst, seed)?;
    drive(inst, stepper, seed)
}

/// Follows the advice until it is provably wrong, then runs `classic` on the
/// suffix released strictly after the switch time.
pub fn trust_and_switch(
    inst: &Instance,
    pred: &BinaryPrediction,
    classic: &ClassicAlgorithm,
    seed: u64,
) -> Result<RunRecord, Error> {
    run_framework(
        format!("trust-and-switch({})", classic.name()),
        inst,
        pred,
        TrustRule::AdviceOnly,
        classic,
        seed,
    )
}

/// Like [`trust_and_switch`], but the trust phase also accepts any interval
/// whose length exceeds `tau`, so unpredicted long intervals are not lost to
/// bad advice. Requires `tau > 0`.
pub fn semi_trust_and_switch(
    inst: &Instance,
    pred: &BinaryPrediction,
    tau: &Rational,
    classic: &ClassicAlgorithm,
    seed: u64,
) -> Result<RunRecord, Error> {
    if *tau <= Rational::zero() {
        return Err(Error::BadParameter(format!(
            "threshold tau must be positive, got {tau}"
        )));
    }
    run_framework(
        format!("semitrust-and-switch({})", classic.name()),
        inst,
        pred,
        TrustRule::AdviceOrLong { tau: tau.clone() },
        classic,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::{brute_force_opt, dp_opt};
    use crate::rational::int;
    use crate::test_util::inst;

    fn perfect(i: &Instance) -> BinaryPrediction {
        BinaryPrediction::from_ids(i.len(), dp_opt(i).accepted_ids())
    }

    #[test]
    fn evaluation_point_examples() {
        // No marked interval yet: the release itself.
        let i = inst(&[("0", "2"), ("3", "4")]);
        let none = BinaryPrediction::new(vec![false, false]);
        assert_eq!(evaluation_point(&i, &none, 1), int(3));

        // The arriving interval is marked and carries the latest deadline.
        let own = BinaryPrediction::new(vec![false, true]);
        assert_eq!(evaluation_point(&i, &own, 1), int(4));

        // A marked long interval still active dominates the release.
        let i = inst(&[("0", "10"), ("4", "5")]);
        let long_marked = BinaryPrediction::new(vec![true, false]);
        assert_eq!(evaluation_point(&i, &long_marked, 1), int(10));
    }

    #[test]
    fn perfect_advice_never_switches() {
        let i = inst(&[("0", "3"), ("1", "5"), ("4", "6"), ("5", "9"), ("9", "11")]);
        let pred = perfect(&i);
        for j in 0..i.len() {
            assert_eq!(should_switch(&i, &pred, j), None, "arrival {j}");
        }
    }

    #[test]
    fn overlapping_advice_switches_immediately() {
        let i = inst(&[("0", "2"), ("1", "3")]);
        let pred = BinaryPrediction::new(vec![true, true]);
        assert_eq!(should_switch(&i, &pred, 1), Some(SwitchCause::Overlap));
    }

    #[test]
    fn rejecting_an_expired_lone_interval_is_suboptimal() {
        let i = inst(&[("0", "1"), ("2", "3")]);
        let pred = BinaryPrediction::new(vec![false, false]);
        assert_eq!(should_switch(&i, &pred, 0), None);
        assert_eq!(should_switch(&i, &pred, 1), Some(SwitchCause::Suboptimal));
        // The completed prefix really is worth more than the advice took.
        let window = i.restrict(None, Some(&crate::domain::TimeBound::AtOrBefore(int(2))));
        assert_eq!(brute_force_opt(&window).unwrap().total_length(), &int(1));
    }

    #[test]
    fn perfect_advice_attains_the_optimum() {
        let i = inst(&[("0", "3"), ("1", "5"), ("4", "6"), ("5", "9"), ("9", "11")]);
        let pred = perfect(&i);
        let r = trust_and_switch(&i, &pred, &ClassicAlgorithm::Greedy, 7).unwrap();
        assert_eq!(r.value(), dp_opt(&i).total_length());
        assert!(r.switch_event.is_none());
        assert!(!r.infeasible_prediction);
    }

    #[test]
    fn all_zero_advice_switches_at_first_completed_interval() {
        let i = inst(&[("0", "1"), ("2", "3"), ("4", "5")]);
        let pred = BinaryPrediction::new(vec![false; 3]);
        let r = trust_and_switch(&i, &pred, &ClassicAlgorithm::Greedy, 7).unwrap();
        let ev = r.switch_event.expect("switches");
        assert_eq!(ev.trigger_interval_id, 1);
        assert_eq!(ev.cause, SwitchCause::Suboptimal);
        assert_eq!(ev.effective_switch_time, int(2));
        // Greedy takes over from the switch time on, trigger included.
        assert_eq!(r.schedule.accepted_ids(), &[1, 2]);
    }

    #[test]
    fn switch_bound_checks_on_a_losing_run() {
        // Advice takes a tiny interval and blocks the long one.
        let i = inst(&[("0", "10"), ("0", "1"), ("2", "3")]);
        let pred = BinaryPrediction::new(vec![false, true, false]);
        let r = trust_and_switch(&i, &pred, &ClassicAlgorithm::Greedy, 7).unwrap();
        let opt = dp_opt(&i).total_length().clone();
        let k = i.k().unwrap().clone();
        let delta = i.delta().unwrap().clone();
        let bound = (delta + int(1)) * r.value() + int(2) * k;
        assert!(opt <= bound, "opt {opt} bound {bound}");
    }

    #[test]
    fn switch_waits_for_live_trust_acceptance() {
        // Advice accepts a long interval, then marks one overlapping it: the
        // overlap triggers a switch whose effective time respects the live
        // acceptance, so the combined schedule stays feasible.
        let i = inst(&[("0", "10"), ("1", "2"), ("3", "12"), ("4", "5")]);
        let pred = BinaryPrediction::new(vec![true, false, true, false]);
        let r = trust_and_switch(&i, &pred, &ClassicAlgorithm::Greedy, 7).unwrap();
        let ev = r.switch_event.expect("switches");
        assert_eq!(ev.cause, SwitchCause::Overlap);
        assert_eq!(ev.trigger_interval_id, 2);
        assert_eq!(ev.effective_switch_time, int(10));
        assert!(r.schedule.contains(0));
    }

    #[test]
    fn semi_with_high_tau_matches_plain_framework() {
        let i = inst(&[("0", "3"), ("1", "5"), ("4", "6"), ("5", "9")]);
        let pred = BinaryPrediction::new(vec![false, true, false, true]);
        let tau = i.k().unwrap() + int(1);
        let a = trust_and_switch(&i, &pred, &ClassicAlgorithm::Greedy, 3).unwrap();
        let b = semi_trust_and_switch(&i, &pred, &tau, &ClassicAlgorithm::Greedy, 3).unwrap();
        assert_eq!(a.decisions, b.decisions);
        assert_eq!(a.schedule, b.schedule);
        assert_eq!(a.switch_event, b.switch_event);
    }

    #[test]
    fn semi_with_tiny_tau_and_full_advice_is_greedy_on_disjoint_input() {
        let i = inst(&[("0", "1"), ("2", "3"), ("4", "6")]);
        let pred = BinaryPrediction::new(vec![true; 3]);
        let tau = crate::rational::ratio(1, 2);
        let r = semi_trust_and_switch(&i, &pred, &tau, &ClassicAlgorithm::Greedy, 3).unwrap();
        let g = crate::online::greedy(&i);
        assert_eq!(r.schedule, g.schedule);
        assert!(r.switch_event.is_none());
    }

    #[test]
    fn semi_accepts_unpredicted_longs() {
        // tau in (k/delta, k): the unmarked long is taken by length.
        let i = inst(&[("0", "1"), ("2", "6")]);
        let pred = BinaryPrediction::new(vec![true, false]);
        let tau = int(2);
        let r = semi_trust_and_switch(&i, &pred, &tau, &ClassicAlgorithm::Greedy, 3).unwrap();
        assert_eq!(r.schedule.accepted_ids(), &[0, 1]);
        assert!(r.switch_event.is_none());
    }

    #[test]
    fn semi_rejects_non_positive_tau() {
        let i = inst(&[("0", "1")]);
        let pred = BinaryPrediction::new(vec![false]);
        assert!(matches!(
            semi_trust_and_switch(&i, &pred, &int(0), &ClassicAlgorithm::Greedy, 0),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn classic_registry_resolves_names() {
        assert_eq!(
            ClassicAlgorithm::by_name("greedy").unwrap().name(),
            "greedy"
        );
        assert_eq!(
            ClassicAlgorithm::by_name("virtual").unwrap().name(),
            "virtual"
        );
        assert!(ClassicAlgorithm::by_name("marriage").is_none());
    }
}
