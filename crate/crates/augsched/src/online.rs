//! Baseline online algorithms under the irrevocable-decision contract:
//! greedy acceptance, blind advice following, and the randomized
//! hold-for-a-long-interval rule for two-value instances.

use num_traits::Zero;

use crate::domain::{BinaryPrediction, Instance, Interval};
use crate::error::Error;
use crate::rational::Rational;
use crate::record::{drive, Action, OnlineAlgorithm, Reason, RunRecord};
use crate::rng::keyed_u64;

/// Coin-flip domain tag for the virtual algorithm.
pub(crate) const VIRTUAL_COIN_DOMAIN: u64 = 0x7669;

/// Watermark feasibility: with release-ordered arrivals, a new interval
/// conflicts with an accepted set iff its release precedes the latest
/// accepted deadline.
#[derive(Debug, Clone, Default)]
pub(crate) struct AcceptedWatermark {
    latest_deadline: Option<Rational>,
}

impl AcceptedWatermark {
    pub fn conflicts(&self, iv: &Interval) -> bool {
        self.latest_deadline
            .as_ref()
            .is_some_and(|d| iv.release < *d)
    }

    pub fn accept(&mut self, iv: &Interval) {
        match &mut self.latest_deadline {
            Some(d) if *d >= iv.deadline => {}
            slot => *slot = Some(iv.deadline.clone()),
        }
    }

    pub fn latest_deadline(&self) -> Option<&Rational> {
        self.latest_deadline.as_ref()
    }
}

/// Accepts an arriving interval iff it does not overlap any previously
/// accepted one.
pub struct GreedyState {
    accepted: AcceptedWatermark,
}

impl GreedyState {
    pub fn new() -> Self {
        Self {
            accepted: AcceptedWatermark::default(),
        }
    }
}

impl Default for GreedyState {
    fn default() -> Self {
        Self::new()
    }
}

impl OnlineAlgorithm for GreedyState {
    fn algorithm_name(&self) -> String {
        "greedy".into()
    }

    fn on_arrival(&mut self, iv: &Interval) -> (Action, Reason) {
        if self.accepted.conflicts(iv) {
            (Action::Reject, Reason::Conflict)
        } else {
            self.accepted.accept(iv);
            (Action::Accept, Reason::Policy)
        }
    }
}

pub fn greedy(inst: &Instance) -> RunRecord {
    drive(inst, Box::new(GreedyState::new()), 0).expect("greedy output is feasible")
}

/// Follows the advice bit for each arrival. When the advice itself is
/// infeasible, marked intervals that conflict with earlier acceptances are
/// skipped and the run is flagged, so the output schedule stays feasible.
pub struct TrustState {
    bits: Vec<bool>,
    accepted: AcceptedWatermark,
    infeasible: bool,
}

impl TrustState {
    pub fn new(pred: &BinaryPrediction) -> Self {
        Self {
            bits: pred.bits().to_vec(),
            accepted: AcceptedWatermark::default(),
            infeasible: false,
        }
    }
}

impl OnlineAlgorithm for TrustState {
    fn algorithm_name(&self) -> String {
        "trust".into()
    }

    fn on_arrival(&mut self, iv: &Interval) -> (Action, Reason) {
        if !self.bits.get(iv.id).copied().unwrap_or(false) {
            return (Action::Reject, Reason::Prediction);
        }
        if self.accepted.conflicts(iv) {
            self.infeasible = true;
            return (Action::Reject, Reason::Conflict);
        }
        self.accepted.accept(iv);
        (Action::Accept, Reason::Prediction)
    }

    fn infeasible_prediction(&self) -> bool {
        self.infeasible
    }
}

pub fn trust(inst: &Instance, pred: &BinaryPrediction) -> Result<RunRecord, Error> {
    pred.matches(inst)?;
    drive(inst, Box::new(TrustState::new(pred)), 0)
}

/// Randomized two-value algorithm: long intervals are accepted whenever they
/// fit; an available short interval triggers a fair coin between accepting it
/// now and holding its slot until its deadline in the hope of a long arrival.
/// A live hold blocks other shorts but never a long; at its deadline it
/// simply expires. Classification is relative to the long length, so the
/// behavior is invariant under scaling the instance by the short length.
pub struct VirtualState {
    long_len: Rational,
    seed: u64,
    accepted: AcceptedWatermark,
    hold_until: Option<Rational>,
}

impl VirtualState {
    pub fn new(long_len: Rational, seed: u64) -> Self {
        Self {
            long_len,
            seed,
            accepted: AcceptedWatermark::default(),
            hold_until: None,
        }
    }

    fn is_long(&self, iv: &Interval) -> bool {
        iv.length() == self.long_len
    }
}

impl OnlineAlgorithm for VirtualState {
    fn algorithm_name(&self) -> String {
        "virtual".into()
    }

    fn on_arrival(&mut self, iv: &Interval) -> (Action, Reason) {
        if self.accepted.conflicts(iv) {
            return (Action::Reject, Reason::Conflict);
        }
        if self.is_long(iv) {
            self.accepted.accept(iv);
            return (Action::Accept, Reason::Policy);
        }
        if let Some(until) = &self.hold_until {
            if iv.release < *until {
                return (Action::Reject, Reason::VirtualHold);
            }
        }
        let heads = keyed_u64(self.seed, VIRTUAL_COIN_DOMAIN, iv.id as u64) & 1 == 1;
        if heads {
            self.accepted.accept(iv);
            (Action::Accept, Reason::CoinFlip)
        } else {
            self.hold_until = Some(iv.deadline.clone());
            (Action::Reject, Reason::CoinFlip)
        }
    }
}

/// Resolves the long length for a run of the virtual algorithm and checks
/// the two-value precondition. With `long_len` absent the instance itself
/// must be two-value; with it supplied, instances whose lengths all equal
/// `long_len`, or take one further value below it, are accepted.
pub fn virtual_long_length(
    inst: &Instance,
    long_len: Option<&Rational>,
) -> Result<Rational, Error> {
    let mut lengths: Vec<Rational> = inst.intervals().iter().map(Interval::length).collect();
    lengths.sort();
    lengths.dedup();
    match long_len {
        None => {
            if inst.two_value() {
                Ok(inst.k().expect("two-value instance is non-empty").clone())
            } else {
                Err(Error::NotTwoValue(format!(
                    "{} distinct lengths and no explicit long length",
                    lengths.len()
                )))
            }
        }
        Some(k) => {
            if lengths.iter().any(|l| l > k) {
                return Err(Error::NotTwoValue(format!(
                    "length exceeds declared long length {k}"
                )));
            }
            let shorts: Vec<&Rational> = lengths.iter().filter(|l| *l != k).collect();
            if shorts.len() > 1 {
                return Err(Error::NotTwoValue(format!(
                    "{} distinct short lengths",
                    shorts.len()
                )));
            }
            if k <= &Rational::zero() {
                return Err(Error::BadParameter("long length must be positive".into()));
            }
            Ok(k.clone())
        }
    }
}

/// Runs the virtual algorithm. `long_len` may pin the short/long split when
/// the instance alone cannot (for instance a lone short interval).
pub fn virtual_algorithm(
    inst: &Instance,
    long_len: Option<&Rational>,
    seed: u64,
) -> Result<RunRecord, Error> {
    let long_len = virtual_long_length(inst, long_len)?;
    drive(inst, Box::new(VirtualState::new(long_len, seed)), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::dp_opt;
    use crate::rational::{int, ratio, to_f64};
    use crate::test_util::inst;

    #[test]
    fn greedy_takes_first_of_each_busy_period() {
        let i = inst(&[("0", "1"), ("0.5", "5.5")]);
        let r = greedy(&i);
        assert_eq!(r.schedule.accepted_ids(), &[0]);
        assert_eq!(r.value(), &int(1));
    }

    #[test]
    fn greedy_accepts_everything_disjoint() {
        let i = inst(&[("0", "1"), ("1", "2"), ("3", "7")]);
        let r = greedy(&i);
        assert_eq!(r.schedule.len(), 3);
        assert_eq!(r.value(), dp_opt(&i).total_length());
    }

    #[test]
    fn greedy_two_value_bound_against_the_oracle() {
        use crate::generate::random_two_value_instance;
        use crate::offline::brute_force_opt;
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(21);
        for case in 0..200 {
            let i = random_two_value_instance(&mut rng, 12, 30, 1, 3);
            let opt = brute_force_opt(&i).unwrap().total_length().clone();
            let g = greedy(&i).value().clone();
            let delta = i.delta().unwrap().clone();
            let bound = delta.max(int(2)) * g;
            assert!(opt <= bound, "case {case}: {opt} > {bound}");
        }
    }

    #[test]
    fn trust_with_perfect_advice_attains_optimum() {
        let i = inst(&[("0", "3"), ("1", "5"), ("4", "6"), ("5", "9")]);
        let opt = dp_opt(&i);
        let pred = BinaryPrediction::from_ids(i.len(), opt.accepted_ids());
        let r = trust(&i, &pred).unwrap();
        assert_eq!(r.value(), opt.total_length());
        assert!(!r.infeasible_prediction);
    }

    #[test]
    fn trust_with_zero_advice_accepts_nothing() {
        let i = inst(&[("0", "3"), ("4", "6")]);
        let pred = BinaryPrediction::new(vec![false, false]);
        let r = trust(&i, &pred).unwrap();
        assert!(r.schedule.is_empty());
        assert_eq!(r.value(), &int(0));
    }

    #[test]
    fn trust_skips_conflicting_advice_and_flags_it() {
        let i = inst(&[("0", "2"), ("1", "3")]);
        let pred = BinaryPrediction::new(vec![true, true]);
        let r = trust(&i, &pred).unwrap();
        assert_eq!(r.schedule.accepted_ids(), &[0]);
        assert!(r.infeasible_prediction);
    }

    #[test]
    fn trust_rejects_length_mismatch() {
        let i = inst(&[("0", "2")]);
        let pred = BinaryPrediction::new(vec![true, false]);
        assert!(matches!(
            trust(&i, &pred),
            Err(Error::PredictionLengthMismatch { .. })
        ));
    }

    #[test]
    fn virtual_needs_a_long_length() {
        let three = inst(&[("0", "1"), ("2", "4"), ("5", "9")]);
        assert!(matches!(
            virtual_algorithm(&three, None, 1),
            Err(Error::NotTwoValue(_))
        ));
        // Explicit long length resolves a single-length instance.
        let lone = inst(&[("0", "1")]);
        assert!(virtual_algorithm(&lone, Some(&int(4)), 1).is_ok());
    }

    #[test]
    fn virtual_always_accepts_a_lone_long() {
        let lone = inst(&[("0", "4")]);
        for seed in 0..32 {
            let r = virtual_algorithm(&lone, Some(&int(4)), seed).unwrap();
            assert_eq!(r.schedule.len(), 1, "seed {seed}");
        }
    }

    #[test]
    fn virtual_accepts_a_lone_short_half_the_time() {
        // Independent check of the single fair coin: 1e5 seeded runs stay
        // within 3 binomial standard errors of 1/2.
        let lone = inst(&[("0", "1")]);
        let trials = 100_000u64;
        let mut hits = 0u64;
        for seed in 0..trials {
            let r = virtual_algorithm(&lone, Some(&int(4)), seed).unwrap();
            if !r.schedule.is_empty() {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn virtual_two_outcome_expectation() {
        // Short at [0,1), long at [0.5, 0.5+k): heads keeps the short (value
        // 1), tails holds and the long lands (value k). E = (1 + k)/2.
        let k = 4i64;
        let i = inst(&[("0", "1"), ("0.5", "4.5")]);
        let trials = 100_000u64;
        let mut total = 0f64;
        for seed in 0..trials {
            let r = virtual_algorithm(&i, None, seed).unwrap();
            total += to_f64(r.value());
        }
        let mean = total / trials as f64;
        let expected = (1.0 + k as f64) / 2.0;
        // Two-point distribution at {1, k}: sd = (k-1)/2.
        let sigma = ((k - 1) as f64 / 2.0) / (trials as f64).sqrt();
        assert!((mean - expected).abs() <= 4.0 * sigma, "mean {mean}");
        let opt = dp_opt(&i);
        assert_eq!(opt.total_length(), &ratio(4, 1));
        assert!(to_f64(opt.total_length()) <= 2.0 * (mean + 4.0 * sigma));
    }

    #[test]
    fn virtual_hold_blocks_shorts_but_not_longs() {
        // Seed chosen so the first short is held (tails): the second short is
        // blocked by the hold, the long is still accepted.
        let i = inst(&[("0", "1"), ("0.2", "1.2"), ("0.5", "4.5")]);
        let mut tails_seed = None;
        for seed in 0..64 {
            if keyed_u64(seed, VIRTUAL_COIN_DOMAIN, 0) & 1 == 0 {
                tails_seed = Some(seed);
                break;
            }
        }
        let seed = tails_seed.expect("a tails seed exists");
        let r = virtual_algorithm(&i, None, seed).unwrap();
        assert_eq!(r.schedule.accepted_ids(), &[2]);
        assert_eq!(r.decisions[1].reason, Reason::VirtualHold);
    }

    #[test]
    fn virtual_hold_expires_at_its_deadline() {
        // Hold on [0,1); the short at [1,2) arrives exactly at expiry and
        // gets its own coin rather than a hold rejection.
        let i = inst(&[("0", "1"), ("1", "2")]);
        for seed in 0..64 {
            let r = virtual_algorithm(&i, Some(&int(3)), seed).unwrap();
            assert_ne!(r.decisions[1].reason, Reason::VirtualHold, "seed {seed}");
        }
    }
}
