//! Adaptive lower-bound constructions.
//!
//! Each game hands the algorithm a full predicted instance up front, then
//! emits the real intervals one by one, shaping releases around the
//! algorithm's own decisions. The realized instance is always two-value
//! with the advertised parameters, and every honest algorithm lands in one
//! of the two proof cases:
//!
//! - accept the opening interval and get locked out of everything else, or
//! - reject it and face an adaptive run of shorts followed by one long,
//!   where each accepted short buries all later arrivals under it.

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::domain::{BinaryPrediction, FullPrediction, Instance, Interval};
use crate::error::Error;
use crate::offline::{brute_force_opt, dp_opt_value, BRUTE_FORCE_LIMIT};
use crate::online::{
    virtual_long_length, AcceptedWatermark, GreedyState, TrustState, VirtualState,
};
use crate::predictions::perfect_prediction;
use crate::rational::{ratio, Rational};
use crate::record::{Action, OnlineAlgorithm, OnlineDecision};
use crate::smooth::{MergeParams, SmoothMergeState};
use crate::switching::{semi_trust_and_switch_stepper, trust_and_switch_stepper, ClassicAlgorithm};

/// Construction size guard; the games build `ceil(delta)^2 + 2` intervals.
const MAX_GAME_INTERVALS: usize = 100_000;

/// Which proof case the game realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CaseTag {
    /// The opening interval was accepted; the predicted instance played out.
    Case1,
    /// The opening interval was rejected and a later short was accepted.
    Case2AcceptedShort,
    /// The opening interval was rejected and no short was ever accepted.
    Case2NoShort,
}

/// Transcript of one adversary game.
#[derive(Debug, Clone, Serialize)]
pub struct GameOutcome {
    pub lemma: &'static str,
    pub algorithm: String,
    pub seed: u64,
    pub case: CaseTag,
    #[serde(with = "crate::rational::serde_exact")]
    pub alg_value: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub opt_value: Rational,
    pub predicted: Instance,
    pub realized: Instance,
    pub decisions: Vec<OnlineDecision>,
}

impl GameOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game outcome serializes")
    }
}

fn check_game_parameters(k: &Rational, delta: &Rational) -> Result<usize, Error> {
    if *k <= Rational::zero() {
        return Err(Error::BadParameter(format!("k must be positive, got {k}")));
    }
    if *delta <= Rational::one() {
        return Err(Error::BadParameter(format!(
            "delta must exceed 1, got {delta}"
        )));
    }
    let ceil_delta = delta
        .ceil()
        .to_integer()
        .to_usize()
        .filter(|c| c.saturating_mul(*c) + 2 <= MAX_GAME_INTERVALS)
        .ok_or_else(|| Error::BadParameter(format!("delta {delta} too large for a game")))?;
    Ok(ceil_delta)
}

/// The predicted instance of the two-value lower bound: a long interval, a
/// chain of `ceil(delta) - 1` disjoint shorts inside it, a block of
/// mutually overlapping shorts packed at its end, and a final long released
/// where the first one ends. `epsilon` is in units of the short length and
/// must satisfy `0 < epsilon < 1 + (1 - ceil(delta)) / delta` so the chain
/// completes before the block.
pub fn lb_two_value_prediction(
    k: &Rational,
    delta: &Rational,
    epsilon: &Rational,
) -> Result<FullPrediction, Error> {
    let ceil_delta = check_game_parameters(k, delta)?;
    let ceil_rat = Rational::from_integer(ceil_delta.into());
    let limit = Rational::one() + (Rational::one() - &ceil_rat) / delta;
    if *epsilon <= Rational::zero() || *epsilon >= limit {
        return Err(Error::BadEpsilon {
            epsilon: epsilon.to_string(),
            limit: limit.to_string(),
            delta: delta.to_string(),
        });
    }
    let short = k / delta;
    let eps = epsilon * &short;

    let mut pairs: Vec<(Rational, Rational)> = Vec::with_capacity(ceil_delta * ceil_delta + 2);
    pairs.push((Rational::zero(), k.clone()));
    // Chain of disjoint shorts offset by eps, starting at eps.
    let mut release = eps.clone();
    for _ in 0..ceil_delta.saturating_sub(1) {
        pairs.push((release.clone(), &release + &short));
        release = &release + &short + &eps;
    }
    // Block of identical shorts ending at k - eps.
    let block_start = k - &eps - &short;
    let block_end = k - &eps;
    for _ in 0..(ceil_delta * ceil_delta - ceil_delta + 1) {
        pairs.push((block_start.clone(), block_end.clone()));
    }
    // Final long, touching the end of the block.
    pairs.push((block_end.clone(), &block_end + k));

    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    FullPrediction::new(pairs)
}

/// The predicted instance of the semi-trusting lower bound: an opening
/// short, a long overlapping it, `ceil(delta)^2 - 1` stacked shorts and a
/// final long, all crammed so that every pair conflicts and the offline
/// optimum is exactly one long interval.
pub fn lb_semi_trust_prediction(k: &Rational, delta: &Rational) -> Result<FullPrediction, Error> {
    let ceil_delta = check_game_parameters(k, delta)?;
    let short = k / delta;
    let quarter = &short / ratio(4, 1);

    let mut pairs: Vec<(Rational, Rational)> = Vec::with_capacity(ceil_delta * ceil_delta + 2);
    pairs.push((Rational::zero(), short.clone()));
    pairs.push((quarter.clone(), &quarter + k));
    let stacked = &quarter + &quarter;
    for _ in 0..(ceil_delta * ceil_delta - 1) {
        pairs.push((stacked.clone(), &stacked + &short));
    }
    let last = &stacked + &quarter;
    pairs.push((last.clone(), &last + k));

    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    FullPrediction::new(pairs)
}

/// Drives one game. `opening_long` distinguishes the two constructions: the
/// two-value game opens with the long interval, the semi-trusting game with
/// a short one.
fn play_game(
    lemma: &'static str,
    predicted: Instance,
    opening_long: bool,
    algorithm: Box<dyn OnlineAlgorithm>,
    k: &Rational,
    delta: &Rational,
    seed: u64,
) -> Result<GameOutcome, Error> {
    let ceil_delta = check_game_parameters(k, delta)?;
    let short = k / delta;
    let mut alg = algorithm;
    let algorithm_name = alg.algorithm_name();

    let mut realized: Vec<Interval> = Vec::new();
    let mut decisions: Vec<OnlineDecision> = Vec::new();
    let mut accepted = AcceptedWatermark::default();
    let mut alg_value = Rational::zero();

    let emit = |iv: Interval,
                alg: &mut Box<dyn OnlineAlgorithm>,
                realized: &mut Vec<Interval>,
                decisions: &mut Vec<OnlineDecision>,
                accepted: &mut AcceptedWatermark,
                alg_value: &mut Rational|
     -> Result<bool, Error> {
        let (action, reason) = alg.on_arrival(&iv);
        if action == Action::Accept {
            if accepted.conflicts(&iv) {
                return Err(Error::ProtocolViolation(format!(
                    "interval {} accepted despite conflicting with an earlier acceptance",
                    iv.id
                )));
            }
            accepted.accept(&iv);
            *alg_value += iv.length();
        }
        decisions.push(OnlineDecision {
            interval_id: iv.id,
            action,
            reason,
        });
        realized.push(iv);
        Ok(action == Action::Accept)
    };

    // Opening interval, identical to the predicted one.
    let opening = predicted.intervals()[0].clone();
    debug_assert_eq!(opening_long, opening.length() == *k);
    let took_opening = emit(
        opening,
        &mut alg,
        &mut realized,
        &mut decisions,
        &mut accepted,
        &mut alg_value,
    )?;

    let case;
    if took_opening {
        // Case 1: the rest of the predicted instance plays out unchanged.
        case = CaseTag::Case1;
        for iv in &predicted.intervals()[1..] {
            emit(
                iv.clone(),
                &mut alg,
                &mut realized,
                &mut decisions,
                &mut accepted,
                &mut alg_value,
            )?;
        }
    } else {
        // Case 2: ceil(delta)^2 shorts then one long, released adaptively.
        // A rejected interval pushes the next release past its deadline by
        // one short length; the first acceptance pins every later release
        // inside the accepted interval.
        let mut accepted_short = false;
        let mut next_release = &realized[0].deadline + &short;
        let mut pinned: Option<Rational> = None;
        let total_shorts = ceil_delta * ceil_delta;
        for step in 0..=total_shorts {
            let is_long = step == total_shorts;
            let length = if is_long { k.clone() } else { short.clone() };
            let release = pinned.clone().unwrap_or_else(|| next_release.clone());
            let iv = Interval::new(realized.len(), release.clone(), &release + &length);
            let took = emit(
                iv,
                &mut alg,
                &mut realized,
                &mut decisions,
                &mut accepted,
                &mut alg_value,
            )?;
            if took && !is_long {
                accepted_short = true;
            }
            if pinned.is_none() {
                if took {
                    // Overlap all later arrivals with this acceptance.
                    pinned = Some(&release + &short / ratio(2, 1));
                } else {
                    next_release = &release + &length + &short;
                }
            }
        }
        case = if accepted_short {
            CaseTag::Case2AcceptedShort
        } else {
            CaseTag::Case2NoShort
        };
    }

    let realized = Instance::validate(realized)?;
    debug_assert_eq!(realized.len(), ceil_delta * ceil_delta + 2);
    debug_assert!(realized.two_value());
    let opt_value = if realized.len() <= BRUTE_FORCE_LIMIT {
        brute_force_opt(&realized)?.total_length().clone()
    } else {
        dp_opt_value(&realized)
    };

    Ok(GameOutcome {
        lemma,
        algorithm: algorithm_name,
        seed,
        case,
        alg_value,
        opt_value,
        predicted,
        realized,
        decisions,
    })
}

/// Plays the two-value lower-bound game. The factory receives the predicted
/// instance and the seed, and returns the online algorithm under test.
pub fn run_lb_two_value<F>(
    factory: F,
    k: &Rational,
    delta: &Rational,
    epsilon: &Rational,
    seed: u64,
) -> Result<GameOutcome, Error>
where
    F: FnOnce(&Instance, u64) -> Result<Box<dyn OnlineAlgorithm>, Error>,
{
    let predicted = lb_two_value_prediction(k, delta, epsilon)?.to_instance()?;
    let alg = factory(&predicted, seed)?;
    play_game("two-value", predicted, true, alg, k, delta, seed)
}

/// Plays the semi-trusting lower-bound game (opening short interval).
pub fn run_lb_semi_trust<F>(
    factory: F,
    k: &Rational,
    delta: &Rational,
    seed: u64,
) -> Result<GameOutcome, Error>
where
    F: FnOnce(&Instance, u64) -> Result<Box<dyn OnlineAlgorithm>, Error>,
{
    let predicted = lb_semi_trust_prediction(k, delta)?.to_instance()?;
    let alg = factory(&predicted, seed)?;
    play_game("semitrust", predicted, false, alg, k, delta, seed)
}

/// Algorithms playable against the adversaries, addressable by name.
/// Advice-driven players derive their bits from the offline optimum of the
/// predicted instance they are handed.
#[derive(Debug, Clone)]
pub enum AdversaryPlayer {
    Greedy,
    Trust,
    Virtual,
    TrustAndSwitch(ClassicAlgorithm),
    SemiTrustAndSwitch(ClassicAlgorithm),
    SmoothMerge(MergeParams),
}

impl AdversaryPlayer {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "greedy" => Some(Self::Greedy),
            "trust" => Some(Self::Trust),
            "virtual" => Some(Self::Virtual),
            "tas" => Some(Self::TrustAndSwitch(ClassicAlgorithm::Greedy)),
            "semitas" => Some(Self::SemiTrustAndSwitch(ClassicAlgorithm::Greedy)),
            "smoothmerge" => Some(Self::SmoothMerge(
                MergeParams::new(ratio(1, 2), ratio(1, 2)).expect("valid defaults"),
            )),
            _ => None,
        }
    }

    pub fn instantiate(
        &self,
        predicted: &Instance,
        seed: u64,
    ) -> Result<Box<dyn OnlineAlgorithm>, Error> {
        let advice = || -> BinaryPrediction { perfect_prediction(predicted) };
        match self {
            Self::Greedy => Ok(Box::new(GreedyState::new())),
            Self::Trust => Ok(Box::new(TrustState::new(&advice()))),
            Self::Virtual => {
                let long = virtual_long_length(predicted, None)?;
                Ok(Box::new(VirtualState::new(long, seed)))
            }
            Self::TrustAndSwitch(classic) => {
                trust_and_switch_stepper(&advice(), classic, predicted, seed)
            }
            Self::SemiTrustAndSwitch(classic) => {
                let k = predicted
                    .k()
                    .ok_or_else(|| Error::BadParameter("empty predicted instance".into()))?;
                let delta = predicted.delta().expect("non-empty instance");
                // Midpoint of the interesting regime (k/delta, k).
                let tau = (k / delta + k) / ratio(2, 1);
                semi_trust_and_switch_stepper(&advice(), &tau, classic, predicted, seed)
            }
            Self::SmoothMerge(params) => {
                Ok(Box::new(SmoothMergeState::new(&advice(), params, seed)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn predicted_instance_matches_construction() {
        let pred = lb_two_value_prediction(&int(2), &int(2), &ratio(1, 5)).unwrap();
        assert_eq!(pred.len(), 6);
        let inst = pred.to_instance().unwrap();
        assert!(inst.two_value());
        assert_eq!(inst.k(), Some(&int(2)));
        assert_eq!(inst.delta(), Some(&int(2)));
        let opt = brute_force_opt(&inst).unwrap();
        // (ceil(delta) - 1) * k/delta + k = 1 + 2.
        assert_eq!(opt.total_length(), &int(3));
    }

    #[test]
    fn predicted_instance_count_for_delta_three() {
        let pred = lb_two_value_prediction(&int(3), &int(3), &ratio(1, 5)).unwrap();
        assert_eq!(pred.len(), 11);
        let inst = pred.to_instance().unwrap();
        let lengths: std::collections::BTreeSet<_> =
            inst.intervals().iter().map(|iv| iv.length()).collect();
        assert_eq!(lengths.len(), 2);
        assert!(lengths.contains(&int(1)));
        assert!(lengths.contains(&int(3)));
        let opt = brute_force_opt(&inst).unwrap();
        assert_eq!(opt.total_length(), &int(5)); // 2 * 1 + 3
    }

    #[test]
    fn epsilon_bounds_are_enforced() {
        assert!(matches!(
            lb_two_value_prediction(&int(2), &int(2), &ratio(1, 2)),
            Err(Error::BadEpsilon { .. })
        ));
        assert!(matches!(
            lb_two_value_prediction(&int(2), &int(2), &int(0)),
            Err(Error::BadEpsilon { .. })
        ));
        assert!(matches!(
            lb_two_value_prediction(&int(2), &int(1), &ratio(1, 5)),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn semi_predicted_instance_is_a_clique_worth_k() {
        let pred = lb_semi_trust_prediction(&int(4), &int(2)).unwrap();
        let inst = pred.to_instance().unwrap();
        assert_eq!(inst.len(), 6);
        assert!(inst.two_value());
        let opt = brute_force_opt(&inst).unwrap();
        assert_eq!(opt.total_length(), &int(4));
        assert_eq!(opt.len(), 1);
    }

    #[test]
    fn greedy_lands_in_case_one_with_the_stated_ratio() {
        for (k, delta) in [(int(2), int(2)), (int(3), int(3)), (int(5), int(5))] {
            let out = run_lb_two_value(
                |p, s| AdversaryPlayer::Greedy.instantiate(p, s),
                &k,
                &delta,
                &ratio(1, 10),
                0,
            )
            .unwrap();
            assert_eq!(out.case, CaseTag::Case1);
            assert_eq!(out.alg_value, k);
            let ceil_delta = delta.ceil();
            let expected_ratio = Rational::one() + (ceil_delta - Rational::one()) / delta.clone();
            assert_eq!(&out.opt_value / &out.alg_value, expected_ratio);
        }
    }

    #[test]
    fn short_taker_in_case_two_gets_bounded() {
        // Rejects the opening long, then accepts the first short it can.
        struct ShortTaker {
            accepted: AcceptedWatermark,
            long: Rational,
            first: bool,
        }
        impl OnlineAlgorithm for ShortTaker {
            fn algorithm_name(&self) -> String {
                "short-taker".into()
            }
            fn on_arrival(&mut self, iv: &Interval) -> (Action, crate::record::Reason) {
                let reason = crate::record::Reason::Policy;
                if std::mem::take(&mut self.first) || iv.length() == self.long {
                    return (Action::Reject, reason);
                }
                if self.accepted.conflicts(iv) {
                    return (Action::Reject, crate::record::Reason::Conflict);
                }
                self.accepted.accept(iv);
                (Action::Accept, reason)
            }
        }
        let (k, delta) = (int(2), int(2));
        let out = run_lb_two_value(
            |_p, _s| {
                Ok(Box::new(ShortTaker {
                    accepted: AcceptedWatermark::default(),
                    long: int(2),
                    first: true,
                }))
            },
            &k,
            &delta,
            &ratio(1, 5),
            0,
        )
        .unwrap();
        assert_eq!(out.case, CaseTag::Case2AcceptedShort);
        assert_eq!(out.alg_value, int(1)); // k / delta
        assert!(out.opt_value >= int(2)); // at least k
        assert!(out.opt_value >= &delta * &out.alg_value + &k);
    }

    #[test]
    fn total_refuser_faces_a_huge_optimum() {
        struct RejectAll;
        impl OnlineAlgorithm for RejectAll {
            fn algorithm_name(&self) -> String {
                "reject-all".into()
            }
            fn on_arrival(&mut self, _iv: &Interval) -> (Action, crate::record::Reason) {
                (Action::Reject, crate::record::Reason::Policy)
            }
        }
        let (k, delta) = (int(3), int(3));
        let out = run_lb_two_value(
            |_p, _s| Ok(Box::new(RejectAll)),
            &k,
            &delta,
            &ratio(1, 5),
            0,
        )
        .unwrap();
        assert_eq!(out.case, CaseTag::Case2NoShort);
        assert!(out.alg_value.is_zero());
        // All ceil(delta)^2 shorts are disjoint: opt >= ceil(delta)^2 * k/delta.
        assert!(out.opt_value >= int(9));
    }

    #[test]
    fn semi_game_greedy_realizes_ratio_delta() {
        let out = run_lb_semi_trust(
            |p, s| AdversaryPlayer::Greedy.instantiate(p, s),
            &int(4),
            &int(2),
            0,
        )
        .unwrap();
        assert_eq!(out.case, CaseTag::Case1);
        assert_eq!(out.alg_value, int(2)); // the opening short, k/delta
        assert_eq!(out.opt_value, int(4)); // one long
        assert_eq!(&out.opt_value / &out.alg_value, int(2));
    }

    #[test]
    fn semi_game_trust_pays_the_short_loss() {
        let out = run_lb_semi_trust(
            |p, s| AdversaryPlayer::Trust.instantiate(p, s),
            &int(4),
            &int(2),
            0,
        )
        .unwrap();
        // Advice skips the opening short, so the game goes adaptive.
        assert_ne!(out.case, CaseTag::Case1);
        let short = ratio(4, 2);
        assert!(out.opt_value >= int(2) * &out.alg_value + short);
    }

    #[test]
    fn protocol_violations_are_reported() {
        struct AcceptAll;
        impl OnlineAlgorithm for AcceptAll {
            fn algorithm_name(&self) -> String {
                "accept-all".into()
            }
            fn on_arrival(&mut self, _iv: &Interval) -> (Action, crate::record::Reason) {
                (Action::Accept, crate::record::Reason::Policy)
            }
        }
        let result = run_lb_two_value(
            |_p, _s| Ok(Box::new(AcceptAll)),
            &int(2),
            &int(2),
            &ratio(1, 5),
            0,
        );
        assert!(matches!(result, Err(Error::ProtocolViolation(_))));
    }

    #[test]
    fn realized_instances_validate_with_advertised_counts() {
        for delta in [int(2), int(3), ratio(5, 2)] {
            for name in ["greedy", "trust", "tas", "virtual"] {
                let player = AdversaryPlayer::by_name(name).unwrap();
                let out = run_lb_two_value(
                    |p, s| player.instantiate(p, s),
                    &int(5),
                    &delta,
                    &ratio(1, 10),
                    3,
                )
                .unwrap();
                let ceil: usize = delta.ceil().to_integer().to_usize().unwrap();
                assert_eq!(out.realized.len(), ceil * ceil + 2, "{name} delta {delta}");
                assert!(out.realized.two_value());
            }
        }
    }
}
