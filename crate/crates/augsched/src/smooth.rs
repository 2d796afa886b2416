//! Randomized merge of advice-following and greedy acceptance.
//!
//! The merge simulates both strategies in parallel and independently of its
//! own state: the advice simulation accepts exactly the marked intervals,
//! the greedy simulation is the standalone greedy over the raw arrivals.
//! An arrival conflicting with the merged schedule is rejected outright;
//! unanimous simulated decisions are followed; a disagreement is resolved by
//! a biased coin (`p_t` for advice-only, `p_g` for greedy-only).
//!
//! For disagreement chains in the conflict graph of the two simulated
//! schedules the per-interval acceptance probabilities have a closed form,
//! and the expected value is bounded below by
//! `max{ |Opt| * (1 - eta) * p_t * (1 - p_g),
//!       (p_g - p_t p_g) / (1 - p_t p_g) * |Greedy| }`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::domain::{BinaryPrediction, ConflictNode, Instance, Interval, Side};
use crate::error::Error;
use crate::online::AcceptedWatermark;
use crate::rational::Rational;
use crate::record::{drive, Action, OnlineAlgorithm, Reason, RunRecord};
use crate::rng::{keyed_u64, CoinThreshold};

/// Coin-flip domain tag for the merge.
pub(crate) const MERGE_COIN_DOMAIN: u64 = 0x6d72;

/// Acceptance probabilities for the two disagreement branches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeParams {
    #[serde(with = "crate::rational::serde_exact")]
    p_trust: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    p_greedy: Rational,
}

impl MergeParams {
    pub fn new(p_trust: Rational, p_greedy: Rational) -> Result<Self, Error> {
        for (label, p) in [("p_t", &p_trust), ("p_g", &p_greedy)] {
            if *p < Rational::zero() || *p > Rational::one() {
                return Err(Error::BadParameter(format!(
                    "{label} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(Self { p_trust, p_greedy })
    }

    pub fn p_trust(&self) -> &Rational {
        &self.p_trust
    }

    pub fn p_greedy(&self) -> &Rational {
        &self.p_greedy
    }
}

/// Online stepper for the merge; usable both for batch runs and against
/// adaptive adversaries (the greedy simulation runs incrementally).
pub struct SmoothMergeState {
    bits: BinaryPrediction,
    trust_threshold: CoinThreshold,
    greedy_threshold: CoinThreshold,
    seed: u64,
    accepted: AcceptedWatermark,
    greedy_sim: AcceptedWatermark,
}

impl SmoothMergeState {
    pub fn new(pred: &BinaryPrediction, params: &MergeParams, seed: u64) -> Self {
        Self {
            bits: pred.clone(),
            trust_threshold: CoinThreshold::from_probability(&params.p_trust),
            greedy_threshold: CoinThreshold::from_probability(&params.p_greedy),
            seed,
            accepted: AcceptedWatermark::default(),
            greedy_sim: AcceptedWatermark::default(),
        }
    }
}

impl OnlineAlgorithm for SmoothMergeState {
    fn algorithm_name(&self) -> String {
        "smoothmerge".into()
    }

    fn on_arrival(&mut self, iv: &Interval) -> (Action, Reason) {
        let greedy_accepts = !self.greedy_sim.conflicts(iv);
        if greedy_accepts {
            self.greedy_sim.accept(iv);
        }
        let trust_accepts = self.bits.get(iv.id);

        if self.accepted.conflicts(iv) {
            return (Action::Reject, Reason::Conflict);
        }
        let (accept, reason) = match (trust_accepts, greedy_accepts) {
            (true, true) => (true, Reason::Policy),
            (false, false) => (false, Reason::Policy),
            (true, false) => (
                self.trust_threshold
                    .accepts(keyed_u64(self.seed, MERGE_COIN_DOMAIN, iv.id as u64)),
                Reason::CoinFlip,
            ),
            (false, true) => (
                self.greedy_threshold.accepts(keyed_u64(
                    self.seed,
                    MERGE_COIN_DOMAIN,
                    iv.id as u64,
                )),
                Reason::CoinFlip,
            ),
        };
        if accept {
            self.accepted.accept(iv);
            (Action::Accept, reason)
        } else {
            (Action::Reject, reason)
        }
    }
}

/// One seeded run of the merge with its full decision trace.
pub fn smooth_merge(
    inst: &Instance,
    pred: &BinaryPrediction,
    params: &MergeParams,
    seed: u64,
) -> Result<RunRecord, Error> {
    pred.matches(inst)?;
    drive(
        inst,
        Box::new(SmoothMergeState::new(pred, params, seed)),
        seed,
    )
}

/// Closed-form acceptance probability and recursion depth for one node of a
/// disagreement chain.
#[derive(Debug, Clone, Serialize)]
pub struct NodeProbability {
    pub side: Side,
    pub interval_id: usize,
    #[serde(with = "crate::rational::serde_exact")]
    pub probability: Rational,
    /// Number of advice-side nodes at or before this one; the exponent in
    /// the closed form for advice-side nodes.
    pub depth: usize,
}

/// Acceptance probabilities along a disagreement chain.
#[derive(Debug, Clone, Serialize)]
pub struct ChainProbabilities {
    pub nodes: Vec<NodeProbability>,
}

/// Computes acceptance probabilities for a conflict-graph component that is
/// a disagreement chain: release-ordered nodes that strictly alternate
/// between the greedy side (first) and the advice side, each conflicting
/// with exactly its neighbours. Components of any other shape are rejected.
///
/// The base case is `P[G_0] = p_g`; each later node accepts iff its
/// predecessor did not, scaled by its branch probability, which yields
/// `P[T_i] = (p_t - p_t p_g) * (1 - (p_t p_g)^x_i) / (1 - p_t p_g)` for the
/// advice side at depth `x_i`.
pub fn chain_probabilities(
    component: &[ConflictNode],
    params: &MergeParams,
) -> Result<ChainProbabilities, Error> {
    if component.is_empty() {
        return Err(Error::NotAChain("empty component".into()));
    }
    for pair in component.windows(2) {
        if pair[0].release > pair[1].release {
            return Err(Error::NotAChain("nodes not in release order".into()));
        }
    }
    if component[0].side != Side::A {
        return Err(Error::NotAChain(
            "earliest node is not on the greedy side".into(),
        ));
    }
    for (pos, node) in component.iter().enumerate() {
        let expected = if pos % 2 == 0 { Side::A } else { Side::B };
        if node.side != expected {
            return Err(Error::NotAChain(format!(
                "sides do not alternate at position {pos}"
            )));
        }
    }
    for i in 0..component.len() {
        for j in (i + 1)..component.len() {
            let overlap = component[i].release < component[j].deadline
                && component[j].release < component[i].deadline;
            if j == i + 1 && !overlap {
                return Err(Error::NotAChain(format!(
                    "consecutive nodes {i} and {j} do not conflict"
                )));
            }
            if j > i + 1 && overlap {
                return Err(Error::NotAChain(format!(
                    "non-consecutive nodes {i} and {j} conflict"
                )));
            }
        }
    }

    let mut nodes = Vec::with_capacity(component.len());
    let mut prev = Rational::zero(); // probability of the previous node
    for (pos, node) in component.iter().enumerate() {
        let branch = if node.side == Side::A {
            &params.p_greedy
        } else {
            &params.p_trust
        };
        let probability = if pos == 0 {
            params.p_greedy.clone()
        } else {
            (Rational::one() - &prev) * branch
        };
        prev = probability.clone();
        nodes.push(NodeProbability {
            side: node.side,
            interval_id: node.interval_id,
            probability,
            depth: pos.div_ceil(2),
        });
    }
    Ok(ChainProbabilities { nodes })
}

/// Closed form for an advice-side node at recursion depth `x`.
pub fn trust_side_closed_form(params: &MergeParams, depth: usize) -> Rational {
    let pt_pg = &params.p_trust * &params.p_greedy;
    if pt_pg == Rational::one() {
        // p_t = p_g = 1: every disagreement branch accepts; depth is moot.
        return Rational::zero();
    }
    let mut power = Rational::one();
    for _ in 0..depth {
        power *= &pt_pg;
    }
    (&params.p_trust - &pt_pg) * (Rational::one() - power) / (Rational::one() - pt_pg)
}

/// The guaranteed lower bound on the merge's expected value:
/// smoothness from the advice side, robustness from the greedy side.
/// Requires `0 <= eta <= 1`. The robustness coefficient is taken as 0 in
/// the degenerate case `p_t = p_g = 1`.
pub fn expectation_bound(
    opt_value: &Rational,
    greedy_value: &Rational,
    eta: &Rational,
    params: &MergeParams,
) -> Rational {
    let smoothness = opt_value
        * (Rational::one() - eta)
        * &params.p_trust
        * (Rational::one() - &params.p_greedy);
    let robustness = robustness_coefficient(params) * greedy_value;
    smoothness.max(robustness)
}

/// `p_t * (1 - p_g)`, the factor multiplying `|Opt| * (1 - eta)`.
pub fn smoothness_coefficient(params: &MergeParams) -> Rational {
    &params.p_trust * (Rational::one() - &params.p_greedy)
}

/// `(p_g - p_t p_g) / (1 - p_t p_g)`, the factor multiplying `|Greedy|`;
/// 0 in the degenerate case `p_t p_g = 1`.
pub fn robustness_coefficient(params: &MergeParams) -> Rational {
    let pt_pg = &params.p_trust * &params.p_greedy;
    if pt_pg == Rational::one() {
        return Rational::zero();
    }
    (&params.p_greedy - &pt_pg) / (Rational::one() - pt_pg)
}
