//! Domain types: intervals, instances, predictions, schedules and the
//! conflict graph shared by every algorithm and test.
//!
//! Intervals are half-open `[release, deadline)`: two intervals conflict iff
//! `r_a < d_b && r_b < d_a`, so touching intervals do not conflict. Instances
//! are kept in canonical arrival order (non-decreasing release, ties broken by
//! id) and their derived parameters `k` (maximum length) and `delta`
//! (maximum / minimum length) are always recomputed, never trusted from input.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::Error;
use crate::rational::{serde_exact, Rational};

/// One job: a half-open time interval whose length is also its weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub id: usize,
    #[serde(with = "serde_exact")]
    pub release: Rational,
    #[serde(with = "serde_exact")]
    pub deadline: Rational,
}

impl Interval {
    pub fn new(id: usize, release: Rational, deadline: Rational) -> Self {
        Self {
            id,
            release,
            deadline,
        }
    }

    pub fn length(&self) -> Rational {
        &self.deadline - &self.release
    }

    /// Half-open overlap test.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.release < other.deadline && other.release < self.deadline
    }
}

/// Direction-tagged bound for the sub-instance operator: `AtOrBefore(t)` keeps
/// times `<= t`, `After(t)` keeps times `> t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeBound {
    AtOrBefore(Rational),
    After(Rational),
}

impl TimeBound {
    fn admits(&self, time: &Rational) -> bool {
        match self {
            TimeBound::AtOrBefore(t) => time <= t,
            TimeBound::After(t) => time > t,
        }
    }
}

/// A validated, release-ordered interval sequence with derived parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    intervals: Vec<Interval>,
    k: Option<Rational>,
    delta: Option<Rational>,
    two_value: bool,
}

impl Instance {
    /// Validates raw intervals: positive lengths, non-negative releases and
    /// unique ids. Sorts stably by `(release, id)` and recomputes `k`,
    /// `delta` and the two-value flag. An empty input is legal; `k` and
    /// `delta` are then absent.
    pub fn validate(raw: Vec<Interval>) -> Result<Self, Error> {
        use num_traits::Zero;
        let mut seen = BTreeSet::new();
        for iv in &raw {
            if iv.deadline <= iv.release {
                return Err(Error::NonPositiveLength { id: iv.id });
            }
            if iv.release < Rational::zero() {
                return Err(Error::NegativeRelease { id: iv.id });
            }
            if !seen.insert(iv.id) {
                return Err(Error::DuplicateId { id: iv.id });
            }
        }
        let mut intervals = raw;
        intervals.sort_by(|a, b| a.release.cmp(&b.release).then(a.id.cmp(&b.id)));
        Ok(Self::from_sorted(intervals))
    }

    /// Internal constructor for interval lists already in canonical order
    /// with invariants known to hold (restriction output, fixtures).
    pub(crate) fn from_sorted(intervals: Vec<Interval>) -> Self {
        let mut lengths: Vec<Rational> = intervals.iter().map(Interval::length).collect();
        lengths.sort();
        lengths.dedup();
        let k = lengths.last().cloned();
        let delta = match (lengths.first(), lengths.last()) {
            (Some(min), Some(max)) => Some(max / min),
            _ => None,
        };
        Self {
            two_value: lengths.len() == 2,
            intervals,
            k,
            delta,
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Maximum interval length; absent on the empty instance.
    pub fn k(&self) -> Option<&Rational> {
        self.k.as_ref()
    }

    /// Ratio of maximum to minimum length; absent on the empty instance.
    pub fn delta(&self) -> Option<&Rational> {
        self.delta.as_ref()
    }

    /// True iff exactly two distinct lengths are present.
    pub fn two_value(&self) -> bool {
        self.two_value
    }

    /// The sub-instance operator. Ids are retained; derived parameters are
    /// recomputed for the restricted set. Both bounds combine with AND.
    pub fn restrict(&self, release: Option<&TimeBound>, deadline: Option<&TimeBound>) -> Instance {
        let kept: Vec<Interval> = self
            .intervals
            .iter()
            .filter(|iv| {
                release.is_none_or(|b| b.admits(&iv.release))
                    && deadline.is_none_or(|b| b.admits(&iv.deadline))
            })
            .cloned()
            .collect();
        Instance::from_sorted(kept)
    }

    pub fn interval_by_id(&self, id: usize) -> Option<&Interval> {
        self.intervals.iter().find(|iv| iv.id == id)
    }

    /// Reads the JSON instance format `{"intervals":[{"id":..,"release":"..","deadline":".."}]}`.
    /// Ids must be the arrival ranks `0..n-1` so that prediction bit vectors
    /// align with them.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let inst: Instance = serde_json::from_str(text)?;
        for (pos, iv) in inst.intervals.iter().enumerate() {
            if iv.id != pos {
                return Err(Error::BadParameter(format!(
                    "interval ids must be arrival ranks 0..{}, found id {} at rank {}",
                    inst.intervals.len() - 1,
                    iv.id,
                    pos
                )));
            }
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    intervals: Vec<Interval>,
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        InstanceRepr {
            intervals: self.intervals.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = InstanceRepr::deserialize(de)?;
        Instance::validate(raw.intervals).map_err(serde::de::Error::custom)
    }
}

/// Per-interval accept/reject advice, indexed by interval id. A prediction
/// may mark overlapping intervals; consumers must detect that themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryPrediction {
    bits: Vec<bool>,
}

impl BinaryPrediction {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_ids(n: usize, accepted: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &id in accepted {
            bits[id] = true;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, id: usize) -> bool {
        self.bits.get(id).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn matches(&self, inst: &Instance) -> Result<(), Error> {
        if self.bits.len() != inst.len() {
            return Err(Error::PredictionLengthMismatch {
                expected: inst.len(),
                got: self.bits.len(),
            });
        }
        Ok(())
    }

    /// JSON bit array, e.g. `[1,0,1]`.
    pub fn to_json(&self) -> String {
        let bits: Vec<u8> = self.bits.iter().map(|&b| u8::from(b)).collect();
        serde_json::to_string(&bits).expect("bit array serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let bits: Vec<u8> = serde_json::from_str(text)?;
        Ok(Self {
            bits: bits.into_iter().map(|b| b != 0).collect(),
        })
    }
}

/// Full foresight advice: predicted `(release, deadline)` per interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullPrediction {
    pub pairs: Vec<PredictedSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedSpan {
    #[serde(with = "serde_exact")]
    pub release: Rational,
    #[serde(with = "serde_exact")]
    pub deadline: Rational,
}

impl FullPrediction {
    pub fn new(pairs: Vec<(Rational, Rational)>) -> Result<Self, Error> {
        for (i, (r, d)) in pairs.iter().enumerate() {
            if d <= r {
                return Err(Error::NonPositiveLength { id: i });
            }
        }
        Ok(Self {
            pairs: pairs
                .into_iter()
                .map(|(release, deadline)| PredictedSpan { release, deadline })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Materializes the predicted intervals as an instance, ids in arrival order.
    pub fn to_instance(&self) -> Result<Instance, Error> {
        let raw = self
            .pairs
            .iter()
            .enumerate()
            .map(|(id, span)| Interval::new(id, span.release.clone(), span.deadline.clone()))
            .collect();
        Instance::validate(raw)
    }
}

/// A feasible (pairwise non-overlapping) accepted subset with its total length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    accepted_ids: Vec<usize>,
    #[serde(with = "serde_exact")]
    total_length: Rational,
}

impl Schedule {
    pub fn empty() -> Self {
        use num_traits::Zero;
        Self {
            accepted_ids: Vec::new(),
            total_length: Rational::zero(),
        }
    }

    /// Builds a schedule from accepted intervals, checking pairwise
    /// non-overlap and summing lengths exactly.
    pub fn new(accepted: &[&Interval]) -> Result<Self, Error> {
        use num_traits::Zero;
        let mut sorted: Vec<&Interval> = accepted.to_vec();
        sorted.sort_by(|a, b| a.release.cmp(&b.release).then(a.id.cmp(&b.id)));
        let mut total = Rational::zero();
        for pair in sorted.windows(2) {
            if pair[0].overlaps(pair[1]) {
                return Err(Error::ProtocolViolation(format!(
                    "intervals {} and {} overlap",
                    pair[0].id, pair[1].id
                )));
            }
        }
        for iv in &sorted {
            total += iv.length();
        }
        Ok(Self {
            accepted_ids: sorted.iter().map(|iv| iv.id).collect(),
            total_length: total,
        })
    }

    pub fn from_ids(inst: &Instance, ids: &[usize]) -> Result<Self, Error> {
        let accepted: Vec<&Interval> = ids
            .iter()
            .map(|&id| {
                inst.interval_by_id(id)
                    .ok_or_else(|| Error::BadParameter(format!("unknown interval id {id}")))
            })
            .collect::<Result<_, _>>()?;
        Schedule::new(&accepted)
    }

    /// Accepted ids in release order.
    pub fn accepted_ids(&self) -> &[usize] {
        &self.accepted_ids
    }

    pub fn contains(&self, id: usize) -> bool {
        self.accepted_ids.contains(&id)
    }

    pub fn total_length(&self) -> &Rational {
        &self.total_length
    }

    pub fn len(&self) -> usize {
        self.accepted_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted_ids.is_empty()
    }
}

/// Which side of a conflict graph a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

/// One node of a conflict graph; an interval present in both schedules
/// yields two distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictNode {
    pub side: Side,
    pub interval_id: usize,
    #[serde(with = "serde_exact")]
    pub release: Rational,
    #[serde(with = "serde_exact")]
    pub deadline: Rational,
}

impl ConflictNode {
    pub fn length(&self) -> Rational {
        &self.deadline - &self.release
    }

    fn overlaps(&self, other: &ConflictNode) -> bool {
        self.release < other.deadline && other.release < self.deadline
    }
}

/// Bipartite conflict graph over two feasible schedules, with its connected
/// components. An edge joins an A-node and a B-node iff their intervals
/// intersect; nodes within one side never conflict because each side is a
/// feasible schedule.
#[derive(Debug, Clone, Serialize)]
pub struct ConflictGraph {
    pub nodes_a: Vec<ConflictNode>,
    pub nodes_b: Vec<ConflictNode>,
    /// Pairs of indices `(a, b)` into `nodes_a` / `nodes_b`.
    pub edges: Vec<(usize, usize)>,
    /// Connected components, ordered by earliest release; nodes within a
    /// component are ordered by `(release, deadline, side, id)`.
    pub components: Vec<Vec<ConflictNode>>,
}

/// Builds the conflict graph of two feasible schedules over one instance.
pub fn conflict_graph(inst: &Instance, a: &Schedule, b: &Schedule) -> Result<ConflictGraph, Error> {
    let node = |side: Side, id: usize| -> Result<ConflictNode, Error> {
        let iv = inst
            .interval_by_id(id)
            .ok_or_else(|| Error::BadParameter(format!("unknown interval id {id}")))?;
        Ok(ConflictNode {
            side,
            interval_id: id,
            release: iv.release.clone(),
            deadline: iv.deadline.clone(),
        })
    };
    let nodes_a: Vec<ConflictNode> = a
        .accepted_ids()
        .iter()
        .map(|&id| node(Side::A, id))
        .collect::<Result<_, _>>()?;
    let nodes_b: Vec<ConflictNode> = b
        .accepted_ids()
        .iter()
        .map(|&id| node(Side::B, id))
        .collect::<Result<_, _>>()?;

    let mut edges = Vec::new();
    for (i, na) in nodes_a.iter().enumerate() {
        for (j, nb) in nodes_b.iter().enumerate() {
            if na.overlaps(nb) {
                edges.push((i, j));
            }
        }
    }

    // Union-find over A-nodes (0..|A|) and B-nodes (|A|..|A|+|B|).
    let total = nodes_a.len() + nodes_b.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for &(i, j) in &edges {
        let (ra, rb) = (find(&mut parent, i), find(&mut parent, nodes_a.len() + j));
        if ra != rb {
            parent[ra] = rb;
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<ConflictNode>> = Default::default();
    for (idx, node) in nodes_a.iter().chain(nodes_b.iter()).enumerate() {
        let root = find(&mut parent, idx);
        groups.entry(root).or_default().push(node.clone());
    }
    let mut components: Vec<Vec<ConflictNode>> = groups.into_values().collect();
    let side_rank = |s: Side| matches!(s, Side::B) as u8;
    for comp in &mut components {
        comp.sort_by(|x, y| {
            x.release
                .cmp(&y.release)
                .then(x.deadline.cmp(&y.deadline))
                .then(side_rank(x.side).cmp(&side_rank(y.side)))
                .then(x.interval_id.cmp(&y.interval_id))
        });
    }
    components.sort_by(|x, y| {
        x[0].release
            .cmp(&y[0].release)
            .then(x[0].interval_id.cmp(&y[0].interval_id))
    });

    Ok(ConflictGraph {
        nodes_a,
        nodes_b,
        edges,
        components,
    })
}
