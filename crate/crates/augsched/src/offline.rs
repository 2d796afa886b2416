//! Exact offline optimum: an O(n log n) dynamic program used by switch tests
//! and the experiment harness, plus an exhaustive oracle for small instances.
//!
//! Both return the same canonical solution: among all maximum-total-length
//! feasible subsets, the one whose sorted id list is lexicographically
//! smallest. Since ids are arrival ranks and arrivals are release-ordered,
//! that canonical solution can be built by one forward value-preserving
//! greedy pass over the suffix-DP table.

use num_traits::Zero;

use crate::domain::{Instance, Schedule};
use crate::error::Error;
use crate::rational::Rational;

/// Largest instance the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Suffix table: `best[i]` is the maximum total length achievable using
/// intervals `i..` of the canonical (release-ordered) sequence.
fn suffix_best(inst: &Instance) -> Vec<Rational> {
    let ivs = inst.intervals();
    let n = ivs.len();
    let mut best = vec![Rational::zero(); n + 1];
    for i in (0..n).rev() {
        // First index whose release is at or past this deadline; half-open
        // intervals make a touching successor compatible.
        let next = ivs.partition_point(|x| x.release < ivs[i].deadline);
        let take = ivs[i].length() + &best[next];
        best[i] = take.max(best[i + 1].clone());
    }
    best
}

/// Maximum total length only; skips reconstruction.
pub fn dp_opt_value(inst: &Instance) -> Rational {
    suffix_best(inst)
        .into_iter()
        .next()
        .unwrap_or_else(Rational::zero)
}

/// Maximum-total-length non-overlapping subset via the weighted-interval
/// dynamic program (weight = length), returned as the canonical schedule.
pub fn dp_opt(inst: &Instance) -> Schedule {
    let ivs = inst.intervals();
    let best = suffix_best(inst);
    let opt = best.first().cloned().unwrap_or_else(Rational::zero);

    // Forward pass: keep an interval iff doing so still attains the optimum.
    // All chosen intervals have earlier releases than the candidates that
    // follow, so feasibility against the chosen set is a single watermark.
    let mut chosen = Vec::new();
    let mut value = Rational::zero();
    let mut watermark: Option<Rational> = None;
    for (i, iv) in ivs.iter().enumerate() {
        if let Some(w) = &watermark {
            if iv.release < *w {
                continue; // conflicts with a chosen interval
            }
        }
        let next = ivs.partition_point(|x| x.release < iv.deadline);
        let with_this = &value + iv.length() + &best[next];
        debug_assert!(with_this <= opt);
        if with_this == opt {
            value += iv.length();
            watermark = Some(match watermark.take() {
                Some(w) => w.max(iv.deadline.clone()),
                None => iv.deadline.clone(),
            });
            chosen.push(i);
        }
    }
    debug_assert_eq!(value, opt);

    let refs: Vec<_> = chosen.iter().map(|&i| &ivs[i]).collect();
    Schedule::new(&refs).expect("dp reconstruction is feasible")
}

/// Exhaustive maximum over all feasible subsets; the independent oracle for
/// `dp_opt`. Enumerates include-first in id order, which visits subsets in
/// lexicographic order of their sorted id lists, so keeping the first
/// strictly-better subset reproduces the dp tie-break.
pub fn brute_force_opt(inst: &Instance) -> Result<Schedule, Error> {
    let n = inst.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let ivs = inst.intervals();

    // Pairwise conflict masks; the subset walk below is then pure integers.
    let mut conflict = vec![0u32; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if ivs[i].overlaps(&ivs[j]) {
                conflict[i] |= 1 << j;
                conflict[j] |= 1 << i;
            }
        }
    }

    struct Search<'a> {
        ivs: &'a [crate::domain::Interval],
        conflict: &'a [u32],
        best_value: Rational,
        best_mask: u32,
    }

    impl Search<'_> {
        fn walk(&mut self, idx: usize, mask: u32, blocked: u32, value: Rational) {
            if idx == self.ivs.len() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best_mask = mask;
                }
                return;
            }
            if blocked & (1 << idx) == 0 {
                self.walk(
                    idx + 1,
                    mask | (1 << idx),
                    blocked | self.conflict[idx],
                    value.clone() + self.ivs[idx].length(),
                );
            }
            self.walk(idx + 1, mask, blocked, value);
        }
    }

    let mut search = Search {
        ivs,
        conflict: &conflict,
        best_value: Rational::zero(),
        best_mask: 0,
    };
    search.walk(0, 0, 0, Rational::zero());

    let refs: Vec<_> = (0..n)
        .filter(|&i| search.best_mask & (1 << i) != 0)
        .map(|i| &ivs[i])
        .collect();
    Schedule::new(&refs)
}
