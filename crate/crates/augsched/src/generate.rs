//! Seeded generators for fuzz suites and synthetic workloads. All output is
//! a pure function of the seed, with integer times so exact arithmetic
//! stays cheap.

use crate::domain::{BinaryPrediction, Instance, Interval};
use crate::rational::{int, Rational};
use crate::rng::SplitMix64;

/// Random instance with `1..=max_n` intervals, integer releases in
/// `0..horizon` and integer lengths in `1..=max_len`.
pub fn random_instance(rng: &mut SplitMix64, max_n: usize, horizon: u64, max_len: u64) -> Instance {
    let n = 1 + rng.gen_range(max_n as u64) as usize;
    let mut spans: Vec<(u64, u64)> = (0..n)
        .map(|_| {
            let release = rng.gen_range(horizon);
            let length = 1 + rng.gen_range(max_len);
            (release, length)
        })
        .collect();
    spans.sort();
    let intervals = spans
        .into_iter()
        .enumerate()
        .map(|(id, (r, len))| Interval::new(id, int(r as i64), int((r + len) as i64)))
        .collect();
    Instance::validate(intervals).expect("generated instance is valid")
}

/// Random two-value instance: lengths are `short` and `short * multiplier`
/// with both values guaranteed present (needs `max_n >= 2`).
pub fn random_two_value_instance(
    rng: &mut SplitMix64,
    max_n: usize,
    horizon: u64,
    short: u64,
    multiplier: u64,
) -> Instance {
    debug_assert!(max_n >= 2 && multiplier >= 2);
    let n = 2 + rng.gen_range((max_n - 1) as u64) as usize;
    let long = short * multiplier;
    let mut lengths: Vec<u64> = (0..n)
        .map(|i| {
            // Force one of each, then mix.
            if i == 0 {
                short
            } else if i == 1 {
                long
            } else if rng.gen_bool() {
                short
            } else {
                long
            }
        })
        .collect();
    // Shuffle which arrival gets which length.
    for i in (1..lengths.len()).rev() {
        let j = rng.gen_range((i + 1) as u64) as usize;
        lengths.swap(i, j);
    }
    let mut spans: Vec<(u64, u64)> = lengths
        .into_iter()
        .map(|len| (rng.gen_range(horizon), len))
        .collect();
    spans.sort();
    let intervals = spans
        .into_iter()
        .enumerate()
        .map(|(id, (r, len))| Interval::new(id, int(r as i64), int((r + len) as i64)))
        .collect();
    Instance::validate(intervals).expect("generated instance is valid")
}

/// Arbitrary advice bits, feasible or not.
pub fn random_prediction(rng: &mut SplitMix64, n: usize) -> BinaryPrediction {
    BinaryPrediction::new((0..n).map(|_| rng.gen_bool()).collect())
}

/// Advice whose marked set is pairwise non-overlapping: random bits filtered
/// by a forward sweep in arrival order.
pub fn random_feasible_prediction(rng: &mut SplitMix64, inst: &Instance) -> BinaryPrediction {
    let mut bits = vec![false; inst.len()];
    let mut watermark: Option<Rational> = None;
    for iv in inst.intervals() {
        if !rng.gen_bool() {
            continue;
        }
        if watermark.as_ref().is_some_and(|w| iv.release < *w) {
            continue;
        }
        bits[iv.id] = true;
        watermark = Some(match watermark.take() {
            Some(w) => w.max(iv.deadline.clone()),
            None => iv.deadline.clone(),
        });
    }
    BinaryPrediction::new(bits)
}

/// Bursty workload shaped like a scheduler trace: inter-arrival gaps mix
/// idle stretches with bursts, lengths mix many short jobs with occasional
/// long ones. Used as the stand-in when no archive trace is on disk.
pub fn synthetic_workload(seed: u64, n: usize) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let mut release = 0u64;
    let intervals = (0..n)
        .map(|id| {
            let gap = match rng.gen_range(10) {
                0..=5 => rng.gen_range(3),      // burst: simultaneous-ish arrivals
                6..=8 => 3 + rng.gen_range(10), // steady
                _ => 20 + rng.gen_range(60),    // idle stretch
            };
            release += gap;
            let length = match rng.gen_range(10) {
                0..=6 => 1 + rng.gen_range(8),   // short job
                7..=8 => 10 + rng.gen_range(40), // medium
                _ => 60 + rng.gen_range(240),    // long job
            };
            Interval::new(id, int(release as i64), int((release + length) as i64))
        })
        .collect();
    Instance::validate(intervals).expect("generated instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_instance(&mut SplitMix64::new(5), 20, 50, 8);
        let b = random_instance(&mut SplitMix64::new(5), 20, 50, 8);
        assert_eq!(a, b);
        assert_eq!(synthetic_workload(9, 100), synthetic_workload(9, 100));
    }

    #[test]
    fn two_value_instances_have_both_lengths() {
        for seed in 0..50 {
            let i = random_two_value_instance(&mut SplitMix64::new(seed), 12, 40, 2, 3);
            assert!(i.two_value(), "seed {seed}");
            assert_eq!(i.delta(), Some(&crate::rational::int(3)));
        }
    }

    #[test]
    fn feasible_predictions_are_feasible() {
        for seed in 0..50 {
            let mut rng = SplitMix64::new(seed);
            let i = random_instance(&mut rng, 30, 60, 10);
            let pred = random_feasible_prediction(&mut rng, &i);
            let marked: Vec<_> = i.intervals().iter().filter(|iv| pred.get(iv.id)).collect();
            for (idx, a) in marked.iter().enumerate() {
                for b in &marked[idx + 1..] {
                    assert!(!a.overlaps(b), "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn synthetic_workload_has_mixed_lengths_and_overlap() {
        let i = synthetic_workload(1, 500);
        assert!(i.delta().unwrap() > &crate::rational::int(10));
        let g = crate::online::greedy(&i);
        let opt = crate::offline::dp_opt_value(&i);
        assert!(g.value() < &opt, "workload must not be trivially disjoint");
    }
}
