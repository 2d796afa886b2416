//! Online interval scheduling with predictions, under irrevocable decisions.
//!
//! Intervals arrive in release order and each must be accepted or rejected on
//! the spot; accepted intervals may not overlap and the objective is the
//! total accepted length. This crate provides:
//!
//! - exact domain types and the offline optimum ([`domain`], [`offline`]);
//! - classic online baselines: greedy, blind advice following, and the
//!   randomized two-value rule ([`online`]);
//! - the one-shot switching frameworks that follow advice until it is
//!   provably wrong, then hand over to a classic algorithm ([`switching`]);
//! - the randomized merge of advice-following and greedy with its
//!   closed-form acceptance probabilities and performance envelope
//!   ([`smooth`]);
//! - advice synthesis, corruption, and the error metric ([`predictions`]);
//! - adaptive adversaries that realize the known lower bounds
//!   ([`adversary`]);
//! - Standard Workload Format trace ingestion ([`swf`]) and the experiment
//!   harness ([`experiment`]).
//!
//! All time arithmetic is exact rational arithmetic; randomized runs are
//! reproducible from a 64-bit seed.

pub mod adversary;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod offline;
pub mod online;
pub mod predictions;
pub mod rational;
pub mod record;
pub mod rng;
pub mod smooth;
pub mod swf;
pub mod switching;

pub use error::Error;

#[cfg(test)]
pub(crate) mod test_util {
    use crate::domain::{Instance, Interval};
    use crate::rational::parse_exact;

    pub fn iv(id: usize, release: &str, deadline: &str) -> Interval {
        Interval::new(
            id,
            parse_exact(release).unwrap(),
            parse_exact(deadline).unwrap(),
        )
    }

    pub fn inst(spans: &[(&str, &str)]) -> Instance {
        Instance::validate(
            spans
                .iter()
                .enumerate()
                .map(|(id, (r, d))| iv(id, r, d))
                .collect(),
        )
        .unwrap()
    }
}
