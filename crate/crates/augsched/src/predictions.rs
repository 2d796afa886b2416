//! Advice synthesis and quality measurement: perfect advice, the
//! displacement corruption used by the trace experiments, and the error
//! metric `eta = (|Opt| - |Trust|) / |Opt|`.

use num_traits::Zero;

use crate::domain::{BinaryPrediction, Instance, Interval};
use crate::error::Error;
use crate::offline::dp_opt;
use crate::online::trust;
use crate::rational::Rational;
use crate::rng::SplitMix64;

/// Indicator vector of the canonical offline optimum.
pub fn perfect_prediction(inst: &Instance) -> BinaryPrediction {
    BinaryPrediction::from_ids(inst.len(), dp_opt(inst).accepted_ids())
}

/// Fraction of the optimum lost by following the advice; 0 on perfect
/// advice, 1 when the advice earns nothing, and 0 by convention on the
/// empty instance. Always in `[0, 1]` because the advice-following run
/// emits a feasible schedule.
pub fn prediction_error(inst: &Instance, pred: &BinaryPrediction) -> Result<Rational, Error> {
    pred.matches(inst)?;
    let opt = dp_opt(inst).total_length().clone();
    if opt.is_zero() {
        return Ok(Rational::zero());
    }
    let trust_value = trust(inst, pred)?.value().clone();
    Ok((&opt - trust_value) / opt)
}

/// Displacement corruption: picks `ceil(n / d)` intervals uniformly at
/// random, moves them (lengths preserved) to a shared release past the
/// original horizon so they all conflict pairwise, and returns the
/// indicator of the perturbed instance's optimum re-keyed to the original
/// ids, together with the perturbed instance for audit. The advice is then
/// evaluated against the *original* arrivals: only the advice errs, not the
/// input. Deterministic given the seed.
pub fn corrupt_by_displacement(
    inst: &Instance,
    d: &Rational,
    seed: u64,
) -> Result<(BinaryPrediction, Instance), Error> {
    let n = inst.len();
    if *d <= Rational::zero() || *d > Rational::from_integer(n.into()) {
        return Err(Error::BadParameter(format!(
            "displacement parameter d must satisfy 0 < d <= n = {n}, got {d}"
        )));
    }
    let moved_count = {
        use num_traits::ToPrimitive;
        (Rational::from_integer(n.into()) / d)
            .ceil()
            .to_integer()
            .to_usize()
            .ok_or_else(|| Error::BadParameter(format!("d too small: {d}")))?
            .min(n)
    };

    let mut rng = SplitMix64::new(seed);
    let mut moved = rng.sample_indices(n, moved_count);
    moved.sort_unstable();

    let horizon = inst
        .intervals()
        .iter()
        .map(|iv| &iv.deadline)
        .max()
        .expect("non-empty instance")
        .clone();
    let base = horizon + inst.k().expect("non-empty instance");

    let mut perturbed: Vec<Interval> = inst.intervals().to_vec();
    for &pos in &moved {
        let length = perturbed[pos].length();
        perturbed[pos].release = base.clone();
        perturbed[pos].deadline = &base + length;
    }
    let perturbed = Instance::validate(perturbed)?;
    let bits = BinaryPrediction::from_ids(n, dp_opt(&perturbed).accepted_ids());
    Ok((bits, perturbed))
}
