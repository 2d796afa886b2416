//! Experiment machinery: Monte Carlo estimation, theoretical bound checks,
//! the displacement-corruption sweep over a trace, and trade-off curve data.
//!
//! Monte Carlo runs are reproducible: trial `t` of a run seeded `s` uses the
//! derived seed `derive_seed(s, t)`, and trials are aggregated in index
//! order regardless of how they were scheduled across threads.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::domain::{BinaryPrediction, Instance};
use crate::error::Error;
use crate::offline::dp_opt;
use crate::online::{greedy, trust, virtual_long_length, VIRTUAL_COIN_DOMAIN};
use crate::predictions::{corrupt_by_displacement, prediction_error};
use crate::rational::{format_exact, to_f64, Rational};
use crate::record::BoundCheck;
use crate::rng::{derive_seed, keyed_u64, CoinThreshold};
use crate::smooth::{
    expectation_bound, robustness_coefficient, smooth_merge, smoothness_coefficient, MergeParams,
    MERGE_COIN_DOMAIN,
};

/// Sample mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl MonteCarlo {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            mean,
            std_err: (var / n).sqrt(),
            trials: values.len(),
        }
    }
}

/// Integer view of an instance: all times multiplied by the common
/// denominator. Lets the Monte Carlo inner loops run on plain `i64`s while
/// staying exact; `None` when the scaled times do not fit.
struct ScaledInstance {
    /// `(release, deadline)` in ticks, canonical order.
    ticks: Vec<(i64, i64)>,
    ids: Vec<usize>,
    denom: BigInt,
    scale: f64,
}

impl ScaledInstance {
    fn build(inst: &Instance) -> Option<Self> {
        let mut denom = BigInt::one();
        for iv in inst.intervals() {
            denom = denom.lcm(iv.release.denom());
            denom = denom.lcm(iv.deadline.denom());
        }
        let mut ticks = Vec::with_capacity(inst.len());
        let mut ids = Vec::with_capacity(inst.len());
        let mut total_length = 0i64;
        for iv in inst.intervals() {
            let r = Self::ticks_of(&denom, &iv.release)?;
            let d = Self::ticks_of(&denom, &iv.deadline)?;
            // Value sums are bounded by the total length; insist it fits too.
            total_length = total_length.checked_add(d.checked_sub(r)?)?;
            ticks.push((r, d));
            ids.push(iv.id);
        }
        let scale = denom.to_f64()?;
        Some(Self {
            ticks,
            ids,
            denom,
            scale,
        })
    }

    fn ticks_of(denom: &BigInt, r: &Rational) -> Option<i64> {
        (r.numer() * denom / r.denom()).to_i64()
    }

    /// Standalone greedy acceptance per position (releases are within i64,
    /// so `i64::MIN` is a safe empty watermark).
    fn greedy_flags(&self) -> Vec<bool> {
        let mut watermark = i64::MIN;
        self.ticks
            .iter()
            .map(|&(r, d)| {
                if r >= watermark {
                    watermark = d.max(watermark);
                    true
                } else {
                    false
                }
            })
            .collect()
    }
}

/// Expected value of the randomized merge, estimated over seeded trials.
pub fn smooth_merge_expectation(
    inst: &Instance,
    pred: &BinaryPrediction,
    params: &MergeParams,
    trials: usize,
    seed: u64,
) -> Result<MonteCarlo, Error> {
    pred.matches(inst)?;
    if let Some(scaled) = ScaledInstance::build(inst) {
        let greedy_flags = scaled.greedy_flags();
        let trust_threshold = CoinThreshold::from_probability(params.p_trust());
        let greedy_threshold = CoinThreshold::from_probability(params.p_greedy());
        let values: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let trial_seed = derive_seed(seed, t as u64);
                let mut watermark = i64::MIN;
                let mut total = 0i64;
                for (pos, &(r, d)) in scaled.ticks.iter().enumerate() {
                    if r < watermark {
                        continue;
                    }
                    let id = scaled.ids[pos];
                    let accept = match (pred.get(id), greedy_flags[pos]) {
                        (true, true) => true,
                        (false, false) => false,
                        (true, false) => trust_threshold.accepts(keyed_u64(
                            trial_seed,
                            MERGE_COIN_DOMAIN,
                            id as u64,
                        )),
                        (false, true) => greedy_threshold.accepts(keyed_u64(
                            trial_seed,
                            MERGE_COIN_DOMAIN,
                            id as u64,
                        )),
                    };
                    if accept {
                        watermark = d.max(watermark);
                        total += d - r;
                    }
                }
                total as f64 / scaled.scale
            })
            .collect();
        return Ok(MonteCarlo::from_values(&values));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let run = smooth_merge(inst, pred, params, derive_seed(seed, t as u64))
                .expect("inputs validated");
            to_f64(run.value())
        })
        .collect();
    Ok(MonteCarlo::from_values(&values))
}

/// Expected value of the randomized two-value rule.
pub fn virtual_expectation(
    inst: &Instance,
    long_len: Option<&Rational>,
    trials: usize,
    seed: u64,
) -> Result<MonteCarlo, Error> {
    let long = virtual_long_length(inst, long_len)?;
    let scaled = ScaledInstance::build(inst);
    let values: Vec<f64> = match &scaled {
        Some(scaled) => {
            let long_ticks = ScaledInstance::ticks_of(&scaled.denom, &long)
                .expect("long length fits after scaling");
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = derive_seed(seed, t as u64);
                    let mut watermark = i64::MIN;
                    let mut hold_until = i64::MIN;
                    let mut total = 0i64;
                    for (pos, &(r, d)) in scaled.ticks.iter().enumerate() {
                        if r < watermark {
                            continue;
                        }
                        if d - r == long_ticks {
                            watermark = d.max(watermark);
                            total += d - r;
                            continue;
                        }
                        if r < hold_until {
                            continue;
                        }
                        let id = scaled.ids[pos] as u64;
                        if keyed_u64(trial_seed, VIRTUAL_COIN_DOMAIN, id) & 1 == 1 {
                            watermark = d.max(watermark);
                            total += d - r;
                        } else {
                            hold_until = d;
                        }
                    }
                    total as f64 / scaled.scale
                })
                .collect()
        }
        None => (0..trials)
            .into_par_iter()
            .map(|t| {
                let run = crate::online::virtual_algorithm(
                    inst,
                    Some(&long),
                    derive_seed(seed, t as u64),
                )
                .expect("inputs validated");
                to_f64(run.value())
            })
            .collect(),
    };
    Ok(MonteCarlo::from_values(&values))
}

/// Which theoretical guarantees apply to a finished run.
#[derive(Debug, Clone)]
pub enum BoundProfile {
    Greedy,
    Trust,
    Virtual,
    TrustAndSwitchGreedy,
    SemiTrustAndSwitchGreedy { tau: Rational },
    SmoothMerge,
}

/// Exact bound checks for one run: the applicable guarantees with both
/// sides evaluated. Empty-instance runs only get the sanity check.
pub fn bound_checks(profile: &BoundProfile, inst: &Instance, value: &Rational) -> Vec<BoundCheck> {
    let opt = dp_opt(inst).total_length().clone();
    let mut checks = vec![BoundCheck::le("alg_le_opt", value.clone(), opt.clone())];
    let (Some(k), Some(delta)) = (inst.k(), inst.delta()) else {
        return checks;
    };
    let two = Rational::from_integer(2.into());
    match profile {
        BoundProfile::Greedy => {
            checks.push(BoundCheck::le(
                "opt_le_(delta+1)*greedy",
                opt.clone(),
                (delta + Rational::one()) * value,
            ));
            if inst.two_value() {
                checks.push(BoundCheck::le(
                    "opt_le_max(delta,2)*greedy",
                    opt.clone(),
                    delta.clone().max(two) * value,
                ));
            }
        }
        BoundProfile::TrustAndSwitchGreedy => {
            checks.push(BoundCheck::le(
                "opt_le_(delta+1)*alg+2k",
                opt.clone(),
                (delta + Rational::one()) * value + two.clone() * k,
            ));
            if inst.two_value() {
                checks.push(BoundCheck::le(
                    "opt_le_max(delta,2)*alg+k",
                    opt.clone(),
                    delta.clone().max(two) * value + k,
                ));
            }
        }
        BoundProfile::SemiTrustAndSwitchGreedy { tau } => {
            checks.push(BoundCheck::le(
                "opt_le_(delta+1)*alg+tau",
                opt.clone(),
                (delta + Rational::one()) * value + tau,
            ));
        }
        BoundProfile::Trust | BoundProfile::Virtual | BoundProfile::SmoothMerge => {}
    }
    checks
}

/// One grid row of the displacement sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    #[serde(with = "crate::rational::serde_exact")]
    pub d: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub eta: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub opt: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub trust: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub greedy: Rational,
    pub cells: Vec<SweepCell>,
}

/// Monte Carlo cell for one `(p_t, p_g)` pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepCell {
    pub params: MergeParams,
    pub mean: f64,
    pub std_err: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Number of equally spaced grid points for `d` in `(0, n]`; the
    /// undefined point `d = 0` is skipped.
    pub d_points: usize,
    /// Monte Carlo trials per cell.
    pub trials: usize,
    pub params: Vec<MergeParams>,
    pub seed: u64,
}

/// The displacement-corruption experiment: for each grid value of `d`, a
/// random `ceil(n/d)` of the intervals are stacked past the horizon, the
/// optimum of that perturbed instance becomes the advice, and every
/// algorithm then runs on the original arrivals.
pub fn displacement_sweep(inst: &Instance, cfg: &SweepConfig) -> Result<Vec<SweepRow>, Error> {
    if cfg.d_points < 2 {
        return Err(Error::BadParameter(
            "sweep needs at least 2 grid points".into(),
        ));
    }
    if inst.is_empty() {
        return Err(Error::BadParameter("sweep needs a non-empty trace".into()));
    }
    let n = Rational::from_integer(inst.len().into());
    let opt = dp_opt(inst).total_length().clone();
    let greedy_value = greedy(inst).value().clone();

    let mut rows = Vec::with_capacity(cfg.d_points);
    for i in 1..=cfg.d_points {
        let d = &n * Rational::new(i.into(), cfg.d_points.into());
        let row_seed = derive_seed(cfg.seed, i as u64);
        let (bits, _perturbed) = corrupt_by_displacement(inst, &d, row_seed)?;
        let eta = prediction_error(inst, &bits)?;
        let trust_value = trust(inst, &bits)?.value().clone();
        let mut cells = Vec::with_capacity(cfg.params.len());
        for (cell_idx, params) in cfg.params.iter().enumerate() {
            let mc = smooth_merge_expectation(
                inst,
                &bits,
                params,
                cfg.trials,
                derive_seed(row_seed, cell_idx as u64),
            )?;
            let bound = to_f64(&expectation_bound(&opt, &greedy_value, &eta, params));
            cells.push(SweepCell {
                params: params.clone(),
                mean: mc.mean,
                std_err: mc.std_err,
                bound,
                holds: mc.mean >= bound - 4.0 * mc.std_err,
            });
        }
        rows.push(SweepRow {
            d,
            eta,
            opt: opt.clone(),
            trust: trust_value,
            greedy: greedy_value.clone(),
            cells,
        });
    }
    Ok(rows)
}

/// Renders sweep rows as CSV, one column group per parameter pair.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str("d,eta,opt,trust,greedy");
    if let Some(first) = rows.first() {
        for cell in &first.cells {
            let tag = format!(
                "pt{}_pg{}",
                to_f64(cell.params.p_trust()),
                to_f64(cell.params.p_greedy())
            );
            out.push_str(&format!(
                ",smoothmerge_mean_{tag},smoothmerge_stderr_{tag},bound_{tag},holds_{tag}"
            ));
        }
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{:.6},{},{},{}",
            format_exact(&row.d),
            to_f64(&row.eta),
            format_exact(&row.opt),
            format_exact(&row.trust),
            format_exact(&row.greedy),
        ));
        for cell in &row.cells {
            out.push_str(&format!(
                ",{:.6},{:.6},{:.6},{}",
                cell.mean, cell.std_err, cell.bound, cell.holds
            ));
        }
        out.push('\n');
    }
    out
}

/// Smoothness/robustness coefficients over a `(p_t, p_g)` grid, the data
/// behind the trade-off curve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TradeoffPoint {
    #[serde(with = "crate::rational::serde_exact")]
    pub p_trust: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub p_greedy: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub smoothness: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub robustness: Rational,
}

pub fn tradeoff_grid(steps: usize) -> Result<Vec<TradeoffPoint>, Error> {
    if steps == 0 {
        return Err(Error::BadParameter("grid needs at least one step".into()));
    }
    let mut points = Vec::with_capacity((steps + 1) * (steps + 1));
    for i in 0..=steps {
        for j in 0..=steps {
            let p_trust = Rational::new(i.into(), steps.into());
            let p_greedy = Rational::new(j.into(), steps.into());
            let params = MergeParams::new(p_trust.clone(), p_greedy.clone())?;
            points.push(TradeoffPoint {
                p_trust,
                p_greedy,
                smoothness: smoothness_coefficient(&params),
                robustness: robustness_coefficient(&params),
            });
        }
    }
    Ok(points)
}

pub fn tradeoff_to_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from("pt,pg,smoothness_coef,robustness_coef\n");
    for p in points {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6}\n",
            to_f64(&p.p_trust),
            to_f64(&p.p_greedy),
            to_f64(&p.smoothness),
            to_f64(&p.robustness)
        ));
    }
    out
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// One-sided permutation test for a negative monotone trend: the p-value of
/// observing a Spearman correlation at least as negative under the null of
/// no association. Deterministic given the seed.
pub fn spearman_negative_trend(
    xs: &[f64],
    ys: &[f64],
    permutations: usize,
    seed: u64,
) -> (f64, f64) {
    let rho = spearman_rho(xs, ys);
    let mut shuffled: Vec<f64> = ys.to_vec();
    let mut rng = crate::rng::SplitMix64::new(seed);
    let mut at_least_as_extreme = 0usize;
    for _ in 0..permutations {
        for i in (1..shuffled.len()).rev() {
            let j = rng.gen_range((i + 1) as u64) as usize;
            shuffled.swap(i, j);
        }
        if spearman_rho(xs, &shuffled) <= rho {
            at_least_as_extreme += 1;
        }
    }
    let p = (1 + at_least_as_extreme) as f64 / (permutations + 1) as f64;
    (rho, p)
}
