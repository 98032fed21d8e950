//! Recursive partition K-means.
//!
//! Weighted Lloyd runs over the representatives of successively thinner grid
//! levels. Each level starts from the centroids the previous level ended
//! with; the first usable level (one with at least `K` cells) starts from
//! `K` representatives drawn uniformly at random.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_sequence, PartitionSequence};
use crate::model::{full_error, std_error, CentroidSet, Dataset, DistanceCounter, WeightedPoints};
use crate::weighted_lloyd::{weighted_lloyd, WLParams, WLResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpkmParams {
    /// Deepest grid level `m`.
    pub depth: u32,
    pub k: usize,
    /// Stop when `δ(C_{i-1}, C_i)` falls below this; `0` disables the test.
    pub displacement_threshold: f64,
    pub wl: WLParams,
    pub seed: u64,
    /// Compute the full-data error and standardized error after every step.
    /// This work is booked on the evaluation counter.
    pub evaluate: bool,
}

impl RpkmParams {
    pub fn new(k: usize, depth: u32, seed: u64) -> Self {
        Self {
            depth,
            k,
            displacement_threshold: 0.0,
            wl: WLParams::default(),
            seed,
            evaluate: false,
        }
    }

    pub fn evaluated(mut self) -> Self {
        self.evaluate = true;
        self
    }
}

/// Metrics of one RPKM step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub level: u32,
    /// `|P_i|`.
    pub cells: usize,
    /// `l_i`.
    pub wl_iters: usize,
    /// Distance evaluations spent in this step.
    pub dist_evals: u64,
    /// Distance evaluations of all steps up to and including this one.
    pub cumulative_dist_evals: u64,
    /// `E_{P_i}(C_i)`.
    pub centroid_error: f64,
    /// `E(C_i)` over the whole dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_error: Option<f64>,
    /// `ρ` of `C_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    /// `δ(C_{i-1}, C_i)`; absent on the first step.
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RpkmResult {
    pub centroids: CentroidSet,
    /// The random representatives the first step started from.
    pub initial_centroids: CentroidSet,
    pub per_step: Vec<StepRecord>,
    /// Weighted Lloyd output of each step, aligned with `per_step`.
    pub runs: Vec<WLResult>,
    /// First level with `|P_i| ≥ K`.
    pub start_level: u32,
    pub total_dist_evals: u64,
    pub eval_dist_evals: u64,
}

/// `K` distinct points chosen uniformly without replacement, in draw order.
pub fn forgy_init<P: WeightedPoints + ?Sized, R: Rng + ?Sized>(
    points: &P,
    k: usize,
    rng: &mut R,
) -> Result<CentroidSet> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if points.len() < k {
        return Err(Error::invalid(format!(
            "cannot pick {k} distinct representatives from {}",
            points.len()
        )));
    }
    let picks = index::sample(rng, points.len(), k).into_vec();
    CentroidSet::from_indices(points, &picks)
}

/// `max_j ‖c_j − c'_j‖²`, matching centroids by index.
pub fn displacement(previous: &CentroidSet, current: &CentroidSet) -> Result<f64> {
    if previous.k() != current.k() || previous.dim() != current.dim() {
        return Err(Error::invalid(format!(
            "centroid sets differ in shape: {}x{} vs {}x{}",
            previous.k(),
            previous.dim(),
            current.k(),
            current.dim()
        )));
    }
    Ok(previous
        .iter()
        .zip(current.iter())
        .map(|(a, b)| crate::model::sq_dist(a, b))
        .fold(0.0, f64::max))
}

/// Builds levels `1..=depth` and runs RPKM over them.
pub fn rpkm(dataset: &Dataset, params: &RpkmParams) -> Result<RpkmResult> {
    validate(dataset, params)?;
    let seq = build_sequence(dataset, params.depth)?;
    rpkm_on_sequence(dataset, &seq, params)
}

fn validate(dataset: &Dataset, params: &RpkmParams) -> Result<()> {
    if params.k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if params.depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    if dataset.len() < params.k {
        return Err(Error::invalid(format!(
            "{} points cannot form {} clusters",
            dataset.len(),
            params.k
        )));
    }
    if params.displacement_threshold.is_nan() || params.displacement_threshold < 0.0 {
        return Err(Error::invalid("displacement threshold must be non-negative"));
    }
    Ok(())
}

/// RPKM over an already built partition sequence of `dataset`.
pub fn rpkm_on_sequence(
    dataset: &Dataset,
    seq: &PartitionSequence,
    params: &RpkmParams,
) -> Result<RpkmResult> {
    validate(dataset, params)?;
    let depth = params.depth.min(seq.depth());
    let start_level = (1..=depth)
        .find(|&i| seq.level(i).len() >= params.k)
        .ok_or_else(|| Error::NoUsableLevel {
            k: params.k,
            largest: seq.level(depth).len(),
        })?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let initial = forgy_init(seq.level(start_level), params.k, &mut rng)?;

    let mut counter = DistanceCounter::new();
    let mut eval_counter = DistanceCounter::new();
    let mut per_step = Vec::new();
    let mut runs = Vec::new();
    let mut current = initial.clone();

    for level in start_level..=depth {
        let before = counter.count();
        let run = weighted_lloyd(seq.level(level), &current, &params.wl, &mut counter)?;
        let delta = if level > start_level {
            Some(displacement(&current, &run.centroids)?)
        } else {
            None
        };
        let (full, rho) = if params.evaluate {
            let full = full_error(dataset, &run.centroids, &mut eval_counter)?;
            let rho = std_error(dataset, &run.centroids, &params.wl, &mut eval_counter)?.rho;
            (Some(full), Some(rho))
        } else {
            (None, None)
        };
        per_step.push(StepRecord {
            level,
            cells: seq.level(level).len(),
            wl_iters: run.iterations,
            dist_evals: counter.count() - before,
            cumulative_dist_evals: counter.count(),
            centroid_error: run.final_error(),
            full_error: full,
            std_error: rho,
            delta,
        });
        current = run.centroids.clone();
        runs.push(run);
        if params.displacement_threshold > 0.0
            && delta.is_some_and(|d| d < params.displacement_threshold)
        {
            break;
        }
    }

    Ok(RpkmResult {
        centroids: current,
        initial_centroids: initial,
        per_step,
        runs,
        start_level,
        total_dist_evals: counter.count(),
        eval_dist_evals: eval_counter.count(),
    })
}
