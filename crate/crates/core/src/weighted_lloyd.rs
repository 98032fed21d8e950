//! Lloyd iterations over weighted points.
//!
//! A run alternates the assignment step (clustering induced by centroids)
//! and the update step (centroids induced by a clustering), producing
//!
//! ```text
//! C_0 → G_0 → C_1 → G_1 → … → C_l → G_l
//! ```
//!
//! and the error trace `E(C_0), E(G_0), E(C_1), E(G_1), …, E(C_l)`, which
//! never increases: the centers of mass minimize the clustering error of a
//! fixed clustering, and the nearest-centroid rule minimizes the centroid
//! error of fixed centroids.

use crate::error::{Error, Result};
use crate::model::{
    assign, own_cluster_error, sq_dist, update_centroids, weighted_sum, Assignment, CentroidSet,
    DistanceCounter, WeightedPoints,
};

/// Denominator floor for the relative stopping test.
pub const ERROR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WLParams {
    /// Stop once the centroid error drops by no more than this fraction.
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    /// Keep every clustering `G_0 … G_{l-1}` in [`WLResult::history`].
    pub keep_history: bool,
}

impl Default for WLParams {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-9,
            max_iterations: 1000,
            keep_history: false,
        }
    }
}

impl WLParams {
    pub fn with_history(mut self) -> Self {
        self.keep_history = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rel_tolerance.is_nan() || self.rel_tolerance < 0.0 {
            return Err(Error::invalid("rel_tolerance must be non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WLResult {
    /// `C_l`.
    pub centroids: CentroidSet,
    /// `G_l`, the clustering induced by `C_l`.
    pub assignment: Assignment,
    /// `G_{l-1}`, the clustering whose centers of mass are `C_l`.
    pub source_assignment: Assignment,
    /// `l ≥ 1`: number of update/assignment rounds after the initial assignment.
    pub iterations: usize,
    /// `E(C_0), E(G_0), E(C_1), …, E(G_{l-1}), E(C_l)`; length `2l + 1`.
    pub error_trace: Vec<f64>,
    pub distance_evals: u64,
    /// Passes of [`repair_empty_clusters`], each costing one extra assignment.
    pub repairs: usize,
    /// `G_0 … G_{l-1}` when requested.
    pub history: Option<Vec<Assignment>>,
}

impl WLResult {
    /// `E(C_0)`.
    pub fn initial_error(&self) -> f64 {
        self.error_trace[0]
    }

    /// `E(C_l)`.
    pub fn final_error(&self) -> f64 {
        *self.error_trace.last().expect("trace is never empty")
    }
}

/// Result of one repair pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Repaired {
    pub assignment: Assignment,
    pub centroids: CentroidSet,
    /// Squared distance of every point to its (new) nearest centroid.
    pub distances: Vec<f64>,
}

/// Re-seeds empty clusters at the points contributing most to the error.
///
/// Each empty cluster, in index order, takes the not yet claimed point with
/// the largest `w · ‖x − c_assigned‖²`; afterwards every point is reassigned
/// (`len · K` evaluations). With no empty cluster the inputs come back
/// unchanged and nothing is booked. Coincident points can leave a cluster
/// empty even after the pass.
pub fn repair_empty_clusters<P: WeightedPoints + ?Sized>(
    points: &P,
    assignment: &Assignment,
    centroids: &CentroidSet,
    counter: &mut DistanceCounter,
) -> Result<Repaired> {
    let k = centroids.k();
    if points.len() < k {
        return Err(Error::UnresolvableEmptyCluster {
            points: points.len(),
            k,
        });
    }
    let labels = assignment.labels();
    let own: Vec<f64> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(points.point(i), centroids.centroid(l)))
        .collect();
    let sizes = assignment.sizes(k);
    if sizes.iter().all(|&s| s > 0) {
        return Ok(Repaired {
            assignment: assignment.clone(),
            centroids: centroids.clone(),
            distances: own,
        });
    }
    reseed(points, labels, &own, centroids, counter)
}

fn reseed<P: WeightedPoints + ?Sized>(
    points: &P,
    labels: &[usize],
    own: &[f64],
    centroids: &CentroidSet,
    counter: &mut DistanceCounter,
) -> Result<Repaired> {
    let k = centroids.k();
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);

    let mut by_contribution: Vec<usize> = (0..points.len()).collect();
    let contribution = |i: usize| points.weight(i) * own[i];
    // descending contribution, lower index first on ties
    by_contribution.sort_by(|&a, &b| contribution(b).total_cmp(&contribution(a)).then(a.cmp(&b)));

    let mut next = centroids.clone();
    let mut claimed = by_contribution.into_iter();
    for (j, _) in sizes.iter().enumerate().filter(|(_, &s)| s == 0) {
        let i = claimed.next().ok_or(Error::UnresolvableEmptyCluster {
            points: points.len(),
            k,
        })?;
        next.centroid_mut(j).copy_from_slice(points.point(i));
    }
    let (labels, distances) = assign(points, &next, counter);
    Ok(Repaired {
        assignment: Assignment::new(labels, k)?,
        centroids: next,
        distances,
    })
}

fn has_empty(labels: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    labels.iter().for_each(|&l| seen[l] = true);
    seen.contains(&false)
}

/// Weighted Lloyd's algorithm seeded at `initial`.
///
/// Stops after the round in which the clustering did not change, the
/// centroid error fell by at most `rel_tolerance` (relative), or
/// `max_iterations` rounds. Books `len · K` evaluations per assignment step:
/// one initial step, one per round, one per repair pass.
pub fn weighted_lloyd<P: WeightedPoints + ?Sized>(
    points: &P,
    initial: &CentroidSet,
    params: &WLParams,
    counter: &mut DistanceCounter,
) -> Result<WLResult> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyInput("no representatives"));
    }
    if points.dim() != initial.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            got: initial.dim(),
        });
    }
    let k = initial.k();
    if points.len() < k {
        return Err(Error::UnresolvableEmptyCluster {
            points: points.len(),
            k,
        });
    }
    let start = counter.count();
    let mut repairs = 0;

    // Step 0
    let mut centroids = initial.clone();
    let (mut labels, mut dists) = assign(points, &centroids, counter);
    if has_empty(&labels, k) {
        let r = reseed(points, &labels, &dists, &centroids, counter)?;
        repairs += 1;
        centroids = r.centroids;
        labels = r.assignment.into_labels();
        dists = r.distances;
    }
    let mut current_error = weighted_sum(points, &dists);
    let mut trace = vec![current_error];
    let mut history = params.keep_history.then(|| vec![Assignment::new(labels.clone(), k).expect("labels < K")]);

    let mut iterations = 0;
    let source = loop {
        iterations += 1;
        // Step 1: C_r ← G_{r-1}
        let next = update_centroids(points, &labels, &centroids);
        trace.push(own_cluster_error(points, &labels, &next));

        // Step 2: G_r ← C_r
        let (mut next_labels, mut next_dists) = assign(points, &next, counter);
        let mut next = next;
        if has_empty(&next_labels, k) {
            let r = reseed(points, &next_labels, &next_dists, &next, counter)?;
            repairs += 1;
            next = r.centroids;
            next_labels = r.assignment.into_labels();
            next_dists = r.distances;
        }
        let next_error = weighted_sum(points, &next_dists);
        trace.push(next_error);

        let unchanged = next_labels == labels;
        let stalled =
            current_error - next_error <= params.rel_tolerance * current_error.max(ERROR_FLOOR);
        let source = std::mem::replace(&mut labels, next_labels);
        centroids = next;
        current_error = next_error;
        if unchanged || stalled || iterations >= params.max_iterations {
            break source;
        }
        if let Some(h) = history.as_mut() {
            h.push(Assignment::new(labels.clone(), k).expect("labels < K"));
        }
    };

    Ok(WLResult {
        centroids,
        assignment: Assignment::new(labels, k)?,
        source_assignment: Assignment::new(source, k)?,
        iterations,
        error_trace: trace,
        distance_evals: counter.count() - start,
        repairs,
        history,
    })
}
