//! Shared numeric types and the error functions.
//!
//! Three error functions drive everything in this crate:
//!
//! * the K-means error `E(C) = Σ_x min_k ‖x − c_k‖²` over raw points ([`full_error`]),
//! * the centroid error of a weighted point set, `E_P(C) = Σ_S |S|·min_k ‖S̄ − c_k‖²`
//!   ([`centroid_error`]),
//! * the clustering error `E_P(G)`, which measures each representative against the
//!   center of mass of the cluster it belongs to ([`clustering_error`]).
//!
//! Every squared distance that participates in an argmin is booked on a
//! [`DistanceCounter`]. Distances a point has to its *own* cluster center (error
//! bookkeeping after an update step) are linear-cost work and are not booked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tally of d-dimensional squared-distance evaluations.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistanceCounter {
    count: u64,
}

impl DistanceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(count: u64) -> Self {
        Self { count }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Books `evals` evaluations at once. Hot loops compute their exact
    /// evaluation count and book it in bulk.
    #[inline]
    pub fn add(&mut self, evals: u64) {
        self.count += evals;
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

/// `Σ_j (a_j − b_j)²`, booking exactly one evaluation.
pub fn squared_distance(a: &[f64], b: &[f64], counter: &mut DistanceCounter) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    counter.add(1);
    Ok(sq_dist(a, b))
}

/// Read access to a set of points carrying positive weights.
///
/// Raw data points are weight-1 points; partition representatives carry
/// their subset cardinality. The Lloyd machinery is written once against
/// this trait, so running it over a [`Dataset`] and over the singleton
/// partition of that dataset executes the same arithmetic.
pub trait WeightedPoints {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];
    fn weight(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }
}

/// `n` points in `R^d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput("dataset has no points"));
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "buffer of {} values is not a multiple of dimension {dim}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                axis: pos % dim,
            });
        }
        Ok(Self { points, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or(Error::EmptyInput("dataset has no points"))?;
        let mut points = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            points.extend_from_slice(row);
        }
        Self::new(points, dim)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for row in self.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let n = self.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

impl WeightedPoints for Dataset {
    fn len(&self) -> usize {
        Dataset::len(self)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        Dataset::point(self, i)
    }

    #[inline]
    fn weight(&self, _i: usize) -> f64 {
        1.0
    }
}

/// A partition subset summarized by its cardinality and center of mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    pub weight: u64,
    pub mean: Vec<f64>,
}

impl Representative {
    pub fn new(weight: u64, mean: Vec<f64>) -> Self {
        Self { weight, mean }
    }
}

/// A set of representatives stored column-compatible with [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Representatives {
    weights: Vec<u64>,
    means: Vec<f64>,
    dim: usize,
}

impl Representatives {
    pub fn new(weights: Vec<u64>, means: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if weights.is_empty() {
            return Err(Error::EmptyInput("no representatives"));
        }
        if means.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                got: means.len(),
            });
        }
        if weights.contains(&0) {
            return Err(Error::invalid("representative weights must be positive"));
        }
        if let Some(pos) = means.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                axis: pos % dim,
            });
        }
        Ok(Self {
            weights,
            means,
            dim,
        })
    }

    pub fn from_reps(reps: &[Representative]) -> Result<Self> {
        let dim = reps
            .first()
            .map(|r| r.mean.len())
            .ok_or(Error::EmptyInput("no representatives"))?;
        let mut weights = Vec::with_capacity(reps.len());
        let mut means = Vec::with_capacity(reps.len() * dim);
        for r in reps {
            if r.mean.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.mean.len(),
                });
            }
            weights.push(r.weight);
            means.extend_from_slice(&r.mean);
        }
        Self::new(weights, means, dim)
    }

    /// The thinnest partition: one weight-1 representative per point.
    pub fn singletons(dataset: &Dataset) -> Self {
        Self {
            weights: vec![1; dataset.len()],
            means: dataset.as_slice().to_vec(),
            dim: dataset.dim(),
        }
    }

    /// Groups points by `blocks` (lists of point indices) and summarizes each block.
    pub fn from_blocks(dataset: &Dataset, blocks: &[Vec<usize>]) -> Result<Self> {
        let dim = dataset.dim();
        let mut weights = Vec::with_capacity(blocks.len());
        let mut means = Vec::with_capacity(blocks.len() * dim);
        for block in blocks {
            if block.is_empty() {
                return Err(Error::invalid("partition blocks must be nonempty"));
            }
            let mut sum = vec![0.0; dim];
            for &i in block {
                if i >= dataset.len() {
                    return Err(Error::invalid(format!("point index {i} out of range")));
                }
                for (s, x) in sum.iter_mut().zip(dataset.point(i)) {
                    *s += x;
                }
            }
            let w = block.len() as f64;
            means.extend(sum.iter().map(|s| s / w));
            weights.push(block.len() as u64);
        }
        Self::new(weights, means, dim)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn mean(&self, i: usize) -> &[f64] {
        &self.means[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize) -> Representative {
        Representative::new(self.weights[i], self.mean(i).to_vec())
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (u64, &[f64])> + '_ {
        self.weights
            .iter()
            .copied()
            .zip(self.means.chunks_exact(self.dim))
    }

    pub fn total_count(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// `Σ |S|·S̄ / Σ |S|`.
    pub fn weighted_mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for (w, m) in self.iter() {
            let w = w as f64;
            for (a, x) in acc.iter_mut().zip(m) {
                *a += w * x;
            }
        }
        let total = self.total_count() as f64;
        acc.iter_mut().for_each(|a| *a /= total);
        acc
    }
}

impl WeightedPoints for Representatives {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        self.mean(i)
    }

    #[inline]
    fn weight(&self, i: usize) -> f64 {
        self.weights[i] as f64
    }
}

/// `K` centroids in `R^d`. Index `j` is the identity of centroid `c_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidSet {
    data: Vec<f64>,
    k: usize,
    dim: usize,
}

impl CentroidSet {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if data.is_empty() {
            return Err(Error::EmptyInput("centroid set needs at least one centroid"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                axis: pos % dim,
            });
        }
        Ok(Self {
            k: data.len() / dim,
            data,
            dim,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or(Error::EmptyInput("centroid set needs at least one centroid"))?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    /// Copies the listed points, in order.
    pub fn from_indices<P: WeightedPoints + ?Sized>(points: &P, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * points.dim());
        for &i in indices {
            data.extend_from_slice(points.point(i));
        }
        Self::new(data, points.dim())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub(crate) fn centroid_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }
}

/// Cluster label per point (or per representative); every label is `< K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::invalid(format!("label {bad} out of range for K = {k}")));
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of members per cluster.
    pub fn sizes(&self, k: usize) -> Vec<usize> {
        let mut sizes = vec![0; k];
        for &l in &self.0 {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Index and squared distance of the nearest centroid; ties go to the lowest index.
/// Books nothing; callers account for the `K` evaluations.
#[inline]
pub(crate) fn nearest(point: &[f64], centroids: &CentroidSet) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    (best, best_d)
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Nearest-centroid labels plus each point's squared distance to its centroid.
/// Books `len · K` evaluations.
pub(crate) fn assign<P: WeightedPoints + ?Sized>(
    points: &P,
    centroids: &CentroidSet,
    counter: &mut DistanceCounter,
) -> (Vec<usize>, Vec<f64>) {
    let n = points.len();
    let mut labels = Vec::with_capacity(n);
    let mut dists = Vec::with_capacity(n);
    for i in 0..n {
        let (j, d) = nearest(points.point(i), centroids);
        labels.push(j);
        dists.push(d);
    }
    counter.add((n * centroids.k()) as u64);
    (labels, dists)
}

pub(crate) fn weighted_sum<P: WeightedPoints + ?Sized>(points: &P, dists: &[f64]) -> f64 {
    dists
        .iter()
        .enumerate()
        .map(|(i, d)| points.weight(i) * d)
        .sum()
}

/// K-means error of `centroids` over every point of `dataset`. Books `n · K`.
pub fn full_error(
    dataset: &Dataset,
    centroids: &CentroidSet,
    counter: &mut DistanceCounter,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no points"));
    }
    check_dims(dataset.dim(), centroids.dim())?;
    let mut total = 0.0;
    for x in dataset.rows() {
        total += nearest(x, centroids).1;
    }
    counter.add((dataset.len() * centroids.k()) as u64);
    Ok(total)
}

/// Weighted centroid error and the clustering it induces. Books `len · K`.
pub fn centroid_error<P: WeightedPoints + ?Sized>(
    points: &P,
    centroids: &CentroidSet,
    counter: &mut DistanceCounter,
) -> Result<(f64, Assignment)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no representatives"));
    }
    check_dims(points.dim(), centroids.dim())?;
    let (labels, dists) = assign(points, centroids, counter);
    Ok((weighted_sum(points, &dists), Assignment(labels)))
}

/// Clustering induced by a set of centroids (nearest centroid, lowest index on ties).
pub fn induce_assignment<P: WeightedPoints + ?Sized>(
    points: &P,
    centroids: &CentroidSet,
    counter: &mut DistanceCounter,
) -> Result<Assignment> {
    check_dims(points.dim(), centroids.dim())?;
    Ok(Assignment(assign(points, centroids, counter).0))
}

/// Weighted per-cluster means (zero for empty clusters) and weights.
///
/// Sums are taken relative to each cluster's first member, so a cluster whose
/// members coincide gets exactly that point back.
fn cluster_means<P: WeightedPoints + ?Sized>(
    points: &P,
    labels: &[usize],
    k: usize,
) -> (Vec<f64>, Vec<f64>) {
    let dim = points.dim();
    let mut anchor: Vec<Option<usize>> = vec![None; k];
    let mut sums = vec![0.0; k * dim];
    let mut mass = vec![0.0; k];
    for (i, &l) in labels.iter().enumerate() {
        let w = points.weight(i);
        mass[l] += w;
        let a = points.point(*anchor[l].get_or_insert(i));
        for ((s, x), o) in sums[l * dim..(l + 1) * dim].iter_mut().zip(points.point(i)).zip(a) {
            *s += w * (x - o);
        }
    }
    for (j, a) in anchor.iter().enumerate() {
        if let Some(a) = a {
            for (s, o) in sums[j * dim..(j + 1) * dim].iter_mut().zip(points.point(*a)) {
                *s = o + *s / mass[j];
            }
        }
    }
    (sums, mass)
}

/// Centers of mass of the clusters of `assignment`. Fails on an empty cluster.
pub fn induce_centroids<P: WeightedPoints + ?Sized>(
    points: &P,
    assignment: &Assignment,
    k: usize,
) -> Result<CentroidSet> {
    if assignment.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: assignment.len(),
        });
    }
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if let Some(&bad) = assignment.labels().iter().find(|&&l| l >= k) {
        return Err(Error::invalid(format!("label {bad} out of range for K = {k}")));
    }
    let dim = points.dim();
    let (means, mass) = cluster_means(points, assignment.labels(), k);
    if let Some(j) = mass.iter().position(|&m| m == 0.0) {
        return Err(Error::EmptyCluster { cluster: j });
    }
    CentroidSet::new(means, dim)
}

/// Update step that keeps the previous centroid of any cluster left empty.
pub(crate) fn update_centroids<P: WeightedPoints + ?Sized>(
    points: &P,
    labels: &[usize],
    previous: &CentroidSet,
) -> CentroidSet {
    let dim = points.dim();
    let k = previous.k();
    let (mut means, mass) = cluster_means(points, labels, k);
    for (j, &m) in mass.iter().enumerate() {
        if m == 0.0 {
            means[j * dim..(j + 1) * dim].copy_from_slice(previous.centroid(j));
        }
    }
    CentroidSet {
        data: means,
        k,
        dim,
    }
}

/// `Σ |S|·‖S̄ − c_{label(S)}‖²` against an explicit centroid set.
pub(crate) fn own_cluster_error<P: WeightedPoints + ?Sized>(
    points: &P,
    labels: &[usize],
    centroids: &CentroidSet,
) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| points.weight(i) * sq_dist(points.point(i), centroids.centroid(l)))
        .sum()
}

/// Clustering error: every point measured against the center of mass of its cluster.
///
/// This is the error of a clustering rather than of a centroid set; the
/// centroids are the ones the clustering induces. No argmin takes place, so
/// nothing is booked on a distance counter.
pub fn clustering_error<P: WeightedPoints + ?Sized>(
    points: &P,
    assignment: &Assignment,
    k: usize,
) -> Result<f64> {
    let centroids = induce_centroids(points, assignment, k)?;
    Ok(own_cluster_error(points, assignment.labels(), &centroids))
}

/// Standardized error of an approximate solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdError {
    /// `(E* − E) / E*`; never positive up to rounding.
    pub rho: f64,
    /// `E`, the full-data error of the centroids under evaluation.
    pub approx_error: f64,
    /// `E*`, the full-data error after Lloyd refinement seeded at those centroids.
    pub refined_error: f64,
    pub lloyd_iterations: usize,
}

/// Refines `centroids` with full-data Lloyd and compares errors.
///
/// All work is booked on `eval_counter`, which should not be the counter of
/// the algorithm being evaluated.
pub fn std_error(
    dataset: &Dataset,
    centroids: &CentroidSet,
    params: &crate::weighted_lloyd::WLParams,
    eval_counter: &mut DistanceCounter,
) -> Result<StdError> {
    let refined = crate::baselines::lloyd(dataset, centroids, params, eval_counter)?;
    let approx_error = refined.initial_error();
    let refined_error = refined.final_error();
    let rho = if refined_error == 0.0 {
        if approx_error != 0.0 {
            return Err(Error::DegenerateZeroError {
                approx: approx_error,
            });
        }
        0.0
    } else {
        (refined_error - approx_error) / refined_error
    };
    Ok(StdError {
        rho,
        approx_error,
        refined_error,
        lloyd_iterations: refined.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(rng: &mut impl Rng, n: usize, d: usize) -> Dataset {
        Dataset::new((0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect(), d).unwrap()
    }

    fn random_centroids(rng: &mut impl Rng, k: usize, d: usize) -> CentroidSet {
        CentroidSet::new((0..k * d).map(|_| rng.random_range(-5.0..5.0)).collect(), d).unwrap()
    }

    #[test]
    fn squared_distance_cases() {
        let mut c = DistanceCounter::new();
        assert_eq!(squared_distance(&[0.0, 0.0], &[0.0, 0.0], &mut c).unwrap(), 0.0);
        assert_eq!(squared_distance(&[0.0, 0.0], &[3.0, 4.0], &mut c).unwrap(), 25.0);
        let mut c = DistanceCounter::starting_at(5);
        assert_eq!(
            squared_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &mut c).unwrap(),
            0.0
        );
        assert_eq!(c.count(), 6);
    }

    #[test]
    fn squared_distance_dimension_mismatch() {
        let mut c = DistanceCounter::new();
        let err = squared_distance(&[0.0], &[0.0, 1.0], &mut c).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, got: 2 }));
        assert_eq!(c.count(), 0);
    }

    #[test]
    fn dataset_rejects_non_finite() {
        let err = Dataset::new(vec![0.0, f64::NAN, 1.0, 2.0], 2).unwrap_err();
        assert!(matches!(err, Error::NonFinite { point: 0, axis: 1 }));
        assert!(Dataset::new(vec![], 2).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn full_error_cases() {
        let d = Dataset::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let mut c = DistanceCounter::new();
        let one = CentroidSet::from_rows(&[[1.0, 0.0]]).unwrap();
        assert_eq!(full_error(&d, &one, &mut c).unwrap(), 2.0);
        let two = CentroidSet::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_eq!(full_error(&d, &two, &mut c).unwrap(), 0.0);
        assert_eq!(c.count(), 2 + 4);
    }

    #[test]
    fn full_error_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = random_dataset(&mut rng, 20, 2);
        let cs = random_centroids(&mut rng, 3, 2);
        // per-point exhaustive minimum
        let mut oracle = 0.0;
        for x in data.rows() {
            let mut best = f64::INFINITY;
            for c in cs.iter() {
                let d = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                best = best.min(d);
            }
            oracle += best;
        }
        let mut counter = DistanceCounter::new();
        let got = full_error(&data, &cs, &mut counter).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle);
        assert_eq!(counter.count(), 60);
    }

    #[test]
    fn full_error_dimension_mismatch() {
        let d = Dataset::from_rows(&[[0.0, 0.0]]).unwrap();
        let cs = CentroidSet::from_rows(&[[0.0]]).unwrap();
        assert!(full_error(&d, &cs, &mut DistanceCounter::new()).is_err());
    }

    #[test]
    fn centroid_error_cases() {
        let reps = Representatives::from_reps(&[
            Representative::new(2, vec![0.0]),
            Representative::new(2, vec![10.0]),
        ])
        .unwrap();
        let cs = CentroidSet::from_rows(&[[0.0], [10.0]]).unwrap();
        let mut c = DistanceCounter::new();
        let (e, a) = centroid_error(&reps, &cs, &mut c).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(a.labels(), &[0, 1]);
        assert_eq!(c.count(), 4);

        let reps = Representatives::from_reps(&[Representative::new(3, vec![1.0])]).unwrap();
        let cs = CentroidSet::from_rows(&[[0.0]]).unwrap();
        assert_eq!(centroid_error(&reps, &cs, &mut c).unwrap().0, 3.0);
    }

    #[test]
    fn singleton_partition_reproduces_full_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let data = random_dataset(&mut rng, 50, 3);
            let cs = random_centroids(&mut rng, 4, 3);
            let reps = Representatives::singletons(&data);
            let mut c = DistanceCounter::new();
            let full = full_error(&data, &cs, &mut c).unwrap();
            let (cent, _) = centroid_error(&reps, &cs, &mut c).unwrap();
            assert!((full - cent).abs() <= 1e-12 * full.abs());
        }
    }

    #[test]
    fn induce_assignment_cases() {
        let reps = Representatives::from_reps(&[
            Representative::new(1, vec![0.0]),
            Representative::new(1, vec![10.0]),
        ])
        .unwrap();
        let cs = CentroidSet::from_rows(&[[1.0], [9.0]]).unwrap();
        let mut c = DistanceCounter::new();
        assert_eq!(induce_assignment(&reps, &cs, &mut c).unwrap().labels(), &[0, 1]);

        // equidistant: the lower index wins
        let reps = Representatives::from_reps(&[Representative::new(1, vec![5.0])]).unwrap();
        let cs = CentroidSet::from_rows(&[[0.0], [10.0]]).unwrap();
        assert_eq!(induce_assignment(&reps, &cs, &mut c).unwrap().labels(), &[0]);
    }

    #[test]
    fn induce_assignment_matches_argmin_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_dataset(&mut rng, 30, 2);
        let reps = Representatives::singletons(&data);
        let cs = random_centroids(&mut rng, 4, 2);
        let got = induce_assignment(&reps, &cs, &mut DistanceCounter::new()).unwrap();
        for (i, x) in data.rows().enumerate() {
            let dists: Vec<f64> = cs
                .iter()
                .map(|c| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2))
                .collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            let want = dists.iter().position(|&d| d == min).unwrap();
            assert_eq!(got.labels()[i], want);
        }
    }

    #[test]
    fn induce_centroids_cases() {
        let reps = Representatives::from_reps(&[
            Representative::new(1, vec![0.0]),
            Representative::new(3, vec![4.0]),
        ])
        .unwrap();
        let a = Assignment::new(vec![0, 0], 1).unwrap();
        assert_eq!(induce_centroids(&reps, &a, 1).unwrap().as_slice(), &[3.0]);

        let reps = Representatives::from_reps(&[
            Representative::new(2, vec![0.0, 0.0]),
            Representative::new(2, vec![2.0, 2.0]),
        ])
        .unwrap();
        let a = Assignment::new(vec![0, 1], 2).unwrap();
        assert_eq!(
            induce_centroids(&reps, &a, 2).unwrap().to_rows(),
            vec![vec![0.0, 0.0], vec![2.0, 2.0]]
        );
    }

    #[test]
    fn induce_centroids_reports_empty_cluster() {
        let reps = Representatives::from_reps(&[Representative::new(1, vec![0.0])]).unwrap();
        let a = Assignment::new(vec![0], 2).unwrap();
        assert!(matches!(
            induce_centroids(&reps, &a, 2),
            Err(Error::EmptyCluster { cluster: 1 })
        ));
    }

    #[test]
    fn weighted_mean_equals_expanded_multiset_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let reps: Vec<Representative> = (0..12)
            .map(|_| {
                Representative::new(
                    rng.random_range(1..6),
                    vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
                )
            })
            .collect();
        let set = Representatives::from_reps(&reps).unwrap();
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let got = induce_centroids(&set, &Assignment::new(labels.clone(), 3).unwrap(), 3).unwrap();
        for k in 0..3 {
            let mut expanded = Vec::new();
            for (r, &l) in reps.iter().zip(&labels) {
                if l == k {
                    for _ in 0..r.weight {
                        expanded.push(r.mean.clone());
                    }
                }
            }
            for axis in 0..2 {
                let mean = expanded.iter().map(|p| p[axis]).sum::<f64>() / expanded.len() as f64;
                assert!((got.centroid(k)[axis] - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lloyd_fixed_point_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let data = random_dataset(&mut rng, 60, 2);
        let mut cs = CentroidSet::from_indices(&data, &[0, 1, 2]).unwrap();
        let mut c = DistanceCounter::new();
        for _ in 0..200 {
            let a = induce_assignment(&data, &cs, &mut c).unwrap();
            let next = induce_centroids(&data, &a, 3).unwrap();
            if next == cs {
                break;
            }
            cs = next;
        }
        let a = induce_assignment(&data, &cs, &mut c).unwrap();
        let once = induce_centroids(&data, &a, 3).unwrap();
        let a2 = induce_assignment(&data, &once, &mut c).unwrap();
        let twice = induce_centroids(&data, &a2, 3).unwrap();
        assert_eq!(once, cs);
        assert_eq!(twice, once);
    }

    #[test]
    fn clustering_error_bounds_centroid_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = random_dataset(&mut rng, 40, 2);
        let cs = random_centroids(&mut rng, 3, 2);
        let (e_c, a) = centroid_error(&data, &cs, &mut DistanceCounter::new()).unwrap();
        if a.sizes(3).iter().all(|&s| s > 0) {
            assert!(clustering_error(&data, &a, 3).unwrap() <= e_c * (1.0 + 1e-12));
        }
    }
}
