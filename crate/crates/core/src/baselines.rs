//! Competitor algorithms, instrumented with the same distance counter:
//! K-means++ seeding, full-data Lloyd, and minibatch K-means with
//! per-center learning rates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{nearest, sq_dist, CentroidSet, Dataset, DistanceCounter};
use crate::weighted_lloyd::{weighted_lloyd, WLParams, WLResult};

/// K-means++ seeding with squared-distance (D²) weighting.
///
/// Keeps the distance of every point to its nearest chosen center and
/// refreshes it against each new center, for `n · (K − 1)` evaluations in
/// total. If every remaining point coincides with a chosen center the next
/// center is drawn uniformly among the points not yet chosen.
pub fn kmeanspp_init<R: Rng + ?Sized>(
    dataset: &Dataset,
    k: usize,
    rng: &mut R,
    counter: &mut DistanceCounter,
) -> Result<CentroidSet> {
    let n = dataset.len();
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if n < k {
        return Err(Error::invalid(format!("{n} points cannot seed {k} centers")));
    }
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;

    let mut min_d2: Vec<f64> = Vec::new();
    while chosen.len() < k {
        let last = dataset.point(*chosen.last().expect("nonempty"));
        if min_d2.is_empty() {
            min_d2 = dataset.rows().map(|x| sq_dist(x, last)).collect();
        } else {
            for (m, x) in min_d2.iter_mut().zip(dataset.rows()) {
                let d = sq_dist(x, last);
                if d < *m {
                    *m = d;
                }
            }
        }
        counter.add(n as u64);

        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in min_d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive mass has a positive entry")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        taken[pick] = true;
    }
    CentroidSet::from_indices(dataset, &chosen)
}

/// Lloyd's algorithm on the raw points (`n · K` evaluations per assignment).
///
/// Runs the weighted Lloyd code with every point at weight one, so it is
/// exactly weighted Lloyd over the singleton partition.
pub fn lloyd(
    dataset: &Dataset,
    initial: &CentroidSet,
    params: &WLParams,
    counter: &mut DistanceCounter,
) -> Result<WLResult> {
    weighted_lloyd(dataset, initial, params, counter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MBParams {
    pub batch_size: usize,
    pub num_batches: usize,
    pub seed: u64,
}

impl MBParams {
    pub fn new(batch_size: usize, seed: u64) -> Self {
        Self {
            batch_size,
            num_batches: 100,
            seed,
        }
    }
}

/// Minibatch K-means state: centers plus points absorbed per center.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniBatch {
    pub centroids: CentroidSet,
    pub counts: Vec<u64>,
}

impl MiniBatch {
    pub fn new(initial: CentroidSet) -> Self {
        let k = initial.k();
        Self {
            centroids: initial,
            counts: vec![0; k],
        }
    }

    /// Assigns the whole batch to the current centers (`|batch| · K`
    /// evaluations), then moves each assigned center toward its point with
    /// step `1 / count`, one point at a time.
    pub fn step<'a, I>(&mut self, batch: I, counter: &mut DistanceCounter)
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let batch: Vec<&[f64]> = batch.into_iter().collect();
        let targets: Vec<usize> = batch.iter().map(|x| nearest(x, &self.centroids).0).collect();
        counter.add((batch.len() * self.centroids.k()) as u64);
        for (x, &j) in batch.iter().zip(&targets) {
            self.counts[j] += 1;
            let eta = 1.0 / self.counts[j] as f64;
            for (c, v) in self.centroids.centroid_mut(j).iter_mut().zip(x.iter()) {
                *c += eta * (v - *c);
            }
        }
    }
}

/// Minibatch K-means: `num_batches` batches of `batch_size` points drawn
/// uniformly with replacement. Books exactly `t · b · K` evaluations.
pub fn minibatch_kmeans(
    dataset: &Dataset,
    initial: &CentroidSet,
    params: &MBParams,
    counter: &mut DistanceCounter,
) -> Result<MiniBatch> {
    use rand::SeedableRng;

    if dataset.dim() != initial.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            got: initial.dim(),
        });
    }
    if dataset.len() < initial.k() {
        return Err(Error::invalid("fewer points than centers"));
    }
    if params.batch_size == 0 || params.num_batches == 0 {
        return Err(Error::invalid("batch size and batch count must be positive"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = MiniBatch::new(initial.clone());
    let n = dataset.len();
    for _ in 0..params.num_batches {
        let picks: Vec<usize> = (0..params.batch_size).map(|_| rng.random_range(0..n)).collect();
        state.step(picks.iter().map(|&i| dataset.point(i)), counter);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{full_error, Representatives};
    use crate::weighted_lloyd::weighted_lloyd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kmeanspp_d2_probabilities() {
        // first center fixed at 0: P(3) = 9/10, P(1) = 1/10
        let d = Dataset::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut runs, mut threes) = (0usize, 0usize);
        while runs < 10_000 {
            let mut c = DistanceCounter::new();
            let cs = kmeanspp_init(&d, 2, &mut rng, &mut c).unwrap();
            assert_eq!(c.count(), 3);
            if cs.as_slice()[0] != 0.0 {
                continue;
            }
            runs += 1;
            if cs.as_slice()[1] == 3.0 {
                threes += 1;
            }
        }
        let p = 0.9;
        let sigma = (runs as f64 * p * (1.0 - p)).sqrt();
        assert!((threes as f64 - runs as f64 * p).abs() <= 5.0 * sigma, "{threes}");
    }

    #[test]
    fn kmeanspp_with_k_equal_n_takes_all_points() {
        let d = Dataset::from_rows(&[[0.0], [1.0], [3.0], [7.0]]).unwrap();
        let mut c = DistanceCounter::new();
        let cs = kmeanspp_init(&d, 4, &mut ChaCha8Rng::seed_from_u64(3), &mut c).unwrap();
        let mut got = cs.as_slice().to_vec();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.0, 1.0, 3.0, 7.0]);
        assert_eq!(c.count(), 4 * 3);
    }

    #[test]
    fn kmeanspp_falls_back_on_duplicates() {
        let d = Dataset::from_rows(&[[2.0, 2.0]; 5]).unwrap();
        let cs = kmeanspp_init(&d, 3, &mut ChaCha8Rng::seed_from_u64(3), &mut DistanceCounter::new()).unwrap();
        assert_eq!(cs.k(), 3);
    }

    #[test]
    fn lloyd_cases() {
        let d = Dataset::from_rows(&[[0.0], [10.0]]).unwrap();
        let c0 = CentroidSet::from_rows(&[[1.0], [9.0]]).unwrap();
        let r = lloyd(&d, &c0, &WLParams::default(), &mut DistanceCounter::new()).unwrap();
        assert_eq!(r.centroids.to_rows(), vec![vec![0.0], vec![10.0]]);
        assert_eq!(r.final_error(), 0.0);

        let d = Dataset::from_rows(&[[4.0, -1.0]; 9]).unwrap();
        let c0 = CentroidSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]]).unwrap();
        let r = lloyd(&d, &c0, &WLParams::default(), &mut DistanceCounter::new()).unwrap();
        assert_eq!(r.final_error(), 0.0);
    }

    #[test]
    fn lloyd_equals_weighted_lloyd_on_singletons() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = Dataset::new((0..150).map(|_| rng.random_range(-10.0..10.0)).collect(), 3).unwrap();
        let c0 = CentroidSet::from_indices(&d, &[3, 17, 30, 41]).unwrap();
        let p = WLParams::default().with_history();
        let (mut c1, mut c2) = (DistanceCounter::new(), DistanceCounter::new());
        let a = lloyd(&d, &c0, &p, &mut c1).unwrap();
        let b = weighted_lloyd(&Representatives::singletons(&d), &c0, &p, &mut c2).unwrap();
        assert_eq!(a, b);
        assert_eq!(c1, c2);
    }

    #[test]
    fn minibatch_learning_rate() {
        let d = Dataset::from_rows(&[[2.0], [4.0]]).unwrap();
        let mut mb = MiniBatch::new(CentroidSet::from_rows(&[[0.0]]).unwrap());
        let mut c = DistanceCounter::new();
        mb.step([d.point(0)], &mut c);
        assert_eq!(mb.centroids.as_slice(), &[2.0]);
        mb.step([d.point(1)], &mut c);
        assert_eq!(mb.centroids.as_slice(), &[3.0]);
        assert_eq!(mb.counts, vec![2]);
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn minibatch_count_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = Dataset::new((0..400).map(|_| rng.random_range(-1.0..1.0)).collect(), 2).unwrap();
        let c0 = CentroidSet::from_indices(&d, &[0, 1, 2]).unwrap();
        let params = MBParams {
            batch_size: 17,
            num_batches: 23,
            seed: 1,
        };
        let mut c = DistanceCounter::new();
        let a = minibatch_kmeans(&d, &c0, &params, &mut c).unwrap();
        assert_eq!(c.count(), 17 * 23 * 3);
        let b = minibatch_kmeans(&d, &c0, &params, &mut DistanceCounter::new()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 17 * 23);
    }

    #[test]
    fn minibatch_approaches_lloyd_on_separated_mixture() {
        use crate::data::{generate_mixture, MixtureSpec};
        for rep in 0..5 {
            let (d, _) = generate_mixture(&MixtureSpec::new(2000, 2, 3, 100 + rep)).unwrap();
            let mut c = DistanceCounter::new();
            let seed = kmeanspp_init(&d, 3, &mut ChaCha8Rng::seed_from_u64(rep), &mut c).unwrap();
            let lloyd_err = lloyd(&d, &seed, &WLParams::default(), &mut c).unwrap().final_error();
            let params = MBParams {
                batch_size: 2000,
                num_batches: 200,
                seed: rep,
            };
            let mb = minibatch_kmeans(&d, &seed, &params, &mut c).unwrap();
            let mb_err = full_error(&d, &mb.centroids, &mut c).unwrap();
            assert!(mb_err <= 1.10 * lloyd_err, "rep {rep}: {mb_err} vs {lloyd_err}");
        }
    }
}
