//! Numerical oracles for the structural properties of RPKM.
//!
//! * For a point set `D` split into blocks, `f(c) = |D|·‖D̄ − c‖² − Σ_R |R|·‖R̄ − c‖²`
//!   does not depend on `c` ([`center_shift_residual`]).
//! * The difference between the clustering errors of two clusterings is the
//!   same on a partition and on any thinner partition ([`refinement_residual`]).
//!   With the singleton partition as the thinner one, this ties partition-level
//!   errors to full-data errors, which gives the descent condition checked by
//!   [`descent_check`].
//! * Across RPKM steps, the only clustering that may reappear is the last one
//!   of an earlier step, and only while every step in between stood still
//!   ([`detect_clustering_repeats`]); consequently the rounds of step `i` are
//!   bounded by a Stirling number of the second kind minus the rounds already
//!   spent ([`wl_iteration_bound`]).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PartitionSequence;
use crate::model::{full_error, sq_dist, CentroidSet, Dataset, DistanceCounter, WeightedPoints};
use crate::recursive::RpkmResult;

fn check_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut owner = vec![usize::MAX; n];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::invalid("partition blocks must be nonempty"));
        }
        for &i in block {
            if i >= n {
                return Err(Error::invalid(format!("point index {i} out of range")));
            }
            if owner[i] != usize::MAX {
                return Err(Error::invalid(format!("point {i} appears in two blocks")));
            }
            owner[i] = b;
        }
    }
    if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::invalid(format!("point {i} is not covered by the partition")));
    }
    Ok(owner)
}

fn center_of_mass(dataset: &Dataset, members: impl Iterator<Item = usize>) -> (f64, Vec<f64>) {
    let mut sum = vec![0.0; dataset.dim()];
    let mut count = 0.0;
    for i in members {
        count += 1.0;
        for (s, x) in sum.iter_mut().zip(dataset.point(i)) {
            *s += x;
        }
    }
    sum.iter_mut().for_each(|s| *s /= count);
    (count, sum)
}

/// `f(c) = |D|·‖D̄ − c‖² − Σ_R |R|·‖R̄ − c‖²` for a partition of `dataset`
/// given as blocks of point indices.
pub fn center_shift_value(dataset: &Dataset, blocks: &[Vec<usize>], c: &[f64]) -> Result<f64> {
    check_blocks(dataset.len(), blocks)?;
    if c.len() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            got: c.len(),
        });
    }
    let (n, mean) = center_of_mass(dataset, 0..dataset.len());
    let mut f = n * sq_dist(&mean, c);
    for block in blocks {
        let (w, m) = center_of_mass(dataset, block.iter().copied());
        f -= w * sq_dist(&m, c);
    }
    Ok(f)
}

/// `|f(c) − f(c′)|`; zero up to rounding.
pub fn center_shift_residual(
    dataset: &Dataset,
    blocks: &[Vec<usize>],
    c: &[f64],
    c_prime: &[f64],
) -> Result<f64> {
    Ok((center_shift_value(dataset, blocks, c)? - center_shift_value(dataset, blocks, c_prime)?).abs())
}

/// Clustering error `E_P(G)` of a point-level clustering on a partition of
/// the dataset. `labels` must keep every block inside one cluster.
pub fn partition_clustering_error(
    dataset: &Dataset,
    blocks: &[Vec<usize>],
    labels: &[usize],
    k: usize,
) -> Result<f64> {
    check_blocks(dataset.len(), blocks)?;
    if labels.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: labels.len(),
        });
    }
    if labels.iter().any(|&l| l >= k) {
        return Err(Error::invalid("label out of range"));
    }
    for block in blocks {
        let first = labels[block[0]];
        if block.iter().any(|&i| labels[i] != first) {
            return Err(Error::invalid(
                "clustering splits a partition block; it is not a clustering of that partition",
            ));
        }
    }
    let centers: Vec<Option<Vec<f64>>> = (0..k)
        .map(|j| {
            let members: Vec<usize> = (0..dataset.len()).filter(|&i| labels[i] == j).collect();
            (!members.is_empty()).then(|| center_of_mass(dataset, members.into_iter()).1)
        })
        .collect();
    let mut e = 0.0;
    for block in blocks {
        let (w, m) = center_of_mass(dataset, block.iter().copied());
        let g = centers[labels[block[0]]].as_ref().expect("cluster holds this block");
        e += w * sq_dist(&m, g);
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementCheck {
    /// `E_P(G)`, `E_P(G′)`, `E_{P′}(G)`, `E_{P′}(G′)`.
    pub coarse: (f64, f64),
    pub thin: (f64, f64),
    /// `|(E_P(G) − E_P(G′)) − (E_{P′}(G) − E_{P′}(G′))|`.
    pub residual: f64,
}

/// Compares the clustering-error differences of `g` and `g_prime` on a
/// partition and on a thinner one.
pub fn refinement_residual(
    dataset: &Dataset,
    coarse: &[Vec<usize>],
    thin: &[Vec<usize>],
    g: &[usize],
    g_prime: &[usize],
    k: usize,
) -> Result<RefinementCheck> {
    let owner = check_blocks(dataset.len(), coarse)?;
    check_blocks(dataset.len(), thin)?;
    for block in thin {
        let o = owner[block[0]];
        if block.iter().any(|&i| owner[i] != o) {
            return Err(Error::invalid("second partition is not thinner than the first"));
        }
    }
    let coarse_e = (
        partition_clustering_error(dataset, coarse, g, k)?,
        partition_clustering_error(dataset, coarse, g_prime, k)?,
    );
    let thin_e = (
        partition_clustering_error(dataset, thin, g, k)?,
        partition_clustering_error(dataset, thin, g_prime, k)?,
    );
    Ok(RefinementCheck {
        coarse: coarse_e,
        thin: thin_e,
        residual: ((coarse_e.0 - coarse_e.1) - (thin_e.0 - thin_e.1)).abs(),
    })
}

/// Weighted clustering error over `points`; empty clusters contribute nothing.
fn weighted_clustering_error<P: WeightedPoints + ?Sized>(points: &P, labels: &[usize], k: usize) -> f64 {
    let dim = points.dim();
    let mut sums = vec![0.0; k * dim];
    let mut mass = vec![0.0; k];
    for (i, &l) in labels.iter().enumerate() {
        let w = points.weight(i);
        mass[l] += w;
        for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(points.point(i)) {
            *s += w * x;
        }
    }
    for (j, &m) in mass.iter().enumerate() {
        if m > 0.0 {
            sums[j * dim..(j + 1) * dim].iter_mut().for_each(|s| *s /= m);
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| points.weight(i) * sq_dist(points.point(i), &sums[l * dim..(l + 1) * dim]))
        .sum()
}

/// Inputs of the descent condition at one RPKM step.
#[derive(Debug, Clone)]
pub struct DescentInput<'a> {
    pub dataset: &'a Dataset,
    /// Representatives of `P_i`.
    pub partition: &'a dyn WeightedPoints,
    /// Cell of `P_i` holding each point.
    pub point_cells: Vec<usize>,
    pub k: usize,
    pub prev_centroids: CentroidSet,
    pub cur_centroids: CentroidSet,
    /// Last clustering of step `i − 1`, expressed on the cells of `P_i`.
    pub prev_clustering: Vec<usize>,
    /// Last clustering of step `i`, on the cells of `P_i`.
    pub cur_clustering: Vec<usize>,
}

impl fmt::Debug for dyn WeightedPoints + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightedPoints(len = {}, dim = {})", self.len(), self.dim())
    }
}

impl<'a> DescentInput<'a> {
    /// Gathers the inputs for step `step` (an index into `result.per_step`, ≥ 1).
    pub fn from_rpkm(
        dataset: &'a Dataset,
        seq: &'a PartitionSequence,
        result: &RpkmResult,
        step: usize,
    ) -> Result<Self> {
        if step == 0 || step >= result.per_step.len() {
            return Err(Error::invalid(format!("no step pair ending at step {step}")));
        }
        let level = result.per_step[step].level;
        let prev_level = result.per_step[step - 1].level;
        let prev = &result.runs[step - 1];
        let cur = &result.runs[step];
        Ok(Self {
            dataset,
            partition: seq.level(level),
            point_cells: seq.point_cells(level),
            k: cur.centroids.k(),
            prev_centroids: prev.centroids.clone(),
            cur_centroids: cur.centroids.clone(),
            prev_clustering: seq.lift_labels(prev_level, prev.source_assignment.labels(), level),
            cur_clustering: cur.source_assignment.labels().to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub xi: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `E(C_{i-1})` and `E(C_i)`.
    pub prev_error: f64,
    pub cur_error: f64,
    /// `lhs ≤ rhs` (with slack).
    pub holds: bool,
    /// `E(C_i) ≤ E(C_{i-1})` (with slack).
    pub descent: bool,
    /// The two verdicts agree.
    pub consistent: bool,
}

/// Relative slack of the descent comparisons.
pub const DESCENT_SLACK: f64 = 1e-9;

/// Evaluates the descent condition and whether it agrees with the actual
/// change of the full-data error.
pub fn descent_check(input: &DescentInput<'_>) -> Result<DescentReport> {
    let n = input.dataset.len();
    if input.point_cells.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: input.point_cells.len(),
        });
    }
    let cells = input.partition.len();
    if input.prev_clustering.len() != cells || input.cur_clustering.len() != cells {
        return Err(Error::invalid("clusterings must label every cell of the partition"));
    }
    let k = input.k;
    let xi = weighted_clustering_error(input.partition, &input.prev_clustering, k)
        - weighted_clustering_error(input.partition, &input.cur_clustering, k);

    let to_points = |labels: &[usize]| -> Vec<usize> {
        input.point_cells.iter().map(|&c| labels[c]).collect()
    };
    let full_prev_g = weighted_clustering_error(input.dataset, &to_points(&input.prev_clustering), k);
    let full_cur_g = weighted_clustering_error(input.dataset, &to_points(&input.cur_clustering), k);
    let mut scratch = DistanceCounter::new();
    let prev_error = full_error(input.dataset, &input.prev_centroids, &mut scratch)?;
    let cur_error = full_error(input.dataset, &input.cur_centroids, &mut scratch)?;

    let lhs = full_prev_g - prev_error;
    let rhs = xi + (full_cur_g - cur_error);
    let scale = [full_prev_g, full_cur_g, prev_error, cur_error, 1.0]
        .into_iter()
        .fold(0.0, f64::max);
    let slack = DESCENT_SLACK * scale;
    let holds = lhs <= rhs + slack;
    let descent = cur_error <= prev_error + slack;
    Ok(DescentReport {
        xi,
        lhs,
        rhs,
        prev_error,
        cur_error,
        holds,
        descent,
        consistent: holds == descent,
    })
}

/// A clustering up to relabeling: labels renumbered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusteringKey(Vec<u32>);

impl ClusteringKey {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut renumber: HashMap<usize, u32> = HashMap::new();
        Self(
            labels
                .iter()
                .map(|l| {
                    let next = renumber.len() as u32;
                    *renumber.entry(*l).or_insert(next)
                })
                .collect(),
        )
    }

    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    /// Short hex digest for reports.
    pub fn fingerprint(&self) -> String {
        let mut h = DefaultHasher::new();
        self.0.hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

/// Clusterings generated at one RPKM step, `G_0 … G_{l-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepHistory {
    pub level: u32,
    pub cells: usize,
    pub iterations: usize,
    pub keys: Vec<ClusteringKey>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WLHistory {
    pub steps: Vec<StepHistory>,
}

impl WLHistory {
    /// Collects the clusterings of an RPKM run, all expressed on the cells of
    /// the finest level so that different steps compare as clusterings of the
    /// data. The run must have kept its history.
    pub fn from_rpkm(seq: &PartitionSequence, result: &RpkmResult) -> Result<Self> {
        let finest = seq.depth();
        let steps = result
            .per_step
            .iter()
            .zip(&result.runs)
            .map(|(step, run)| {
                let history = run.history.as_ref().ok_or_else(|| {
                    Error::invalid("RPKM run was executed without keep_history")
                })?;
                let keys = history
                    .iter()
                    .map(|a| ClusteringKey::from_labels(&seq.lift_labels(step.level, a.labels(), finest)))
                    .collect();
                Ok(StepHistory {
                    level: step.level,
                    cells: step.cells,
                    iterations: run.iterations,
                    keys,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Allowed,
    Violation,
}

/// Clustering `r` of step `i` equals clustering `s` of step `j` (`j ≤ i`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatFinding {
    pub step_i: usize,
    pub r: usize,
    pub step_j: usize,
    pub s: usize,
    pub key: String,
    pub verdict: Verdict,
}

impl fmt::Display for RepeatFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Allowed => "allowed",
            Verdict::Violation => "VIOLATION",
        };
        write!(
            f,
            "step {} clustering {} repeats step {} clustering {} key {} {}",
            self.step_i, self.r, self.step_j, self.s, self.key, verdict
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RepeatReport {
    pub findings: Vec<RepeatFinding>,
}

impl RepeatReport {
    pub fn violations(&self) -> impl Iterator<Item = &RepeatFinding> {
        self.findings.iter().filter(|f| f.verdict == Verdict::Violation)
    }

    pub fn lines(&self) -> Vec<String> {
        self.findings.iter().map(ToString::to_string).collect()
    }
}

/// Finds every pair of equal clusterings in a run's history.
///
/// A repeat is allowed when it is consecutive within a step, or when it
/// reproduces the last clustering `s = l_j − 1` of an earlier step `j` and
/// every step `j+1 ..= i` ran a single round. Anything else is a violation.
pub fn detect_clustering_repeats(history: &WLHistory) -> RepeatReport {
    let mut seen: HashMap<&ClusteringKey, Vec<(usize, usize)>> = HashMap::new();
    for (step, h) in history.steps.iter().enumerate() {
        for (r, key) in h.keys.iter().enumerate() {
            seen.entry(key).or_default().push((step, r));
        }
    }
    let mut findings = Vec::new();
    for (key, positions) in seen {
        if positions.len() < 2 {
            continue;
        }
        let fingerprint = key.fingerprint();
        for (a, &(j, s)) in positions.iter().enumerate() {
            for &(i, r) in &positions[a + 1..] {
                let allowed = if i == j {
                    r == s + 1
                } else {
                    s + 1 == history.steps[j].keys.len()
                        && history.steps[j + 1..=i].iter().all(|h| h.iterations == 1)
                };
                findings.push(RepeatFinding {
                    step_i: i,
                    r,
                    step_j: j,
                    s,
                    key: fingerprint.clone(),
                    verdict: if allowed {
                        Verdict::Allowed
                    } else {
                        Verdict::Violation
                    },
                });
            }
        }
    }
    findings.sort_by_key(|f| (f.step_i, f.r, f.step_j, f.s));
    RepeatReport { findings }
}

/// Stirling number of the second kind `S(n, k)`, exactly.
pub fn stirling2(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    // row[j] = S(m, j) for the current m
    let mut row = vec![BigUint::ZERO; k + 1];
    row[0] = BigUint::from(1u32);
    for _ in 0..n {
        for j in (1..=k).rev() {
            let stay = &row[j] * BigUint::from(j);
            row[j] = stay + &row[j - 1];
        }
        row[0] = BigUint::ZERO;
    }
    row.swap_remove(k)
}

/// `S(|P_i|, K) − Σ_{j<i} (l_j − 1)`.
pub fn wl_iteration_bound(partition_size: usize, previous_iterations: &[usize], k: usize) -> BigInt {
    let spent: usize = previous_iterations.iter().map(|l| l.saturating_sub(1)).sum();
    BigInt::from(stirling2(partition_size, k)) - BigInt::from(spent)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub level: u32,
    pub iterations: usize,
    pub bound: BigInt,
    /// `bound > 0` and `iterations ≤ bound`.
    pub ok: bool,
}

/// Checks every step of a history against its iteration bound.
pub fn check_iteration_bounds(history: &WLHistory, k: usize) -> Vec<BoundCheck> {
    let mut previous = Vec::new();
    history
        .steps
        .iter()
        .map(|step| {
            let bound = wl_iteration_bound(step.cells, &previous, k);
            previous.push(step.iterations);
            let ok = bound > BigInt::ZERO && BigInt::from(step.iterations) <= bound;
            BoundCheck {
                level: step.level,
                iterations: step.iterations,
                bound,
                ok,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new(xs.to_vec(), 1).unwrap()
    }

    #[test]
    fn center_shift_two_points_is_minus_two() {
        // 2(1 − c)² − c² − (2 − c)² = −2
        let d = line(&[0.0, 2.0]);
        let singletons = vec![vec![0], vec![1]];
        for c in [-3.0, 0.0, 0.5, 7.25] {
            assert!((center_shift_value(&d, &singletons, &[c]).unwrap() + 2.0).abs() < 1e-12);
        }
        assert_eq!(center_shift_residual(&d, &singletons, &[0.0], &[9.0]).unwrap(), 0.0);
    }

    #[test]
    fn center_shift_whole_set_is_zero() {
        let d = line(&[1.0, 4.0, -2.0]);
        let whole = vec![vec![0, 1, 2]];
        assert_eq!(center_shift_value(&d, &whole, &[3.0]).unwrap(), 0.0);
        assert_eq!(center_shift_residual(&d, &whole, &[3.0], &[-1.0]).unwrap(), 0.0);
    }

    #[test]
    fn center_shift_rejects_bad_partitions() {
        let d = line(&[1.0, 4.0, -2.0]);
        assert!(center_shift_value(&d, &[vec![0, 1]], &[0.0]).is_err());
        assert!(center_shift_value(&d, &[vec![0, 1], vec![1, 2]], &[0.0]).is_err());
    }

    #[test]
    fn refinement_worked_example() {
        let d = line(&[0.0, 2.0, 10.0, 12.0]);
        let p = vec![vec![0, 1], vec![2], vec![3]];
        let thin = vec![vec![0], vec![1], vec![2], vec![3]];
        let g = [0, 0, 1, 1];
        let g2 = [0, 0, 0, 1];
        let r = refinement_residual(&d, &p, &thin, &g, &g2, 2).unwrap();
        assert_eq!(r.coarse, (2.0, 54.0));
        assert_eq!(r.thin, (4.0, 56.0));
        assert_eq!(r.residual, 0.0);
        let same = refinement_residual(&d, &p, &thin, &g, &g, 2).unwrap();
        assert_eq!(same.residual, 0.0);
    }

    #[test]
    fn refinement_rejects_split_blocks() {
        let d = line(&[0.0, 2.0, 10.0, 12.0]);
        let p = vec![vec![0, 1], vec![2], vec![3]];
        let thin = vec![vec![0], vec![1], vec![2], vec![3]];
        assert!(refinement_residual(&d, &p, &thin, &[0, 1, 1, 1], &[0, 0, 1, 1], 2).is_err());
        // the "thinner" partition must refine the first
        assert!(refinement_residual(&d, &thin, &p, &[0, 0, 1, 1], &[0, 0, 1, 1], 2).is_err());
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling2(4, 2), BigUint::from(7u32));
        assert_eq!(stirling2(10, 3), BigUint::from(9330u32));
        assert_eq!(stirling2(5, 5), BigUint::from(1u32));
        assert_eq!(stirling2(0, 0), BigUint::from(1u32));
        assert_eq!(stirling2(3, 4), BigUint::ZERO);
        assert_eq!(stirling2(9, 1), BigUint::from(1u32));
        // S(64, 2) = 2^63 − 1
        assert_eq!(stirling2(64, 2), BigUint::from((1u64 << 63) - 1));
    }

    #[test]
    fn iteration_bound_example() {
        assert_eq!(wl_iteration_bound(4, &[2, 1], 2), BigInt::from(6));
        assert_eq!(wl_iteration_bound(10, &[3, 2], 1), BigInt::from(1 - 3));
    }

    fn key(labels: &[usize]) -> ClusteringKey {
        ClusteringKey::from_labels(labels)
    }

    fn step(level: u32, keys: Vec<ClusteringKey>) -> StepHistory {
        StepHistory {
            level,
            cells: 8,
            iterations: keys.len(),
            keys,
        }
    }

    #[test]
    fn no_repeats_gives_empty_report() {
        let h = WLHistory {
            steps: vec![
                step(1, vec![key(&[0, 0, 1, 1]), key(&[0, 1, 1, 1])]),
                step(2, vec![key(&[0, 0, 0, 1])]),
            ],
        };
        assert!(detect_clustering_repeats(&h).findings.is_empty());
    }

    #[test]
    fn final_clustering_may_carry_over() {
        let (a, b) = (key(&[0, 0, 1, 1]), key(&[0, 1, 1, 1]));
        let h = WLHistory {
            steps: vec![step(1, vec![a.clone(), b.clone()]), step(2, vec![b.clone()]), step(3, vec![b])],
        };
        let report = detect_clustering_repeats(&h);
        assert_eq!(report.findings.len(), 3);
        assert_eq!(report.violations().count(), 0);
    }

    #[test]
    fn earlier_clustering_reappearing_is_flagged() {
        let (a, b, c) = (key(&[0, 0, 1, 1]), key(&[0, 1, 1, 1]), key(&[0, 0, 0, 1]));
        // step 2 revisits a, which was not the last clustering of step 1
        let h = WLHistory {
            steps: vec![step(1, vec![a.clone(), b]), step(2, vec![c, a])],
        };
        let report = detect_clustering_repeats(&h);
        assert_eq!(report.violations().count(), 1);
        assert!(report.lines()[0].contains("VIOLATION"));
        // a carried-over clustering after a step that moved is flagged too
        let (a, b, c) = (key(&[0, 0, 1, 1]), key(&[0, 1, 1, 1]), key(&[0, 0, 0, 1]));
        let h = WLHistory {
            steps: vec![step(1, vec![a, b.clone()]), step(2, vec![c.clone(), b.clone()]), step(3, vec![b])],
        };
        assert!(detect_clustering_repeats(&h).violations().count() >= 1);
    }

    #[test]
    fn bound_checks_flag_excess_iterations() {
        let h = WLHistory {
            steps: vec![StepHistory {
                level: 1,
                cells: 3,
                iterations: 4,
                keys: vec![],
            }],
        };
        // S(3, 2) = 3 < 4
        let checks = check_iteration_bounds(&h, 2);
        assert!(!checks[0].ok);
    }

    proptest! {
        #[test]
        fn clustering_key_ignores_label_names(labels in prop::collection::vec(0usize..4, 1..40), shift in 1usize..4) {
            let permuted: Vec<usize> = labels.iter().map(|l| (l + shift) % 4).collect();
            prop_assert_eq!(key(&labels), key(&permuted));
        }

        #[test]
        fn center_shift_is_constant(xs in prop::collection::vec(-50.0f64..50.0, 2..30), cut in 1usize..29, c in -100.0f64..100.0, c2 in -100.0f64..100.0) {
            let n = xs.len();
            let cut = cut.min(n - 1);
            let d = line(&xs);
            let blocks = vec![(0..cut).collect(), (cut..n).collect()];
            let f = center_shift_value(&d, &blocks, &[c]).unwrap();
            let res = center_shift_residual(&d, &blocks, &[c], &[c2]).unwrap();
            prop_assert!(res <= 1e-9 * (1.0 + f.abs()));
        }
    }
}
