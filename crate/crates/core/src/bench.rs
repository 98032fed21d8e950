//! Experiment sweeps over (n, d, K, algorithm) with replicates, and median /
//! quartile summaries of the resulting records.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{kmeanspp_init, lloyd, minibatch_kmeans, MBParams};
use crate::data::{
    generate_mixture, load_csv, DataProvenance, MixtureSpec, RunParams, RunRecord, SubsampleSpec,
    TheoryReport,
};
use crate::error::{Error, Result};
use crate::grid::build_sequence;
use crate::model::{full_error, std_error, CentroidSet, Dataset, DistanceCounter};
use crate::recursive::{rpkm_on_sequence, RpkmParams};
use crate::theory::{check_iteration_bounds, detect_clustering_repeats, WLHistory};
use crate::weighted_lloyd::WLParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rpkm,
    Kmpp,
    Mb,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rpkm => "rpkm",
            Algorithm::Kmpp => "kmpp",
            Algorithm::Mb => "mb",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rpkm" => Ok(Algorithm::Rpkm),
            "kmpp" => Ok(Algorithm::Kmpp),
            "mb" => Ok(Algorithm::Mb),
            other => Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Mixture {
        sigma: f64,
        min_separation_sigmas: f64,
    },
    /// Random rows and columns of a CSV file; `n` and `d` select how many.
    Csv(PathBuf),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Mixture {
            sigma: 1.0,
            min_separation_sigmas: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub n_list: Vec<usize>,
    pub d_list: Vec<usize>,
    pub k_list: Vec<usize>,
    /// RPKM depth.
    pub m: u32,
    /// Minibatch sizes; each one is a separate minibatch run.
    pub b_list: Vec<usize>,
    /// Minibatch batch count.
    pub t: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Compute the full error and std.error after every RPKM step and the
    /// std.error of every final solution.
    pub evaluate: bool,
    pub displacement_threshold: f64,
    pub wl: WLParams,
    pub source: DataSource,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Record wall-clock times. Off by default because it makes output
    /// differ between runs.
    pub timing: bool,
    /// Keep RPKM clustering histories and attach repeat/bound checks.
    pub theory_checks: bool,
}

impl ExperimentConfig {
    pub fn new(algorithms: Vec<Algorithm>, n: usize, d: usize, k: usize, seed: u64) -> Self {
        Self {
            algorithms,
            n_list: vec![n],
            d_list: vec![d],
            k_list: vec![k],
            m: 6,
            b_list: vec![100],
            t: 100,
            replicates: 10,
            seed,
            evaluate: false,
            displacement_threshold: 0.0,
            wl: WLParams::default(),
            source: DataSource::default(),
            jobs: 0,
            timing: false,
            theory_checks: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::invalid("no algorithms selected"));
        }
        for (name, list) in [("n", &self.n_list), ("d", &self.d_list), ("K", &self.k_list)] {
            if list.is_empty() {
                return Err(Error::invalid(format!("{name} list is empty")));
            }
            if list.contains(&0) {
                return Err(Error::invalid(format!("{name} values must be positive")));
            }
        }
        if self.algorithms.contains(&Algorithm::Mb) {
            if self.b_list.is_empty() || self.b_list.contains(&0) {
                return Err(Error::invalid("minibatch sizes must be given and positive"));
            }
            if self.t == 0 {
                return Err(Error::invalid("batch count must be positive"));
            }
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.m == 0 || self.m > crate::grid::MAX_LEVEL {
            return Err(Error::invalid(format!(
                "m must be in 1..={}",
                crate::grid::MAX_LEVEL
            )));
        }
        if self.displacement_threshold.is_nan() || self.displacement_threshold < 0.0 {
            return Err(Error::invalid("displacement threshold must be non-negative"));
        }
        self.wl.validate()
    }

    /// Number of records [`run_experiment`] produces.
    pub fn record_count(&self) -> usize {
        let per_rep: usize = self
            .algorithms
            .iter()
            .map(|a| if *a == Algorithm::Mb { self.b_list.len() } else { 1 })
            .sum();
        per_rep * self.n_list.len() * self.d_list.len() * self.k_list.len() * self.replicates
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of indices into an independent-looking seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |h, &p| splitmix64(h ^ splitmix64(p)))
}

struct Unit {
    n: usize,
    d: usize,
    k: usize,
    replicate: usize,
    /// (n, d, K, replicate) indices.
    path: [u64; 4],
}

/// Runs every configured algorithm on every replicate of every setting.
///
/// Records come out ordered by setting, replicate and algorithm regardless of
/// how many worker threads ran them. Per-run failures are stored in the
/// record's `error` field; only an invalid configuration fails the call.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut units = Vec::new();
    for (ni, &n) in config.n_list.iter().enumerate() {
        for (di, &d) in config.d_list.iter().enumerate() {
            for (ki, &k) in config.k_list.iter().enumerate() {
                for replicate in 0..config.replicates {
                    units.push(Unit {
                        n,
                        d,
                        k,
                        replicate,
                        path: [ni as u64, di as u64, ki as u64, replicate as u64],
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let nested: Vec<Vec<RunRecord>> =
        pool.install(|| units.par_iter().map(|u| run_unit(config, u)).collect());
    Ok(nested.into_iter().flatten().collect())
}

fn load_data(config: &ExperimentConfig, unit: &Unit, seed: u64) -> (Result<Dataset>, DataProvenance) {
    match &config.source {
        DataSource::Mixture {
            sigma,
            min_separation_sigmas,
        } => {
            let mut spec = MixtureSpec::new(unit.n, unit.d, unit.k, seed).with_sigma(*sigma);
            spec.min_separation_sigmas = *min_separation_sigmas;
            let provenance = DataProvenance::Mixture {
                seed,
                sigma: spec.sigma,
                min_separation_sigmas: spec.min_separation_sigmas,
                box_side: spec.box_side,
                mixing: "uniform".into(),
            };
            (generate_mixture(&spec).map(|(d, _)| d), provenance)
        }
        DataSource::Csv(path) => {
            let loaded = load_csv(&SubsampleSpec {
                path: path.clone(),
                d_select: unit.d,
                n_select: unit.n,
                seed,
            });
            let provenance = DataProvenance::Csv {
                path: path.clone(),
                seed,
                delimiter: loaded.as_ref().ok().map(|l| l.delimiter),
                header: loaded.as_ref().ok().map(|l| l.header),
            };
            (loaded.map(|l| l.dataset), provenance)
        }
    }
}

fn run_unit(config: &ExperimentConfig, unit: &Unit) -> Vec<RunRecord> {
    let data_seed = derive_seed(config.seed, &[&[0], &unit.path[..]].concat());
    let (dataset, provenance) = load_data(config, unit, data_seed);

    let mut jobs: Vec<(Algorithm, Option<usize>, u64)> = Vec::new();
    for (ai, &alg) in config.algorithms.iter().enumerate() {
        let bs: Vec<Option<usize>> = if alg == Algorithm::Mb {
            config.b_list.iter().map(|&b| Some(b)).collect()
        } else {
            vec![None]
        };
        for (bi, b) in bs.into_iter().enumerate() {
            let path = [&[1 + ai as u64, bi as u64], &unit.path[..]].concat();
            jobs.push((alg, b, derive_seed(config.seed, &path)));
        }
    }

    jobs.into_iter()
        .map(|(alg, b, seed)| {
            let mut record = RunRecord {
                algorithm: alg.name().into(),
                params: RunParams {
                    replicate: unit.replicate,
                    m: (alg == Algorithm::Rpkm).then_some(config.m),
                    displacement_threshold: (alg == Algorithm::Rpkm)
                        .then_some(config.displacement_threshold),
                    b,
                    t: b.map(|_| config.t),
                    wl_rel_tolerance: config.wl.rel_tolerance,
                    wl_max_iterations: config.wl.max_iterations,
                    data: provenance.clone(),
                },
                seed,
                n: unit.n,
                d: unit.d,
                k: unit.k,
                per_step: Vec::new(),
                total_dist_evals: 0,
                eval_dist_evals: 0,
                final_error: None,
                std_error: None,
                wall_time_ms: None,
                theory: None,
                error: None,
            };
            let started = Instant::now();
            let outcome = match &dataset {
                Ok(data) => run_algorithm(config, alg, b, seed, unit.k, data, &mut record),
                Err(e) => Err(Error::invalid(format!("dataset unavailable: {e}"))),
            };
            if let Err(e) = outcome {
                record.error = Some(e.to_string());
            }
            if config.timing {
                record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            record
        })
        .collect()
}

fn run_algorithm(
    config: &ExperimentConfig,
    alg: Algorithm,
    b: Option<usize>,
    seed: u64,
    k: usize,
    data: &Dataset,
    record: &mut RunRecord,
) -> Result<()> {
    let mut eval = DistanceCounter::new();
    let centroids = match alg {
        Algorithm::Rpkm => {
            let mut params = RpkmParams::new(k, config.m, seed);
            params.displacement_threshold = config.displacement_threshold;
            params.wl = config.wl;
            params.wl.keep_history = config.theory_checks;
            params.evaluate = config.evaluate;
            let seq = build_sequence(data, config.m)?;
            let result = rpkm_on_sequence(data, &seq, &params)?;
            if config.theory_checks {
                let history = WLHistory::from_rpkm(&seq, &result)?;
                let repeats = detect_clustering_repeats(&history);
                record.theory = Some(TheoryReport {
                    repeats: repeats.lines(),
                    repeat_violations: repeats.violations().count(),
                    bound_violations: check_iteration_bounds(&history, k)
                        .iter()
                        .filter(|c| !c.ok)
                        .count(),
                });
            }
            record.total_dist_evals = result.total_dist_evals;
            eval.add(result.eval_dist_evals);
            let last = result.per_step.last().expect("at least one step");
            record.final_error = last.full_error;
            record.std_error = last.std_error;
            record.per_step = result.per_step;
            result.centroids
        }
        Algorithm::Kmpp => {
            let mut counter = DistanceCounter::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let init = kmeanspp_init(data, k, &mut rng, &mut counter)?;
            let run = lloyd(data, &init, &config.wl, &mut counter)?;
            record.total_dist_evals = counter.count();
            run.centroids
        }
        Algorithm::Mb => {
            let b = b.expect("minibatch runs carry a batch size");
            let mut counter = DistanceCounter::new();
            let init = minibatch_seed(data, k, b, seed, &mut counter)?;
            let params = MBParams {
                batch_size: b,
                num_batches: config.t,
                seed: derive_seed(seed, &[1]),
            };
            let state = minibatch_kmeans(data, &init, &params, &mut counter)?;
            record.total_dist_evals = counter.count();
            state.centroids
        }
    };
    if record.final_error.is_none() {
        record.final_error = Some(full_error(data, &centroids, &mut eval)?);
    }
    if config.evaluate && record.std_error.is_none() {
        record.std_error = Some(std_error(data, &centroids, &config.wl, &mut eval)?.rho);
    }
    record.eval_dist_evals = eval.count();
    Ok(())
}

/// K-means++ on a uniform subsample of `min(n, max(3b, K))` points.
fn minibatch_seed(
    data: &Dataset,
    k: usize,
    b: usize,
    seed: u64,
    counter: &mut DistanceCounter,
) -> Result<CentroidSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = (3 * b).max(k).min(data.len());
    let mut picks = index::sample(&mut rng, data.len(), size).into_vec();
    picks.sort_unstable();
    let rows: Vec<&[f64]> = picks.iter().map(|&i| data.point(i)).collect();
    let sub = Dataset::from_rows(&rows)?;
    kmeanspp_init(&sub, k, &mut rng, counter)
}

/// Keys that [`summarize`] can group by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKey {
    Algorithm,
    N,
    D,
    K,
    B,
    /// RPKM step level; each step of an RPKM record counts separately.
    Step,
}

impl GroupKey {
    pub fn name(self) -> &'static str {
        match self {
            GroupKey::Algorithm => "algorithm",
            GroupKey::N => "n",
            GroupKey::D => "d",
            GroupKey::K => "K",
            GroupKey::B => "b",
            GroupKey::Step => "step",
        }
    }
}

impl std::str::FromStr for GroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "algorithm" => GroupKey::Algorithm,
            "n" => GroupKey::N,
            "d" => GroupKey::D,
            "k" | "K" => GroupKey::K,
            "b" => GroupKey::B,
            "step" | "m" => GroupKey::Step,
            other => return Err(Error::invalid(format!("unknown group key {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum KeyValue {
    Missing,
    Num(u64),
    Text(String),
}

impl fmt::Display for KeyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyValue::Missing => Ok(()),
            KeyValue::Num(v) => write!(f, "{v}"),
            KeyValue::Text(s) => f.write_str(s),
        }
    }
}

/// First quartile, median and third quartile, linearly interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Quartiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: Vec<(GroupKey, KeyValue)>,
    pub count: usize,
    pub dist_evals: Quartiles,
    pub std_error: Option<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub group_by: Vec<GroupKey>,
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

struct Sample {
    step: Option<u32>,
    dist_evals: Option<f64>,
    std_error: Option<f64>,
}

fn samples(r: &RunRecord, by_step: bool) -> Vec<Sample> {
    if r.error.is_some() {
        return vec![Sample {
            step: None,
            dist_evals: None,
            std_error: None,
        }];
    }
    if by_step && !r.per_step.is_empty() {
        return r
            .per_step
            .iter()
            .map(|s| Sample {
                step: Some(s.level),
                dist_evals: Some(s.cumulative_dist_evals as f64),
                std_error: s.std_error,
            })
            .collect();
    }
    vec![Sample {
        step: None,
        dist_evals: Some(r.total_dist_evals as f64),
        std_error: r.std_error,
    }]
}

/// Medians and quartiles of distance counts and std.error per group.
///
/// When grouping by step, each RPKM step contributes its cumulative distance
/// count and its own std.error. Otherwise a record contributes its total
/// count. Groups in which no record succeeded are dropped with a warning.
pub fn summarize(records: &[RunRecord], group_by: &[GroupKey]) -> Summary {
    let by_step = group_by.contains(&GroupKey::Step);
    let mut groups: BTreeMap<Vec<KeyValue>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        for s in samples(r, by_step) {
            let key = group_by
                .iter()
                .map(|g| match g {
                    GroupKey::Algorithm => KeyValue::Text(r.algorithm.clone()),
                    GroupKey::N => KeyValue::Num(r.n as u64),
                    GroupKey::D => KeyValue::Num(r.d as u64),
                    GroupKey::K => KeyValue::Num(r.k as u64),
                    GroupKey::B => r.params.b.map_or(KeyValue::Missing, |b| KeyValue::Num(b as u64)),
                    GroupKey::Step => s.step.map_or(KeyValue::Missing, |v| KeyValue::Num(v.into())),
                })
                .collect();
            let entry = groups.entry(key).or_default();
            entry.0.extend(s.dist_evals);
            entry.1.extend(s.std_error);
        }
    }
    let mut summary = Summary {
        group_by: group_by.to_vec(),
        ..Summary::default()
    };
    for (key, (dist, std)) in groups {
        let labelled: Vec<(GroupKey, KeyValue)> = group_by.iter().copied().zip(key).collect();
        match Quartiles::of(&dist) {
            Some(dist_evals) => summary.rows.push(SummaryRow {
                count: dist.len(),
                dist_evals,
                std_error: Quartiles::of(&std),
                key: labelled,
            }),
            None => {
                let what: Vec<String> = labelled
                    .iter()
                    .map(|(g, v)| format!("{}={v}", g.name()))
                    .collect();
                summary
                    .warnings
                    .push(format!("group {{{}}} has no successful runs; omitted", what.join(", ")));
            }
        }
    }
    summary
}

impl Summary {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(sink);
        let mut header: Vec<&str> = self.group_by.iter().map(|g| g.name()).collect();
        header.extend([
            "count",
            "dist_evals_q1",
            "dist_evals_median",
            "dist_evals_q3",
            "std_error_q1",
            "std_error_median",
            "std_error_q3",
        ]);
        out.write_record(&header)?;
        for row in &self.rows {
            let mut fields: Vec<String> = row.key.iter().map(|(_, v)| v.to_string()).collect();
            fields.push(row.count.to_string());
            let q = row.dist_evals;
            fields.extend([q.q1, q.median, q.q3].map(|v| v.to_string()));
            match row.std_error {
                Some(q) => fields.extend([q.q1, q.median, q.q3].map(|v| v.to_string())),
                None => fields.extend([String::new(), String::new(), String::new()]),
            }
            out.write_record(&fields)?;
        }
        out.flush().map_err(|e| Error::io("<sink>", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algorithms: Vec<Algorithm>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(algorithms, 300, 2, 3, 42);
        c.replicates = 3;
        c.m = 4;
        c.b_list = vec![20, 40];
        c.t = 10;
        c
    }

    #[test]
    fn one_record_per_replicate() {
        let c = small(vec![Algorithm::Kmpp]);
        let records = run_experiment(&c).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(c.record_count(), 3);
        let reps: Vec<usize> = records.iter().map(|r| r.params.replicate).collect();
        assert_eq!(reps, vec![0, 1, 2]);
    }

    #[test]
    fn record_count_formula() {
        let mut c = small(vec![Algorithm::Rpkm, Algorithm::Kmpp, Algorithm::Mb]);
        c.n_list = vec![200, 300];
        c.k_list = vec![2, 3];
        let records = run_experiment(&c).unwrap();
        assert_eq!(records.len(), c.record_count());
        assert_eq!(records.len(), (1 + 1 + 2) * 2 * 2 * 3);
        assert!(records.iter().all(|r| r.error.is_none()));
        for r in records.iter().filter(|r| r.algorithm == "mb") {
            // seeding on 3b points plus t·b·K for the batches
            let b = r.params.b.unwrap();
            let seeding = (3 * b).min(r.n) * (r.k - 1);
            assert_eq!(r.total_dist_evals as usize, seeding + 10 * b * r.k);
        }
    }

    #[test]
    fn output_does_not_depend_on_thread_count() {
        let mut c = small(vec![Algorithm::Rpkm, Algorithm::Mb]);
        c.evaluate = true;
        c.jobs = 1;
        let a = run_experiment(&c).unwrap();
        c.jobs = 4;
        assert_eq!(a, run_experiment(&c).unwrap());
    }

    #[test]
    fn algorithms_share_the_replicate_dataset() {
        let c = small(vec![Algorithm::Rpkm, Algorithm::Kmpp]);
        let records = run_experiment(&c).unwrap();
        assert_eq!(records[0].params.data, records[1].params.data);
        assert_ne!(records[0].params.data, records[2].params.data);
        assert_ne!(records[0].seed, records[1].seed);
    }

    #[test]
    fn derived_seeds_are_pure() {
        assert_eq!(derive_seed(5, &[1, 2, 3]), derive_seed(5, &[1, 2, 3]));
        assert_ne!(derive_seed(5, &[1, 2, 3]), derive_seed(5, &[1, 3, 2]));
        assert_ne!(derive_seed(5, &[1, 2, 3]), derive_seed(6, &[1, 2, 3]));
    }

    #[test]
    fn failures_are_recorded_per_run() {
        let mut c = small(vec![Algorithm::Kmpp]);
        c.source = DataSource::Csv("/definitely/not/here.csv".into());
        let records = run_experiment(&c).unwrap();
        assert_eq!(records.len(), 3);
        assert!(records.iter().all(|r| r.error.is_some() && r.final_error.is_none()));
        let s = summarize(&records, &[GroupKey::Algorithm]);
        assert!(s.rows.is_empty());
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = small(vec![Algorithm::Rpkm]);
        c.replicates = 0;
        assert!(run_experiment(&c).is_err());
        let mut c = small(vec![]);
        c.replicates = 1;
        assert!(run_experiment(&c).is_err());
        let mut c = small(vec![Algorithm::Mb]);
        c.b_list.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn quartiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
        let q = Quartiles::of(&[7.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (7.0, 7.0, 7.0));
        assert!(Quartiles::of(&[]).is_none());
    }

    #[test]
    fn single_record_summary_is_the_record() {
        let mut c = small(vec![Algorithm::Kmpp]);
        c.replicates = 1;
        c.evaluate = true;
        let records = run_experiment(&c).unwrap();
        let s = summarize(&records, &[GroupKey::Algorithm]);
        assert_eq!(s.rows.len(), 1);
        let row = &s.rows[0];
        assert_eq!(row.dist_evals.median, records[0].total_dist_evals as f64);
        assert_eq!(row.std_error.unwrap().median, records[0].std_error.unwrap());
    }

    #[test]
    fn grouping_by_algorithm_gives_one_row_each() {
        let c = small(vec![Algorithm::Rpkm, Algorithm::Kmpp, Algorithm::Mb]);
        let records = run_experiment(&c).unwrap();
        let s = summarize(&records, &[GroupKey::Algorithm]);
        let names: Vec<String> = s.rows.iter().map(|r| r.key[0].1.to_string()).collect();
        assert_eq!(names, vec!["kmpp", "mb", "rpkm"]);
        let by_step = summarize(&records, &[GroupKey::Algorithm, GroupKey::Step]);
        // kmpp and mb have no steps; rpkm contributes one row per level
        assert!(by_step.rows.len() > 3);
        let mut out = Vec::new();
        by_step.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("algorithm,step,count,dist_evals_q1"));
    }

    #[test]
    fn theory_checks_are_attached() {
        let mut c = small(vec![Algorithm::Rpkm]);
        c.theory_checks = true;
        c.wl.rel_tolerance = 0.0;
        for r in run_experiment(&c).unwrap() {
            let t = r.theory.expect("theory report");
            assert_eq!(t.repeat_violations, 0, "{:?}", t.repeats);
            assert_eq!(t.bound_violations, 0);
        }
    }
}
