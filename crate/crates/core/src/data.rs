//! Datasets in and run records out: seeded Gaussian mixtures, CSV ingestion
//! with random row/column subsampling, and JSON-Lines/CSV record writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sq_dist, CentroidSet, Dataset};
use crate::recursive::StepRecord;

/// Budget of candidate means drawn before a mixture is declared infeasible.
pub const MAX_MEAN_ATTEMPTS: usize = 10_000;

/// Isotropic Gaussian mixture with uniform mixing weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub n: usize,
    pub d: usize,
    pub components: usize,
    pub seed: u64,
    pub sigma: f64,
    /// Minimum distance between component means, in units of `sigma`.
    pub min_separation_sigmas: f64,
    /// Side of the hypercube `[0, box_side]^d` the means are drawn from.
    pub box_side: f64,
}

impl MixtureSpec {
    pub fn new(n: usize, d: usize, components: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            components,
            seed,
            sigma: 1.0,
            min_separation_sigmas: 4.0,
            box_side: 20.0,
        }
    }

    /// Sets `sigma` and rescales the box to `20 · sigma`.
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self.box_side = 20.0 * sigma;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.components == 0 || self.n < self.components {
            return Err(Error::invalid(format!(
                "mixture needs n >= components >= 1 (n = {}, components = {})",
                self.n, self.components
            )));
        }
        if self.d == 0 {
            return Err(Error::invalid("mixture dimension must be at least 1"));
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("min_separation_sigmas", self.min_separation_sigmas),
            ("box_side", self.box_side),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

fn draw_means(spec: &MixtureSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let min_sq = (spec.min_separation_sigmas * spec.sigma).powi(2);
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(spec.components);
    let mut attempts = 0;
    while means.len() < spec.components {
        if attempts == MAX_MEAN_ATTEMPTS {
            return Err(Error::InfeasibleMixture {
                components: spec.components,
                separation: spec.min_separation_sigmas * spec.sigma,
                attempts,
            });
        }
        attempts += 1;
        let candidate: Vec<f64> = (0..spec.d)
            .map(|_| rng.random::<f64>() * spec.box_side)
            .collect();
        if means.iter().all(|m| sq_dist(m, &candidate) >= min_sq) {
            means.push(candidate);
        }
    }
    Ok(means)
}

/// Component means of the mixture `spec` describes; the same means
/// [`generate_mixture`] uses.
pub fn mixture_means(spec: &MixtureSpec) -> Result<CentroidSet> {
    spec.validate()?;
    let means = draw_means(spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    CentroidSet::from_rows(&means)
}

/// Samples `spec.n` points and returns them with their component labels.
pub fn generate_mixture(spec: &MixtureSpec) -> Result<(Dataset, Vec<usize>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = draw_means(spec, &mut rng)?;
    let mut points = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let c = rng.random_range(0..spec.components);
        labels.push(c);
        for &mu in &means[c] {
            let z: f64 = rng.sample(StandardNormal);
            points.push(mu + spec.sigma * z);
        }
    }
    Ok((Dataset::new(points, spec.d)?, labels))
}

/// Random rows and columns of a numeric CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleSpec {
    pub path: PathBuf,
    pub d_select: usize,
    pub n_select: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Comma,
    Whitespace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub delimiter: Delimiter,
    pub header: bool,
    /// Selected data-row indices (0-based, header excluded), ascending.
    pub rows: Vec<usize>,
    /// Selected column indices, ascending.
    pub columns: Vec<usize>,
}

fn open(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>> + '_> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, l)| l.map(|l| (i + 1, l)).map_err(|e| Error::io(path, e)))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty())))
}

type Rows<'a> = Box<dyn Iterator<Item = Result<(usize, Vec<String>)>> + 'a>;

/// Nonblank lines of a file split into fields, with 1-based line numbers.
fn read_rows(path: &Path, delimiter: Delimiter) -> Result<Rows<'_>> {
    match delimiter {
        Delimiter::Comma => {
            let reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_path(path)
                .map_err(|e| csv_error(path, e))?;
            Ok(Box::new(reader.into_records().map(move |r| {
                let rec = r.map_err(|e| csv_error(path, e))?;
                let line = rec.position().map_or(0, |p| p.line() as usize);
                Ok((line, rec.iter().map(str::to_owned).collect()))
            })))
        }
        Delimiter::Whitespace => Ok(Box::new(open(path)?.map(|entry| {
            entry.map(|(line, text)| (line, text.split_whitespace().map(str::to_owned).collect()))
        }))),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a numeric CSV file and keeps `n_select` random rows and `d_select`
/// random columns, both drawn without replacement from the seeded RNG.
///
/// The delimiter is a comma if the first nonblank line contains one, else
/// whitespace. That line is a header if any of its fields is not a number.
pub fn load_csv(spec: &SubsampleSpec) -> Result<LoadedCsv> {
    let path = spec.path.as_path();
    let (_, first) = open(path)?
        .next()
        .transpose()?
        .ok_or(Error::EmptyInput("CSV file"))?;
    let delimiter = if first.contains(',') {
        Delimiter::Comma
    } else {
        Delimiter::Whitespace
    };
    let mut rows_iter = read_rows(path, delimiter)?;
    let (_, first) = rows_iter.next().transpose()?.ok_or(Error::EmptyInput("CSV file"))?;
    let columns = first.len();
    let header = first.iter().any(|f| f.parse::<f64>().is_err());
    let rows = rows_iter.count() + usize::from(!header);

    if spec.d_select == 0 || spec.d_select > columns {
        return Err(Error::invalid(format!(
            "cannot select {} of {columns} columns",
            spec.d_select
        )));
    }
    if spec.n_select == 0 || spec.n_select > rows {
        return Err(Error::invalid(format!(
            "cannot select {} of {rows} rows",
            spec.n_select
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cols = index::sample(&mut rng, columns, spec.d_select).into_vec();
    cols.sort_unstable();
    let mut picked = index::sample(&mut rng, rows, spec.n_select).into_vec();
    picked.sort_unstable();

    let mut keep = vec![false; rows];
    picked.iter().for_each(|&r| keep[r] = true);
    let mut points = Vec::with_capacity(spec.n_select * spec.d_select);
    for (row, entry) in read_rows(path, delimiter)?.skip(usize::from(header)).enumerate() {
        let (line_no, fields) = entry?;
        let parse_error = |column: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            column,
            message,
        };
        if fields.len() != columns {
            return Err(parse_error(
                fields.len().min(columns) + 1,
                format!("expected {columns} fields, found {}", fields.len()),
            ));
        }
        if !keep[row] {
            continue;
        }
        for &c in &cols {
            let v: f64 = fields[c]
                .parse()
                .map_err(|_| parse_error(c + 1, format!("not a number: {:?}", fields[c])))?;
            if !v.is_finite() {
                return Err(parse_error(c + 1, format!("non-finite value {v}")));
            }
            points.push(v);
        }
    }
    Ok(LoadedCsv {
        dataset: Dataset::new(points, spec.d_select)?,
        delimiter,
        header,
        rows: picked,
        columns: cols,
    })
}

/// Where a run's dataset came from, with the generation settings needed to
/// reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataProvenance {
    Mixture {
        seed: u64,
        sigma: f64,
        min_separation_sigmas: f64,
        box_side: f64,
        mixing: String,
    },
    Csv {
        path: PathBuf,
        seed: u64,
        delimiter: Option<Delimiter>,
        header: Option<bool>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub replicate: usize,
    /// RPKM depth.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub displacement_threshold: Option<f64>,
    /// Minibatch size and batch count.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<usize>,
    pub wl_rel_tolerance: f64,
    pub wl_max_iterations: usize,
    pub data: DataProvenance,
}

/// Outcome of the structural checks on one RPKM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    /// One line per repeated clustering.
    pub repeats: Vec<String>,
    pub repeat_violations: usize,
    /// Steps whose round count exceeded its bound.
    pub bound_violations: usize,
}

/// One algorithm run on one dataset replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub params: RunParams,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// RPKM steps; empty for the other algorithms.
    pub per_step: Vec<StepRecord>,
    pub total_dist_evals: u64,
    pub eval_dist_evals: u64,
    pub final_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    /// Null unless timing was requested, so that outputs stay reproducible.
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theory: Option<TheoryReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Appends records to a writer as JSON Lines.
pub struct JsonLinesSink<W: Write> {
    writer: W,
    path: PathBuf,
}

impl JsonLinesSink<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            writer: BufWriter::new(file),
            path,
        })
    }
}

impl<W: Write> JsonLinesSink<W> {
    /// `path` names the sink in error messages.
    pub fn new(writer: W, path: impl Into<PathBuf>) -> Self {
        Self {
            writer,
            path: path.into(),
        }
    }

    pub fn write(&mut self, record: &RunRecord) -> Result<()> {
        write_run_record(record, &mut self.writer).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(&self.path, source),
            other => other,
        })
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.writer)
    }
}

/// Writes one record as a single JSON line.
pub fn write_run_record<W: Write + ?Sized>(record: &RunRecord, sink: &mut W) -> Result<()> {
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    sink.write_all(&line).map_err(|e| Error::io("<sink>", e))
}

/// Parses a JSON-Lines file written by [`JsonLinesSink`].
pub fn read_run_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let mut records = Vec::new();
    for entry in open(path)? {
        let (line_no, line) = entry?;
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            column: e.column(),
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Header of the flat CSV export. Each RPKM step becomes its own row with
/// the `step_*` columns filled; other algorithms get a single row with those
/// columns empty. Absent values are empty fields.
pub const RECORD_CSV_HEADER: &str = "algorithm,replicate,seed,n,d,K,m,b,t,step_level,step_cells,step_wl_iters,step_dist_evals,step_cumulative_dist_evals,step_centroid_error,step_full_error,step_std_error,step_delta,total_dist_evals,eval_dist_evals,final_error,std_error,wall_time_ms,error";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes records in the flat CSV layout of [`RECORD_CSV_HEADER`].
pub fn write_records_csv<W: Write>(records: &[RunRecord], sink: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(RECORD_CSV_HEADER.split(','))?;
    for r in records {
        let head = [
            r.algorithm.clone(),
            r.params.replicate.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            opt(r.params.m),
            opt(r.params.b),
            opt(r.params.t),
        ];
        let tail = [
            r.total_dist_evals.to_string(),
            r.eval_dist_evals.to_string(),
            opt(r.final_error),
            opt(r.std_error),
            opt(r.wall_time_ms),
            r.error.clone().unwrap_or_default(),
        ];
        let steps: Vec<[String; 9]> = if r.per_step.is_empty() {
            vec![Default::default()]
        } else {
            r.per_step
                .iter()
                .map(|s| {
                    [
                        s.level.to_string(),
                        s.cells.to_string(),
                        s.wl_iters.to_string(),
                        s.dist_evals.to_string(),
                        s.cumulative_dist_evals.to_string(),
                        s.centroid_error.to_string(),
                        opt(s.full_error),
                        opt(s.std_error),
                        opt(s.delta),
                    ]
                })
                .collect()
        };
        for step in &steps {
            out.write_record(head.iter().chain(step).chain(&tail))?;
        }
    }
    out.flush().map_err(|e| Error::io("<sink>", e))
}

/// Writes a dataset as CSV with a `x0,x1,…` header, optionally followed by
/// a `label` column.
pub fn write_dataset_csv<W: Write>(dataset: &Dataset, labels: Option<&[usize]>, sink: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    out.write_record(&header)?;
    for (i, row) in dataset.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(f64::to_string).collect();
        if let Some(l) = labels {
            fields.push(l[i].to_string());
        }
        out.write_record(&fields)?;
    }
    out.flush().map_err(|e| Error::io("<sink>", e))
}
