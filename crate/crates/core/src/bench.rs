//! Benchmark batteries behind the `cascade-bench` binary.
//!
//! Each battery builds (or loads) one tree per cascade setting, runs the
//! same query batch against each, and emits one CSV row per experiment
//! cell. Output is a pure function of the configuration: queries run
//! sequentially, aggregates are sums and extrema, and wall-clock columns
//! are only written when explicitly requested.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::{self, FastaError, DEFAULT_QUERY_EDITS};
use crate::metric::{Euclidean, EuclideanPoint, Levenshtein, Metric, MetricError, Sequence};
use crate::persist::{ObjectCodec, PersistError};
use crate::query::{brute_force_knn, brute_force_range, range_optimality, QueryStats};
use crate::tree::{BuildConfig, BuildError, CascadeLimit, CmtTree};

/// File looked up in the data directory when `--dataset fasta` has no `--path`.
pub const DEFAULT_FASTA: &str = "uniprot_sprot.fasta";

/// Random pairs sampled to estimate the largest pairwise distance.
pub const DIAMETER_PAIRS: usize = 1000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Fasta(#[from] FastaError),
    #[error("tree file {path}: {source}")]
    Persist {
        path: PathBuf,
        #[source]
        source: PersistError,
    },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl BenchError {
    /// 0 success, 1 verification failure, 2 configuration error, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Verification(_) => 1,
            BenchError::Config(_) | BenchError::Build(_) | BenchError::Metric(_) => 2,
            BenchError::Io { .. } | BenchError::Fasta(_) | BenchError::Persist { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    Uniform,
    Fasta,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Uniform { n: usize, dim: usize, seed: u64 },
    Fasta { path: PathBuf, cap: usize },
}

impl DatasetSpec {
    fn label(&self) -> &'static str {
        match self {
            DatasetSpec::Uniform { .. } => "uniform",
            DatasetSpec::Fasta { .. } => "fasta",
        }
    }

    fn dim(&self) -> usize {
        match self {
            DatasetSpec::Uniform { dim, .. } => *dim,
            DatasetSpec::Fasta { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Battery {
    /// Radii as fractions of the estimated dataset diameter.
    Range { radii: Vec<f64> },
    /// `bound_pcts` empty means unbounded only.
    Knn { ks: Vec<usize>, bound_pcts: Vec<f64> },
    Optimality { ks: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub cascades: Vec<CascadeLimit>,
    pub battery: Battery,
    pub queries: usize,
    pub seed: u64,
    pub verify: bool,
    pub timing: bool,
    /// Prebuilt tree to query instead of building one per cascade setting.
    pub tree: Option<PathBuf>,
}

impl RunConfig {
    pub fn check(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.cascades.is_empty() && self.tree.is_none() {
            return bad("no cascade settings given");
        }
        if self.queries == 0 {
            return bad("--queries must be at least 1");
        }
        if let DatasetSpec::Uniform { dim: 0, .. } = self.dataset {
            return bad("--dim must be at least 1");
        }
        match &self.battery {
            Battery::Range { radii } => {
                if radii.is_empty() {
                    return bad("empty radius grid");
                }
                if radii.iter().any(|r| r.is_nan() || *r < 0.0) {
                    return bad("radius fractions must be non-negative");
                }
            }
            Battery::Knn { ks, bound_pcts } => {
                if ks.is_empty() || ks.contains(&0) {
                    return bad("k grid must be non-empty with every k >= 1");
                }
                if bound_pcts.iter().any(|b| b.is_nan() || *b < 0.0) {
                    return bad("bound percentages must be non-negative");
                }
            }
            Battery::Optimality { ks } => {
                if ks.is_empty() || ks.contains(&0) {
                    return bad("k grid must be non-empty with every k >= 1");
                }
            }
        }
        Ok(())
    }
}

/// One CSV row. Fields that do not apply to a battery stay empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub command: &'static str,
    pub dataset: &'static str,
    pub n: usize,
    pub dim: usize,
    pub cascade: String,
    pub radius_fraction: Option<f64>,
    pub radius: Option<f64>,
    pub k: Option<usize>,
    pub bound_pct: Option<f64>,
    pub queries: usize,
    pub distance_calls: Aggregate,
    pub nodes_visited: Aggregate,
    pub objects_collected: Aggregate,
    pub result_size: Aggregate,
    /// Mean result size over N.
    pub result_fraction: f64,
    pub optimality_ratio: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// Mean, minimum and maximum over a query batch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut sum, mut n) = (0.0, 0usize);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            sum += v;
            n += 1;
            min = min.min(v);
            max = max.max(v);
        }
        if n == 0 {
            return Aggregate::default();
        }
        Aggregate {
            mean: sum / n as f64,
            min,
            max,
        }
    }
}

/// Report line for one built tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub dataset: &'static str,
    pub n: usize,
    pub cascade: CascadeLimit,
    pub height: usize,
    pub build_distance_calls: u64,
    pub stored_intervals: usize,
    pub path: Option<PathBuf>,
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros removed.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa.to_string()), sign, exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}

const RUN_COLUMNS: &[&str] = &[
    "command",
    "dataset",
    "n",
    "dim",
    "cascade",
    "radius_fraction",
    "radius",
    "k",
    "bound_pct",
    "queries",
    "mean_distance_calls",
    "min_distance_calls",
    "max_distance_calls",
    "mean_nodes_visited",
    "mean_objects_collected",
    "mean_result_size",
    "min_result_size",
    "max_result_size",
    "mean_result_fraction",
    "mean_optimality_ratio",
];

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// Renders run records as CSV.
pub fn records_to_csv(records: &[RunRecord], timing: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = RUN_COLUMNS.to_vec();
    if timing {
        header.push("mean_wall_ms");
    }
    w.write_record(&header).unwrap();
    for r in records {
        let mut row = vec![
            r.command.to_string(),
            r.dataset.to_string(),
            r.n.to_string(),
            r.dim.to_string(),
            r.cascade.clone(),
            opt(r.radius_fraction, fmt_sig6),
            opt(r.radius, fmt_sig6),
            opt(r.k, |k| k.to_string()),
            opt(r.bound_pct, fmt_sig6),
            r.queries.to_string(),
            fmt_sig6(r.distance_calls.mean),
            fmt_sig6(r.distance_calls.min),
            fmt_sig6(r.distance_calls.max),
            fmt_sig6(r.nodes_visited.mean),
            fmt_sig6(r.objects_collected.mean),
            fmt_sig6(r.result_size.mean),
            fmt_sig6(r.result_size.min),
            fmt_sig6(r.result_size.max),
            fmt_sig6(r.result_fraction),
            opt(r.optimality_ratio, fmt_sig6),
        ];
        if timing {
            row.push(opt(r.wall_ms, fmt_sig6));
        }
        w.write_record(&row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn build_reports_to_csv(reports: &[BuildReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "n",
        "cascade",
        "height",
        "build_distance_calls",
        "stored_intervals",
        "tree",
    ])
    .unwrap();
    for r in reports {
        w.write_record([
            r.dataset.to_string(),
            r.n.to_string(),
            r.cascade.to_string(),
            r.height.to_string(),
            r.build_distance_calls.to_string(),
            r.stored_intervals.to_string(),
            r.path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Largest distance among `pairs` random object pairs.
pub fn estimate_diameter<T, M: Metric<T>>(
    objects: &[T],
    metric: &M,
    pairs: usize,
    seed: u64,
) -> Result<f64, MetricError> {
    if objects.len() < 2 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut best = 0.0_f64;
    for _ in 0..pairs {
        let a = rng.gen_range(0..objects.len());
        let b = rng.gen_range(0..objects.len());
        best = best.max(metric.distance(&objects[a], &objects[b])?);
    }
    Ok(best)
}

/// Objects plus queries for one experiment, with the metric that relates them.
trait Workload {
    type Object: Clone + ObjectCodec;
    type Metric: Metric<Self::Object> + Clone;

    fn metric(&self) -> Self::Metric;
    /// Scale that `--bound-pct` percentages apply to for a given query.
    fn bound_scale(&self, query: &Self::Object, diameter: f64) -> f64;
    fn describe(query: &Self::Object) -> String;
}

struct PointWork;

impl Workload for PointWork {
    type Object = EuclideanPoint;
    type Metric = Euclidean;

    fn metric(&self) -> Euclidean {
        Euclidean
    }

    fn bound_scale(&self, _query: &EuclideanPoint, diameter: f64) -> f64 {
        diameter
    }

    fn describe(query: &EuclideanPoint) -> String {
        format!("{:?}", query.coords())
    }
}

struct SequenceWork;

impl Workload for SequenceWork {
    type Object = Sequence;
    type Metric = Levenshtein;

    fn metric(&self) -> Levenshtein {
        Levenshtein
    }

    fn bound_scale(&self, query: &Sequence, _diameter: f64) -> f64 {
        query.len() as f64
    }

    fn describe(query: &Sequence) -> String {
        format!("{} {}", query.id, query.as_str())
    }
}

fn fasta_path(path: &Path) -> PathBuf {
    if path.as_os_str().is_empty() {
        data::data_dir()
            .map(|d| d.join(DEFAULT_FASTA))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_FASTA))
    } else {
        path.to_path_buf()
    }
}

fn load_points(cfg: &RunConfig) -> (Vec<EuclideanPoint>, Vec<EuclideanPoint>) {
    let DatasetSpec::Uniform { n, dim, seed } = cfg.dataset else {
        unreachable!()
    };
    (
        data::gen_uniform_points(n, dim, seed),
        data::sample_point_queries(cfg.queries, dim, cfg.seed),
    )
}

fn load_sequences(cfg: &RunConfig) -> Result<(Vec<Sequence>, Vec<Sequence>), BenchError> {
    let DatasetSpec::Fasta { path, cap } = &cfg.dataset else {
        unreachable!()
    };
    let seqs = data::parse_fasta(fasta_path(path), *cap)?;
    if seqs.is_empty() {
        return Err(BenchError::Config("FASTA input holds no sequences".into()));
    }
    let queries = data::sample_sequence_queries(&seqs, cfg.queries, DEFAULT_QUERY_EDITS, cfg.seed);
    Ok((seqs, queries))
}

type Trees<W> = Vec<CmtTree<<W as Workload>::Object, <W as Workload>::Metric>>;

/// Trees to benchmark: the one in `--tree`, or one per cascade setting.
fn trees_for<W: Workload>(
    work: &W,
    objects: &[W::Object],
    cfg: &RunConfig,
) -> Result<Trees<W>, BenchError> {
    if let Some(path) = &cfg.tree {
        let tree = CmtTree::load(path, work.metric()).map_err(|source| BenchError::Persist {
            path: path.clone(),
            source,
        })?;
        if tree.len() != objects.len() {
            return Err(BenchError::Config(format!(
                "tree {} holds {} objects but the dataset has {}",
                path.display(),
                tree.len(),
                objects.len()
            )));
        }
        return Ok(vec![tree]);
    }
    cfg.cascades
        .iter()
        .map(|&c| {
            CmtTree::build(objects.to_vec(), work.metric(), BuildConfig::new(c, cfg.seed))
                .map_err(BenchError::from)
        })
        .collect()
}

fn base_record<T, M>(cfg: &RunConfig, tree: &CmtTree<T, M>, command: &'static str) -> RunRecord {
    RunRecord {
        command,
        dataset: cfg.dataset.label(),
        n: tree.len(),
        dim: cfg.dataset.dim(),
        cascade: tree.cascade().to_string(),
        queries: cfg.queries,
        ..RunRecord::default()
    }
}

struct Sample {
    stats: QueryStats,
    result: usize,
    ratio: Option<f64>,
}

fn summarize(mut rec: RunRecord, samples: &[Sample], started: Instant, timing: bool) -> RunRecord {
    let n = rec.n.max(1) as f64;
    rec.distance_calls = Aggregate::of(samples.iter().map(|s| s.stats.distance_calls as f64));
    rec.nodes_visited = Aggregate::of(samples.iter().map(|s| s.stats.nodes_visited as f64));
    rec.objects_collected = Aggregate::of(samples.iter().map(|s| s.stats.objects_collected as f64));
    rec.result_size = Aggregate::of(samples.iter().map(|s| s.result as f64));
    rec.result_fraction = rec.result_size.mean / n;
    if samples.iter().all(|s| s.ratio.is_some()) && !samples.is_empty() {
        rec.optimality_ratio = Some(Aggregate::of(samples.iter().filter_map(|s| s.ratio)).mean);
    }
    if timing {
        rec.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3 / samples.len().max(1) as f64);
    }
    rec
}

fn run_range<W: Workload>(
    work: &W,
    objects: &[W::Object],
    queries: &[W::Object],
    cfg: &RunConfig,
    radii: &[f64],
) -> Result<Vec<RunRecord>, BenchError> {
    let metric = work.metric();
    let diameter = estimate_diameter(objects, &metric, DIAMETER_PAIRS, cfg.seed)?;
    let mut out = Vec::new();
    for tree in trees_for(work, objects, cfg)? {
        for &fraction in radii {
            let radius = fraction * diameter;
            let started = Instant::now();
            let mut samples = Vec::with_capacity(queries.len());
            for (qi, q) in queries.iter().enumerate() {
                let mut stats = QueryStats::default();
                let found = tree.collect_range_query(q, radius, &mut stats)?;
                if cfg.verify {
                    let expected: Vec<usize> = brute_force_range(objects, &metric, q, radius)?
                        .into_iter()
                        .map(|n| n.object)
                        .collect();
                    let got = found.objects();
                    if got != expected {
                        return Err(BenchError::Verification(format!(
                            "range mismatch for query {qi} ({}) at radius {radius}: tree returned {} objects, scan {}",
                            W::describe(q),
                            got.len(),
                            expected.len()
                        )));
                    }
                    let mut count_stats = QueryStats::default();
                    let count = tree.count_query(q, radius, &mut count_stats)?;
                    if count != expected.len() {
                        return Err(BenchError::Verification(format!(
                            "count mismatch for query {qi}: {count} vs {}",
                            expected.len()
                        )));
                    }
                }
                samples.push(Sample {
                    stats,
                    result: found.len(),
                    ratio: None,
                });
            }
            let mut rec = base_record(cfg, &tree, "range");
            rec.radius_fraction = Some(fraction);
            rec.radius = Some(radius);
            out.push(summarize(rec, &samples, started, cfg.timing));
        }
    }
    Ok(out)
}

fn run_knn<W: Workload>(
    work: &W,
    objects: &[W::Object],
    queries: &[W::Object],
    cfg: &RunConfig,
    ks: &[usize],
    bound_pcts: &[f64],
) -> Result<Vec<RunRecord>, BenchError> {
    let metric = work.metric();
    let diameter = estimate_diameter(objects, &metric, DIAMETER_PAIRS, cfg.seed)?;
    let bounds: Vec<Option<f64>> = if bound_pcts.is_empty() {
        vec![None]
    } else {
        bound_pcts.iter().map(|&b| Some(b)).collect()
    };
    let mut out = Vec::new();
    for tree in trees_for(work, objects, cfg)? {
        for &k in ks {
            for &pct in &bounds {
                let started = Instant::now();
                let mut samples = Vec::with_capacity(queries.len());
                for (qi, q) in queries.iter().enumerate() {
                    let bound = pct.map_or(f64::INFINITY, |p| p / 100.0 * work.bound_scale(q, diameter));
                    let mut stats = QueryStats::default();
                    let found = tree.knn_query(q, k, bound, &mut stats)?;
                    if cfg.verify {
                        let expected = brute_force_knn(objects, &metric, q, k, bound)?;
                        let same = found.len() == expected.len()
                            && found.iter().zip(&expected).all(|(a, b)| a.distance == b.distance);
                        if !same {
                            return Err(BenchError::Verification(format!(
                                "kNN mismatch for query {qi} ({}), k={k} bound={bound}: tree {:?} scan {:?}",
                                W::describe(q),
                                found.iter().map(|n| n.distance).collect::<Vec<_>>(),
                                expected.iter().map(|n| n.distance).collect::<Vec<_>>()
                            )));
                        }
                    }
                    samples.push(Sample {
                        stats,
                        result: found.len(),
                        ratio: None,
                    });
                }
                let mut rec = base_record(cfg, &tree, "knn");
                rec.k = Some(k);
                rec.bound_pct = pct;
                out.push(summarize(rec, &samples, started, cfg.timing));
            }
        }
    }
    Ok(out)
}

fn run_optimality<W: Workload>(
    work: &W,
    objects: &[W::Object],
    queries: &[W::Object],
    cfg: &RunConfig,
    ks: &[usize],
) -> Result<Vec<RunRecord>, BenchError> {
    let metric = work.metric();
    let mut out = Vec::new();
    for tree in trees_for(work, objects, cfg)? {
        for &k in ks {
            let k = k.min(tree.len().max(1));
            let started = Instant::now();
            let mut samples = Vec::with_capacity(queries.len());
            for (qi, q) in queries.iter().enumerate() {
                let o = range_optimality(&tree, q, k)?;
                if cfg.verify {
                    let expected = brute_force_knn(objects, &metric, q, k, f64::INFINITY)?;
                    let kth = expected.last().map_or(0.0, |n| n.distance);
                    if kth != o.radius {
                        return Err(BenchError::Verification(format!(
                            "k-th neighbor distance mismatch for query {qi} ({}): {} vs {kth}",
                            W::describe(q),
                            o.radius
                        )));
                    }
                }
                samples.push(Sample {
                    stats: o.knn,
                    result: k,
                    ratio: Some(o.ratio()),
                });
            }
            let mut rec = base_record(cfg, &tree, "optimality");
            rec.k = Some(k);
            out.push(summarize(rec, &samples, started, cfg.timing));
        }
    }
    Ok(out)
}

fn dispatch<W: Workload>(
    work: &W,
    objects: &[W::Object],
    queries: &[W::Object],
    cfg: &RunConfig,
) -> Result<Vec<RunRecord>, BenchError> {
    match &cfg.battery {
        Battery::Range { radii } => run_range(work, objects, queries, cfg, radii),
        Battery::Knn { ks, bound_pcts } => run_knn(work, objects, queries, cfg, ks, bound_pcts),
        Battery::Optimality { ks } => run_optimality(work, objects, queries, cfg, ks),
    }
}

/// Runs a query battery and returns its rows.
pub fn run(cfg: &RunConfig) -> Result<Vec<RunRecord>, BenchError> {
    cfg.check()?;
    match cfg.dataset {
        DatasetSpec::Uniform { .. } => {
            let (objects, queries) = load_points(cfg);
            dispatch(&PointWork, &objects, &queries, cfg)
        }
        DatasetSpec::Fasta { .. } => {
            let (objects, queries) = load_sequences(cfg)?;
            dispatch(&SequenceWork, &objects, &queries, cfg)
        }
    }
}

/// Runs a battery and renders it as CSV.
pub fn run_csv(cfg: &RunConfig) -> Result<String, BenchError> {
    Ok(records_to_csv(&run(cfg)?, cfg.timing))
}

fn build_and_save<W: Workload>(
    work: &W,
    objects: &[W::Object],
    cfg: &RunConfig,
) -> Result<Vec<BuildReport>, BenchError> {
    let multiple = cfg.cascades.len() > 1;
    let mut out = Vec::new();
    for &cascade in &cfg.cascades {
        let tree = CmtTree::build(objects.to_vec(), work.metric(), BuildConfig::new(cascade, cfg.seed))?;
        let path = cfg.tree.as_ref().map(|p| {
            if multiple {
                let mut s = p.clone().into_os_string();
                s.push(format!(".{cascade}"));
                PathBuf::from(s)
            } else {
                p.clone()
            }
        });
        if let Some(path) = &path {
            tree.save(path).map_err(|source| BenchError::Persist {
                path: path.clone(),
                source,
            })?;
        }
        out.push(BuildReport {
            dataset: cfg.dataset.label(),
            n: tree.len(),
            cascade,
            height: tree.height(),
            build_distance_calls: tree.build_distance_calls(),
            stored_intervals: tree.interval_count(),
            path,
        });
    }
    Ok(out)
}

/// Builds one tree per cascade setting, saving each when `cfg.tree` is set.
/// With several settings the cascade is appended to the file name.
pub fn build(cfg: &RunConfig) -> Result<Vec<BuildReport>, BenchError> {
    if cfg.cascades.is_empty() {
        return Err(BenchError::Config("no cascade settings given".into()));
    }
    match cfg.dataset {
        DatasetSpec::Uniform { .. } => {
            let (objects, _) = load_points(cfg);
            build_and_save(&PointWork, &objects, cfg)
        }
        DatasetSpec::Fasta { .. } => {
            let (objects, _) = load_sequences(cfg)?;
            build_and_save(&SequenceWork, &objects, cfg)
        }
    }
}

// ---- command line ----------------------------------------------------------

#[derive(Debug, Parser)]
#[command(name = "cascade-bench", version, about = "Build cascaded metric trees and measure query cost")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build trees and report height and construction distance calls.
    Build(CommonArgs),
    /// Range queries over a radius grid.
    Range {
        #[command(flatten)]
        common: CommonArgs,
        /// Radii as fractions of the estimated dataset diameter.
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.4,0.8,1.6,3.2")]
        radii: Vec<f64>,
    },
    /// k-nearest-neighbor queries, optionally range-bounded.
    Knn {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        k: Vec<usize>,
        /// Radius bounds in percent: of query length for sequences, of the
        /// estimated diameter for points. Omit for unbounded queries.
        #[arg(long = "bound-pct", value_delimiter = ',')]
        bound_pct: Vec<f64>,
    },
    /// Range-optimality of kNN search: range-query calls at the k-th
    /// neighbor distance over kNN calls.
    Optimality {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        k: Vec<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub dataset: DatasetKind,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// FASTA file; defaults to $CASCADE_INDEX_DATA_DIR/uniprot_sprot.fasta.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Maximum number of sequences read from the FASTA file.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cascade settings: 0 (Baseline), 1 (CMT-1), inf (CMT), or any level cap.
    #[arg(long, value_delimiter = ',', default_value = "0,1,inf")]
    pub cascade: Vec<CascadeLimit>,
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    /// Check every query against a linear scan; exit 1 on any mismatch.
    #[arg(long)]
    pub verify: bool,
    /// Add a mean wall-clock column (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tree file: written by `build`, read by the query commands.
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

impl CommonArgs {
    pub fn to_config(&self, battery: Battery) -> Result<RunConfig, BenchError> {
        let dataset = match self.dataset {
            DatasetKind::Uniform => DatasetSpec::Uniform {
                n: self.n,
                dim: self.dim,
                seed: self.seed,
            },
            DatasetKind::Fasta => DatasetSpec::Fasta {
                path: self.path.clone().unwrap_or_default(),
                cap: self.cap.unwrap_or(usize::MAX),
            },
        };
        let cfg = RunConfig {
            dataset,
            cascades: self.cascade.clone(),
            battery,
            queries: self.queries,
            seed: self.seed,
            verify: self.verify,
            timing: self.timing,
            tree: self.tree.clone(),
        };
        Ok(cfg)
    }
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Build(c) => c,
            Command::Range { common, .. }
            | Command::Knn { common, .. }
            | Command::Optimality { common, .. } => common,
        }
    }

    /// Executes the command and returns the CSV it produces.
    pub fn execute(&self) -> Result<String, BenchError> {
        match self {
            Command::Build(common) => {
                let cfg = common.to_config(Battery::Optimality { ks: vec![1] })?;
                Ok(build_reports_to_csv(&build(&cfg)?))
            }
            Command::Range { common, radii } => run_csv(&common.to_config(Battery::Range {
                radii: radii.clone(),
            })?),
            Command::Knn { common, k, bound_pct } => run_csv(&common.to_config(Battery::Knn {
                ks: k.clone(),
                bound_pcts: bound_pct.clone(),
            })?),
            Command::Optimality { common, k } => {
                run_csv(&common.to_config(Battery::Optimality { ks: k.clone() })?)
            }
        }
    }
}

/// Entry point shared by the binary: parses `args`, runs, writes output.
/// Returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command.execute().and_then(|csv| write_output(cli.command.common().out.as_deref(), &csv)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cascade-bench: {e}");
            e.exit_code()
        }
    }
}

fn write_output(path: Option<&Path>, csv: &str) -> Result<(), BenchError> {
    match path {
        Some(p) => std::fs::write(p, csv).map_err(|source| BenchError::Io {
            context: format!("writing {}", p.display()),
            source,
        }),
        None => io::stdout().write_all(csv.as_bytes()).map_err(|source| BenchError::Io {
            context: "writing stdout".into(),
            source,
        }),
    }
}
