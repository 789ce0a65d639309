//! The 32-configuration parameter sweep and the generation-time benchmark.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{analyze, AnalyzeOptions};
use crate::generator::{generate_graph, GenParams};
use crate::graph::Partition;

/// Edges per new node used throughout the sweep.
pub const SWEEP_M: usize = 2;
/// Replicates averaged per configuration by default.
pub const DEFAULT_REPLICATES: usize = 5;

/// Column order of [`experiment_csv`].
pub const EXPERIMENT_COLUMNS: [&str; 16] = [
    "key", "n", "m", "c", "p_t", "p_c", "replicates", "completed", "apl", "cc", "alpha", "q", "rd", "gt_q", "gt_rd",
    "error",
];

/// Column order of [`bench_csv`].
pub const BENCH_COLUMNS: [&str; 4] = ["n", "edges", "seconds", "runs"];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("table row {row}: {reason}")]
    Table { row: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One sweep configuration. The seed inside `params` is ignored; replicate seeds
/// come from [`replicate_seed`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub key: u32,
    pub params: GenParams,
}

/// The standard sweep: n ∈ {1000, 10000} × c ∈ {10, 20} × p_t ∈ {0.5, 1.0} ×
/// p_c ∈ {0.01, 0.1, 0.5, 1.0}, with m = 2 and keys 1..=32 in that nesting order.
pub fn standard_table() -> Vec<ExperimentConfig> {
    let mut rows = Vec::with_capacity(32);
    for n in [1000, 10_000] {
        for c in [10, 20] {
            for p_t in [0.5, 1.0] {
                for p_c in [0.01, 0.1, 0.5, 1.0] {
                    rows.push(ExperimentConfig {
                        key: rows.len() as u32 + 1,
                        params: GenParams::new(n, SWEEP_M, c, p_t, p_c, 0),
                    });
                }
            }
        }
    }
    rows
}

/// Parses a custom sweep table: CSV with header `key,n,m,c,p_t,p_c`.
pub fn read_table(text: &str) -> Result<Vec<ExperimentConfig>, ExperimentError> {
    #[derive(Deserialize)]
    struct Row {
        key: u32,
        n: usize,
        m: usize,
        c: usize,
        p_t: f64,
        p_c: f64,
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<Row>().enumerate() {
        let r = record?;
        let params = GenParams::new(r.n, r.m, r.c, r.p_t, r.p_c, 0);
        params.validate().map_err(|e| ExperimentError::Table {
            row: i + 1,
            reason: e.to_string(),
        })?;
        rows.push(ExperimentConfig { key: r.key, params });
    }
    Ok(rows)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one replicate:
/// `splitmix64(splitmix64(base_seed) ^ ((key << 32) | replicate))`.
pub fn replicate_seed(key: u32, replicate: u32, base_seed: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ (((key as u64) << 32) | replicate as u64))
}

/// Metrics of one generated replicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateMetrics {
    pub seed: u64,
    pub apl: f64,
    pub cc: f64,
    pub alpha: Option<f64>,
    pub q: f64,
    pub rd: f64,
    pub gt_q: f64,
    pub gt_rd: f64,
}

/// Generates and analyzes one replicate. Per-community breakdown is skipped.
pub fn run_replicate(params: &GenParams) -> Result<ReplicateMetrics, String> {
    let g = generate_graph(params).map_err(|e| e.to_string())?;
    let truth = Partition::from_labels(&g).map_err(|e| e.to_string())?;
    let options = AnalyzeOptions {
        x_min: crate::metrics::default_x_min(params.m),
        top_k: 0,
        seed: params.seed,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&g, Some(&truth), &options).map_err(|e| e.to_string())?;
    let gt = report.ground_truth.expect("ground truth supplied");
    Ok(ReplicateMetrics {
        seed: params.seed,
        apl: report.avg_path_length,
        cc: report.avg_clustering,
        alpha: report.alpha,
        q: report.modularity,
        rd: report.relative_density,
        gt_q: gt.modularity,
        gt_rd: gt.relative_density,
    })
}

/// Mean metrics of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub key: u32,
    pub params: GenParams,
    pub replicates: usize,
    pub completed: usize,
    pub apl: Option<f64>,
    pub cc: Option<f64>,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub rd: Option<f64>,
    pub gt_q: Option<f64>,
    pub gt_rd: Option<f64>,
    pub errors: Vec<String>,
    pub runs: Vec<ReplicateMetrics>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl ExperimentRow {
    fn aggregate(config: &ExperimentConfig, results: Vec<Result<ReplicateMetrics, String>>) -> Self {
        let replicates = results.len();
        let mut runs = Vec::new();
        let mut errors = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(m) => runs.push(m),
                Err(e) => errors.push(format!("replicate {i}: {e}")),
            }
        }
        let field = |f: fn(&ReplicateMetrics) -> f64| mean(runs.iter().map(f));
        ExperimentRow {
            key: config.key,
            params: config.params,
            replicates,
            completed: runs.len(),
            apl: field(|r| r.apl),
            cc: field(|r| r.cc),
            alpha: mean(runs.iter().filter_map(|r| r.alpha)),
            q: field(|r| r.q),
            rd: field(|r| r.rd),
            gt_q: field(|r| r.gt_q),
            gt_rd: field(|r| r.gt_rd),
            errors,
            runs,
        }
    }
}

/// Runs every configuration `replicates` times on `jobs` worker threads.
///
/// Results are keyed by (configuration, replicate) and aggregated in that order,
/// so the output does not depend on scheduling.
pub fn run_experiment(
    configs: &[ExperimentConfig],
    replicates: usize,
    base_seed: u64,
    jobs: usize,
) -> Vec<ExperimentRow> {
    let tasks: Vec<(usize, GenParams)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, config)| {
            (0..replicates).map(move |r| {
                let mut params = config.params;
                params.seed = replicate_seed(config.key, r as u32, base_seed);
                (ci, params)
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let results: Vec<Result<ReplicateMetrics, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(ci, params)| {
                let out = run_replicate(params);
                log::info!(
                    "key {} seed {}: {}",
                    configs[*ci].key,
                    params.seed,
                    if out.is_ok() { "ok" } else { "failed" }
                );
                out
            })
            .collect()
    });
    let mut results = results.into_iter();
    configs
        .iter()
        .map(|config| ExperimentRow::aggregate(config, results.by_ref().take(replicates).collect()))
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// CSV with one row per configuration; columns are [`EXPERIMENT_COLUMNS`].
pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EXPERIMENT_COLUMNS).expect("in-memory write");
    for r in rows {
        let p = &r.params;
        w.write_record([
            r.key.to_string(),
            p.n.to_string(),
            p.m.to_string(),
            p.c.to_string(),
            p.p_t.to_string(),
            p.p_c.to_string(),
            r.replicates.to_string(),
            r.completed.to_string(),
            fmt_opt(r.apl),
            fmt_opt(r.cc),
            fmt_opt(r.alpha),
            fmt_opt(r.q),
            fmt_opt(r.rd),
            fmt_opt(r.gt_q),
            fmt_opt(r.gt_rd),
            r.errors.join("; "),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub edges: usize,
    /// Median wall-clock generation time.
    pub seconds: f64,
    pub runs: usize,
}

/// Times generation (without trace recording) for each size; the reported time is
/// the median of `runs` repetitions.
pub fn bench_generation(
    sizes: &[usize],
    template: &GenParams,
    runs: usize,
) -> Result<Vec<BenchRow>, crate::generator::GenError> {
    let runs = runs.max(1);
    sizes
        .iter()
        .map(|&n| {
            let params = GenParams { n, ..*template };
            params.validate()?;
            let mut times = Vec::with_capacity(runs);
            let mut edges = 0;
            for _ in 0..runs {
                let start = Instant::now();
                let g = generate_graph(&params)?;
                times.push(start.elapsed().as_secs_f64());
                edges = g.edge_count();
            }
            times.sort_by(f64::total_cmp);
            Ok(BenchRow {
                n,
                edges,
                seconds: times[times.len() / 2],
                runs,
            })
        })
        .collect()
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([r.n.to_string(), r.edges.to_string(), format!("{:.6}", r.seconds), r.runs.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
