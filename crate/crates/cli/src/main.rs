use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commgrow::experiment::{
    bench_csv, bench_generation, experiment_csv, read_table, run_experiment, standard_table, DEFAULT_REPLICATES,
};
use commgrow::generator::{GenError, GenParams};
use commgrow::graph::{Graph, Partition, PartitionKind};
use commgrow::io::{self, EdgeListDocument};
use commgrow::metrics::{self, default_x_min, MetricsError};
use commgrow::{analyze, compare_partitions, detect_communities, generate, subcluster, AnalyzeOptions, AplMode};
use serde_json::json;

/// Environment variable read when `--seed` / `--base-seed` is not given.
const SEED_ENV: &str = "COMMGROW_SEED";

const EXPERIMENT_HELP: &str = "\
Output CSV, one row per configuration, header always present:
  key          configuration key (1..=32 for the built-in table)
  n,m,c,p_t,p_c  generation parameters
  replicates   replicates requested
  completed    replicates that generated and analyzed without error
  apl          mean average shortest path length
  cc           mean average local clustering coefficient
  alpha        mean power-law exponent (x_min = max(m, 2)); empty if no replicate had a fittable tail
  q            mean modularity of the detected partition
  rd           mean relative density of the detected partition
  gt_q         mean modularity of the generator's communities
  gt_rd        mean relative density of the generator's communities
  error        per-replicate failures joined with \"; \", empty when none
Floats are printed with six decimals. Replicate r of key k uses seed
splitmix64(splitmix64(base_seed) ^ ((k << 32) | r)).

A custom --table is a CSV with header key,n,m,c,p_t,p_c.";

#[derive(Parser, Debug)]
#[command(name = "commgrow", version, about = "Generate and analyze growing networks with community structure")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a network and write it with its communities and a manifest
    Generate(GenerateArgs),
    /// Print the metrics of a graph as JSON
    Analyze(AnalyzeArgs),
    /// Detect communities by greedy modularity agglomeration
    Detect(DetectArgs),
    /// Run the parameter sweep and write mean metrics as CSV
    #[command(after_help = EXPERIMENT_HELP)]
    Experiment(ExperimentArgs),
    /// Time generation at several sizes; CSV columns n,edges,seconds,runs
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Edges per new node
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Number of seed communities
    #[arg(long, default_value_t = 10)]
    c: usize,
    /// Probability of triad formation
    #[arg(long, default_value_t = 1.0)]
    pt: f64,
    /// Probability of an inter-community edge per step
    #[arg(long, default_value_t = 0.01)]
    pc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Graphml,
    Dot,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Number of nodes
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    model: ModelArgs,
    /// Random seed; drawn from entropy when absent and recorded in the manifest
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Output directory (created if missing)
    #[arg(long, short)]
    out: PathBuf,
    /// Extra exports besides graph.tsv and communities.tsv
    #[arg(long, value_enum)]
    format: Vec<ExportFormat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AplChoice {
    /// Exact up to 20000 nodes, sampled above
    Auto,
    Exact,
    Sampled,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Edge list to analyze
    #[arg(long = "in", short)]
    input: PathBuf,
    /// Ground-truth partition (node<TAB>group); defaults to communities.tsv next to the input
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Ignore any ground-truth partition
    #[arg(long, conflicts_with = "labels")]
    no_labels: bool,
    #[arg(long, value_enum, default_value_t = AplChoice::Auto)]
    apl_mode: AplChoice,
    /// BFS sources for sampled path length
    #[arg(long, default_value_t = metrics::SAMPLED_APL_SOURCES)]
    sources: usize,
    /// Lower cutoff of the power-law fit; defaults to max(m, 2) for generated graphs, else 2
    #[arg(long)]
    xmin: Option<u64>,
    /// Largest communities to break down; 0 disables
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Seed for source sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Edge list to partition
    #[arg(long = "in", short)]
    input: PathBuf,
    /// Write the detected partition (node<TAB>group) here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-cluster the largest k detected communities
    #[arg(long, default_value_t = 0)]
    top_k: usize,
    /// Partition to compare against (NMI, ARI)
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Custom sweep table instead of the built-in 32 configurations
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    /// Worker threads
    #[arg(long, short, default_value_t = default_jobs())]
    jobs: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Base seed for replicate seeds; drawn from entropy when absent
    #[arg(long, env = SEED_ENV)]
    base_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Node counts to time
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    sizes: Vec<usize>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions per size; the median is reported
    #[arg(long, default_value_t = 3)]
    runs: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
enum Failure {
    /// Invalid flag values (exit 2).
    Usage(String),
    /// Input that cannot be read or parsed (exit 3).
    Input(anyhow::Error),
    /// A graph the metrics are undefined on (exit 4).
    Disconnected(PathBuf),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn flag_error(e: &GenError) -> Failure {
    let flag = match e {
        GenError::TooFewNodes { .. } | GenError::TooLarge(_) => "--n",
        GenError::ZeroEdgesPerNode => "--m",
        GenError::ZeroCommunities => "--c",
        GenError::InvalidProbability { name: "p_t", .. } => "--pt",
        GenError::InvalidProbability { .. } => "--pc",
    };
    Failure::Usage(format!("invalid {flag}: {e}"))
}

fn entropy_seed() -> u64 {
    commgrow::RngStream::from_entropy().seed()
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<EdgeListDocument, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Input)?;
    let doc = io::read_edge_list(&text)
        .with_context(|| format!("cannot parse {}", path.display()))
        .map_err(Failure::Input)?;
    for w in &doc.warnings {
        log::warn!("{}: {w}", path.display());
    }
    if doc.remap.is_some() {
        log::warn!("{}: node ids were not dense and have been renumbered", path.display());
    }
    Ok(doc)
}

fn read_labels(path: &Path, g: &Graph) -> Result<Partition, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Input)?;
    let p = io::read_partition(&text, PartitionKind::GroundTruth)
        .with_context(|| format!("cannot parse {}", path.display()))
        .map_err(Failure::Input)?;
    p.ensure_covers(g)
        .with_context(|| format!("{} does not match the graph", path.display()))
        .map_err(Failure::Input)?;
    Ok(p)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let (seed, seed_source) = match args.seed {
        Some(s) => (s, "given"),
        None => (entropy_seed(), "entropy"),
    };
    let m = &args.model;
    let params = GenParams::new(args.n, m.m, m.c, m.pt, m.pc, seed);
    params.validate().map_err(|e| flag_error(&e))?;

    let (graph, trace) = generate(&params).map_err(|e| flag_error(&e))?;
    let truth = Partition::from_labels(&graph).context("generated graph is unlabeled")?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut files = vec!["graph.tsv", "communities.tsv"];
    let write = |name: &str, text: String| -> Result<()> {
        let path = args.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("graph.tsv", io::write_edge_list(&graph, Some(&params)))?;
    write("communities.tsv", io::write_partition(&truth))?;
    if args.format.contains(&ExportFormat::Graphml) {
        write("graph.graphml", io::write_graphml(&graph, Some(&truth)))?;
        files.push("graph.graphml");
    }
    if args.format.contains(&ExportFormat::Dot) {
        write("graph.dot", io::write_dot(&graph, Some(&truth)))?;
        files.push("graph.dot");
    }
    let manifest = json!({
        "tool": "commgrow",
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
        "seed": seed,
        "seed_source": seed_source,
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "communities": truth.group_count(),
        "edge_shortfall": trace.total_shortfall(),
        "skipped_inter_edges": trace.skipped_inter_edges(),
        "files": files,
    });
    write("manifest.json", serde_json::to_string_pretty(&manifest).context("manifest")? + "\n")?;
    log::info!("{params}: {} nodes, {} edges", graph.node_count(), graph.edge_count());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let doc = read_graph(&args.input)?;
    let g = &doc.graph;
    let sibling = args.input.with_file_name("communities.tsv");
    let labels = match (&args.labels, args.no_labels) {
        (_, true) => None,
        (Some(p), _) => Some(read_labels(p, g)?),
        (None, _) if sibling.is_file() => {
            log::info!("using ground truth from {}", sibling.display());
            Some(read_labels(&sibling, g)?)
        }
        _ => None,
    };
    let apl_mode = match args.apl_mode {
        AplChoice::Auto => None,
        AplChoice::Exact => Some(AplMode::Exact),
        AplChoice::Sampled => Some(AplMode::Sampled { sources: args.sources }),
    };
    let x_min = args
        .xmin
        .unwrap_or_else(|| doc.params.map_or(2, |p| default_x_min(p.m)));
    let options = AnalyzeOptions {
        apl_mode,
        x_min,
        top_k: args.top_k,
        seed: args.seed,
    };
    let report = match analyze(g, labels.as_ref(), &options) {
        Ok(r) => r,
        Err(MetricsError::Disconnected) => return Err(Failure::Disconnected(args.input)),
        Err(e) => return Err(Failure::Input(anyhow::Error::new(e).context(args.input.display().to_string()))),
    };
    write_or_print(args.out.as_deref(), &(report.to_json() + "\n"))?;
    Ok(())
}

fn cmd_detect(args: DetectArgs) -> Result<(), Failure> {
    let doc = read_graph(&args.input)?;
    let g = &doc.graph;
    let (partition, dendrogram) = detect_communities(g)
        .with_context(|| args.input.display().to_string())
        .map_err(Failure::Input)?;
    let sizes: Vec<usize> = partition.groups().iter().map(Vec::len).collect();
    let subclusters: Vec<_> = subcluster(g, &partition, args.top_k)
        .into_iter()
        .map(|s| {
            json!({
                "group": s.group,
                "size": s.members.len(),
                "sub_communities": s.partition.group_count(),
                "modularity": s.modularity,
            })
        })
        .collect();
    let mut summary = json!({
        "communities": partition.group_count(),
        "modularity": dendrogram.best_modularity(),
        "relative_density": metrics::relative_density(g, &partition).ok(),
        "merges": dendrogram.merges.len(),
        "sizes": sizes,
        "subclusters": subclusters,
    });
    if let Some(path) = &args.labels {
        let truth = read_labels(path, g)?;
        let agreement = compare_partitions(&truth, &partition).context("comparing partitions")?;
        summary["agreement"] = json!(agreement);
    }
    if let Some(out) = &args.out {
        fs::write(out, io::write_partition(&partition)).with_context(|| format!("writing {}", out.display()))?;
    }
    println!("{}", serde_json::to_string_pretty(&summary).context("summary")?);
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    if args.replicates == 0 {
        return Err(Failure::Usage("invalid --replicates: must be at least 1".into()));
    }
    if args.jobs == 0 {
        return Err(Failure::Usage("invalid --jobs: must be at least 1".into()));
    }
    let configs = match &args.table {
        None => standard_table(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(Failure::Input)?;
            read_table(&text)
                .with_context(|| format!("cannot parse {}", path.display()))
                .map_err(Failure::Input)?
        }
    };
    let base_seed = args.base_seed.unwrap_or_else(|| {
        let s = entropy_seed();
        eprintln!("base seed {s} (from entropy)");
        s
    });
    let rows = run_experiment(&configs, args.replicates, base_seed, args.jobs);
    let failed: usize = rows.iter().map(|r| r.errors.len()).sum();
    if failed > 0 {
        log::warn!("{failed} replicate(s) failed; see the error column");
    }
    write_or_print(args.out_csv.as_deref(), &experiment_csv(&rows))?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.sizes.is_empty() {
        return Err(Failure::Usage("invalid --sizes: give at least one size".into()));
    }
    let m = &args.model;
    let smallest = *args.sizes.iter().min().expect("nonempty");
    let template = GenParams::new(smallest, m.m, m.c, m.pt, m.pc, args.seed);
    template.validate().map_err(|e| flag_error(&e))?;
    let rows = bench_generation(&args.sizes, &template, args.runs).map_err(|e| flag_error(&e))?;
    for r in &rows {
        log::info!("n={} {:.3}s", r.n, r.seconds);
    }
    write_or_print(args.out_csv.as_deref(), &bench_csv(&rows))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: unreadable input: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Disconnected(path)) => {
            eprintln!(
                "error: {} is disconnected; path length is undefined (analyze each component separately)",
                path.display()
            );
            ExitCode::from(4)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
