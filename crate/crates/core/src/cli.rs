//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on I/O
//! errors. Every subcommand prints its metrics as `key=value` lines and can
//! save them as JSON with `--report`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::context::{ContextMode, HistogramSpec};
use crate::error::{Error, Result};
use crate::hetgraph::{load_edge_list_files, read_graph_cache, write_edge_list, EdgeListOptions, HetGraph, NodeId};
use crate::relfeat::{BaseSet, OperatorSet};
use crate::summary::{
    context_matrices, derive_embeddings_with, summarize, write_label_map, EmbedOptions, Summary, SummaryConfig,
};
use crate::tasks::{self, LogRegOptions, Report, SplitSpec};

#[derive(Parser, Debug)]
#[command(name = "latsum", version, about = "Latent network summarization")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true, env = "LATSUM_WORKERS")]
    workers: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Save the metrics as JSON.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a summary from a graph.
    Summarize {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        summary: SummaryArgs,
        #[arg(short, long)]
        out: PathBuf,
        /// Write each level's context matrix (Matrix Market) into this directory.
        #[arg(long)]
        dump_context: Option<PathBuf>,
    },
    /// Derive node embeddings from a summary.
    Embed {
        #[arg(short, long)]
        summary: PathBuf,
        #[command(flatten)]
        graph: GraphArgs,
        /// Comma-separated node labels; all nodes when absent.
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<String>>,
        /// Scale each embedding row to unit length.
        #[arg(long)]
        normalize: bool,
        /// Output TSV (stdout when absent).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate link prediction on a held-out edge split.
    LinkPredict {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        summary: SummaryArgs,
        #[arg(long, default_value_t = 0.4)]
        remove_frac: f64,
        #[arg(long, default_value_t = 0.1)]
        train_frac: f64,
        #[arg(long, default_value_t = 0.25)]
        test_frac: f64,
        #[arg(long, default_value_t = 1)]
        neg_ratio: usize,
        /// Inverse L2 regularization strength.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Inject a dense ER subgraph into a second ER graph and rank nodes by
    /// embedding displacement.
    InjectAndDetect {
        #[arg(long, default_value_t = 10_000)]
        num_nodes: usize,
        #[arg(long, default_value_t = 10.0)]
        avg_degree: f64,
        #[arg(long, default_value_t = 100)]
        inject_n: usize,
        #[arg(long, default_value_t = 0.5)]
        inject_p: f64,
        #[command(flatten)]
        summary: SummaryArgs,
    },
    /// Score consecutive snapshots `tNNN.tsv` of a directory and flag events.
    DetectEvents {
        #[arg(long)]
        snapshots: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        summary: SummaryArgs,
    },
    /// Write a synthetic graph as an edge list.
    Generate {
        #[command(subcommand)]
        model: Model,
    },
    /// Summary size and build time on ER graphs of growing size.
    Bench {
        #[arg(long, default_value = "1e2..1e5")]
        sizes: String,
        #[arg(long, default_value_t = 10.0)]
        avg_degree: f64,
        #[command(flatten)]
        summary: SummaryArgs,
    },
}

#[derive(Subcommand, Debug)]
enum Model {
    /// Erdős–Rényi graph with the given average degree.
    Er {
        #[arg(long)]
        num_nodes: usize,
        #[arg(long, default_value_t = 10.0)]
        avg_degree: f64,
        /// Also plant an ER(n, p) subgraph on this many random nodes.
        #[arg(long, requires = "inject_p")]
        inject_n: Option<usize>,
        #[arg(long, requires = "inject_n")]
        inject_p: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
        /// File receiving the planted node ids, one per line.
        #[arg(long, requires = "inject_n")]
        injected_out: Option<PathBuf>,
    },
    /// Stochastic block model with undirected edges.
    Sbm {
        /// Comma-separated block sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_out: f64,
        #[arg(short, long)]
        out: PathBuf,
        /// File receiving `node<TAB>block` lines.
        #[arg(long)]
        blocks_out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct FormatArgs {
    /// Edge lines carry a weight column.
    #[arg(long)]
    weighted: bool,
    /// Edge lines end with an edge type column.
    #[arg(long)]
    typed_edges: bool,
    /// Each line is an undirected edge.
    #[arg(long)]
    undirected: bool,
}

impl FormatArgs {
    fn options(&self) -> EdgeListOptions {
        EdgeListOptions { weighted: self.weighted, typed_edges: self.typed_edges, undirected: self.undirected }
    }
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list TSV, or a binary graph cache ending in `.lsgr`.
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// `node<TAB>type` lines.
    #[arg(long)]
    node_types: Option<PathBuf>,
    #[command(flatten)]
    format: FormatArgs,
}

impl GraphArgs {
    fn load(&self) -> Result<HetGraph> {
        if self.input.extension().is_some_and(|e| e == "lsgr") {
            if self.node_types.is_some() {
                return Err(Error::Config("--node-types cannot be combined with a graph cache".into()));
            }
            return read_graph_cache(std::io::BufReader::new(File::open(&self.input)?));
        }
        load_edge_list_files(&self.input, self.node_types.as_deref(), self.format.options())
    }
}

#[derive(Args, Debug)]
struct SummaryArgs {
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Total embedding dimension, split across levels.
    #[arg(long, default_value_t = 128)]
    dim: usize,
    /// Histogram bins per feature.
    #[arg(long, default_value_t = 32)]
    bins: usize,
    #[arg(long, default_value_t = 2.0)]
    log_base: f64,
    /// `all` or a comma list of out,in,total.
    #[arg(long, default_value = "all")]
    base_features: BaseSet,
    /// `all` or a comma list of operator names.
    #[arg(long, default_value = "all")]
    operators: OperatorSet,
    /// `full` (typed, directional blocks) or `simple` (one egonet block).
    #[arg(long, default_value = "full")]
    context_mode: ContextMode,
}

impl SummaryArgs {
    fn config(&self, seed: u64) -> Result<SummaryConfig> {
        let mut cfg = SummaryConfig {
            levels: self.levels,
            dim: self.dim,
            histogram: HistogramSpec::new(self.bins, self.log_base)?,
            bases: self.base_features,
            operators: self.operators,
            context_mode: self.context_mode,
            ..SummaryConfig::default()
        };
        cfg.svd.seed = seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Sidecar holding the id-to-label map of a summarized graph.
pub fn label_map_path(summary: &Path) -> PathBuf {
    let mut s = summary.as_os_str().to_owned();
    s.push(".labels.tsv");
    PathBuf::from(s)
}

fn resolve_nodes(g: &HetGraph, labels: &[String]) -> Result<Vec<NodeId>> {
    let index = g.label_index();
    labels
        .iter()
        .map(|l| index.get(l.trim()).copied().ok_or_else(|| Error::Validation(format!("unknown node {l:?}"))))
        .collect()
}

fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<Report> {
    let seed = cli.seed;
    let mut report = Report::new();
    match &cli.command {
        Command::Summarize { graph, summary, out: path, dump_context } => {
            let cfg = summary.config(seed)?;
            let g = graph.load()?;
            let s = summarize(&g, &cfg)?;
            s.save(path)?;
            let mut labels = create(&label_map_path(path))?;
            write_label_map(&g, &mut labels)?;
            labels.flush()?;
            if let Some(dir) = dump_context {
                std::fs::create_dir_all(dir)?;
                for m in context_matrices(&g, &cfg)? {
                    let mut w = create(&dir.join(format!("context_level{}.mtx", m.level)))?;
                    m.matrix.write_matrix_market(&mut w)?;
                    w.flush()?;
                }
            }
            report
                .insert("nodes", g.num_nodes())
                .insert("arcs", g.num_arcs())
                .insert("functions", s.functions().count())
                .insert("dim", s.dim())
                .insert("summary_bytes", s.to_bytes().len());
        }
        Command::Embed { summary, graph, nodes, normalize, out: path } => {
            let s = Summary::load(summary)?;
            let g = graph.load()?;
            let subset = nodes.as_ref().map(|l| resolve_nodes(&g, l)).transpose()?;
            let opts = EmbedOptions { normalize: *normalize, histogram: None };
            let e = derive_embeddings_with(&s, &g, subset.as_deref(), &opts)?;
            match path {
                Some(p) => {
                    let mut w = create(p)?;
                    e.write_tsv(&g, &mut w)?;
                    w.flush()?;
                }
                None => e.write_tsv(&g, &mut *out)?,
            }
            report.insert("rows", e.len()).insert("dim", e.dim());
        }
        Command::LinkPredict { graph, summary, remove_frac, train_frac, test_frac, neg_ratio, c } => {
            let cfg = summary.config(seed)?;
            let spec = SplitSpec {
                remove_frac: *remove_frac,
                train_frac: *train_frac,
                test_frac: *test_frac,
                neg_ratio: *neg_ratio,
                seed,
            };
            let opts = LogRegOptions { c: *c, ..Default::default() };
            let g = graph.load()?;
            let r = tasks::link_prediction_eval(&g, &spec, &cfg, &opts)?;
            report
                .insert("train_pairs", r.train_pairs)
                .insert("test_pairs", r.test_pairs)
                .insert("embedding", r.embedding)
                .insert("degree_baseline", r.degree_baseline)
                .insert("random_baseline", r.random_baseline);
        }
        Command::InjectAndDetect { num_nodes, avg_degree, inject_n, inject_p, summary } => {
            let cfg = summary.config(seed)?;
            let g1 = tasks::generate_er(*num_nodes, *avg_degree, seed)?;
            let g2 = tasks::generate_er(*num_nodes, *avg_degree, seed.wrapping_add(1))?;
            let (g2, injected) = tasks::inject_er_subgraph(&g2, *inject_n, *inject_p, seed.wrapping_add(2))?;
            let precision = tasks::anomaly_precision(&g1, &g2, &injected, &cfg)?;
            report
                .insert("nodes", num_nodes)
                .insert("injected", injected.len())
                .insert("inject_p", inject_p)
                .insert("precision", precision);
        }
        Command::DetectEvents { snapshots, format, summary } => {
            let cfg = summary.config(seed)?;
            let graphs = tasks::load_snapshot_dir(snapshots, format.options())?;
            let s = tasks::detect_events(&graphs, &cfg)?;
            report
                .insert("snapshots", graphs.len())
                .insert("steps", &s.steps)
                .insert("scores", &s.scores)
                .insert("median", s.median)
                .insert("stdev", s.stdev)
                .insert("flagged", &s.flagged);
        }
        Command::Generate { model } => match model {
            Model::Er { num_nodes, avg_degree, inject_n, inject_p, out: path, injected_out } => {
                let mut g = tasks::generate_er(*num_nodes, *avg_degree, seed)?;
                if let (Some(n), Some(p)) = (inject_n, inject_p) {
                    let (planted, nodes) = tasks::inject_er_subgraph(&g, *n, *p, seed.wrapping_add(1))?;
                    g = planted;
                    if let Some(f) = injected_out {
                        let mut w = create(f)?;
                        for v in &nodes {
                            writeln!(w, "{v}")?;
                        }
                        w.flush()?;
                    }
                    report.insert("injected", nodes.len());
                }
                write_graph(&g, path)?;
                report.insert("nodes", g.num_nodes()).insert("arcs", g.num_arcs());
            }
            Model::Sbm { sizes, p_in, p_out, out: path, blocks_out } => {
                let (g, blocks) = tasks::generate_sbm(sizes, *p_in, *p_out, seed)?;
                write_graph(&g, path)?;
                if let Some(f) = blocks_out {
                    let mut w = create(f)?;
                    for (v, b) in blocks.iter().enumerate() {
                        writeln!(w, "{v}\t{b}")?;
                    }
                    w.flush()?;
                }
                report.insert("nodes", g.num_nodes()).insert("arcs", g.num_arcs());
            }
        },
        Command::Bench { sizes, avg_degree, summary } => {
            let cfg = summary.config(seed)?;
            let sizes = tasks::parse_sizes(sizes)?;
            let rows = tasks::bench(&sizes, *avg_degree, &cfg, seed)?;
            writeln!(out, "nodes\tedges\tsummary_bytes\tseconds")?;
            for r in &rows {
                writeln!(out, "{}\t{}\t{}\t{:.3}", r.nodes, r.edges, r.summary_bytes, r.seconds)?;
            }
            report.insert("rows", &rows);
            // the table already carries the timings
            return Ok(report);
        }
    }
    Ok(report)
}

fn write_graph(g: &HetGraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_edge_list(g, &mut w)?;
    w.flush()?;
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        2
    } else {
        1
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Regular output goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();

    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        let _ = writeln!(err, "error: --workers must be at least 1");
        return 1;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 1;
        }
    };
    let result = pool.install(|| {
        let report = execute(&cli, out)?;
        if !matches!(cli.command, Command::Bench { .. } | Command::Embed { out: None, .. }) {
            report.write_lines(&mut *out)?;
        }
        if let Some(path) = &cli.report {
            report.save_json(path)?;
        }
        Ok::<_, Error>(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs with the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = BufWriter::new(std::io::stdout());
    let mut err = std::io::stderr();
    let code = run_with(args, &mut out, &mut err);
    let _ = out.flush();
    code
}
