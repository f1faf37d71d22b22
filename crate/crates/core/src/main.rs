use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use treeagg::baselines::{
    consensus_clusters, majority_vote_labels, ConsensusMethod, DEFAULT_GC_THRESHOLD,
};
use treeagg::driver::{run_cptam_with, DriverConfig, ParserWeights, TraceEvent};
use treeagg::eval::{eval_labeled, eval_structure, rank_parsers, EvalError};
use treeagg::fixtures::generate_corpus;
use treeagg::io::{
    load_corpus, read_trees, write_bracketed, Corpus, CorpusError, EmptyLabelPolicy, LoadOptions,
    ParseOptions, SkipRecord,
};
use treeagg::labels::finalize_tree;
use treeagg::rf::{agreement_stats, weighted_objective, AgreementStats};
use treeagg::structure::bundle_clusters;
use treeagg::AggregateError;

const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "treeagg",
    version,
    about = "Aggregate constituency parse trees from several parsers"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate the trees of several parsers into one tree per sentence.
    Aggregate(AggregateArgs),
    /// Score predicted trees against gold trees.
    Evaluate(EvaluateArgs),
    /// Report how often the parsers agree on tree structure.
    Agreement(AgreementArgs),
    /// Compare parser rankings by gold score and by estimated weight.
    Rank(RankArgs),
    /// Write a synthetic gold corpus and noisy parser outputs.
    GenFixture(GenFixtureArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Parser output as NAME=PATH, one tree per line. Repeat per parser.
    #[arg(long = "input", value_name = "NAME=PATH", required = true)]
    inputs: Vec<String>,
    /// Accept trees spanning several lines.
    #[arg(long)]
    multiline: bool,
    /// Strip function tags (NP-SBJ -> NP).
    #[arg(long)]
    strip_function_tags: bool,
    /// How to treat brackets without a label.
    #[arg(long, value_enum, default_value_t = EmptyLabel::Reject)]
    empty_label: EmptyLabel,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmptyLabel {
    Reject,
    X,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Cptam,
    CptamW,
    Mrc,
    Gc,
    Sc,
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: PathBuf,
    /// JSON report with weights, objective trace and agreement statistics.
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON driver configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Cptam)]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_GC_THRESHOLD)]
    gc_threshold: f64,
    /// Skip sentences whose tokenization differs across parsers.
    #[arg(long)]
    skip_misaligned: bool,
    /// Per-iteration trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Unlabeled spans without preterminals; adds the total RF distance.
    #[arg(long)]
    structure_only: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    multiline: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct AgreementArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    skip_misaligned: bool,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenFixtureArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    sentences: usize,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    #[arg(long, default_value_t = 30)]
    max_len: usize,
    /// Comma-separated noise rate per parser.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.15, 0.30])]
    noise: Vec<f64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn alignment(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        if e.is_alignment() {
            CliError::alignment(e.to_string())
        } else {
            CliError::io(e.to_string())
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::alignment(e.to_string())
    }
}

impl From<AggregateError> for CliError {
    fn from(e: AggregateError) -> Self {
        CliError::io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    method: &'a str,
    parsers: &'a [String],
    sentences: usize,
    weights: ParserWeights,
    objective_trace: Vec<f64>,
    iterations: usize,
    label_objective_trace: Vec<f64>,
    label_iterations: usize,
    agreement: AgreementStats,
    skipped: &'a [SkipRecord],
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| run(cli.command)),
        Err(e) => Err(CliError::io(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Aggregate(args) => aggregate(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Agreement(args) => agreement(args),
        Command::Rank(args) => rank(args),
        Command::GenFixture(args) => gen_fixture(args),
    }
}

fn load_options(input: &InputArgs, skip_misaligned: bool) -> LoadOptions {
    LoadOptions {
        parse: ParseOptions {
            empty_label: match input.empty_label {
                EmptyLabel::Reject => EmptyLabelPolicy::Reject,
                EmptyLabel::X => EmptyLabelPolicy::AssignX,
            },
            strip_function_tags: input.strip_function_tags,
        },
        multiline: input.multiline,
        skip_misaligned,
    }
}

fn load_inputs(input: &InputArgs, skip_misaligned: bool) -> Result<Corpus> {
    let mut names = Vec::new();
    let mut paths = Vec::new();
    for arg in &input.inputs {
        let (name, path) = arg
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| CliError::io(format!("--input expects NAME=PATH, got {arg:?}")))?;
        names.push(name.to_string());
        paths.push(PathBuf::from(path));
    }
    Ok(load_corpus(
        &paths,
        &names,
        &load_options(input, skip_misaligned),
    )?)
}

fn read_config(path: Option<&Path>) -> Result<DriverConfig> {
    let Some(path) = path else {
        return Ok(DriverConfig::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let config: DriverConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(config)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn aggregate(args: AggregateArgs) -> Result<()> {
    let corpus = load_inputs(&args.input, args.skip_misaligned)?;
    if corpus.parser_count() < 2 {
        return Err(CliError::io("aggregate needs at least two --input files"));
    }
    if corpus.is_empty() {
        return Err(CliError::io("no sentences to aggregate"));
    }
    let config = read_config(args.config.as_deref())?;

    let mut trace_lines = String::new();
    let (trees, weights, objective_trace, iterations, label_trace, label_iterations) = match args
        .method
    {
        Method::Cptam => {
            let result = run_cptam_with(&corpus, &config, None, &mut |e: &TraceEvent| {
                trace_lines.push_str(&serde_json::to_string(e).expect("serializable"));
                trace_lines.push('\n');
            })?;
            (
                result.trees,
                result.weights,
                result.objective_trace,
                result.iterations,
                result.label_objective_trace,
                result.label_iterations,
            )
        }
        method => {
            let method = match method {
                Method::CptamW => ConsensusMethod::CptamW,
                Method::Mrc => ConsensusMethod::Mrc,
                Method::Gc => ConsensusMethod::Gc,
                Method::Sc => ConsensusMethod::Sc,
                Method::Cptam => unreachable!(),
            };
            if !(args.gc_threshold > 0.0 && args.gc_threshold <= 1.0) {
                return Err(CliError::io(format!(
                    "--gc-threshold must be in (0, 1], got {}",
                    args.gc_threshold
                )));
            }
            let structures: Vec<_> = corpus
                .bundles
                .iter()
                .map(|b| consensus_clusters(&bundle_clusters(b, true), method, args.gc_threshold))
                .collect();
            let trees = structures
                .iter()
                .zip(&corpus.bundles)
                .map(|(agg, b)| {
                    let labels = majority_vote_labels(agg, b)?;
                    finalize_tree(agg, &labels, &b.tokens)
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let weights = ParserWeights::uniform(corpus.parser_count());
            let objective = weighted_objective(&corpus, &structures, &weights.structure, true);
            (trees, weights, vec![objective], 0, Vec::new(), 0)
        }
    };

    let mut out = String::new();
    for tree in &trees {
        out.push_str(&write_bracketed(tree));
        out.push('\n');
    }
    write_file(&args.output, &out)?;
    if let Some(path) = &args.trace {
        write_file(path, &trace_lines)?;
    }
    if let Some(path) = &args.report {
        let method = match args.method {
            Method::Cptam => "cptam",
            Method::CptamW => "cptam-w",
            Method::Mrc => "mrc",
            Method::Gc => "gc",
            Method::Sc => "sc",
        };
        let report = Report {
            schema_version: REPORT_SCHEMA_VERSION,
            method,
            parsers: &corpus.parser_names,
            sentences: corpus.len(),
            weights,
            objective_trace,
            iterations,
            label_objective_trace: label_trace,
            label_iterations,
            agreement: agreement_stats(&corpus),
            skipped: &corpus.skipped,
        };
        write_file(path, &to_json(&report))?;
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let opts = LoadOptions {
        multiline: args.multiline,
        ..Default::default()
    };
    let pred = read_trees(&args.pred, &opts)?;
    let gold = read_trees(&args.gold, &opts)?;
    let report = if args.structure_only {
        eval_structure(&pred, &gold)?
    } else {
        eval_labeled(&pred, &gold)?
    };
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Table => format!("{report}\n"),
    };
    print(&text)
}

fn agreement(args: AgreementArgs) -> Result<()> {
    let corpus = load_inputs(&args.input, args.skip_misaligned)?;
    if corpus.parser_count() < 2 {
        return Err(CliError::io("agreement needs at least two --input files"));
    }
    print(&to_json(&agreement_stats(&corpus)))
}

fn rank(args: RankArgs) -> Result<()> {
    let corpus = load_inputs(&args.input, false)?;
    let config = read_config(args.config.as_deref())?;
    let gold = read_trees(&args.gold, &load_options(&args.input, false))?;
    let result = run_cptam_with(&corpus, &config, None, &mut |_| {})?;
    let table = rank_parsers(&corpus, &gold, &result.weights)?;
    print(&to_json(&table))
}

fn gen_fixture(args: GenFixtureArgs) -> Result<()> {
    let (gold, corpus) = generate_corpus(
        args.seed,
        args.sentences,
        args.min_len..=args.max_len,
        &args.noise,
    )
    .map_err(|e| CliError::io(e.to_string()))?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::io(format!("{}: {e}", args.out_dir.display())))?;
    let render = |trees: &[treeagg::ParseTree]| {
        let mut s = String::new();
        for t in trees {
            s.push_str(&write_bracketed(t));
            s.push('\n');
        }
        s
    };
    write_file(&args.out_dir.join("gold.txt"), &render(&gold))?;
    for (k, name) in corpus.parser_names.iter().enumerate() {
        write_file(
            &args.out_dir.join(format!("{name}.txt")),
            &render(&corpus.parser_trees(k)),
        )?;
    }
    Ok(())
}

fn print(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io(format!("stdout: {e}")))
}
