//! The `commentlab` command line.
//!
//! Exit codes: 0 success, 1 domain failure (rule violations, model or
//! metric preconditions), 2 usage, format or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::balance::{smote_balance, SmoteConfig};
use crate::dataset::{read_raw, Dataset, DatasetError, Metadata};
use crate::evaluation::{
    compare_reports, run_experiment, BalanceMode, CvConfig, EmbedSource, EvaluationReport, ExperimentConfig,
    ExperimentError, ModelSpec,
};
use crate::features::{embed_dataset, load_embeddings, DEFAULT_DIM};
use crate::generator::{gen_dataset, Balance, GeneratorConfig};
use crate::grammar::validate_sample;
use crate::models::{MemberConfig, ModelConfig, ModelKind};
use crate::rng::derive_seed;

#[derive(Debug, Parser)]
#[command(name = "commentlab", version, about = "Generate, validate and evaluate code-comment datasets")]
struct Cli {
    /// Root seed; every random stream derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output on stderr (-v debug, -vv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key=value` file; explicit flags take precedence over its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled synthetic dataset.
    Generate(GenerateArgs),
    /// Check every row against the ruleset.
    Validate(ValidateArgs),
    /// Print class counts.
    Stats { input: PathBuf },
    /// Concatenate two datasets.
    Merge {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Embed a dataset and SMOTE-balance it.
    Balance(BalanceArgs),
    /// Repeated stratified cross-validation of the classifiers.
    Evaluate(EvaluateArgs),
    /// Per-class F1 change between two reports.
    Compare {
        before: PathBuf,
        after: PathBuf,
        /// Emit CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    count: Option<usize>,
    /// `exact` (half Useful) or `bernoulli` (fair coin per sample).
    #[arg(long)]
    balance: Option<String>,
    #[arg(long)]
    value_probability: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    input: PathBuf,
    /// Report violations but fail only on rows that cannot be loaded at all
    /// (unknown labels).
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Embedding CSV aligned with the dataset rows, instead of hashing.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// SMOTE neighbour count.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct BalanceArgs {
    input: PathBuf,
    #[command(flatten)]
    embed: EmbedArgs,
    /// Balanced embedding CSV; labels go to `<output>.labels`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    input: PathBuf,
    /// Comma-separated subset of rf, vc, nn.
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// SMOTE the whole dataset before splitting. Leaks synthetic neighbours
    /// of test rows into training folds.
    #[arg(long)]
    paper_faithful: bool,
    #[command(flatten)]
    embed: EmbedArgs,
    /// Trees per forest, including the one inside the voting ensemble.
    #[arg(long)]
    trees: Option<usize>,
    /// Neural-network training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// JSON-lines report.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Summary CSV.
    #[arg(long)]
    summary_csv: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn domain(e: impl Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn dataset_error(e: DatasetError) -> CliError {
    if e.is_format_error() {
        usage(e)
    } else {
        domain(e)
    }
}

fn experiment_error(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::EmbeddingRows { .. } => usage(e),
        other => domain(other),
    }
}

fn io_error(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| usage(format!("{}: {e}", path.display()))
}

/// Resolves options as explicit flag, then config file, then default, and
/// records each value for the log line.
struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<&'static str, String>,
}

impl Resolver {
    fn new(config: Option<&Path>) -> Result<Self, CliError> {
        let file = match config {
            None => BTreeMap::new(),
            Some(p) => Metadata::read(p)
                .map_err(io_error(p))?
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        };
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn get<T>(&mut self, key: &'static str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s
                .parse()
                .map_err(|e| usage(format!("config key `{key}`: `{s}`: {e}")))?,
            (None, None) => default,
        };
        self.resolved.insert(key, value.to_string());
        Ok(value)
    }

    fn flag(&mut self, key: &'static str, flag: bool) -> Result<bool, CliError> {
        self.get(key, flag.then_some(true), false)
    }

    fn log(&self, command: &str) {
        let joined: Vec<String> = self.resolved.iter().map(|(k, v)| format!("{k}={v}")).collect();
        log::info!("{command}: {}", joined.join(" "));
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();

    let result = (|| {
        let mut res = Resolver::new(cli.config.as_deref())?;
        let threads = res.get("threads", cli.threads, 0)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(usage)?;
        pool.install(|| dispatch(&cli, &mut res))
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) | CliError::Domain(m) => eprintln!("error: {m}"),
            }
            e.code()
        }
    }
}

fn dispatch(cli: &Cli, res: &mut Resolver) -> Result<(), CliError> {
    let seed = res.get("seed", cli.seed, 0)?;
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Generate(a) => {
            let default = GeneratorConfig::default();
            let balance_text = res.get("balance", a.balance.clone(), default.balance.as_str().to_string())?;
            let cfg = GeneratorConfig {
                seed,
                count: res.get("count", a.count, default.count)?,
                balance: balance_text.parse::<Balance>().map_err(usage)?,
                value_probability: res.get("value_probability", a.value_probability, default.value_probability)?,
                ..default
            };
            res.log("generate");
            let ds = gen_dataset(&cfg).map_err(usage)?;
            ds.write_csv(&a.output).map_err(dataset_error)?;
            cfg.metadata()
                .write(Metadata::sidecar_path(&a.output))
                .map_err(io_error(&a.output))?;
            writeln!(out, "{}", ds.stats()).map_err(usage)?;
        }
        Command::Validate(a) => {
            res.flag("lenient", a.lenient)?;
            res.log("validate");
            let rows = read_raw(&a.input).map_err(dataset_error)?;
            let mut failing = 0;
            let mut fatal = false;
            for raw in &rows {
                if let Err(vs) = validate_sample(&raw.line, &raw.comment, &raw.label) {
                    failing += 1;
                    for (component, v) in vs.iter() {
                        fatal |= v.rule() == 16;
                        writeln!(out, "row {}: {component}: rule {}: {v}", raw.row, v.rule()).map_err(usage)?;
                    }
                }
            }
            writeln!(out, "{} rows, {} valid, {} with violations", rows.len(), rows.len() - failing, failing)
                .map_err(usage)?;
            if failing > 0 && (!a.lenient || fatal) {
                return Err(domain(format!("{failing} of {} rows violate the ruleset", rows.len())));
            }
        }
        Command::Stats { input } => {
            res.log("stats");
            let ds = Dataset::read_csv(input, false).map_err(dataset_error)?;
            writeln!(out, "{}", ds.stats()).map_err(usage)?;
        }
        Command::Merge { a, b, output } => {
            res.log("merge");
            let da = Dataset::read_csv(a, false).map_err(dataset_error)?;
            let db = Dataset::read_csv(b, false).map_err(dataset_error)?;
            let merged = Dataset::merge(&da, &db);
            merged.write_csv(output).map_err(dataset_error)?;
            writeln!(out, "{}", merged.stats()).map_err(usage)?;
        }
        Command::Balance(a) => {
            let (ds, source) = load_with_embeddings(&a.input, &a.embed, res)?;
            let smote = SmoteConfig {
                k_neighbors: res.get("k", a.embed.k, SmoteConfig::default().k_neighbors)?,
                seed: derive_seed(seed, &[1]),
                ..Default::default()
            };
            res.log("balance");
            let x = match source {
                EmbedSource::Hashed { dim } => embed_dataset(&ds, dim),
                EmbedSource::Precomputed(m) => m,
            };
            let b = smote_balance(&x, &ds.labels(), &smote).map_err(domain)?;
            b.features.write_csv(&a.output).map_err(io_error(&a.output))?;
            let labels_path = suffixed(&a.output, "labels");
            let mut text = String::new();
            for l in &b.labels {
                text.push_str(l.as_str());
                text.push('\n');
            }
            fs::write(&labels_path, text).map_err(io_error(&labels_path))?;
            writeln!(
                out,
                "{} rows ({} original, {} synthetic)",
                b.labels.len(),
                b.original_rows(),
                b.origins.len()
            )
            .map_err(usage)?;
        }
        Command::Evaluate(a) => {
            let (ds, embedding) = load_with_embeddings(&a.input, &a.embed, res)?;
            let cfg = evaluate_config(a, seed, embedding, res)?;
            res.log("evaluate");
            let report = run_experiment(&ds, &cfg).map_err(experiment_error)?;
            if let Some(p) = &a.output {
                report.save_jsonl(p).map_err(io_error(p))?;
            }
            if let Some(p) = &a.summary_csv {
                fs::write(p, report.summary_csv()).map_err(io_error(p))?;
            }
            write!(out, "{}", report.to_table()).map_err(usage)?;
        }
        Command::Compare { before, after, csv } => {
            res.flag("csv", *csv)?;
            res.log("compare");
            let b = EvaluationReport::load_jsonl(before).map_err(|e| usage(format!("{}: {e}", before.display())))?;
            let a = EvaluationReport::load_jsonl(after).map_err(|e| usage(format!("{}: {e}", after.display())))?;
            let delta = compare_reports(&b, &a).map_err(domain)?;
            let text = if *csv { delta.to_csv() } else { delta.to_table() };
            write!(out, "{text}").map_err(usage)?;
        }
    }
    out.flush().map_err(usage)
}

fn suffixed(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn load_with_embeddings(input: &Path, args: &EmbedArgs, res: &mut Resolver) -> Result<(Dataset, EmbedSource), CliError> {
    let ds = Dataset::read_csv(input, false).map_err(dataset_error)?;
    let source = match &args.embeddings {
        Some(p) => {
            res.resolved.insert("embeddings", p.display().to_string());
            EmbedSource::Precomputed(load_embeddings(p, ds.len()).map_err(|e| usage(format!("{}: {e}", p.display())))?)
        }
        None => EmbedSource::Hashed {
            dim: res.get("dim", args.dim, DEFAULT_DIM)?,
        },
    };
    Ok((ds, source))
}

fn evaluate_config(
    a: &EvaluateArgs,
    seed: u64,
    embedding: EmbedSource,
    res: &mut Resolver,
) -> Result<ExperimentConfig, CliError> {
    let defaults = CvConfig::default();
    let cv = CvConfig {
        folds: res.get("folds", a.folds, defaults.folds)?,
        repeats: res.get("repeats", a.repeats, defaults.repeats)?,
        seed,
    };
    let names = res.get("models", a.models.clone(), "rf,vc,nn".to_string())?;
    let trees = res.get::<usize>("trees", a.trees, 100)?;
    let epochs = res.get::<usize>("epochs", a.epochs, 20)?;
    let mut models = Vec::new();
    for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: ModelKind = name.parse().map_err(usage)?;
        if models.iter().any(|m: &ModelSpec| m.config.kind() == kind) {
            return Err(usage(format!("model `{name}` listed twice")));
        }
        let mut spec = ModelSpec::default_for(kind);
        match &mut spec.config {
            ModelConfig::RandomForest(c) => c.n_trees = trees,
            ModelConfig::NeuralNet(c) => c.epochs = epochs,
            ModelConfig::Voting(c) => {
                for m in &mut c.members {
                    match m {
                        MemberConfig::RandomForest(c) => c.n_trees = trees,
                        MemberConfig::NeuralNet(c) => c.epochs = epochs,
                        _ => {}
                    }
                }
            }
        }
        models.push(spec);
    }
    if models.is_empty() {
        return Err(usage("--models lists no models"));
    }
    let paper_faithful = res.flag("paper_faithful", a.paper_faithful)?;
    let cfg = ExperimentConfig {
        cv,
        smote: SmoteConfig {
            k_neighbors: res.get("k", a.embed.k, SmoteConfig::default().k_neighbors)?,
            ..Default::default()
        },
        balance: if paper_faithful {
            BalanceMode::Global
        } else {
            BalanceMode::InFold
        },
        embedding,
        models,
    }
    .with_seed(seed);
    Ok(cfg)
}
