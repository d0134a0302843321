//! Batch command-line surface: mine, eval, compare, synth.
//!
//! Exit codes: 0 success, 2 usage/validation errors, 3 runtime failures.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    generate_synthetic_workspace_with, load_workspace, ConceptTree, CorpusError, WorkspaceFormat,
};
use crate::eval::{
    bucket_report, read_results_csv, write_bucket_csv, write_results_csv, write_sweep_tsv,
    BucketMetric, EerMode, EncoderSpec, EvalError, MeanMetrics, Protocol, ProtocolConfig,
    ProtocolRunner, ResultRow, SamplingOutcome,
};
use crate::miner::{mine_workspace, SeparatorKind};
use crate::recognizer::Method;

const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Argument(_)
            | EvalError::Corpus(_)
            | EvalError::Encoder(_)
            | EvalError::MissingBase(_)
            | EvalError::Csv(_) => CliError::usage(e.to_string()),
            other => CliError::runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "prototax",
    version,
    about = "Mine proto-taxonomies from intent identifiers and evaluate class-embedding recognizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the proto-taxonomy of a workspace and report separator, rate,
    /// and per-separator perplexities
    Mine(MineArgs),
    /// Run the multi-sampling out-of-scope evaluation protocol
    Eval(EvalArgs),
    /// Aggregate results directories into an improvement-bucket table
    Compare(CompareArgs),
    /// Generate a synthetic workspace from a concept-tree spec
    Synth(SynthArgs),
}

#[derive(Args)]
struct MineArgs {
    /// Workspace file to mine
    #[arg(long)]
    input: PathBuf,
    /// Input format: workspace-json or pairs-json
    #[arg(long, default_value = "workspace-json")]
    format: WorkspaceFormat,
    /// Where to write the mining report JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Workspace file to evaluate
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: workspace-json or pairs-json
    #[arg(long)]
    format: Option<WorkspaceFormat>,
    /// Comma-separated methods among BASE,T,S,C
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Intents removed per sampling to simulate out-of-scope traffic
    #[arg(long)]
    removed: Option<usize>,
    /// Number of samplings
    #[arg(long)]
    samplings: Option<usize>,
    /// Train fraction of the per-intent stratified split
    #[arg(long = "train-frac")]
    train_frac: Option<f64>,
    /// Encoder: "hashed" or "precomputed:PATH"
    #[arg(long)]
    encoder: Option<String>,
    /// Base seed; sampling k uses seed+k
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel sampling jobs
    #[arg(long)]
    jobs: Option<usize>,
    /// key=value config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// One or more results directories produced by eval
    #[arg(long, required = true, num_args = 1..)]
    results: Vec<PathBuf>,
    /// Metric to bucket: eer, far, or iser
    #[arg(long, default_value = "eer")]
    metric: BucketMetric,
    /// Which EER reading to use: total or crossing
    #[arg(long = "eer-mode", default_value = "total")]
    eer_mode: String,
    /// Where to write the bucket CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Concept-tree JSON spec
    #[arg(long)]
    spec: PathBuf,
    /// Examples generated per intent
    #[arg(long = "examples-per-intent", default_value_t = 20)]
    examples_per_intent: usize,
    /// Probability of a noise token per position
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Separator used to join identifier concepts
    #[arg(long, default_value = "underscore")]
    separator: SeparatorKind,
    /// Where to write the workspace JSON
    #[arg(long)]
    out: PathBuf,
}

impl clap::builder::ValueParserFactory for WorkspaceFormat {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<WorkspaceFormat>())
    }
}

impl clap::builder::ValueParserFactory for Method {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Method>())
    }
}

impl clap::builder::ValueParserFactory for BucketMetric {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<BucketMetric>())
    }
}

impl clap::builder::ValueParserFactory for SeparatorKind {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<SeparatorKind>())
    }
}

/// Parse command-line arguments and run; the process exit code follows the
/// 0/2/3 convention.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; help/version are successes
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn cmd_mine(args: MineArgs) -> Result<(), CliError> {
    let workspace = load_workspace(&args.input, args.format)?;
    let report = mine_workspace(&workspace);
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    write_atomic(&args.out, json.as_bytes())?;
    write_config_sidecar(
        &args.out,
        &[
            ("command", "mine".to_string()),
            ("input", args.input.display().to_string()),
            ("format", format_name(args.format).to_string()),
            ("out", args.out.display().to_string()),
        ],
    )?;

    match report.separator {
        Some(sep) => println!("separator: {sep}"),
        None => println!("separator: none"),
    }
    println!("taxonomy rate: {:.4}", report.taxonomy_rate);
    for (sep, perplexity) in &report.per_separator_perplexity {
        println!("perplexity {sep}: {perplexity:.4}");
    }
    println!("intent\tconcepts");
    for seq in &report.sequences {
        println!("{}\t{}", seq.intent_id, seq.concepts.join(" "));
    }
    Ok(())
}

fn format_name(f: WorkspaceFormat) -> &'static str {
    match f {
        WorkspaceFormat::WorkspaceJson => "workspace-json",
        WorkspaceFormat::PairsJson => "pairs-json",
    }
}

fn write_config_sidecar(out: &Path, entries: &[(&str, String)]) -> Result<(), CliError> {
    let mut text = String::new();
    for (k, v) in entries {
        let _ = writeln!(text, "{k}={v}");
    }
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".config.txt");
    write_atomic(Path::new(&sidecar), text.as_bytes())?;
    Ok(())
}

/// Plain key=value config file; `#` comments and blank lines ignored.
fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "config {} line {}: expected key=value",
                path.display(),
                i + 1
            ))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: std::str::FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| CliError::usage(format!("config key {key}={raw}: {e}"))),
    }
}

fn parse_encoder_spec(
    raw: &str,
    bucket_count: usize,
    dim: usize,
) -> Result<EncoderSpec, CliError> {
    if raw == "hashed" {
        Ok(EncoderSpec::Hashed { bucket_count, dim })
    } else if let Some(path) = raw.strip_prefix("precomputed:") {
        Ok(EncoderSpec::Precomputed {
            path: PathBuf::from(path),
        })
    } else {
        Err(CliError::usage(format!(
            "unknown encoder {raw:?} (expected \"hashed\" or \"precomputed:PATH\")"
        )))
    }
}

struct ResolvedEval {
    input: PathBuf,
    format: WorkspaceFormat,
    methods: Vec<Method>,
    protocol: Protocol,
    encoder_raw: String,
    encoder_spec: EncoderSpec,
    out: PathBuf,
    jobs: usize,
    config: ProtocolConfig,
    encoder_buckets: usize,
    encoder_dim: usize,
}

fn resolve_eval(args: EvalArgs) -> Result<ResolvedEval, CliError> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let input = args
        .input
        .or(file.get("input").map(PathBuf::from))
        .ok_or_else(|| CliError::usage("--input is required"))?;
    let out = args
        .out
        .or(file.get("out").map(PathBuf::from))
        .ok_or_else(|| CliError::usage("--out is required"))?;
    let format = match args.format {
        Some(f) => f,
        None => config_value::<WorkspaceFormat>(&file, "format")?
            .unwrap_or(WorkspaceFormat::WorkspaceJson),
    };
    let methods = match args.methods {
        Some(m) if !m.is_empty() => m,
        _ => match file.get("methods") {
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse::<Method>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::usage)?,
            None => Method::ALL.to_vec(),
        },
    };
    let protocol = Protocol {
        num_removed: args
            .removed
            .or(config_value(&file, "removed")?)
            .unwrap_or(5),
        num_samplings: args
            .samplings
            .or(config_value(&file, "samplings")?)
            .unwrap_or(20),
        train_fraction: args
            .train_frac
            .or(config_value(&file, "train-frac")?)
            .unwrap_or(0.75),
        seed: args.seed.or(config_value(&file, "seed")?).unwrap_or(0),
    };
    let jobs = args
        .jobs
        .or(config_value(&file, "jobs")?)
        .unwrap_or(1)
        .max(1);
    let encoder_buckets = config_value(&file, "encoder-buckets")?.unwrap_or(4096);
    let encoder_dim = config_value(&file, "encoder-dim")?.unwrap_or(512);
    let encoder_raw = args
        .encoder
        .or(file.get("encoder").cloned())
        .unwrap_or_else(|| "hashed".to_string());
    let encoder_spec = parse_encoder_spec(&encoder_raw, encoder_buckets, encoder_dim)?;

    let mut config = ProtocolConfig::default();
    if let Some(v) = config_value(&file, "hidden")? {
        config.mapper.hidden_dim = v;
    }
    if let Some(v) = config_value(&file, "epochs")? {
        config.train.epochs = v;
    }
    if let Some(v) = config_value(&file, "batch")? {
        config.train.batch_size = v;
    }
    if let Some(v) = config_value(&file, "lr")? {
        config.train.learning_rate = v;
    }
    if let Some(v) = config_value(&file, "m")? {
        config.deepwalk.m = v;
        config.cdssm.m = v;
    }
    if let Some(v) = config_value(&file, "walk-length")? {
        config.deepwalk.walk_length = v;
        config.walkmean.walk_length = v;
    }
    if let Some(v) = config_value(&file, "walks-per-node")? {
        config.deepwalk.walks_per_node = v;
        config.walkmean.walks_per_class = v;
    }
    if let Some(v) = config_value(&file, "window")? {
        config.deepwalk.window = v;
    }
    if let Some(v) = config_value(&file, "negatives")? {
        config.deepwalk.negatives = v;
    }
    if let Some(v) = config_value(&file, "deepwalk-epochs")? {
        config.deepwalk.epochs = v;
    }
    if let Some(v) = config_value(&file, "cdssm-buckets")? {
        config.cdssm.trigram_buckets = v;
    }
    if let Some(v) = config_value(&file, "cdssm-conv-dim")? {
        config.cdssm.conv_dim = v;
    }
    if let Some(v) = config_value(&file, "cdssm-negatives")? {
        config.cdssm.negatives = v;
    }
    if let Some(v) = config_value(&file, "cdssm-gamma")? {
        config.cdssm.gamma = v;
    }
    if let Some(v) = config_value(&file, "cdssm-lr")? {
        config.cdssm.learning_rate = v;
    }
    Ok(ResolvedEval {
        input,
        format,
        methods,
        protocol,
        encoder_raw,
        encoder_spec,
        out,
        jobs,
        config,
        encoder_buckets,
        encoder_dim,
    })
}

fn resolved_config_text(r: &ResolvedEval) -> String {
    let methods: Vec<String> = r.methods.iter().map(|m| m.to_string()).collect();
    let mut text = String::new();
    for (k, v) in [
        ("command", "eval".to_string()),
        ("input", r.input.display().to_string()),
        ("format", format_name(r.format).to_string()),
        ("methods", methods.join(",")),
        ("removed", r.protocol.num_removed.to_string()),
        ("samplings", r.protocol.num_samplings.to_string()),
        ("train-frac", r.protocol.train_fraction.to_string()),
        ("encoder", r.encoder_raw.clone()),
        ("encoder-buckets", r.encoder_buckets.to_string()),
        ("encoder-dim", r.encoder_dim.to_string()),
        ("seed", r.protocol.seed.to_string()),
        ("jobs", r.jobs.to_string()),
        ("hidden", r.config.mapper.hidden_dim.to_string()),
        ("epochs", r.config.train.epochs.to_string()),
        ("batch", r.config.train.batch_size.to_string()),
        ("lr", r.config.train.learning_rate.to_string()),
        ("m", r.config.deepwalk.m.to_string()),
        ("walk-length", r.config.deepwalk.walk_length.to_string()),
        ("walks-per-node", r.config.deepwalk.walks_per_node.to_string()),
        ("window", r.config.deepwalk.window.to_string()),
        ("negatives", r.config.deepwalk.negatives.to_string()),
        ("deepwalk-epochs", r.config.deepwalk.epochs.to_string()),
        ("cdssm-buckets", r.config.cdssm.trigram_buckets.to_string()),
        ("cdssm-conv-dim", r.config.cdssm.conv_dim.to_string()),
        ("cdssm-negatives", r.config.cdssm.negatives.to_string()),
        ("cdssm-gamma", r.config.cdssm.gamma.to_string()),
        ("cdssm-lr", r.config.cdssm.learning_rate.to_string()),
        ("out", r.out.display().to_string()),
    ] {
        let _ = writeln!(text, "{k}={v}");
    }
    text
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let resolved = resolve_eval(args)?;
    let workspace = load_workspace(&resolved.input, resolved.format)?;
    fs::create_dir_all(&resolved.out)?;

    let runner = ProtocolRunner::new(
        &workspace,
        &resolved.methods,
        &resolved.protocol,
        &resolved.encoder_spec,
        &resolved.config,
    )?;

    let samplings = resolved.protocol.num_samplings as u64;
    let mut per_sampling: Vec<Vec<(Method, SamplingOutcome)>> = if resolved.jobs <= 1 {
        let mut acc = Vec::new();
        for k in 0..samplings {
            acc.push(runner.run_sampling(k)?);
        }
        acc
    } else {
        let next = std::sync::atomic::AtomicU64::new(0);
        let collected: Mutex<Vec<(u64, Vec<(Method, SamplingOutcome)>)>> = Mutex::new(Vec::new());
        let first_error: Mutex<Option<EvalError>> = Mutex::new(None);
        std::thread::scope(|scope| {
            for _ in 0..resolved.jobs.min(resolved.protocol.num_samplings) {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if k >= samplings {
                        break;
                    }
                    match runner.run_sampling(k) {
                        Ok(outcomes) => collected.lock().unwrap().push((k, outcomes)),
                        Err(e) => {
                            first_error.lock().unwrap().get_or_insert(e);
                            break;
                        }
                    }
                });
            }
        });
        if let Some(e) = first_error.into_inner().unwrap() {
            return Err(e.into());
        }
        let mut acc = collected.into_inner().unwrap();
        acc.sort_by_key(|(k, _)| *k);
        acc.into_iter().map(|(_, v)| v).collect()
    };

    // stable row order: method, then seed
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut sweeps: Vec<(Method, u64, Vec<(f64, f64, f64)>)> = Vec::new();
    per_sampling.sort_by_key(|outcomes| outcomes.first().map(|(_, o)| o.seed).unwrap_or(0));
    for method in &resolved.methods {
        for outcomes in &per_sampling {
            for (m, outcome) in outcomes {
                if m == method {
                    rows.push(ResultRow::from_outcome(&workspace.name, *m, outcome));
                    if let Ok(r) = &outcome.result {
                        sweeps.push((*m, outcome.seed, r.sweep.clone()));
                    }
                }
            }
        }
    }

    let mut csv_bytes = Vec::new();
    write_results_csv(&mut csv_bytes, &rows)?;
    write_atomic(&resolved.out.join("results.csv"), &csv_bytes)?;

    let sweep_dir = resolved.out.join("sweeps");
    fs::create_dir_all(&sweep_dir)?;
    for (method, seed, sweep) in &sweeps {
        let mut buf = Vec::new();
        write_sweep_tsv(&mut buf, sweep)?;
        write_atomic(&sweep_dir.join(format!("{method}_{seed}.tsv")), &buf)?;
    }

    write_atomic(
        &resolved.out.join("resolved_config.txt"),
        resolved_config_text(&resolved).as_bytes(),
    )?;

    let mut ok = 0usize;
    let mut skipped = 0usize;
    let mut failed = 0usize;
    for row in &rows {
        match row.status.as_str() {
            "ok" => ok += 1,
            "skipped" => skipped += 1,
            _ => failed += 1,
        }
    }
    println!(
        "wrote {} rows to {} ({} ok, {} skipped, {} failed)",
        rows.len(),
        resolved.out.join("results.csv").display(),
        ok,
        skipped,
        failed
    );

    let base_requested = resolved.methods.contains(&Method::Base);
    let base_ok = rows
        .iter()
        .filter(|r| r.method == "BASE")
        .all(|r| r.status == "ok");
    if base_requested && !base_ok {
        return Err(CliError::runtime("BASE method failed"));
    }
    if !base_requested && ok == 0 {
        return Err(CliError::runtime("no method produced results"));
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let eer_mode = match args.eer_mode.as_str() {
        "total" => EerMode::TotalError,
        "crossing" => EerMode::Crossing,
        other => {
            return Err(CliError::usage(format!(
                "unknown eer-mode {other:?} (expected total or crossing)"
            )))
        }
    };
    // workspace -> method -> per-sampling results
    let mut grouped: BTreeMap<String, BTreeMap<Method, Vec<crate::eval::EvalResult>>> =
        BTreeMap::new();
    for dir in &args.results {
        let path = dir.join("results.csv");
        let file = fs::File::open(&path)
            .map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
        let rows = read_results_csv(file)?;
        for row in rows {
            if row.status != "ok" {
                continue;
            }
            let method = row
                .method
                .parse::<Method>()
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let result = crate::eval::EvalResult {
                far: row.far.unwrap_or(f64::NAN),
                frr: row.frr.unwrap_or(f64::NAN),
                iser: row.iser.unwrap_or(f64::NAN),
                eer_crossing: row.eer_crossing.unwrap_or(f64::NAN),
                total_error_at_eer: row.total_error_at_eer.unwrap_or(f64::NAN),
                theta_star: row.theta_star.unwrap_or(f64::NAN),
                sweep: Vec::new(),
                seed: row.seed,
            };
            grouped
                .entry(row.workspace)
                .or_default()
                .entry(method)
                .or_default()
                .push(result);
        }
    }
    if grouped.is_empty() {
        return Err(CliError::usage("no ok rows found in the results directories"));
    }
    let mut means: BTreeMap<String, BTreeMap<Method, MeanMetrics>> = BTreeMap::new();
    for (workspace, per_method) in &grouped {
        for (method, results) in per_method {
            let mean = MeanMetrics::from_results(results.iter()).expect("non-empty");
            means
                .entry(workspace.clone())
                .or_default()
                .insert(*method, mean);
        }
    }
    let buckets = bucket_report(&means, args.metric, eer_mode)?;
    let mut out = Vec::new();
    write_bucket_csv(&mut out, &buckets)?;
    write_atomic(&args.out, &out)?;
    write_config_sidecar(
        &args.out,
        &[
            ("command", "compare".to_string()),
            (
                "results",
                args.results
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "metric",
                match args.metric {
                    BucketMetric::Eer => "eer",
                    BucketMetric::Far => "far",
                    BucketMetric::Iser => "iser",
                }
                .to_string(),
            ),
            ("eer-mode", args.eer_mode.clone()),
            ("out", args.out.display().to_string()),
        ],
    )?;
    println!(
        "bucketed {} workspaces into {}",
        buckets.total_workspaces,
        args.out.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| CliError::usage(format!("cannot read spec {}: {e}", args.spec.display())))?;
    let tree: ConceptTree = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid spec {}: {e}", args.spec.display())))?;
    let workspace = generate_synthetic_workspace_with(
        &tree,
        args.examples_per_intent,
        args.noise,
        args.seed,
        args.separator,
    )?;
    let json = serde_json::to_string_pretty(&workspace)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    write_atomic(&args.out, json.as_bytes())?;
    write_config_sidecar(
        &args.out,
        &[
            ("command", "synth".to_string()),
            ("spec", args.spec.display().to_string()),
            (
                "examples-per-intent",
                args.examples_per_intent.to_string(),
            ),
            ("noise", args.noise.to_string()),
            ("seed", args.seed.to_string()),
            ("separator", args.separator.to_string()),
            ("out", args.out.display().to_string()),
        ],
    )?;
    println!(
        "wrote {} intents ({} examples) to {}",
        workspace.intents.len(),
        workspace.example_count(),
        args.out.display()
    );
    Ok(())
}
