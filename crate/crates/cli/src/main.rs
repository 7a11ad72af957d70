//! `pbforge` — schema-driven protobuf test-data toolkit.
//!
//! Exit codes: 0 success, 1 validation/config error, 2 I/O error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use pbforge_core::analyzer::{analyze_stream, AnalyzeOptions, DomainModel};
use pbforge_core::baselines::{run_benchmark, BenchOptions, BenchStrategy};
use pbforge_core::corpus::{CorpusFormat, LogCorpus};
use pbforge_core::engine::{
    generate_batch, CycleStrategy, GenerationConfig, Generator, OutputFormat,
};
use pbforge_core::quality::{assess, AssessOptions, RuleSet};
use pbforge_core::registry::enhance;
use pbforge_core::schema::{load_descriptor_set, SchemaGraph};
use pbforge_core::value::{decode_message, from_json, MessageValue};
use pbforge_core::wire::FramedReader;
use pbforge_core::{Error, Result};

const CONFIG_FORMAT: &str = "config/v1";

#[derive(Parser)]
#[command(
    name = "pbforge",
    version,
    about = "Schema-driven protobuf test-data generation and assessment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a log corpus against a schema and write a domain model
    Analyze(AnalyzeArgs),
    /// Generate test data from a schema and optional domain model
    Generate(GenerateArgs),
    /// Assess a generated dataset against a reference corpus and rules
    Validate(ValidateArgs),
    /// Benchmark generation strategies
    Bench(BenchArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// FileDescriptorSet binary
    #[arg(long)]
    descriptor: PathBuf,
    /// Log corpus to analyze
    #[arg(long)]
    logs: PathBuf,
    /// Corpus encoding
    #[arg(long, default_value = "ndjson", value_parser = ["ndjson", "binary"])]
    log_format: String,
    /// Output path for the domain model (JSON)
    #[arg(long)]
    out: PathBuf,
    /// Optional config/v1 file (flags win over config values)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// FileDescriptorSet binary
    #[arg(long)]
    descriptor: PathBuf,
    /// Optional domain model from `analyze`
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Fully qualified root message type
    #[arg(long = "type")]
    type_name: String,
    /// Number of instances
    #[arg(long)]
    count: u64,
    /// Base seed; instance i uses a seed derived from (seed, i)
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum recursion depth
    #[arg(long)]
    max_depth: Option<usize>,
    /// Cycle handling strategy
    #[arg(long, value_parser = ["reuse", "minimal", "probabilistic"])]
    cycle_strategy: Option<String>,
    /// Termination rate for the probabilistic strategy
    #[arg(long)]
    lambda: Option<f64>,
    /// Output encoding
    #[arg(long, default_value = "ndjson", value_parser = ["pb", "json", "ndjson"])]
    format: String,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for instance encoding (output is identical for any value)
    #[arg(long)]
    workers: Option<usize>,
    /// Optional config/v1 file (flags win over config values)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Dataset to assess (as produced by `generate`)
    dataset: PathBuf,
    /// FileDescriptorSet binary
    #[arg(long)]
    descriptor: PathBuf,
    /// Fully qualified root message type
    #[arg(long = "type")]
    type_name: String,
    /// Dataset encoding
    #[arg(long, default_value = "ndjson", value_parser = ["pb", "json", "ndjson"])]
    format: String,
    /// Reference corpus
    #[arg(long)]
    reference: PathBuf,
    /// Reference corpus encoding
    #[arg(long, default_value = "ndjson", value_parser = ["ndjson", "binary"])]
    log_format: String,
    /// Optional rules/v1 file for semantic checks
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Optional path for the quality report (JSON); the rendered report always
    /// goes to standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// FileDescriptorSet binary
    #[arg(long)]
    descriptor: PathBuf,
    /// Fully qualified root message type
    #[arg(long = "type")]
    type_name: String,
    /// Domain model; required for the template and statistical strategies
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Comma-separated dataset sizes
    #[arg(long, default_value = "1000")]
    sizes: String,
    /// Comma-separated strategies to compare
    #[arg(long, default_value = "random,template,statistical")]
    strategies: String,
    /// Base seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional rules/v1 file used in quality assessment
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Reference corpus for quality assessment; omitted = timing only
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Reference corpus encoding
    #[arg(long, default_value = "ndjson", value_parser = ["ndjson", "binary"])]
    log_format: String,
    /// Optional path for the benchmark report (JSON)
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// config/v1
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Annotation {
    #[serde(rename = "type")]
    type_name: String,
    controlling: String,
    dependent: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    format: String,
    seed: Option<u64>,
    max_depth: Option<usize>,
    cycle_strategy: Option<String>,
    lambda: Option<f64>,
    workers: Option<usize>,
    top_k: Option<usize>,
    malformed_threshold: Option<f64>,
    #[serde(default)]
    annotations: Vec<Annotation>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let cfg: FileConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if cfg.format != CONFIG_FORMAT {
            return Err(Error::Config(format!(
                "unsupported config format `{}` (expected `{CONFIG_FORMAT}`)",
                cfg.format
            )));
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 2,
        _ => 1,
    }
}

fn load_schema(path: &Path) -> Result<SchemaGraph> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    load_descriptor_set(&bytes)
}

/// Write through a temp file and rename, so failures leave no partial output.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut file = BufWriter::new(File::create(&tmp)?);
        body(&mut file)?;
        file.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => {
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(err) => {
            let _ = std::fs::remove_file(&tmp);
            Err(err)
        }
    }
}

fn corpus_locator(path: &Path, log_format: &str, malformed_threshold: f64) -> Result<LogCorpus> {
    Ok(LogCorpus {
        path: path.to_path_buf(),
        format: CorpusFormat::parse(log_format)?,
        malformed_threshold,
    })
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let schema = load_schema(&args.descriptor)?;
    let mut opts = AnalyzeOptions::default();
    if let Some(k) = cfg.top_k {
        opts.top_k = k;
    }
    if let Some(t) = cfg.malformed_threshold {
        opts.malformed_threshold = t;
    }
    opts.annotations = cfg
        .annotations
        .into_iter()
        .map(|a| (a.type_name, a.controlling, a.dependent))
        .collect();
    let corpus = corpus_locator(&args.logs, &args.log_format, opts.malformed_threshold)?;
    let mut stream = corpus.open(&schema)?;
    let model = analyze_stream(stream.as_mut(), &schema, &opts)?;
    let json = model.to_json_string()?;
    write_atomic(&args.out, |w| {
        w.write_all(json.as_bytes())?;
        Ok(())
    })?;
    eprintln!(
        "analyzed {} records ({} skipped) -> {}",
        model.record_count,
        model.skipped_count,
        args.out.display()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let schema = load_schema(&args.descriptor)?;
    let model = match &args.domain {
        Some(path) => Some(DomainModel::load(path)?),
        None => None,
    };
    let registry = enhance(&schema, model.as_ref());

    let mut gen_config = GenerationConfig::default();
    if let Some(s) = args.seed.or(cfg.seed) {
        gen_config.seed = s;
    }
    if let Some(d) = args.max_depth.or(cfg.max_depth) {
        gen_config.max_depth = d;
    }
    if let Some(cs) = args.cycle_strategy.as_deref().or(cfg.cycle_strategy.as_deref()) {
        gen_config.cycle_strategy = CycleStrategy::parse(cs)?;
    }
    if let Some(l) = args.lambda.or(cfg.lambda) {
        gen_config.lambda = l;
    }
    let workers = args.workers.or(cfg.workers).unwrap_or(1);
    let format = OutputFormat::parse(&args.format)?;

    let gen = Generator::new(&schema, &registry, gen_config)?;
    let mut written = 0;
    write_atomic(&args.out, |w| {
        written = generate_batch(&gen, &args.type_name, args.count, format, w, workers)?;
        Ok(())
    })?;
    eprintln!("wrote {written} instances -> {}", args.out.display());
    Ok(())
}

fn read_dataset(path: &Path, format: &str, root: &str, schema: &SchemaGraph) -> Result<Vec<MessageValue>> {
    schema.message(root)?;
    let mut out = Vec::new();
    match format {
        "pb" => {
            let mut reader = FramedReader::new(BufReader::new(File::open(path)?));
            while let Some(bytes) = reader.next_record()? {
                out.push(decode_message(&bytes, root, schema)?);
            }
        }
        "ndjson" => {
            use std::io::BufRead;
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let value: serde_json::Value = serde_json::from_str(&line)?;
                // `generate` writes corpus-framed lines {"type", "payload"};
                // accept bare payload objects too
                let payload = match value.get("payload") {
                    Some(p) => p,
                    None => &value,
                };
                out.push(from_json(payload, root, schema)?);
            }
        }
        "json" => {
            let value: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let items = value
                .as_array()
                .ok_or_else(|| Error::Validation("expected a JSON array".into()))?;
            for item in items {
                out.push(from_json(item, root, schema)?);
            }
        }
        other => return Err(Error::UnsupportedFormat(other.to_string())),
    }
    Ok(out)
}

fn read_reference(
    path: &Path,
    log_format: &str,
    root: &str,
    schema: &SchemaGraph,
) -> Result<Vec<MessageValue>> {
    let corpus = corpus_locator(path, log_format, 0.5)?;
    let (records, _skipped) = corpus.read_all(schema)?;
    Ok(records
        .into_iter()
        .filter(|r| r.type_name == root)
        .map(|r| r.message)
        .collect())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let schema = load_schema(&args.descriptor)?;
    let generated = read_dataset(&args.dataset, &args.format, &args.type_name, &schema)?;
    let reference = read_reference(&args.reference, &args.log_format, &args.type_name, &schema)?;
    let rules = match &args.rules {
        Some(path) => Some(RuleSet::load(path)?),
        None => None,
    };
    let report = assess(
        &schema,
        &args.type_name,
        &generated,
        &reference,
        rules.as_ref(),
        &AssessOptions::default(),
    )?;
    print!("{}", report.render());
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report)?;
        write_atomic(out, |w| {
            w.write_all(json.as_bytes())?;
            Ok(())
        })?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let schema = load_schema(&args.descriptor)?;
    let model = match &args.domain {
        Some(path) => Some(DomainModel::load(path)?),
        None => None,
    };
    let sizes = args
        .sizes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("invalid size `{s}`")))
        })
        .collect::<Result<Vec<u64>>>()?;
    let strategies = args
        .strategies
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| BenchStrategy::parse(s.trim()))
        .collect::<Result<Vec<BenchStrategy>>>()?;
    if sizes.is_empty() || strategies.is_empty() {
        return Err(Error::Config("--sizes and --strategies must be non-empty".into()));
    }
    let rules = match &args.rules {
        Some(path) => Some(RuleSet::load(path)?),
        None => None,
    };
    let reference = match &args.reference {
        Some(path) => read_reference(path, &args.log_format, &args.type_name, &schema)?,
        None => Vec::new(),
    };
    let opts = BenchOptions {
        sizes,
        strategies,
        runs: 10,
        seed: args.seed,
        rules: rules.as_ref(),
        reference: &reference,
    };
    let report = run_benchmark(&schema, &args.type_name, model.as_ref(), &opts)?;
    print!("{}", report.render());
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report)?;
        write_atomic(out, |w| {
            w.write_all(json.as_bytes())?;
            Ok(())
        })?;
    }
    Ok(())
}
