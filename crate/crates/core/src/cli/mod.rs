//! The `factlab` command line.
//!
//! Exit codes: 0 whenever a verdict (including `unverified`) or table was
//! produced, 1 for runtime infrastructure failures, 2 for configuration
//! errors.

mod config;

pub use config::{LlmProvider, RewriterKind, RunConfig, SearchProviderKind};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::eval::{self, BatchOptions, Dataset, PerturbationLevel};
use crate::llm::{LlmGateway, ScriptBook};
use crate::model::{Claim, LabelScheme, Report, Tool};
use crate::orchestrator::{verify_traced, Clock};
use crate::search::{search, SearchProvider, SearchQuery};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "factlab", version, about = "Agentic fact-checking with auditable reports")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (verify: optional; other commands default to `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Trace output: a JSONL file for verify, a directory for batch runs.
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,
    #[arg(long, global = true)]
    pub limit: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Record zero durations so outputs are byte-stable.
    #[arg(long, global = true)]
    pub frozen_clock: bool,
    /// Comma-separated tools to disable.
    #[arg(long, global = true, value_delimiter = ',')]
    pub disable_tools: Vec<Tool>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a single claim and print the report.
    Verify {
        #[arg(long)]
        claim: String,
        #[arg(long, default_value = "claim-1")]
        id: String,
        #[arg(long, value_enum, default_value_t = SchemeArg::Binary)]
        scheme: SchemeArg,
        #[arg(long)]
        topic: Option<String>,
    },
    /// Verify every record of a dataset and score the predictions.
    Batch(DatasetArgs),
    /// Run the five standard tool ablations over a dataset.
    Ablate(DatasetArgs),
    /// Rewrite a dataset at one or more perturbation levels.
    Perturb {
        #[command(flatten)]
        data: DatasetArgs,
        /// Levels such as `L1` or `L1_paraphrase`, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        level: Vec<PerturbationLevel>,
        #[arg(long, value_enum)]
        rewriter: Option<RewriterArg>,
        /// Rewrite fixture for the fixture rewriter.
        #[arg(long)]
        rewrites: Option<PathBuf>,
        /// Also verify each level and write the accuracy ladder.
        #[arg(long)]
        evaluate: bool,
    },
    /// Score a report JSON with three judge runs.
    ScoreReport {
        report: PathBuf,
        #[arg(long, value_enum, default_value_t = JudgeArg::Scripted)]
        judge: JudgeArg,
        /// Judge script (scripted judge only).
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Run live searches and save the responses as a search fixture.
    RecordFixtures {
        /// File with one query per line.
        #[arg(long)]
        queries: PathBuf,
        /// Fixture file to write; defaults to search.fixture from the config.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// fakenewsnet, liar, covid or generic_jsonl.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeArg {
    Binary,
    SixLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RewriterArg {
    Fixture,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum JudgeArg {
    Scripted,
    Http,
}

/// Parses the process arguments and runs the command.
pub fn run() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(cli, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env("FACTLAB_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Loads the config and applies flag overrides.
pub fn resolve_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if global.out.is_some() {
        cfg.out = global.out.clone();
    }
    if global.trace.is_some() {
        cfg.trace = global.trace.clone();
    }
    if global.limit.is_some() {
        cfg.limit = global.limit;
    }
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(j) = global.jobs {
        cfg.jobs = j;
    }
    cfg.frozen_clock |= global.frozen_clock;
    cfg.disable_tools(&global.disable_tools);
    Ok(cfg)
}

/// Runs a parsed command line, printing human-readable output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&cli.global)?;
    match cli.command {
        Command::Verify { claim, id, scheme, topic } => cmd_verify(&cfg, &claim, &id, scheme, topic, stdout),
        Command::Batch(d) => cmd_batch(&cfg, &d, stdout),
        Command::Ablate(d) => cmd_ablate(&cfg, &d, stdout),
        Command::Perturb {
            data,
            level,
            rewriter,
            rewrites,
            evaluate,
        } => cmd_perturb(&cfg, &data, &level, rewriter, rewrites, evaluate, stdout),
        Command::ScoreReport { report, judge, script } => cmd_score_report(&cfg, &report, judge, script, stdout),
        Command::RecordFixtures { queries, fixture } => cmd_record(&cfg, &queries, fixture, stdout),
    }
}

fn clock(cfg: &RunConfig) -> Clock {
    if cfg.frozen_clock {
        Clock::Frozen
    } else {
        Clock::System
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing to stdout: {e}")))
}

fn cmd_verify(
    cfg: &RunConfig,
    text: &str,
    id: &str,
    scheme: SchemeArg,
    topic: Option<String>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    cfg.validate()?;
    let scheme = match scheme {
        SchemeArg::Binary => LabelScheme::Binary,
        SchemeArg::SixLevel => LabelScheme::SixLevel,
    };
    let mut claim = Claim::new(id, text, scheme).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(t) = topic {
        claim = claim.with_topic_hint(t);
    }
    let llm = cfg.llm_source()?.gateway_for(id).map_err(|e| CliError::Config(e.to_string()))?;
    let (tools, recorder) = cfg.toolbox()?;

    let mut trace_file = match &cfg.trace {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            Some(fs::File::create(p).map_err(io_err(p))?)
        }
        None => None,
    };
    let sink = trace_file.as_mut().map(|f| f as &mut dyn Write);
    let outcome = verify_traced(&claim, &cfg.agent, &llm, &tools, clock(cfg), sink)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    if let Some(dir) = &cfg.out {
        write_file(&dir.join("report.json"), &outcome.report.to_json())?;
    }
    if let (Some(rec), Some(path)) = (recorder, &cfg.search.fixture) {
        rec.save(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    emit(stdout, &outcome.report.to_string())
}

fn load_data(cfg: &RunConfig, args: &DatasetArgs) -> Result<Dataset, CliError> {
    let path = args
        .dataset
        .clone()
        .or_else(|| cfg.dataset.path.clone())
        .ok_or_else(|| CliError::Config("no dataset given (--dataset or dataset.path)".into()))?;
    let format = cfg.dataset_format(args.format.as_deref())?;
    let ds = eval::load_dataset(&path, format)?;
    Ok(ds.subsample(cfg.limit, cfg.seed))
}

fn batch_opts(cfg: &RunConfig) -> BatchOptions {
    BatchOptions {
        jobs: cfg.jobs.max(1),
        clock: clock(cfg),
    }
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect::<String>()
        .split('_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

fn write_traces(dir: &Path, results: &[eval::RecordResult]) -> Result<(), CliError> {
    for r in results {
        if let Some(o) = &r.outcome {
            write_file(&dir.join(format!("{}.jsonl", slug(&r.id))), &o.log.to_jsonl())?;
        }
    }
    Ok(())
}

fn cmd_batch(cfg: &RunConfig, args: &DatasetArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    cfg.validate()?;
    let data = load_data(cfg, args)?;
    let source = cfg.llm_source()?;
    let (tools, recorder) = cfg.toolbox()?;
    let results = eval::run_batch(&data, &cfg.agent, &source, &tools, batch_opts(cfg))?;
    let metrics = eval::score_results(&results, data.scheme)?;
    let out = out_dir(cfg);
    write_file(&out.join("results.csv"), &eval::results_csv(&results)?)?;
    let json = serde_json::json!({ "metrics": metrics, "results": results });
    write_file(&out.join("results.json"), &(serde_json::to_string_pretty(&json).expect("serializes") + "\n"))?;
    if let Some(t) = &cfg.trace {
        write_traces(t, &results)?;
    }
    if let (Some(rec), Some(path)) = (recorder, &cfg.search.fixture) {
        rec.save(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    emit(
        stdout,
        &format!(
            "{} records: accuracy {:.1} precision {:.1} recall {:.1} f1 {:.1}\n",
            metrics.n,
            metrics.accuracy * 100.0,
            metrics.precision * 100.0,
            metrics.recall * 100.0,
            metrics.f1 * 100.0
        ),
    )
}

fn cmd_ablate(cfg: &RunConfig, args: &DatasetArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let configs = eval::canonical_configs(&cfg.agent);
    // every variant must be runnable, so validate against the full tool set
    let mut full = cfg.clone();
    full.agent = configs[0].1.clone();
    full.validate()?;
    let data = load_data(cfg, args)?;
    let source = cfg.llm_source()?;
    let (tools, _) = full.toolbox()?;
    let table = eval::run_ablation(&configs, &data, &source, &tools, batch_opts(cfg))?;
    let out = out_dir(cfg);
    let csv = table.to_csv()?;
    write_file(&out.join("ablation.csv"), &csv)?;
    write_file(&out.join("ablation.json"), &table.to_json())?;
    if let Some(t) = &cfg.trace {
        for ((name, _), results) in configs.iter().zip(&table.results) {
            write_traces(&t.join(slug(name)), results)?;
        }
    }
    emit(stdout, &csv)
}

#[allow(clippy::too_many_arguments)]
fn cmd_perturb(
    cfg: &RunConfig,
    args: &DatasetArgs,
    levels: &[PerturbationLevel],
    rewriter: Option<RewriterArg>,
    rewrites: Option<PathBuf>,
    evaluate: bool,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let data = load_data(cfg, args)?;
    let kind = rewriter.map(|r| match r {
        RewriterArg::Fixture => RewriterKind::Fixture,
        RewriterArg::Llm => RewriterKind::Llm,
    });
    let rw = cfg.rewriter(kind, rewrites)?;
    let out = out_dir(cfg);
    for level in levels {
        let p = eval::perturb_dataset(&data, *level, rw.as_ref())?;
        write_file(&out.join(format!("perturbed_{}.jsonl", level.as_str())), &p.to_jsonl())?;
    }
    if !evaluate {
        return emit(stdout, &format!("wrote {} level(s) for {} records\n", levels.len(), data.records.len()));
    }
    cfg.validate()?;
    let source = cfg.llm_source()?;
    let (tools, _) = cfg.toolbox()?;
    let rows = eval::run_robustness(&data, levels, rw.as_ref(), &cfg.agent, &source, &tools, batch_opts(cfg))?;
    let csv = eval::robustness_csv(&rows)?;
    write_file(&out.join("robustness.csv"), &csv)?;
    write_file(
        &out.join("robustness.json"),
        &(serde_json::to_string_pretty(&rows).expect("serializes") + "\n"),
    )?;
    emit(stdout, &csv)
}

fn cmd_score_report(
    cfg: &RunConfig,
    path: &Path,
    judge: JudgeArg,
    script: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let report = Report::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let llm = match judge {
        JudgeArg::Scripted => {
            let p = script
                .or_else(|| cfg.llm.script.clone())
                .ok_or_else(|| CliError::Config("the scripted judge needs --script".into()))?;
            let book = ScriptBook::from_file(&p).map_err(|e| CliError::Config(e.to_string()))?;
            let s = book
                .for_claim(&report.claim.id)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("no judge script for `{}`", report.claim.id)))?;
            LlmGateway::scripted(s)
        }
        JudgeArg::Http => {
            let mut live = cfg.clone();
            live.llm.provider = LlmProvider::Http;
            live.llm_source()?.gateway_for(&report.claim.id).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    let q = eval::judge_report(&report, &llm)?;
    if let Some(dir) = &cfg.out {
        write_file(&dir.join("quality.json"), &(serde_json::to_string_pretty(&q).expect("serializes") + "\n"))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(q).map_err(eval::EvalError::from)?;
        let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        write_file(&dir.join("quality.csv"), &String::from_utf8_lossy(&bytes))?;
    }
    emit(
        stdout,
        &format!(
            "relevance {:.3} consistency {:.3} diversity {:.3} (raw consistency {:.3})\n",
            q.relevance, q.consistency, q.diversity, q.consistency_raw
        ),
    )
}

fn cmd_record(cfg: &RunConfig, queries: &Path, fixture: Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let target = fixture
        .or_else(|| cfg.search.fixture.clone())
        .ok_or_else(|| CliError::Config("no fixture path (--fixture or search.fixture)".into()))?;
    let mut live = cfg.clone();
    live.search.provider = SearchProviderKind::Recording;
    live.search.fixture = Some(target.clone());
    live.agent.enabled_tools.insert(Tool::WebSearch);
    if live.search.endpoint.is_empty() {
        return Err(CliError::Config("recording needs search.endpoint".into()));
    }
    let (tools, recorder) = live.toolbox()?;
    let recorder = recorder.expect("recording provider requested");
    let list = fs::read_to_string(queries).map_err(io_err(queries))?;
    let mut n = 0;
    let mut q: Vec<&str> = list.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if let Some(limit) = cfg.limit {
        q.truncate(limit);
    }
    for terms in q {
        let query = SearchQuery::new(terms, 0, cfg.agent.max_results).map_err(|e| CliError::Config(e.to_string()))?;
        let provider: &dyn SearchProvider = tools.search.as_ref();
        match search(&query, provider) {
            Ok(_) => n += 1,
            Err(e) => tracing::warn!(%terms, error = %e, "search failed; not recorded"),
        }
    }
    recorder.save(&target).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(stdout, &format!("recorded {n} queries into {}\n", target.display()))
}
