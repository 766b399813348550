//! Command-line front end.
//!
//! Values come from flags, then the `--config` TOML file, then defaults.
//! Exit codes: 0 success, 1 bad input or configuration, 2 generator or
//! protocol failure.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::augment::{augment_corpus, example_for, parse_orders, ElementOrder, TrainingExample};
use crate::corpus::{corpus_stats, load_corpus_with, Corpus, LabelScheme, Split, TokenizerConfig};
use crate::decoding::{CorruptionConfig, DecodeMode, Endpoint, ExternalClient, DEFAULT_MAX_LEN};
use crate::metrics::{evaluate, parse_modes};
use crate::pipeline::{
    decode_corpus, load_predictions, DecodeSettings, GeneratorSpec, PipelineError, Prediction,
};
use crate::postprocess::ErrorReport;
use crate::template::{PromptStyle, Prompter, RoleLexicon, View};

#[derive(Debug, Parser)]
#[command(
    name = "coqe",
    version,
    about = "Comparative quintuple extraction toolkit"
)]
pub struct Cli {
    /// TOML file with default values for any option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset statistics.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expand a corpus into order-permuted training examples (JSON Lines).
    Augment {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        prompt: PromptArgs,
        /// `default`, `all`, or a comma list such as `SOAP,PAOS`.
        #[arg(long)]
        orders: Option<String>,
        /// Add the five single-role tasks per comparative sentence.
        #[arg(long)]
        single_tasks: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one prompt/target pair per sentence (JSON Lines).
    Render {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        prompt: PromptArgs,
        /// Element order of the targets.
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, parse and map every sentence (JSON Lines predictions).
    Decode {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        prompt: PromptArgs,
        #[command(flatten)]
        decode: DecodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against a gold corpus.
    Eval {
        #[command(flatten)]
        input: InputArgs,
        /// Decode output or any JSON Lines with `id`/`sentence_id` and `quintuples`.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Match modes, e.g. `E,P,B` or `E-Q5,B-Q4`.
        #[arg(long)]
        modes: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sum the error taxonomy over decode output.
    Errors {
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// `camera` or `vcom`.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    /// `prefix` or `suffix`.
    #[arg(long)]
    pub style: Option<String>,
    /// `en` or `vi`.
    #[arg(long)]
    pub lexicon: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// `oracle`, `corrupt` or `external`.
    #[arg(long)]
    pub generator: Option<String>,
    /// `tcp://host:port`, `exec:<command>` or a bare command line.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// `step` or `free`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub drop_element: Option<f64>,
    #[arg(long)]
    pub swap_markers: Option<f64>,
    #[arg(long)]
    pub substitute_word: Option<f64>,
    #[arg(long)]
    pub truncate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

/// Every option in one place. Loaded from TOML, overlaid by flags, then
/// completed with defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_tasks: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corruption: Option<CorruptionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay_fields {
    ($hi:ident, $lo:ident; $($f:ident),*) => {
        RunConfig { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fields set in `self` win over `lower`.
    pub fn overlay(self, lower: RunConfig) -> RunConfig {
        let (hi, lo) = (self, lower);
        overlay_fields!(hi, lo; corpus, scheme, split, style, lexicon, orders, order, single_tasks,
            generator, endpoint, mode, max_len, seed, timeout_ms, corruption, predictions, modes, format)
    }

    pub fn with_defaults(self) -> RunConfig {
        let defaults = RunConfig {
            scheme: Some("vcom".into()),
            split: Some("unsplit".into()),
            style: Some("prefix".into()),
            lexicon: Some("en".into()),
            orders: Some("default".into()),
            order: Some("SOAP".into()),
            single_tasks: Some(false),
            generator: Some("oracle".into()),
            mode: Some("step".into()),
            max_len: Some(DEFAULT_MAX_LEN),
            seed: Some(0),
            timeout_ms: Some(30_000),
            corruption: Some(CorruptionConfig::default()),
            modes: Some("E,P,B".into()),
            format: Some(Format::Table),
            ..Default::default()
        };
        self.overlay(defaults)
    }

    fn scheme(&self) -> Result<LabelScheme, CliError> {
        let name = self.scheme.as_deref().unwrap_or("vcom");
        LabelScheme::by_name(name)
            .ok_or_else(|| CliError::Config(format!("unknown label scheme {name:?}")))
    }

    fn prompter(&self) -> Result<Prompter, CliError> {
        let style: PromptStyle = self
            .style
            .as_deref()
            .unwrap_or("prefix")
            .parse()
            .map_err(CliError::Config)?;
        let lexicon = match self.lexicon.as_deref().unwrap_or("en") {
            "en" | "english" => RoleLexicon::english(),
            "vi" | "vietnamese" => RoleLexicon::vietnamese(),
            other => return Err(CliError::Config(format!("unknown lexicon {other:?}"))),
        };
        Ok(Prompter::new(style, lexicon))
    }

    fn load_corpus(&self) -> Result<Corpus, CliError> {
        let path = self
            .corpus
            .as_ref()
            .ok_or_else(|| CliError::Config("--corpus is required".into()))?;
        let split: Split = self
            .split
            .as_deref()
            .unwrap_or("unsplit")
            .parse()
            .map_err(CliError::Config)?;
        let file =
            File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        load_corpus_with(
            BufReader::new(file),
            &self.scheme()?,
            &TokenizerConfig::default(),
            split,
        )
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Table)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("io: {0}")]
    Io(String),
    #[error("generator: {0}")]
    Generator(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Generator(_) => 2,
            _ => 1,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Decode { .. } => CliError::Generator(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn flags_to_config(cmd: &Command) -> RunConfig {
    let input = |i: &InputArgs| RunConfig {
        corpus: i.corpus.clone(),
        scheme: i.scheme.clone(),
        split: i.split.clone(),
        ..Default::default()
    };
    let prompt = |p: &PromptArgs, c: RunConfig| {
        RunConfig {
            style: p.style.clone(),
            lexicon: p.lexicon.clone(),
            ..Default::default()
        }
        .overlay(c)
    };
    let output = |o: &OutputArgs, c: RunConfig| {
        RunConfig {
            format: o.format,
            ..Default::default()
        }
        .overlay(c)
    };
    match cmd {
        Command::Stats {
            input: i,
            output: o,
        } => output(o, input(i)),
        Command::Augment {
            input: i,
            prompt: p,
            orders,
            single_tasks,
            ..
        } => RunConfig {
            orders: orders.clone(),
            single_tasks: single_tasks.then_some(true),
            ..Default::default()
        }
        .overlay(prompt(p, input(i))),
        Command::Render {
            input: i,
            prompt: p,
            order,
            ..
        } => RunConfig {
            order: order.clone(),
            ..Default::default()
        }
        .overlay(prompt(p, input(i))),
        Command::Decode {
            input: i,
            prompt: p,
            decode: d,
            ..
        } => {
            let any_noise = d.drop_element.is_some()
                || d.swap_markers.is_some()
                || d.substitute_word.is_some()
                || d.truncate.is_some();
            RunConfig {
                generator: d.generator.clone(),
                endpoint: d.endpoint.clone(),
                mode: d.mode.clone(),
                max_len: d.max_len,
                seed: d.seed,
                timeout_ms: d.timeout_ms,
                corruption: any_noise.then_some(CorruptionConfig {
                    drop_element: d.drop_element.unwrap_or(0.0),
                    swap_markers: d.swap_markers.unwrap_or(0.0),
                    substitute_word: d.substitute_word.unwrap_or(0.0),
                    truncate: d.truncate.unwrap_or(0.0),
                }),
                ..Default::default()
            }
            .overlay(prompt(p, input(i)))
        }
        Command::Eval {
            input: i,
            predictions,
            modes,
            output: o,
        } => RunConfig {
            predictions: predictions.clone(),
            modes: modes.clone(),
            ..Default::default()
        }
        .overlay(output(o, input(i))),
        Command::Errors {
            predictions,
            output: o,
        } => output(
            o,
            RunConfig {
                predictions: predictions.clone(),
                ..Default::default()
            },
        ),
    }
}

fn out_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Stats { output, .. }
        | Command::Eval { output, .. }
        | Command::Errors { output, .. } => output.out.as_deref(),
        Command::Augment { out, .. }
        | Command::Render { out, .. }
        | Command::Decode { out, .. } => out.as_deref(),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_jsonl<T: Serialize>(
    path: Option<&Path>,
    rows: &[T],
    config: &RunConfig,
) -> Result<(), CliError> {
    let mut w = open_out(path)?;
    for r in rows {
        serde_json::to_writer(&mut w, r).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    if let Some(p) = path {
        let mut meta = p.as_os_str().to_owned();
        meta.push(".meta.json");
        let body = json!({ "config": config, "records": rows.len() });
        std::fs::write(
            &meta,
            serde_json::to_string_pretty(&body).expect("serializable") + "\n",
        )?;
    }
    Ok(())
}

fn write_report<T: Serialize>(
    path: Option<&Path>,
    format: Format,
    key: &str,
    value: &T,
    table: String,
    config: &RunConfig,
) -> Result<(), CliError> {
    let mut w = open_out(path)?;
    match format {
        Format::Json => {
            let body = json!({ key: value, "config": config });
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&body).expect("serializable")
            )?;
        }
        Format::Table => w.write_all(table.as_bytes())?,
    }
    w.flush()?;
    Ok(())
}

fn generator_spec(cfg: &RunConfig) -> Result<GeneratorSpec, CliError> {
    match cfg.generator.as_deref().unwrap_or("oracle") {
        "oracle" => Ok(GeneratorSpec::Oracle),
        "corrupt" => {
            let noise = cfg.corruption.unwrap_or_default();
            noise
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(GeneratorSpec::Corrupt(noise))
        }
        "external" => {
            let endpoint: Endpoint = cfg
                .endpoint
                .as_deref()
                .ok_or_else(|| {
                    CliError::Config("--endpoint is required for the external generator".into())
                })?
                .parse()
                .map_err(CliError::Config)?;
            let timeout = Duration::from_millis(cfg.timeout_ms.unwrap_or(30_000));
            let client = ExternalClient::connect(&endpoint, timeout)
                .map_err(|e| CliError::Generator(e.to_string()))?;
            Ok(GeneratorSpec::External(client))
        }
        other => Err(CliError::Config(format!("unknown generator {other:?}"))),
    }
}

fn read_decode_output(path: &Path) -> Result<Vec<Prediction>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Input(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    let out = out_path(cmd);
    match cmd {
        Command::Stats { .. } => {
            let corpus = cfg.load_corpus()?;
            let stats = corpus_stats(&corpus);
            let title = cfg
                .corpus
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default();
            write_report(
                out,
                cfg.format(),
                "stats",
                &stats,
                stats.to_table(&title),
                cfg,
            )
        }
        Command::Augment { .. } => {
            let corpus = cfg.load_corpus()?;
            let orders = parse_orders(cfg.orders.as_deref().unwrap_or("default"))
                .map_err(|e| CliError::Config(e.to_string()))?;
            let examples = augment_corpus(
                &corpus,
                &orders,
                cfg.single_tasks.unwrap_or(false),
                &cfg.prompter()?,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            write_jsonl(out, &examples, cfg)
        }
        Command::Render { .. } => {
            let corpus = cfg.load_corpus()?;
            let order: ElementOrder = cfg
                .order
                .as_deref()
                .unwrap_or("SOAP")
                .parse()
                .map_err(|e: crate::augment::OrderError| CliError::Config(e.to_string()))?;
            let prompter = cfg.prompter()?;
            let view = View::Quintuple(order);
            let examples: Vec<TrainingExample> = corpus
                .items
                .iter()
                .map(|item| example_for(item, &view, &prompter))
                .collect();
            write_jsonl(out, &examples, cfg)
        }
        Command::Decode { .. } => {
            let corpus = cfg.load_corpus()?;
            let mode: DecodeMode = cfg
                .mode
                .as_deref()
                .unwrap_or("step")
                .parse()
                .map_err(CliError::Config)?;
            let settings = DecodeSettings {
                prompter: cfg.prompter()?,
                max_len: cfg.max_len.unwrap_or(DEFAULT_MAX_LEN),
                mode,
                seed: cfg.seed.unwrap_or(0),
            };
            if settings.max_len == 0 {
                return Err(CliError::Config("--max-len must be at least 1".into()));
            }
            let spec = generator_spec(cfg)?;
            let run = decode_corpus(&corpus, &spec, &settings)?;
            write_jsonl(out, &run.predictions, cfg)?;
            eprint!("{}", run.report.to_table());
            Ok(())
        }
        Command::Eval { .. } => {
            let corpus = cfg.load_corpus()?;
            let path = cfg
                .predictions
                .as_ref()
                .ok_or_else(|| CliError::Config("--predictions is required".into()))?;
            let file =
                File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let preds = load_predictions(BufReader::new(file))?;
            let modes =
                parse_modes(cfg.modes.as_deref().unwrap_or("E,P,B")).map_err(CliError::Config)?;
            let report =
                evaluate(&corpus, &preds, &modes).map_err(|e| CliError::Input(e.to_string()))?;
            write_report(out, cfg.format(), "report", &report, report.to_table(), cfg)
        }
        Command::Errors { .. } => {
            let path = cfg
                .predictions
                .as_ref()
                .ok_or_else(|| CliError::Config("--predictions is required".into()))?;
            let preds = read_decode_output(path)?;
            let report: ErrorReport = preds.iter().map(|p| p.errors).sum();
            let mut table = report.to_table();
            table.push_str(&format!("  {:<22}  {}\n", "sentences", preds.len()));
            write_report(out, cfg.format(), "errors", &report, table, cfg)
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(p) => RunConfig::from_toml(
            &std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )?,
        None => RunConfig::default(),
    };
    let cfg = flags_to_config(&cli.command)
        .overlay(file_cfg)
        .with_defaults();
    execute(&cli.command, &cfg)
}
