//! Command-line front end.
//!
//! Exit codes: 0 on success (including "no answer"), 1 on configuration or
//! input errors, 2 when a question matches no template.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::graph::{load_triples, IngestConfig, PropertyGraph};
use crate::pipeline::{AnswerOptions, AnswerStatus, AnswerValue, Engine, SentenceTemplates};
use crate::question::{ParsedQuestion, TemplateRegistry};
use crate::rules::{
    evaluate_confidence, mine, AssociationRule, ConfidenceReport, MiningParams, RuleSet,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_TEMPLATE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "kgqa",
    version,
    about = "Question answering over a knowledge graph with rule-based link prediction"
)]
struct Cli {
    /// Triple file (subject<TAB>predicate<TAB>object per line)
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Question template file; defaults to the built-in templates
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Rule file; defaults to the built-in isMarriedTo rules
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    /// Answer sentence file; defaults to the built-in sentences
    #[arg(long, global = true)]
    sentences: Option<PathBuf>,
    /// Predicate stored as a node property (repeatable; replaces the defaults)
    #[arg(long = "literal-predicate", global = true)]
    literal_predicates: Vec<String>,
    /// Keep surrounding '<' '>' on triple terms
    #[arg(long, global = true)]
    keep_angle_brackets: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    output: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct AnswerArgs {
    /// Predict missing answers with association rules
    #[arg(long)]
    use_rules: bool,
    #[arg(long, default_value_t = 0.5)]
    min_std_conf: f64,
    #[arg(long, default_value_t = 0.5)]
    min_pca_conf: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Answer one question
    Ask {
        question: String,
        #[command(flatten)]
        answer: AnswerArgs,
    },
    /// Answer questions read line by line from standard input
    Repl {
        #[command(flatten)]
        answer: AnswerArgs,
    },
    /// Print standard and PCA confidence of rules
    Confidence {
        /// Rule name from the loaded rules, or a rule file
        #[arg(long)]
        rule: Option<String>,
    },
    /// Mine path rules from the graph
    Mine {
        #[arg(long, default_value_t = 2)]
        max_body: usize,
        #[arg(long, default_value_t = 2)]
        min_support: usize,
        #[arg(long, default_value_t = 0.0)]
        min_std_conf: f64,
        #[arg(long, default_value_t = 0.0)]
        min_pca_conf: f64,
    },
}

/// Resolved inputs shared by all subcommands.
pub struct CliConfig {
    pub graph: PropertyGraph,
    pub templates: TemplateRegistry,
    pub rules: RuleSet,
    pub sentences: SentenceTemplates,
    pub output: OutputFormat,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn load_rules(path: &Path) -> Result<RuleSet> {
    RuleSet::load(open(path)?).with_context(|| format!("invalid rule file {}", path.display()))
}

impl CliConfig {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let Some(graph_path) = &cli.graph else {
            bail!("--graph is required");
        };
        let mut ingest = IngestConfig::default();
        if !cli.literal_predicates.is_empty() {
            ingest.literal_predicates = cli.literal_predicates.iter().cloned().collect();
        }
        ingest.strip_angle_brackets = !cli.keep_angle_brackets;
        let graph = load_triples(open(graph_path)?, &ingest)
            .with_context(|| format!("invalid triple file {}", graph_path.display()))?;
        let templates = match &cli.templates {
            Some(p) => TemplateRegistry::load(open(p)?)
                .with_context(|| format!("invalid template file {}", p.display()))?,
            None => TemplateRegistry::builtin(),
        };
        let rules = match &cli.rules {
            Some(p) => load_rules(p)?,
            None => RuleSet::builtin(),
        };
        let sentences = match &cli.sentences {
            Some(p) => SentenceTemplates::load(open(p)?)
                .with_context(|| format!("invalid sentence file {}", p.display()))?,
            None => SentenceTemplates::builtin(),
        };
        Ok(Self {
            graph,
            templates,
            rules,
            sentences,
            output: cli.output,
        })
    }
}

#[derive(Serialize)]
struct AnswerRecord<'a> {
    question: &'a str,
    parsed: &'a ParsedQuestion,
    status: AnswerStatus,
    values: &'a [AnswerValue],
    text: String,
}

#[derive(Serialize)]
struct RuleRecord<'a> {
    name: &'a str,
    rule: String,
    #[serde(flatten)]
    report: &'a ConfidenceReport,
}

enum Asked {
    Answered,
    NoTemplate,
}

fn ask(
    config: &CliConfig,
    engine: &Engine<'_>,
    question: &str,
    options: &AnswerOptions,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Asked> {
    let Ok(parsed) = engine.classify(question) else {
        writeln!(err, "error: question matches no template")?;
        return Ok(Asked::NoTemplate);
    };
    let answer = engine.answer_parsed(&parsed, options)?;
    let text = config.sentences.format(&answer, &parsed);
    match config.output {
        OutputFormat::Text => writeln!(out, "{text}")?,
        OutputFormat::Json => {
            let record = AnswerRecord {
                question,
                parsed: &parsed,
                status: answer.status,
                values: &answer.values,
                text,
            };
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(Asked::Answered)
}

fn print_rule(
    config: &CliConfig,
    name: &str,
    rule: &AssociationRule,
    report: &ConfidenceReport,
    out: &mut dyn Write,
) -> Result<()> {
    match config.output {
        OutputFormat::Text => writeln!(
            out,
            "{name}: std {:.4}, PCA {:.4} (support {}, body {}, PCA body {})  {rule}",
            report.std_conf,
            report.pca_conf,
            report.support,
            report.body_count,
            report.pca_body_count
        )?,
        OutputFormat::Json => {
            let record = RuleRecord {
                name,
                rule: rule.to_string(),
                report,
            };
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(())
}

fn options(args: AnswerArgs) -> Result<AnswerOptions> {
    Ok(AnswerOptions::new(
        args.use_rules,
        args.min_std_conf,
        args.min_pca_conf,
    )?)
}

fn execute(
    cli: Cli,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    // validate thresholds before touching any file
    match &cli.command {
        Command::Ask { answer, .. } | Command::Repl { answer } => {
            options(*answer)?;
        }
        Command::Mine {
            max_body,
            min_std_conf,
            min_pca_conf,
            ..
        } => {
            AnswerOptions::new(false, *min_std_conf, *min_pca_conf)?;
            if !(1..=4).contains(max_body) {
                bail!("--max-body must be between 1 and 4, got {max_body}");
            }
        }
        Command::Confidence { .. } => {}
    }

    let config = CliConfig::from_cli(&cli)?;
    match cli.command {
        Command::Ask { question, answer } => {
            let engine = Engine::new(&config.graph, &config.templates, &config.rules);
            match ask(&config, &engine, &question, &options(answer)?, out, err)? {
                Asked::Answered => Ok(EXIT_OK),
                Asked::NoTemplate => Ok(EXIT_NO_TEMPLATE),
            }
        }
        Command::Repl { answer } => {
            let engine = Engine::new(&config.graph, &config.templates, &config.rules);
            let options = options(answer)?;
            for line in input.lines() {
                let line = line?;
                let question = line.trim();
                if question.is_empty() {
                    continue;
                }
                if matches!(question, "quit" | "exit") {
                    break;
                }
                ask(&config, &engine, question, &options, out, err)?;
                out.flush()?;
            }
            Ok(EXIT_OK)
        }
        Command::Confidence { rule } => {
            let selected: Vec<AssociationRule> = match rule {
                None => config.rules.rules().to_vec(),
                Some(arg) if Path::new(&arg).is_file() => {
                    load_rules(Path::new(&arg))?.rules().to_vec()
                }
                Some(name) => match config.rules.get(&name) {
                    Some(r) => vec![r.clone()],
                    None => bail!("no rule named {name:?}"),
                },
            };
            for rule in &selected {
                let report = evaluate_confidence(&config.graph, rule);
                print_rule(&config, &rule.label(), rule, &report, out)?;
            }
            Ok(EXIT_OK)
        }
        Command::Mine {
            max_body,
            min_support,
            min_std_conf,
            min_pca_conf,
        } => {
            let params = MiningParams {
                max_body,
                min_support,
                min_std_conf,
                min_pca_conf,
            };
            for mined in mine(&config.graph, &params)? {
                print_rule(
                    &config,
                    &mined.rule.label(),
                    &mined.rule,
                    &mined.report,
                    out,
                )?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_ERROR
                }
            };
        }
    };
    match execute(cli, input, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
