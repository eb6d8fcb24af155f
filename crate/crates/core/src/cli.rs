//! The `ecie` command line front end.
//!
//! Every command prints one JSON payload carrying `schema_version`; with
//! `--out FILE` the payload goes to that file instead. Exit codes: 0 on
//! success, 1 on findings under `--strict`, validation failures or runtime
//! errors, 2 on usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::agreement::{corpus_agreement, AgreementTask};
use crate::corpus::{self, dwie, CorpusFormat, Document, Split, Vocabulary};
use crate::decoder::{decode_entity_centric, DecodeInput};
use crate::error::{Error, Result};
use crate::kernels::selftest;
use crate::metrics::coref::score_coref_corpus;
use crate::metrics::ie::score_corpus;
use crate::metrics::{Level, Task};
use crate::rules;
use crate::stats;
use crate::SCHEMA_VERSION;

#[derive(Debug, Parser)]
#[command(name = "ecie", version, about = "Entity-centric IE corpus tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a corpus against the document schema.
    Validate {
        corpus: PathBuf,
        /// Also fail on warnings.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics and relation distance profiles.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the distance CDFs as TSV.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Score predictions against gold annotations.
    Score {
        #[arg(long, value_enum)]
        task: ScoreTask,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        level: LevelArg,
        #[arg(long)]
        per_label: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn mention-level predictions into entity-level ones.
    Decode {
        /// JSON Lines of mention-level predictions.
        #[arg(long)]
        pred: PathBuf,
        /// Destination of the decoded documents.
        #[arg(long)]
        out: PathBuf,
        /// Corpus supplying tokens and sentences; when given the output is
        /// written as canonical documents.
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Relation consistency rules.
    Rules {
        #[command(subcommand)]
        action: RulesCommand,
    },
    /// Inter-annotator agreement.
    Kappa {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        task: KappaTask,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numeric kernel checks.
    Kernels {
        #[command(subcommand)]
        action: KernelsCommand,
    },
    /// Convert a directory of DWIE release files to canonical JSON Lines.
    Convert {
        source: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum RulesCommand {
    /// Report rule groundings whose head relation is missing.
    Check {
        corpus: PathBuf,
        /// Also compute the fixpoint and report derived relations.
        #[arg(long)]
        closure: bool,
        /// Exit 1 on any violation.
        #[arg(long)]
        strict: bool,
        /// Rule file to use instead of the built-in set.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// With --closure, write the closed corpus here.
        #[arg(long, requires = "closure")]
        corpus_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum KernelsCommand {
    /// Run golden fixtures and loop-oracle comparisons.
    Selftest {
        /// Fixture file to use instead of the bundled one.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreTask {
    Ner,
    Re,
    Coref,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Mention,
    Hard,
    Soft,
    All,
}

impl LevelArg {
    fn levels(self) -> Vec<Level> {
        match self {
            LevelArg::Mention => vec![Level::Mention],
            LevelArg::Hard => vec![Level::Hard],
            LevelArg::Soft => vec![Level::Soft],
            LevelArg::All => Level::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KappaTask {
    Entity,
    Coref,
    Linking,
    Relation,
}

impl From<KappaTask> for AgreementTask {
    fn from(t: KappaTask) -> Self {
        match t {
            KappaTask::Entity => AgreementTask::Entity,
            KappaTask::Coref => AgreementTask::Coref,
            KappaTask::Linking => AgreementTask::Linking,
            KappaTask::Relation => AgreementTask::Relation,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    /// The JSON payload; `Null` for help and usage output.
    pub payload: Value,
    /// Text for standard output: the payload unless it went to a file.
    pub stdout: String,
    /// Diagnostics for standard error.
    pub stderr: String,
}

struct Outcome {
    payload: Value,
    exit_code: i32,
    out: Option<PathBuf>,
    diagnostics: Vec<String>,
}

impl Outcome {
    fn ok(payload: Value, out: Option<PathBuf>) -> Self {
        Outcome {
            payload,
            exit_code: 0,
            out,
            diagnostics: Vec::new(),
        }
    }
}

fn with_version(mut payload: Value) -> Value {
    if let Value::Object(map) = &mut payload {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    payload
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            use clap::CommandFactory;
            let mut text = e.render().to_string();
            if !text.contains("Usage:") {
                text.push_str(&format!("\n{}\n", Cli::command().render_usage()));
            }
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult {
                    exit_code: 0,
                    payload: Value::Null,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CommandResult {
                    exit_code: 2,
                    payload: Value::Null,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let outcome = dispatch(cli.command).and_then(|o| {
        let payload = with_version(o.payload);
        if let Some(path) = &o.out {
            let text = serde_json::to_string_pretty(&payload).expect("payload serializes") + "\n";
            std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
        Ok(Outcome { payload, ..o })
    });
    match outcome {
        Ok(o) => CommandResult {
            exit_code: o.exit_code,
            stdout: if o.out.is_some() {
                String::new()
            } else {
                serde_json::to_string_pretty(&o.payload).expect("payload serializes") + "\n"
            },
            payload: o.payload,
            stderr: o.diagnostics.iter().map(|d| format!("{d}\n")).collect(),
        },
        Err(e) => {
            let payload = with_version(json!({
                "error": {"kind": e.kind(), "message": e.to_string()}
            }));
            CommandResult {
                exit_code: 1,
                stdout: serde_json::to_string_pretty(&payload).expect("payload serializes") + "\n",
                payload,
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn load(path: &Path) -> Result<Vec<Document>> {
    corpus::parse_corpus(path, CorpusFormat::detect(path), &Vocabulary::builtin())
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Validate { corpus, strict, out } => validate(&corpus, strict, out),
        Command::Stats { corpus, out, plot_data } => stats_cmd(&corpus, out, plot_data),
        Command::Score {
            task,
            gold,
            pred,
            level,
            per_label,
            out,
        } => score(task, &gold, &pred, level, per_label, out),
        Command::Decode { pred, out, template } => decode(&pred, &out, template.as_deref()),
        Command::Rules {
            action:
                RulesCommand::Check {
                    corpus,
                    closure,
                    strict,
                    rules,
                    corpus_out,
                    out,
                },
        } => rules_check(&corpus, closure, strict, rules.as_deref(), corpus_out, out),
        Command::Kappa { a, b, task, out } => {
            let a = load(&a)?;
            let b = load(&b)?;
            let r = corpus_agreement(&a, &b, task.into())?;
            Ok(Outcome::ok(to_json(&r), out))
        }
        Command::Kernels {
            action: KernelsCommand::Selftest { fixtures, trials, out },
        } => kernels_selftest(fixtures.as_deref(), trials, out),
        Command::Convert { source, out } => {
            let (docs, summary) = dwie::convert_dir(&source)?;
            corpus::write_corpus(&out, &docs)?;
            let mut payload = to_json(&summary);
            payload["output"] = json!(out.display().to_string());
            Ok(Outcome::ok(payload, None))
        }
    }
}

fn validate(path: &Path, strict: bool, out: Option<PathBuf>) -> Result<Outcome> {
    let docs = corpus::read_corpus(path, CorpusFormat::detect(path))?;
    let report = corpus::check_all(&docs, &Vocabulary::builtin());
    let failed = !report.errors.is_empty() || (strict && !report.warnings.is_empty());
    let diagnostics = report
        .errors
        .iter()
        .map(|f| format!("error: {f}"))
        .chain(report.warnings.iter().map(|f| format!("warning: {f}")))
        .collect();
    let payload = json!({
        "documents": docs.len(),
        "errors": report.errors,
        "warnings": report.warnings,
    });
    Ok(Outcome {
        payload,
        exit_code: i32::from(failed),
        out,
        diagnostics,
    })
}

fn stats_cmd(path: &Path, out: Option<PathBuf>, plot_data: Option<PathBuf>) -> Result<Outcome> {
    let docs = load(path)?;
    let profile = stats::relation_distance_profile(&docs)?;
    if let Some(p) = &plot_data {
        std::fs::write(p, profile.to_tsv()).map_err(|e| Error::io(p, e))?;
    }
    let train: Vec<Document> = docs.iter().filter(|d| d.split == Split::Train).cloned().collect();
    let test: Vec<Document> = docs.iter().filter(|d| d.split == Split::Test).cloned().collect();
    let prior = match stats::prior_link_baseline(&train, &test) {
        Ok(r) => to_json(&r),
        Err(e) => json!({"skipped": e.to_string()}),
    };
    let ml = stats::multilabel_relation_histogram(&docs);
    let buckets: BTreeMap<&str, _> = ["1", "2", "3", "4+"].into_iter().zip(ml.buckets).collect();
    let payload = json!({
        "summary": stats::corpus_summary(&docs),
        "entity_types": stats::entity_type_histogram(&docs, &stats::TypeHierarchy::builtin()),
        "tag_categories": stats::tag_category_histogram(&docs),
        "relation_types": stats::relation_type_histogram(&docs),
        "relation_label_counts": {"buckets": buckets, "total": ml.total},
        "relation_total_convention": "distinct (head, tail) entity pairs; mention pairs summed over them",
        "distance": {
            "instances": profile.instances.len(),
            "cdf_min_tokens": profile.cdf_min_tokens,
            "cdf_max_tokens": profile.cdf_max_tokens,
            "cdf_min_sentences": profile.cdf_min_sentences,
            "cdf_max_sentences": profile.cdf_max_sentences,
        },
        "prior_link_baseline": prior,
    });
    Ok(Outcome::ok(payload, out))
}

fn score(
    task: ScoreTask,
    gold: &Path,
    pred: &Path,
    level: LevelArg,
    per_label: bool,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let gold = load(gold)?;
    let pred = load(pred)?;
    let ie_tasks = match task {
        ScoreTask::Ner => vec![Task::Ner],
        ScoreTask::Re => vec![Task::Re],
        ScoreTask::Coref => vec![],
        ScoreTask::All => vec![Task::Ner, Task::Re],
    };
    let mut results = Vec::new();
    for t in ie_tasks {
        let tally = score_corpus(&gold, &pred, t)?;
        for l in level.levels() {
            let mut row = to_json(&tally.report(l));
            if per_label {
                row["per_label"] = to_json(&tally.per_label(l));
            }
            results.push(row);
        }
    }
    let mut payload = json!({ "results": results });
    if matches!(task, ScoreTask::Coref | ScoreTask::All) {
        payload["coref"] = to_json(&score_coref_corpus(&gold, &pred)?);
    }
    Ok(Outcome::ok(payload, out))
}

fn decode(pred: &Path, out: &Path, template: Option<&Path>) -> Result<Outcome> {
    let text = std::fs::read_to_string(pred).map_err(|e| Error::io(pred, e))?;
    let inputs: Vec<DecodeInput> = corpus::parse_jsonl_as(&text)?;
    let mut outputs = Vec::with_capacity(inputs.len());
    for input in &inputs {
        outputs.push(decode_entity_centric(input)?);
    }
    let discarded: usize = outputs.iter().map(|o| o.discarded_relations).sum();
    match template {
        Some(t) => {
            let templates = load(t)?;
            let by_id: BTreeMap<&str, &Document> = templates.iter().map(|d| (d.id.as_str(), d)).collect();
            let mut docs = Vec::new();
            for o in &outputs {
                let id = o.id.as_deref().ok_or_else(|| {
                    Error::InvalidArgument("predictions need an id to match a template".into())
                })?;
                let tpl = by_id
                    .get(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("no template document {id}")))?;
                docs.push(o.to_document(tpl));
            }
            corpus::write_corpus(out, &docs)?;
        }
        None => {
            let mut text = String::new();
            for o in &outputs {
                text.push_str(&serde_json::to_string(o).expect("output serializes"));
                text.push('\n');
            }
            std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
        }
    }
    let payload = json!({
        "documents": outputs.len(),
        "discarded_relations": discarded,
        "output": out.display().to_string(),
    });
    Ok(Outcome::ok(payload, None))
}

fn rules_check(
    path: &Path,
    closure: bool,
    strict: bool,
    rule_file: Option<&Path>,
    corpus_out: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let docs = load(path)?;
    let rule_set = match rule_file {
        Some(p) => rules::load_rules(p)?,
        None => rules::builtin_ruleset(),
    };
    let mut tally = BTreeMap::new();
    let mut violations = Vec::new();
    for d in &docs {
        violations.extend(rules::check_with_tally(d, &rule_set, &mut tally));
    }
    let groundings: usize = tally.values().map(|t| t.groundings).sum();
    let rate = if groundings == 0 {
        0.0
    } else {
        violations.len() as f64 / groundings as f64
    };
    let mut payload = json!({
        "documents": docs.len(),
        "rules": rule_set.len(),
        "groundings": groundings,
        "violation_count": violations.len(),
        "violation_rate": rate,
        "per_rule": tally,
        "violations": violations,
    });
    if closure {
        let mut closed = Vec::with_capacity(docs.len());
        let mut derived = 0;
        for d in &docs {
            let (doc, n) = rules::materialize(d, &rule_set)?;
            derived += n;
            closed.push(doc);
        }
        payload["derived_relations"] = json!(derived);
        match &corpus_out {
            Some(p) => {
                corpus::write_corpus(p, &closed)?;
                payload["closed_corpus"] = json!(p.display().to_string());
            }
            None => payload["closed_corpus"] = to_json(&closed),
        }
    }
    let diagnostics = violations.iter().map(|v| format!("violation: {v}")).collect();
    Ok(Outcome {
        payload,
        exit_code: i32::from(strict && !violations.is_empty()),
        out,
        diagnostics,
    })
}

fn kernels_selftest(fixtures: Option<&Path>, trials: usize, out: Option<PathBuf>) -> Result<Outcome> {
    let cases = match fixtures {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            selftest::parse_fixtures(&text)?
        }
        None => selftest::builtin_fixtures(),
    };
    let fixtures = selftest::run_fixtures(&cases);
    let oracles = selftest::run_oracles(trials);
    let passed = fixtures.iter().chain(&oracles).all(|c| c.passed);
    let diagnostics = fixtures
        .iter()
        .chain(&oracles)
        .map(|c| {
            format!(
                "{} {} {}: max |dev| {:.3e}",
                if c.passed { "ok  " } else { "FAIL" },
                c.kernel,
                c.case,
                c.max_abs_dev
            )
        })
        .collect();
    let report = selftest::SelftestReport {
        tolerance: selftest::TOLERANCE,
        fixtures,
        oracles,
        passed,
    };
    Ok(Outcome {
        payload: to_json(&report),
        exit_code: i32::from(!passed),
        out,
        diagnostics,
    })
}
