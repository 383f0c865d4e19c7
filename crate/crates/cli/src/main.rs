//! `pbso` — parse reflective transcripts, score them with verifier
//! backends, compute prospective returns and pooled advantages, run seeded
//! training and ablation comparisons, and verify gradients.
//!
//! Every subcommand exits 0 on success; failures print one JSON error line
//! to stderr and exit nonzero.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pbso_core::credit::{bounded_returns, pooled_advantages};
use pbso_core::harness::{compare_ablations, run_training, write_run_outputs, RunConfig};
use pbso_core::optimizer::{gradient_check, sample_check_instance, OptimStep, PolicyStructure};
use pbso_core::transcript::{parse_transcript, Question, TrajectoryRecord};
use pbso_core::verifiers::{
    score_trajectory, MockBackend, OracleBackend, RemoteBackend, RemoteConfig, RewardVector,
    VerifierSet,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

const CONFIG_ENV_VAR: &str = "PBSO_CONFIG";

#[derive(Parser)]
#[command(
    name = "pbso",
    version,
    about = "Reflective-trajectory reward pipeline and policy optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse transcript files into trajectory JSONL.
    Parse(ParseArgs),
    /// Score trajectory JSONL with a verifier backend into reward JSONL.
    Score(ScoreArgs),
    /// Turn reward JSONL into returns and pooled advantages per question.
    Returns(ReturnsArgs),
    /// Run seeded training from a config file; writes metrics, policy, and
    /// plot data.
    Train(TrainArgs),
    /// Run the ablation comparison (full vs terminal-only vs unclipped).
    Compare(CompareArgs),
    /// Check analytic gradients against central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Transcript files, one trajectory each; the file stem becomes the
    /// question id. Reads one transcript from stdin when omitted.
    files: Vec<PathBuf>,
    /// Output JSONL path (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Oracle,
    Mock,
    Remote,
}

#[derive(Args)]
struct ScoreArgs {
    /// Trajectory JSONL (stdin when omitted).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output reward JSONL (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: BackendKind,
    /// Oracle backend: JSON file with {"alphabet": "abcd", "targets":
    /// {"question-id": "a b c"}}.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Mock backend: JSON fixture file with default_pass plus optional
    /// syntax/consistency/critique entry lists.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Remote backend base URL.
    #[arg(long)]
    base_url: Option<String>,
    /// Remote backend request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout_secs: u64,
    /// Remote backend concurrent request cap.
    #[arg(long, default_value_t = 8)]
    max_in_flight: usize,
    /// Question JSONL ({"id", "text"}) giving remote judges the question
    /// text.
    #[arg(long)]
    questions: Option<PathBuf>,
}

#[derive(Args)]
struct ReturnsArgs {
    /// Reward JSONL (stdin when omitted).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output JSONL (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = 1.0)]
    r_max: f64,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML config file; falls back to $PBSO_CONFIG, then to defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    aux_rewards_on: Option<bool>,
    #[arg(long)]
    clipping_on: Option<bool>,
    #[arg(long)]
    warm_start: Option<bool>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated seeds for the matched arms.
    #[arg(long, default_value = "42,43,44,45,46")]
    seeds: String,
    /// Also write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Random (policy, batch) instances per policy structure.
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    /// Tokens per instance.
    #[arg(long, default_value_t = 48)]
    tokens: usize,
    /// Maximum tolerated relative error.
    #[arg(long, default_value_t = 1e-5)]
    threshold: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": format!("{e:#}") });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Score(args) => cmd_score(args),
        Command::Returns(args) => cmd_returns(args),
        Command::Train(args) => cmd_train(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_lines(path: &Option<PathBuf>) -> Result<Vec<String>> {
    let text = match path {
        Some(p) => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        None => {
            let mut buf = String::new();
            std::io::stdin().lock().read_to_string(&mut buf)?;
            buf
        }
    };
    Ok(text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect())
}

fn cmd_parse(args: ParseArgs) -> Result<()> {
    let mut out = open_output(&args.output)?;
    if args.files.is_empty() {
        let mut text = String::new();
        std::io::stdin().lock().read_to_string(&mut text)?;
        let traj = parse_transcript(&text)?;
        serde_json::to_writer(&mut out, &TrajectoryRecord::from(&traj))?;
        out.write_all(b"\n")?;
    }
    for file in &args.files {
        let text = std::fs::read_to_string(file)
            .with_context(|| format!("reading {}", file.display()))?;
        let question_id =
            file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let traj = parse_transcript(&text)
            .with_context(|| format!("parsing {}", file.display()))?
            .with_question_id(question_id);
        serde_json::to_writer(&mut out, &TrajectoryRecord::from(&traj))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// One reward JSONL record.
#[derive(Debug, Serialize, Deserialize)]
struct RewardRecord {
    question_id: String,
    aux: Vec<u8>,
    task: u8,
}

#[derive(Deserialize)]
struct TargetsFile {
    alphabet: String,
    targets: HashMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureEntry {
    #[serde(default)]
    question_id: String,
    statement: String,
    pass: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixturesFile {
    #[serde(default = "default_true")]
    default_pass: bool,
    #[serde(default)]
    syntax: Vec<FixtureEntry>,
    #[serde(default)]
    consistency: Vec<FixtureEntry>,
    #[serde(default)]
    critique: Vec<FixtureEntry>,
}

fn default_true() -> bool {
    true
}

fn build_backend(args: &ScoreArgs) -> Result<VerifierSet> {
    match args.backend {
        BackendKind::Oracle => {
            let path = args
                .targets
                .as_ref()
                .ok_or_else(|| anyhow!("--backend oracle requires --targets FILE"))?;
            let text = std::fs::read_to_string(path)?;
            let parsed: TargetsFile = serde_json::from_str(&text)?;
            let mut backend = OracleBackend::new(parsed.alphabet.chars().collect());
            for (qid, target) in parsed.targets {
                backend.insert_target(qid, target);
            }
            Ok(VerifierSet::new(Arc::new(backend)))
        }
        BackendKind::Mock => {
            let mut backend = MockBackend::passing();
            if let Some(path) = &args.fixtures {
                let text = std::fs::read_to_string(path)?;
                let parsed: FixturesFile = serde_json::from_str(&text)?;
                backend = MockBackend::with_default(parsed.default_pass);
                for e in parsed.syntax {
                    backend.set_syntax(e.statement, e.pass);
                }
                for e in parsed.consistency {
                    backend.set_consistency(e.question_id, e.statement, e.pass);
                }
                for e in parsed.critique {
                    backend.set_critique(e.question_id, e.statement, e.pass);
                }
            }
            Ok(VerifierSet::new(Arc::new(backend)))
        }
        BackendKind::Remote => {
            let base_url = args
                .base_url
                .clone()
                .ok_or_else(|| anyhow!("--backend remote requires --base-url URL"))?;
            let backend = RemoteBackend::new(RemoteConfig {
                base_url,
                timeout_secs: args.timeout_secs,
                max_in_flight: args.max_in_flight,
                ..RemoteConfig::default()
            })?;
            Ok(VerifierSet::new(Arc::new(backend)))
        }
    }
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let verifiers = build_backend(&args)?;
    let mut question_text: HashMap<String, String> = HashMap::new();
    if let Some(path) = &args.questions {
        for line in read_lines(&Some(path.clone()))? {
            let q: Question = serde_json::from_str(&line)?;
            question_text.insert(q.id, q.text);
        }
    }
    let mut out = open_output(&args.output)?;
    for (i, line) in read_lines(&args.input)?.iter().enumerate() {
        let record: TrajectoryRecord =
            serde_json::from_str(line).with_context(|| format!("record on line {}", i + 1))?;
        let question_id = record.question_id.clone();
        let text = question_text.get(&question_id).cloned().unwrap_or_default();
        let question = Question::new(question_id.clone(), text);
        let traj = record.into_trajectory()?;
        let rv = score_trajectory(&question, &traj, &verifiers)
            .with_context(|| format!("scoring question {question_id}"))?;
        let out_record = RewardRecord { question_id, aux: rv.aux, task: rv.task };
        serde_json::to_writer(&mut out, &out_record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ReturnsRecord {
    question_id: String,
    returns: Vec<f64>,
    advantages: Vec<f64>,
    degenerate: bool,
}

fn cmd_returns(args: ReturnsArgs) -> Result<()> {
    let cfg = pbso_core::credit::ReturnConfig {
        gamma: args.gamma,
        r_min: args.r_min,
        r_max: args.r_max,
        epsilon: args.epsilon,
    };
    let mut order: Vec<String> = Vec::new();
    let mut by_question: HashMap<String, Vec<RewardVector>> = HashMap::new();
    for (i, line) in read_lines(&args.input)?.iter().enumerate() {
        let record: RewardRecord =
            serde_json::from_str(line).with_context(|| format!("record on line {}", i + 1))?;
        if !by_question.contains_key(&record.question_id) {
            order.push(record.question_id.clone());
        }
        by_question
            .entry(record.question_id)
            .or_default()
            .push(RewardVector::new(record.aux, record.task));
    }
    if order.is_empty() {
        bail!("no reward records on input");
    }
    let mut out = open_output(&args.output)?;
    for qid in order {
        let vectors = &by_question[&qid];
        let returns = vectors
            .iter()
            .map(|rv| bounded_returns(rv, &cfg))
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("returns for question {qid}"))?;
        let pooled = pooled_advantages(&returns, cfg.epsilon)
            .with_context(|| format!("advantages for question {qid}"))?;
        for (seq, advantages) in returns.iter().zip(pooled.per_member) {
            let record = ReturnsRecord {
                question_id: qid.clone(),
                returns: seq.values.clone(),
                advantages,
                degenerate: pooled.degenerate,
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    let path = args
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => RunConfig::from_toml_file(&p)
            .with_context(|| format!("loading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(steps) = args.steps {
        cfg.steps = steps;
    }
    if let Some(lr) = args.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(gamma) = args.gamma {
        cfg.gamma = gamma;
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(v) = args.aux_rewards_on {
        cfg.aux_rewards_on = v;
    }
    if let Some(v) = args.clipping_on {
        cfg.clipping_on = v;
    }
    if let Some(v) = args.warm_start {
        cfg.warm_start = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let outcome = run_training(&cfg)?;
    let dir = Path::new(&cfg.out_dir);
    write_run_outputs(&outcome, dir)?;
    // the resolved config makes the run directory self-reproducing
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    if let Some(last) = outcome.metrics.last() {
        println!(
            "trained {} steps: reward {:.4} task {:.4} faithfulness {:.4}",
            outcome.metrics.len(),
            last.mean_reward,
            last.task_success,
            last.critique_faithfulness
        );
    } else {
        println!("trained 0 steps");
    }
    println!("outputs in {}", dir.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let seeds = args
        .seeds
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| anyhow!("bad seed {s:?}: {e}")))
        .collect::<Result<Vec<u64>>>()?;
    let report = compare_ablations(&cfg, &seeds)?;
    print!("{report}");
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, json)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<()> {
    let opt = OptimStep::default();
    let mut worst: f64 = 0.0;
    for (structure, n_features, n_actions) in [
        (PolicyStructure::Tabular, 16, 6),
        (PolicyStructure::LinearSoftmax, 12, 6),
    ] {
        let mut max_err: f64 = 0.0;
        for seed in 0..args.seeds {
            let (policy, batch) =
                sample_check_instance(structure, n_features, n_actions, args.tokens, seed);
            let err = gradient_check(&policy, &batch, &opt)?;
            max_err = max_err.max(err);
        }
        println!("{structure:?}: max relative error {max_err:.3e} over {} seeds", args.seeds);
        worst = worst.max(max_err);
    }
    if worst >= args.threshold {
        bail!("gradient check failed: {worst:.3e} >= {:.1e}", args.threshold);
    }
    println!("gradient check passed (threshold {:.1e})", args.threshold);
    Ok(())
}
