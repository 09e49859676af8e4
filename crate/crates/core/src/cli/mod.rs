//! The `dact` command line. Exit status 0 on success, 1 on usage or
//! configuration errors, 2 on data errors. Diagnostics go to stderr.

mod config;

pub use config::{Domain, OutputFormat, RunConfig};

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::corpus::{parse_corpus, validate_corpus, write_corpus, Corpus, Genre, TagSchema};
use crate::error::{Error, Result};
use crate::eval::{
    benchmark_structures, cross_validate, evaluate_model, fmt4, render_cv, render_evaluation, render_timings,
    render_transfer, transfer_table,
};
use crate::features::{Analyzer, CueLexicon, VerbLexicon};
use crate::hierarchy::{label_dialogue, train_hierarchical, HierarchicalModel, Structure};
use crate::synth::{generate_corpus, Grammar};

#[derive(Parser)]
#[command(name = "dact", version, about = "Hierarchical dialogue-act classification")]
#[command(propagate_version = true, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Train a model on a labeled corpus
    Train,
    /// Label a corpus with a trained model, writing JSONL
    Predict,
    /// Score a trained model on a labeled corpus
    Eval,
    /// Dialogue-level k-fold cross-validation
    Cv,
    /// Time training of the HierBinary, HierOvO and HierOvA structures
    Bench,
    /// Generate a labeled synthetic corpus
    Gen,
    /// Train on each --domain and test on the others
    Transfer,
    /// Corpus size figures and validation problems
    Stats,
}

#[derive(Args)]
struct Flags {
    /// JSON run configuration; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the effective configuration to stderr
    #[arg(long, global = true)]
    dump_config: bool,

    /// Corpus in JSONL, one dialogue per line
    #[arg(long, global = true, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Tag schema (JSON); the bundled schema otherwise
    #[arg(long, global = true, value_name = "FILE")]
    schema: Option<PathBuf>,
    /// Cue lexicon, one entry per line
    #[arg(long, global = true, value_name = "FILE")]
    cues: Option<PathBuf>,
    /// Verb lexicon, `form<TAB>active|passive` per line
    #[arg(long, global = true, value_name = "FILE")]
    verbs: Option<PathBuf>,
    /// Model file: written by train, read by predict and eval
    #[arg(long, global = true, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Output file instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Generator grammar (JSON) for gen
    #[arg(long, global = true, value_name = "FILE")]
    grammar: Option<PathBuf>,
    /// Corpus for the transfer table, repeatable
    #[arg(long = "domain", global = true, value_name = "NAME=FILE")]
    domains: Vec<Domain>,

    /// Number of cross-validation folds
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Seed for SMO, fold assignment and generation
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// SVM box constraint
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    /// SMO KKT tolerance
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Additive smoothing of the transition prior
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Minimum n-gram frequency for the vocabulary
    #[arg(long, global = true)]
    min_freq: Option<usize>,
    #[arg(long, global = true, value_enum)]
    structure: Option<Structure>,
    /// Restrict layer 2 to the acts of the predicted category
    #[arg(long, global = true)]
    strict_hierarchy: bool,
    /// Decode without the transition prior
    #[arg(long, global = true)]
    uniform_transitions: bool,
    /// Use gold previous acts as context instead of predictions
    #[arg(long, global = true)]
    gold_context: bool,
    /// Worker threads for folds and dialogues
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Timed runs per structure for bench
    #[arg(long, global = true)]
    repetitions: Option<usize>,

    /// Dialogues to generate
    #[arg(long, global = true)]
    dialogues: Option<usize>,
    /// Probability of a one-token substitution per utterance
    #[arg(long, global = true, allow_negative_numbers = true)]
    noise: Option<f64>,
    /// Share of grammar words kept; the rest become pseudo-words
    #[arg(long, global = true, allow_negative_numbers = true)]
    vocab_overlap: Option<f64>,
    /// Prefix of generated dialogue ids
    #[arg(long, global = true)]
    id_prefix: Option<String>,
    #[arg(long, global = true, value_enum)]
    genre: Option<Genre>,

    /// Report format
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// More log output (repeat for debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) {
        fn set<T: Clone>(slot: &mut T, flag: &Option<T>) {
            if let Some(v) = flag {
                *slot = v.clone();
            }
        }
        fn set_path(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        set_path(&mut cfg.corpus, &self.corpus);
        set_path(&mut cfg.schema, &self.schema);
        set_path(&mut cfg.cues, &self.cues);
        set_path(&mut cfg.verbs, &self.verbs);
        set_path(&mut cfg.model, &self.model);
        set_path(&mut cfg.output, &self.output);
        set_path(&mut cfg.grammar, &self.grammar);
        if !self.domains.is_empty() {
            cfg.domains.clone_from(&self.domains);
        }
        set(&mut cfg.k, &self.k);
        set(&mut cfg.seed, &self.seed);
        set(&mut cfg.c, &self.c);
        set(&mut cfg.tol, &self.tol);
        set(&mut cfg.alpha, &self.alpha);
        set(&mut cfg.min_freq, &self.min_freq);
        set(&mut cfg.structure, &self.structure);
        cfg.strict_hierarchy |= self.strict_hierarchy;
        cfg.uniform_transitions |= self.uniform_transitions;
        cfg.gold_context |= self.gold_context;
        set(&mut cfg.threads, &self.threads);
        set(&mut cfg.repetitions, &self.repetitions);
        set(&mut cfg.dialogues, &self.dialogues);
        set(&mut cfg.noise, &self.noise);
        set(&mut cfg.vocab_overlap, &self.vocab_overlap);
        set(&mut cfg.id_prefix, &self.id_prefix);
        set(&mut cfg.genre, &self.genre);
        set(&mut cfg.format, &self.format);
    }
}

/// Usage problems exit 1; everything the data or the file system throws exits 2.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Usage(msg),
            other => Failure::Data(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.flags.verbose);
    match execute(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Run `dact --help` for usage.");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            2
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn execute(cli: Cli) -> Outcome {
    let mut cfg = match &cli.flags.config {
        Some(path) => RunConfig::from_json(&read_text(path)?)?,
        None => RunConfig::default(),
    };
    cli.flags.apply(&mut cfg);
    cfg.validate()?;
    if cli.flags.dump_config {
        eprintln!("{}", serde_json::to_string_pretty(&cfg).map_err(Error::from)?);
    }
    let command = cli.command;
    with_threads(cfg.threads, move || match command {
        Command::Train => train(&cfg),
        Command::Predict => predict(&cfg),
        Command::Eval => eval(&cfg),
        Command::Cv => cv(&cfg),
        Command::Bench => bench(&cfg),
        Command::Gen => gen(&cfg),
        Command::Transfer => transfer(&cfg),
        Command::Stats => stats(&cfg),
    })
}

#[cfg(feature = "parallel")]
fn with_threads<F: FnOnce() -> Outcome + Send>(threads: usize, job: F) -> Outcome {
    if threads <= 1 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(job)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<F: FnOnce() -> Outcome + Send>(threads: usize, job: F) -> Outcome {
    if threads > 1 {
        log::warn!("built without the parallel feature; running on one thread");
    }
    job()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str, command: &str) -> Outcome<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Failure::Usage(format!("{command} needs --{flag}")))
}

fn load_schema(cfg: &RunConfig) -> Result<TagSchema> {
    match &cfg.schema {
        Some(path) => TagSchema::from_json(&read_text(path)?),
        None => Ok(TagSchema::default_schema()),
    }
}

fn load_corpus_at(path: &Path, schema: &TagSchema) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let corpus = parse_corpus(BufReader::new(file), schema)?;
    info!("{}: {} dialogues, {} utterances", path.display(), corpus.dialogues.len(), corpus.num_utterances());
    Ok(corpus)
}

fn load_corpus(cfg: &RunConfig, command: &str) -> Outcome<Corpus> {
    let path = required(&cfg.corpus, "corpus", command)?;
    Ok(load_corpus_at(path, &load_schema(cfg)?)?)
}

/// Training corpora rarely cover the whole schema; say once which acts can never be predicted.
fn warn_unseen_acts(corpus: &Corpus) {
    let seen: std::collections::BTreeSet<&str> = corpus
        .dialogues
        .iter()
        .flat_map(|d| d.utterances().filter_map(|(_, u)| u.act.as_deref()))
        .collect();
    let missing: Vec<&str> = corpus
        .schema
        .acts()
        .iter()
        .map(String::as_str)
        .filter(|a| !seen.contains(a))
        .collect();
    if !missing.is_empty() {
        log::warn!("acts absent from the training corpus cannot be predicted: {}", missing.join(", "));
    }
}

fn load_analyzer(cfg: &RunConfig) -> Result<Analyzer> {
    let mut analyzer = Analyzer::default_resources();
    if let Some(path) = &cfg.cues {
        analyzer.cues = CueLexicon::from_text(&read_text(path)?, &analyzer.normalization);
    }
    if let Some(path) = &cfg.verbs {
        analyzer.verbs = VerbLexicon::from_text(&read_text(path)?, &analyzer.normalization)?;
    }
    Ok(analyzer)
}

fn load_model(cfg: &RunConfig, command: &str) -> Outcome<HierarchicalModel> {
    let path = required(&cfg.model, "model", command)?;
    let file = File::open(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(HierarchicalModel::load(BufReader::new(file))?)
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => fs::write(p, bytes)
            .map_err(|e| Failure::Data(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))))?,
        None => {
            let mut out = io::stdout().lock();
            match out.write_all(bytes).and_then(|()| out.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

/// Writes a report as pretty JSON or as text.
fn report<T: Serialize>(cfg: &RunConfig, value: &T, text: impl FnOnce(&T) -> String) -> Outcome {
    let body = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(value).map_err(Error::from)? + "\n",
        OutputFormat::Text => text(value),
    };
    write_to(cfg.output.as_deref(), body.as_bytes())
}

fn train(cfg: &RunConfig) -> Outcome {
    let corpus = load_corpus(cfg, "train")?;
    warn_unseen_acts(&corpus);
    let model = train_hierarchical(&corpus, &load_analyzer(cfg)?, &cfg.hierarchy())?;
    info!(
        "trained {} with {} + {} binary SVMs",
        cfg.structure.report_name(),
        model.layer1.model.num_binary_models(),
        model.layer2.model.num_binary_models()
    );
    let json = model.to_json()? + "\n";
    write_to(cfg.model.as_deref().or(cfg.output.as_deref()), json.as_bytes())
}

fn predict(cfg: &RunConfig) -> Outcome {
    let model = load_model(cfg, "predict")?;
    let corpus = load_corpus(cfg, "predict")?;
    model.check_schema(&corpus.schema)?;
    let decoded = model.decode_all(&corpus.dialogues, &cfg.decode(), cfg.threads > 1)?;
    let labeled = Corpus {
        dialogues: corpus
            .dialogues
            .iter()
            .zip(&decoded)
            .map(|(d, p)| label_dialogue(d, p, &model.schema))
            .collect(),
        schema: corpus.schema,
    };
    let mut out = Vec::new();
    write_corpus(&labeled, &mut out)?;
    write_to(cfg.output.as_deref(), &out)
}

fn eval(cfg: &RunConfig) -> Outcome {
    let model = load_model(cfg, "eval")?;
    let corpus = load_corpus(cfg, "eval")?;
    let evaluation = evaluate_model(&model, &corpus, &cfg.decode(), cfg.threads > 1)?;
    report(cfg, &evaluation, render_evaluation)
}

fn cv(cfg: &RunConfig) -> Outcome {
    let corpus = load_corpus(cfg, "cv")?;
    warn_unseen_acts(&corpus);
    let result = cross_validate(&corpus, &load_analyzer(cfg)?, &cfg.hierarchy(), &cfg.decode(), cfg.k, cfg.seed)?;
    report(cfg, &result, render_cv)
}

fn bench(cfg: &RunConfig) -> Outcome {
    let corpus = load_corpus(cfg, "bench")?;
    let reports = benchmark_structures(&corpus, &load_analyzer(cfg)?, &cfg.hierarchy(), cfg.repetitions)?;
    report(cfg, &reports, |r| render_timings(r))
}

fn gen(cfg: &RunConfig) -> Outcome {
    let grammar = match &cfg.grammar {
        Some(path) => Grammar::from_json(&read_text(path)?)?,
        None => Grammar::default_grammar(),
    };
    let corpus = generate_corpus(&grammar, &cfg.generator(), &load_schema(cfg)?)?;
    info!("generated {} dialogues, {} utterances", corpus.dialogues.len(), corpus.num_utterances());
    let mut out = Vec::new();
    write_corpus(&corpus, &mut out)?;
    write_to(cfg.output.as_deref(), &out)
}

fn transfer(cfg: &RunConfig) -> Outcome {
    if cfg.domains.len() < 2 {
        return Err(Failure::Usage("transfer needs at least two --domain NAME=FILE".into()));
    }
    let schema = load_schema(cfg)?;
    let domains = cfg
        .domains
        .iter()
        .map(|d| Ok((d.name.clone(), load_corpus_at(&d.corpus, &schema)?)))
        .collect::<Result<Vec<_>>>()?;
    let table = transfer_table(
        &domains,
        &load_analyzer(cfg)?,
        &cfg.hierarchy(),
        &cfg.decode(),
        Some((cfg.k, cfg.seed)),
    )?;
    report(cfg, &table, render_transfer)
}

#[derive(Serialize)]
struct StatsReport {
    #[serde(flatten)]
    stats: crate::corpus::CorpusStats,
    violations: Vec<crate::corpus::Violation>,
}

fn stats(cfg: &RunConfig) -> Outcome {
    let corpus = load_corpus(cfg, "stats")?;
    let result = StatsReport {
        stats: corpus.stats(),
        violations: validate_corpus(&corpus),
    };
    report(cfg, &result, |r| {
        let s = &r.stats;
        let mut out = format!(
            "dialogues            {}\nturns                {}\nutterances           {}\nwords                {}\nwords per turn       {}\nwords per utterance  {}\n",
            s.dialogues,
            s.turns,
            s.utterances,
            s.words,
            fmt4(s.words_per_turn),
            fmt4(s.words_per_utterance)
        );
        out.push_str(&format!("violations           {}\n", r.violations.len()));
        for v in &r.violations {
            let at = match (v.turn, v.utterance) {
                (Some(t), Some(u)) => format!(" turn {t} utterance {u}"),
                (Some(t), None) => format!(" turn {t}"),
                _ => String::new(),
            };
            out.push_str(&format!("  {}{at}: {}\n", v.dialogue, v.rule));
        }
        out
    })
}
