use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Genre;
use crate::error::{Error, Result};
use crate::hierarchy::{DecodeOptions, HierarchyConfig, Structure};
use crate::multiclass::CouplingConfig;
use crate::svm::TrainConfig;
use crate::synth::GeneratorConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

/// A named corpus for the transfer table, written `NAME=FILE` on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub name: String,
    pub corpus: PathBuf,
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.split_once('=') {
            Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok(Domain {
                name: name.to_string(),
                corpus: PathBuf::from(path),
            }),
            _ => Err(format!("expected NAME=FILE, got {s:?}")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.name, self.corpus.display())
    }
}

/// Everything a subcommand reads: paths, hyperparameters and mode flags.
/// Loaded from a JSON file when given, then overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub cues: Option<PathBuf>,
    pub verbs: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub grammar: Option<PathBuf>,
    pub domains: Vec<Domain>,

    pub structure: Structure,
    pub c: f64,
    pub tol: f64,
    pub alpha: f64,
    pub min_freq: usize,
    pub k: usize,
    /// Seeds SMO, fold assignment and corpus generation.
    pub seed: u64,

    pub strict_hierarchy: bool,
    pub uniform_transitions: bool,
    pub gold_context: bool,
    pub threads: usize,
    pub repetitions: usize,

    pub dialogues: usize,
    pub noise: f64,
    pub vocab_overlap: f64,
    pub id_prefix: String,
    pub genre: Genre,

    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let h = HierarchyConfig::default();
        let g = GeneratorConfig::default();
        Self {
            corpus: None,
            schema: None,
            cues: None,
            verbs: None,
            model: None,
            output: None,
            grammar: None,
            domains: Vec::new(),
            structure: h.structure,
            c: h.svm.c,
            tol: h.svm.tol,
            alpha: h.alpha,
            min_freq: h.min_freq,
            k: 10,
            seed: 0,
            strict_hierarchy: false,
            uniform_transitions: false,
            gold_context: false,
            threads: 1,
            repetitions: 3,
            dialogues: g.n_dialogues,
            noise: g.noise_rate,
            vocab_overlap: g.vocab_overlap,
            id_prefix: g.id_prefix,
            genre: g.genre,
            format: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn hierarchy(&self) -> HierarchyConfig {
        HierarchyConfig {
            structure: self.structure,
            svm: TrainConfig {
                c: self.c,
                tol: self.tol,
                seed: self.seed,
                ..TrainConfig::default()
            },
            coupling: CouplingConfig::default(),
            alpha: self.alpha,
            min_freq: self.min_freq,
            parallel: self.threads > 1,
        }
    }

    pub fn decode(&self) -> DecodeOptions {
        DecodeOptions {
            uniform_transitions: self.uniform_transitions,
            strict_hierarchy: self.strict_hierarchy,
            gold_context: self.gold_context,
        }
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seed,
            n_dialogues: self.dialogues,
            noise_rate: self.noise,
            vocab_overlap: self.vocab_overlap,
            id_prefix: self.id_prefix.clone(),
            genre: self.genre,
            ..GeneratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hierarchy().validate()?;
        self.generator().validate()?;
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}
