//! Browser demo. The logic lives in plain functions that take and return JSON
//! strings so it can be tested natively; `bindings` wraps them for wasm.

use dact_core::corpus::{Corpus, Dialogue, Genre, SpeakerRole, TagSchema, Turn, Utterance};
use dact_core::features::Analyzer;
use dact_core::hierarchy::{train_hierarchical, DecodeOptions, HierarchicalModel, HierarchyConfig, Structure};
use dact_core::multiclass::{coupling_divergence, pairwise_coupling, ClassDistribution, CouplingConfig};
use dact_core::synth::{generate_corpus, GeneratorConfig, Grammar};
use serde::{Deserialize, Serialize};

#[cfg(target_arch = "wasm32")]
mod bindings;

type Result<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoupleRequest {
    /// Upper triangle is read: `r[i][j]` for `i < j`.
    r: Vec<Vec<f64>>,
    /// Pair weights; all ones when omitted.
    n: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PairFit {
    pub i: usize,
    pub j: usize,
    pub r: f64,
    /// `p_i / (p_i + p_j)` under the coupled distribution.
    pub mu: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CoupleResponse {
    pub probs: Vec<f64>,
    pub divergence: f64,
    pub pairs: Vec<PairFit>,
}

/// Couples pairwise probabilities `{"r": [[..]], "n": [[..]]?}` into one distribution.
pub fn couple(request: &str) -> Result<String> {
    let req: CoupleRequest = serde_json::from_str(request).map_err(err)?;
    let k = req.r.len();
    let n = req.n.unwrap_or_else(|| vec![vec![1.0; k]; k]);
    let cfg = CouplingConfig::default();
    let dist = pairwise_coupling(&req.r, &n, cfg.tol, cfg.max_iter).map_err(err)?;
    let p = &dist.probs;
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            pairs.push(PairFit {
                i,
                j,
                r: req.r[i][j],
                mu: p[i] / (p[i] + p[j]),
            });
        }
    }
    let resp = CoupleResponse {
        divergence: coupling_divergence(p, &req.r, &n),
        probs: dist.probs,
        pairs,
    };
    serde_json::to_string(&resp).map_err(err)
}

/// Renders one generated dialogue as a script: `speaker: text` per line.
pub fn sample_script(seed: u64) -> Result<String> {
    let corpus = synthetic(1, 0.0, seed)?;
    let mut out = String::new();
    for (_, u) in corpus.dialogues[0].utterances() {
        out.push_str(&format!("{}: {}\n", u.speaker, u.text));
    }
    Ok(out)
}

fn synthetic(dialogues: usize, noise: f64, seed: u64) -> Result<Corpus> {
    let cfg = GeneratorConfig {
        seed,
        n_dialogues: dialogues,
        noise_rate: noise,
        id_prefix: "demo".into(),
        genre: Genre::Synthetic,
        ..GeneratorConfig::default()
    };
    generate_corpus(&Grammar::default_grammar(), &cfg, &TagSchema::default_schema()).map_err(err)
}

fn parse_speaker(s: &str) -> Option<SpeakerRole> {
    match s.trim().to_ascii_lowercase().as_str() {
        "operator" | "o" | "a" => Some(SpeakerRole::Operator),
        "customer" | "c" | "b" => Some(SpeakerRole::Customer),
        _ => None,
    }
}

/// Lines of `speaker: text`; consecutive lines by one speaker form a turn.
pub fn parse_script(script: &str) -> Result<Dialogue> {
    let mut turns: Vec<Turn> = Vec::new();
    for (no, line) in script.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (who, text) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `speaker: text`", no + 1))?;
        let speaker = parse_speaker(who)
            .ok_or_else(|| format!("line {}: unknown speaker {:?} (use operator or customer)", no + 1, who.trim()))?;
        let text = text.trim();
        if text.is_empty() {
            return Err(format!("line {}: empty utterance", no + 1));
        }
        let utt = Utterance {
            text: text.to_string(),
            speaker,
            category: None,
            act: None,
            index_in_turn: 0,
        };
        match turns.last_mut() {
            Some(t) if t.speaker == speaker => {
                let mut utts = std::mem::take(&mut t.utterances);
                utts.push(utt);
                *t = Turn::new(speaker, utts);
            }
            _ => turns.push(Turn::new(speaker, vec![utt])),
        }
    }
    if turns.is_empty() {
        return Err("the script has no utterances".into());
    }
    Ok(Dialogue {
        id: "script".into(),
        genre: Genre::Synthetic,
        turns,
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Scored {
    pub label: String,
    pub prob: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Labeled {
    pub speaker: String,
    pub text: String,
    pub category: String,
    pub act: String,
    pub categories: Vec<Scored>,
    /// Layer-2 output before the transition prior.
    pub posterior: Vec<Scored>,
    /// After the prior; the decoded act is the first entry.
    pub acts: Vec<Scored>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelSummary {
    pub structure: String,
    pub dialogues: usize,
    pub utterances: usize,
    pub features: usize,
    pub layer1_svms: usize,
    pub layer2_svms: usize,
    pub acts: Vec<String>,
}

fn top(dist: &ClassDistribution, names: &[String], n: usize) -> Vec<Scored> {
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist.probs[b].total_cmp(&dist.probs[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(n)
        .filter(|&i| dist.probs[i] > 0.0)
        .map(|i| Scored {
            label: names[i].clone(),
            prob: dist.probs[i],
        })
        .collect()
}

/// A model trained on generated dialogues, ready to label scripts.
pub struct Demo {
    model: HierarchicalModel,
    summary: ModelSummary,
}

impl Demo {
    pub fn train(dialogues: usize, noise: f64, seed: u64, structure: &str) -> Result<Demo> {
        let structure: Structure = serde_json::from_value(serde_json::Value::String(structure.to_string()))
            .map_err(|_| format!("unknown structure {structure:?} (ovo, ova or binary)"))?;
        let corpus = synthetic(dialogues, noise, seed)?;
        let config = HierarchyConfig {
            structure,
            ..HierarchyConfig::default()
        };
        let model = train_hierarchical(&corpus, &Analyzer::default_resources(), &config).map_err(err)?;
        let summary = ModelSummary {
            structure: structure.report_name().into(),
            dialogues: corpus.dialogues.len(),
            utterances: corpus.num_utterances(),
            features: model.extractor.dim(),
            layer1_svms: model.layer1.model.num_binary_models(),
            layer2_svms: model.layer2.model.num_binary_models(),
            acts: model.layer2.classes.iter().map(|&a| model.schema.acts()[a].clone()).collect(),
        };
        Ok(Demo { model, summary })
    }

    pub fn summary(&self) -> Result<String> {
        serde_json::to_string(&self.summary).map_err(err)
    }

    /// Labels every line of `script`; returns a JSON array of [`Labeled`].
    pub fn classify(&self, script: &str, uniform_transitions: bool, strict_hierarchy: bool) -> Result<String> {
        let dialogue = parse_script(script)?;
        let opts = DecodeOptions {
            uniform_transitions,
            strict_hierarchy,
            gold_context: false,
        };
        let decoded = self.model.decode_dialogue(&dialogue, &opts).map_err(err)?;
        let schema = &self.model.schema;
        let out: Vec<Labeled> = dialogue
            .utterances()
            .zip(&decoded)
            .map(|((_, u), d)| Labeled {
                speaker: u.speaker.to_string(),
                text: u.text.clone(),
                category: d.category.clone(),
                act: d.act.clone(),
                categories: top(&d.category_dist, schema.categories(), 3),
                posterior: top(&d.act_posterior, schema.acts(), 3),
                acts: top(&d.act_dist, schema.acts(), 3),
            })
            .collect();
        serde_json::to_string(&out).map_err(err)
    }
}
