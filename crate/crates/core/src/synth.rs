//! Labeled dialogues generated from an act grammar: per-act utterance
//! templates with slots, and weighted act-to-act transitions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Dialogue, Genre, SpeakerRole, TagSchema, Turn, Utterance};
use crate::error::{Error, Result};

pub const START: &str = "START";
pub const END: &str = "END";

const DEFAULT_GRAMMAR: &str = include_str!("../data/grammar.json");
const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ta", "ru", "se", "vo", "ne", "zu", "pa", "di", "fe", "go", "bi", "ha", "yu",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActSpec {
    pub role: SpeakerRole,
    pub templates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grammar {
    /// Slot name → fillers; templates reference slots as `{name}`.
    #[serde(default)]
    pub slots: BTreeMap<String, Vec<String>>,
    pub acts: BTreeMap<String, ActSpec>,
    /// `START` or act → weighted next acts (`END` stops the dialogue).
    pub transitions: BTreeMap<String, Vec<(String, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_dialogues: usize,
    /// Probability that an utterance gets one random token substitution.
    pub noise_rate: f64,
    /// Fraction of the grammar's words kept; the rest become pseudo-words.
    pub vocab_overlap: f64,
    pub id_prefix: String,
    pub genre: Genre,
    /// Dialogues are cut off after this many utterances.
    pub max_utterances: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_dialogues: 200,
            noise_rate: 0.0,
            vocab_overlap: 1.0,
            id_prefix: "syn".into(),
            genre: Genre::Synthetic,
            max_utterances: 60,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(Error::Config(format!("noise rate must be in [0, 1), got {}", self.noise_rate)));
        }
        if !(0.0..=1.0).contains(&self.vocab_overlap) {
            return Err(Error::Config(format!(
                "vocabulary overlap must be in [0, 1], got {}",
                self.vocab_overlap
            )));
        }
        if self.max_utterances == 0 {
            return Err(Error::Config("max_utterances must be positive".into()));
        }
        Ok(())
    }
}

fn slot_names(template: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    out
}

/// Splits a token into its alphanumeric core and trailing punctuation.
fn split_core(token: &str) -> (&str, &str) {
    let end = token
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .map_or(0, |(i, c)| i + c.len_utf8());
    token.split_at(end)
}

fn digest_u64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

impl Grammar {
    pub fn default_grammar() -> Self {
        Self::from_json(DEFAULT_GRAMMAR).expect("bundled grammar")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(text).map_err(|e| Error::Grammar(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.acts.is_empty() {
            return Err(Error::Grammar("grammar has no acts".into()));
        }
        for (act, spec) in &self.acts {
            if act == START || act == END {
                return Err(Error::Grammar(format!("{act} is reserved")));
            }
            if spec.templates.is_empty() {
                return Err(Error::Grammar(format!("act {act} has no templates")));
            }
            for t in &spec.templates {
                if t.trim().is_empty() {
                    return Err(Error::Grammar(format!("act {act} has an empty template")));
                }
                for slot in slot_names(t) {
                    if self.slots.get(slot).is_none_or(|v| v.is_empty()) {
                        return Err(Error::Grammar(format!("act {act}: unknown or empty slot {{{slot}}}")));
                    }
                }
            }
        }
        for (from, next) in &self.transitions {
            if from != START && !self.acts.contains_key(from) {
                return Err(Error::Grammar(format!("transition from unknown act {from}")));
            }
            if next.is_empty() {
                return Err(Error::Grammar(format!("{from} has no outgoing transitions")));
            }
            for (to, w) in next {
                if to != END && !self.acts.contains_key(to) {
                    return Err(Error::Grammar(format!("transition {from} → unknown act {to}")));
                }
                if !(*w > 0.0 && w.is_finite()) {
                    return Err(Error::Grammar(format!("transition {from} → {to} has weight {w}")));
                }
            }
        }
        if !self.transitions.contains_key(START) {
            return Err(Error::Grammar("no transitions from START".into()));
        }
        let mut reached = BTreeSet::new();
        let mut queue = VecDeque::from([START]);
        while let Some(from) = queue.pop_front() {
            for (to, _) in self.transitions.get(from).into_iter().flatten() {
                if to != END && reached.insert(to.as_str()) {
                    queue.push_back(to);
                }
            }
        }
        let unreachable: Vec<&str> = self
            .acts
            .keys()
            .map(String::as_str)
            .filter(|a| !reached.contains(a))
            .collect();
        if !unreachable.is_empty() {
            return Err(Error::Grammar(format!("unreachable acts: {}", unreachable.join(", "))));
        }
        if let Some(dead) = reached.iter().find(|a| !self.transitions.contains_key(**a)) {
            return Err(Error::Grammar(format!("act {dead} has no outgoing transitions")));
        }
        Ok(())
    }

    /// Every word of the templates and slot fillers, without placeholders or
    /// trailing punctuation, sorted.
    pub fn words(&self) -> Vec<String> {
        let templates = self.acts.values().flat_map(|a| &a.templates);
        let fillers = self.slots.values().flatten();
        let mut words: BTreeSet<String> = BTreeSet::new();
        for text in templates.chain(fillers) {
            for token in text.split_whitespace().filter(|t| !t.contains('{')) {
                let (core, _) = split_core(token);
                if !core.is_empty() {
                    words.insert(core.to_string());
                }
            }
        }
        words.into_iter().collect()
    }

    /// Copy in which a `1 − overlap` share of the words is replaced by
    /// pseudo-words; the share and the spellings are fixed by `key`.
    pub fn with_vocab_overlap(&self, overlap: f64, key: u64) -> Grammar {
        let words = self.words();
        let replace = ((1.0 - overlap) * words.len() as f64).round() as usize;
        let mut ranked: Vec<(u64, &String)> = words
            .iter()
            .map(|w| (digest_u64(&[b"rank", &key.to_le_bytes(), w.as_bytes()]), w))
            .collect();
        ranked.sort();
        let existing: BTreeSet<&str> = words.iter().map(String::as_str).collect();
        let mut used = BTreeSet::new();
        let mut mapping = BTreeMap::new();
        let mut chosen: Vec<&String> = ranked.into_iter().take(replace).map(|(_, w)| w).collect();
        chosen.sort();
        for w in chosen {
            let mut rng = ChaCha8Rng::seed_from_u64(digest_u64(&[b"spell", &key.to_le_bytes(), w.as_bytes()]));
            let mut pseudo: String = (0..3).map(|_| *SYLLABLES.choose(&mut rng).expect("syllables")).collect();
            while used.contains(&pseudo) || existing.contains(pseudo.as_str()) {
                pseudo.push_str(SYLLABLES.choose(&mut rng).expect("syllables"));
            }
            used.insert(pseudo.clone());
            mapping.insert(w.clone(), pseudo);
        }
        let rewrite = |text: &String| -> String {
            text.split_whitespace()
                .map(|token| {
                    if token.contains('{') {
                        return token.to_string();
                    }
                    let (core, tail) = split_core(token);
                    match mapping.get(core) {
                        Some(p) => format!("{p}{tail}"),
                        None => token.to_string(),
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        Grammar {
            slots: self
                .slots
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(&rewrite).collect()))
                .collect(),
            acts: self
                .acts
                .iter()
                .map(|(k, a)| {
                    (
                        k.clone(),
                        ActSpec {
                            role: a.role,
                            templates: a.templates.iter().map(&rewrite).collect(),
                        },
                    )
                })
                .collect(),
            transitions: self.transitions.clone(),
        }
    }

    /// Transition weights normalized per source act.
    pub fn transition_probabilities(&self) -> BTreeMap<String, BTreeMap<String, f64>> {
        self.transitions
            .iter()
            .map(|(from, next)| {
                let total: f64 = next.iter().map(|(_, w)| w).sum();
                let mut probs = BTreeMap::new();
                for (to, w) in next {
                    *probs.entry(to.clone()).or_insert(0.0) += w / total;
                }
                (from.clone(), probs)
            })
            .collect()
    }
}

struct Sampler<'a> {
    grammar: &'a Grammar,
    next: BTreeMap<&'a str, (Vec<&'a str>, WeightedIndex<f64>)>,
    pool: Vec<String>,
}

impl<'a> Sampler<'a> {
    fn new(grammar: &'a Grammar) -> Result<Self> {
        let mut next = BTreeMap::new();
        for (from, edges) in &grammar.transitions {
            let targets = edges.iter().map(|(t, _)| t.as_str()).collect();
            let weights = WeightedIndex::new(edges.iter().map(|(_, w)| *w))
                .map_err(|e| Error::Grammar(format!("{from}: {e}")))?;
            next.insert(from.as_str(), (targets, weights));
        }
        Ok(Self {
            grammar,
            next,
            pool: grammar.words(),
        })
    }

    fn fill(&self, template: &str, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::new();
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}') else { break };
            out.push_str(&rest[..open]);
            let slot = &rest[open + 1..open + close];
            out.push_str(self.grammar.slots[slot].choose(rng).expect("validated slot"));
            rest = &rest[open + close + 1..];
        }
        out.push_str(rest);
        out
    }

    fn add_noise(&self, text: &str, rng: &mut ChaCha8Rng) -> String {
        let mut tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() || self.pool.is_empty() {
            return text.to_string();
        }
        let at = rng.gen_range(0..tokens.len());
        tokens[at] = self.pool.choose(rng).expect("non-empty pool");
        tokens.join(" ")
    }

    fn dialogue(&self, id: String, config: &GeneratorConfig, schema: &TagSchema, rng: &mut ChaCha8Rng) -> Dialogue {
        let mut turns: Vec<Turn> = Vec::new();
        let mut pending: Vec<Utterance> = Vec::new();
        let mut speaker = None;
        let mut state = START;
        for _ in 0..config.max_utterances {
            let (targets, weights) = &self.next[state];
            let act = targets[weights.sample(rng)];
            if act == END {
                break;
            }
            let spec = &self.grammar.acts[act];
            let template = spec.templates.choose(rng).expect("validated templates");
            let mut text = self.fill(template, rng);
            if config.noise_rate > 0.0 && rng.gen_bool(config.noise_rate) {
                text = self.add_noise(&text, rng);
            }
            if speaker.is_some_and(|s| s != spec.role) {
                turns.push(Turn::new(speaker.unwrap(), std::mem::take(&mut pending)));
            }
            speaker = Some(spec.role);
            pending.push(Utterance {
                text,
                speaker: spec.role,
                category: schema.category_of_label(act).map(String::from),
                act: Some(act.to_string()),
                index_in_turn: 0,
            });
            state = act;
        }
        if let Some(s) = speaker {
            turns.push(Turn::new(s, pending));
        }
        Dialogue {
            id,
            genre: config.genre,
            turns,
        }
    }
}

/// Generates `n_dialogues` labeled dialogues. Dialogue `i` draws from its own
/// ChaCha stream, so output is a pure function of grammar, config and schema.
pub fn generate_corpus(grammar: &Grammar, config: &GeneratorConfig, schema: &TagSchema) -> Result<Corpus> {
    config.validate()?;
    grammar.validate()?;
    if let Some(act) = grammar.acts.keys().find(|a| schema.act_index(a).is_none()) {
        return Err(Error::Grammar(format!("act {act} is not in the schema")));
    }
    let transformed;
    let grammar = if config.vocab_overlap < 1.0 {
        transformed = grammar.with_vocab_overlap(config.vocab_overlap, config.seed);
        &transformed
    } else {
        grammar
    };
    let sampler = Sampler::new(grammar)?;
    let mut corpus = Corpus::new(schema.clone());
    let width = config.n_dialogues.saturating_sub(1).to_string().len().max(4);
    for i in 0..config.n_dialogues {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let id = format!("{}{:0width$}", config.id_prefix, i);
        let d = sampler.dialogue(id, config, schema, &mut rng);
        if d.num_utterances() > 0 {
            corpus.dialogues.push(d);
        }
    }
    Ok(corpus)
}
