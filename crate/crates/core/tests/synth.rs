use std::collections::{BTreeMap, BTreeSet};

use dact_core::corpus::{validate_corpus, write_corpus, Corpus, TagSchema};
use dact_core::synth::{generate_corpus, GeneratorConfig, Grammar, END, START};
use proptest::prelude::*;

fn generate(cfg: &GeneratorConfig) -> Corpus {
    generate_corpus(&Grammar::default_grammar(), cfg, &TagSchema::default_schema()).unwrap()
}

fn bytes(c: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    write_corpus(c, &mut out).unwrap();
    out
}

#[test]
fn same_seed_same_bytes() {
    let cfg = GeneratorConfig {
        n_dialogues: 50,
        noise_rate: 0.1,
        seed: 42,
        ..GeneratorConfig::default()
    };
    assert_eq!(bytes(&generate(&cfg)), bytes(&generate(&cfg)));
    let other = GeneratorConfig { seed: 43, ..cfg.clone() };
    assert_ne!(bytes(&generate(&cfg)), bytes(&generate(&other)));
}

#[test]
fn prefix_of_a_larger_run_is_identical() {
    let small = generate(&GeneratorConfig {
        n_dialogues: 20,
        ..GeneratorConfig::default()
    });
    let large = generate(&GeneratorConfig {
        n_dialogues: 40,
        ..GeneratorConfig::default()
    });
    // ids are zero-padded to the same width below 10000 dialogues
    assert_eq!(small.dialogues[..], large.dialogues[..20]);
}

/// Largest gap between observed next-act frequencies and the grammar weights.
fn worst_transition_gap(cfg: &GeneratorConfig) -> (f64, String) {
    let g = Grammar::default_grammar();
    let c = generate(cfg);
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for d in &c.dialogues {
        let acts: Vec<&str> = d.utterances().map(|(_, u)| u.act.as_deref().unwrap()).collect();
        let mut prev = START;
        for a in &acts {
            *counts.entry(prev.into()).or_default().entry(a.to_string()).or_default() += 1;
            prev = a;
        }
        if acts.len() < cfg.max_utterances {
            *counts.entry(prev.into()).or_default().entry(END.into()).or_default() += 1;
        }
    }
    let expected = g.transition_probabilities();
    let mut worst = (0.0, String::new());
    for (from, next) in &counts {
        let total: usize = next.values().sum();
        let probs = &expected[from];
        for to in next.keys() {
            assert!(probs.contains_key(to), "{from} -> {to} is not in the grammar");
        }
        for (to, p) in probs {
            let observed = next.get(to).copied().unwrap_or(0) as f64 / total as f64;
            if (observed - p).abs() > worst.0 {
                worst = ((observed - p).abs(), format!("{from} -> {to} ({total} visits)"));
            }
        }
    }
    worst
}

#[test]
#[ignore = "fails: binomial spread over ~200 visits per branching act exceeds 0.05 (0.073 at seed 0)"]
fn transition_frequencies_at_200_dialogues() {
    let (gap, edge) = worst_transition_gap(&GeneratorConfig::default());
    assert!(gap <= 0.05, "{edge}: {gap:.4}");
}

#[test]
fn transition_frequencies_converge_to_the_grammar() {
    let (gap, edge) = worst_transition_gap(&GeneratorConfig {
        n_dialogues: 20_000,
        ..GeneratorConfig::default()
    });
    assert!(gap <= 0.02, "{edge}: {gap:.4}");
}

#[test]
fn noiseless_texts_identify_their_act() {
    let c = generate(&GeneratorConfig {
        noise_rate: 0.0,
        ..GeneratorConfig::default()
    });
    let mut acts_of: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for d in &c.dialogues {
        for (_, u) in d.utterances() {
            acts_of.entry(&u.text).or_default().insert(u.act.as_deref().unwrap());
        }
    }
    for (text, acts) in &acts_of {
        assert_eq!(acts.len(), 1, "{text:?} is produced by {acts:?}");
    }
}

#[test]
fn noise_substitutes_at_most_one_token() {
    let base = GeneratorConfig {
        n_dialogues: 60,
        ..GeneratorConfig::default()
    };
    let clean = generate(&base);
    let noisy = generate(&GeneratorConfig {
        noise_rate: 0.5,
        ..base.clone()
    });
    let texts = |c: &Corpus| -> BTreeSet<String> {
        c.dialogues.iter().flat_map(|d| d.utterances().map(|(_, u)| u.text.clone())).collect()
    };
    let changed = texts(&noisy).difference(&texts(&clean)).count();
    assert!(changed > 0);
    let pool: BTreeSet<String> = Grammar::default_grammar().words().into_iter().collect();
    for d in &noisy.dialogues {
        for (_, u) in d.utterances() {
            for token in u.text.split_whitespace() {
                let known = pool.contains(token.trim_end_matches(|c: char| !c.is_alphanumeric()));
                assert!(known || token.chars().all(|c| !c.is_alphanumeric()), "{token:?}");
            }
        }
    }
}

#[test]
fn reduced_overlap_introduces_unseen_words() {
    let g = Grammar::default_grammar();
    let original: BTreeSet<String> = g.words().into_iter().collect();
    let half = g.with_vocab_overlap(0.5, 11);
    let changed: Vec<String> = half.words().into_iter().filter(|w| !original.contains(w)).collect();
    assert!(!changed.is_empty());
    assert!(half.validate().is_ok());
    assert_eq!(half.transitions, g.transitions);
    let none = g.with_vocab_overlap(0.0, 11);
    assert!(none.words().iter().all(|w| !original.contains(w)));
}

#[test]
fn config_validation() {
    let bad = [
        GeneratorConfig {
            noise_rate: 1.5,
            ..GeneratorConfig::default()
        },
        GeneratorConfig {
            vocab_overlap: -0.1,
            ..GeneratorConfig::default()
        },
        GeneratorConfig {
            max_utterances: 0,
            ..GeneratorConfig::default()
        },
    ];
    for cfg in bad {
        assert!(generate_corpus(&Grammar::default_grammar(), &cfg, &TagSchema::default_schema()).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_corpora_validate(seed in any::<u64>(), noise in 0.0f64..1.0, overlap in 0.0f64..=1.0) {
        let c = generate(&GeneratorConfig {
            seed,
            n_dialogues: 12,
            noise_rate: noise,
            vocab_overlap: overlap,
            ..GeneratorConfig::default()
        });
        prop_assert!(validate_corpus(&c).is_empty());
        prop_assert_eq!(c.dialogues.len(), 12);
    }
}
