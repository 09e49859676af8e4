use dact_core::corpus::{Corpus, TagSchema};
use dact_core::error::Error;
use dact_core::eval::evaluate_model;
use dact_core::features::{Analyzer, ContextState, Layer};
use dact_core::hierarchy::{
    train_hierarchical, DecodeOptions, HierarchicalModel, HierarchyConfig, Structure, TransitionMatrix,
};
use dact_core::synth::{generate_corpus, GeneratorConfig, Grammar};

fn synthetic(n: usize, seed: u64, noise: f64, prefix: &str) -> Corpus {
    let cfg = GeneratorConfig {
        seed,
        n_dialogues: n,
        noise_rate: noise,
        id_prefix: prefix.into(),
        ..GeneratorConfig::default()
    };
    generate_corpus(&Grammar::default_grammar(), &cfg, &TagSchema::default_schema()).unwrap()
}

fn train(c: &Corpus, structure: Structure) -> HierarchicalModel {
    let cfg = HierarchyConfig {
        structure,
        ..HierarchyConfig::default()
    };
    train_hierarchical(c, &Analyzer::default_resources(), &cfg).unwrap()
}

#[test]
fn fits_the_synthetic_training_set() {
    // seed 3 is the weakest of seeds 0..6 at this size
    for seed in [0, 3] {
        let c = synthetic(200, seed, 0.05, "tr");
        let m = train(&c, Structure::Ovo);
        let e = evaluate_model(&m, &c, &DecodeOptions::default(), false).unwrap();
        assert!(e.act.accuracy >= 0.98, "seed {seed}: {}", e.act.accuracy);
    }
}

#[test]
fn retraining_is_byte_identical() {
    let c = synthetic(30, 4, 0.05, "d");
    let a = train(&c, Structure::Ovo).to_json().unwrap();
    let b = train(&c, Structure::Ovo).to_json().unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("{\"format_version\":1,"));
}

#[test]
fn uniform_prior_decodes_to_the_layer_two_argmax() {
    let c = synthetic(60, 5, 0.1, "u");
    let m = train(&c, Structure::Ovo);
    let opts = DecodeOptions {
        uniform_transitions: true,
        ..DecodeOptions::default()
    };
    for d in &c.dialogues {
        for u in m.decode_dialogue(d, &opts).unwrap() {
            assert_eq!(u.act_index, u.act_posterior.argmax());
        }
    }
}

#[test]
fn uniform_start_column_matches_the_uniform_prior() {
    let c = synthetic(30, 6, 0.05, "s");
    let mut m = train(&c, Structure::Ovo);
    let n = m.schema.num_acts();
    let start = m.transitions.columns.len() - 1;
    m.transitions.columns[start] = TransitionMatrix::uniform(n).columns[start].clone();
    for d in &c.dialogues {
        let (turn, utt) = d.utterances().next().unwrap();
        let ctx = ContextState::initial();
        let with_prior = m.classify_utterance(utt, turn, &ctx, &DecodeOptions::default()).unwrap();
        let without = m
            .classify_utterance(
                utt,
                turn,
                &ctx,
                &DecodeOptions {
                    uniform_transitions: true,
                    ..DecodeOptions::default()
                },
            )
            .unwrap();
        assert_eq!(with_prior.act_index, without.act_index);
        for (a, b) in with_prior.act_dist.probs.iter().zip(&without.act_dist.probs) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn single_utterance_dialogue_uses_the_empty_context() {
    let c = synthetic(20, 7, 0.0, "o");
    let m = train(&c, Structure::Ovo);
    let mut d = c.dialogues[0].clone();
    d.turns.truncate(1);
    d.turns[0].utterances.truncate(1);
    let decoded = m.decode_dialogue(&d, &DecodeOptions::default()).unwrap();
    let direct = m
        .classify_utterance(
            &d.turns[0].utterances[0],
            &d.turns[0],
            &ContextState::initial(),
            &DecodeOptions::default(),
        )
        .unwrap();
    assert_eq!(decoded, vec![direct]);
    assert_eq!(decoded, m.decode_dialogue(&d, &DecodeOptions::default()).unwrap());
}

#[test]
fn greedy_context_is_close_to_gold_context() {
    let train_set = synthetic(150, 8, 0.05, "tr");
    let test_set = synthetic(50, 9, 0.05, "te");
    let m = train(&train_set, Structure::Ovo);
    let greedy = evaluate_model(&m, &test_set, &DecodeOptions::default(), false).unwrap();
    let gold = evaluate_model(
        &m,
        &test_set,
        &DecodeOptions {
            gold_context: true,
            ..DecodeOptions::default()
        },
        false,
    )
    .unwrap();
    assert!(
        (gold.act.accuracy - greedy.act.accuracy).abs() <= 0.02,
        "gold {} greedy {}",
        gold.act.accuracy,
        greedy.act.accuracy
    );
}

#[test]
fn layer_two_vectors_restrict_to_layer_one() {
    let c = synthetic(10, 10, 0.1, "r");
    let m = train(&c, Structure::Ovo);
    let ex = &m.extractor;
    for d in &c.dialogues {
        let decoded = m.decode_dialogue(d, &DecodeOptions::default()).unwrap();
        let mut ctx = ContextState::initial();
        for ((turn, utt), dec) in d.utterances().zip(&decoded) {
            let l1 = ex.extract(utt, turn, &ctx, Layer::L1, None).unwrap();
            let l2 = ex.extract(utt, turn, &ctx, Layer::L2, Some(dec.category_index)).unwrap();
            assert_eq!(l2.restrict(|id| ex.layout.is_l1(id)), l1);
            ctx = ContextState::after(dec.act_index, dec.category_index, utt.speaker);
        }
    }
}

#[test]
fn binary_structure_routes_within_the_category() {
    let c = synthetic(40, 11, 0.05, "b");
    let m = train(&c, Structure::Binary);
    let e = evaluate_model(&m, &c, &DecodeOptions::default(), false).unwrap();
    assert_eq!(e.incoherence_rate, 0.0);
    assert!(e.act.accuracy > 0.9);
}

#[test]
fn schema_mismatch_is_reported_with_both_fingerprints() {
    let c = synthetic(10, 12, 0.0, "m");
    let m = train(&c, Structure::Ova);
    let other = TagSchema::new(
        vec!["A".into(), "B".into()],
        vec![("x".into(), "A".into()), ("y".into(), "B".into())],
    )
    .unwrap();
    match m.check_schema(&other) {
        Err(Error::SchemaMismatch { model, data }) => {
            assert_eq!(model, m.schema.fingerprint());
            assert_eq!(data, other.fingerprint());
        }
        other => panic!("{other:?}"),
    }
}
