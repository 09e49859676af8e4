//! Checks against hand counts of the bundled three-dialogue sample.

use dact_core::corpus::{parse_corpus_str, validate_corpus, Corpus, SpeakerRole, TagSchema};
use dact_core::features::{build_vocabulary, tokenize, Analyzer, ContextState, FeatureExtractor, Layer, Namespace};
use dact_core::hierarchy::{estimate_transitions, transition_counts};

const SAMPLE: &str = include_str!("../data/sample.jsonl");

fn sample() -> Corpus {
    parse_corpus_str(SAMPLE, &TagSchema::default_schema()).unwrap()
}

#[test]
fn counts() {
    let c = sample();
    assert!(validate_corpus(&c).is_empty());
    let s = c.stats();
    assert_eq!(s.dialogues, 3);
    assert_eq!(s.turns, 5 + 6 + 3);
    assert_eq!(s.utterances, 8 + 9 + 5);
    assert_eq!(s.words, 26 + 37 + 17);
}

#[test]
fn transition_tally() {
    let c = sample();
    let schema = &c.schema;
    let a = |name: &str| schema.act_index(name).unwrap();
    let counts = transition_counts(&c, schema).unwrap();
    let start = schema.num_acts();
    assert_eq!(counts[start][a("Greeting")], 3);
    assert_eq!(counts[start].iter().sum::<usize>(), 3);
    assert_eq!(counts[a("Greeting")][a("SelfIntroduce")], 1);
    assert_eq!(counts[a("Greeting")][a("Service-Question")], 2);
    assert_eq!(counts[a("Service-Answer")][a("Confirm-Question")], 2);
    assert_eq!(counts[a("Service-Answer")][a("Thanking")], 1);
    assert_eq!(counts[a("Service-Answer")][a("Suggest")], 1);
    assert_eq!(counts[a("Service-Question")][a("Apology")], 1);
    let total: usize = counts.iter().flatten().sum();
    assert_eq!(total, 22);

    // 18 acts, add-one smoothing
    let t = estimate_transitions(&c, schema, 1.0).unwrap();
    let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
    assert!(close(t.probability(a("Service-Question"), Some(a("Greeting"))), 3.0 / 21.0));
    assert!(close(t.probability(a("Confirm-Question"), Some(a("Service-Answer"))), 3.0 / 22.0));
    assert!(close(t.probability(a("Greeting"), None), 4.0 / 21.0));
    assert!(close(t.probability(a("Closing"), Some(a("Greeting"))), 1.0 / 21.0));
    assert!(close(t.probability(a("Agree"), Some(a("Closing"))), 1.0 / 18.0));
}

#[test]
fn hand_built_feature_vector() {
    let c = sample();
    let schema = &c.schema;
    let analyzer = Analyzer::default_resources();
    let vocab = build_vocabulary(&c, &analyzer, 1).unwrap();
    let ex = FeatureExtractor::new(analyzer.clone(), vocab, schema.num_acts(), schema.num_categories()).unwrap();
    let l = ex.layout;

    // bank-001, turn 3: "aywa tamam" (Agree), after the operator's Confirm-Question
    let turn = &c.dialogues[0].turns[3];
    let utt = &turn.utterances[0];
    assert_eq!(utt.text, "aywa tamam");
    let question = schema.category_index("Question").unwrap();
    let answer = schema.category_index("Answer").unwrap();
    let ctx = ContextState::after(
        schema.act_index("Confirm-Question").unwrap(),
        question,
        SpeakerRole::Operator,
    );

    let v = |ns, key: &str| ex.vocab.get(ns, key).unwrap() as usize;
    let aywa_cue = analyzer.cues.matches(&tokenize("aywa"));
    assert_eq!(aywa_cue.len(), 1);
    let mut expected: Vec<(usize, f64)> = vec![
        (v(Namespace::Unigram, "aywa"), 1.0),
        (v(Namespace::Unigram, "tamam"), 1.0),
        (v(Namespace::Bigram, "aywa▸tamam"), 1.0),
        (v(Namespace::Pos, "PART"), 1.0),
        (v(Namespace::Pos, "ADJ"), 1.0),
        (v(Namespace::Pos, "PART▸ADJ"), 1.0),
        (l.length, 2.0),
        (l.first_verb + 2, 1.0), // no verb: not applicable
        (l.part_of_turn, 1.0),   // the turn also holds "شكراً"
        (l.speaker + SpeakerRole::Customer.index(), 1.0),
        (l.prev_speaker + SpeakerRole::Operator.index(), 1.0),
        (l.prev_act + schema.act_index("Confirm-Question").unwrap(), 1.0),
        (l.cues + aywa_cue[0], 1.0),
    ];
    expected.sort_by_key(|e| e.0);
    let l1: Vec<(usize, f64)> = ex
        .extract(utt, turn, &ctx, Layer::L1, None)
        .unwrap()
        .iter()
        .map(|(i, x)| (i, x))
        .collect();
    assert_eq!(l1, expected);

    expected.push((l.category + answer, 1.0));
    expected.push((l.prev_category + question, 1.0));
    expected.sort_by_key(|e| e.0);
    let l2: Vec<(usize, f64)> = ex
        .extract(utt, turn, &ctx, Layer::L2, Some(answer))
        .unwrap()
        .iter()
        .map(|(i, x)| (i, x))
        .collect();
    assert_eq!(l2, expected);
}
