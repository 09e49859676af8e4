use std::collections::BTreeSet;

use dact_core::corpus::{Corpus, TagSchema};
use dact_core::error::Error;
use dact_core::eval::{
    benchmark_structures, confusion, cross_domain, cross_validate, dataset_fingerprint, evaluate_model, render_timings,
    render_transfer, scores, ConfusionMatrix, TransferTable,
};
use dact_core::features::Analyzer;
use dact_core::hierarchy::{train_hierarchical, DecodeOptions, HierarchyConfig, Structure};
use dact_core::synth::{generate_corpus, GeneratorConfig, Grammar};
use proptest::prelude::*;

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

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Macro-F over gold-present classes, counted straight from the label lists.
fn macro_f_oracle(gold: &[usize], pred: &[usize], k: usize) -> f64 {
    let mut sum = 0.0;
    let mut present = 0;
    for c in 0..k {
        let tp = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p == c).count() as f64;
        let support = gold.iter().filter(|g| **g == c).count() as f64;
        let predicted = pred.iter().filter(|p| **p == c).count() as f64;
        if support == 0.0 {
            continue;
        }
        present += 1;
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = tp / support;
        if precision + recall > 0.0 {
            sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    sum / present as f64
}

#[test]
fn two_class_worked_example() {
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (g, p, n) in [("A", "A", 8), ("A", "B", 2), ("B", "B", 6), ("B", "A", 4)] {
        for _ in 0..n {
            gold.push(g);
            pred.push(p);
        }
    }
    let r = scores(&confusion(&gold, &pred, &labels(&["A", "B"])).unwrap());
    assert!((r.per_class[0].f1 - 0.7273).abs() < 1e-4);
    assert!((r.per_class[1].f1 - 0.6667).abs() < 1e-4);
    assert!((r.macro_f - 0.6970).abs() < 1e-4);

    let perfect = scores(&confusion(&gold, &gold, &labels(&["A", "B"])).unwrap());
    assert_eq!(perfect.macro_f, 1.0);
    assert_eq!(perfect.weighted_f, 1.0);
}

#[test]
fn class_never_predicted_counts_as_zero() {
    let r = scores(&confusion(&["A", "B", "B"], &["A", "A", "A"], &labels(&["A", "B", "C"])).unwrap());
    assert_eq!(r.per_class[1].f1, 0.0);
    // A: P = 1/3, R = 1 → F = 1/2; B: 0; C has no support and is left out
    assert!((r.macro_f - 0.25).abs() < 1e-12);
}

#[test]
fn diagonal_matrix_weighted_f_is_accuracy() {
    let cm = ConfusionMatrix {
        labels: labels(&["a", "b", "c"]),
        counts: vec![vec![5, 0, 0], vec![0, 0, 0], vec![0, 0, 9]],
    };
    let r = scores(&cm);
    assert_eq!(r.weighted_f, r.accuracy);
    assert_eq!(r.accuracy, 1.0);
}

proptest! {
    #[test]
    fn macro_f_matches_the_oracle(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..80)) {
        let (gold, pred): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let cm = ConfusionMatrix::from_indices(labels(&["a", "b", "c", "d"]), &gold, &pred).unwrap();
        let r = scores(&cm);
        prop_assert!((r.macro_f - macro_f_oracle(&gold, &pred, 4)).abs() < 1e-12);
        let correct = gold.iter().zip(&pred).filter(|(g, p)| g == p).count();
        prop_assert!((r.accuracy - correct as f64 / gold.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn macro_f_ignores_label_order(
        pairs in prop::collection::vec((0usize..5, 0usize..5), 1..80),
        perm in Just((0usize..5).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let names = labels(&["a", "b", "c", "d", "e"]);
        let (gold, pred): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let base = scores(&ConfusionMatrix::from_indices(names.clone(), &gold, &pred).unwrap());
        let permuted_names: Vec<String> = (0..5).map(|i| names[perm.iter().position(|&p| p == i).unwrap()].clone()).collect();
        let g2: Vec<usize> = gold.iter().map(|&g| perm[g]).collect();
        let p2: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
        let moved = scores(&ConfusionMatrix::from_indices(permuted_names, &g2, &p2).unwrap());
        prop_assert!((base.macro_f - moved.macro_f).abs() < 1e-12);
        prop_assert!((base.weighted_f - moved.weighted_f).abs() < 1e-12);
    }
}

#[test]
fn leave_one_out_covers_every_utterance_once() {
    let c = synthetic(10, 1, 0.05, "loo");
    let cfg = HierarchyConfig::default();
    let r = cross_validate(&c, &Analyzer::default_resources(), &cfg, &DecodeOptions::default(), 10, 3).unwrap();
    assert_eq!(r.folds.len(), 10);
    assert!(r.folds.iter().all(|f| f.held_out.len() == 1 && f.train_dialogues == 9));
    assert_eq!(r.pooled.count as usize, c.num_utterances());

    let mut sum = vec![vec![0u64; c.schema.num_acts()]; c.schema.num_acts()];
    for f in &r.folds {
        for (i, row) in f.evaluation.act.confusion.counts.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                sum[i][j] += v;
            }
        }
    }
    assert_eq!(r.pooled.act.confusion.counts, sum);
}

#[test]
fn folds_never_train_on_held_out_dialogues() {
    let c = synthetic(30, 2, 0.05, "leak");
    let r = cross_validate(
        &c,
        &Analyzer::default_resources(),
        &HierarchyConfig::default(),
        &DecodeOptions::default(),
        5,
        9,
    )
    .unwrap();
    let mut seen = BTreeSet::new();
    for f in &r.folds {
        let held: BTreeSet<&str> = f.held_out.iter().map(String::as_str).collect();
        let train = c.subset(|d| !held.contains(d.id.as_str()));
        assert_eq!(dataset_fingerprint(&train), f.train_fingerprint, "fold {}", f.fold);
        assert_eq!(train.dialogues.len(), f.train_dialogues);
        for id in held {
            assert!(seen.insert(id.to_string()), "{id} held out twice");
        }
    }
    let all: BTreeSet<String> = c.dialogues.iter().map(|d| d.id.clone()).collect();
    assert_eq!(seen, all);
}

#[test]
fn cross_validation_is_reproducible_and_thread_independent() {
    let c = synthetic(20, 4, 0.05, "det");
    let a = Analyzer::default_resources();
    let opts = DecodeOptions::default();
    let serial = HierarchyConfig::default();
    let parallel = HierarchyConfig {
        parallel: true,
        ..HierarchyConfig::default()
    };
    let run = |cfg: &HierarchyConfig| serde_json::to_string(&cross_validate(&c, &a, cfg, &opts, 4, 1).unwrap()).unwrap();
    let first = run(&serial);
    assert_eq!(first, run(&serial));
    assert_eq!(first, run(&parallel));
}

#[test]
fn training_set_scores_at_least_match_cross_validation() {
    let c = synthetic(40, 5, 0.1, "fit");
    let a = Analyzer::default_resources();
    let cfg = HierarchyConfig::default();
    let opts = DecodeOptions::default();
    let model = train_hierarchical(&c, &a, &cfg).unwrap();
    let fit = evaluate_model(&model, &c, &opts, false).unwrap();
    let cv = cross_validate(&c, &a, &cfg, &opts, 5, 0).unwrap();
    assert!(fit.act.macro_f >= cv.pooled.act.macro_f);
    assert!(fit.category.macro_f >= cv.pooled.category.macro_f);
}

#[test]
fn too_few_dialogues_for_k_folds() {
    let c = synthetic(3, 0, 0.0, "few");
    let r = cross_validate(
        &c,
        &Analyzer::default_resources(),
        &HierarchyConfig::default(),
        &DecodeOptions::default(),
        5,
        0,
    );
    assert!(r.is_err());
}

#[test]
fn cross_domain_rejects_mismatches() {
    let a = Analyzer::default_resources();
    let cfg = HierarchyConfig::default();
    let opts = DecodeOptions::default();
    let train = synthetic(10, 6, 0.0, "x");
    let same_ids = synthetic(10, 7, 0.0, "x");
    assert!(matches!(
        cross_domain(&train, &same_ids, &a, &cfg, &opts),
        Err(Error::InvalidInput(_))
    ));

    let other_schema = TagSchema::new(
        vec!["P".into(), "Q".into()],
        vec![("p".into(), "P".into()), ("q".into(), "Q".into())],
    )
    .unwrap();
    let mut foreign = synthetic(5, 8, 0.0, "y");
    foreign.schema = other_schema;
    assert!(matches!(
        cross_domain(&train, &foreign, &a, &cfg, &opts),
        Err(Error::SchemaMismatch { .. })
    ));

    let test = synthetic(10, 9, 0.0, "z");
    let e = cross_domain(&train, &test, &a, &cfg, &opts).unwrap();
    assert_eq!(e.count as usize, test.num_utterances());
}

#[test]
fn transfer_table_layout() {
    let t = TransferTable {
        domains: vec!["bank".into(), "flight".into()],
        macro_f: vec![vec![Some(0.9), Some(0.41234)], vec![Some(0.5), None]],
    };
    let text = render_transfer(&t);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Macro F (dialogue acts)");
    assert_eq!(lines[1], "train \\ test    bank  flight");
    assert!(lines[2].chars().all(|c| c == '-'));
    assert_eq!(lines[3], "bank          0.9000  0.4123");
    assert_eq!(lines[4], "flight        0.5000      --");
}

#[test]
fn benchmark_reports_every_structure() {
    let c = synthetic(8, 10, 0.0, "bench");
    let reports = benchmark_structures(&c, &Analyzer::default_resources(), &HierarchyConfig::default(), 1).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["HierBinary", "HierOvO", "HierOvA"]);

    let cats: BTreeSet<&str> = c.dialogues.iter().flat_map(|d| d.utterances().map(|(_, u)| u.category.as_deref().unwrap())).collect();
    let acts: BTreeSet<&str> = c.dialogues.iter().flat_map(|d| d.utterances().map(|(_, u)| u.act.as_deref().unwrap())).collect();
    let (nc, na) = (cats.len(), acts.len());
    assert_eq!(reports[0].binary_models, nc + na);
    assert_eq!(reports[1].binary_models, nc * (nc - 1) / 2 + na * (na - 1) / 2);
    assert_eq!(reports[2].binary_models, nc + na);
    assert!(reports.iter().all(|r| r.runs.len() == 1 && r.dataset_fingerprint == dataset_fingerprint(&c)));
    assert!(render_timings(&reports).contains("HierOvO / HierBinary"));

    assert!(benchmark_structures(&c, &Analyzer::default_resources(), &HierarchyConfig::default(), 0).is_err());
}

#[test]
fn evaluation_requires_the_model_schema() {
    let c = synthetic(6, 11, 0.0, "s");
    let m = train_hierarchical(&c, &Analyzer::default_resources(), &HierarchyConfig::default()).unwrap();
    let mut other = c.clone();
    other.schema = TagSchema::new(
        vec!["P".into(), "Q".into()],
        vec![("p".into(), "P".into()), ("q".into(), "Q".into())],
    )
    .unwrap();
    assert!(matches!(
        evaluate_model(&m, &other, &DecodeOptions::default(), false),
        Err(Error::SchemaMismatch { .. })
    ));
    let structures = Structure::ALL.map(|s| s.report_name());
    assert_eq!(structures, ["HierBinary", "HierOvO", "HierOvA"]);
}
