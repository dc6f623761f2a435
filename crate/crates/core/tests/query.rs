use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sense2vec::query::{cosine, QueryError};
use sense2vec::trainer::Matrix;
use sense2vec::{EmbeddingModel, Lookup, Query, QueryEngine, TrainConfig, Vocabulary};

fn model_from(keys: &[String], dim: usize, data: Vec<f32>) -> EmbeddingModel {
    let vocab = Vocabulary::from_counts(keys.iter().map(|k| (k.clone(), 1))).unwrap();
    let config = TrainConfig {
        dim,
        ..TrainConfig::default()
    };
    EmbeddingModel::from_parts(vocab, config, Matrix::from_vec(keys.len(), dim, data), Vec::new())
}

fn random_model(n: usize, dim: usize, seed: u64) -> EmbeddingModel {
    let keys: Vec<String> = (0..n)
        .map(|i| format!("w{}|{}", i / 3, ["NOUN", "VERB", "ADJ"][i % 3]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    model_from(&keys, dim, data)
}

/// Exhaustive f64 scan: cosine to every other entry, best first, ties by index.
fn brute_force(model: &EmbeddingModel, query: usize, k: usize, label: Option<&str>) -> Vec<(String, f64)> {
    let norm = |v: &[f32]| v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    let q = model.embedding(query);
    let mut all: Vec<(usize, f64)> = (0..model.len())
        .filter(|&i| i != query)
        .filter(|&i| label.map_or(true, |l| model.vocab().entry(i).label == l))
        .map(|i| {
            let v = model.embedding(i);
            let dot: f64 = q.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
            (i, dot / (norm(q) * norm(v)))
        })
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all.into_iter()
        .map(|(i, s)| (model.vocab().entry(i).key.clone(), s))
        .collect()
}

#[test]
fn cosine_examples() {
    assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - 0.707_106_78).abs() < 1e-6);
    assert!((cosine(&[0.3, -2.0, 5.0], &[0.3, -2.0, 5.0]).unwrap() - 1.0).abs() < 1e-6);
    assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 1.0]), Err(QueryError::ZeroNorm(_))));
}

#[test]
fn heap_search_matches_brute_force_on_100_entries() {
    for seed in 1..=3 {
        let model = random_model(100, 16, seed);
        let engine = QueryEngine::new(&model);
        for q in 0..model.len() {
            let key = &model.vocab().entry(q).key;
            for (k, label) in [(10, None), (99, None), (7, Some("VERB"))] {
                let got = engine.nearest(Query::Key(key), k, label).unwrap();
                let want = brute_force(&model, q, k, label);
                let got_keys: Vec<&str> = got.keys().collect();
                let want_keys: Vec<&str> = want.iter().map(|(k, _)| k.as_str()).collect();
                assert_eq!(got_keys, want_keys, "seed {seed} query {key} k {k}");
                for ((_, a), (_, b)) in got.entries.iter().zip(&want) {
                    assert!((f64::from(*a) - b).abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn ties_break_by_vocabulary_order() {
    let keys: Vec<String> = ["q|X", "b|X", "a|X", "c|X"].iter().map(|s| s.to_string()).collect();
    let model = model_from(&keys, 2, vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 0.0, 1.0]);
    let engine = QueryEngine::new(&model);
    let got = engine.nearest(Query::Key("q|X"), 3, None).unwrap();
    assert_eq!(got.keys().collect::<Vec<_>>(), vec!["b|X", "a|X", "c|X"]);
}

#[test]
fn sense_lookup_and_fallback_information() {
    let keys: Vec<String> = ["bank|NOUN", "bank|PROPN", "bank|VERB", "river|NOUN"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let model = model_from(&keys, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, 0.5]);
    let engine = QueryEngine::new(&model);
    assert_eq!(engine.embedding_for("bank", "NOUN"), Lookup::Found(&[1.0, 0.0][..]));
    match engine.embedding_for("bank", "ADJ") {
        Lookup::NotFound { available } => {
            assert_eq!(available, vec!["bank|NOUN", "bank|PROPN", "bank|VERB"])
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(
        engine.embedding_for("zebra", "NOUN"),
        Lookup::NotFound { available: vec![] }
    );
    let err = engine.nearest(Query::Key("bank|ADJ"), 3, None).unwrap_err();
    assert!(err.to_string().contains("bank|PROPN"));
    assert_eq!(engine.sense_table("bank", 2).unwrap().columns.len(), 3);
    assert_eq!(engine.sense_table("river", 2).unwrap().columns.len(), 1);
    assert!(matches!(engine.sense_table("zebra", 2), Err(QueryError::UnknownSurface(_))));
    assert!(matches!(engine.nearest(Query::Key("river|NOUN"), 0, None), Err(QueryError::InvalidK)));
}

#[test]
fn k_beyond_vocabulary_returns_everything_else() {
    let model = random_model(12, 4, 5);
    let engine = QueryEngine::new(&model);
    let got = engine.nearest(Query::Key("w0|NOUN"), 1000, None).unwrap();
    assert_eq!(got.len(), 11);
}

#[test]
fn analogy_parallelogram_ranks_fourth_corner_first() {
    let keys: Vec<String> = ["man|NOUN", "king|NOUN", "woman|NOUN", "queen|NOUN", "other|NOUN"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let h = std::f32::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let data = vec![
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.5, -0.5, h, 0.0,
        -0.5, 0.5, h, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ];
    let model = model_from(&keys, 4, data);
    let engine = QueryEngine::new(&model);
    let got = engine.analogy("man|NOUN", "king|NOUN", "woman|NOUN", 2).unwrap();
    assert_eq!(got.entries[0].0, "queen|NOUN");
    assert!((got.entries[0].1 - 1.0).abs() < 1e-6);
    assert!(engine.analogy("man|NOUN", "king|NOUN", "nobody|NOUN", 2).is_err());
}

#[test]
fn degenerate_analogy_is_nearest_of_c() {
    for seed in 1..=5 {
        let model = random_model(40, 8, seed);
        let engine = QueryEngine::new(&model);
        for c in 0..model.len() {
            let ck = &model.vocab().entry(c).key;
            let near = engine.nearest(Query::Key(ck), 2, None).unwrap();
            // a is excluded from analogy candidates, so pick one that is not
            // c's nearest neighbor.
            let a = (0..model.len())
                .map(|i| &model.vocab().entry(i).key)
                .find(|k| *k != ck && *k != &near.entries[0].0)
                .unwrap();
            let got = engine.analogy(a, a, ck, 1).unwrap();
            assert_eq!(got.entries[0].0, near.entries[0].0, "seed {seed} c {ck}");
        }
    }
}

#[test]
fn queries_leave_model_unchanged() {
    let model = random_model(30, 6, 9);
    let before = model.clone();
    let engine = QueryEngine::new(&model);
    engine.nearest(Query::Key("w1|VERB"), 5, None).unwrap();
    engine.nearest(Query::Vector(&[1.0; 6]), 5, Some("ADJ")).unwrap();
    engine.analogy("w1|VERB", "w2|NOUN", "w3|ADJ", 5).unwrap();
    engine.sense_table("w4", 3).unwrap();
    engine.similarity("w1|VERB", "w2|NOUN").unwrap();
    assert_eq!(model, before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nearest_is_scale_invariant(seed in 0u64..1000, q in 0usize..30) {
        let model = random_model(30, 8, seed);
        let mut scaled = model.clone();
        scaled.input_mut().as_mut_slice().iter_mut().for_each(|x| *x *= 3.7);
        let key = model.vocab().entry(q).key.clone();
        let a = QueryEngine::new(&model).nearest(Query::Key(&key), 29, None).unwrap();
        let b = QueryEngine::new(&scaled).nearest(Query::Key(&key), 29, None).unwrap();
        prop_assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
        for ((_, x), (_, y)) in a.entries.iter().zip(&b.entries) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn full_k_is_a_permutation_of_other_entries(seed in 0u64..1000, n in 2usize..40, q in 0usize..40) {
        let q = q % n;
        let model = random_model(n, 5, seed);
        let key = model.vocab().entry(q).key.clone();
        let got = QueryEngine::new(&model).nearest(Query::Key(&key), n - 1, None).unwrap();
        let mut keys: Vec<String> = got.keys().map(String::from).collect();
        keys.sort();
        let mut expected: Vec<String> = model.vocab().entries().iter()
            .filter(|e| e.key != key).map(|e| e.key.clone()).collect();
        expected.sort();
        prop_assert_eq!(keys, expected);
        let sims: Vec<f32> = got.entries.iter().map(|e| e.1).collect();
        prop_assert!(sims.windows(2).all(|w| w[0] >= w[1]));
    }
}
