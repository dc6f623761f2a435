//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sense2vec::trainer::Matrix;
use sense2vec::{Document, EmbeddingModel, ModelKind, NegativeTable, SenseToken, TrainConfig, Vocabulary};

pub const DIM: usize = 5;
pub const WINDOW: usize = 2;
pub const NEGATIVES: usize = 4;

pub fn small_vocab() -> Vocabulary {
    Vocabulary::from_counts(
        ["a|NOUN", "b|VERB", "c|WORD", "d|ADJ", "e|NOUN", "f|WORD", "g|X", "h|VERB"]
            .iter()
            .zip([40u64, 30, 20, 15, 10, 8, 5, 2])
            .map(|(k, c)| (k.to_string(), c)),
    )
    .unwrap()
}

/// A model whose input and output rows are all non-zero, so every gradient
/// term is exercised.
pub fn random_model(kind: ModelKind, seed: u64) -> EmbeddingModel {
    let config = TrainConfig {
        dim: DIM,
        window: WINDOW,
        negatives: NEGATIVES,
        seed,
        ..TrainConfig::for_kind(kind)
    };
    let mut model = EmbeddingModel::init(small_vocab(), config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    for m in model.outputs_mut() {
        m.as_mut_slice().iter_mut().for_each(|x| *x = rng.gen_range(-0.6..0.6));
    }
    model.input_mut().as_mut_slice().iter_mut().for_each(|x| *x = rng.gen_range(-0.6..0.6));
    model
}

/// Target draw as documented: the positive first, then `negatives` draws, a
/// draw equal to the positive is redrawn once and skipped if it repeats.
pub fn expected_targets(table: &NegativeTable, positive: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, bool)> {
    let mut targets = vec![(positive, true)];
    for _ in 0..NEGATIVES {
        let mut d = table.sample(rng);
        if d == positive {
            d = table.sample(rng);
            if d == positive {
                continue;
            }
        }
        targets.push((d, false));
    }
    targets
}

fn ln_sigmoid(x: f64) -> f64 {
    -(1.0 + (-x).exp()).ln()
}

/// Negative-sampling loss in f64 for hidden vector `h` and output matrix `out`.
pub fn ns_loss(h: &[f64], out: &[Vec<f64>], targets: &[(usize, bool)]) -> f64 {
    targets
        .iter()
        .map(|&(t, positive)| {
            let s: f64 = h.iter().zip(&out[t]).map(|(a, b)| a * b).sum();
            if positive {
                -ln_sigmoid(s)
            } else {
                -ln_sigmoid(-s)
            }
        })
        .sum()
}

pub fn to_f64(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(|r| r.iter().map(|&x| f64::from(x)).collect()).collect()
}

const H: f64 = 1e-5;

fn central<F: Fn(f64) -> f64>(f: F) -> f64 {
    (f(H) - f(-H)) / (2.0 * H)
}

/// Relative error; components below 1e-2 in magnitude are measured against
/// 1e-2 so that near-zero gradients do not blow up the ratio.
pub fn rel_error(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1e-2)
}

/// Output matrix used for `offset`: offsets -w..-1 map to 0..w-1 and 1..w to
/// w..2w-1 for structured skip-gram; the others have a single matrix.
pub fn expected_output(kind: ModelKind, offset: isize) -> usize {
    match kind {
        ModelKind::StructuredSkipGram if offset < 0 => (offset + WINDOW as isize) as usize,
        ModelKind::StructuredSkipGram => (offset + WINDOW as isize - 1) as usize,
        _ => 0,
    }
}

/// One alpha=1 skip-gram step compared with central finite differences.
/// Returns the largest relative error between each parameter's update and
/// its negative gradient, or a description of any parameter that moved
/// without having a gradient.
pub fn pair_gradient_error(
    kind: ModelKind,
    seed: u64,
    center: usize,
    context: usize,
    offset: isize,
) -> Result<f64, String> {
    let mut model = random_model(kind, seed);
    let table = NegativeTable::new(model.vocab(), 0.75).unwrap();
    let rng = ChaCha8Rng::seed_from_u64(seed * 31 + 7);
    let targets = expected_targets(&table, context, &mut rng.clone());
    let o = expected_output(kind, offset);

    let v = to_f64(model.input())[center].clone();
    let out = to_f64(&model.outputs()[o]);
    let loss0 = ns_loss(&v, &out, &targets);

    let before_in = model.input().clone();
    let before_out: Vec<Matrix> = model.outputs().to_vec();
    let loss = model
        .train_pair_sg(&table, center, context, offset, 1.0, &mut rng.clone())
        .map_err(|e| e.to_string())?;
    if (loss - loss0).abs() > 1e-5 {
        return Err(format!("{kind}: reported loss {loss} vs {loss0}"));
    }

    let mut worst: f64 = 0.0;
    for d in 0..DIM {
        let g = central(|h| {
            let mut w = v.clone();
            w[d] += h;
            ns_loss(&w, &out, &targets)
        });
        let delta = f64::from(model.input().row(center)[d]) - f64::from(before_in.row(center)[d]);
        worst = worst.max(rel_error(delta, -g));
    }
    for r in 0..model.len() {
        if r != center && model.input().row(r) != before_in.row(r) {
            return Err(format!("{kind}: input row {r} changed"));
        }
    }
    for (m, before) in before_out.iter().enumerate() {
        for r in 0..model.len() {
            let after = model.outputs()[m].row(r);
            if m != o || !targets.iter().any(|&(t, _)| t == r) {
                if after != before.row(r) {
                    return Err(format!("{kind}: output matrix {m} row {r} changed at offset {offset}"));
                }
                continue;
            }
            for d in 0..DIM {
                let g = central(|h| {
                    let mut u = out.clone();
                    u[r][d] += h;
                    ns_loss(&v, &u, &targets)
                });
                let delta = f64::from(after[d]) - f64::from(before.row(r)[d]);
                worst = worst.max(rel_error(delta, -g));
            }
        }
    }
    Ok(worst)
}

/// As [`pair_gradient_error`] for one CBOW step. The hidden-layer gradient
/// is added unscaled to every context vector (as in word2vec), so each
/// context update is compared with n_ctx times the true gradient of the
/// averaged-context loss.
pub fn cbow_gradient_error(seed: u64) -> Result<f64, String> {
    let mut model = random_model(ModelKind::Cbow, seed);
    let table = NegativeTable::new(model.vocab(), 0.75).unwrap();
    let sentence = [6, 1, 3, 0, 4];
    let center_pos = 2;
    let context: Vec<usize> = vec![6, 1, 0, 4];
    let n = context.len() as f64;
    let rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = expected_targets(&table, sentence[center_pos], &mut rng.clone());

    let input = to_f64(model.input());
    let out = to_f64(&model.outputs()[0]);
    let hidden = |inp: &[Vec<f64>]| -> Vec<f64> {
        (0..DIM).map(|d| context.iter().map(|&c| inp[c][d]).sum::<f64>() / n).collect()
    };
    let loss0 = ns_loss(&hidden(&input), &out, &targets);
    let before_in = model.input().clone();
    let before_out = model.outputs()[0].clone();
    let loss = model
        .train_window_cbow(&table, &sentence, center_pos, WINDOW, 1.0, &mut rng.clone())
        .map_err(|e| e.to_string())?;
    if (loss - loss0).abs() > 1e-5 {
        return Err(format!("cbow: reported loss {loss} vs {loss0}"));
    }

    let mut worst: f64 = 0.0;
    for &c in &context {
        for d in 0..DIM {
            let g = central(|h| {
                let mut inp = input.clone();
                inp[c][d] += h;
                ns_loss(&hidden(&inp), &out, &targets)
            });
            let delta = f64::from(model.input().row(c)[d]) - f64::from(before_in.row(c)[d]);
            worst = worst.max(rel_error(delta, -n * g));
        }
    }
    for r in [2, 3, 5, 7] {
        if model.input().row(r) != before_in.row(r) {
            return Err(format!("cbow: input row {r} outside the context changed"));
        }
    }
    let h0 = hidden(&input);
    for r in 0..model.len() {
        for d in 0..DIM {
            let g = central(|h| {
                let mut u = out.clone();
                u[r][d] += h;
                ns_loss(&h0, &u, &targets)
            });
            let delta = f64::from(model.outputs()[0].row(r)[d]) - f64::from(before_out.row(r)[d]);
            worst = worst.max(rel_error(delta, -g));
        }
    }
    Ok(worst)
}

/// Largest gradient error over all three model kinds and every structured
/// skip-gram offset.
pub fn gradient_suite() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 1..=4 {
        worst = worst.max(pair_gradient_error(ModelKind::SkipGram, seed, 0, 3, 1)?);
        worst = worst.max(pair_gradient_error(ModelKind::SkipGram, seed, 5, 1, -2)?);
        worst = worst.max(pair_gradient_error(ModelKind::SkipGram, seed, 7, 7, 1)?);
        for offset in [-2, -1, 1, 2] {
            worst = worst.max(pair_gradient_error(ModelKind::StructuredSkipGram, seed, 2, 4, offset)?);
        }
        worst = worst.max(cbow_gradient_error(seed)?);
    }
    Ok(worst)
}

pub fn sentence(text: &str) -> Vec<SenseToken> {
    text.split_whitespace().map(|t| SenseToken::parse(t).unwrap()).collect()
}

/// Two long sentences, each cycling through its own eight senses, so every
/// epoch revisits the same windows many times.
pub fn two_sentence_corpus() -> Vec<Document> {
    let cycle = |words: &str, repeats: usize| -> Vec<SenseToken> {
        let one = sentence(words);
        one.iter().cycle().take(one.len() * repeats).cloned().collect()
    };
    let mut doc = Document::new(0);
    doc.push_sentence(cycle(
        "the|X bank|NOUN approved|VERB a|X loan|NOUN for|X new|ADJ house|NOUN",
        25,
    ));
    doc.push_sentence(cycle(
        "they|X bank|VERB on|X river|NOUN to|X fish|VERB at|X dawn|NOUN",
        25,
    ));
    vec![doc]
}

pub fn tiny_config(kind: ModelKind, seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 10,
        window: 2,
        negatives: 5,
        sample: 0.0,
        epochs: 5,
        min_count: 1,
        alpha0: 0.025,
        seed,
        ..TrainConfig::for_kind(kind)
    }
}
