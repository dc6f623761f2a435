//! Sense-embedding training with negative sampling.
//!
//! Three objectives share the same machinery: CBOW, skip-gram and structured
//! skip-gram (one output matrix per signed context offset). The model
//! predicts a sense from its surrounding senses; contexts never cross
//! sentence boundaries.

mod config;
mod model;
pub(crate) mod sgd;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use self::config::{ModelKind, TrainConfig};
pub use self::model::{EmbeddingModel, Matrix};
pub use self::sgd::{neg_log_sigmoid, sigmoid};

use self::sgd::{Params, Rows, Scratch};
use crate::corpus::{subsample_keep_prob, Document};
use crate::vocab::{NegativeTable, VocabError, Vocabulary};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error(
        "model needs {needed} bytes ({vocab_size} senses x {dim} dims x {matrices} matrices x 4 bytes), \
         over the memory budget of {budget} bytes"
    )]
    MemoryBudget {
        needed: u64,
        budget: u64,
        vocab_size: usize,
        dim: usize,
        matrices: usize,
    },

    #[error("corpus has no tokens in the vocabulary ({skipped} unknown tokens skipped)")]
    NoTrainableTokens { skipped: u64 },

    #[error("model has no output parameters; training a loaded model is not supported")]
    NoOutputs,

    #[error("training diverged to non-finite parameters with alpha {alpha0}; lower -alpha")]
    Diverged { alpha0: f32 },

    #[error(transparent)]
    Vocab(#[from] VocabError),
}

/// Progress snapshot emitted during training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainProgress {
    pub tokens_processed: u64,
    pub current_alpha: f32,
    /// Mean loss per update since the previous report.
    pub running_loss: f64,
}

impl TrainProgress {
    /// Tab-separated `tokens_processed alpha running_loss`.
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{:.6}",
            self.tokens_processed, self.current_alpha, self.running_loss
        )
    }
}

/// Linearly decayed learning rate with a floor of `alpha0 * 1e-4`.
pub fn learning_rate(alpha0: f32, tokens_processed: u64, total_tokens: u64) -> f32 {
    let progress = if total_tokens == 0 {
        1.0
    } else {
        tokens_processed as f64 / total_tokens as f64
    };
    let alpha = alpha0 as f64 * (1.0 - progress);
    alpha.max(alpha0 as f64 * 1e-4) as f32
}

/// Summary of a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean loss per update for each epoch.
    pub epoch_losses: Vec<f64>,
    pub tokens_processed: u64,
    /// Tokens that survived subsampling.
    pub tokens_trained: u64,
    /// Corpus tokens whose key is not in the vocabulary (per epoch).
    pub unknown_tokens: u64,
}

impl EmbeddingModel {
    fn params<'a>(&'a mut self, outputs: &'a mut Vec<Rows<'a>>) -> Result<Params<'a, 'a>, TrainError> {
        if self.outputs.is_empty() {
            return Err(TrainError::NoOutputs);
        }
        let (kind, window, negatives) = (self.config.model, self.config.window, self.config.negatives);
        outputs.extend(self.outputs.iter_mut().map(Rows::new));
        Ok(Params {
            kind,
            window,
            negatives,
            input: Rows::new(&mut self.input),
            outputs,
        })
    }

    /// One skip-gram update of `center` predicting `context` at `offset`,
    /// with `config.negatives` negatives drawn from `table`.
    ///
    /// The offset selects the output matrix for structured skip-gram and is
    /// ignored otherwise. Returns the loss before the update.
    pub fn train_pair_sg<R: Rng + ?Sized>(
        &mut self,
        table: &NegativeTable,
        center: usize,
        context: usize,
        offset: isize,
        alpha: f32,
        rng: &mut R,
    ) -> Result<f64, TrainError> {
        assert!(center < self.len() && context < self.len(), "index out of range");
        assert!(
            offset != 0 && offset.unsigned_abs() <= self.config.window,
            "offset {offset} outside window"
        );
        let mut scratch = Scratch::new(self.dim());
        let mut outputs = Vec::new();
        let params = self.params(&mut outputs)?;
        // SAFETY: single-threaded; kernels never hold two rows of one matrix.
        Ok(unsafe { params.train_pair(table, center, context, offset, alpha, rng, &mut scratch) })
    }

    /// One CBOW update predicting `sentence[center_pos]` from its neighbors
    /// within `effective_window`. A center without neighbors is a no-op with
    /// zero loss.
    pub fn train_window_cbow<R: Rng + ?Sized>(
        &mut self,
        table: &NegativeTable,
        sentence: &[usize],
        center_pos: usize,
        effective_window: usize,
        alpha: f32,
        rng: &mut R,
    ) -> Result<f64, TrainError> {
        assert!(center_pos < sentence.len(), "center position out of range");
        assert!(sentence.iter().all(|&i| i < self.len()), "index out of range");
        let mut scratch = Scratch::new(self.dim());
        let mut outputs = Vec::new();
        let params = self.params(&mut outputs)?;
        // SAFETY: as above.
        let loss = unsafe {
            params.train_cbow(table, sentence, center_pos, effective_window, alpha, rng, &mut scratch)
        };
        Ok(loss.unwrap_or(0.0))
    }
}

/// Map each sentence to vocabulary indices, dropping unknown keys.
fn index_corpus(documents: &[Document], vocab: &Vocabulary) -> (Vec<Vec<usize>>, u64) {
    let mut unknown = 0;
    let mut sentences = Vec::new();
    for doc in documents {
        for sentence in &doc.sentences {
            let indexed: Vec<usize> = sentence
                .iter()
                .filter_map(|t| {
                    let index = vocab.index_of(t.key());
                    if index.is_none() {
                        unknown += 1;
                    }
                    index
                })
                .collect();
            if !indexed.is_empty() {
                sentences.push(indexed);
            }
        }
    }
    (sentences, unknown)
}

type ProgressFn<'a> = dyn Fn(TrainProgress) + Sync + 'a;

struct Shared<'a, 'b> {
    params: Params<'a, 'b>,
    table: &'b NegativeTable,
    keep: &'b [f64],
    config: &'b TrainConfig,
    total_tokens: u64,
    processed: &'b AtomicU64,
    progress: Option<&'b ProgressFn<'b>>,
}

#[derive(Default)]
struct WorkerTotals {
    loss: f64,
    updates: u64,
    trained: u64,
}

impl Shared<'_, '_> {
    fn run<R: Rng>(&self, sentences: &[Vec<usize>], rng: &mut R) -> WorkerTotals {
        let config = self.config;
        let mut scratch = Scratch::new(config.dim);
        let mut totals = WorkerTotals::default();
        let mut kept = Vec::new();
        let (mut interval_loss, mut interval_updates) = (0.0, 0u64);

        for sentence in sentences {
            let before = self.processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            let alpha = learning_rate(config.alpha0, before, self.total_tokens);

            kept.clear();
            for &index in sentence {
                let p = self.keep[index];
                if p >= 1.0 || rng.gen::<f64>() < p {
                    kept.push(index);
                }
            }
            totals.trained += kept.len() as u64;

            for pos in 0..kept.len() {
                let window = if config.dynamic_window {
                    rng.gen_range(1..=config.window)
                } else {
                    config.window
                };
                // SAFETY: rows are only accessed through the kernels, which
                // never hold two rows of one matrix; concurrent workers race
                // by design of asynchronous SGD.
                unsafe {
                    match config.model {
                        ModelKind::Cbow => {
                            if let Some(loss) = self.params.train_cbow(
                                self.table, &kept, pos, window, alpha, rng, &mut scratch,
                            ) {
                                interval_loss += loss;
                                interval_updates += 1;
                            }
                        }
                        ModelKind::SkipGram | ModelKind::StructuredSkipGram => {
                            let lo = pos.saturating_sub(window);
                            let hi = (pos + window).min(kept.len() - 1);
                            for ctx in lo..=hi {
                                if ctx == pos {
                                    continue;
                                }
                                let offset = ctx as isize - pos as isize;
                                interval_loss += self.params.train_pair(
                                    self.table, kept[pos], kept[ctx], offset, alpha, rng, &mut scratch,
                                );
                                interval_updates += 1;
                            }
                        }
                    }
                }
            }

            let after = before + sentence.len() as u64;
            if let Some(report) = self.progress {
                let every = config.progress_interval.max(1);
                if before / every != after / every {
                    report(TrainProgress {
                        tokens_processed: after,
                        current_alpha: alpha,
                        running_loss: if interval_updates > 0 {
                            interval_loss / interval_updates as f64
                        } else {
                            0.0
                        },
                    });
                    totals.loss += interval_loss;
                    totals.updates += interval_updates;
                    interval_loss = 0.0;
                    interval_updates = 0;
                }
            }
        }
        totals.loss += interval_loss;
        totals.updates += interval_updates;
        totals
    }
}

/// Train a model on `documents` over `config.epochs` passes.
pub fn train(
    documents: &[Document],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainReport), TrainError> {
    train_with_progress(documents, vocab, config, None)
}

/// [`train`] with a progress callback invoked every
/// `config.progress_interval` tokens.
pub fn train_with_progress(
    documents: &[Document],
    vocab: &Vocabulary,
    config: &TrainConfig,
    progress: Option<&ProgressFn<'_>>,
) -> Result<(EmbeddingModel, TrainReport), TrainError> {
    config.validate()?;
    let (sentences, unknown) = index_corpus(documents, vocab);
    let corpus_tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    if corpus_tokens == 0 {
        return Err(TrainError::NoTrainableTokens { skipped: unknown });
    }

    let mut model = EmbeddingModel::init(vocab.clone(), config.clone())?;
    let table = NegativeTable::new(vocab, config.negative_power)?;
    let total = vocab.total_train_tokens().max(1);
    let keep: Vec<f64> = vocab
        .entries()
        .iter()
        .map(|e| subsample_keep_prob(e.count.max(1), total.max(e.count), config.sample))
        .collect();

    let workers = config.workers.min(sentences.len()).max(1);
    let mut rngs: Vec<ChaCha8Rng> = (0..workers)
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(w as u64 + 1);
            rng
        })
        .collect();
    let chunk = sentences.len().div_ceil(workers);
    let processed = AtomicU64::new(0);
    let total_tokens = corpus_tokens * config.epochs as u64;
    let mut report = TrainReport {
        unknown_tokens: unknown,
        ..Default::default()
    };

    let mut outputs = Vec::new();
    let params = model.params(&mut outputs)?;
    let shared = Shared {
        params,
        table: &table,
        keep: &keep,
        config,
        total_tokens,
        processed: &processed,
        progress,
    };

    for _ in 0..config.epochs {
        let totals: Vec<WorkerTotals> = if workers == 1 {
            vec![shared.run(&sentences, &mut rngs[0])]
        } else {
            let results = Mutex::new(Vec::with_capacity(workers));
            std::thread::scope(|scope| {
                for (part, rng) in sentences.chunks(chunk).zip(rngs.iter_mut()) {
                    let shared = &shared;
                    let results = &results;
                    scope.spawn(move || {
                        let totals = shared.run(part, rng);
                        results.lock().unwrap().push(totals);
                    });
                }
            });
            results.into_inner().unwrap()
        };
        let (loss, updates, trained) = totals
            .iter()
            .fold((0.0, 0, 0), |acc, t| (acc.0 + t.loss, acc.1 + t.updates, acc.2 + t.trained));
        report.epoch_losses.push(if updates > 0 { loss / updates as f64 } else { 0.0 });
        report.tokens_trained += trained;
    }
    report.tokens_processed = processed.into_inner();
    if !model.is_finite() {
        return Err(TrainError::Diverged {
            alpha0: config.alpha0,
        });
    }
    Ok((model, report))
}
