use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelKind, TrainConfig, TrainError};
use crate::vocab::Vocabulary;

/// Dense row-major `f32` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }
}

/// Sense embeddings plus the output parameters used to train them.
///
/// Row `i` of the input matrix is the embedding of vocabulary entry `i`.
/// Models loaded from word2vec files carry no output matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) vocab: Vocabulary,
    pub(crate) config: TrainConfig,
    pub(crate) input: Matrix,
    pub(crate) outputs: Vec<Matrix>,
}

impl EmbeddingModel {
    /// Random input vectors, zero output matrices.
    ///
    /// Inputs are i.i.d. uniform in `[-0.5/dim, 0.5/dim]` drawn from
    /// `config.seed`.
    pub fn init(vocab: Vocabulary, config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        if vocab.is_empty() {
            return Err(TrainError::EmptyVocabulary);
        }
        let n_outputs = config.model.output_matrices(config.window);
        let bytes = (vocab.len() as u64)
            .saturating_mul(config.dim as u64)
            .saturating_mul(4 * (1 + n_outputs as u64));
        if bytes > config.memory_budget {
            return Err(TrainError::MemoryBudget {
                needed: bytes,
                budget: config.memory_budget,
                vocab_size: vocab.len(),
                dim: config.dim,
                matrices: 1 + n_outputs,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bound = 0.5 / config.dim as f32;
        let data = (0..vocab.len() * config.dim)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        let input = Matrix::from_vec(vocab.len(), config.dim, data);
        let outputs = (0..n_outputs)
            .map(|_| Matrix::zeros(vocab.len(), config.dim))
            .collect();
        Ok(EmbeddingModel {
            vocab,
            config,
            input,
            outputs,
        })
    }

    /// Assemble a model from parts (used by the loaders).
    pub fn from_parts(
        vocab: Vocabulary,
        config: TrainConfig,
        input: Matrix,
        outputs: Vec<Matrix>,
    ) -> Self {
        assert_eq!(input.rows(), vocab.len());
        assert_eq!(input.cols(), config.dim);
        EmbeddingModel {
            vocab,
            config,
            input,
            outputs,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.model
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn len(&self) -> usize {
        self.input.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn input_mut(&mut self) -> &mut Matrix {
        &mut self.input
    }

    pub fn outputs(&self) -> &[Matrix] {
        &self.outputs
    }

    pub fn outputs_mut(&mut self) -> &mut [Matrix] {
        &mut self.outputs
    }

    pub fn has_outputs(&self) -> bool {
        !self.outputs.is_empty()
    }

    /// Embedding of entry `index`.
    pub fn embedding(&self, index: usize) -> &[f32] {
        self.input.row(index)
    }

    /// Output matrix used for a context at signed `offset` from the center.
    ///
    /// Offsets `-w..=-1` map to `0..w` and `1..=w` map to `w..2w` for
    /// structured skip-gram; other kinds share matrix 0.
    pub fn output_index(&self, offset: isize) -> usize {
        output_index(self.config.model, self.config.window, offset)
    }

    /// True when every parameter is finite.
    pub fn is_finite(&self) -> bool {
        self.input.as_slice().iter().all(|v| v.is_finite())
            && self
                .outputs
                .iter()
                .all(|m| m.as_slice().iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn output_index(kind: ModelKind, window: usize, offset: isize) -> usize {
    match kind {
        ModelKind::StructuredSkipGram => {
            debug_assert!(offset != 0 && offset.unsigned_abs() <= window);
            if offset < 0 {
                (offset + window as isize) as usize
            } else {
                (offset + window as isize - 1) as usize
            }
        }
        _ => 0,
    }
}
