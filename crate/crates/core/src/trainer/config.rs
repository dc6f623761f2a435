use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TrainError;

/// Training objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Continuous bag of words: predict the center sense from the averaged context.
    Cbow,
    /// Predict each context sense from the center sense.
    SkipGram,
    /// Skip-gram with one output matrix per signed context offset.
    StructuredSkipGram,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cbow => "cbow",
            ModelKind::SkipGram => "sg",
            ModelKind::StructuredSkipGram => "ssg",
        }
    }

    /// Number of output matrices for a given window.
    pub fn output_matrices(self, window: usize) -> usize {
        match self {
            ModelKind::StructuredSkipGram => 2 * window,
            _ => 1,
        }
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            ModelKind::Cbow => 0,
            ModelKind::SkipGram => 1,
            ModelKind::StructuredSkipGram => 2,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(ModelKind::Cbow),
            1 => Some(ModelKind::SkipGram),
            2 => Some(ModelKind::StructuredSkipGram),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(ModelKind::Cbow),
            "sg" | "skipgram" | "skip-gram" => Ok(ModelKind::SkipGram),
            "ssg" | "structured" | "structured-skipgram" => Ok(ModelKind::StructuredSkipGram),
            other => Err(format!("unknown model kind {other:?} (expected cbow, sg or ssg)")),
        }
    }
}

/// Training hyperparameters.
///
/// Defaults follow word2vec's flags as used for the large CBOW model:
/// `-size 500 -window 10 -negative 10 -hs 0 -sample 1e-5 -iter 3 -min-count 10`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    /// Subsampling threshold; 0 disables subsampling.
    pub sample: f64,
    pub epochs: usize,
    pub min_count: u64,
    pub alpha0: f32,
    pub model: ModelKind,
    pub workers: usize,
    pub seed: u64,
    /// Draw the effective window uniformly from `1..=window` per center token.
    pub dynamic_window: bool,
    /// Exponent applied to counts in the negative-sampling distribution.
    pub negative_power: f64,
    /// Upper bound on parameter memory in bytes.
    pub memory_budget: u64,
    /// Tokens between progress reports.
    pub progress_interval: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 500,
            window: 10,
            negatives: 10,
            sample: 1e-5,
            epochs: 3,
            min_count: 10,
            alpha0: 0.05,
            model: ModelKind::Cbow,
            workers: 1,
            seed: 1,
            dynamic_window: true,
            negative_power: 0.75,
            memory_budget: 8 << 30,
            progress_interval: 100_000,
        }
    }
}

impl TrainConfig {
    /// Defaults for a model kind: skip-gram variants start at alpha 0.025 and
    /// structured skip-gram uses the full window at every position.
    pub fn for_kind(model: ModelKind) -> Self {
        let mut config = TrainConfig {
            model,
            ..Default::default()
        };
        config.set_kind(model);
        config
    }

    /// Change the model kind together with its kind-specific defaults.
    pub fn set_kind(&mut self, model: ModelKind) {
        self.model = model;
        self.alpha0 = match model {
            ModelKind::Cbow => 0.05,
            _ => 0.025,
        };
        self.dynamic_window = model != ModelKind::StructuredSkipGram;
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if self.dim < 1 {
            return fail("dim must be at least 1");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return fail("alpha must be positive");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.min_count < 1 {
            return fail("min-count must be at least 1");
        }
        if !(self.sample >= 0.0 && self.sample.is_finite()) {
            return fail("sample must be non-negative");
        }
        if self.workers < 1 {
            return fail("workers must be at least 1");
        }
        if !(self.negative_power > 0.0 && self.negative_power <= 1.0) {
            return fail("negative power must lie in (0, 1]");
        }
        Ok(())
    }
}
