//! Per-sense vocabulary and the negative-sampling distribution.

use std::collections::HashMap;
use std::io::{self, Write};

use rand::Rng;
use thiserror::Error;

use crate::corpus::{split_key, SenseToken};

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary is empty (no sense key reaches min-count {min_count})")]
    Empty { min_count: u64 },

    #[error("min-count must be at least 1")]
    InvalidMinCount,

    #[error("duplicate key {0:?} in vocabulary")]
    DuplicateKey(String),

    #[error("negative-sampling power must lie in (0, 1], got {0}")]
    InvalidPower(f64),
}

/// One sense key with its corpus count and dense index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenseEntry {
    pub key: String,
    pub surface: String,
    pub label: String,
    pub count: u64,
    pub index: usize,
}

/// Sense keys in canonical order: descending count, then key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<SenseEntry>,
    total_train_tokens: u64,
    key_index: HashMap<String, usize>,
    surface_index: HashMap<String, Vec<usize>>,
}

impl Vocabulary {
    /// Count sense keys and keep those occurring at least `min_count` times.
    pub fn build<'a, I>(tokens: I, min_count: u64) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = &'a SenseToken>,
    {
        if min_count == 0 {
            return Err(VocabError::InvalidMinCount);
        }
        let mut counts: HashMap<&'a str, u64> = HashMap::new();
        for token in tokens {
            *counts.entry(token.key()).or_insert(0) += 1;
        }
        let mut kept: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .map(|(key, count)| (key.to_string(), count))
            .collect();
        if kept.is_empty() {
            return Err(VocabError::Empty { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_counts(kept)
    }

    /// Build from `(key, count)` pairs, keeping the given order.
    pub fn from_counts<I>(pairs: I) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut entries = Vec::new();
        let mut key_index = HashMap::new();
        let mut surface_index: HashMap<String, Vec<usize>> = HashMap::new();
        let mut total = 0;
        for (index, (key, count)) in pairs.into_iter().enumerate() {
            if key_index.insert(key.clone(), index).is_some() {
                return Err(VocabError::DuplicateKey(key));
            }
            let (surface, label) = split_key(&key);
            surface_index.entry(surface.clone()).or_default().push(index);
            total += count;
            entries.push(SenseEntry {
                key,
                surface,
                label,
                count,
                index,
            });
        }
        Ok(Vocabulary {
            entries,
            total_train_tokens: total,
            key_index,
            surface_index,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SenseEntry] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &SenseEntry {
        &self.entries[index]
    }

    /// Sum of counts of the retained entries.
    pub fn total_train_tokens(&self) -> u64 {
        self.total_train_tokens
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.key_index.get(key).copied()
    }

    pub fn get(&self, key: &str) -> Option<&SenseEntry> {
        self.index_of(key).map(|i| &self.entries[i])
    }

    /// Indices of all senses of `surface`, in canonical order.
    pub fn sense_indices(&self, surface: &str) -> &[usize] {
        self.surface_index
            .get(surface)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All senses of `surface`, in canonical order. Empty for unknown surfaces.
    pub fn senses_of(&self, surface: &str) -> Vec<&SenseEntry> {
        self.sense_indices(surface)
            .iter()
            .map(|&i| &self.entries[i])
            .collect()
    }

    /// Write `key<TAB>count` lines in canonical order.
    pub fn write_dump<W: Write>(&self, mut writer: W) -> io::Result<()> {
        for entry in &self.entries {
            writeln!(writer, "{}\t{}", entry.key, entry.count)?;
        }
        writer.flush()
    }
}

/// Unigram distribution raised to a power, sampled in O(1) with the alias
/// method.
#[derive(Clone, Debug)]
pub struct NegativeTable {
    probabilities: Vec<f64>,
    accept: Vec<f64>,
    alias: Vec<u32>,
}

impl NegativeTable {
    /// `P(i) = count_i^power / Σ_j count_j^power`.
    pub fn new(vocab: &Vocabulary, power: f64) -> Result<Self, VocabError> {
        if !(power > 0.0 && power <= 1.0) {
            return Err(VocabError::InvalidPower(power));
        }
        if vocab.is_empty() {
            return Err(VocabError::Empty { min_count: 0 });
        }
        let weights: Vec<f64> = vocab
            .entries()
            .iter()
            .map(|e| (e.count as f64).powf(power))
            .collect();
        Ok(Self::from_weights(&weights))
    }

    fn from_weights(weights: &[f64]) -> Self {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = if total > 0.0 {
            weights.iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / n as f64; n]
        };

        // Vose's alias method.
        let mut scaled: Vec<f64> = probabilities.iter().map(|p| p * n as f64).collect();
        let mut accept = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            accept[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            accept[i] = 1.0;
        }

        NegativeTable {
            probabilities,
            accept,
            alias,
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Draw one entry index.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.accept.len());
        if rng.gen::<f64>() < self.accept[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}
