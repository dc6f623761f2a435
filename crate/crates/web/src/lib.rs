//! WebAssembly bindings for the browser demo.
//!
//! The page trains a sense model and a plain (label-stripped) baseline on a
//! planted corpus, then shows per-sense neighbor tables and a 2D projection.
//! All results cross the boundary as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sense2vec::corpus::{self, Document};
use sense2vec::eval::{self, PlantedCorpusSpec, ReportMode};
use sense2vec::{train, EmbeddingModel, ModelKind, Query, QueryEngine, Vocabulary};

#[derive(Clone, Debug, PartialEq)]
pub struct DemoOptions {
    pub sentences: usize,
    pub dim: usize,
    pub epochs: usize,
    pub seed: u64,
    pub model: ModelKind,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            sentences: 10_000,
            dim: 50,
            epochs: 5,
            seed: 1,
            model: ModelKind::StructuredSkipGram,
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct SurfaceSummary {
    pub surface: String,
    pub senses: Vec<String>,
    pub min_purity: f64,
    pub baseline_max_purity: f64,
    pub max_cross_cosine: f64,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Summary {
    pub sense_vocab: usize,
    pub baseline_vocab: usize,
    pub sense_losses: Vec<f64>,
    pub baseline_losses: Vec<f64>,
    pub surfaces: Vec<SurfaceSummary>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Column {
    pub key: String,
    pub neighbors: Vec<(String, f32)>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub senses: Vec<Column>,
    pub baseline: Column,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Point {
    pub key: String,
    pub x: f64,
    pub y: f64,
    /// Index of the sense this point belongs to (the sense itself or one of its neighbors).
    pub group: usize,
    pub is_sense: bool,
}

/// Trained models plus the spec they came from.
pub struct DemoState {
    spec: PlantedCorpusSpec,
    sense: EmbeddingModel,
    baseline: EmbeddingModel,
    summary: Summary,
}

fn train_one(documents: &[Document], options: &DemoOptions) -> Result<(EmbeddingModel, Vec<f64>), String> {
    let mut config = eval::planted_train_config(options.seed);
    config.set_kind(options.model);
    config.dim = options.dim;
    config.epochs = options.epochs;
    let vocab = Vocabulary::build(documents.iter().flat_map(Document::tokens), config.min_count)
        .map_err(|e| e.to_string())?;
    let (model, report) = train(documents, &vocab, &config).map_err(|e| e.to_string())?;
    Ok((model, report.epoch_losses))
}

impl DemoState {
    pub fn train(options: &DemoOptions) -> Result<Self, String> {
        let spec = PlantedCorpusSpec {
            sentences: options.sentences,
            seed: options.seed,
            ..PlantedCorpusSpec::default()
        };
        let documents = eval::generate_planted_corpus(&spec).map_err(|e| e.to_string())?;
        let stripped: Vec<Document> = documents.iter().map(corpus::strip_labels).collect();
        let (sense, sense_losses) = train_one(&documents, options)?;
        let (baseline, baseline_losses) = train_one(&stripped, options)?;

        let sense_report = eval::separation_report(&sense, &spec, 10, ReportMode::Sense);
        let baseline_report = eval::separation_report(&baseline, &spec, 10, ReportMode::Baseline);
        let surfaces = sense_report
            .surfaces
            .iter()
            .zip(&baseline_report.surfaces)
            .map(|(s, b)| SurfaceSummary {
                surface: s.surface.clone(),
                senses: s.senses.iter().map(|m| m.key.clone()).collect(),
                min_purity: s.min_purity(),
                baseline_max_purity: b.max_purity(),
                max_cross_cosine: s.max_cross_cosine(),
            })
            .collect();
        let summary = Summary {
            sense_vocab: sense.len(),
            baseline_vocab: baseline.len(),
            sense_losses,
            baseline_losses,
            surfaces,
        };
        Ok(DemoState {
            spec,
            sense,
            baseline,
            summary,
        })
    }

    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    pub fn surfaces(&self) -> Vec<String> {
        self.spec
            .ambiguous_words
            .iter()
            .map(|w| w.surface.clone())
            .collect()
    }

    pub fn neighbors(&self, surface: &str, k: usize) -> Result<Neighbors, String> {
        let table = QueryEngine::new(&self.sense)
            .sense_table(surface, k)
            .map_err(|e| e.to_string())?;
        let senses = table
            .columns
            .into_iter()
            .map(|(key, n)| Column {
                key,
                neighbors: n.entries,
            })
            .collect();
        let key = corpus::sense_key(surface, corpus::UNLABELED);
        let neighbors = QueryEngine::new(&self.baseline)
            .nearest(Query::Key(&key), k, None)
            .map_err(|e| e.to_string())?
            .entries;
        Ok(Neighbors {
            senses,
            baseline: Column { key, neighbors },
        })
    }

    /// Project each sense of `surface` and its `k` nearest neighbors onto the
    /// top two principal components of their unit vectors.
    pub fn projection(&self, surface: &str, k: usize) -> Result<Vec<Point>, String> {
        let neighbors = self.neighbors(surface, k)?;
        let vocab = self.sense.vocab();
        let mut keys: Vec<(String, usize, bool)> = Vec::new();
        for (group, column) in neighbors.senses.iter().enumerate() {
            keys.push((column.key.clone(), group, true));
            for (key, _) in &column.neighbors {
                if !keys.iter().any(|(k, _, _)| k == key) {
                    keys.push((key.clone(), group, false));
                }
            }
        }
        let rows: Vec<Vec<f64>> = keys
            .iter()
            .map(|(key, _, _)| {
                let index = vocab.index_of(key).ok_or_else(|| format!("unknown key {key}"))?;
                Ok(unit(self.sense.embedding(index)))
            })
            .collect::<Result<_, String>>()?;
        let coords = pca_2d(&rows);
        Ok(keys
            .into_iter()
            .zip(coords)
            .map(|((key, group, is_sense), (x, y))| Point {
                key,
                x,
                y,
                group,
                is_sense,
            })
            .collect())
    }
}

fn unit(v: &[f32]) -> Vec<f64> {
    let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
    let norm = if norm > 0.0 { norm } else { 1.0 };
    v.iter().map(|&x| f64::from(x) / norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coordinates of each row on the two leading principal components,
/// found by power iteration with deflation.
pub fn pca_2d(rows: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let Some(dim) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / n;
        }
    }
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut components: Vec<Vec<f64>> = Vec::new();
    for c in 0..2 {
        let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + ((i * 7 + c * 3) % 11) as f64 / 11.0).collect();
        for _ in 0..200 {
            // v <- X^T X v, minus projections on earlier components
            let scores: Vec<f64> = centered.iter().map(|r| dot(r, &v)).collect();
            let mut next = vec![0.0; dim];
            for (r, s) in centered.iter().zip(&scores) {
                for (nx, x) in next.iter_mut().zip(r) {
                    *nx += s * x;
                }
            }
            for prev in &components {
                let p = dot(&next, prev);
                for (nx, px) in next.iter_mut().zip(prev) {
                    *nx -= p * px;
                }
            }
            let norm = dot(&next, &next).sqrt();
            if norm < 1e-12 {
                v = vec![0.0; dim];
                break;
            }
            next.iter_mut().for_each(|x| *x /= norm);
            v = next;
        }
        components.push(v);
    }
    centered
        .iter()
        .map(|r| (dot(r, &components[0]), dot(r, &components[1])))
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo values serialize")
}

/// JavaScript handle to a trained demo.
#[wasm_bindgen]
pub struct Demo {
    state: DemoState,
}

#[wasm_bindgen]
impl Demo {
    /// Generate a planted corpus and train sense and baseline models on it.
    #[wasm_bindgen(constructor)]
    pub fn new(sentences: u32, dim: u32, epochs: u32, seed: u32, model: &str) -> Result<Demo, JsError> {
        let model: ModelKind = model.parse().map_err(|e: String| JsError::new(&e))?;
        let options = DemoOptions {
            sentences: sentences as usize,
            dim: dim as usize,
            epochs: epochs as usize,
            seed: u64::from(seed),
            model,
        };
        let state = DemoState::train(&options).map_err(|e| JsError::new(&e))?;
        Ok(Demo { state })
    }

    pub fn summary(&self) -> String {
        to_json(self.state.summary())
    }

    pub fn surfaces(&self) -> String {
        to_json(&self.state.surfaces())
    }

    pub fn neighbors(&self, surface: &str, k: u32) -> Result<String, JsError> {
        self.state
            .neighbors(surface, k as usize)
            .map(|n| to_json(&n))
            .map_err(|e| JsError::new(&e))
    }

    pub fn projection(&self, surface: &str, k: u32) -> Result<String, JsError> {
        self.state
            .projection(surface, k as usize)
            .map(|p| to_json(&p))
            .map_err(|e| JsError::new(&e))
    }
}
