//! Sense-disambiguated lookup, nearest neighbors and analogies.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::sense_key;
use crate::trainer::{EmbeddingModel, Matrix};

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("unknown key {key:?}; available senses of {surface:?}: [{}]", available.join(", "))]
    UnknownKey {
        key: String,
        surface: String,
        available: Vec<String>,
    },

    #[error("unknown surface {0:?}")]
    UnknownSurface(String),

    #[error("vector for {0} has zero norm")]
    ZeroNorm(String),

    #[error("vector has {found} dimensions, model has {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("k must be at least 1")]
    InvalidK,
}

/// Ranked `(key, cosine)` pairs, best first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborResult {
    pub entries: Vec<(String, f32)>,
}

impl NeighborResult {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    /// `key<TAB>similarity` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (key, sim) in &self.entries {
            writeln!(out, "{key}\t{sim:.6}").unwrap();
        }
        out
    }
}

/// Result of a sense-specific lookup.
#[derive(Clone, Debug, PartialEq)]
pub enum Lookup<'a> {
    Found(&'a [f32]),
    /// The key is absent; lists the senses the surface does have.
    NotFound { available: Vec<String> },
}

/// Cosine similarity. Fails on a zero-norm input.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f32, QueryError> {
    if u.len() != v.len() {
        return Err(QueryError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut uv, mut uu, mut vv) = (0f64, 0f64, 0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 {
        return Err(QueryError::ZeroNorm("first argument".into()));
    }
    if vv == 0.0 {
        return Err(QueryError::ZeroNorm("second argument".into()));
    }
    Ok((uv / (uu.sqrt() * vv.sqrt())) as f32)
}

fn normalized(v: &[f32]) -> Option<Vec<f32>> {
    let norm = v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    (norm > 0.0).then(|| v.iter().map(|&x| (x as f64 / norm) as f32).collect())
}

/// What to search around.
#[derive(Clone, Copy, Debug)]
pub enum Query<'a> {
    Key(&'a str),
    Vector(&'a [f32]),
}

#[derive(PartialEq)]
struct Candidate {
    sim: f32,
    index: usize,
}

impl Eq for Candidate {}

// Ordered so that the heap's maximum is the worst candidate kept so far.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .sim
            .total_cmp(&self.sim)
            .then_with(|| self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Read-only query view over a model.
///
/// Holds unit-normalized copies of the input vectors; zero vectors stay zero
/// and score 0 against everything.
pub struct QueryEngine<'m> {
    model: &'m EmbeddingModel,
    unit: Matrix,
}

impl<'m> QueryEngine<'m> {
    pub fn new(model: &'m EmbeddingModel) -> Self {
        let dim = model.dim();
        let mut unit = Matrix::zeros(model.len(), dim);
        for i in 0..model.len() {
            if let Some(v) = normalized(model.embedding(i)) {
                unit.row_mut(i).copy_from_slice(&v);
            }
        }
        QueryEngine { model, unit }
    }

    pub fn model(&self) -> &'m EmbeddingModel {
        self.model
    }

    fn unknown_key(&self, key: &str) -> QueryError {
        let (surface, _) = crate::corpus::split_key(key);
        QueryError::UnknownKey {
            key: key.to_string(),
            available: self.available(&surface),
            surface,
        }
    }

    fn available(&self, surface: &str) -> Vec<String> {
        self.model
            .vocab()
            .senses_of(surface)
            .into_iter()
            .map(|e| e.key.clone())
            .collect()
    }

    fn index(&self, key: &str) -> Result<usize, QueryError> {
        self.model
            .vocab()
            .index_of(key)
            .ok_or_else(|| self.unknown_key(key))
    }

    /// The raw vector of sense `surface|label`.
    pub fn embedding_for(&self, surface: &str, label: &str) -> Lookup<'m> {
        match self.model.vocab().index_of(&sense_key(surface, label)) {
            Some(i) => Lookup::Found(self.model.embedding(i)),
            None => Lookup::NotFound {
                available: self.available(surface),
            },
        }
    }

    /// Cosine between two stored senses.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f32, QueryError> {
        let (ia, ib) = (self.index(a)?, self.index(b)?);
        cosine(self.model.embedding(ia), self.model.embedding(ib)).map_err(|err| match err {
            QueryError::ZeroNorm(which) if which.starts_with("first") => QueryError::ZeroNorm(a.into()),
            QueryError::ZeroNorm(_) => QueryError::ZeroNorm(b.into()),
            other => other,
        })
    }

    fn unit_of(&self, query: Query<'_>) -> Result<(Vec<f32>, Option<usize>), QueryError> {
        match query {
            Query::Key(key) => {
                let i = self.index(key)?;
                let v = normalized(self.model.embedding(i))
                    .ok_or_else(|| QueryError::ZeroNorm(key.to_string()))?;
                Ok((v, Some(i)))
            }
            Query::Vector(v) => {
                if v.len() != self.model.dim() {
                    return Err(QueryError::DimensionMismatch {
                        expected: self.model.dim(),
                        found: v.len(),
                    });
                }
                let v = normalized(v).ok_or_else(|| QueryError::ZeroNorm("query vector".into()))?;
                Ok((v, None))
            }
        }
    }

    /// Top-`k` candidates by cosine to the unit vector `target`, skipping
    /// `exclude` and, when set, entries whose label differs from `label`.
    /// Ties go to the earlier vocabulary entry.
    fn top_k(&self, target: &[f32], k: usize, exclude: &[usize], label: Option<&str>) -> NeighborResult {
        let vocab = self.model.vocab();
        let mut heap = BinaryHeap::with_capacity(k + 1);
        for (index, row) in self.unit.iter_rows().enumerate() {
            if exclude.contains(&index) {
                continue;
            }
            if let Some(label) = label {
                if vocab.entry(index).label != label {
                    continue;
                }
            }
            let sim = crate::trainer::sgd::dot(target, row).clamp(-1.0, 1.0);
            heap.push(Candidate { sim, index });
            if heap.len() > k {
                heap.pop();
            }
        }
        let ranked = heap.into_sorted_vec();
        NeighborResult {
            entries: ranked
                .into_iter()
                .map(|c| (vocab.entry(c.index).key.clone(), c.sim))
                .collect(),
        }
    }

    /// The `k` senses closest to `query`, optionally restricted to one label.
    /// A key query never returns itself.
    pub fn nearest(
        &self,
        query: Query<'_>,
        k: usize,
        filter_label: Option<&str>,
    ) -> Result<NeighborResult, QueryError> {
        if k == 0 {
            return Err(QueryError::InvalidK);
        }
        let (target, own) = self.unit_of(query)?;
        let exclude: Vec<usize> = own.into_iter().collect();
        Ok(self.top_k(&target, k, &exclude, filter_label))
    }

    /// 3CosAdd: rank by cosine to `b - a + c` over unit vectors, excluding
    /// the three inputs.
    pub fn analogy(&self, a: &str, b: &str, c: &str, k: usize) -> Result<NeighborResult, QueryError> {
        if k == 0 {
            return Err(QueryError::InvalidK);
        }
        let (ia, ib, ic) = (self.index(a)?, self.index(b)?, self.index(c)?);
        let mut target = vec![0f32; self.model.dim()];
        for (d, ((&va, &vb), &vc)) in target
            .iter_mut()
            .zip(self.unit.row(ia).iter().zip(self.unit.row(ib)).zip(self.unit.row(ic)))
        {
            *d = vb - va + vc;
        }
        let target = normalized(&target).unwrap_or(target);
        Ok(self.top_k(&target, k, &[ia, ib, ic], None))
    }

    /// Neighbor lists for every sense of `surface`, in canonical order.
    pub fn sense_table(&self, surface: &str, k: usize) -> Result<SenseTable, QueryError> {
        let senses = self.model.vocab().senses_of(surface);
        if senses.is_empty() {
            return Err(QueryError::UnknownSurface(surface.to_string()));
        }
        let columns = senses
            .into_iter()
            .map(|e| Ok((e.key.clone(), self.nearest(Query::Key(&e.key), k, None)?)))
            .collect::<Result<_, QueryError>>()?;
        Ok(SenseTable { columns })
    }
}

/// One neighbor column per sense of a surface.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseTable {
    pub columns: Vec<(String, NeighborResult)>,
}

impl SenseTable {
    /// Tab-separated multi-column layout; each column header shows the
    /// sense with its self-similarity of 1.0.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|(key, _)| format!("{key}\t1.0"))
            .collect();
        out.push_str(&header.join("\t"));
        out.push('\n');
        let rows = self.columns.iter().map(|(_, n)| n.len()).max().unwrap_or(0);
        for r in 0..rows {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|(_, n)| match n.entries.get(r) {
                    Some((key, sim)) => format!("{key}\t{sim:.3}"),
                    None => "\t".to_string(),
                })
                .collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}
