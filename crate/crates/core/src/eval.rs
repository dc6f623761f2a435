//! Planted-polysemy evaluation harness.
//!
//! A [`PlantedCorpusSpec`] describes ambiguous surfaces whose senses each
//! co-occur with their own, disjoint context vocabulary. Because the contexts
//! are disjoint, the neighbors a well-separated sense embedding *should* have
//! are known exactly, which turns neighbor purity into an exact oracle.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{sense_key, Document, SenseToken, UNLABELED};
use crate::query::{Lookup, Query, QueryEngine};
use crate::trainer::{EmbeddingModel, ModelKind, TrainConfig};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid planted corpus spec: {0}")]
    InvalidSpec(String),

    #[error("spec line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("model has no usable embedding for {surface}|{label} (available: [{}])", available.join(", "))]
    NotCovered {
        surface: String,
        label: String,
        available: Vec<String>,
    },

    #[error("class {class} has only {found} test examples (need at least {needed}); use a larger spec")]
    TooFewExamples {
        class: String,
        found: usize,
        needed: usize,
    },
}

/// One planted sense: its label, the words it co-occurs with and how often
/// it is chosen among the senses of its surface.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedSense {
    pub label: String,
    pub context_vocab: Vec<String>,
    pub mix_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmbiguousWord {
    pub surface: String,
    pub senses: Vec<PlantedSense>,
}

/// Recipe for a synthetic corpus with known sense structure.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedCorpusSpec {
    pub ambiguous_words: Vec<AmbiguousWord>,
    /// Distractor words that may appear next to any sense.
    pub background_vocab: Vec<String>,
    pub sentences: usize,
    pub sentence_length: usize,
    pub seed: u64,
    /// Probability that a non-ambiguous position holds a background word.
    pub distractor_rate: f64,
    /// Label carried by background words.
    pub distractor_label: String,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

impl Default for PlantedCorpusSpec {
    /// Three ambiguous surfaces with two or three senses each.
    fn default() -> Self {
        let sense = |label: &str, weight: f64, ctx: &str| PlantedSense {
            label: label.to_string(),
            context_vocab: words(ctx),
            mix_weight: weight,
        };
        let third = 1.0 / 3.0;
        PlantedCorpusSpec {
            ambiguous_words: vec![
                AmbiguousWord {
                    surface: "bank".into(),
                    senses: vec![
                        sense("NOUN", 0.5, "money loan deposit account interest cash credit mortgage savings teller vault branch finance withdrawal checking lender"),
                        sense("VERB", 0.5, "pilot plane aircraft wing tilt runway cockpit altitude glide steer swerve descend airspeed jet rudder hangar"),
                    ],
                },
                AmbiguousWord {
                    surface: "apple".into(),
                    senses: vec![
                        sense("NOUN", 0.5, "fruit orchard pie juice cider ripe peel seed harvest tree crisp sweet core blossom pear basket"),
                        sense("PROPN", 0.5, "iphone mac software ceo cupertino laptop ipad keynote silicon startup tablet developer app os macbook retail"),
                    ],
                },
                AmbiguousWord {
                    surface: "light".into(),
                    senses: vec![
                        sense("NOUN", third, "lamp bulb candle lantern glow shine beam torch flashlight switch watt ray bright shadow sunlight illumination"),
                        sense("ADJ", third, "feather weightless thin airy flimsy portable compact slender gentle breezy delicate petite nimble buoyant lean fluffy"),
                        sense("VERB", third, "fire match ignite flame spark burn kindle blaze lighter fuse ember smoke firewood matchstick wick arson"),
                    ],
                },
            ],
            background_vocab: words("the a of and to in is was for on with as by at from it this that be are were an or but not has have had will its"),
            sentences: 50_000,
            sentence_length: 8,
            seed: 1,
            distractor_rate: 0.1,
            distractor_label: "X".into(),
        }
    }
}

/// Training configuration used with planted corpora: structured skip-gram
/// with `-size 50 -window 5 -negative 10 -iter 5`.
pub fn planted_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 50,
        window: 5,
        negatives: 10,
        sample: 1e-3,
        epochs: 5,
        min_count: 1,
        seed,
        ..TrainConfig::for_kind(ModelKind::StructuredSkipGram)
    }
}

impl PlantedCorpusSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        let fail = |msg: String| Err(EvalError::InvalidSpec(msg));
        if self.ambiguous_words.is_empty() {
            return fail("no ambiguous words".into());
        }
        if self.sentence_length < 2 {
            return fail("sentence_length must be at least 2".into());
        }
        if self.sentences == 0 {
            return fail("sentences must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.distractor_rate) {
            return fail("distractor_rate must lie in [0, 1]".into());
        }
        if self.distractor_rate > 0.0 && self.background_vocab.is_empty() {
            return fail("distractor_rate > 0 needs a background vocabulary".into());
        }
        let mut owner: HashMap<String, String> = HashMap::new();
        let mut claim = |word: &str, who: String| -> Result<(), EvalError> {
            if let Some(prev) = owner.insert(word.to_string(), who.clone()) {
                return Err(EvalError::InvalidSpec(format!(
                    "word {word:?} appears in both {prev} and {who}; context vocabularies must be disjoint"
                )));
            }
            Ok(())
        };
        for word in &self.background_vocab {
            claim(word, "background".into())?;
        }
        for amb in &self.ambiguous_words {
            claim(&amb.surface, "ambiguous surfaces".into())?;
            if amb.senses.is_empty() {
                return fail(format!("{} has no senses", amb.surface));
            }
            let total: f64 = amb.senses.iter().map(|s| s.mix_weight).sum();
            if (total - 1.0).abs() > 1e-9 || amb.senses.iter().any(|s| s.mix_weight < 0.0) {
                return fail(format!("mix weights of {} must be non-negative and sum to 1", amb.surface));
            }
            let mut labels = HashSet::new();
            for sense in &amb.senses {
                if !labels.insert(sense.label.as_str()) || sense.label == UNLABELED {
                    return fail(format!("invalid or repeated label {} for {}", sense.label, amb.surface));
                }
                if sense.context_vocab.is_empty() {
                    return fail(format!("{}|{} has no context words", amb.surface, sense.label));
                }
                for word in &sense.context_vocab {
                    claim(word, format!("{}|{}", amb.surface, sense.label))?;
                }
            }
        }
        Ok(())
    }

    /// Number of (surface, sense) classes.
    pub fn class_count(&self) -> usize {
        self.ambiguous_words.iter().map(|a| a.senses.len()).sum()
    }

    /// Parse the key-value spec format written by [`Self::to_config`].
    ///
    /// ```text
    /// sentences = 50000
    /// sentence_length = 8
    /// seed = 1
    /// distractor_rate = 0.1
    /// distractor_label = X
    /// background = the a of ...
    /// sense = bank NOUN 0.5 money loan deposit ...
    /// ```
    ///
    /// `sense` lines repeat, one per sense; senses of a surface are grouped
    /// in order of first appearance. `#` starts a comment.
    pub fn from_config<R: BufRead>(reader: R) -> Result<Self, EvalError> {
        let mut spec = PlantedCorpusSpec {
            ambiguous_words: Vec::new(),
            background_vocab: Vec::new(),
            ..Default::default()
        };
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| EvalError::Parse {
                line: line_no,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| v.parse::<f64>().map_err(|_| parse_err(format!("invalid number {v:?}")));
            let count = |v: &str| v.parse::<u64>().map_err(|_| parse_err(format!("invalid integer {v:?}")));
            match key {
                "sentences" => spec.sentences = count(value)? as usize,
                "sentence_length" => spec.sentence_length = count(value)? as usize,
                "seed" => spec.seed = count(value)?,
                "distractor_rate" => spec.distractor_rate = number(value)?,
                "distractor_label" => spec.distractor_label = value.to_uppercase(),
                "background" => spec.background_vocab = words(value),
                "sense" => {
                    let mut parts = value.split_whitespace();
                    let (Some(surface), Some(label), Some(weight)) = (parts.next(), parts.next(), parts.next()) else {
                        return Err(parse_err("expected: sense = surface LABEL weight context...".into()));
                    };
                    let sense = PlantedSense {
                        label: label.to_uppercase(),
                        mix_weight: number(weight)?,
                        context_vocab: parts.map(str::to_string).collect(),
                    };
                    match spec.ambiguous_words.iter_mut().find(|a| a.surface == surface) {
                        Some(amb) => amb.senses.push(sense),
                        None => spec.ambiguous_words.push(AmbiguousWord {
                            surface: surface.to_string(),
                            senses: vec![sense],
                        }),
                    }
                }
                other => return Err(parse_err(format!("unknown key {other:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_config(&self) -> String {
        let mut out = String::new();
        writeln!(out, "sentences = {}", self.sentences).unwrap();
        writeln!(out, "sentence_length = {}", self.sentence_length).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "distractor_rate = {}", self.distractor_rate).unwrap();
        writeln!(out, "distractor_label = {}", self.distractor_label).unwrap();
        writeln!(out, "background = {}", self.background_vocab.join(" ")).unwrap();
        for amb in &self.ambiguous_words {
            for sense in &amb.senses {
                writeln!(
                    out,
                    "sense = {} {} {} {}",
                    amb.surface,
                    sense.label,
                    sense.mix_weight,
                    sense.context_vocab.join(" ")
                )
                .unwrap();
            }
        }
        out
    }
}

/// One planted occurrence of an ambiguous word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub surface: String,
    pub label: String,
    /// Ordinal of the (surface, sense) pair in spec order.
    pub class: usize,
}

fn pick_weighted<R: Rng>(senses: &[PlantedSense], rng: &mut R) -> usize {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, s) in senses.iter().enumerate() {
        acc += s.mix_weight;
        if draw < acc {
            return i;
        }
    }
    // Rounding at the top end: last sense with nonzero weight.
    senses.iter().rposition(|s| s.mix_weight > 0.0).unwrap_or(0)
}

fn generate(spec: &PlantedCorpusSpec, seed: u64, sentences: usize) -> (Document, Vec<Occurrence>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_base: Vec<usize> = spec
        .ambiguous_words
        .iter()
        .scan(0, |acc, a| {
            let base = *acc;
            *acc += a.senses.len();
            Some(base)
        })
        .collect();
    let mut doc = Document::new(0);
    let mut occurrences = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let w = rng.gen_range(0..spec.ambiguous_words.len());
        let amb = &spec.ambiguous_words[w];
        let s = pick_weighted(&amb.senses, &mut rng);
        let sense = &amb.senses[s];
        let center = rng.gen_range(0..spec.sentence_length);
        let sentence = (0..spec.sentence_length)
            .map(|pos| {
                let token = if pos == center {
                    SenseToken::new(amb.surface.as_str(), &sense.label)
                } else if rng.gen::<f64>() < spec.distractor_rate {
                    let word = spec.background_vocab.choose(&mut rng).unwrap();
                    SenseToken::new(word.as_str(), &spec.distractor_label)
                } else {
                    let word = sense.context_vocab.choose(&mut rng).unwrap();
                    SenseToken::unlabeled(word.as_str())
                };
                token.expect("validated spec yields valid tokens")
            })
            .collect();
        doc.push_sentence(sentence);
        occurrences.push(Occurrence {
            surface: amb.surface.clone(),
            label: sense.label.clone(),
            class: class_base[w] + s,
        });
    }
    (doc, occurrences)
}

/// Generate the planted corpus: one sentence per ambiguous occurrence.
pub fn generate_planted_corpus(spec: &PlantedCorpusSpec) -> Result<Vec<Document>, EvalError> {
    spec.validate()?;
    Ok(vec![generate(spec, spec.seed, spec.sentences).0])
}

/// Whether a model holds one vector per sense or one merged vector per
/// surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportMode {
    Sense,
    Baseline,
}

/// Neighbor metrics of one sense (or, in baseline mode, of the merged vector
/// scored against one sense's context set).
#[derive(Clone, Debug, PartialEq)]
pub struct SenseMetrics {
    pub label: String,
    /// Key whose neighbors were inspected.
    pub key: String,
    pub purity: f64,
    pub neighbors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairMetrics {
    pub first: String,
    pub second: String,
    pub cross_sense_cosine: f64,
    pub neighbor_jaccard: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceStatus {
    Ok,
    /// Some key needed for the metrics is missing from the model.
    InsufficientData(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceReport {
    pub surface: String,
    pub status: SurfaceStatus,
    pub senses: Vec<SenseMetrics>,
    pub pairs: Vec<PairMetrics>,
}

impl SurfaceReport {
    /// Best purity over senses: for a baseline this is how well the merged
    /// vector matches its most favorable sense.
    pub fn max_purity(&self) -> f64 {
        self.senses.iter().map(|s| s.purity).fold(0.0, f64::max)
    }

    pub fn min_purity(&self) -> f64 {
        self.senses.iter().map(|s| s.purity).fold(1.0, f64::min)
    }

    pub fn max_jaccard(&self) -> f64 {
        self.pairs.iter().map(|p| p.neighbor_jaccard).fold(0.0, f64::max)
    }

    pub fn max_cross_cosine(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.cross_sense_cosine)
            .fold(-1.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub mode: ReportMode,
    pub k: usize,
    pub surfaces: Vec<SurfaceReport>,
}

impl SeparationReport {
    /// Tab-separated rows: `surface sense key purity` and
    /// `surface pair first second cosine jaccard`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for s in &self.surfaces {
            if let SurfaceStatus::InsufficientData(reason) = &s.status {
                writeln!(out, "{}\tinsufficient_data\t{}", s.surface, reason).unwrap();
                continue;
            }
            for m in &s.senses {
                writeln!(out, "{}\tsense\t{}\t{}\tpurity@{}\t{:.4}", s.surface, m.label, m.key, self.k, m.purity).unwrap();
            }
            for p in &s.pairs {
                writeln!(
                    out,
                    "{}\tpair\t{}\t{}\tcosine\t{:.4}\tjaccard@{}\t{:.4}",
                    s.surface, p.first, p.second, p.cross_sense_cosine, self.k, p.neighbor_jaccard
                )
                .unwrap();
            }
        }
        out
    }
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            ReportMode::Sense => "sense",
            ReportMode::Baseline => "baseline",
        };
        writeln!(f, "separation report ({mode} model, k = {})", self.k)?;
        writeln!(
            f,
            "{:<12} {:>10} {:>10} {:>12} {:>12}",
            "surface", "min pur.", "max pur.", "max cosine", "max jaccard"
        )?;
        for s in &self.surfaces {
            match &s.status {
                SurfaceStatus::Ok => writeln!(
                    f,
                    "{:<12} {:>10.3} {:>10.3} {:>12.3} {:>12.3}",
                    s.surface,
                    s.min_purity(),
                    s.max_purity(),
                    s.max_cross_cosine(),
                    s.max_jaccard()
                )?,
                SurfaceStatus::InsufficientData(reason) => {
                    writeln!(f, "{:<12} insufficient data: {reason}", s.surface)?
                }
            }
        }
        Ok(())
    }
}

fn jaccard(a: &[String], b: &[String]) -> f64 {
    let a: HashSet<&String> = a.iter().collect();
    let b: HashSet<&String> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

fn purity(neighbors: &[String], model: &EmbeddingModel, context: &HashSet<&str>, k: usize) -> f64 {
    let hits = neighbors
        .iter()
        .filter(|key| {
            let entry = model.vocab().get(key).expect("neighbor keys come from the vocabulary");
            context.contains(entry.surface.as_str())
        })
        .count();
    hits as f64 / k as f64
}

/// Measure how well a model separates the planted senses.
///
/// Purity@k is the fraction of a sense's `k` nearest neighbors whose surface
/// belongs to that sense's planted context vocabulary. In baseline mode the
/// single `surface|WORD` vector stands in for every sense.
pub fn separation_report(
    model: &EmbeddingModel,
    spec: &PlantedCorpusSpec,
    k: usize,
    mode: ReportMode,
) -> SeparationReport {
    let engine = QueryEngine::new(model);
    let surfaces = spec
        .ambiguous_words
        .iter()
        .map(|amb| surface_report(&engine, model, amb, k, mode))
        .collect();
    SeparationReport { mode, k, surfaces }
}

fn surface_report(
    engine: &QueryEngine<'_>,
    model: &EmbeddingModel,
    amb: &AmbiguousWord,
    k: usize,
    mode: ReportMode,
) -> SurfaceReport {
    let insufficient = |reason: String| SurfaceReport {
        surface: amb.surface.clone(),
        status: SurfaceStatus::InsufficientData(reason),
        senses: Vec::new(),
        pairs: Vec::new(),
    };

    let mut senses = Vec::new();
    for sense in &amb.senses {
        let key = match mode {
            ReportMode::Sense => sense_key(&amb.surface, &sense.label),
            ReportMode::Baseline => sense_key(&amb.surface, UNLABELED),
        };
        if model.vocab().index_of(&key).is_none() {
            return insufficient(format!("{key} not in model"));
        }
        let neighbors: Vec<String> = match engine.nearest(Query::Key(&key), k, None) {
            Ok(n) => n.keys().map(str::to_string).collect(),
            Err(err) => return insufficient(err.to_string()),
        };
        let context: HashSet<&str> = sense.context_vocab.iter().map(String::as_str).collect();
        senses.push(SenseMetrics {
            label: sense.label.clone(),
            purity: purity(&neighbors, model, &context, k),
            key,
            neighbors,
        });
    }

    let mut pairs = Vec::new();
    for i in 0..senses.len() {
        for j in i + 1..senses.len() {
            let (a, b) = (&senses[i], &senses[j]);
            let cosine = if a.key == b.key {
                1.0
            } else {
                match engine.similarity(&a.key, &b.key) {
                    Ok(c) => c as f64,
                    Err(err) => return insufficient(err.to_string()),
                }
            };
            pairs.push(PairMetrics {
                first: a.label.clone(),
                second: b.label.clone(),
                cross_sense_cosine: cosine,
                neighbor_jaccard: jaccard(&a.neighbors, &b.neighbors),
            });
        }
    }

    SurfaceReport {
        surface: amb.surface.clone(),
        status: SurfaceStatus::Ok,
        senses,
        pairs,
    }
}

/// Held-out accuracies of the two probe arms.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub sense_accuracy: f64,
    pub baseline_accuracy: f64,
    /// Accuracy of always predicting the most frequent training class.
    pub majority_rate: f64,
    pub train_examples: usize,
    pub test_examples: usize,
}

impl ProbeResult {
    /// Relative reduction of the baseline's error rate by the sense model.
    pub fn error_reduction(&self) -> f64 {
        let base = 1.0 - self.baseline_accuracy;
        if base == 0.0 {
            return 0.0;
        }
        (base - (1.0 - self.sense_accuracy)) / base
    }
}

/// Sentences generated for the probe task.
pub const PROBE_SENTENCES: usize = 5_000;
/// Minimum number of held-out examples per class.
pub const MIN_TEST_PER_CLASS: usize = 10;
const PROBE_EPOCHS: usize = 300;
const PROBE_LEARNING_RATE: f64 = 1.0;

/// Embedding a consumer uses for an occurrence: the exact sense if the model
/// has it, otherwise the surface's unlabeled vector, otherwise its only
/// sense.
pub fn consumer_embedding<'m>(
    engine: &QueryEngine<'m>,
    surface: &str,
    label: &str,
) -> Result<&'m [f32], EvalError> {
    match engine.embedding_for(surface, label) {
        Lookup::Found(v) => Ok(v),
        Lookup::NotFound { available } => {
            if let Lookup::Found(v) = engine.embedding_for(surface, UNLABELED) {
                return Ok(v);
            }
            if available.len() == 1 {
                let index = engine.model().vocab().index_of(&available[0]).unwrap();
                return Ok(engine.model().embedding(index));
            }
            Err(EvalError::NotCovered {
                surface: surface.to_string(),
                label: label.to_string(),
                available,
            })
        }
    }
}

fn unit_features(v: &[f32]) -> Vec<f64> {
    let norm = v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    let mut f: Vec<f64> = v.iter().map(|&x| x as f64 * scale).collect();
    f.push(1.0);
    f
}

/// Multinomial logistic regression trained by full-batch gradient descent
/// from zero weights. Returns held-out accuracy.
fn fit_and_score(
    train: &[(Vec<f64>, usize)],
    test: &[(Vec<f64>, usize)],
    classes: usize,
) -> f64 {
    let dim = train[0].0.len();
    let mut weights = vec![vec![0f64; dim]; classes];
    let mut probs = vec![0f64; classes];
    let scores = |w: &[Vec<f64>], x: &[f64], out: &mut [f64]| {
        for (c, wc) in w.iter().enumerate() {
            out[c] = wc.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    };
    for _ in 0..PROBE_EPOCHS {
        let mut grad = vec![vec![0f64; dim]; classes];
        for (x, y) in train {
            scores(&weights, x, &mut probs);
            let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for p in probs.iter_mut() {
                *p = (*p - max).exp();
                z += *p;
            }
            for (c, p) in probs.iter().enumerate() {
                let err = p / z - if c == *y { 1.0 } else { 0.0 };
                for (g, xi) in grad[c].iter_mut().zip(x) {
                    *g += err * xi;
                }
            }
        }
        let step = PROBE_LEARNING_RATE / train.len() as f64;
        for (wc, gc) in weights.iter_mut().zip(&grad) {
            for (w, g) in wc.iter_mut().zip(gc) {
                *w -= step * g;
            }
        }
    }
    let correct = test
        .iter()
        .filter(|(x, y)| {
            scores(&weights, x, &mut probs);
            // First maximum wins ties.
            let best = probs
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (c, &s)| if s > best.1 { (c, s) } else { best })
                .0;
            best == *y
        })
        .count();
    correct as f64 / test.len() as f64
}

/// Downstream probe: classify each planted occurrence into its sense class
/// from the occurrence's embedding alone.
///
/// Both arms use the same occurrences, split, labels and lookup policy
/// ([`consumer_embedding`] with the gold label), so the only difference
/// between them is the embeddings. The split is 80/20 after a shuffle seeded
/// by `probe_seed`.
pub fn downstream_probe(
    sense_model: &EmbeddingModel,
    baseline_model: &EmbeddingModel,
    spec: &PlantedCorpusSpec,
    probe_seed: u64,
) -> Result<ProbeResult, EvalError> {
    spec.validate()?;
    let (_, mut occurrences) = generate(spec, probe_seed, PROBE_SENTENCES.min(spec.sentences.max(1)));
    let mut rng = ChaCha8Rng::seed_from_u64(probe_seed ^ 0x5EED_u64);
    occurrences.shuffle(&mut rng);
    let split = occurrences.len() * 4 / 5;
    let classes = spec.class_count();

    let class_names: Vec<String> = spec
        .ambiguous_words
        .iter()
        .flat_map(|a| a.senses.iter().map(move |s| sense_key(&a.surface, &s.label)))
        .collect();
    let mut test_counts = vec![0usize; classes];
    for occ in &occurrences[split..] {
        test_counts[occ.class] += 1;
    }
    if let Some((class, &found)) = test_counts
        .iter()
        .enumerate()
        .find(|(c, &n)| n < MIN_TEST_PER_CLASS && spec_weight(spec, *c) > 0.0)
    {
        return Err(EvalError::TooFewExamples {
            class: class_names[class].clone(),
            found,
            needed: MIN_TEST_PER_CLASS,
        });
    }

    let mut train_counts = vec![0usize; classes];
    for occ in &occurrences[..split] {
        train_counts[occ.class] += 1;
    }
    let majority = (0..classes).max_by_key(|&c| (train_counts[c], std::cmp::Reverse(c))).unwrap();
    let majority_rate = occurrences[split..].iter().filter(|o| o.class == majority).count() as f64
        / (occurrences.len() - split) as f64;

    let arm = |model: &EmbeddingModel| -> Result<f64, EvalError> {
        let engine = QueryEngine::new(model);
        let examples = occurrences
            .iter()
            .map(|o| Ok((unit_features(consumer_embedding(&engine, &o.surface, &o.label)?), o.class)))
            .collect::<Result<Vec<_>, EvalError>>()?;
        let (train, test) = examples.split_at(split);
        Ok(fit_and_score(train, test, classes))
    };

    Ok(ProbeResult {
        sense_accuracy: arm(sense_model)?,
        baseline_accuracy: arm(baseline_model)?,
        majority_rate,
        train_examples: split,
        test_examples: occurrences.len() - split,
    })
}

fn spec_weight(spec: &PlantedCorpusSpec, class: usize) -> f64 {
    spec.ambiguous_words
        .iter()
        .flat_map(|a| a.senses.iter())
        .nth(class)
        .map(|s| s.mix_weight)
        .unwrap_or(0.0)
}
