//! Corpus adapters: tagged-token text, CoNLL-U, sentiment labeling, span
//! merging and frequent-sense subsampling.
//!
//! Every adapter produces the same canonical stream of [`Document`]s made of
//! [`SenseToken`]s. A sense token pairs a surface form with a supervised label
//! and is identified by its key `surface|LABEL`.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Label given to tokens that carry no supervision.
pub const UNLABELED: &str = "WORD";

/// Separator between surface and label in a sense key.
pub const KEY_SEPARATOR: char = '|';

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed token {token:?}: {reason}")]
    MalformedToken { token: String, reason: &'static str },

    #[error("document {doc} has no document label")]
    MissingDocLabel { doc: usize },

    #[error("span {span} is out of range for sentence {sentence} of length {len}")]
    SpanOutOfRange {
        span: Span,
        sentence: usize,
        len: usize,
    },

    #[error("overlapping spans: {first} and {second}")]
    OverlappingSpans { first: Span, second: Span },

    #[error("line {line}: {reason}")]
    Sidecar { line: usize, reason: String },
}

/// Percent-encode the characters that would make a key ambiguous.
pub fn encode_surface(surface: &str) -> String {
    let mut out = String::with_capacity(surface.len());
    for c in surface.chars() {
        match c {
            '%' => out.push_str("%25"),
            '|' => out.push_str("%7C"),
            _ => out.push(c),
        }
    }
    out
}

/// Inverse of [`encode_surface`]. Unknown escapes are kept verbatim.
pub fn decode_surface(encoded: &str) -> String {
    let mut out = String::with_capacity(encoded.len());
    let mut rest = encoded;
    while let Some(pos) = rest.find('%') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.len() >= 3 && tail[1..3].eq_ignore_ascii_case("7C") {
            out.push('|');
            rest = &tail[3..];
        } else if tail.len() >= 3 && &tail[1..3] == "25" {
            out.push('%');
            rest = &tail[3..];
        } else {
            out.push('%');
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out
}

/// Build the canonical key for a surface and label.
pub fn sense_key(surface: &str, label: &str) -> String {
    let mut key = encode_surface(surface);
    key.push(KEY_SEPARATOR);
    key.push_str(label);
    key
}

/// Split a key into its decoded surface and its label.
///
/// The label is everything after the last separator; keys without a
/// separator are treated as unlabeled surfaces.
pub fn split_key(key: &str) -> (String, String) {
    match key.rfind(KEY_SEPARATOR) {
        Some(pos) => (decode_surface(&key[..pos]), key[pos + 1..].to_string()),
        None => (decode_surface(key), UNLABELED.to_string()),
    }
}

/// One corpus position: a surface form with its sense label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SenseToken {
    surface: String,
    label: String,
    key: String,
}

impl SenseToken {
    /// Create a token. Labels are upper-cased.
    pub fn new(surface: impl Into<String>, label: impl AsRef<str>) -> Result<Self, CorpusError> {
        let surface = surface.into();
        let label = label.as_ref().to_uppercase();
        if surface.is_empty() {
            return Err(CorpusError::MalformedToken {
                token: sense_key(&surface, &label),
                reason: "empty surface",
            });
        }
        if label.is_empty() {
            return Err(CorpusError::MalformedToken {
                token: encode_surface(&surface),
                reason: "empty label",
            });
        }
        if label.contains(KEY_SEPARATOR) || label.chars().any(char::is_whitespace) {
            return Err(CorpusError::MalformedToken {
                token: sense_key(&surface, &label),
                reason: "label contains '|' or whitespace",
            });
        }
        let key = sense_key(&surface, &label);
        Ok(SenseToken {
            surface,
            label,
            key,
        })
    }

    /// A token carrying the reserved unlabeled label.
    pub fn unlabeled(surface: impl Into<String>) -> Result<Self, CorpusError> {
        Self::new(surface, UNLABELED)
    }

    /// Parse the tagged-text form `surface|LABEL` or a bare `surface`.
    pub fn parse(raw: &str) -> Result<Self, CorpusError> {
        match raw.rfind(KEY_SEPARATOR) {
            Some(pos) => {
                let (surface, label) = (&raw[..pos], &raw[pos + 1..]);
                if surface.is_empty() {
                    return Err(CorpusError::MalformedToken {
                        token: raw.to_string(),
                        reason: "empty surface",
                    });
                }
                if label.is_empty() {
                    return Err(CorpusError::MalformedToken {
                        token: raw.to_string(),
                        reason: "empty label",
                    });
                }
                Self::new(decode_surface(surface), label)
            }
            None => Self::unlabeled(decode_surface(raw)),
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn is_unlabeled(&self) -> bool {
        self.label == UNLABELED
    }

    /// Same surface, different label.
    pub fn relabel(&self, label: &str) -> Result<Self, CorpusError> {
        Self::new(self.surface.clone(), label)
    }
}

impl fmt::Display for SenseToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

/// A sequence of sentences with an optional document-level label.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    /// Ordinal of the document within its source.
    pub id: usize,
    pub sentences: Vec<Vec<SenseToken>>,
    pub doc_label: Option<String>,
}

impl Document {
    pub fn new(id: usize) -> Self {
        Document {
            id,
            ..Default::default()
        }
    }

    /// Append a sentence; empty sentences are dropped.
    pub fn push_sentence(&mut self, sentence: Vec<SenseToken>) {
        if !sentence.is_empty() {
            self.sentences.push(sentence);
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &SenseToken> {
        self.sentences.iter().flatten()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// A recoverable problem found while reading input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based input line number.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Options shared by the corpus readers.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReadOptions {
    /// Lower-case every surface form.
    pub fold_case: bool,
}

fn fold(surface: &str, options: ReadOptions) -> String {
    if options.fold_case {
        surface.to_lowercase()
    } else {
        surface.to_string()
    }
}

/// Reader for the tagged-token text format.
///
/// One sentence per line, whitespace-separated `surface|LABEL` tokens. A
/// blank line ends the current document. Lines holding a malformed token are
/// skipped and recorded as [`Diagnostic`]s.
pub struct TaggedTextReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    next_id: usize,
    options: ReadOptions,
    diagnostics: Vec<Diagnostic>,
    done: bool,
}

impl<R: BufRead> TaggedTextReader<R> {
    pub fn new(reader: R, options: ReadOptions) -> Self {
        TaggedTextReader {
            lines: reader.lines(),
            line_no: 0,
            next_id: 0,
            options,
            diagnostics: Vec::new(),
            done: false,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn into_diagnostics(self) -> Vec<Diagnostic> {
        self.diagnostics
    }

    fn parse_line(&mut self, line: &str) -> Option<Vec<SenseToken>> {
        let mut sentence = Vec::new();
        for raw in line.split_whitespace() {
            match SenseToken::parse(raw) {
                Ok(token) if self.options.fold_case => {
                    let folded = SenseToken::new(fold(token.surface(), self.options), token.label())
                        .expect("folding keeps a valid token valid");
                    sentence.push(folded)
                }
                Ok(token) => sentence.push(token),
                Err(err) => {
                    self.diagnostics.push(Diagnostic {
                        line: self.line_no,
                        message: err.to_string(),
                    });
                    return None;
                }
            }
        }
        Some(sentence)
    }
}

impl<R: BufRead> Iterator for TaggedTextReader<R> {
    type Item = Result<Document, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut doc = Document::new(self.next_id);
        loop {
            let line = match self.lines.next() {
                Some(Ok(line)) => line,
                Some(Err(err)) => {
                    self.done = true;
                    return Some(Err(err.into()));
                }
                None => {
                    self.done = true;
                    break;
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                if doc.is_empty() {
                    continue;
                }
                break;
            }
            if let Some(sentence) = self.parse_line(&line) {
                doc.push_sentence(sentence);
            }
        }
        if doc.is_empty() {
            return None;
        }
        self.next_id += 1;
        Some(Ok(doc))
    }
}

/// Documents read from a source together with the recoverable problems.
#[derive(Debug, Default)]
pub struct ReadOutcome {
    pub documents: Vec<Document>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Read a whole tagged-text source.
pub fn read_tagged_text<R: BufRead>(
    reader: R,
    options: ReadOptions,
) -> Result<ReadOutcome, CorpusError> {
    let mut reader = TaggedTextReader::new(reader, options);
    let mut documents = Vec::new();
    for doc in &mut reader {
        documents.push(doc?);
    }
    Ok(ReadOutcome {
        documents,
        diagnostics: reader.into_diagnostics(),
    })
}

/// Write documents in tagged-text format, one sentence per line with a blank
/// line between documents.
pub fn write_tagged_text<W: Write>(documents: &[Document], mut writer: W) -> io::Result<()> {
    for (i, doc) in documents.iter().enumerate() {
        if i > 0 {
            writeln!(writer)?;
        }
        for sentence in &doc.sentences {
            for (j, token) in sentence.iter().enumerate() {
                if j > 0 {
                    writer.write_all(b" ")?;
                }
                writer.write_all(token.key().as_bytes())?;
            }
            writeln!(writer)?;
        }
    }
    writer.flush()
}

/// Which CoNLL-U column supplies the sense label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    Upos,
    Xpos,
}

impl LabelColumn {
    fn index(self) -> usize {
        match self {
            LabelColumn::Upos => 3,
            LabelColumn::Xpos => 4,
        }
    }
}

impl std::str::FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "upos" => Ok(LabelColumn::Upos),
            "xpos" => Ok(LabelColumn::Xpos),
            other => Err(format!("unknown label column {other:?} (expected upos or xpos)")),
        }
    }
}

const CONLLU_COLUMNS: usize = 10;

/// Read CoNLL-U.
///
/// FORM becomes the surface and the chosen column the label (`_` maps to
/// the unlabeled label). Multiword range lines (`1-2`) and empty nodes (`5.1`)
/// are dropped. A sentence containing a malformed line is skipped as a whole
/// and reported. `# newdoc` comments start a new document; without them the
/// source is a single document.
pub fn read_conllu<R: BufRead>(
    reader: R,
    column: LabelColumn,
    options: ReadOptions,
) -> Result<ReadOutcome, CorpusError> {
    let mut outcome = ReadOutcome::default();
    let mut doc = Document::new(0);
    let mut sentence: Vec<SenseToken> = Vec::new();
    let mut sentence_start = 0;
    let mut broken: Option<Diagnostic> = None;

    let finish_sentence =
        |doc: &mut Document, sentence: &mut Vec<SenseToken>, broken: &mut Option<Diagnostic>, outcome: &mut ReadOutcome| {
            if let Some(diag) = broken.take() {
                outcome.diagnostics.push(diag);
                sentence.clear();
            } else {
                doc.push_sentence(std::mem::take(sentence));
            }
        };

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() {
            finish_sentence(&mut doc, &mut sentence, &mut broken, &mut outcome);
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if comment.trim_start().starts_with("newdoc") {
                finish_sentence(&mut doc, &mut sentence, &mut broken, &mut outcome);
                if !doc.is_empty() {
                    let next = Document::new(doc.id + 1);
                    outcome.documents.push(std::mem::replace(&mut doc, next));
                }
            }
            continue;
        }
        if sentence.is_empty() && broken.is_none() {
            sentence_start = line_no;
        }
        if broken.is_some() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != CONLLU_COLUMNS {
            broken = Some(Diagnostic {
                line: line_no,
                message: format!(
                    "expected {CONLLU_COLUMNS} tab-separated columns, found {}; skipping sentence starting at line {sentence_start}",
                    fields.len()
                ),
            });
            continue;
        }
        let id = fields[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let surface: String = fold(fields[1], options)
            .split_whitespace()
            .collect::<Vec<_>>()
            .join("_");
        let label = match fields[column.index()] {
            "_" | "" => UNLABELED,
            label => label,
        };
        match SenseToken::new(surface, label) {
            Ok(token) => sentence.push(token),
            Err(err) => {
                broken = Some(Diagnostic {
                    line: line_no,
                    message: format!("{err}; skipping sentence starting at line {sentence_start}"),
                });
            }
        }
    }
    finish_sentence(&mut doc, &mut sentence, &mut broken, &mut outcome);
    if !doc.is_empty() {
        outcome.documents.push(doc);
    }
    Ok(outcome)
}

/// Replace the label of adjectives with the document's sentiment label.
///
/// All other tokens keep their label.
pub fn label_adjectives_with_sentiment(
    doc: &Document,
    adjective_label: &str,
) -> Result<Document, CorpusError> {
    let sentiment = doc
        .doc_label
        .as_deref()
        .ok_or(CorpusError::MissingDocLabel { doc: doc.id })?;
    let adjective_label = adjective_label.to_uppercase();
    let mut sentences = Vec::with_capacity(doc.sentences.len());
    for sentence in &doc.sentences {
        let mut relabeled = Vec::with_capacity(sentence.len());
        for token in sentence {
            if token.label() == adjective_label {
                relabeled.push(token.relabel(sentiment)?);
            } else {
                relabeled.push(token.clone());
            }
        }
        sentences.push(relabeled);
    }
    Ok(Document {
        id: doc.id,
        sentences,
        doc_label: doc.doc_label.clone(),
    })
}

/// Read a sentiment manifest: `doc_index<TAB>LABEL` per line.
pub fn read_doc_labels<R: BufRead>(reader: R) -> Result<Vec<(usize, String)>, CorpusError> {
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(index), Some(label), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CorpusError::Sidecar {
                line: i + 1,
                reason: "expected doc_index<TAB>LABEL".to_string(),
            });
        };
        let index = index.trim().parse().map_err(|_| CorpusError::Sidecar {
            line: i + 1,
            reason: format!("invalid document index {index:?}"),
        })?;
        let label = label.trim();
        if label.is_empty() || label.contains(KEY_SEPARATOR) {
            return Err(CorpusError::Sidecar {
                line: i + 1,
                reason: format!("invalid label {label:?}"),
            });
        }
        labels.push((index, label.to_uppercase()));
    }
    Ok(labels)
}

/// A labeled multi-token span within one sentence, `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    pub entity_label: String,
}

impl Span {
    pub fn new(sentence_index: usize, start: usize, end: usize, entity_label: impl Into<String>) -> Self {
        Span {
            sentence_index,
            start,
            end,
            entity_label: entity_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}..{})={}",
            self.sentence_index, self.start, self.end, self.entity_label
        )
    }
}

/// Read the span sidecar: `sentence_index<TAB>start<TAB>end<TAB>LABEL`.
pub fn read_spans<R: BufRead>(reader: R) -> Result<Vec<Span>, CorpusError> {
    let mut spans = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(CorpusError::Sidecar {
                line: i + 1,
                reason: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let number = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| CorpusError::Sidecar {
                line: i + 1,
                reason: format!("invalid number {s:?}"),
            })
        };
        spans.push(Span::new(
            number(fields[0])?,
            number(fields[1])?,
            number(fields[2])?,
            fields[3].trim().to_uppercase(),
        ));
    }
    Ok(spans)
}

/// Merge each span into a single token labeled with the span's entity label.
///
/// `sentence_index` is relative to `doc`.
pub fn merge_spans(doc: &Document, spans: &[Span], joiner: &str) -> Result<Document, CorpusError> {
    let mut by_sentence: Vec<Vec<&Span>> = vec![Vec::new(); doc.sentences.len()];
    for span in spans {
        let len = doc
            .sentences
            .get(span.sentence_index)
            .map(Vec::len)
            .unwrap_or(0);
        if span.start >= span.end || span.end > len {
            return Err(CorpusError::SpanOutOfRange {
                span: span.clone(),
                sentence: span.sentence_index,
                len,
            });
        }
        by_sentence[span.sentence_index].push(span);
    }

    let mut merged = Document {
        id: doc.id,
        sentences: Vec::with_capacity(doc.sentences.len()),
        doc_label: doc.doc_label.clone(),
    };
    for (sentence, mut spans) in doc.sentences.iter().zip(by_sentence) {
        spans.sort_by_key(|s| (s.start, s.end));
        for pair in spans.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(CorpusError::OverlappingSpans {
                    first: pair[0].clone(),
                    second: pair[1].clone(),
                });
            }
        }
        let mut out = Vec::with_capacity(sentence.len());
        let mut pos = 0;
        for span in spans {
            out.extend_from_slice(&sentence[pos..span.start]);
            let surface = sentence[span.start..span.end]
                .iter()
                .map(SenseToken::surface)
                .collect::<Vec<_>>()
                .join(joiner);
            out.push(SenseToken::new(surface, &span.entity_label)?);
            pos = span.end;
        }
        out.extend_from_slice(&sentence[pos..]);
        merged.sentences.push(out);
    }
    Ok(merged)
}

/// Apply spans whose `sentence_index` counts sentences across all documents.
pub fn merge_spans_global(
    documents: &[Document],
    spans: &[Span],
    joiner: &str,
) -> Result<Vec<Document>, CorpusError> {
    let mut offsets = Vec::with_capacity(documents.len());
    let mut total = 0;
    for doc in documents {
        offsets.push(total);
        total += doc.sentences.len();
    }
    let mut per_doc: Vec<Vec<Span>> = vec![Vec::new(); documents.len()];
    for span in spans {
        if span.sentence_index >= total {
            return Err(CorpusError::SpanOutOfRange {
                span: span.clone(),
                sentence: span.sentence_index,
                len: 0,
            });
        }
        let doc = offsets.partition_point(|&o| o <= span.sentence_index) - 1;
        let mut local = span.clone();
        local.sentence_index -= offsets[doc];
        per_doc[doc].push(local);
    }
    documents
        .iter()
        .zip(per_doc)
        .enumerate()
        .map(|(i, (doc, spans))| {
            merge_spans(doc, &spans, joiner).map_err(|err| match err {
                // Report global sentence indices back to the caller.
                CorpusError::SpanOutOfRange { mut span, len, .. } => {
                    span.sentence_index += offsets[i];
                    CorpusError::SpanOutOfRange {
                        sentence: span.sentence_index,
                        span,
                        len,
                    }
                }
                other => other,
            })
        })
        .collect()
}

/// Replace every label with the unlabeled label (single-sense baseline).
pub fn strip_labels(doc: &Document) -> Document {
    Document {
        id: doc.id,
        sentences: doc
            .sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| t.relabel(UNLABELED).expect("unlabeled label is valid"))
                    .collect()
            })
            .collect(),
        doc_label: doc.doc_label.clone(),
    }
}

/// Probability of keeping a token whose sense occurs `sense_frequency` times
/// among `total_tokens`, with subsampling threshold `threshold`.
///
/// `min(1, sqrt(t/f) + t/f)` with `f = sense_frequency / total_tokens`; a zero
/// threshold disables subsampling.
pub fn subsample_keep_prob(sense_frequency: u64, total_tokens: u64, threshold: f64) -> f64 {
    debug_assert!(sense_frequency >= 1 && total_tokens >= sense_frequency && threshold >= 0.0);
    if threshold <= 0.0 || sense_frequency == 0 {
        return 1.0;
    }
    let ratio = threshold / (sense_frequency as f64 / total_tokens as f64);
    (ratio.sqrt() + ratio).min(1.0)
}
