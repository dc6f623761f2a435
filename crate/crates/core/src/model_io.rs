//! Model serialization: word2vec text and binary formats (input vectors only)
//! and the native `.s2v` container (complete model).
//!
//! The native container starts with the magic bytes `S2V1` and a `u32`
//! format version, followed by sections of the form `tag: [u8; 4]`,
//! `length: u64`, `payload`. All integers and floats are little-endian.
//! Readers skip sections with unknown tags.

use std::io::{self, BufRead, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::trainer::{EmbeddingModel, Matrix, ModelKind, TrainConfig};
use crate::vocab::{VocabError, Vocabulary};

pub const NATIVE_MAGIC: &[u8; 4] = b"S2V1";
pub const NATIVE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid header {0:?}: expected \"vocab_size dim\"")]
    Header(String),

    #[error("row {row}: expected {expected} values, found {found}")]
    RowDimension {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },

    #[error("file ends early at byte {offset}: {context}")]
    Truncated { offset: u64, context: String },

    #[error("header announces {expected} rows but the file holds {found}")]
    RowCount { expected: usize, found: usize },

    #[error("cannot save an empty model")]
    EmptyModel,

    #[error("model contains non-finite values")]
    NonFinite,

    #[error("not a native model file (bad magic bytes){hint}")]
    NotNative { hint: &'static str },

    #[error("unsupported native format version {found}; this build reads version {supported}")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("native file is missing section {0}")]
    MissingSection(&'static str),

    #[error("corrupt native file: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Vocab(#[from] VocabError),
}

/// Header information of a stored model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelHeader {
    pub vocab_size: usize,
    pub dim: usize,
    pub format_version: u32,
    pub model_kind: ModelKind,
    /// Only stored by the native format.
    pub window: Option<usize>,
}

/// On-disk model formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelFormat {
    Text,
    Binary,
    Native,
}

impl ModelFormat {
    /// Guess from the file extension: `.txt`, `.bin`, `.s2v`.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "txt" | "vec" => Some(ModelFormat::Text),
            "bin" => Some(ModelFormat::Binary),
            "s2v" => Some(ModelFormat::Native),
            _ => None,
        }
    }
}

impl std::str::FromStr for ModelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "txt" | "text" => Ok(ModelFormat::Text),
            "bin" | "binary" => Ok(ModelFormat::Binary),
            "s2v" | "native" => Ok(ModelFormat::Native),
            other => Err(format!("unknown model format {other:?} (expected txt, bin or s2v)")),
        }
    }
}

fn check_saveable(model: &EmbeddingModel) -> Result<(), ModelIoError> {
    if model.is_empty() {
        return Err(ModelIoError::EmptyModel);
    }
    if !model.input().as_slice().iter().all(|v| v.is_finite()) {
        return Err(ModelIoError::NonFinite);
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, usize), ModelIoError> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(d), None) => match (n.parse(), d.parse()) {
            (Ok(n), Ok(d)) if d > 0 => Ok((n, d)),
            _ => Err(ModelIoError::Header(line.to_string())),
        },
        _ => Err(ModelIoError::Header(line.to_string())),
    }
}

/// Build a model holding only input vectors, with zero counts.
fn vectors_only(keys: Vec<String>, dim: usize, data: Vec<f32>) -> Result<EmbeddingModel, ModelIoError> {
    let rows = keys.len();
    let vocab = Vocabulary::from_counts(keys.into_iter().map(|k| (k, 0)))?;
    let config = TrainConfig {
        dim,
        ..Default::default()
    };
    Ok(EmbeddingModel::from_parts(
        vocab,
        config,
        Matrix::from_vec(rows, dim, data),
        Vec::new(),
    ))
}

/// word2vec text format: `vocab_size dim` header, then `key v1 .. vdim` rows
/// with shortest round-trip float formatting.
pub fn save_text<W: Write>(model: &EmbeddingModel, mut writer: W) -> Result<(), ModelIoError> {
    check_saveable(model)?;
    writeln!(writer, "{} {}", model.len(), model.dim())?;
    for (entry, row) in model.vocab().entries().iter().zip(model.input().iter_rows()) {
        writer.write_all(entry.key.as_bytes())?;
        for v in row {
            write!(writer, " {v}")?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_text<R: BufRead>(reader: R) -> Result<EmbeddingModel, ModelIoError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(ModelIoError::Header(String::new()))??;
    let (n, dim) = parse_header(&header)?;
    let mut keys = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap().to_string();
        let before = data.len();
        for value in parts {
            let v: f32 = value.parse().map_err(|_| ModelIoError::Row {
                row,
                reason: format!("invalid number {value:?}"),
            })?;
            data.push(v);
        }
        let found = data.len() - before;
        if found != dim {
            return Err(ModelIoError::RowDimension {
                row,
                expected: dim,
                found,
            });
        }
        keys.push(key);
    }
    if keys.len() != n {
        return Err(ModelIoError::RowCount {
            expected: n,
            found: keys.len(),
        });
    }
    vectors_only(keys, dim, data)
}

/// word2vec binary format: ASCII header, then per entry the key, a space,
/// `dim` little-endian `f32`s and a newline.
pub fn save_binary<W: Write>(model: &EmbeddingModel, mut writer: W) -> Result<(), ModelIoError> {
    check_saveable(model)?;
    write!(writer, "{} {}\n", model.len(), model.dim())?;
    for (entry, row) in model.vocab().entries().iter().zip(model.input().iter_rows()) {
        writer.write_all(entry.key.as_bytes())?;
        writer.write_all(b" ")?;
        for &v in row {
            writer.write_f32::<LittleEndian>(v)?;
        }
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Reader that tracks the byte offset for error messages.
struct Counting<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Read for Counting<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.offset += n as u64;
        Ok(n)
    }
}

impl<R: BufRead> BufRead for Counting<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        self.offset += amt as u64;
        self.inner.consume(amt)
    }
}

fn truncated(offset: u64, context: impl Into<String>) -> ModelIoError {
    ModelIoError::Truncated {
        offset,
        context: context.into(),
    }
}

pub fn load_binary<R: BufRead>(reader: R) -> Result<EmbeddingModel, ModelIoError> {
    let mut reader = Counting {
        inner: reader,
        offset: 0,
    };
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(truncated(reader.offset, "header"));
    }
    let header = String::from_utf8_lossy(&header).into_owned();
    let (n, dim) = parse_header(header.trim_end())?;

    let mut keys = Vec::with_capacity(n);
    let mut data = vec![0f32; n * dim];
    let mut key = Vec::new();
    for row in 0..n {
        key.clear();
        reader.read_until(b' ', &mut key)?;
        if key.last() != Some(&b' ') {
            return Err(truncated(reader.offset, format!("key of row {}", row + 1)));
        }
        key.pop();
        // Writers terminate each vector with a newline.
        while key.first() == Some(&b'\n') {
            key.remove(0);
        }
        let key = String::from_utf8(key.clone()).map_err(|_| ModelIoError::Row {
            row: row + 1,
            reason: "key is not UTF-8".into(),
        })?;
        if key.is_empty() {
            return Err(ModelIoError::Row {
                row: row + 1,
                reason: "empty key".into(),
            });
        }
        let start = reader.offset;
        reader
            .read_f32_into::<LittleEndian>(&mut data[row * dim..(row + 1) * dim])
            .map_err(|err| match err.kind() {
                io::ErrorKind::UnexpectedEof => truncated(
                    start,
                    format!("vector of row {} ({} bytes expected)", row + 1, 4 * dim),
                ),
                _ => err.into(),
            })?;
        keys.push(key);
    }
    vectors_only(keys, dim, data)
}

mod tags {
    pub const HEAD: &[u8; 4] = b"HEAD";
    pub const CONF: &[u8; 4] = b"CONF";
    pub const VOCB: &[u8; 4] = b"VOCB";
    pub const INPT: &[u8; 4] = b"INPT";
    pub const OUTP: &[u8; 4] = b"OUTP";
}

fn write_section<W: Write>(writer: &mut W, tag: &[u8; 4], payload: &[u8]) -> io::Result<()> {
    writer.write_all(tag)?;
    writer.write_u64::<LittleEndian>(payload.len() as u64)?;
    writer.write_all(payload)
}

fn matrix_bytes(matrix: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(matrix.as_slice().len() * 4);
    for &v in matrix.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Save the complete model: vocabulary with counts, input and output
/// matrices and the training configuration.
pub fn save_native<W: Write>(model: &EmbeddingModel, mut writer: W) -> Result<(), ModelIoError> {
    check_saveable(model)?;
    writer.write_all(NATIVE_MAGIC)?;
    writer.write_u32::<LittleEndian>(NATIVE_VERSION)?;

    let mut head = Vec::new();
    head.write_u64::<LittleEndian>(model.len() as u64)?;
    head.write_u64::<LittleEndian>(model.dim() as u64)?;
    head.write_u8(model.kind().to_byte())?;
    head.write_u32::<LittleEndian>(model.config().window as u32)?;
    head.write_u32::<LittleEndian>(model.outputs().len() as u32)?;
    write_section(&mut writer, tags::HEAD, &head)?;

    let conf = serde_json::to_vec(model.config()).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    write_section(&mut writer, tags::CONF, &conf)?;

    let mut vocab = Vec::new();
    for entry in model.vocab().entries() {
        vocab.write_u32::<LittleEndian>(entry.key.len() as u32)?;
        vocab.write_all(entry.key.as_bytes())?;
        vocab.write_u64::<LittleEndian>(entry.count)?;
    }
    write_section(&mut writer, tags::VOCB, &vocab)?;

    write_section(&mut writer, tags::INPT, &matrix_bytes(model.input()))?;
    for output in model.outputs() {
        write_section(&mut writer, tags::OUTP, &matrix_bytes(output))?;
    }
    writer.flush()?;
    Ok(())
}

fn read_matrix(payload: &[u8], rows: usize, cols: usize) -> Result<Matrix, ModelIoError> {
    if payload.len() != rows * cols * 4 {
        return Err(ModelIoError::Corrupt(format!(
            "matrix payload of {} bytes does not match {rows}x{cols}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Matrix::from_vec(rows, cols, data))
}

fn magic_hint(magic: &[u8]) -> &'static str {
    if magic.iter().all(|b| b.is_ascii_digit() || b.is_ascii_whitespace()) {
        "; this looks like a word2vec text or binary file, load it with the txt or bin format"
    } else {
        ""
    }
}

/// Read the header of a native file without loading the parameters.
pub fn read_native_header<R: Read>(reader: R) -> Result<ModelHeader, ModelIoError> {
    let model = load_native_impl(reader, true)?;
    Ok(model.1)
}

pub fn load_native<R: Read>(reader: R) -> Result<EmbeddingModel, ModelIoError> {
    load_native_impl(reader, false)?
        .0
        .ok_or(ModelIoError::MissingSection("INPT"))
}

fn load_native_impl<R: Read>(
    reader: R,
    header_only: bool,
) -> Result<(Option<EmbeddingModel>, ModelHeader), ModelIoError> {
    let mut reader = Counting {
        inner: io::BufReader::new(reader),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    reader
        .read_exact(&mut magic)
        .map_err(|_| ModelIoError::NotNative { hint: "" })?;
    if &magic != NATIVE_MAGIC {
        return Err(ModelIoError::NotNative {
            hint: magic_hint(&magic),
        });
    }
    let version = reader
        .read_u32::<LittleEndian>()
        .map_err(|_| truncated(reader.offset, "format version"))?;
    if version != NATIVE_VERSION {
        return Err(ModelIoError::UnsupportedVersion {
            found: version,
            supported: NATIVE_VERSION,
        });
    }

    let mut header: Option<(ModelHeader, usize)> = None;
    let mut config: Option<TrainConfig> = None;
    let mut counts: Option<Vec<(String, u64)>> = None;
    let mut input: Option<Matrix> = None;
    let mut outputs = Vec::new();

    loop {
        let mut tag = [0u8; 4];
        match reader.read_exact(&mut tag) {
            Ok(()) => {}
            Err(err) if err.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(err) => return Err(err.into()),
        }
        let len = reader
            .read_u64::<LittleEndian>()
            .map_err(|_| truncated(reader.offset, "section length"))?;
        let start = reader.offset;
        let mut payload = Vec::new();
        (&mut reader).take(len).read_to_end(&mut payload)?;
        if payload.len() as u64 != len {
            return Err(truncated(
                reader.offset,
                format!("section {} at byte {start}", String::from_utf8_lossy(&tag)),
            ));
        }

        match &tag {
            tags::HEAD => {
                let mut p = payload.as_slice();
                let corrupt = |_| ModelIoError::Corrupt("short HEAD section".into());
                let vocab_size = p.read_u64::<LittleEndian>().map_err(corrupt)? as usize;
                let dim = p.read_u64::<LittleEndian>().map_err(corrupt)? as usize;
                let kind = p.read_u8().map_err(corrupt)?;
                let window = p.read_u32::<LittleEndian>().map_err(corrupt)? as usize;
                let n_outputs = p.read_u32::<LittleEndian>().map_err(corrupt)? as usize;
                let model_kind = ModelKind::from_byte(kind)
                    .ok_or_else(|| ModelIoError::Corrupt(format!("unknown model kind {kind}")))?;
                header = Some((
                    ModelHeader {
                        vocab_size,
                        dim,
                        format_version: version,
                        model_kind,
                        window: Some(window),
                    },
                    n_outputs,
                ));
                if header_only {
                    return Ok((None, header.unwrap().0));
                }
            }
            tags::CONF => {
                config = Some(
                    serde_json::from_slice(&payload)
                        .map_err(|e| ModelIoError::Corrupt(format!("configuration: {e}")))?,
                );
            }
            tags::VOCB => {
                let mut p = payload.as_slice();
                let mut entries = Vec::new();
                while !p.is_empty() {
                    let corrupt = |_| ModelIoError::Corrupt("short VOCB section".into());
                    let len = p.read_u32::<LittleEndian>().map_err(corrupt)? as usize;
                    if p.len() < len {
                        return Err(ModelIoError::Corrupt("short VOCB section".into()));
                    }
                    let key = String::from_utf8(p[..len].to_vec())
                        .map_err(|_| ModelIoError::Corrupt("vocabulary key is not UTF-8".into()))?;
                    p = &p[len..];
                    let count = p.read_u64::<LittleEndian>().map_err(corrupt)?;
                    entries.push((key, count));
                }
                counts = Some(entries);
            }
            tags::INPT | tags::OUTP => {
                let (h, _) = header
                    .as_ref()
                    .ok_or(ModelIoError::MissingSection("HEAD"))?;
                let matrix = read_matrix(&payload, h.vocab_size, h.dim)?;
                if &tag == tags::INPT {
                    input = Some(matrix);
                } else {
                    outputs.push(matrix);
                }
            }
            _ => {}
        }
    }

    let (header, n_outputs) = header.ok_or(ModelIoError::MissingSection("HEAD"))?;
    let config = config.ok_or(ModelIoError::MissingSection("CONF"))?;
    let counts = counts.ok_or(ModelIoError::MissingSection("VOCB"))?;
    let input = input.ok_or(ModelIoError::MissingSection("INPT"))?;
    if counts.len() != header.vocab_size {
        return Err(ModelIoError::RowCount {
            expected: header.vocab_size,
            found: counts.len(),
        });
    }
    if outputs.len() != n_outputs {
        return Err(ModelIoError::Corrupt(format!(
            "expected {n_outputs} output matrices, found {}",
            outputs.len()
        )));
    }
    if config.dim != header.dim || config.model != header.model_kind {
        return Err(ModelIoError::Corrupt("configuration disagrees with header".into()));
    }
    let vocab = Vocabulary::from_counts(counts)?;
    Ok((
        Some(EmbeddingModel::from_parts(vocab, config, input, outputs)),
        header,
    ))
}

/// Load a model in the given format.
pub fn load<R: BufRead>(reader: R, format: ModelFormat) -> Result<EmbeddingModel, ModelIoError> {
    match format {
        ModelFormat::Text => load_text(reader),
        ModelFormat::Binary => load_binary(reader),
        ModelFormat::Native => load_native(reader),
    }
}

/// Save a model in the given format.
pub fn save<W: Write>(model: &EmbeddingModel, writer: W, format: ModelFormat) -> Result<(), ModelIoError> {
    match format {
        ModelFormat::Text => save_text(model, writer),
        ModelFormat::Binary => save_binary(model, writer),
        ModelFormat::Native => save_native(model, writer),
    }
}
