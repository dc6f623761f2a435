//! Command-line front end.
//!
//! Flags use word2vec's single-dash style (`-size 50`); the double-dash form
//! (`--size 50`) is accepted as well. Exit status: 0 success, 1 usage error,
//! 2 data or format error, 3 internal invariant violation.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{self, Document, LabelColumn, ReadOptions};
use crate::eval::{self, PlantedCorpusSpec, ReportMode};
use crate::model_io::{self, ModelFormat};
use crate::query::{Query, QueryEngine, QueryError};
use crate::trainer::{self, EmbeddingModel, ModelKind, TrainConfig, TrainError, TrainProgress};
use crate::vocab::Vocabulary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Data(err.to_string())
}

fn io_error(path: &str) -> impl Fn(io::Error) -> CliError + '_ {
    move |err| CliError::Data(format!("{path}: {err}"))
}

const USAGE: &str = "usage: sense2vec <command> [flags]

commands:
  convert      -tagged FILE | -conllu FILE [-label-column upos|xpos] [-spans FILE]
               [-sentiment FILE [-adj-label ADJ]] [-joiner _] [-fold-case] [-strip-labels]
               [-output FILE]
  train        -train FILE -output FILE [-size 500] [-window 10] [-negative 10]
               [-sample 1e-5] [-iter 3] [-min-count 10] [-alpha A] [-threads 1]
               [-seed 1] [-model cbow|sg|ssg] [-binary 0|1] [-format txt|bin|s2v]
               [-hs 0] [-cap N] [-dynamic-window 0|1] [-negative-power 0.75]
               [-save-vocab FILE] [-progress TOKENS]
  nn           SURFACE LABEL | KEY  -vectors FILE [-k 10] [-filter LABEL] [-format F]
  analogy      KEY_A KEY_B KEY_C -vectors FILE [-k 10] [-format F]
  senses       SURFACE -vectors FILE [-format F]
  table        SURFACE -vectors FILE [-k 10] [-format F]
  eval-gen     [-spec FILE] [-seed N] [-sentences N] [-output FILE]
               [-baseline-output FILE] [-write-spec FILE]
  eval-report  -vectors FILE [-spec FILE] [-k 10] [-baseline] [-tsv] [-format F]
  eval-probe   -sense FILE -baseline FILE [-spec FILE] [-seed 1]
";

/// Flag kinds accepted by a command.
#[derive(Clone, Copy, PartialEq)]
enum Arity {
    Value,
    Switch,
}

struct Args {
    positional: Vec<String>,
    flags: HashMap<String, Option<String>>,
}

impl Args {
    fn parse(argv: &[String], allowed: &[(&str, Arity)]) -> Result<Self, CliError> {
        let mut positional = Vec::new();
        let mut flags = HashMap::new();
        let mut iter = argv.iter();
        while let Some(arg) = iter.next() {
            let name = match arg.strip_prefix("--").or_else(|| arg.strip_prefix('-')) {
                Some(name) if !name.is_empty() && !name.starts_with(|c: char| c.is_ascii_digit()) => name,
                _ => {
                    positional.push(arg.clone());
                    continue;
                }
            };
            let arity = allowed
                .iter()
                .find(|(flag, _)| *flag == name)
                .map(|&(_, arity)| arity)
                .ok_or_else(|| CliError::Usage(format!("unknown flag -{name}")))?;
            let value = match arity {
                Arity::Switch => None,
                Arity::Value => Some(
                    iter.next()
                        .ok_or_else(|| CliError::Usage(format!("flag -{name} needs a value")))?
                        .clone(),
                ),
            };
            if flags.insert(name.to_string(), value).is_some() {
                return Err(CliError::Usage(format!("flag -{name} given more than once")));
            }
        }
        Ok(Args { positional, flags })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.flags.get(name).and_then(|v| v.as_deref())
    }

    fn has(&self, name: &str) -> bool {
        self.flags.contains_key(name)
    }

    fn required(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag -{name}")))
    }

    fn parsed<T: FromStr>(&self, name: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(name)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("invalid value {v:?} for -{name}: {e}")))
            })
            .transpose()
    }

    fn flag_bool(&self, name: &str) -> Result<Option<bool>, CliError> {
        match self.get(name) {
            None => Ok(None),
            Some("0") => Ok(Some(false)),
            Some("1") => Ok(Some(true)),
            Some(v) => Err(CliError::Usage(format!("-{name} takes 0 or 1, got {v:?}"))),
        }
    }

    fn positionals(&self, expected: usize, what: &str) -> Result<&[String], CliError> {
        if self.positional.len() != expected {
            return Err(CliError::Usage(format!(
                "expected {what}, got {} positional argument(s)",
                self.positional.len()
            )));
        }
        Ok(&self.positional)
    }
}

fn open(path: &str) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_error(path))
}

fn create(path: &str) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_error(path))
}

/// Run one command. Output goes to `stdout`, diagnostics to `stderr`.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(argv, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let _ = writeln!(stderr, "sense2vec: {}", err.message());
            if let CliError::Usage(_) = err {
                let _ = write!(stderr, "\n{USAGE}");
            }
            err.exit_code()
        }
    }
}

fn dispatch(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let Some((command, rest)) = argv.split_first() else {
        return Err(CliError::Usage("no command given".into()));
    };
    match command.as_str() {
        "convert" => convert(rest, out, err),
        "train" => train(rest, err),
        "nn" => nearest(rest, out),
        "analogy" => analogy(rest, out),
        "senses" => senses(rest, out),
        "table" => table(rest, out),
        "eval-gen" => eval_gen(rest, out),
        "eval-report" => eval_report(rest, out),
        "eval-probe" => eval_probe(rest, out),
        "help" | "-h" | "--help" => out
            .write_all(USAGE.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string())),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}

fn report_diagnostics(diagnostics: &[corpus::Diagnostic], source: &str, err: &mut dyn Write) {
    for d in diagnostics {
        let _ = writeln!(err, "{source}: {d}");
    }
    if !diagnostics.is_empty() {
        let _ = writeln!(err, "{source}: {} line(s) skipped", diagnostics.len());
    }
}

fn convert(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(
        argv,
        &[
            ("tagged", Arity::Value),
            ("conllu", Arity::Value),
            ("label-column", Arity::Value),
            ("spans", Arity::Value),
            ("sentiment", Arity::Value),
            ("adj-label", Arity::Value),
            ("joiner", Arity::Value),
            ("fold-case", Arity::Switch),
            ("strip-labels", Arity::Switch),
            ("output", Arity::Value),
        ],
    )?;
    args.positionals(0, "no positional arguments")?;
    let options = ReadOptions {
        fold_case: args.has("fold-case"),
    };
    if args.has("label-column") && !args.has("conllu") {
        return Err(CliError::Usage("-label-column only applies to -conllu input".into()));
    }
    if args.has("adj-label") && !args.has("sentiment") {
        return Err(CliError::Usage("-adj-label needs -sentiment".into()));
    }
    if args.has("strip-labels") && (args.has("sentiment") || args.has("spans")) {
        return Err(CliError::Usage("-strip-labels conflicts with -sentiment and -spans".into()));
    }
    let (outcome, source) = match (args.get("tagged"), args.get("conllu")) {
        (Some(path), None) => (corpus::read_tagged_text(open(path)?, options).map_err(data)?, path),
        (None, Some(path)) => {
            let column = args.parsed::<LabelColumn>("label-column")?.unwrap_or(LabelColumn::Upos);
            (corpus::read_conllu(open(path)?, column, options).map_err(data)?, path)
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("give only one of -tagged and -conllu".into())),
        (None, None) => return Err(CliError::Usage("one of -tagged or -conllu is required".into())),
    };
    report_diagnostics(&outcome.diagnostics, source, err);
    let mut documents = outcome.documents;

    if let Some(path) = args.get("sentiment") {
        let labels = corpus::read_doc_labels(open(path)?).map_err(|e| data(format!("{path}: {e}")))?;
        for (index, label) in labels {
            let doc = documents.get_mut(index).ok_or_else(|| {
                CliError::Data(format!("{path}: document {index} does not exist"))
            })?;
            doc.doc_label = Some(label);
        }
        let adj = args.get("adj-label").unwrap_or("ADJ");
        documents = documents
            .iter()
            .map(|d| corpus::label_adjectives_with_sentiment(d, adj))
            .collect::<Result<_, _>>()
            .map_err(data)?;
    }
    if let Some(path) = args.get("spans") {
        let spans = corpus::read_spans(open(path)?).map_err(|e| data(format!("{path}: {e}")))?;
        let joiner = args.get("joiner").unwrap_or("_");
        documents = corpus::merge_spans_global(&documents, &spans, joiner).map_err(data)?;
    }
    if args.has("strip-labels") {
        documents = documents.iter().map(corpus::strip_labels).collect();
    }

    match args.get("output") {
        Some(path) => corpus::write_tagged_text(&documents, create(path)?).map_err(io_error(path)),
        None => corpus::write_tagged_text(&documents, out).map_err(data),
    }
}

fn train_config(args: &Args) -> Result<TrainConfig, CliError> {
    if let Some(hs) = args.get("hs") {
        if hs != "0" {
            return Err(CliError::Usage(
                "hierarchical softmax not supported; use -hs 0 with -negative".into(),
            ));
        }
    }
    // -cap is accepted for compatibility and has no effect.
    let _ = args.parsed::<f64>("cap")?;

    let kind = args.parsed::<ModelKind>("model")?.unwrap_or(ModelKind::Cbow);
    let mut config = TrainConfig::for_kind(kind);
    if let Some(v) = args.parsed("size")? {
        config.dim = v;
    }
    if let Some(v) = args.parsed("window")? {
        config.window = v;
    }
    if let Some(v) = args.parsed("negative")? {
        config.negatives = v;
    }
    if let Some(v) = args.parsed("sample")? {
        config.sample = v;
    }
    if let Some(v) = args.parsed("iter")? {
        config.epochs = v;
    }
    if let Some(v) = args.parsed("min-count")? {
        config.min_count = v;
    }
    if let Some(v) = args.parsed("alpha")? {
        config.alpha0 = v;
    }
    if let Some(v) = args.parsed("threads")? {
        config.workers = v;
    }
    if let Some(v) = args.parsed("seed")? {
        config.seed = v;
    }
    if let Some(v) = args.flag_bool("dynamic-window")? {
        config.dynamic_window = v;
    }
    if let Some(v) = args.parsed("negative-power")? {
        config.negative_power = v;
    }
    if let Some(v) = args.parsed("progress")? {
        config.progress_interval = v;
    }
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn output_format(args: &Args, path: &str) -> Result<ModelFormat, CliError> {
    let explicit = args.parsed::<ModelFormat>("format")?;
    let binary = args.flag_bool("binary")?;
    match (explicit, binary) {
        (Some(ModelFormat::Binary), Some(false)) | (Some(ModelFormat::Text | ModelFormat::Native), Some(true)) => {
            Err(CliError::Usage("-binary conflicts with -format".into()))
        }
        (Some(format), _) => Ok(format),
        (None, Some(true)) => Ok(ModelFormat::Binary),
        (None, Some(false)) => Ok(ModelFormat::Text),
        (None, None) => Ok(ModelFormat::from_path(Path::new(path)).unwrap_or(ModelFormat::Text)),
    }
}

fn train(argv: &[String], err: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(
        argv,
        &[
            ("train", Arity::Value),
            ("output", Arity::Value),
            ("size", Arity::Value),
            ("window", Arity::Value),
            ("negative", Arity::Value),
            ("sample", Arity::Value),
            ("iter", Arity::Value),
            ("min-count", Arity::Value),
            ("alpha", Arity::Value),
            ("threads", Arity::Value),
            ("seed", Arity::Value),
            ("model", Arity::Value),
            ("binary", Arity::Value),
            ("format", Arity::Value),
            ("hs", Arity::Value),
            ("cap", Arity::Value),
            ("dynamic-window", Arity::Value),
            ("negative-power", Arity::Value),
            ("save-vocab", Arity::Value),
            ("progress", Arity::Value),
            ("fold-case", Arity::Switch),
        ],
    )?;
    args.positionals(0, "no positional arguments")?;
    let config = train_config(&args)?;
    let input = args.required("train")?;
    let output = args.required("output")?;
    let format = output_format(&args, output)?;

    let outcome = corpus::read_tagged_text(
        open(input)?,
        ReadOptions {
            fold_case: args.has("fold-case"),
        },
    )
    .map_err(data)?;
    report_diagnostics(&outcome.diagnostics, input, err);
    let documents = outcome.documents;
    let vocab = Vocabulary::build(documents.iter().flat_map(Document::tokens), config.min_count).map_err(data)?;
    if let Some(path) = args.get("save-vocab") {
        vocab.write_dump(create(path)?).map_err(io_error(path))?;
    }
    let _ = writeln!(
        err,
        "vocabulary: {} senses, {} training tokens",
        vocab.len(),
        vocab.total_train_tokens()
    );

    // Progress lines are written straight to the process stderr so they
    // appear while training runs on worker threads.
    let report_progress = |p: TrainProgress| {
        let _ = writeln!(io::stderr().lock(), "{}", p.to_tsv());
    };
    let progress: Option<&(dyn Fn(TrainProgress) + Sync)> =
        if args.has("progress") { Some(&report_progress) } else { None };
    let result = trainer::train_with_progress(&documents, &vocab, &config, progress);
    let (model, report) = result.map_err(|e| match e {
        TrainError::InvalidConfig(m) => CliError::Usage(m),
        other => data(other),
    })?;
    if !model.is_finite() {
        return Err(CliError::Internal("training produced non-finite parameters".into()));
    }
    if report.unknown_tokens > 0 {
        let _ = writeln!(err, "skipped {} tokens below min-count", report.unknown_tokens);
    }
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        let _ = writeln!(err, "epoch {}\tloss {loss:.6}", epoch + 1);
    }
    model_io::save(&model, create(output)?, format).map_err(data)
}

fn load_model(args: &Args, flag: &str) -> Result<EmbeddingModel, CliError> {
    let path = args.required(flag)?;
    let format = match args.parsed::<ModelFormat>("format")? {
        Some(f) => Some(f),
        None => ModelFormat::from_path(Path::new(path)),
    };
    let with_path = |e: model_io::ModelIoError| CliError::Data(format!("{path}: {e}"));
    match format {
        Some(format) => model_io::load(open(path)?, format).map_err(with_path),
        None => {
            let mut bytes = Vec::new();
            open(path)?.read_to_end(&mut bytes).map_err(io_error(path))?;
            if bytes.starts_with(model_io::NATIVE_MAGIC) {
                model_io::load_native(bytes.as_slice()).map_err(with_path)
            } else {
                model_io::load_text(bytes.as_slice())
                    .or_else(|_| model_io::load_binary(bytes.as_slice()))
                    .map_err(with_path)
            }
        }
    }
}

fn query_error(e: QueryError) -> CliError {
    match e {
        QueryError::InvalidK => CliError::Usage(e.to_string()),
        other => data(other),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))
}

const QUERY_FLAGS: [(&str, Arity); 4] = [
    ("vectors", Arity::Value),
    ("format", Arity::Value),
    ("k", Arity::Value),
    ("filter", Arity::Value),
];

fn nearest(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(argv, &QUERY_FLAGS)?;
    let key = match args.positional.as_slice() {
        [key] => key.clone(),
        [surface, label] => corpus::sense_key(surface, &label.to_uppercase()),
        _ => return Err(CliError::Usage("nn takes SURFACE LABEL or a single KEY".into())),
    };
    let k = args.parsed("k")?.unwrap_or(10);
    let model = load_model(&args, "vectors")?;
    let engine = QueryEngine::new(&model);
    let filter = args.get("filter").map(str::to_uppercase);
    let result = engine
        .nearest(Query::Key(&key), k, filter.as_deref())
        .map_err(query_error)?;
    write_out(out, &result.to_tsv())
}

fn analogy(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(argv, &QUERY_FLAGS[..3])?;
    let keys = args.positionals(3, "three keys A B C")?;
    let k = args.parsed("k")?.unwrap_or(10);
    let model = load_model(&args, "vectors")?;
    let engine = QueryEngine::new(&model);
    let result = engine
        .analogy(&keys[0], &keys[1], &keys[2], k)
        .map_err(query_error)?;
    write_out(out, &result.to_tsv())
}

fn senses(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(argv, &QUERY_FLAGS[..2])?;
    let surface = &args.positionals(1, "a surface")?[0];
    let model = load_model(&args, "vectors")?;
    let senses = model.vocab().senses_of(surface);
    if senses.is_empty() {
        return Err(CliError::Data(format!("unknown surface {surface:?}")));
    }
    let text: String = senses
        .iter()
        .map(|e| format!("{}\t{}\n", e.key, e.count))
        .collect();
    write_out(out, &text)
}

fn table(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(argv, &QUERY_FLAGS[..3])?;
    let surface = &args.positionals(1, "a surface")?[0];
    let k = args.parsed("k")?.unwrap_or(10);
    let model = load_model(&args, "vectors")?;
    let engine = QueryEngine::new(&model);
    let table = engine.sense_table(surface, k).map_err(query_error)?;
    write_out(out, &table.to_table())
}

fn load_spec(args: &Args) -> Result<PlantedCorpusSpec, CliError> {
    match args.get("spec") {
        Some(path) => PlantedCorpusSpec::from_config(open(path)?).map_err(|e| data(format!("{path}: {e}"))),
        None => Ok(PlantedCorpusSpec::default()),
    }
}

fn eval_gen(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(
        argv,
        &[
            ("spec", Arity::Value),
            ("seed", Arity::Value),
            ("sentences", Arity::Value),
            ("output", Arity::Value),
            ("baseline-output", Arity::Value),
            ("write-spec", Arity::Value),
        ],
    )?;
    args.positionals(0, "no positional arguments")?;
    let mut spec = load_spec(&args)?;
    if let Some(seed) = args.parsed("seed")? {
        spec.seed = seed;
    }
    if let Some(n) = args.parsed("sentences")? {
        spec.sentences = n;
    }
    if let Some(path) = args.get("write-spec") {
        let mut w = create(path)?;
        w.write_all(spec.to_config().as_bytes()).map_err(io_error(path))?;
        w.flush().map_err(io_error(path))?;
    }
    let documents = eval::generate_planted_corpus(&spec).map_err(data)?;
    if let Some(path) = args.get("baseline-output") {
        let stripped: Vec<Document> = documents.iter().map(corpus::strip_labels).collect();
        corpus::write_tagged_text(&stripped, create(path)?).map_err(io_error(path))?;
    }
    match args.get("output") {
        Some(path) => corpus::write_tagged_text(&documents, create(path)?).map_err(io_error(path)),
        None if args.has("write-spec") || args.has("baseline-output") => Ok(()),
        None => corpus::write_tagged_text(&documents, out).map_err(data),
    }
}

fn eval_report(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(
        argv,
        &[
            ("vectors", Arity::Value),
            ("format", Arity::Value),
            ("spec", Arity::Value),
            ("k", Arity::Value),
            ("baseline", Arity::Switch),
            ("tsv", Arity::Switch),
        ],
    )?;
    args.positionals(0, "no positional arguments")?;
    let k = args.parsed("k")?.unwrap_or(10);
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let spec = load_spec(&args)?;
    let model = load_model(&args, "vectors")?;
    let mode = if args.has("baseline") {
        ReportMode::Baseline
    } else {
        ReportMode::Sense
    };
    let report = eval::separation_report(&model, &spec, k, mode);
    let text = if args.has("tsv") {
        report.to_tsv()
    } else {
        report.to_string()
    };
    write_out(out, &text)
}

fn eval_probe(argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let args = Args::parse(
        argv,
        &[
            ("sense", Arity::Value),
            ("baseline", Arity::Value),
            ("format", Arity::Value),
            ("spec", Arity::Value),
            ("seed", Arity::Value),
        ],
    )?;
    args.positionals(0, "no positional arguments")?;
    let spec = load_spec(&args)?;
    let seed = args.parsed("seed")?.unwrap_or(1);
    let sense = load_model(&args, "sense")?;
    let baseline = load_model(&args, "baseline")?;
    let result = eval::downstream_probe(&sense, &baseline, &spec, seed).map_err(data)?;
    let text = format!(
        "sense_accuracy\t{:.4}\nbaseline_accuracy\t{:.4}\nmajority_rate\t{:.4}\nerror_reduction\t{:.4}\n",
        result.sense_accuracy,
        result.baseline_accuracy,
        result.majority_rate,
        result.error_reduction()
    );
    write_out(out, &text)
}

/// Entry point for the binary: run with the process arguments and exit.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let argv: Vec<String> = args.into_iter().skip(1).collect();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(&argv, &mut out, &mut err);
    let _ = out.flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn run_str(s: &str) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&argv(s), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn hierarchical_softmax_rejected() {
        let (code, _, err) = run_str("train -train x.txt -output y.txt -hs 1");
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("hierarchical softmax not supported"));
    }

    #[test]
    fn unknown_and_duplicate_flags() {
        assert_eq!(run_str("train -bogus 1").0, EXIT_USAGE);
        assert_eq!(run_str("train -size 5 --size 6").0, EXIT_USAGE);
        assert_eq!(run_str("frobnicate").0, EXIT_USAGE);
        assert_eq!(run_str("").0, EXIT_USAGE);
    }

    #[test]
    fn conflicting_inputs_rejected() {
        let (code, _, err) = run_str("convert -tagged a.txt -conllu b.conllu");
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("only one"));
        assert_eq!(run_str("train -train a -output b.txt -binary 1 -format txt").0, EXIT_USAGE);
    }

    #[test]
    fn word2vec_style_flags_parse() {
        let args = Args::parse(
            &argv("-size 50 -window 5 -negative 10 -hs 0 -sample 1e-4 -iter 5 -cap 0 -model ssg"),
            &[
                ("size", Arity::Value),
                ("window", Arity::Value),
                ("negative", Arity::Value),
                ("hs", Arity::Value),
                ("sample", Arity::Value),
                ("iter", Arity::Value),
                ("cap", Arity::Value),
                ("model", Arity::Value),
            ],
        )
        .unwrap();
        let c = train_config(&args).unwrap();
        assert_eq!((c.dim, c.window, c.negatives, c.epochs), (50, 5, 10, 5));
        assert_eq!(c.sample, 1e-4);
        assert_eq!(c.model, ModelKind::StructuredSkipGram);
        assert!(!c.dynamic_window);
    }

    #[test]
    fn invalid_config_is_usage_error() {
        let (code, _, err) = run_str("train -train a -output b -iter 0");
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("epochs"));
    }

    #[test]
    fn missing_file_is_data_error() {
        let (code, _, err) = run_str("nn bank NOUN -vectors /nonexistent/model.txt");
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("/nonexistent/model.txt"));
    }

    #[test]
    fn help() {
        let (code, out, _) = run_str("help");
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("eval-probe"));
    }
}
