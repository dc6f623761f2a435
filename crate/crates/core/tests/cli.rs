use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sense2vec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const CORPUS: &str = "\
the|DET bank|NOUN approved|VERB the|DET loan|NOUN
we|PRON bank|VERB on|ADP the|DET river|NOUN
the|DET river|NOUN bank|NOUN was|AUX muddy|ADJ
they|PRON bank|VERB at|ADP the|DET old|ADJ bank|NOUN
";

fn trained_model(dir: &Path) {
    fs::write(dir.join("corpus.txt"), CORPUS.repeat(20)).unwrap();
    let o = run(
        &[
            "train", "-train", "corpus.txt", "-output", "model.txt", "-size", "12", "-window", "2",
            "-negative", "3", "-sample", "0", "-iter", "3", "-min-count", "1", "-model", "sg",
            "-save-vocab", "vocab.tsv",
        ],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn train_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    trained_model(d);

    let header = fs::read_to_string(d.join("model.txt")).unwrap();
    let first = header.lines().next().unwrap();
    assert_eq!(first, "13 12");
    let vocab = fs::read_to_string(d.join("vocab.tsv")).unwrap();
    assert!(vocab.starts_with("the|DET\t"));

    let o = run(&["nn", "bank", "NOUN", "-vectors", "model.txt", "-k", "5"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    for line in out.lines() {
        let (key, sim) = line.split_once('\t').unwrap();
        assert_ne!(key, "bank|NOUN");
        let sim: f32 = sim.parse().unwrap();
        assert!((-1.0..=1.0).contains(&sim));
    }

    let o = run(&["nn", "bank|VERB", "-vectors", "model.txt", "-k", "3", "-filter", "noun"], d);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.split('\t').next().unwrap().ends_with("|NOUN")));

    let o = run(&["senses", "bank", "-vectors", "model.txt"], d);
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = run(&["table", "bank", "-vectors", "model.txt", "-k", "3"], d);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().next().unwrap().contains("bank|NOUN\t1.0"));

    let o = run(&["analogy", "bank|NOUN", "loan|NOUN", "river|NOUN", "-vectors", "model.txt", "-k", "2"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn formats_and_extension_sniffing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("corpus.txt"), CORPUS.repeat(10)).unwrap();
    for (out, extra) in [("m.bin", vec![]), ("m.s2v", vec![]), ("m.vectors", vec!["-binary", "1"])] {
        let mut args = vec!["train", "-train", "corpus.txt", "-output", out, "-size", "8", "-min-count", "1", "-iter", "1"];
        args.extend(extra);
        let o = run(&args, d);
        assert!(o.status.success(), "{out}: {}", stderr(&o));
        let o = run(&["nn", "bank", "NOUN", "-vectors", out, "-k", "2"], d);
        assert!(o.status.success(), "{out}: {}", stderr(&o));
        assert_eq!(stdout(&o).lines().count(), 2);
    }
    let bytes = fs::read(d.join("m.s2v")).unwrap();
    assert_eq!(&bytes[..4], b"S2V1");
    let bin = fs::read(d.join("m.bin")).unwrap();
    assert_eq!(fs::read(d.join("m.vectors")).unwrap(), bin);
    let o = run(&["nn", "bank", "NOUN", "-vectors", "m.bin", "-format", "s2v"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("corpus.txt"), CORPUS).unwrap();

    let o = run(&["train", "-train", "corpus.txt", "-output", "m.txt", "-hs", "1"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("hierarchical softmax not supported"));

    let o = run(&["train", "-train", "corpus.txt", "-output", "m.txt", "-model", "glove"], d);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["train", "-train", "missing.txt", "-output", "m.txt"], d);
    assert_eq!(o.status.code(), Some(2));

    // default min-count 10 prunes everything in this tiny corpus
    let o = run(&["train", "-train", "corpus.txt", "-output", "m.txt"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("min"), "{}", stderr(&o));

    fs::write(d.join("bad.txt"), "2 3\na|X 1 2 3\nb|X 1 2\n").unwrap();
    let o = run(&["nn", "a", "X", "-vectors", "bad.txt"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"));

    fs::write(d.join("ok.txt"), "2 2\na|X 1 0\nb|X 0 1\n").unwrap();
    let o = run(&["nn", "a", "Y", "-vectors", "ok.txt"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a|X"), "{}", stderr(&o));
    let o = run(&["nn", "a", "X", "-vectors", "ok.txt", "-k", "0"], d);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&[], d);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["help"], d);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn progress_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("corpus.txt"), CORPUS.repeat(20)).unwrap();
    let o = run(
        &["train", "-train", "corpus.txt", "-output", "m.txt", "-size", "4", "-min-count", "1", "-progress", "50"],
        d,
    );
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let progress: Vec<String> = stderr(&o)
        .lines()
        .filter(|l| l.split('\t').count() == 3 && l.split('\t').all(|f| f.parse::<f64>().is_ok()))
        .map(String::from)
        .collect();
    assert!(progress.len() >= 5, "{}", stderr(&o));
}

#[test]
fn convert_pipelines() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("in.conllu"),
        "# newdoc id = a\n# text = George Washington slept.\n\
         1\tGeorge\tGeorge\tPROPN\tNNP\t_\t3\tnsubj\t_\t_\n\
         2\tWashington\tWashington\tPROPN\tNNP\t_\t1\tflat\t_\t_\n\
         3\tslept\tsleep\tVERB\tVBD\t_\t0\troot\t_\t_\n\n\
         # newdoc id = b\n\
         1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
         1\tdo\tdo\tAUX\tVBP\t_\t3\taux\t_\t_\n\
         2\tn't\tnot\tPART\tRB\t_\t3\tadvmod\t_\t_\n\
         3\tgo\tgo\tVERB\tVB\t_\t0\troot\t_\t_\n\
         4\tbad\tbad\tADJ\tJJ\t_\t3\txcomp\t_\t_\n\n",
    )
    .unwrap();
    fs::write(d.join("spans.tsv"), "0\t0\t2\tPERSON_NAME\n").unwrap();
    fs::write(d.join("sentiment.tsv"), "0\tPOS\n1\tNEG\n").unwrap();

    let o = run(&["convert", "-conllu", "in.conllu", "-spans", "spans.tsv", "-sentiment", "sentiment.tsv"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "George_Washington|PERSON_NAME slept|VERB\n\ndo|AUX n't|PART go|VERB bad|NEG\n"
    );

    let o = run(&["convert", "-conllu", "in.conllu", "-label-column", "xpos", "-output", "x.txt"], d);
    assert!(o.status.success());
    assert!(fs::read_to_string(d.join("x.txt")).unwrap().starts_with("George|NNP Washington|NNP"));

    let o = run(&["convert", "-tagged", "x.txt", "-strip-labels"], d);
    assert!(stdout(&o).starts_with("George|WORD Washington|WORD slept|WORD\n"));

    let o = run(&["convert", "-tagged", "x.txt", "-conllu", "in.conllu"], d);
    assert_eq!(o.status.code(), Some(1));
    fs::write(d.join("overlap.tsv"), "0\t0\t2\tA\n0\t1\t3\tB\n").unwrap();
    let o = run(&["convert", "-conllu", "in.conllu", "-spans", "overlap.tsv"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_commands_on_small_planted_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(
        &["eval-gen", "-sentences", "3000", "-output", "p.txt", "-baseline-output", "b.txt", "-write-spec", "spec.cfg"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let planted = fs::read_to_string(d.join("p.txt")).unwrap();
    assert!(planted.contains("bank|NOUN") && planted.contains("light|ADJ"));
    let baseline = fs::read_to_string(d.join("b.txt")).unwrap();
    assert!(baseline.split_whitespace().all(|t| t.ends_with("|WORD")));
    let train = |input: &str, output: &str| {
        let o = run(
            &["train", "-train", input, "-output", output, "-size", "20", "-window", "5", "-negative", "5",
              "-sample", "1e-3", "-iter", "2", "-min-count", "1", "-model", "ssg"],
            d,
        );
        assert!(o.status.success(), "{}", stderr(&o));
    };
    train("p.txt", "p.s2v");
    train("b.txt", "b.s2v");
    let o = run(&["eval-report", "-vectors", "p.s2v", "-spec", "spec.cfg", "-tsv"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("bank\tsense\tNOUN\tbank|NOUN\t")));
    let o = run(&["eval-report", "-vectors", "b.s2v", "-baseline"], d);
    assert!(o.status.success());
    assert!(stdout(&o).contains("baseline"));
    let o = run(&["eval-probe", "-sense", "p.s2v", "-baseline", "b.s2v", "-spec", "spec.cfg"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("sense_accuracy\t"));
}
