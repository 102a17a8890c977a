use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use gec_core::classifier::{load_model, Model};
use gec_core::datagen::read_dataset;
use gec_core::linguistics::ErrorType;
use gec_core::neural::OptimizerKind;
use tempfile::TempDir;

fn gec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run gec")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        stdout(o),
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(o)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Toy models and files from one `demo` run, shared by every test.
fn toy_dir() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let d = TempDir::new().unwrap();
        ok(&gec(&["demo", "--out-dir", "."], d.path()));
        d
    })
    .path()
}

#[test]
fn build_vocab_merges_files() {
    let d = TempDir::new().unwrap();
    write(d.path(), "a.txt", "the cat sat .\n");
    write(d.path(), "b.txt", "the dog sat .\nthe end\n");
    let out = ok(&gec(
        &["build-vocab", "a.txt", "b.txt", "-o", "v.txt"],
        d.path(),
    ));
    assert!(out.contains("capacity 40000"), "{out}");
    assert!(out.contains("6 distinct tokens"), "{out}");
    let vocab = fs::read_to_string(d.path().join("v.txt")).unwrap();
    let words: Vec<&str> = vocab.lines().collect();
    // the: 3, sat: 2, .: 2, then singletons alphabetically
    assert_eq!(
        words,
        ["<unk>", "<bos>", "<eos>", "the", ".", "sat", "cat", "dog", "end"]
    );
}

#[test]
fn build_vocab_missing_file_exits_2() {
    let d = TempDir::new().unwrap();
    let o = gec(&["build-vocab", "nope.txt", "-o", "v.txt"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.txt"));
}

#[test]
fn usage_errors_exit_2() {
    let d = TempDir::new().unwrap();
    assert_eq!(gec(&["train"], d.path()).status.code(), Some(2));
    assert_eq!(
        gec(
            &["generate", "x", "--vocab", "v", "-t", "spelling", "-o", "o"],
            d.path()
        )
        .status
        .code(),
        Some(2)
    );
}

fn histogram(out: &str) -> Vec<(String, u64)> {
    out.lines()
        .filter(|l| l.starts_with("  "))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn generate_histogram_matches_hand_count() {
    let d = TempDir::new().unwrap();
    let corpus = "she eats an apple .\nthey like the dogs .\nthe man walks and the women walk .\n";
    write(d.path(), "c.txt", corpus);
    ok(&gec(&["build-vocab", "c.txt", "-o", "v.txt"], d.path()));
    let out = ok(&gec(
        &[
            "generate",
            "c.txt",
            "--vocab",
            "v.txt",
            "-t",
            "subj-agreement",
            "-o",
            "sa.gecd",
        ],
        d.path(),
    ));
    // eats, walks are 3sg; like, walk are not
    assert_eq!(
        histogram(&out),
        [("non-3sg".to_string(), 2), ("3sg".to_string(), 2)]
    );
    let ds = read_dataset(fs::File::open(d.path().join("sa.gecd")).unwrap()).unwrap();
    assert_eq!(ds.header.class_counts, [2, 2]);
}

#[test]
fn generate_reads_tagged_input() {
    let d = TempDir::new().unwrap();
    write(d.path(), "v.txt", "<unk>\n<bos>\n<eos>\n");
    // "run" tagged VBZ here would not reconstruct, so it is dropped
    let tagged =
        "he\tPRP\nruns\tVBZ\n.\t.\n\nthey\tPRP\nrun\tVBP\n.\t.\n\nit\tPRP\nrun\tVBZ\n.\t.\n";
    write(d.path(), "t.txt", tagged);
    let out = ok(&gec(
        &[
            "generate",
            "t.txt",
            "--tagged",
            "--vocab",
            "v.txt",
            "-t",
            "subj-agreement",
            "-o",
            "o.gecd",
        ],
        d.path(),
    ));
    assert_eq!(
        histogram(&out),
        [("non-3sg".to_string(), 1), ("3sg".to_string(), 1)]
    );
    assert!(out.contains("1 inconsistent"), "{out}");
}

#[test]
fn generate_empty_corpus_writes_empty_dataset() {
    let d = TempDir::new().unwrap();
    write(d.path(), "empty.txt", "");
    write(d.path(), "v.txt", "<unk>\n<bos>\n<eos>\n");
    let o = gec(
        &[
            "generate",
            "empty.txt",
            "--vocab",
            "v.txt",
            "-t",
            "article",
            "-o",
            "e.gecd",
        ],
        d.path(),
    );
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
    let ds = read_dataset(fs::File::open(d.path().join("e.gecd")).unwrap()).unwrap();
    assert!(ds.examples.is_empty());
}

/// A small noun-number dataset and its vocabulary.
fn nn_fixture(d: &Path) {
    let corpus = "the dogs bark .\na cat sleeps .\nmany birds sing .\nthis boy runs .\n";
    write(d, "c.txt", corpus);
    ok(&gec(&["build-vocab", "c.txt", "-o", "v.txt"], d));
    ok(&gec(
        &[
            "generate",
            "c.txt",
            "--vocab",
            "v.txt",
            "-t",
            "noun-number",
            "-o",
            "nn.gecd",
        ],
        d,
    ));
}

#[test]
fn train_uses_table_defaults() {
    let d = TempDir::new().unwrap();
    nn_fixture(d.path());
    let out = ok(&gec(
        &[
            "train",
            "--dataset",
            "nn.gecd",
            "--vocab",
            "v.txt",
            "--error-type",
            "noun-number",
            "-o",
            "nn.gecm",
        ],
        d.path(),
    ));
    assert!(out.contains("noun-number"), "{out}");
    let m = load_model(&d.path().join("nn.gecm"), None, false).unwrap();
    assert_eq!(m.config.optimizer, OptimizerKind::adam(0.001));
    assert_eq!(m.config.gru_hidden, 256);
    assert_eq!(m.config.embedding_dim, 300);
    assert_eq!(m.config.mlp_hidden, 512);
    assert_eq!(m.config.threshold, 0.9);
    let metrics = fs::read_to_string(d.path().join("nn.gecm.metrics.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(metrics.lines().next().unwrap()).unwrap();
    assert_eq!(first["epoch"], 1);
}

#[test]
fn train_with_same_seed_is_reproducible() {
    let d = TempDir::new().unwrap();
    nn_fixture(d.path());
    let small = [
        "--embedding-dim",
        "8",
        "--gru-hidden",
        "8",
        "--mlp-hidden",
        "8",
        "--epochs",
        "3",
        "--seed",
        "7",
    ];
    for out in ["a.gecm", "b.gecm"] {
        let mut args = vec![
            "train",
            "--dataset",
            "nn.gecd",
            "--vocab",
            "v.txt",
            "-o",
            out,
        ];
        args.extend(small);
        ok(&gec(&args, d.path()));
    }
    assert_eq!(
        fs::read(d.path().join("a.gecm")).unwrap(),
        fs::read(d.path().join("b.gecm")).unwrap()
    );
}

#[test]
fn train_zero_epochs_writes_initial_model() {
    let d = TempDir::new().unwrap();
    nn_fixture(d.path());
    let args = [
        "train",
        "--dataset",
        "nn.gecd",
        "--vocab",
        "v.txt",
        "-o",
        "z.gecm",
        "--epochs",
        "0",
        "--gru-hidden",
        "4",
        "--embedding-dim",
        "4",
        "--mlp-hidden",
        "4",
    ];
    ok(&gec(&args, d.path()));
    let m = load_model(&d.path().join("z.gecm"), None, false).unwrap();
    let fresh = Model::new(m.config.clone(), m.vocab_size(), m.vocab_fingerprint).unwrap();
    assert_eq!(m, fresh);
}

#[test]
fn train_rejects_mismatched_type_and_vocab() {
    let d = TempDir::new().unwrap();
    nn_fixture(d.path());
    let o = gec(
        &[
            "train",
            "--dataset",
            "nn.gecd",
            "--vocab",
            "v.txt",
            "-t",
            "article",
            "-o",
            "x.gecm",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    write(d.path(), "other.txt", "<unk>\n<bos>\n<eos>\nzebra\n");
    let o = gec(
        &[
            "train",
            "--dataset",
            "nn.gecd",
            "--vocab",
            "other.txt",
            "-o",
            "x.gecm",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_help_lists_table_defaults() {
    let d = TempDir::new().unwrap();
    let help = ok(&gec(&["train", "--help"], d.path()));
    for needle in [
        "0.08",
        "0.001",
        "128",
        "256",
        "300",
        "512",
        "32",
        "20",
        "0.85",
        "0.9",
        "20170731",
        "--patience",
    ] {
        assert!(help.contains(needle), "help lacks {needle}:\n{help}");
    }
}

#[test]
fn correct_requires_every_checkpoint_unless_restricted() {
    let dir = toy_dir();
    let o = gec(
        &[
            "correct",
            "corrupted.txt",
            "--vocab",
            "vocab.txt",
            "--model-dir",
            ".",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("article"));
}

#[test]
fn correct_runs_only_selected_types() {
    let dir = toy_dir();
    let out = TempDir::new().unwrap();
    let edits = out.path().join("e.tsv");
    ok(&gec(
        &[
            "correct",
            "corrupted.txt",
            "--vocab",
            "vocab.txt",
            "--model-dir",
            ".",
            "--types",
            "subj-agreement",
            "--edits-out",
            edits.to_str().unwrap(),
            "-o",
            out.path().join("c.txt").to_str().unwrap(),
        ],
        dir,
    ));
    let text = fs::read_to_string(&edits).unwrap();
    assert!(!text.is_empty());
    assert!(
        text.lines()
            .all(|l| l.split('\t').nth(3) == Some("subj-agreement")),
        "{text}"
    );
    let corrected = fs::read_to_string(out.path().join("c.txt")).unwrap();
    let input = fs::read_to_string(dir.join("corrupted.txt")).unwrap();
    assert_eq!(corrected.lines().count(), input.lines().count());
}

#[test]
fn correct_threshold_override() {
    let dir = toy_dir();
    let run = |extra: &[&str]| {
        let mut args = vec![
            "correct",
            "corrupted.txt",
            "--vocab",
            "vocab.txt",
            "--model",
            "noun-number=noun-number.gecm",
            "--types",
            "noun-number",
            "--diff",
        ];
        args.extend(extra);
        ok(&gec(&args, dir)).lines().count()
    };
    let default = run(&[]);
    assert!(default > 0);
    assert_eq!(run(&["--threshold", "noun-number=1.0"]), 0);
    let o = gec(
        &[
            "correct",
            "corrupted.txt",
            "--vocab",
            "vocab.txt",
            "--threshold",
            "article=1.5",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn correct_table_fixture_with_toy_models() {
    let dir = toy_dir();
    let d = TempDir::new().unwrap();
    let input = write(
        d.path(),
        "in.txt",
        "then how does car come into being ...\n\
         especially for the young people without marriage\n\
         for the case of marriage, people should be honest.\n\
         ... negative impacts to the family\n\
         he might end up dishearten his family.\n\
         it will just adding on their misery.\n\
         ... be honest with his or her feeling.\n\
         ... after realising his or her conditions.\n\
         the popularity of social media sites have made ...\n\
         these skills are important to know, but is difficult ...\n",
    );
    let edits = d.path().join("e.tsv");
    ok(&gec(
        &[
            "correct",
            input.to_str().unwrap(),
            "--vocab",
            "vocab.txt",
            "--model-dir",
            ".",
            "--types",
            "subj-agreement,noun-number",
            "--edits-out",
            edits.to_str().unwrap(),
        ],
        dir,
    ));
    assert!(!fs::read_to_string(edits).unwrap().is_empty());
}

#[test]
fn evaluate_demo_output() {
    let dir = toy_dir();
    let by_text = ok(&gec(
        &[
            "evaluate",
            "--gold",
            "gold.m2",
            "--corrected",
            "corrected.txt",
        ],
        dir,
    ));
    let by_edits = ok(&gec(
        &["evaluate", "--gold", "gold.m2", "--edits", "edits.tsv"],
        dir,
    ));
    assert!(by_text.starts_with("overall"));
    assert_eq!(by_text.lines().next(), by_edits.lines().next());
}

#[test]
fn evaluate_perfect_system() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "gold.m2",
        "S he go home .\nA 1 2|||SVA|||goes\n\nS fine .\n\n",
    );
    write(d.path(), "sys.txt", "he goes home .\nfine .\n");
    let out = ok(&gec(
        &["evaluate", "--gold", "gold.m2", "--corrected", "sys.txt"],
        d.path(),
    ));
    assert!(
        out.lines()
            .next()
            .unwrap()
            .contains("P 1.0000 R 1.0000 F0.5 1.0000"),
        "{out}"
    );
    assert!(out.contains("subj-agreement"), "{out}");
}

#[test]
fn evaluate_hand_counted_fixture() {
    let d = TempDir::new().unwrap();
    // gold: two edits; system: one matching, one spurious
    write(
        d.path(),
        "gold.m2",
        "S a b c d\nA 0 1|||ArtOrDet|||the\nA 2 3|||Prep|||in\n\n",
    );
    write(d.path(), "sys.txt", "the b c x\n");
    let out = ok(&gec(
        &["evaluate", "--gold", "gold.m2", "--corrected", "sys.txt"],
        d.path(),
    ));
    let first = out.lines().next().unwrap();
    assert!(first.contains("P 0.5000 R 0.5000 F0.5 0.5000"), "{out}");
    assert!(first.contains("tp 1, fp 1, fn 1"), "{out}");
}

#[test]
fn evaluate_reported_precision_recall() {
    // 224 hits, 161 spurious edits, 722 misses: P 0.5818, R 0.2368
    let d = TempDir::new().unwrap();
    let mut gold = String::new();
    let mut sys = String::new();
    for i in 0..(224 + 161 + 722) {
        gold.push_str("S x y\n");
        if !(224..224 + 161).contains(&i) {
            gold.push_str("A 0 1|||Nn|||z\n");
        }
        gold.push('\n');
        sys.push_str(if i < 224 + 161 { "z y\n" } else { "x y\n" });
    }
    write(d.path(), "gold.m2", &gold);
    write(d.path(), "sys.txt", &sys);
    let out = ok(&gec(
        &["evaluate", "--gold", "gold.m2", "--corrected", "sys.txt"],
        d.path(),
    ));
    assert!(
        out.lines()
            .next()
            .unwrap()
            .contains("P 0.5818 R 0.2368 F0.5 0.4505"),
        "{out}"
    );
}

#[test]
fn evaluate_count_mismatch_exits_2() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gold.m2", "S a\n\nS b\n\n");
    write(d.path(), "sys.txt", "a\n");
    let o = gec(
        &["evaluate", "--gold", "gold.m2", "--corrected", "sys.txt"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn demo_writes_all_artifacts() {
    let dir = toy_dir();
    for f in ["vocab.txt", "corpus.txt", "gold.m2", "corrected.txt"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    for t in [ErrorType::SubjAgreement, ErrorType::NounNumber] {
        assert!(dir.join(format!("{t}.gecm")).is_file());
        assert!(dir.join(format!("{t}.gecd")).is_file());
    }
}
