use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sylgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sylgen")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn opening() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/pan_tadeusz_opening.txt")
}

fn train_small(dir: &Path, extra: &[&str]) -> PathBuf {
    let run = dir.join("run");
    let (corpus, out_dir) = (opening(), run.clone());
    let mut args = vec![
        "train", p(&corpus), "--out", p(&out_dir), "--epochs", "2", "--hidden", "16",
        "--layers", "1", "--chunk-len", "50", "--seed", "4",
    ];
    args.extend_from_slice(extra);
    let refs = args;
    let out = sylgen(&refs);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    run
}

#[test]
fn tokenize_detokenize_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["subword", "char"] {
        let toks = dir.path().join(format!("{mode}.tok"));
        let back = dir.path().join(format!("{mode}.txt"));
        let a = sylgen(&["tokenize", p(&opening()), "--mode", mode, "--out", p(&toks)]);
        assert!(a.status.success());
        let b = sylgen(&["detokenize", p(&toks), "--out", p(&back)]);
        assert!(b.status.success());
        assert_eq!(std::fs::read(&back).unwrap(), std::fs::read(opening()).unwrap());
    }
}

#[test]
fn tokenize_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.txt");
    std::fs::write(&f, "Litwo!\n").unwrap();
    let out = sylgen(&["tokenize", p(&f)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "_cap_ li++ --two ! _eol_\n");
}

#[test]
fn usage_errors_exit_two() {
    let missing = sylgen(&["tokenize", "/nonexistent/file.txt"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
    assert_eq!(sylgen(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sylgen(&["tokenize", p(&opening()), "--mode", "bytes"]).status.code(), Some(2));
    assert_eq!(sylgen(&["--help"]).status.code(), Some(0));
}

#[test]
fn short_corpus_suggests_smaller_chunks() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("tiny.txt");
    std::fs::write(&f, "ala ma kota\n").unwrap();
    let out = sylgen(&["train", p(&f), "--out", p(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--chunk-len"));
}

#[test]
fn train_generate_inspect_eval() {
    let dir = tempfile::tempdir().unwrap();
    let run = train_small(dir.path(), &[]);
    for f in ["model.ckpt", "loss.tsv", "bad_words.tsv", "report.txt", "sample_T0.8.txt"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let ck = run.join("model.ckpt");

    let g = sylgen(&["generate", p(&ck), "--length", "30"]);
    assert!(g.status.success());
    assert!(String::from_utf8(g.stdout).unwrap().starts_with("Litwo! Ojczyzno moja!"));

    let a = sylgen(&["generate", p(&ck), "--argmax", "--prime", "Panno święta", "--length", "20"]);
    assert!(String::from_utf8(a.stdout).unwrap().starts_with("Panno święta"));

    let i = String::from_utf8(sylgen(&["inspect-checkpoint", p(&ck)]).stdout).unwrap();
    assert!(i.contains("hidden_size=16\n") && i.contains("n_layers=1\n") && i.contains("mode=subword\n"));

    let e = sylgen(&["eval", p(&ck), p(&opening()), "--chunk-len", "50"]);
    assert!(e.status.success());
    assert!(String::from_utf8(e.stdout).unwrap().contains("corpus_loss="));

    let bad_t = sylgen(&["generate", p(&ck), "-t", "0"]);
    assert_eq!(bad_t.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small\nhidden = 12\nlayers = 2\nepochs = 1\n").unwrap();
    let run = train_small(dir.path(), &["--config", p(&cfg)]);
    let i = String::from_utf8(sylgen(&["inspect-checkpoint", p(&run.join("model.ckpt"))]).stdout).unwrap();
    assert!(i.contains("hidden_size=16\n"), "{i}");
    assert!(i.contains("n_layers=1\n"));

    let run2 = dir.path().join("run2");
    let out = sylgen(&[
        "train", p(&opening()), "--config", p(&cfg), "--chunk-len", "50", "--out", p(&run2),
    ]);
    assert!(out.status.success());
    let i = String::from_utf8(sylgen(&["inspect-checkpoint", p(&run2.join("model.ckpt"))]).stdout).unwrap();
    assert!(i.contains("hidden_size=12\n") && i.contains("n_layers=2\n") && i.contains("epochs=1\n"), "{i}");

    std::fs::write(&cfg, "hiden = 3\n").unwrap();
    let typo = sylgen(&["train", p(&opening()), "--config", p(&cfg)]);
    assert_eq!(typo.status.code(), Some(2));
}

#[test]
fn damaged_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = train_small(dir.path(), &[]);
    let bytes = std::fs::read(run.join("model.ckpt")).unwrap();
    let cases: Vec<(&str, Vec<u8>, &str)> = vec![
        ("magic", { let mut b = bytes.clone(); b[0] ^= 1; b }, "magic"),
        ("trunc", bytes[..bytes.len() / 2].to_vec(), "truncated"),
        ("flip", { let mut b = bytes.clone(); let n = b.len(); b[n - 40] ^= 0x10; b }, "checksum"),
    ];
    for (name, data, needle) in cases {
        let f = dir.path().join(name);
        std::fs::write(&f, data).unwrap();
        let out = sylgen(&["inspect-checkpoint", p(&f)]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr).to_lowercase();
        assert!(err.contains(needle), "{name}: {err}");
    }
}
