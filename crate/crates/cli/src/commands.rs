use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use sylgen::corpus::chunk;
use sylgen::metrics::{BadWordsProbe, Lexicon};
use sylgen::nnet::{evaluate, ModelConfig, CHECKPOINT_VERSION};
use sylgen::sampler::{generate as sample, DecodeMode, GenerationConfig, DEFAULT_PRIME};
use sylgen::segmenter::{
    detokenize as render, format_stream, normalize, parse_stream, Mode, Segmenter,
    SegmenterConfig,
};

use crate::pipeline::{
    build_report, corpus_compression, load_checkpoint, mode_defaults, sample_length, scaled,
    sweep, train_corpus, with_newline, write_run, TrainSpec,
};
use crate::settings::{read_text, usage, write_text, CliResult, ConfigFile, UsageContext};
use crate::{Common, TrainArgs};

const DEFAULT_CHUNK_LEN: usize = 400;
const DEFAULT_SEED: u64 = 0;
const DEFAULT_LENGTH: usize = 200;
const DEFAULT_TEMPERATURE: f64 = 0.8;

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn mode_of(common: &Common, file: &ConfigFile) -> CliResult<Mode> {
    match common.mode.as_deref().or(file.raw("mode")) {
        None => Ok(Mode::SubWord),
        Some(m) => m.parse().or_usage("--mode"),
    }
}

fn segmenter_config(mode: Mode, file: &ConfigFile) -> CliResult<SegmenterConfig> {
    let mut cfg = SegmenterConfig::with_mode(mode);
    if let Some(n) = file.pick::<usize>(None, "min_core_vowels")? {
        cfg.min_core_vowels = n;
    }
    if let Some(list) = file.raw("prefixes") {
        cfg.prefixes = list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    cfg.validate().or_usage("segmenter configuration")?;
    Ok(cfg)
}

fn seed_of(common: &Common, file: &ConfigFile) -> CliResult<u64> {
    Ok(file.pick(common.seed, "seed")?.unwrap_or(DEFAULT_SEED))
}

fn train_spec(mode: Mode, common: &Common, args: &TrainArgs, file: &ConfigFile) -> CliResult<TrainSpec> {
    let (epochs, hidden, layers) = mode_defaults(mode);
    let scale = file.pick(args.scale, "scale")?.unwrap_or(1.0);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(usage(anyhow!("--scale must be positive, got {scale}")));
    }
    let defaults = ModelConfig::default();
    let model = ModelConfig {
        vocab_size: 1,
        hidden_size: scaled(file.pick(args.hidden, "hidden")?.unwrap_or(hidden), scale),
        n_layers: file.pick(args.layers, "layers")?.unwrap_or(layers),
        seed: seed_of(common, file)?,
        learning_rate: file
            .pick(args.learning_rate, "learning_rate")?
            .unwrap_or(defaults.learning_rate),
        grad_clip: file
            .pick(args.grad_clip, "grad_clip")?
            .unwrap_or(defaults.grad_clip),
        epochs: scaled(file.pick(args.epochs, "epochs")?.unwrap_or(epochs), scale),
    };
    model.validate().or_usage("model configuration")?;
    Ok(TrainSpec {
        model,
        segmenter: segmenter_config(mode, file)?,
        chunk_len: file
            .pick(args.chunk_len, "chunk_len")?
            .unwrap_or(DEFAULT_CHUNK_LEN),
        holdout: file.pick(args.holdout, "holdout")?.unwrap_or(0.0),
        probe_tokens: BadWordsProbe::TOKENS,
    })
}

pub fn tokenize(input: &Path, common: &Common) -> CliResult<()> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let cfg = segmenter_config(mode_of(common, &file)?, &file)?;
    let seg = Segmenter::new(cfg).or_usage("segmenter configuration")?;
    let text = normalize(&read_text(input)?);
    emit(common.out.as_deref(), &format_stream(&seg.tokenize(&text)))
}

pub fn detokenize(input: &Path, common: &Common) -> CliResult<()> {
    let tokens = parse_stream(&read_text(input)?).or_usage(format!("in {}", input.display()))?;
    emit(common.out.as_deref(), &render(&tokens))
}

fn holdout_line(loss: Option<f64>) -> String {
    loss.map_or(String::new(), |l| format!("holdout_loss={l:.6}\n"))
}

pub fn train(corpus: &Path, common: &Common, args: &TrainArgs) -> CliResult<()> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let mode = mode_of(common, &file)?;
    let spec = train_spec(mode, common, args, &file)?;
    let raw = read_text(corpus)?;
    let trained = train_corpus(&raw, &spec, mode.as_str())?;
    let compression = corpus_compression(&raw, &spec.segmenter);
    let lexicon = Lexicon::from_text(&trained.train_text);
    let ck = &trained.checkpoint;
    let sw = sweep(ck, DEFAULT_PRIME, sample_length(ck, compression.unwrap_or(3.0)), spec.model.seed)?;
    let (metrics, sample_bad) = build_report(
        mode.as_str(),
        Some(&trained.report),
        &sw,
        &lexicon,
        compression,
    );
    let extra = format!(
        "{}sample_bad_words={sample_bad:.6}\n",
        holdout_line(trained.holdout_loss)
    );
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("run"));
    write_run(&dir, &trained, &metrics, &extra, &sw)?;
    eprintln!("wrote {}", dir.display());
    Ok(())
}

pub struct GenerateArgs {
    pub prime: Option<String>,
    pub length: Option<usize>,
    pub temperature: Option<f64>,
    pub argmax: bool,
    pub tokens_out: Option<PathBuf>,
}

pub fn generate(checkpoint: &Path, common: &Common, args: GenerateArgs) -> CliResult<()> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let ck = load_checkpoint(checkpoint)?;
    if let Some(m) = common.mode.as_deref() {
        let m: Mode = m.parse().or_usage("--mode")?;
        if m != ck.segmenter.mode {
            return Err(usage(anyhow!(
                "checkpoint was trained in {} mode, not {}",
                ck.segmenter.mode.as_str(),
                m.as_str()
            )));
        }
    }
    let cfg = GenerationConfig {
        prime: file
            .pick(args.prime, "prime")?
            .unwrap_or_else(|| DEFAULT_PRIME.to_string()),
        length: file.pick(args.length, "length")?.unwrap_or(DEFAULT_LENGTH),
        temperature: file
            .pick(args.temperature, "temperature")?
            .unwrap_or(DEFAULT_TEMPERATURE),
        seed: seed_of(common, &file)?,
        mode: if args.argmax {
            DecodeMode::Argmax
        } else {
            DecodeMode::Sample
        },
    };
    let seg = Segmenter::new(ck.segmenter.clone()).or_usage("checkpoint segmenter")?;
    let g = sample(&ck.params, &ck.vocab, &seg, &cfg).or_usage("generation")?;
    if let Some(p) = &args.tokens_out {
        write_text(p, &format_stream(&g.tokens))?;
    }
    emit(common.out.as_deref(), &with_newline(&g.text))
}

pub fn eval(checkpoint: &Path, corpus: &Path, common: &Common, chunk_len: Option<usize>) -> CliResult<()> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let ck = load_checkpoint(checkpoint)?;
    let raw = read_text(corpus)?;
    let text = normalize(&raw);
    let seg = Segmenter::new(ck.segmenter.clone()).or_usage("checkpoint segmenter")?;
    let tokens = seg.tokenize(&text);
    let len = file.pick(chunk_len, "chunk_len")?.unwrap_or(DEFAULT_CHUNK_LEN);
    let chunks = chunk(&ck.vocab.encode(&tokens), len).or_usage("chunking")?;
    if chunks.is_empty() {
        return Err(usage(anyhow!(
            "corpus has {} tokens, fewer than one chunk of {len}; pass a smaller --chunk-len",
            tokens.len()
        )));
    }
    let loss = evaluate(&ck.params, &chunks)?;
    let compression = corpus_compression(&raw, &ck.segmenter);
    let seed = seed_of(common, &file)?;
    let sw = sweep(&ck, DEFAULT_PRIME, sample_length(&ck, compression.unwrap_or(3.0)), seed)?;
    let lexicon = Lexicon::from_text(&text);
    let (metrics, sample_bad) = build_report(
        ck.segmenter.mode.as_str(),
        None,
        &sw,
        &lexicon,
        compression,
    );
    let mut out = metrics.to_text();
    let _ = writeln!(out, "corpus_loss={loss:.6}");
    let _ = writeln!(out, "corpus_chunks={}", chunks.len());
    let _ = writeln!(out, "sample_bad_words={sample_bad:.6}");
    emit(common.out.as_deref(), &out)
}

pub fn compare(corpus: &Path, common: &Common, args: &TrainArgs) -> CliResult<()> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let raw = read_text(corpus)?;
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("compare"));
    let base_cfg = segmenter_config(Mode::SubWord, &file)?;
    let compression = corpus_compression(&raw, &base_cfg);
    let ratio = compression.unwrap_or(3.0);

    let mut summary = Vec::new();
    let mut values = String::new();
    let mut samples = String::new();
    for mode in [Mode::SubWord, Mode::Char] {
        let spec = train_spec(mode, common, args, &file)?;
        let trained = train_corpus(&raw, &spec, mode.as_str())?;
        let ck = &trained.checkpoint;
        let lexicon = Lexicon::from_text(&trained.train_text);
        let sw = sweep(ck, DEFAULT_PRIME, sample_length(ck, ratio), spec.model.seed)?;
        let (metrics, sample_bad) = build_report(
            mode.as_str(),
            Some(&trained.report),
            &sw,
            &lexicon,
            compression,
        );
        let extra = format!(
            "{}sample_bad_words={sample_bad:.6}\n",
            holdout_line(trained.holdout_loss)
        );
        write_run(&dir.join(mode.as_str()), &trained, &metrics, &extra, &sw)?;

        let key = mode.as_str();
        values.push_str(&metrics.key_values(&format!("{key}.")));
        let _ = writeln!(values, "{key}.sample_bad_words={sample_bad:.6}");
        let _ = writeln!(values, "{key}.hidden={}", spec.model.hidden_size);
        let _ = writeln!(values, "{key}.layers={}", spec.model.n_layers);
        for (t, g) in &sw.samples {
            let _ = writeln!(
                samples,
                "--- {key} T={t} (mean entropy {:.4} nats) ---\n{}",
                g.mean_entropy(),
                with_newline(&g.text)
            );
        }
        // per-model text section
        let mut section = String::new();
        let _ = writeln!(section, "== {key} ==");
        section.push_str(&metrics.to_text());
        let _ = writeln!(section, "sample_bad_words={sample_bad:.6}");
        summary.push((key, metrics, sample_bad, section));
    }

    let mut report = String::from("# sylgen comparison report v1\n");
    let _ = writeln!(report, "corpus: {}", corpus.display());
    let _ = writeln!(
        report,
        "compression ratio (char tokens / sub-word tokens): {}",
        compression.map_or("na".into(), |c| format!("{c:.4}"))
    );
    for (_, _, _, section) in &summary {
        report.push_str(section);
        report.push('\n');
    }
    report.push_str("== samples ==\n");
    report.push_str(&samples);
    report.push_str("== summary ==\n");
    let _ = writeln!(report, "model    final-loss  final-bad-words  sample-bad-words  alexandrine-rate");
    for (key, m, sb, _) in &summary {
        let _ = writeln!(
            report,
            "{key:<8} {:<11.4} {:<16.4} {sb:<17.4} {:.4}",
            m.final_loss().unwrap_or(f64::NAN),
            m.bad_words_series.last().copied().unwrap_or(f64::NAN),
            m.metre.alexandrine_rate
        );
    }
    let (sub, chr) = (&summary[0], &summary[1]);
    let better = |a: f64, b: f64| if a < b { "subword" } else if b < a { "char" } else { "tie" };
    let _ = writeln!(
        report,
        "lower sample bad-words ratio: {}",
        better(sub.2, chr.2)
    );
    let _ = writeln!(
        report,
        "higher alexandrine rate: {}",
        better(-sub.1.metre.alexandrine_rate, -chr.1.metre.alexandrine_rate)
    );
    report.push_str("losses are per token of each model's own granularity and are not directly comparable\n");
    report.push_str("[values]\n");
    let _ = writeln!(
        values,
        "compression_ratio={}",
        compression.map_or("na".into(), |c| format!("{c:.6}"))
    );
    report.push_str(&values);
    write_text(&dir.join("report.txt"), &report)?;
    eprintln!("wrote {}", dir.display());
    Ok(())
}

pub fn inspect(checkpoint: &Path, common: &Common) -> CliResult<()> {
    let ck = load_checkpoint(checkpoint)?;
    let bytes = std::fs::metadata(checkpoint).map(|m| m.len()).unwrap_or(0);
    let m = &ck.model;
    let mut s = String::new();
    let _ = writeln!(s, "format_version={CHECKPOINT_VERSION}");
    let _ = writeln!(s, "file_bytes={bytes}");
    let _ = writeln!(s, "mode={}", ck.segmenter.mode.as_str());
    let _ = writeln!(s, "vocab_size={}", m.vocab_size);
    let _ = writeln!(s, "hidden_size={}", m.hidden_size);
    let _ = writeln!(s, "n_layers={}", m.n_layers);
    let _ = writeln!(s, "epochs={}", m.epochs);
    let _ = writeln!(s, "seed={}", m.seed);
    let _ = writeln!(s, "learning_rate={}", m.learning_rate);
    let _ = writeln!(s, "grad_clip={}", m.grad_clip);
    let _ = writeln!(s, "parameters={}", ck.params.as_slice().len());
    let _ = writeln!(s, "parameter_norm={:.6}", ck.params.norm());
    let _ = writeln!(s, "min_core_vowels={}", ck.segmenter.min_core_vowels);
    let _ = writeln!(s, "prefixes={}", ck.segmenter.prefixes.join(","));
    let _ = writeln!(s, "legal_onsets={}", ck.segmenter.legal_onsets.len());
    emit(common.out.as_deref(), &s)
}
