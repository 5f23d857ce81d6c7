//! Training and evaluation steps shared by `train`, `eval` and `compare`.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::anyhow;
use sylgen::corpus::{chunk, Vocab};
use sylgen::metrics::{
    bad_words_ratio, compression_ratio, metre_stats, series_file, BadWordsProbe, Lexicon,
    MetricsReport,
};
use sylgen::nnet::{evaluate, train, Checkpoint, ModelConfig, NnetError, TrainReport};
use sylgen::sampler::{generate, DecodeMode, Generation, GenerationConfig};
use sylgen::segmenter::{detokenize, normalize, Mode, Segmenter, SegmenterConfig};

use crate::settings::{usage, CliResult, UsageContext};

/// Temperatures used for sample sweeps.
pub const SWEEP: [f64; 3] = [0.2, 0.8, 1.4];

/// Sub-word tokens per report sample; character-mode samples are stretched
/// by the measured compression ratio to cover similar text.
pub const SAMPLE_TOKENS: usize = 300;

/// Hyperparameter defaults per token granularity: (epochs, hidden, layers).
pub fn mode_defaults(mode: Mode) -> (usize, usize, usize) {
    match mode {
        Mode::SubWord => (15, 500, 3),
        Mode::Char => (50, 400, 2),
    }
}

/// Shrinks a size by `scale`, never below 1.
pub fn scaled(n: usize, scale: f64) -> usize {
    ((n as f64 * scale).round() as usize).max(1)
}

#[derive(Debug, Clone)]
pub struct TrainSpec {
    pub model: ModelConfig,
    pub segmenter: SegmenterConfig,
    pub chunk_len: usize,
    /// Fraction of the token stream held out from the end for evaluation.
    pub holdout: f64,
    pub probe_tokens: usize,
}

pub struct Trained {
    pub checkpoint: Checkpoint,
    pub report: TrainReport,
    pub holdout_loss: Option<f64>,
    pub train_text: String,
}

fn nnet_error(e: NnetError) -> crate::settings::CliError {
    match e {
        NnetError::Io(_)
        | NnetError::BadMagic
        | NnetError::VersionMismatch { .. }
        | NnetError::Truncated { .. }
        | NnetError::Checksum
        | NnetError::Malformed(_) => usage(e),
        other => other.into(),
    }
}

pub fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    Checkpoint::load(path)
        .map_err(nnet_error)
        .map_err(|e| match e {
            crate::settings::CliError::Usage(err) => {
                usage(err.context(format!("cannot load checkpoint {}", path.display())))
            }
            other => other,
        })
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).or_usage(format!("cannot create {}", dir.display()))?;
    }
    ck.save(path)
        .map_err(anyhow::Error::from)
        .or_usage(format!("cannot write {}", path.display()))
}

/// Tokenizes, builds the vocabulary on the training part and trains,
/// printing per-epoch progress to stderr.
pub fn train_corpus(raw: &str, spec: &TrainSpec, label: &str) -> CliResult<Trained> {
    let segmenter = Segmenter::new(spec.segmenter.clone()).or_usage("segmenter configuration")?;
    if !(0.0..1.0).contains(&spec.holdout) {
        return Err(usage(anyhow!("--holdout must be in [0, 1), got {}", spec.holdout)));
    }
    let tokens = segmenter.tokenize(&normalize(raw));
    let split = tokens.len() - (tokens.len() as f64 * spec.holdout).round() as usize;
    let (train_tokens, held) = tokens.split_at(split);
    if train_tokens.is_empty() {
        return Err(usage(anyhow!("corpus contains no tokens")));
    }
    let vocab = Vocab::build(train_tokens)?;
    let indices = vocab.encode(train_tokens);
    let chunks = chunk(&indices, spec.chunk_len).or_usage("chunking")?;
    if chunks.is_empty() {
        return Err(usage(anyhow!(
            "corpus has {} training tokens, fewer than one chunk of {}; pass a smaller --chunk-len",
            indices.len(),
            spec.chunk_len
        )));
    }
    let held_chunks = chunk(&vocab.encode(held), spec.chunk_len).or_usage("chunking")?;

    let model = ModelConfig {
        vocab_size: vocab.len(),
        ..spec.model.clone()
    };
    model.validate().or_usage("model configuration")?;
    let train_text = detokenize(train_tokens);
    let probe = BadWordsProbe::with_length(
        &segmenter,
        Lexicon::from_text(&train_text),
        spec.probe_tokens,
    );
    eprintln!(
        "[{label}] {} tokens, vocabulary {}, {} chunks of {}, hidden {}, layers {}, epochs {}",
        indices.len(),
        vocab.len(),
        chunks.len(),
        spec.chunk_len,
        model.hidden_size,
        model.n_layers,
        model.epochs
    );
    let start = Instant::now();
    let mut probe_err = None;
    let (params, report) = train(&chunks, &model, |epoch, loss, params| {
        let bw = match probe.measure(params, &vocab) {
            Ok(v) => v,
            Err(e) => {
                probe_err.get_or_insert(e);
                f64::NAN
            }
        };
        eprintln!(
            "[{label}] epoch {epoch}/{}  loss {loss:.4}  bad-words {bw:.4}  elapsed {:.1}s",
            model.epochs,
            start.elapsed().as_secs_f64()
        );
        let _ = std::io::stderr().flush();
        Some(bw)
    })
    .map_err(nnet_error)?;
    if let Some(e) = probe_err {
        return Err(e.into());
    }
    let holdout_loss = if held_chunks.is_empty() {
        None
    } else {
        Some(evaluate(&params, &held_chunks)?)
    };
    Ok(Trained {
        checkpoint: Checkpoint {
            model,
            segmenter: spec.segmenter.clone(),
            vocab,
            params,
        },
        report,
        holdout_loss,
        train_text,
    })
}

/// One sample per temperature plus everything derived from them.
pub struct Sweep {
    pub samples: Vec<(f64, Generation)>,
}

pub fn sample_length(ck: &Checkpoint, compression: f64) -> usize {
    match ck.segmenter.mode {
        Mode::SubWord => SAMPLE_TOKENS,
        Mode::Char => (SAMPLE_TOKENS as f64 * compression).round() as usize,
    }
}

pub fn sweep(ck: &Checkpoint, prime: &str, length: usize, seed: u64) -> CliResult<Sweep> {
    let segmenter = Segmenter::new(ck.segmenter.clone()).or_usage("checkpoint segmenter")?;
    let mut samples = Vec::new();
    for t in SWEEP {
        let cfg = GenerationConfig {
            prime: prime.to_string(),
            length,
            temperature: t,
            seed,
            mode: DecodeMode::Sample,
        };
        let g = generate(&ck.params, &ck.vocab, &segmenter, &cfg).or_usage("generation")?;
        samples.push((t, g));
    }
    Ok(Sweep { samples })
}

impl Sweep {
    pub fn at(&self, t: f64) -> Option<&Generation> {
        self.samples.iter().find(|(x, _)| *x == t).map(|(_, g)| g)
    }
}

/// Metrics for a model: training series if known, metre and bad words of
/// the T=0.8 sample, entropy of each sample.
pub fn build_report(
    label: &str,
    report: Option<&TrainReport>,
    sweep: &Sweep,
    lexicon: &Lexicon,
    compression: Option<f64>,
) -> (MetricsReport, f64) {
    let main = sweep.at(0.8).expect("sweep includes 0.8");
    let sample_bad = bad_words_ratio(&main.tokens, lexicon);
    let r = MetricsReport {
        label: label.to_string(),
        initial_loss: report.map_or(f64::NAN, |r| r.initial_loss),
        loss_series: report.map_or_else(Vec::new, |r| r.losses.clone()),
        bad_words_series: report.map_or_else(Vec::new, |r| r.bad_words.clone()),
        metre: metre_stats(&main.text),
        compression_ratio: compression,
        entropy_by_temperature: sweep
            .samples
            .iter()
            .map(|(t, g)| (*t, g.mean_entropy()))
            .collect(),
    };
    (r, sample_bad)
}

pub fn corpus_compression(raw: &str, cfg: &SegmenterConfig) -> Option<f64> {
    compression_ratio(&normalize(raw), cfg).ok()
}

/// Writes the model, series files and report of a training run into `dir`.
pub fn write_run(
    dir: &Path,
    trained: &Trained,
    metrics: &MetricsReport,
    extra: &str,
    sweep: &Sweep,
) -> CliResult<()> {
    use crate::settings::write_text;
    save_checkpoint(&trained.checkpoint, &dir.join("model.ckpt"))?;
    write_text(&dir.join("loss.tsv"), &series_file(&trained.report.losses))?;
    write_text(
        &dir.join("bad_words.tsv"),
        &series_file(&trained.report.bad_words),
    )?;
    let mut text = metrics.to_text();
    text.push_str(extra);
    write_text(&dir.join("report.txt"), &text)?;
    for (t, g) in &sweep.samples {
        write_text(&dir.join(format!("sample_T{t}.txt")), &with_newline(&g.text))?;
    }
    Ok(())
}

pub fn with_newline(s: &str) -> String {
    let mut s = s.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}
