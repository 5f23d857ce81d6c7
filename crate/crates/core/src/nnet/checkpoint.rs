//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! magic        8 bytes  "SYLGENCK"
//! version      u32
//! file length  u64      total bytes including the checksum
//! vocab_size   u32
//! hidden_size  u32
//! n_layers     u32
//! seed         u64
//! learning_rate f64
//! grad_clip    f64
//! epochs       u32
//! segmenter    u32 length + UTF-8 key=value lines
//! vocab        u32 length + UTF-8 vocabulary text
//! weights      u64 count + f32 values in parameter-buffer order
//! crc32        u32 over every preceding byte
//! ```

use std::path::Path;

use crate::corpus::Vocab;
use crate::segmenter::{Mode, SegmenterConfig};

use super::params::ModelParams;
use super::{ModelConfig, NnetError};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SYLGENCK";
pub const CHECKPOINT_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 + 8;

/// Everything needed to reload a trained model and tokenize its input.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub segmenter: SegmenterConfig,
    pub vocab: Vocab,
    pub params: ModelParams<f32>,
}

fn u32_len(n: usize, what: &str) -> Result<u32, NnetError> {
    u32::try_from(n).map_err(|_| NnetError::Malformed(format!("{what} too large")))
}

fn segmenter_text(cfg: &SegmenterConfig) -> String {
    let onsets: Vec<&str> = cfg.legal_onsets.iter().map(String::as_str).collect();
    format!(
        "mode={}\nmin_core_vowels={}\nprefixes={}\nonsets={}\n",
        cfg.mode.as_str(),
        cfg.min_core_vowels,
        cfg.prefixes.join(","),
        onsets.join(",")
    )
}

fn parse_segmenter(text: &str) -> Result<SegmenterConfig, NnetError> {
    let bad = |m: String| NnetError::Malformed(format!("segmenter block: {m}"));
    let list = |v: &str| -> Vec<String> {
        v.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect()
    };
    let mut cfg = SegmenterConfig::default();
    let mut seen = 0;
    for line in text.lines() {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {line:?}")))?;
        match k {
            "mode" => cfg.mode = v.parse::<Mode>().map_err(|e| bad(e.to_string()))?,
            "min_core_vowels" => {
                cfg.min_core_vowels = v.parse().map_err(|_| bad(format!("count {v:?}")))?
            }
            "prefixes" => cfg.prefixes = list(v),
            "onsets" => cfg.legal_onsets = list(v).into_iter().collect(),
            _ => return Err(bad(format!("unknown key {k:?}"))),
        }
        seen += 1;
    }
    if seen != 4 {
        return Err(bad("expected four keys".into()));
    }
    cfg.validate().map_err(|e| bad(e.to_string()))?;
    Ok(cfg)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnetError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| NnetError::Malformed("field runs past end of data".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], NnetError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, NnetError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, NnetError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, NnetError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn usize32(&mut self) -> Result<usize, NnetError> {
        Ok(self.u32()? as usize)
    }

    fn text(&mut self, what: &str) -> Result<&'a str, NnetError> {
        let n = self.usize32()?;
        std::str::from_utf8(self.take(n)?)
            .map_err(|_| NnetError::Malformed(format!("{what} block is not UTF-8")))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, NnetError> {
        let m = &self.model;
        if m.shape() != self.params.shape() {
            return Err(NnetError::Malformed(
                "model configuration does not match parameter shape".into(),
            ));
        }
        if self.vocab.len() != m.vocab_size {
            return Err(NnetError::Dimension {
                what: "vocabulary",
                expected: m.vocab_size,
                found: self.vocab.len(),
            });
        }
        let seg = segmenter_text(&self.segmenter);
        let vocab = self.vocab.to_text();
        let weights = self.params.as_slice();

        let mut out = Vec::with_capacity(HEADER_LEN + 64 + seg.len() + vocab.len() + 4 * weights.len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&0u64.to_le_bytes());
        out.extend_from_slice(&u32_len(m.vocab_size, "vocab_size")?.to_le_bytes());
        out.extend_from_slice(&u32_len(m.hidden_size, "hidden_size")?.to_le_bytes());
        out.extend_from_slice(&u32_len(m.n_layers, "n_layers")?.to_le_bytes());
        out.extend_from_slice(&m.seed.to_le_bytes());
        out.extend_from_slice(&m.learning_rate.to_le_bytes());
        out.extend_from_slice(&m.grad_clip.to_le_bytes());
        out.extend_from_slice(&u32_len(m.epochs, "epochs")?.to_le_bytes());
        for (block, what) in [(&seg, "segmenter block"), (&vocab, "vocab block")] {
            out.extend_from_slice(&u32_len(block.len(), what)?.to_le_bytes());
            out.extend_from_slice(block.as_bytes());
        }
        out.extend_from_slice(&(weights.len() as u64).to_le_bytes());
        for w in weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        let total = (out.len() + 4) as u64;
        out[12..20].copy_from_slice(&total.to_le_bytes());
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NnetError> {
        if bytes.len() < CHECKPOINT_MAGIC.len() || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(NnetError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(NnetError::Truncated {
                declared: HEADER_LEN as u64,
                found: bytes.len() as u64,
            });
        }
        let mut r = Reader { buf: bytes, pos: 8 };
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(NnetError::VersionMismatch {
                expected: CHECKPOINT_VERSION,
                found: version,
            });
        }
        let declared = r.u64()?;
        let found = bytes.len() as u64;
        if found < declared {
            return Err(NnetError::Truncated { declared, found });
        }
        if found > declared {
            return Err(NnetError::Malformed(format!(
                "{} trailing bytes after declared end",
                found - declared
            )));
        }
        if bytes.len() < HEADER_LEN + 4 {
            return Err(NnetError::Malformed("declared length too small".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("four bytes"));
        if crc32fast::hash(body) != stored {
            return Err(NnetError::Checksum);
        }

        let mut r = Reader {
            buf: body,
            pos: HEADER_LEN,
        };
        let model = ModelConfig {
            vocab_size: r.usize32()?,
            hidden_size: r.usize32()?,
            n_layers: r.usize32()?,
            seed: r.u64()?,
            learning_rate: r.f64()?,
            grad_clip: r.f64()?,
            epochs: r.usize32()?,
        };
        model
            .validate()
            .map_err(|e| NnetError::Malformed(e.to_string()))?;
        let segmenter = parse_segmenter(r.text("segmenter")?)?;
        let vocab = Vocab::from_text(r.text("vocab")?)
            .map_err(|e| NnetError::Malformed(e.to_string()))?;
        if vocab.len() != model.vocab_size {
            return Err(NnetError::Dimension {
                what: "vocabulary",
                expected: model.vocab_size,
                found: vocab.len(),
            });
        }
        let count = r.u64()?;
        let shape = model.shape();
        if count != shape.total() as u64 {
            return Err(NnetError::Dimension {
                what: "weight count",
                expected: shape.total(),
                found: count as usize,
            });
        }
        let raw = r.take(shape.total() * 4)?;
        let data: Vec<f32> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("four bytes")))
            .collect();
        if r.pos != body.len() {
            return Err(NnetError::Malformed("unexpected bytes after weights".into()));
        }
        let params = ModelParams::from_vec(shape, data)?;
        if !params.is_finite() {
            return Err(NnetError::NonFinite { what: "parameter" });
        }
        Ok(Checkpoint {
            model,
            segmenter,
            vocab,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NnetError> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NnetError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::{Segmenter, Token};

    fn sample() -> Checkpoint {
        let seg = Segmenter::new(SegmenterConfig::default()).unwrap();
        let toks: Vec<Token> = seg.tokenize("Litwo! Ojczyzno moja!");
        let vocab = Vocab::build(&toks).unwrap();
        let model = ModelConfig {
            vocab_size: vocab.len(),
            hidden_size: 3,
            n_layers: 2,
            seed: 11,
            epochs: 4,
            ..ModelConfig::default()
        };
        let params = ModelParams::init(&model).unwrap();
        Checkpoint {
            model,
            segmenter: seg.config().clone(),
            vocab,
            params,
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let c = sample();
        let bytes = c.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ck");
        let c = sample();
        c.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), c);
    }

    #[test]
    fn distinct_errors() {
        let bytes = sample().to_bytes().unwrap();

        let mut flipped = bytes.clone();
        let mid = bytes.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(Checkpoint::from_bytes(&flipped), Err(NnetError::Checksum)));

        let mut versioned = bytes.clone();
        versioned[8..12].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            Checkpoint::from_bytes(&versioned),
            Err(NnetError::VersionMismatch { found: 2, .. })
        ));

        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..bytes.len() - 10]),
            Err(NnetError::Truncated { .. })
        ));

        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&magic), Err(NnetError::BadMagic)));
        assert!(matches!(Checkpoint::from_bytes(b""), Err(NnetError::BadMagic)));
    }
}
