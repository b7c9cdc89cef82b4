//! HS1: per-language token hidden states for every layer.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic        4 bytes   "HS1\0"
//! version      u32       1
//! code_len     u8
//! code         code_len bytes, UTF-8 rendered language code
//! n_layers     u32
//! hidden_dim   u32
//! n_sentences  u32
//! per sentence:
//!   n_tokens   u32
//!   values     n_layers * n_tokens * hidden_dim f32, layer-major,
//!              then token-major, then dimension
//! ```
//!
//! Layer 0 is the static embedding layer.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::corpus::{parse_language_code, LanguageCode};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"HS1\0";
pub const VERSION: u32 = 1;

/// Hidden states of one sentence: `n_layers × n_tokens × hidden_dim` floats.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceStates {
    pub n_tokens: usize,
    pub values: Vec<f32>,
}

impl SentenceStates {
    /// Token rows of one layer, `n_tokens × hidden_dim` row-major.
    pub fn layer(&self, layer: usize, hidden_dim: usize) -> &[f32] {
        let stride = self.n_tokens * hidden_dim;
        &self.values[layer * stride..(layer + 1) * stride]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateSet {
    pub language: LanguageCode,
    pub n_layers: usize,
    pub hidden_dim: usize,
    pub sentences: Vec<SentenceStates>,
}

impl HiddenStateSet {
    pub fn n_sentences(&self) -> usize {
        self.sentences.len()
    }

    /// Keeps the first `k` sentences.
    pub fn prefix(&self, k: usize) -> Result<HiddenStateSet> {
        if k == 0 || k > self.sentences.len() {
            return Err(Error::OutOfRange {
                what: "sentence count",
                value: k,
                min: 1,
                max: self.sentences.len(),
            });
        }
        Ok(HiddenStateSet {
            language: self.language.clone(),
            n_layers: self.n_layers,
            hidden_dim: self.hidden_dim,
            sentences: self.sentences[..k].to_vec(),
        })
    }

    /// Reports every invariant violation; empty iff the set is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n_layers == 0 {
            out.push(Violation::new(ViolationKind::ZeroLayers, None, None));
        }
        if self.hidden_dim == 0 {
            out.push(Violation::new(ViolationKind::ZeroDim, None, None));
        }
        for (s, sent) in self.sentences.iter().enumerate() {
            if sent.n_tokens == 0 {
                out.push(Violation::new(ViolationKind::ZeroTokens, Some(s), None));
                continue;
            }
            if sent.values.len() != self.n_layers * sent.n_tokens * self.hidden_dim {
                out.push(Violation::new(ViolationKind::ShapeMismatch, Some(s), None));
                continue;
            }
            if self.hidden_dim == 0 {
                continue;
            }
            for layer in 0..self.n_layers {
                if sent.layer(layer, self.hidden_dim).iter().any(|v| !v.is_finite()) {
                    out.push(Violation::new(ViolationKind::NonFiniteValue, Some(s), Some(layer)));
                }
            }
        }
        out
    }
}

/// Free-function form of [`HiddenStateSet::validate`].
pub fn validate(set: &HiddenStateSet) -> Vec<Violation> {
    set.validate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    ZeroTokens,
    NonFiniteValue,
    ZeroLayers,
    ZeroDim,
    ShapeMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub sentence: Option<usize>,
    pub layer: Option<usize>,
}

impl Violation {
    fn new(kind: ViolationKind, sentence: Option<usize>, layer: Option<usize>) -> Self {
        Violation {
            kind,
            sentence,
            layer,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        match (self.sentence, self.layer) {
            (Some(s), Some(l)) => write!(f, "@s={s},layer={l}"),
            (Some(s), None) => write!(f, "@s={s}"),
            (None, Some(l)) => write!(f, "@layer={l}"),
            (None, None) => Ok(()),
        }
    }
}

/// Serializes a valid set to HS1 bytes.
pub fn encode(set: &HiddenStateSet) -> Result<Vec<u8>> {
    let violations = set.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidSet(violations));
    }
    let code = set.language.as_str().as_bytes();
    let total: usize = set.sentences.iter().map(|s| 4 + 4 * s.values.len()).sum();
    let mut buf = Vec::with_capacity(4 + 4 + 1 + code.len() + 12 + total);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(code.len() as u8);
    buf.extend_from_slice(code);
    for n in [set.n_layers, set.hidden_dim, set.sentences.len()] {
        buf.extend_from_slice(&to_u32(n)?.to_le_bytes());
    }
    for sent in &set.sentences {
        buf.extend_from_slice(&to_u32(sent.n_tokens)?.to_le_bytes());
        for v in &sent.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

fn to_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::DimensionMismatch(format!("{n} does not fit in u32")))
}

/// Validates and writes `set` to `path`. Nothing is written if the set is
/// invalid.
pub fn write_hs1(set: &HiddenStateSet, path: &Path) -> Result<()> {
    let bytes = encode(set)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_hs1(path: &Path) -> Result<HiddenStateSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let rest = self.buf.len() - self.pos;
        if rest < n {
            return Err(Error::Truncated {
                offset: self.pos,
                needed: n - rest,
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

/// Parses and fully validates HS1 bytes.
pub fn decode(bytes: &[u8]) -> Result<HiddenStateSet> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let head = &bytes[..bytes.len().min(4)];
    if head != &MAGIC[..head.len()] {
        return Err(Error::BadMagic(head.to_vec()));
    }
    cur.take(4)?;
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let code_len = cur.take(1)?[0] as usize;
    let code = cur.take(code_len)?;
    let code = std::str::from_utf8(code).map_err(|_| Error::MalformedCode(String::from_utf8_lossy(code).into_owned()))?;
    let language = parse_language_code(code)?;
    let n_layers = cur.u32()? as usize;
    let hidden_dim = cur.u32()? as usize;
    let n_sentences = cur.u32()? as usize;

    let mut sentences = Vec::with_capacity(n_sentences.min(cur.remaining() / 4));
    for s in 0..n_sentences {
        let n_tokens = cur.u32()? as usize;
        if n_tokens == 0 {
            return Err(Error::ZeroTokens { sentence: s });
        }
        let count = n_layers
            .checked_mul(n_tokens)
            .and_then(|x| x.checked_mul(hidden_dim))
            .and_then(|x| x.checked_mul(4))
            .ok_or(Error::Truncated {
                offset: cur.pos,
                needed: usize::MAX,
            })?;
        let raw = cur.take(count)?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                sentence: s,
                layer: i / (n_tokens * hidden_dim),
            });
        }
        sentences.push(SentenceStates { n_tokens, values });
    }
    if cur.remaining() != 0 {
        return Err(Error::TrailingData(cur.remaining()));
    }
    let set = HiddenStateSet {
        language,
        n_layers,
        hidden_dim,
        sentences,
    };
    let violations = set.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidSet(violations));
    }
    Ok(set)
}
