use std::path::PathBuf;

use thiserror::Error;

use crate::hs1::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed language code {0:?} (expected e.g. \"eng_Latn\")")]
    MalformedCode(String),

    #[error("corpus has no language files")]
    NoLanguages,

    #[error("duplicate language {0}")]
    DuplicateLanguage(String),

    #[error("alignment mismatch: {language} has {found} sentences, expected {expected}")]
    AlignmentMismatch {
        language: String,
        expected: usize,
        found: usize,
    },

    #[error("empty sentence in {language} at line {line}")]
    EmptySentence { language: String, line: usize },

    #[error("{what} {value} out of range (allowed {min}..={max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("bad magic bytes {0:02x?}")]
    BadMagic(Vec<u8>),

    #[error("unsupported HS1 version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated file: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },

    #[error("{0} trailing bytes after last sentence")]
    TrailingData(usize),

    #[error("non-finite value at sentence {sentence}, layer {layer}")]
    NonFiniteValue { sentence: usize, layer: usize },

    #[error("sentence {sentence} has zero tokens")]
    ZeroTokens { sentence: usize },

    #[error("invalid hidden-state set: {}", join_violations(.0))]
    InvalidSet(Vec<Violation>),

    #[error("empty input to pooling (sentence {sentence:?}, layer {layer:?})")]
    EmptyInput {
        sentence: Option<usize>,
        layer: Option<usize>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero vector{}", zero_vector_context(.language, .layer, .sentence))]
    ZeroVector {
        language: Option<String>,
        layer: Option<usize>,
        sentence: Option<usize>,
    },

    #[error("unknown language {0}")]
    UnknownLanguage(String),

    #[error("layer {0} not present")]
    LayerOutOfRange(usize),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("asymmetric table {table}: ({a}, {b})")]
    Asymmetry { table: String, a: String, b: String },

    #[error("invalid diagonal in {table} at {language}: {value}")]
    InvalidDiagonal {
        table: String,
        language: String,
        value: String,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("too few values: {0} (need at least 2)")]
    TooFew(usize),

    #[error("constant input: zero variance")]
    ConstantInput,

    #[error("measure {0} must be converted to similarity first")]
    DistanceMeasure(String),

    #[error("empty input")]
    Empty,

    #[error("malformed similarity matrix: {0}")]
    MalformedMatrix(String),

    #[error("no source languages given")]
    EmptySources,

    #[error("default source {0} is not among the sources")]
    DefaultNotInSources(String),

    #[error("no score for target {target} with source {source_lang}")]
    MissingScore { target: String, source_lang: String },

    #[error("target {0} not in score table")]
    UnknownTarget(String),

    #[error("no selection for target {0}")]
    MissingSelection(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl std::fmt::Display, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            message: message.into(),
        }
    }

    /// True for errors that signal a violated data invariant (degenerate
    /// embeddings, asymmetric tables, non-finite values) rather than bad
    /// usage or unreadable input.
    pub fn is_data_invariant(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteValue { .. }
                | Error::ZeroTokens { .. }
                | Error::InvalidSet(_)
                | Error::ZeroVector { .. }
                | Error::Asymmetry { .. }
                | Error::InvalidDiagonal { .. }
                | Error::ConstantInput
                | Error::TooFew(_)
                | Error::MalformedMatrix(_)
                | Error::MissingScore { .. }
                | Error::AlignmentMismatch { .. }
                | Error::EmptySentence { .. }
        )
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn zero_vector_context(
    language: &Option<String>,
    layer: &Option<usize>,
    sentence: &Option<usize>,
) -> String {
    let mut parts = Vec::new();
    if let Some(l) = language {
        parts.push(format!("language {l}"));
    }
    if let Some(l) = layer {
        parts.push(format!("layer {l}"));
    }
    if let Some(s) = sentence {
        parts.push(format!("sentence {s}"));
    }
    if parts.is_empty() {
        String::new()
    } else {
        format!(" ({})", parts.join(", "))
    }
}
