//! Language codes and corpora.
//!
//! A multi-parallel corpus lives on disk as one UTF-8 file per language,
//! named `<code>.txt`, one sentence per line. Line `k` of every file is a
//! translation of the same content.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// ISO 639-3 code plus ISO 15924 script, rendered as `eng_Latn`.
///
/// Ordering is byte-lexicographic on the rendered form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageCode(String);

impl LanguageCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn iso(&self) -> &str {
        &self.0[..3]
    }

    pub fn script(&self) -> &str {
        &self.0[4..]
    }
}

/// Parses `text` as a language code. Case is never normalized.
pub fn parse_language_code(text: &str) -> Result<LanguageCode> {
    let b = text.as_bytes();
    let ok = b.len() == 8
        && b[..3].iter().all(u8::is_ascii_lowercase)
        && b[3] == b'_'
        && b[4].is_ascii_uppercase()
        && b[5..].iter().all(u8::is_ascii_lowercase);
    if ok {
        Ok(LanguageCode(text.to_owned()))
    } else {
        Err(Error::MalformedCode(text.to_owned()))
    }
}

impl FromStr for LanguageCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_language_code(s)
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl AsRef<str> for LanguageCode {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for LanguageCode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for LanguageCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_language_code(&s).map_err(serde::de::Error::custom)
    }
}

/// Index-aligned sentences across languages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiParallelCorpus {
    languages: Vec<LanguageCode>,
    sentences: Vec<Vec<String>>,
}

impl MultiParallelCorpus {
    /// Builds a corpus from `(language, sentences)` pairs, enforcing equal
    /// lengths, unique languages and non-empty sentences.
    pub fn new(entries: Vec<(LanguageCode, Vec<String>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NoLanguages);
        }
        let expected = entries[0].1.len();
        let mut languages = Vec::with_capacity(entries.len());
        let mut sentences = Vec::with_capacity(entries.len());
        for (lang, sents) in entries {
            if languages.contains(&lang) {
                return Err(Error::DuplicateLanguage(lang.to_string()));
            }
            if sents.len() != expected {
                return Err(Error::AlignmentMismatch {
                    language: lang.to_string(),
                    expected,
                    found: sents.len(),
                });
            }
            check_sentences(&lang, &sents)?;
            languages.push(lang);
            sentences.push(sents);
        }
        if expected == 0 {
            return Err(Error::OutOfRange {
                what: "sentence count",
                value: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        Ok(MultiParallelCorpus {
            languages,
            sentences,
        })
    }

    pub fn languages(&self) -> &[LanguageCode] {
        &self.languages
    }

    pub fn n_languages(&self) -> usize {
        self.languages.len()
    }

    pub fn n_sentences(&self) -> usize {
        self.sentences[0].len()
    }

    /// Sentences of the language at position `index`.
    pub fn sentences(&self, index: usize) -> &[String] {
        &self.sentences[index]
    }

    pub fn sentences_of(&self, lang: &LanguageCode) -> Option<&[String]> {
        self.languages
            .iter()
            .position(|l| l == lang)
            .map(|i| self.sentences[i].as_slice())
    }
}

fn check_sentences(lang: &LanguageCode, sents: &[String]) -> Result<()> {
    match sents.iter().position(|s| s.trim().is_empty()) {
        Some(i) => Err(Error::EmptySentence {
            language: lang.to_string(),
            line: i + 1,
        }),
        None => Ok(()),
    }
}

/// Reads one sentence per line, dropping only the line terminator.
fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_owned())
        .collect();
    // a final terminator does not start another sentence
    if text.ends_with('\n') || text.is_empty() {
        lines.pop();
    }
    Ok(lines)
}

/// Loads every `<code>.txt` under `root`, sorted by code. When
/// `max_sentences` is set, keeps that prefix of every language after the
/// alignment check.
pub fn load_parallel_corpus(root: &Path, max_sentences: Option<usize>) -> Result<MultiParallelCorpus> {
    let mut files = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let path = entry.map_err(|e| Error::io(root, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") || !path.is_file() {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        files.push((parse_language_code(stem)?, path));
    }
    files.sort();

    let mut entries = Vec::with_capacity(files.len());
    for (lang, path) in files {
        let lines = read_lines(&path)?;
        entries.push((lang, lines));
    }
    // check alignment on full files before any capping
    let corpus = MultiParallelCorpus::new(entries)?;
    match max_sentences {
        Some(k) => subset_sentences(&corpus, k.min(corpus.n_sentences())),
        None => Ok(corpus),
    }
}

/// Keeps the first `k` sentences of every language.
pub fn subset_sentences(corpus: &MultiParallelCorpus, k: usize) -> Result<MultiParallelCorpus> {
    let s = corpus.n_sentences();
    if k == 0 || k > s {
        return Err(Error::OutOfRange {
            what: "sentence count",
            value: k,
            min: 1,
            max: s,
        });
    }
    Ok(MultiParallelCorpus {
        languages: corpus.languages.clone(),
        sentences: corpus.sentences.iter().map(|v| v[..k].to_vec()).collect(),
    })
}

/// Sentences in one language, not aligned with any other corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonolingualCorpus {
    pub language: LanguageCode,
    pub sentences: Vec<String>,
}

impl MonolingualCorpus {
    pub fn new(language: LanguageCode, sentences: Vec<String>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::Empty);
        }
        check_sentences(&language, &sentences)?;
        Ok(MonolingualCorpus {
            language,
            sentences,
        })
    }

    /// Loads `<code>.txt`; the language comes from the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let language = parse_language_code(stem)?;
        Self::new(language, read_lines(path)?)
    }
}
