//! LEX: lexical similarity from edit distance over parallel sentences.
//!
//! The edit unit is the Unicode scalar value. No case folding or
//! punctuation stripping is applied. Distances are normalized by the longer
//! string's length, and two empty strings have similarity 1.

use ndarray::Array2;
use rayon::prelude::*;

use crate::corpus::{LanguageCode, MultiParallelCorpus};
use crate::matrix_csv::{matrix_csv_string, Precision};
use crate::measures::{MeasureKind, MeasureTable};
use crate::{Error, Result};

/// Granularity recorded alongside exported LEX tables.
pub const EDIT_UNIT: &str = "unicode-scalar";

/// Unit-cost Levenshtein distance over code points.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

/// Two-row DP with the shorter sequence along the row.
pub fn levenshtein_chars<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(lc != sc);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// `1 - lev(a, b) / max(|a|, |b|)`, in `[0, 1]`.
pub fn normalized_edit_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(&a, &b) as f64 / longest as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexMatrix {
    pub languages: Vec<LanguageCode>,
    pub values: Array2<f64>,
}

impl LexMatrix {
    pub fn to_csv(&self) -> String {
        matrix_csv_string("", &self.languages, |i, j| Some(self.values[[i, j]]), Precision::Fixed(6))
    }

    pub fn into_measure(self) -> MeasureTable {
        let l = self.languages.len();
        let values = (0..l)
            .map(|i| (0..l).map(|j| Some(self.values[[i, j]])).collect())
            .collect();
        MeasureTable::new("LEX", self.languages, values, MeasureKind::Similarity)
            .expect("LEX matrix is symmetric with unit diagonal")
    }
}

/// Mean per-sentence normalized edit similarity for every language pair.
pub fn build_lex_matrix(corpus: &MultiParallelCorpus) -> Result<LexMatrix> {
    let l = corpus.n_languages();
    if l < 2 {
        return Err(Error::TooFew(l));
    }
    let s = corpus.n_sentences();
    let chars: Vec<Vec<Vec<char>>> = (0..l)
        .map(|i| corpus.sentences(i).iter().map(|x| x.chars().collect()).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..l).flat_map(|a| (a + 1..l).map(move |b| (a, b))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut sum = 0.0;
            for k in 0..s {
                let (x, y) = (&chars[a][k], &chars[b][k]);
                let longest = x.len().max(y.len());
                sum += if longest == 0 {
                    1.0
                } else {
                    1.0 - levenshtein_chars(x, y) as f64 / longest as f64
                };
            }
            sum / s as f64
        })
        .collect();
    let mut m = Array2::<f64>::eye(l);
    for (&(a, b), &v) in pairs.iter().zip(&values) {
        m[[a, b]] = v;
        m[[b, a]] = v;
    }
    Ok(LexMatrix {
        languages: corpus.languages().to_vec(),
        values: m,
    })
}
