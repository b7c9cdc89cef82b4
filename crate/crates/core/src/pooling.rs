//! Sentence embeddings from token hidden states.
//!
//! Mean pooling suits bidirectional encoders. Position-weighted pooling
//! weights token `t` (1-indexed) by `t / (1 + 2 + ... + T)`, so later tokens
//! count more; it is meant for auto-regressive models. The caller picks the
//! strategy; HS1 files carry no architecture flag.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array3, ArrayView2, Axis};
use rayon::prelude::*;

use crate::corpus::LanguageCode;
use crate::hs1::HiddenStateSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolingStrategy {
    Mean,
    PositionWeighted,
}

impl PoolingStrategy {
    pub fn pool(self, tokens: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        match self {
            PoolingStrategy::Mean => mean_pool(tokens),
            PoolingStrategy::PositionWeighted => position_weighted_pool(tokens),
        }
    }
}

impl FromStr for PoolingStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(PoolingStrategy::Mean),
            "position-weighted" => Ok(PoolingStrategy::PositionWeighted),
            other => Err(format!("unknown pooling strategy {other:?}")),
        }
    }
}

impl fmt::Display for PoolingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolingStrategy::Mean => "mean",
            PoolingStrategy::PositionWeighted => "position-weighted",
        })
    }
}

/// Average of the `T × D` token rows.
pub fn mean_pool(tokens: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let t = tokens.nrows();
    if t == 0 {
        return Err(Error::EmptyInput {
            sentence: None,
            layer: None,
        });
    }
    let mut acc = Array1::<f64>::zeros(tokens.ncols());
    for row in tokens.axis_iter(Axis(0)) {
        acc += &row;
    }
    acc /= t as f64;
    Ok(acc)
}

/// Weights `w_t = t / Σk` for 1-indexed `t`; they sum to one.
pub fn position_weights(t: usize) -> Vec<f64> {
    let total = (t * (t + 1) / 2) as f64;
    (1..=t).map(|i| i as f64 / total).collect()
}

/// `Σ_t w_t · tokens[t]` with [`position_weights`].
pub fn position_weighted_pool(tokens: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let t = tokens.nrows();
    if t == 0 {
        return Err(Error::EmptyInput {
            sentence: None,
            layer: None,
        });
    }
    let mut acc = Array1::<f64>::zeros(tokens.ncols());
    for (w, row) in position_weights(t).into_iter().zip(tokens.axis_iter(Axis(0))) {
        acc.scaled_add(w, &row);
    }
    Ok(acc)
}

/// One embedding per layer and sentence, `N × S × D`, layer-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddings {
    pub language: LanguageCode,
    pub embeddings: Array3<f64>,
}

impl SentenceEmbeddings {
    pub fn n_layers(&self) -> usize {
        self.embeddings.dim().0
    }

    pub fn n_sentences(&self) -> usize {
        self.embeddings.dim().1
    }

    pub fn dim(&self) -> usize {
        self.embeddings.dim().2
    }

    /// Keeps the first `k` sentences.
    pub fn prefix(&self, k: usize) -> Result<SentenceEmbeddings> {
        if k == 0 || k > self.n_sentences() {
            return Err(Error::OutOfRange {
                what: "sentence count",
                value: k,
                min: 1,
                max: self.n_sentences(),
            });
        }
        Ok(SentenceEmbeddings {
            language: self.language.clone(),
            embeddings: self.embeddings.slice(ndarray::s![.., ..k, ..]).to_owned(),
        })
    }
}

/// Pools every sentence at every layer. Sentences are processed in
/// parallel; each writes its own slot, so the output does not depend on
/// scheduling.
pub fn pool_set(set: &HiddenStateSet, strategy: PoolingStrategy) -> Result<SentenceEmbeddings> {
    let (n, d) = (set.n_layers, set.hidden_dim);
    let pooled: Vec<Vec<Array1<f64>>> = set
        .sentences
        .par_iter()
        .enumerate()
        .map(|(s, sent)| {
            (0..n)
                .map(|layer| {
                    let rows: Vec<f64> = sent.layer(layer, d).iter().map(|&v| v as f64).collect();
                    let view = ArrayView2::from_shape((sent.n_tokens, d), &rows)
                        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
                    strategy.pool(view).map_err(|e| match e {
                        Error::EmptyInput { .. } => Error::EmptyInput {
                            sentence: Some(s),
                            layer: Some(layer),
                        },
                        other => other,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut embeddings = Array3::<f64>::zeros((n, set.sentences.len(), d));
    for (s, layers) in pooled.into_iter().enumerate() {
        for (layer, v) in layers.into_iter().enumerate() {
            embeddings.slice_mut(ndarray::s![layer, s, ..]).assign(&v);
        }
    }
    Ok(SentenceEmbeddings {
        language: set.language.clone(),
        embeddings,
    })
}
