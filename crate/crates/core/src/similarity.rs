//! Per-layer language similarity matrices.
//!
//! In parallel mode, entry `(a, b)` of the layer-`i` matrix is the mean over
//! sentences `k` of `cos(emb_a[i][k], emb_b[i][k])`. In monolingual mode it
//! is the cosine between the two languages' mean sentence embeddings
//! (centroids), which allows different sentence counts per language.

use std::fmt;
use std::ops::Range;

use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::LanguageCode;
use crate::matrix_csv::{matrix_csv_string, Precision, RawMatrix};
use crate::pooling::SentenceEmbeddings;
use crate::{Error, Result};

/// Cosine similarity. Errors on a zero-norm input.
pub fn cosine(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", u.len(), v.len())));
    }
    let (nu, nv) = (u.dot(&u).sqrt(), v.dot(&v).sqrt());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector {
            language: None,
            layer: None,
            sentence: None,
        });
    }
    Ok(u.dot(&v) / (nu * nv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityMode {
    Parallel,
    /// Centroid cosine over monolingual corpora. This is one reading of an
    /// under-specified procedure and is labelled as such in exports.
    MonolingualCentroid,
}

impl fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityMode::Parallel => "parallel",
            SimilarityMode::MonolingualCentroid => "monolingual-centroid",
        })
    }
}

/// One `L × L` similarity matrix per included layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSimilaritySet {
    pub languages: Vec<LanguageCode>,
    /// Absolute layer indices, one per matrix.
    pub layers: Vec<usize>,
    pub matrices: Vec<Array2<f64>>,
    pub mode: SimilarityMode,
    /// Sentences used per language.
    pub n_sentences: Vec<usize>,
}

impl LayerSimilaritySet {
    pub fn index_of(&self, lang: &LanguageCode) -> Option<usize> {
        self.languages.iter().position(|l| l == lang)
    }

    pub fn matrix(&self, layer: usize) -> Result<&Array2<f64>> {
        self.layers
            .iter()
            .position(|&l| l == layer)
            .map(|i| &self.matrices[i])
            .ok_or(Error::LayerOutOfRange(layer))
    }

    /// Similarity between two languages at `layer`, if both are present.
    pub fn get(&self, layer: usize, a: &LanguageCode, b: &LanguageCode) -> Result<Option<f64>> {
        let m = self.matrix(layer)?;
        Ok(match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => Some(m[[i, j]]),
            _ => None,
        })
    }

    /// One layer as CSV with six decimals.
    pub fn layer_csv(&self, layer: usize) -> Result<String> {
        let m = self.matrix(layer)?;
        Ok(matrix_csv_string(
            "",
            &self.languages,
            |i, j| Some(m[[i, j]]),
            Precision::Fixed(6),
        ))
    }

    /// Assembles a set from per-layer matrices (e.g. read back from CSV),
    /// checking shape, symmetry, unit diagonal and range.
    pub fn from_matrices(
        languages: Vec<LanguageCode>,
        layers: Vec<usize>,
        matrices: Vec<Array2<f64>>,
        mode: SimilarityMode,
        n_sentences: Vec<usize>,
    ) -> Result<Self> {
        if layers.len() != matrices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} layer indices for {} matrices",
                layers.len(),
                matrices.len()
            )));
        }
        let l = languages.len();
        for (layer, m) in layers.iter().zip(&matrices) {
            if m.dim() != (l, l) {
                return Err(Error::DimensionMismatch(format!("layer {layer}: {:?} for {l} languages", m.dim())));
            }
            check_similarity_matrix(m).map_err(|msg| Error::MalformedMatrix(format!("layer {layer}: {msg}")))?;
        }
        Ok(LayerSimilaritySet {
            languages,
            layers,
            matrices,
            mode,
            n_sentences,
        })
    }

    /// Builds from per-layer CSV matrices that share one language list.
    pub fn from_raw(layers: Vec<usize>, raws: Vec<RawMatrix>, mode: SimilarityMode) -> Result<Self> {
        let Some(first) = raws.first() else {
            return Err(Error::Empty);
        };
        let languages = first.languages.clone();
        let mut matrices = Vec::with_capacity(raws.len());
        for (layer, raw) in layers.iter().zip(&raws) {
            if raw.languages != languages {
                return Err(Error::DimensionMismatch(format!("layer {layer} has a different language list")));
            }
            let l = languages.len();
            let mut m = Array2::zeros((l, l));
            for i in 0..l {
                for j in 0..l {
                    m[[i, j]] = raw.values[i][j].ok_or_else(|| {
                        Error::MalformedMatrix(format!("layer {layer}: missing ({}, {})", languages[i], languages[j]))
                    })?;
                }
            }
            matrices.push(m);
        }
        let n = languages.len();
        Self::from_matrices(languages, layers, matrices, mode, vec![0; n])
    }
}

pub(crate) fn check_similarity_matrix(m: &Array2<f64>) -> std::result::Result<(), String> {
    let l = m.nrows();
    for i in 0..l {
        if (m[[i, i]] - 1.0).abs() > 1e-9 {
            return Err(format!("diagonal {i} is {}", m[[i, i]]));
        }
        for j in 0..l {
            let v = m[[i, j]];
            if !v.is_finite() || !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(format!("entry ({i}, {j}) = {v} outside [-1, 1]"));
            }
            if (v - m[[j, i]]).abs() > 1e-9 {
                return Err(format!("asymmetric at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

fn resolve_layers(n_layers: usize, range: Option<Range<usize>>) -> Result<Vec<usize>> {
    let range = range.unwrap_or(0..n_layers);
    if range.is_empty() || range.end > n_layers {
        return Err(Error::LayerOutOfRange(range.end.saturating_sub(1).max(range.start)));
    }
    Ok(range.collect())
}

fn check_unique(sets: &[SentenceEmbeddings]) -> Result<Vec<LanguageCode>> {
    let mut languages: Vec<LanguageCode> = Vec::with_capacity(sets.len());
    for s in sets {
        if languages.contains(&s.language) {
            return Err(Error::DuplicateLanguage(s.language.to_string()));
        }
        languages.push(s.language.clone());
    }
    if languages.is_empty() {
        return Err(Error::NoLanguages);
    }
    Ok(languages)
}

/// Row norms per language: `norms[lang][layer][sentence]`, rejecting zeros.
fn embedding_norms(sets: &[SentenceEmbeddings], layers: &[usize]) -> Result<Vec<Vec<Vec<f64>>>> {
    sets.iter()
        .map(|set| {
            layers
                .iter()
                .map(|&layer| {
                    set.embeddings
                        .index_axis(Axis(0), layer)
                        .axis_iter(Axis(0))
                        .enumerate()
                        .map(|(k, e)| {
                            let n = e.dot(&e).sqrt();
                            if n == 0.0 {
                                Err(Error::ZeroVector {
                                    language: Some(set.language.to_string()),
                                    layer: Some(layer),
                                    sentence: Some(k),
                                })
                            } else {
                                Ok(n)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn upper_pairs(l: usize) -> Vec<(usize, usize)> {
    (0..l).flat_map(|a| (a + 1..l).map(move |b| (a, b))).collect()
}

/// Mirrors each unordered pair into a matrix with a unit diagonal.
fn assemble(l: usize, pairs: &[(usize, usize)], values: &[f64]) -> Array2<f64> {
    let mut m = Array2::<f64>::eye(l);
    for (&(a, b), &v) in pairs.iter().zip(values) {
        m[[a, b]] = v;
        m[[b, a]] = v;
    }
    m
}

/// Parallel-corpus similarity: per-sentence cosines averaged over sentences.
///
/// Each unordered pair is computed once and mirrored, so matrices are
/// exactly symmetric. Work is spread over (layer, pair) tasks; every task
/// sums its sentences in order, so results do not depend on scheduling.
pub fn build_parallel_similarity(
    sets: &[SentenceEmbeddings],
    layer_range: Option<Range<usize>>,
) -> Result<LayerSimilaritySet> {
    let languages = check_unique(sets)?;
    let (n, s, d) = sets[0].embeddings.dim();
    for set in sets {
        if set.embeddings.dim() != (n, s, d) {
            return Err(Error::DimensionMismatch(format!(
                "{} has shape {:?}, expected {:?}",
                set.language,
                set.embeddings.dim(),
                (n, s, d)
            )));
        }
    }
    if s == 0 {
        return Err(Error::OutOfRange {
            what: "sentence count",
            value: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let layers = resolve_layers(n, layer_range)?;
    let norms = embedding_norms(sets, &layers)?;
    let l = sets.len();
    let pairs = upper_pairs(l);

    let tasks: Vec<(usize, usize)> = (0..layers.len())
        .flat_map(|li| (0..pairs.len()).map(move |p| (li, p)))
        .collect();
    let values: Vec<f64> = tasks
        .par_iter()
        .map(|&(li, p)| {
            let (a, b) = pairs[p];
            let layer = layers[li];
            let ea = sets[a].embeddings.index_axis(Axis(0), layer);
            let eb = sets[b].embeddings.index_axis(Axis(0), layer);
            let mut sum = 0.0;
            for k in 0..s {
                let dot = ea.row(k).dot(&eb.row(k));
                sum += dot / (norms[a][li][k] * norms[b][li][k]);
            }
            sum / s as f64
        })
        .collect();

    let np = pairs.len();
    let matrices = (0..layers.len())
        .map(|li| assemble(l, &pairs, &values[li * np..(li + 1) * np]))
        .collect();
    Ok(LayerSimilaritySet {
        languages,
        layers,
        matrices,
        mode: SimilarityMode::Parallel,
        n_sentences: vec![s; l],
    })
}

/// Monolingual similarity: cosine between per-language centroids.
pub fn build_monolingual_similarity(
    sets: &[SentenceEmbeddings],
    layer_range: Option<Range<usize>>,
) -> Result<LayerSimilaritySet> {
    let languages = check_unique(sets)?;
    let (n, _, d) = sets[0].embeddings.dim();
    for set in sets {
        let (sn, ss, sd) = set.embeddings.dim();
        if sn != n || sd != d {
            return Err(Error::DimensionMismatch(format!(
                "{} has {sn} layers × {sd} dims, expected {n} × {d}",
                set.language
            )));
        }
        if ss == 0 {
            return Err(Error::Empty);
        }
    }
    let layers = resolve_layers(n, layer_range)?;
    // centroids[lang][layer index]
    let centroids: Vec<Vec<ndarray::Array1<f64>>> = sets
        .iter()
        .map(|set| {
            layers
                .iter()
                .map(|&layer| {
                    let rows = set.embeddings.index_axis(Axis(0), layer);
                    let mut acc = ndarray::Array1::<f64>::zeros(d);
                    for r in rows.axis_iter(Axis(0)) {
                        acc += &r;
                    }
                    acc / rows.nrows() as f64
                })
                .collect()
        })
        .collect();
    for (set, per_layer) in sets.iter().zip(&centroids) {
        for (&layer, c) in layers.iter().zip(per_layer) {
            if c.dot(c) == 0.0 {
                return Err(Error::ZeroVector {
                    language: Some(set.language.to_string()),
                    layer: Some(layer),
                    sentence: None,
                });
            }
        }
    }
    let l = sets.len();
    let pairs = upper_pairs(l);
    let matrices = (0..layers.len())
        .into_par_iter()
        .map(|li| {
            let values = pairs
                .iter()
                .map(|&(a, b)| cosine(centroids[a][li].view(), centroids[b][li].view()))
                .collect::<Result<Vec<_>>>()?;
            Ok(assemble(l, &pairs, &values))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayerSimilaritySet {
        languages,
        layers,
        matrices,
        mode: SimilarityMode::MonolingualCentroid,
        n_sentences: sets.iter().map(|s| s.n_sentences()).collect(),
    })
}

/// Similarities of `target` to every other language at `layer`, in
/// language-list order.
pub fn similarity_vector(
    set: &LayerSimilaritySet,
    layer: usize,
    target: &LanguageCode,
) -> Result<Vec<(LanguageCode, f64)>> {
    let m = set.matrix(layer)?;
    let t = set
        .index_of(target)
        .ok_or_else(|| Error::UnknownLanguage(target.to_string()))?;
    Ok(set
        .languages
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != t)
        .map(|(j, l)| (l.clone(), m[[t, j]]))
        .collect())
}
