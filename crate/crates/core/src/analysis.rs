//! Correlating model similarity with linguistic measures.
//!
//! For a target language and a layer, the model's similarities from the
//! target to the other languages are correlated (Pearson) with the
//! measure's similarities from the target to the same languages. Each target
//! keeps its best layer; MEAN and MEDIAN over targets summarize a measure.
//!
//! Languages whose measure cell for the target is missing are dropped
//! once per (target, measure), so all layers see the same language set.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::LanguageCode;
use crate::matrix_csv::{format_value, Precision};
use crate::measures::{MeasureKind, MeasureTable};
use crate::similarity::LayerSimilaritySet;
use crate::{Error, Result};

/// Sample Pearson correlation, two-pass mean-centered.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFew(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Per-layer correlations for one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetCorrelations {
    pub target: LanguageCode,
    pub layers: Vec<usize>,
    pub r: Vec<f64>,
    /// Languages (other than the target) entering every correlation.
    pub n_pairs: usize,
}

pub fn target_layer_correlations(
    sims: &LayerSimilaritySet,
    measure: &MeasureTable,
    target: &LanguageCode,
) -> Result<TargetCorrelations> {
    if measure.kind != MeasureKind::Similarity {
        return Err(Error::DistanceMeasure(measure.name.clone()));
    }
    let t = sims
        .index_of(target)
        .ok_or_else(|| Error::UnknownLanguage(target.to_string()))?;
    if measure.index_of(target).is_none() {
        return Err(Error::UnknownLanguage(target.to_string()));
    }
    let mut used = Vec::new();
    let mut reference = Vec::new();
    for (j, lang) in sims.languages.iter().enumerate() {
        if j == t {
            continue;
        }
        if let Some(v) = measure.get(target, lang) {
            used.push(j);
            reference.push(v);
        }
    }
    if used.len() < 2 {
        return Err(Error::TooFew(used.len()));
    }
    let r = sims
        .matrices
        .iter()
        .map(|m| {
            let model: Vec<f64> = used.iter().map(|&j| m[[t, j]]).collect();
            pearson(&model, &reference)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TargetCorrelations {
        target: target.clone(),
        layers: sims.layers.clone(),
        r,
        n_pairs: used.len(),
    })
}

/// Position of the maximum and its value; ties go to the lowest position.
pub fn best_layer(r_per_layer: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &r) in r_per_layer.iter().enumerate() {
        if best.map_or(true, |(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    best
}

/// Arithmetic mean and median (mean of the middle two for even counts).
pub fn summarize(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Ok((mean, median))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub target: LanguageCode,
    /// Absolute layer index.
    pub best_layer: usize,
    pub r_best: f64,
    pub r_per_layer: Vec<f64>,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedTarget {
    pub target: LanguageCode,
    pub reason: String,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub measure: String,
    pub layers: Vec<usize>,
    pub rows: Vec<CorrelationRow>,
    /// Targets left out of the summary (too few measure cells, constant
    /// vectors, or absent from the measure).
    pub skipped: Vec<SkippedTarget>,
    pub mean: f64,
    pub median: f64,
    /// Mean correlation across targets at each layer.
    pub layer_means: Vec<f64>,
}

/// Correlates every target (all languages of `sims` when `targets` is
/// `None`) and summarizes the best-layer values.
pub fn correlation_report(
    sims: &LayerSimilaritySet,
    measure: &MeasureTable,
    targets: Option<&[LanguageCode]>,
) -> Result<CorrelationReport> {
    if measure.kind != MeasureKind::Similarity {
        return Err(Error::DistanceMeasure(measure.name.clone()));
    }
    let targets = targets.unwrap_or(&sims.languages);
    let results: Vec<std::result::Result<CorrelationRow, SkippedTarget>> = targets
        .par_iter()
        .map(|target| match target_layer_correlations(sims, measure, target) {
            Ok(tc) => {
                let (i, r_best) = best_layer(&tc.r).expect("at least one layer");
                Ok(CorrelationRow {
                    target: target.clone(),
                    best_layer: tc.layers[i],
                    r_best,
                    r_per_layer: tc.r,
                    n_pairs: tc.n_pairs,
                })
            }
            Err(e) => Err(SkippedTarget {
                target: target.clone(),
                reason: e.to_string(),
                n_pairs: available_pairs(sims, measure, target),
            }),
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(s) => {
                log::warn!("{}: skipping {} ({})", measure.name, s.target, s.reason);
                skipped.push(s);
            }
        }
    }
    let best: Vec<f64> = rows.iter().map(|r| r.r_best).collect();
    let (mean, median) = summarize(&best)?;
    let layer_means = (0..sims.layers.len())
        .map(|i| rows.iter().map(|r| r.r_per_layer[i]).sum::<f64>() / rows.len() as f64)
        .collect();
    Ok(CorrelationReport {
        measure: measure.name.clone(),
        layers: sims.layers.clone(),
        rows,
        skipped,
        mean,
        median,
        layer_means,
    })
}

fn available_pairs(sims: &LayerSimilaritySet, measure: &MeasureTable, target: &LanguageCode) -> usize {
    sims.languages
        .iter()
        .filter(|l| *l != target && measure.get(target, l).is_some())
        .count()
}

impl CorrelationReport {
    /// One row per target, skipped targets included with their reason.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,status,n_pairs,best_layer,r_best");
        for l in &self.layers {
            write!(out, ",r_layer{l}").unwrap();
        }
        out.push('\n');
        let f = |v: f64| format_value(v, Precision::Fixed(6));
        for row in &self.rows {
            write!(out, "{},ok,{},{},{}", row.target, row.n_pairs, row.best_layer, f(row.r_best)).unwrap();
            for &r in &row.r_per_layer {
                write!(out, ",{}", f(r)).unwrap();
            }
            out.push('\n');
        }
        for s in &self.skipped {
            write!(out, "{},skipped,{},,", s.target, s.n_pairs).unwrap();
            for _ in &self.layers {
                out.push(',');
            }
            out.push('\n');
        }
        out
    }

    /// Mean correlation per layer.
    pub fn layer_curve_csv(&self) -> String {
        let mut out = String::from("layer,mean_r\n");
        for (l, m) in self.layers.iter().zip(&self.layer_means) {
            writeln!(out, "{l},{}", format_value(*m, Precision::Fixed(6))).unwrap();
        }
        out
    }
}
