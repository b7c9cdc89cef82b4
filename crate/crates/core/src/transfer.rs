//! Source-language selection for zero-shot cross-lingual transfer.
//!
//! For each target, the most similar available source language is picked
//! (the target itself is never a candidate). When no candidate has a
//! similarity value, the default source is used and the selection is
//! marked as a fallback. Downstream scores come from a [`ScoreTable`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{parse_language_code, LanguageCode};
use crate::matrix_csv::{format_value, Precision};
use crate::measures::MeasureTable;
use crate::similarity::LayerSimilaritySet;
use crate::{Error, Result};

/// The six default transfer sources.
pub const DEFAULT_SOURCES: [&str; 6] = ["arb_Arab", "cmn_Hani", "eng_Latn", "hin_Deva", "rus_Cyrl", "spa_Latn"];

pub const DEFAULT_SOURCE: &str = "eng_Latn";

pub fn default_sources() -> Vec<LanguageCode> {
    DEFAULT_SOURCES.iter().map(|s| s.parse().expect("valid code")).collect()
}

/// A task and the layer whose similarities gave the best transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskPreset {
    pub task: &'static str,
    pub best_layer: usize,
}

pub const TASK_PRESETS: [TaskPreset; 4] = [
    TaskPreset { task: "NER", best_layer: 1 },
    TaskPreset { task: "POS", best_layer: 2 },
    TaskPreset { task: "MASSIVE", best_layer: 8 },
    TaskPreset { task: "Taxi1500", best_layer: 4 },
];

pub fn task_preset(task: &str) -> Option<TaskPreset> {
    TASK_PRESETS.iter().copied().find(|p| p.task.eq_ignore_ascii_case(task))
}

/// Anything that gives a (possibly missing) similarity for a language pair.
pub trait SimilaritySource {
    fn similarity(&self, a: &LanguageCode, b: &LanguageCode) -> Option<f64>;
    /// Provenance label for selections made from this source.
    fn label(&self) -> String;
}

impl SimilaritySource for MeasureTable {
    fn similarity(&self, a: &LanguageCode, b: &LanguageCode) -> Option<f64> {
        self.get(a, b)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// One layer of a [`LayerSimilaritySet`].
pub struct LayerView<'a> {
    set: &'a LayerSimilaritySet,
    layer: usize,
    name: String,
}

impl<'a> LayerView<'a> {
    pub fn new(set: &'a LayerSimilaritySet, layer: usize, name: impl Into<String>) -> Result<Self> {
        set.matrix(layer)?;
        Ok(LayerView {
            set,
            layer,
            name: name.into(),
        })
    }
}

impl SimilaritySource for LayerView<'_> {
    fn similarity(&self, a: &LanguageCode, b: &LanguageCode) -> Option<f64> {
        self.set.get(self.layer, a, b).ok().flatten()
    }

    fn label(&self) -> String {
        format!("{}@layer{}", self.name, self.layer)
    }
}

pub const FALLBACK: &str = "fallback";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub target: LanguageCode,
    pub source: LanguageCode,
    /// Measure label (with layer for model similarities), `fallback`, or
    /// the baseline name.
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SelectionMap {
    pub entries: Vec<Selection>,
}

impl SelectionMap {
    pub fn get(&self, target: &LanguageCode) -> Option<&Selection> {
        self.entries.iter().find(|s| &s.target == target)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,source,provenance\n");
        for s in &self.entries {
            writeln!(out, "{},{},{}", s.target, s.source, s.provenance).unwrap();
        }
        out
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<SelectionMap> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::parse(origin, e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["target", "source", "provenance"] {
            return Err(Error::parse(origin, "expected header target,source,provenance"));
        }
        let mut entries = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
            entries.push(Selection {
                target: parse_language_code(&rec[0])?,
                source: parse_language_code(&rec[1])?,
                provenance: rec[2].to_owned(),
            });
        }
        Ok(SelectionMap { entries })
    }

    pub fn load(path: &Path) -> Result<SelectionMap> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }
}

/// Picks the most similar source for every target. Ties go to the source
/// listed first; targets without any similarity to a candidate get
/// `default`.
pub fn select_sources(
    sim: &dyn SimilaritySource,
    targets: &[LanguageCode],
    sources: &[LanguageCode],
    default: &LanguageCode,
) -> Result<SelectionMap> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    if !sources.contains(default) {
        return Err(Error::DefaultNotInSources(default.to_string()));
    }
    let label = sim.label();
    let entries = targets
        .iter()
        .map(|target| {
            let mut best: Option<(&LanguageCode, f64)> = None;
            for source in sources.iter().filter(|s| *s != target) {
                if let Some(v) = sim.similarity(target, source) {
                    if best.map_or(true, |(_, b)| v > b) {
                        best = Some((source, v));
                    }
                }
            }
            match best {
                Some((source, _)) => Selection {
                    target: target.clone(),
                    source: source.clone(),
                    provenance: label.clone(),
                },
                None => Selection {
                    target: target.clone(),
                    source: default.clone(),
                    provenance: FALLBACK.to_owned(),
                },
            }
        })
        .collect();
    Ok(SelectionMap { entries })
}

pub const ENG_BASELINE: &str = "ENG";

/// Same source for every target, e.g. the English baseline.
pub fn constant_selection(targets: &[LanguageCode], source: &LanguageCode) -> SelectionMap {
    SelectionMap {
        entries: targets
            .iter()
            .map(|t| Selection {
                target: t.clone(),
                source: source.clone(),
                provenance: ENG_BASELINE.to_owned(),
            })
            .collect(),
    }
}

/// Downstream scores per (target, source); `None` where not measured.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub task: String,
    pub targets: Vec<LanguageCode>,
    pub sources: Vec<LanguageCode>,
    pub scores: Vec<Vec<Option<f64>>>,
    target_index: HashMap<LanguageCode, usize>,
}

impl ScoreTable {
    pub fn new(
        task: impl Into<String>,
        targets: Vec<LanguageCode>,
        sources: Vec<LanguageCode>,
        scores: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let task = task.into();
        for (i, s) in sources.iter().enumerate() {
            if sources[..i].contains(s) {
                return Err(Error::DuplicateLanguage(s.to_string()));
            }
        }
        let mut target_index = HashMap::with_capacity(targets.len());
        for (i, t) in targets.iter().enumerate() {
            if target_index.insert(t.clone(), i).is_some() {
                return Err(Error::DuplicateLanguage(t.to_string()));
            }
        }
        if scores.len() != targets.len() || scores.iter().any(|r| r.len() != sources.len()) {
            return Err(Error::DimensionMismatch(format!("{task}: score table shape")));
        }
        for (t, row) in targets.iter().zip(&scores) {
            if row.iter().all(Option::is_none) {
                return Err(Error::parse(&task, format!("target {t} has no scores")));
            }
        }
        Ok(ScoreTable {
            task,
            targets,
            sources,
            scores,
            target_index,
        })
    }

    /// Reads `target,<source1>,...,<sourceK>` CSV; the task name is the
    /// file stem.
    pub fn load(path: &Path) -> Result<ScoreTable> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let task = path.file_stem().and_then(|s| s.to_str()).unwrap_or("task");
        Self::parse_csv(&text, task)
    }

    pub fn parse_csv(text: &str, task: &str) -> Result<ScoreTable> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::parse(task, e.to_string()))?.clone();
        if header.get(0) != Some("target") {
            return Err(Error::parse(task, "first column must be \"target\""));
        }
        let sources = header.iter().skip(1).map(parse_language_code).collect::<Result<Vec<_>>>()?;
        let mut targets = Vec::new();
        let mut scores = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::parse(task, e.to_string()))?;
            targets.push(parse_language_code(&rec[0])?);
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::parse(task, format!("bad score {c:?} for {}", &rec[0])))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            scores.push(row);
        }
        Self::new(task, targets, sources, scores)
    }

    pub fn score(&self, target: &LanguageCode, source: &LanguageCode) -> Option<f64> {
        let t = *self.target_index.get(target)?;
        let s = self.sources.iter().position(|x| x == source)?;
        self.scores[t][s]
    }

    pub fn has_target(&self, target: &LanguageCode) -> bool {
        self.target_index.contains_key(target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetScore {
    pub target: LanguageCode,
    pub source: LanguageCode,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub per_target: Vec<TargetScore>,
    /// Unweighted mean over targets.
    pub macro_average: f64,
}

fn lookup(table: &ScoreTable, sel: &Selection) -> Result<f64> {
    if !table.has_target(&sel.target) {
        return Err(Error::UnknownTarget(sel.target.to_string()));
    }
    table.score(&sel.target, &sel.source).ok_or_else(|| Error::MissingScore {
        target: sel.target.to_string(),
        source_lang: sel.source.to_string(),
    })
}

/// Scores every selected (target, source) pair and macro-averages them.
pub fn evaluate(table: &ScoreTable, selection: &SelectionMap) -> Result<Evaluation> {
    if selection.is_empty() {
        return Err(Error::Empty);
    }
    let per_target = selection
        .entries
        .iter()
        .map(|sel| {
            Ok(TargetScore {
                target: sel.target.clone(),
                source: sel.source.clone(),
                score: lookup(table, sel)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let macro_average = per_target.iter().map(|t| t.score).sum::<f64>() / per_target.len() as f64;
    Ok(Evaluation {
        per_target,
        macro_average,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub target: LanguageCode,
    pub score_a: f64,
    pub source_a: LanguageCode,
    pub score_b: f64,
    pub source_b: LanguageCode,
    /// `score_b - score_a`.
    pub delta: f64,
}

/// Per-target gain of selection `b` over `a` for every target in the
/// table, sorted by descending gain (ties by target code).
pub fn delta_table(table: &ScoreTable, a: &SelectionMap, b: &SelectionMap) -> Result<Vec<DeltaRow>> {
    let mut rows = table
        .targets
        .iter()
        .map(|t| {
            let sa = a.get(t).ok_or_else(|| Error::MissingSelection(t.to_string()))?;
            let sb = b.get(t).ok_or_else(|| Error::MissingSelection(t.to_string()))?;
            let (score_a, score_b) = (lookup(table, sa)?, lookup(table, sb)?);
            Ok(DeltaRow {
                target: t.clone(),
                score_a,
                source_a: sa.source.clone(),
                score_b,
                source_b: sb.source.clone(),
                delta: score_b - score_a,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| y.delta.total_cmp(&x.delta).then_with(|| x.target.cmp(&y.target)));
    Ok(rows)
}

/// The `n` largest gains.
pub fn top(rows: &[DeltaRow], n: usize) -> &[DeltaRow] {
    &rows[..n.min(rows.len())]
}

/// The `n` smallest gains, in the table's descending order.
pub fn bottom(rows: &[DeltaRow], n: usize) -> &[DeltaRow] {
    &rows[rows.len() - n.min(rows.len())..]
}

pub fn delta_csv(rows: &[DeltaRow]) -> String {
    let f = |v: f64| format_value(v, Precision::Fixed(6));
    let mut out = String::from("target,score_a,source_a,score_b,source_b,delta\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.target,
            f(r.score_a),
            r.source_a,
            f(r.score_b),
            r.source_b,
            f(r.delta)
        )
        .unwrap();
    }
    out
}
