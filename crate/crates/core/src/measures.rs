//! Linguistic measure tables (LEX, GEN, GEO, SYN, INV, PHO, FEA or custom).
//!
//! Tables arrive as square CSVs (see [`crate::matrix_csv`]); typological
//! distances are ingested as data, never recomputed. Missing cells are kept
//! as `None`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::LanguageCode;
use crate::matrix_csv::{matrix_csv_string, read_matrix_csv, Precision, RawMatrix};
use crate::{Error, Result};

/// Measure names with a fixed meaning. Other names are accepted as custom.
pub const STANDARD_MEASURES: [&str; 7] = ["LEX", "GEN", "GEO", "SYN", "INV", "PHO", "FEA"];

const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Similarity,
    Distance,
}

impl FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "similarity" => Ok(MeasureKind::Similarity),
            "distance" => Ok(MeasureKind::Distance),
            other => Err(format!("unknown measure kind {other:?}")),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::Similarity => "similarity",
            MeasureKind::Distance => "distance",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    pub name: String,
    pub languages: Vec<LanguageCode>,
    /// `values[i][j]`, `None` when missing.
    pub values: Vec<Vec<Option<f64>>>,
    pub kind: MeasureKind,
}

impl MeasureTable {
    /// Checks shape, pairwise symmetry (a present cell needs a present
    /// mirror within 1e-9) and the diagonal (1 for similarities, 0 for
    /// distances).
    pub fn new(
        name: impl Into<String>,
        languages: Vec<LanguageCode>,
        values: Vec<Vec<Option<f64>>>,
        kind: MeasureKind,
    ) -> Result<Self> {
        let name = name.into();
        let l = languages.len();
        if values.len() != l || values.iter().any(|r| r.len() != l) {
            return Err(Error::DimensionMismatch(format!("{name}: table is not {l} × {l}")));
        }
        for (i, lang) in languages.iter().enumerate() {
            if languages[..i].contains(lang) {
                return Err(Error::DuplicateLanguage(lang.to_string()));
            }
        }
        let expected_diag = match kind {
            MeasureKind::Similarity => 1.0,
            MeasureKind::Distance => 0.0,
        };
        let mut out_of_range = 0usize;
        for i in 0..l {
            match values[i][i] {
                Some(v) if (v - expected_diag).abs() <= SYMMETRY_TOL => {}
                other => {
                    return Err(Error::InvalidDiagonal {
                        table: name,
                        language: languages[i].to_string(),
                        value: other.map_or("missing".to_owned(), |v| v.to_string()),
                    })
                }
            }
            for j in 0..l {
                let symmetric = match (values[i][j], values[j][i]) {
                    (Some(x), Some(y)) => (x - y).abs() <= SYMMETRY_TOL,
                    (None, None) => true,
                    _ => false,
                };
                if !symmetric {
                    return Err(Error::Asymmetry {
                        table: name,
                        a: languages[i].to_string(),
                        b: languages[j].to_string(),
                    });
                }
                if kind == MeasureKind::Distance && j > i {
                    if let Some(v) = values[i][j] {
                        if !(0.0..=1.0).contains(&v) {
                            out_of_range += 1;
                        }
                    }
                }
            }
        }
        if out_of_range > 0 {
            log::warn!("{name}: {out_of_range} distances outside [0, 1]");
        }
        Ok(MeasureTable {
            name,
            languages,
            values,
            kind,
        })
    }

    pub fn from_raw(name: impl Into<String>, raw: RawMatrix, kind: MeasureKind) -> Result<Self> {
        Self::new(name, raw.languages, raw.values, kind)
    }

    pub fn index_of(&self, lang: &LanguageCode) -> Option<usize> {
        self.languages.iter().position(|l| l == lang)
    }

    /// Cell for a language pair; `None` if missing or either code is absent.
    pub fn get(&self, a: &LanguageCode, b: &LanguageCode) -> Option<f64> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        self.values[i][j]
    }

    /// Full-precision CSV; reading it back gives identical values.
    pub fn to_csv(&self) -> String {
        matrix_csv_string("", &self.languages, |i, j| self.values[i][j], Precision::RoundTrip)
    }
}

/// Reads a measure CSV; the measure name is the file stem.
pub fn load_measure_csv(path: &Path, kind: MeasureKind) -> Result<MeasureTable> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("measure")
        .to_owned();
    MeasureTable::from_raw(name, read_matrix_csv(path)?, kind)
}

/// Maps distances `d` to similarities `1 - d`. Similarity tables pass
/// through unchanged.
pub fn to_similarity(table: &MeasureTable) -> MeasureTable {
    match table.kind {
        MeasureKind::Similarity => table.clone(),
        MeasureKind::Distance => MeasureTable {
            name: table.name.clone(),
            languages: table.languages.clone(),
            values: table
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.map(|d| 1.0 - d)).collect())
                .collect(),
            kind: MeasureKind::Similarity,
        },
    }
}
