//! Square language-by-language matrices as CSV.
//!
//! The first row holds the rendered language codes (its first cell is a
//! free label), and each later row starts with the code of that row. Rows
//! must come in header order. An empty cell is a missing value.

use std::io::Write;
use std::path::Path;

use crate::corpus::{parse_language_code, LanguageCode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed number of decimals.
    Fixed(usize),
    /// Shortest representation that reads back to the same `f64`.
    RoundTrip,
}

pub fn format_value(v: f64, precision: Precision) -> String {
    let s = match precision {
        Precision::Fixed(p) => format!("{v:.p$}"),
        Precision::RoundTrip => format!("{v}"),
    };
    // no "-0.000000"
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_owned()
    } else {
        s
    }
}

pub fn write_matrix_csv<W: Write>(
    mut out: W,
    corner: &str,
    languages: &[LanguageCode],
    value: impl Fn(usize, usize) -> Option<f64>,
    precision: Precision,
) -> std::io::Result<()> {
    write!(out, "{corner}")?;
    for l in languages {
        write!(out, ",{l}")?;
    }
    writeln!(out)?;
    for (i, l) in languages.iter().enumerate() {
        write!(out, "{l}")?;
        for j in 0..languages.len() {
            match value(i, j) {
                Some(v) => write!(out, ",{}", format_value(v, precision))?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn matrix_csv_string(
    corner: &str,
    languages: &[LanguageCode],
    value: impl Fn(usize, usize) -> Option<f64>,
    precision: Precision,
) -> String {
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, corner, languages, value, precision).expect("write to Vec");
    String::from_utf8(buf).expect("utf-8")
}

/// Labelled square matrix as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMatrix {
    pub languages: Vec<LanguageCode>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn read_matrix_csv(path: &Path) -> Result<RawMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, &path.display().to_string())
}

pub fn parse_matrix_csv(text: &str, origin: &str) -> Result<RawMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::parse(origin, e.to_string()))?,
        None => return Err(Error::parse(origin, "empty file")),
    };
    let languages = header
        .iter()
        .skip(1)
        .map(parse_language_code)
        .collect::<Result<Vec<_>>>()?;
    if languages.is_empty() {
        return Err(Error::parse(origin, "header has no language columns"));
    }

    let mut values = Vec::with_capacity(languages.len());
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        let Some(lang) = languages.get(i) else {
            return Err(Error::parse(origin, format!("extra row {}", i + 2)));
        };
        let row_code = rec.get(0).unwrap_or_default();
        if row_code != lang.as_str() {
            parse_language_code(row_code)?;
            return Err(Error::parse(
                origin,
                format!("row {} is {row_code}, expected {lang}", i + 2),
            ));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| Error::parse(origin, format!("bad number {cell:?} in row {lang}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    if values.len() != languages.len() {
        return Err(Error::parse(
            origin,
            format!("{} rows for {} languages", values.len(), languages.len()),
        ));
    }
    Ok(RawMatrix { languages, values })
}
