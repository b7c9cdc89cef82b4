//! Language similarity from the layer-wise hidden states of multilingual
//! pretrained models.
//!
//! The pipeline runs from token hidden states (the [`hs1`] file format),
//! through sentence pooling and per-layer cosine similarity matrices, to
//! correlation against linguistic measures, complete-linkage clustering and
//! source-language selection for cross-lingual transfer.
//!
//! * [`corpus`]: language codes and multi-parallel / monolingual corpora.
//! * [`hs1`]: binary per-language hidden-state files.
//! * [`pooling`]: token states to sentence embeddings.
//! * [`similarity`]: per-layer language-by-language cosine similarity.
//! * [`lexstat`]: edit-distance lexical similarity (LEX).
//! * [`measures`]: linguistic measure tables with missing values.
//! * [`analysis`]: Pearson correlation, best layer, MEAN/MEDIAN summaries.
//! * [`clustering`]: complete-linkage dendrograms, cuts and neighbors.
//! * [`transfer`]: source selection and transfer-score evaluation.
//! * [`render`]: deterministic SVG heatmaps and dendrograms.

pub mod analysis;
pub mod clustering;
pub mod corpus;
mod error;
pub mod hs1;
pub mod lexstat;
pub mod matrix_csv;
pub mod measures;
pub mod pooling;
pub mod render;
pub mod similarity;
pub mod transfer;

pub use corpus::LanguageCode;
pub use error::{Error, Result};
