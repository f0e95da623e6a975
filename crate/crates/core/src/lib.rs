//! Semantic similarity over a multi-dimensional ontology.
//!
//! Five per-dimension measures (sort, compositional, essential, restrictive,
//! descriptive) are combined by a weighted mean whose weights are learned
//! from human similarity judgments.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod ontology;
pub mod similarity;
pub mod training;

pub use dataset::{Judgment, JudgmentDataset};
pub use error::{Error, Result};
pub use exec::Execution;
pub use ontology::{load_ontology, ConceptId, OntologyStore};
pub use similarity::{aggregate, similarity, Dimension, PartialSimilarity, WeightVector};
pub use training::{Strategy, TrainingConfig, TrainingState};
