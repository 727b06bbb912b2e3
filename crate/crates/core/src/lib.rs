//! Elicitation workbench core: corpus preparation, representative sampling,
//! the knowledge repository, rule-model compilation and evaluation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the server and CLI use.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod hash;
pub mod knowledge;
pub mod rulemodel;
pub mod scalar;
pub mod textvec;

pub use corpus::{balanced_split, ingest, ingest_ndjson, star_to_label, Corpus, Instance, Label, RawReview, Split};
pub use error::{Error, Result};
pub use knowledge::{Condition, Justification, KnowledgeRepository, Span, Taxonomy};
pub use rulemodel::{classify, compile, extract_signals, Prediction, RuleModel};
pub use scalar::Scalar;

pub type TfidfVector = textvec::TfidfVector<f64>;
pub type TfidfVector32 = textvec::TfidfVector<f32>;
pub type Clustering = textvec::Clustering<f64>;
pub type Clustering32 = textvec::Clustering<f32>;
pub type EvalReport = eval::EvalReport<f64>;
pub type EvalReport32 = eval::EvalReport<f32>;
pub type ClassMetrics = eval::ClassMetrics<f64>;

/// [`textvec::representative_sample`] in `f64`.
pub fn representative_sample(corpus: &Corpus, m: usize, seed: u64) -> Result<Vec<String>> {
    textvec::representative_sample::<f64>(corpus, m, seed)
}

/// [`eval::evaluate`] in `f64`.
pub fn evaluate(model: &RuleModel, corpus: &Corpus, split: Split) -> Result<EvalReport> {
    eval::evaluate(model, corpus, split)
}

/// [`eval::trivial_baseline`] in `f64`.
pub fn trivial_baseline(corpus: &Corpus, split: Split) -> Result<EvalReport> {
    eval::trivial_baseline(corpus, split)
}

/// [`knowledge::fleiss_kappa`] in `f64`.
pub fn fleiss_kappa<C: Ord + Clone>(m: &knowledge::RatingMatrix<C>) -> f64 {
    knowledge::fleiss_kappa(m)
}
