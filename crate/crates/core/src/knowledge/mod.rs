//! Taxonomies, justification records, the repository that stores them,
//! and agreement statistics over expert output.

mod agreement;
mod justification;
mod repository;
mod taxonomy;

pub use agreement::{fleiss_kappa, taxonomy_coverage, RatingMatrix};
pub use justification::{
    validate_against, Condition, ConceptRoles, ConceptSpans, Justification, JustificationBody, Span, Validation,
    Violation,
};
pub use repository::{
    HistoryEvent, InstanceRecord, KnowledgeRepository, StoredJustification, StoredTaxonomy, REPOSITORY_SCHEMA_VERSION,
};
pub use taxonomy::{Taxonomy, Topic};
