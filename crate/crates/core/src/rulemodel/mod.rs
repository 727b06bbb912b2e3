//! Pattern engine and the rule-model compilers.

mod audit;
mod classify;
mod compile;
mod diff;
mod lexicon;
mod model;
mod patterns;

pub use audit::audit_provenance;
pub use classify::{classify, Evidence, Prediction};
pub use compile::{
    compile, compile_bow, compile_concept_annotation, compile_concept_bow, compile_perturbation,
    compile_simplification, Instances,
};
pub use diff::{token_diff, Hunk};
pub use lexicon::ClosedClass;
pub use model::{CompileLog, Compiled, Provenance, RuleModel, Source, Via};
pub use patterns::{
    extract_signals, normalized_words, Extraction, PatternEngine, PatternKind, PatternMatch, PatternSignal,
};
