use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexicon::ClosedClass;
use crate::corpus::Label;
use crate::error::Result;
use crate::knowledge::Condition;

/// How a justification contributed a lexicon entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Via {
    /// Highlighted span text.
    Span,
    /// Changed region of a perturbation diff.
    Diff,
    /// Pattern extraction over a whole perturbed or simplified text.
    Text,
}

/// Where a lexicon entry came from. Every entry in a compiled model has
/// at least one source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Source {
    Justification {
        instance_id: String,
        author: String,
        condition: Condition,
        via: Via,
    },
    Taxonomy {
        author: String,
        topic: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Content hash of the repository the model was compiled from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repository_hash: Option<String>,
    pub nouns: BTreeMap<String, BTreeSet<Source>>,
    pub adjectives: BTreeMap<String, BTreeSet<Source>>,
    pub keywords: BTreeMap<String, BTreeSet<Source>>,
}

/// Compiled match lexicons for one elicitation condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleModel {
    pub condition: Condition,
    pub noun_lexicon: BTreeSet<String>,
    pub adjective_lexicon: BTreeMap<String, Label>,
    pub keyword_lexicon: BTreeMap<String, Label>,
    pub provenance: Provenance,
    pub closed_class_list_version: String,
    /// Count adjective hits whose noun is not in the noun lexicon.
    #[serde(default)]
    pub allow_adjective_only: bool,
}

impl RuleModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<RuleModel> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn is_empty(&self) -> bool {
        self.noun_lexicon.is_empty() && self.adjective_lexicon.is_empty() && self.keyword_lexicon.is_empty()
    }
}

/// Non-fatal events during compilation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileLog {
    /// Terms seen with both polarities and therefore dropped.
    pub conflicts: Vec<String>,
    /// Concept pairs whose polarity could not be derived.
    pub skipped_pairs: Vec<String>,
    /// Justifications that produced no signal.
    pub uncovered: Vec<String>,
    /// Perturbations that rewrote the whole text.
    pub low_confidence: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub model: RuleModel,
    pub log: CompileLog,
}

#[derive(Debug, Default)]
pub(crate) struct LexiconBuilder {
    nouns: BTreeMap<String, BTreeSet<Source>>,
    adjectives: BTreeMap<String, BTreeMap<Label, BTreeSet<Source>>>,
    keywords: BTreeMap<String, BTreeMap<Label, BTreeSet<Source>>>,
    pub log: CompileLog,
}

impl LexiconBuilder {
    pub fn noun(&mut self, term: &str, source: Source) {
        self.nouns.entry(term.to_string()).or_default().insert(source);
    }

    pub fn adjective(&mut self, term: &str, polarity: Label, source: Source) {
        self.adjectives
            .entry(term.to_string())
            .or_default()
            .entry(polarity)
            .or_default()
            .insert(source);
    }

    pub fn keyword(&mut self, phrase: &str, polarity: Label, source: Source) {
        self.keywords
            .entry(phrase.to_string())
            .or_default()
            .entry(polarity)
            .or_default()
            .insert(source);
    }

    fn resolve(
        kind: &str,
        entries: BTreeMap<String, BTreeMap<Label, BTreeSet<Source>>>,
        log: &mut CompileLog,
    ) -> (BTreeMap<String, Label>, BTreeMap<String, BTreeSet<Source>>) {
        let mut lexicon = BTreeMap::new();
        let mut provenance = BTreeMap::new();
        for (term, by_label) in entries {
            if by_label.len() > 1 {
                tracing::warn!(term, kind, "conflicting polarity, dropping");
                log.conflicts.push(format!("{kind} {term:?} seen as both positive and negative"));
                continue;
            }
            let (label, sources) = by_label.into_iter().next().expect("non-empty label map");
            lexicon.insert(term.clone(), label);
            provenance.insert(term, sources);
        }
        (lexicon, provenance)
    }

    pub fn finish(self, condition: Condition, closed: &ClosedClass) -> Compiled {
        let mut log = self.log;
        let (adjective_lexicon, adjectives) = Self::resolve("adjective", self.adjectives, &mut log);
        let (keyword_lexicon, keywords) = Self::resolve("keyword", self.keywords, &mut log);
        let noun_lexicon = self.nouns.keys().cloned().collect();
        Compiled {
            model: RuleModel {
                condition,
                noun_lexicon,
                adjective_lexicon,
                keyword_lexicon,
                provenance: Provenance {
                    repository_hash: None,
                    nouns: self.nouns,
                    adjectives,
                    keywords,
                },
                closed_class_list_version: closed.version.clone(),
                allow_adjective_only: false,
            },
            log,
        }
    }
}
