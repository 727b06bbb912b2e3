use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::justification::{validate_against, Condition, Justification, JustificationBody, Validation};
use super::taxonomy::Taxonomy;
use crate::corpus::{Corpus, Instance, Label};
use crate::error::{Error, Result};
use crate::hash::{content_hash, sha256_hex};

pub const REPOSITORY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub text: String,
    pub label: Label,
}

impl From<&Instance> for InstanceRecord {
    fn from(i: &Instance) -> Self {
        InstanceRecord {
            id: i.id.clone(),
            text: i.text.clone(),
            label: i.label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredJustification {
    /// Repository revision at which the record was accepted.
    pub revision: u64,
    #[serde(flatten)]
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredTaxonomy {
    pub revision: u64,
    #[serde(flatten)]
    pub taxonomy: Taxonomy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum HistoryEvent {
    JustificationAdded {
        revision: u64,
        author: String,
        instance_id: String,
        condition: Condition,
    },
    /// A re-submission for the same (author, instance, condition); the
    /// superseded record is kept here.
    JustificationReplaced {
        revision: u64,
        previous: StoredJustification,
    },
    TaxonomySet {
        revision: u64,
        author: String,
        previous: Option<StoredTaxonomy>,
    },
}

impl HistoryEvent {
    pub fn revision(&self) -> u64 {
        match self {
            HistoryEvent::JustificationAdded { revision, .. }
            | HistoryEvent::JustificationReplaced { revision, .. }
            | HistoryEvent::TaxonomySet { revision, .. } => *revision,
        }
    }
}

/// Elicited knowledge for one corpus: taxonomies and justifications, plus
/// the instance texts they are validated against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeRepository {
    pub corpus_hash: String,
    pub revision: u64,
    pub instances: BTreeMap<String, InstanceRecord>,
    pub taxonomies: Vec<StoredTaxonomy>,
    pub justifications: Vec<StoredJustification>,
    pub history: Vec<HistoryEvent>,
}

impl KnowledgeRepository {
    pub fn new<'a, I>(corpus_hash: impl Into<String>, instances: I) -> Self
    where
        I: IntoIterator<Item = &'a Instance>,
    {
        KnowledgeRepository {
            corpus_hash: corpus_hash.into(),
            revision: 0,
            instances: instances.into_iter().map(|i| (i.id.clone(), InstanceRecord::from(i))).collect(),
            taxonomies: Vec::new(),
            justifications: Vec::new(),
            history: Vec::new(),
        }
    }

    /// Repository over the given corpus instances.
    pub fn for_corpus<'a>(corpus: &Corpus, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut picked = Vec::new();
        for id in ids {
            picked.push(corpus.get(id).ok_or_else(|| Error::MissingInstance(id.to_string()))?);
        }
        Ok(Self::new(corpus.content_hash(), picked))
    }

    pub fn len(&self) -> usize {
        self.justifications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.justifications.is_empty()
    }

    pub fn instance(&self, id: &str) -> Option<&InstanceRecord> {
        self.instances.get(id)
    }

    pub fn taxonomies(&self) -> Vec<&Taxonomy> {
        self.taxonomies.iter().map(|t| &t.taxonomy).collect()
    }

    pub fn justifications(&self, condition: Condition) -> impl Iterator<Item = &Justification> {
        self.justifications
            .iter()
            .map(|s| &s.justification)
            .filter(move |j| j.condition() == condition)
    }

    pub fn validate_justification(&self, j: &Justification) -> Result<Validation> {
        let inst = self
            .instance(&j.instance_id)
            .ok_or_else(|| Error::MissingInstance(j.instance_id.clone()))?;
        Ok(validate_against(j, &inst.text, inst.label, &self.taxonomies()))
    }

    /// Validates and stores a record. A record with the same author,
    /// instance and condition replaces the earlier one, which moves into
    /// the history.
    pub fn add_justification(&mut self, j: Justification) -> Result<Validation> {
        let validation = self.validate_justification(&j)?;
        if !validation.is_ok() {
            return Err(Error::Rejected(validation.violations));
        }
        self.revision += 1;
        let revision = self.revision;
        let existing = self.justifications.iter().position(|s| {
            s.justification.author == j.author
                && s.justification.instance_id == j.instance_id
                && s.justification.condition() == j.condition()
        });
        let event = HistoryEvent::JustificationAdded {
            revision,
            author: j.author.clone(),
            instance_id: j.instance_id.clone(),
            condition: j.condition(),
        };
        let stored = StoredJustification {
            revision,
            justification: j,
        };
        match existing {
            Some(pos) => {
                let previous = std::mem::replace(&mut self.justifications[pos], stored);
                self.history.push(HistoryEvent::JustificationReplaced { revision, previous });
            }
            None => {
                self.justifications.push(stored);
                self.history.push(event);
            }
        }
        Ok(validation)
    }

    /// Stores a taxonomy, replacing any earlier one by the same author.
    /// Rejected if it breaks its own invariants or would orphan a stored
    /// concept justification.
    pub fn set_taxonomy(&mut self, taxonomy: Taxonomy) -> Result<()> {
        let mut problems = taxonomy.violations();
        if problems.is_empty() {
            let mut after: Vec<&Taxonomy> = self
                .taxonomies
                .iter()
                .map(|t| &t.taxonomy)
                .filter(|t| t.author != taxonomy.author)
                .collect();
            after.push(&taxonomy);
            for (topic, desc) in self.concept_pairs() {
                if !after.iter().any(|t| t.has_pair(&topic, &desc)) {
                    problems.push(format!("stored justifications still cite ({topic}, {desc})"));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidTaxonomy(problems));
        }
        self.revision += 1;
        let revision = self.revision;
        let author = taxonomy.author.clone();
        let stored = StoredTaxonomy { revision, taxonomy };
        let previous = match self.taxonomies.iter().position(|t| t.taxonomy.author == author) {
            Some(pos) => Some(std::mem::replace(&mut self.taxonomies[pos], stored)),
            None => {
                self.taxonomies.push(stored);
                None
            }
        };
        self.history.push(HistoryEvent::TaxonomySet {
            revision,
            author,
            previous,
        });
        Ok(())
    }

    fn concept_pairs(&self) -> BTreeSet<(String, String)> {
        let mut pairs = BTreeSet::new();
        for s in &self.justifications {
            match &s.justification.body {
                JustificationBody::ConceptBow { items } => {
                    pairs.extend(items.iter().map(|i| (i.topic.clone(), i.description.clone())))
                }
                JustificationBody::ConceptAnnotation { items } => {
                    pairs.extend(items.iter().map(|i| (i.topic.clone(), i.description.clone())))
                }
                _ => {}
            }
        }
        pairs
    }

    pub fn content_hash(&self) -> String {
        content_hash(self)
    }

    fn document(&self) -> ExportDocument {
        ExportDocument {
            version: REPOSITORY_SCHEMA_VERSION,
            corpus_hash: self.corpus_hash.clone(),
            revision: self.revision,
            instances: self
                .instances
                .values()
                .map(|i| ExportedInstance {
                    hash: sha256_hex(&i.text),
                    id: i.id.clone(),
                    text: i.text.clone(),
                    label: i.label,
                })
                .collect(),
            taxonomies: self.taxonomies.clone(),
            justifications: self.justifications.clone(),
            history: self.history.clone(),
            integrity: String::new(),
        }
    }

    /// Versioned JSON export with per-instance text hashes and a
    /// document integrity hash.
    pub fn export(&self) -> Result<String> {
        let mut doc = self.document();
        let mut value = serde_json::to_value(&doc)?;
        doc.integrity = integrity_of(&mut value)?;
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn import(s: &str) -> Result<KnowledgeRepository> {
        let mut value: serde_json::Value = serde_json::from_str(s)?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Corrupt("missing schema version".into()))?;
        if version != REPOSITORY_SCHEMA_VERSION as u64 {
            return Err(Error::VersionMismatch {
                found: version as u32,
                supported: REPOSITORY_SCHEMA_VERSION,
            });
        }
        let doc: ExportDocument = serde_json::from_value(value.clone())?;
        for inst in &doc.instances {
            if sha256_hex(&inst.text) != inst.hash {
                return Err(Error::Corrupt(format!("instance {} text does not match its hash", inst.id)));
            }
        }
        let expected = integrity_of(&mut value)?;
        if expected != doc.integrity {
            return Err(Error::Corrupt("integrity hash mismatch".into()));
        }

        let repo = KnowledgeRepository {
            corpus_hash: doc.corpus_hash,
            revision: doc.revision,
            instances: doc
                .instances
                .into_iter()
                .map(|i| {
                    (
                        i.id.clone(),
                        InstanceRecord {
                            id: i.id,
                            text: i.text,
                            label: i.label,
                        },
                    )
                })
                .collect(),
            taxonomies: doc.taxonomies,
            justifications: doc.justifications,
            history: doc.history,
        };
        repo.check()?;
        Ok(repo)
    }

    /// Re-checks every stored record and the history ordering.
    pub fn check(&self) -> Result<()> {
        for t in &self.taxonomies {
            let v = t.taxonomy.violations();
            if !v.is_empty() {
                return Err(Error::InvalidTaxonomy(v));
            }
        }
        for s in &self.justifications {
            let v = self.validate_justification(&s.justification)?;
            if !v.is_ok() {
                return Err(Error::Rejected(v.violations));
            }
            if s.revision > self.revision {
                return Err(Error::Corrupt(format!("record revision {} beyond repository revision", s.revision)));
            }
        }
        let mut last = 0;
        for event in &self.history {
            if event.revision() <= last || event.revision() > self.revision {
                return Err(Error::Corrupt("history revisions are not strictly increasing".into()));
            }
            last = event.revision();
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ExportedInstance {
    id: String,
    text: String,
    label: Label,
    hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExportDocument {
    version: u32,
    corpus_hash: String,
    revision: u64,
    instances: Vec<ExportedInstance>,
    taxonomies: Vec<StoredTaxonomy>,
    justifications: Vec<StoredJustification>,
    history: Vec<HistoryEvent>,
    integrity: String,
}

/// Hash of the document without its `integrity` field. A top-level
/// `manifest` (run metadata added by the pipeline tooling) is not part of
/// the repository content and is excluded too.
fn integrity_of(value: &mut serde_json::Value) -> Result<String> {
    if let Some(map) = value.as_object_mut() {
        map.remove("integrity");
        map.remove("manifest");
    }
    Ok(sha256_hex(serde_json::to_vec(value)?))
}
