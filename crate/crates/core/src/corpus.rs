//! Review ingestion, star-to-label mapping and balanced splitting.

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::content_hash;

pub const CORPUS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Positive, Label::Negative];

    pub fn opposite(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    /// Flips the label when `negated` is set.
    pub fn xor(self, negated: bool) -> Label {
        if negated {
            self.opposite()
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    #[default]
    Unassigned,
}

/// One line of the review dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReview {
    pub text: String,
    pub stars: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub stars: u8,
    #[serde(default)]
    pub split: Split,
}

/// Maps a star rating to a binary label. Three stars carry no label.
pub fn star_to_label(stars: i64) -> Result<Option<Label>> {
    match stars {
        1 | 2 => Ok(Some(Label::Negative)),
        3 => Ok(None),
        4 | 5 => Ok(Some(Label::Positive)),
        other => Err(Error::InvalidRating(other)),
    }
}

pub fn instance_id(ordinal: usize) -> String {
    format!("inst-{ordinal:06}")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

impl ClassCounts {
    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Positive => self.positive,
            Label::Negative => self.negative,
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.negative
    }

    fn bump(&mut self, label: Label) {
        match label {
            Label::Positive => self.positive += 1,
            Label::Negative => self.negative += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: ClassCounts,
    pub test: ClassCounts,
    pub unassigned: ClassCounts,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> ClassCounts {
        match split {
            Split::Train => self.train,
            Split::Test => self.test,
            Split::Unassigned => self.unassigned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub schema_version: u32,
    /// Seed passed at ingestion time.
    pub seed: u64,
    /// Seed of the last balanced split, if any.
    pub split_seed: Option<u64>,
    pub balanced: bool,
    /// Three-star records dropped during ingestion.
    pub skipped_neutral: usize,
    pub splits: SplitCounts,
    pub instances: Vec<Instance>,
}

impl Corpus {
    fn new(instances: Vec<Instance>, seed: u64, skipped_neutral: usize) -> Self {
        let mut corpus = Corpus {
            schema_version: CORPUS_SCHEMA_VERSION,
            seed,
            split_seed: None,
            balanced: false,
            skipped_neutral,
            splits: SplitCounts::default(),
            instances,
        };
        corpus.recount();
        corpus
    }

    fn recount(&mut self) {
        let mut counts = SplitCounts::default();
        for inst in &self.instances {
            match inst.split {
                Split::Train => counts.train.bump(inst.label),
                Split::Test => counts.test.bump(inst.label),
                Split::Unassigned => counts.unassigned.bump(inst.label),
            }
        }
        self.splits = counts;
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for inst in &self.instances {
            counts.bump(inst.label);
        }
        counts
    }

    pub fn get(&self, id: &str) -> Option<&Instance> {
        // ids are generated in increasing order, so binary search works for
        // ingested corpora; fall back to a scan for hand-built ones.
        match self.instances.binary_search_by(|i| i.id.as_str().cmp(id)) {
            Ok(pos) => Some(&self.instances[pos]),
            Err(_) => self.instances.iter().find(|i| i.id == id),
        }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(move |i| i.split == split)
    }

    /// Puts every instance in `split`. The corpus is no longer marked
    /// balanced.
    pub fn assign_all(&mut self, split: Split) {
        for inst in &mut self.instances {
            inst.split = split;
        }
        self.balanced = false;
        self.split_seed = None;
        self.recount();
    }

    pub fn content_hash(&self) -> String {
        content_hash(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a corpus file and re-checks its invariants.
    pub fn from_json(s: &str) -> Result<Corpus> {
        let corpus: Corpus = serde_json::from_str(s)?;
        if corpus.schema_version != CORPUS_SCHEMA_VERSION {
            return Err(Error::VersionMismatch {
                found: corpus.schema_version,
                supported: CORPUS_SCHEMA_VERSION,
            });
        }
        corpus.check()?;
        Ok(corpus)
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for inst in &self.instances {
            if !seen.insert(inst.id.as_str()) {
                return Err(Error::Corrupt(format!("duplicate instance id {}", inst.id)));
            }
            if star_to_label(inst.stars as i64)? != Some(inst.label) {
                return Err(Error::Corrupt(format!(
                    "instance {} has label {} for {} stars",
                    inst.id, inst.label, inst.stars
                )));
            }
        }
        let mut recounted = self.clone();
        recounted.recount();
        if recounted.splits != self.splits {
            return Err(Error::Corrupt("split counts do not match instances".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    /// One message per malformed record that was skipped.
    pub warnings: Vec<String>,
}

fn validate_raw(raw: &RawReview) -> std::result::Result<Option<Label>, String> {
    if raw.text.trim().is_empty() {
        return Err("empty text".into());
    }
    star_to_label(raw.stars).map_err(|e| e.to_string())
}

/// Builds a corpus from parsed records. `Err` items are malformed records
/// that are skipped with a warning; they still consume an ordinal.
pub fn ingest_records<I>(records: I, seed: u64) -> Result<Ingested>
where
    I: IntoIterator<Item = std::result::Result<RawReview, String>>,
{
    let mut instances = Vec::new();
    let mut warnings = Vec::new();
    let mut skipped_neutral = 0;
    let mut seen = 0usize;

    for (ordinal, record) in records.into_iter().enumerate() {
        seen += 1;
        let raw = match record {
            Ok(raw) => raw,
            Err(msg) => {
                tracing::warn!(ordinal, "skipping malformed record: {msg}");
                warnings.push(format!("record {ordinal}: {msg}"));
                continue;
            }
        };
        match validate_raw(&raw) {
            Ok(Some(label)) => instances.push(Instance {
                id: instance_id(ordinal),
                text: raw.text,
                label,
                stars: raw.stars as u8,
                split: Split::Unassigned,
            }),
            Ok(None) => skipped_neutral += 1,
            Err(msg) => {
                tracing::warn!(ordinal, "skipping malformed record: {msg}");
                warnings.push(format!("record {ordinal}: {msg}"));
            }
        }
    }

    if seen == 0 {
        return Err(Error::EmptyCorpus("input contained no records".into()));
    }
    if instances.is_empty() && skipped_neutral == 0 {
        return Err(Error::EmptyCorpus("no valid records".into()));
    }

    Ok(Ingested {
        corpus: Corpus::new(instances, seed, skipped_neutral),
        warnings,
    })
}

pub fn ingest<I>(records: I, seed: u64) -> Result<Ingested>
where
    I: IntoIterator<Item = RawReview>,
{
    ingest_records(records.into_iter().map(Ok), seed)
}

/// Reads newline-delimited `{"text": ..., "stars": ...}` records. Blank
/// lines are ignored and do not consume an ordinal.
pub fn ingest_ndjson<R: BufRead>(reader: R, seed: u64) -> Result<Ingested> {
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str::<RawReview>(&line).map_err(|e| e.to_string()));
    }
    ingest_records(records, seed)
}

/// Assigns exactly `train_n` Train and `test_n` Test instances, half of
/// each per class. Every other instance becomes Unassigned.
///
/// Each class's instances are shuffled with a ChaCha8 stream seeded by
/// `seed`; the first `train_n / 2` go to Train, the next `test_n / 2` to Test.
pub fn balanced_split(corpus: &Corpus, train_n: usize, test_n: usize, seed: u64) -> Result<Corpus> {
    for n in [train_n, test_n] {
        if n % 2 != 0 {
            return Err(Error::OddSplitSize(n));
        }
    }
    let per_class_train = train_n / 2;
    let per_class_test = test_n / 2;
    let needed = per_class_train + per_class_test;

    let mut out = corpus.clone();
    for inst in &mut out.instances {
        inst.split = Split::Unassigned;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for label in Label::ALL {
        let mut members: Vec<usize> = out
            .instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| inst.label == label)
            .map(|(idx, _)| idx)
            .collect();
        if members.len() < needed {
            return Err(Error::InsufficientClass {
                class: label,
                needed,
                available: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for &idx in &members[..per_class_train] {
            out.instances[idx].split = Split::Train;
        }
        for &idx in &members[per_class_train..needed] {
            out.instances[idx].split = Split::Test;
        }
    }

    out.split_seed = Some(seed);
    out.balanced = train_n > 0 || test_n > 0;
    out.recount();
    Ok(out)
}
