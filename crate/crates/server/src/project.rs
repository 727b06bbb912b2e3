//! Project and session state machines. Everything here is synchronous and
//! free of I/O; the workbench wraps it with locking and persistence.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use elicit_core::corpus::{balanced_split, ingest, Corpus, RawReview, Split};
use elicit_core::knowledge::{validate_against, JustificationBody, Violation};
use elicit_core::rulemodel::{normalized_words, CompileLog};
use elicit_core::{compile, evaluate, representative_sample, Condition, EvalReport, Justification, KnowledgeRepository};
use elicit_core::{Label, RuleModel, Taxonomy};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

pub const PROJECT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    /// Minimum token-set Jaccard overlap for span answers.
    pub min_jaccard: f64,
}

impl Default for Grading {
    fn default() -> Self {
        Grading { min_jaccard: 0.5 }
    }
}

/// What a correct answer to a gold question looks like.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoldAnswer {
    /// Span conditions: the highlighted tokens must overlap these terms.
    Terms {
        terms: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_jaccard: Option<f64>,
    },
    /// Text conditions: the rewritten text must contain every `require`
    /// token and none of the `forbid` tokens.
    Markers {
        #[serde(default)]
        require: Vec<String>,
        #[serde(default)]
        forbid: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldQuestion {
    pub instance_id: String,
    pub condition: Condition,
    pub answer: GoldAnswer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualification {
    Pending,
    Passed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub project_id: String,
    pub worker: String,
    pub condition: Condition,
    pub qualification: Qualification,
    /// Gold question instance ids, answered before any task.
    pub gold: Vec<String>,
    /// Task instance ids in presentation order.
    pub queue: Vec<String>,
    pub completed: BTreeSet<String>,
}

impl Session {
    pub fn progress(&self) -> Progress {
        Progress {
            completed: self.completed.len(),
            total: self.queue.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub m: usize,
    pub seed: u64,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub condition: Condition,
    /// Repository content hash the model was compiled from.
    pub repository_hash: String,
    pub repository_revision: u64,
    pub model: RuleModel,
    pub log: CompileLog,
    pub report: EvalReport,
}

/// Body of a corpus upload: either a corpus file written by `elicit
/// ingest`, or raw reviews to ingest and split server-side.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusUpload {
    Corpus(Box<Corpus>),
    Reviews {
        reviews: Vec<RawReview>,
        #[serde(default)]
        seed: u64,
        train: usize,
        test: usize,
        #[serde(default)]
        split_seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub corpus_hash: String,
    pub instances: usize,
    pub skipped_neutral: usize,
    pub train: usize,
    pub test: usize,
    pub balanced: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub instance_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Qualification {
        condition: Condition,
        questions: Vec<TaskInstance>,
    },
    Justify {
        condition: Condition,
        instance: TaskInstance,
        /// Taxonomies the concept screens offer; empty otherwise.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        taxonomies: Vec<Taxonomy>,
        progress: Progress,
    },
    Done {
        progress: Progress,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedAnswer {
    pub instance_id: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualificationResult {
    pub state: Qualification,
    pub correct: usize,
    pub total: usize,
    pub answers: Vec<GradedAnswer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub accepted: bool,
    pub revision: u64,
    pub warnings: Vec<String>,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub schema_version: u32,
    pub id: String,
    #[serde(default)]
    pub name: Option<String>,
    pub grading: Grading,
    /// Content hash of the uploaded corpus; the corpus itself is stored
    /// next to the project file.
    pub corpus_hash: Option<String>,
    #[serde(skip)]
    pub corpus: Option<Arc<Corpus>>,
    pub sample: Option<SampleRecord>,
    pub repository: Option<KnowledgeRepository>,
    pub gold: Vec<GoldQuestion>,
    pub sessions: BTreeMap<String, Session>,
    pub models: BTreeMap<Condition, ModelRecord>,
}

impl Project {
    pub fn new(id: impl Into<String>, name: Option<String>, grading: Grading) -> Self {
        Project {
            schema_version: PROJECT_SCHEMA_VERSION,
            id: id.into(),
            name,
            grading,
            corpus_hash: None,
            corpus: None,
            sample: None,
            repository: None,
            gold: Vec::new(),
            sessions: BTreeMap::new(),
            models: BTreeMap::new(),
        }
    }

    fn corpus(&self) -> Result<&Corpus> {
        self.corpus
            .as_deref()
            .ok_or_else(|| ServiceError::Lifecycle(format!("project {} has no corpus yet", self.id)))
    }

    fn sampled(&self) -> Result<(&SampleRecord, &KnowledgeRepository)> {
        match (&self.sample, &self.repository) {
            (Some(s), Some(r)) => Ok((s, r)),
            _ => Err(ServiceError::Lifecycle(format!("project {} has not been sampled yet", self.id))),
        }
    }

    fn ensure_no_sessions(&self, what: &str) -> Result<()> {
        if self.sessions.is_empty() {
            Ok(())
        } else {
            Err(ServiceError::Lifecycle(format!("cannot {what} once sessions are open")))
        }
    }

    pub fn upload_corpus(&mut self, upload: CorpusUpload) -> Result<CorpusSummary> {
        self.ensure_no_sessions("replace the corpus")?;
        let (corpus, warnings) = match upload {
            CorpusUpload::Corpus(c) => {
                c.check()?;
                (*c, Vec::new())
            }
            CorpusUpload::Reviews {
                reviews,
                seed,
                train,
                test,
                split_seed,
            } => {
                let ingested = ingest(reviews, seed)?;
                let corpus = balanced_split(&ingested.corpus, train, test, split_seed.unwrap_or(seed))?;
                (corpus, ingested.warnings)
            }
        };
        let summary = CorpusSummary {
            corpus_hash: corpus.content_hash(),
            instances: corpus.len(),
            skipped_neutral: corpus.skipped_neutral,
            train: corpus.splits.train.total(),
            test: corpus.splits.test.total(),
            balanced: corpus.balanced,
            warnings,
        };
        self.corpus_hash = Some(summary.corpus_hash.clone());
        self.corpus = Some(Arc::new(corpus));
        self.sample = None;
        self.repository = None;
        self.gold.clear();
        self.models.clear();
        Ok(summary)
    }

    /// Draws the representative sample from the Train split and opens an
    /// empty knowledge repository over it.
    pub fn request_sample(&mut self, m: usize, seed: u64) -> Result<SampleRecord> {
        self.ensure_no_sessions("re-sample")?;
        let corpus = self.corpus()?;
        let ids = representative_sample(corpus, m, seed)?;
        let repository = KnowledgeRepository::for_corpus(corpus, ids.iter().map(String::as_str))?;
        let sample = SampleRecord { m, seed, ids };
        self.sample = Some(sample.clone());
        self.repository = Some(repository);
        self.gold.clear();
        self.models.clear();
        Ok(sample)
    }

    pub fn set_gold(&mut self, gold: Vec<GoldQuestion>) -> Result<()> {
        self.ensure_no_sessions("change gold questions")?;
        let (sample, _) = self.sampled()?;
        let mut seen = BTreeSet::new();
        for q in &gold {
            if !sample.ids.contains(&q.instance_id) {
                return Err(ServiceError::InvalidArgument(format!(
                    "gold instance {} is not in the sample",
                    q.instance_id
                )));
            }
            if !seen.insert((q.condition, q.instance_id.as_str())) {
                return Err(ServiceError::InvalidArgument(format!(
                    "duplicate gold question for {} under {}",
                    q.instance_id, q.condition
                )));
            }
            let fits = matches!(
                (&q.answer, q.condition.uses_spans()),
                (GoldAnswer::Terms { .. }, true) | (GoldAnswer::Markers { .. }, false)
            );
            if !fits {
                return Err(ServiceError::InvalidArgument(format!(
                    "gold answer for {} does not fit the {} condition",
                    q.instance_id, q.condition
                )));
            }
        }
        self.gold = gold;
        Ok(())
    }

    fn next_condition(&self) -> Condition {
        let mut counts: BTreeMap<Condition, usize> = Condition::ALL.iter().map(|&c| (c, 0)).collect();
        for s in self.sessions.values() {
            *counts.entry(s.condition).or_default() += 1;
        }
        // fewest sessions so far, ties in the fixed condition order
        Condition::ALL
            .into_iter()
            .min_by_key(|c| counts[c])
            .expect("five conditions")
    }

    /// Opens a session for `worker`. Without an explicit condition the
    /// least-used one is assigned, which is round-robin when no condition
    /// is ever forced. A worker keeps one session per project.
    pub fn open_session(&mut self, worker: &str, condition: Option<Condition>) -> Result<Session> {
        if worker.trim().is_empty() {
            return Err(ServiceError::InvalidArgument("worker id must not be empty".into()));
        }
        let (sample, _) = self.sampled()?;
        if let Some(existing) = self.sessions.values().find(|s| s.worker == worker) {
            return match condition {
                Some(c) if c != existing.condition => Err(ServiceError::Lifecycle(format!(
                    "worker {worker} already has a {} session",
                    existing.condition
                ))),
                _ => Ok(existing.clone()),
            };
        }
        let condition = condition.unwrap_or_else(|| self.next_condition());
        let gold: Vec<String> = self
            .gold
            .iter()
            .filter(|q| q.condition == condition)
            .map(|q| q.instance_id.clone())
            .collect();
        let queue = sample.ids.iter().filter(|id| !gold.contains(id)).cloned().collect();
        let session = Session {
            id: format!("{}-s{:04}", self.id, self.sessions.len() + 1),
            project_id: self.id.clone(),
            worker: worker.to_string(),
            condition,
            qualification: if gold.is_empty() {
                Qualification::Passed
            } else {
                Qualification::Pending
            },
            gold,
            queue,
            completed: BTreeSet::new(),
        };
        self.sessions.insert(session.id.clone(), session.clone());
        Ok(session)
    }

    pub fn session(&self, id: &str) -> Result<&Session> {
        self.sessions
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(format!("session {id}")))
    }

    fn text_of(&self, id: &str) -> Result<TaskInstance> {
        let (_, repo) = self.sampled()?;
        let inst = repo
            .instance(id)
            .ok_or_else(|| ServiceError::NotFound(format!("instance {id}")))?;
        Ok(TaskInstance {
            instance_id: inst.id.clone(),
            text: inst.text.clone(),
        })
    }

    pub fn next_task(&self, session_id: &str) -> Result<Task> {
        let s = self.session(session_id)?;
        match s.qualification {
            Qualification::Failed => Err(ServiceError::SessionLocked(s.id.clone())),
            Qualification::Pending => Ok(Task::Qualification {
                condition: s.condition,
                questions: s.gold.iter().map(|id| self.text_of(id)).collect::<Result<_>>()?,
            }),
            Qualification::Passed => match s.queue.iter().find(|id| !s.completed.contains(*id)) {
                Some(id) => {
                    let taxonomies = match s.condition {
                        Condition::ConceptBow | Condition::ConceptAnnotation => {
                            self.sampled()?.1.taxonomies().into_iter().cloned().collect()
                        }
                        _ => Vec::new(),
                    };
                    Ok(Task::Justify {
                        condition: s.condition,
                        instance: self.text_of(id)?,
                        taxonomies,
                        progress: s.progress(),
                    })
                }
                None => Ok(Task::Done { progress: s.progress() }),
            },
        }
    }

    fn grade(&self, q: &GoldQuestion, answer: &Justification) -> bool {
        let Ok((_, repo)) = self.sampled() else {
            return false;
        };
        let Some(inst) = repo.instance(&q.instance_id) else {
            return false;
        };
        if answer.condition() != q.condition {
            return false;
        }
        // A worker may not know the project taxonomy yet; concept names
        // are not graded.
        let validation = validate_against(answer, &inst.text, inst.label, &[]);
        if validation
            .violations
            .iter()
            .any(|v| !matches!(v, Violation::UnknownConcept { .. }))
        {
            return false;
        }
        match &q.answer {
            GoldAnswer::Terms { terms, min_jaccard } => {
                let expected: BTreeSet<String> = terms.iter().flat_map(|t| normalized_words(t)).collect();
                let given: BTreeSet<String> = answer
                    .spans()
                    .iter()
                    .flat_map(|s| normalized_words(s.slice(&inst.text)))
                    .collect();
                jaccard(&expected, &given) >= min_jaccard.unwrap_or(self.grading.min_jaccard)
            }
            GoldAnswer::Markers { require, forbid } => {
                let text = match &answer.body {
                    JustificationBody::Perturbation { perturbed_text } => perturbed_text,
                    JustificationBody::Simplification { simplified_text } => simplified_text,
                    _ => return false,
                };
                let words: BTreeSet<String> = normalized_words(text).into_iter().collect();
                let has = |m: &String| normalized_words(m).iter().all(|w| words.contains(w));
                require.iter().all(has) && !forbid.iter().any(has)
            }
        }
    }

    /// Grades one answer per gold question; the session passes with more
    /// than half correct.
    pub fn check_qualification(&mut self, session_id: &str, mut answers: Vec<Justification>) -> Result<QualificationResult> {
        let s = self.session(session_id)?;
        // as with submissions, the session's worker is the author
        for a in &mut answers {
            a.author = s.worker.clone();
        }
        match s.qualification {
            Qualification::Failed => return Err(ServiceError::SessionLocked(s.id.clone())),
            Qualification::Passed => {
                return Err(ServiceError::Lifecycle(format!("session {} is already qualified", s.id)))
            }
            Qualification::Pending => {}
        }
        let mut by_instance: BTreeMap<&str, &Justification> = BTreeMap::new();
        for a in &answers {
            if !s.gold.contains(&a.instance_id) {
                return Err(ServiceError::InvalidArgument(format!(
                    "{} is not a gold question of this session",
                    a.instance_id
                )));
            }
            if by_instance.insert(&a.instance_id, a).is_some() {
                return Err(ServiceError::InvalidArgument(format!("two answers for {}", a.instance_id)));
            }
        }
        let missing: Vec<String> = s.gold.iter().filter(|g| !by_instance.contains_key(g.as_str())).cloned().collect();
        if !missing.is_empty() {
            return Err(ServiceError::IncompleteAnswers(missing));
        }

        let condition = s.condition;
        let graded: Vec<GradedAnswer> = s
            .gold
            .iter()
            .map(|id| {
                let q = self
                    .gold
                    .iter()
                    .find(|q| q.condition == condition && &q.instance_id == id)
                    .expect("session gold comes from project gold");
                GradedAnswer {
                    instance_id: id.clone(),
                    correct: self.grade(q, by_instance[id.as_str()]),
                }
            })
            .collect();
        let correct = graded.iter().filter(|g| g.correct).count();
        let total = graded.len();
        let state = if 2 * correct > total {
            Qualification::Passed
        } else {
            Qualification::Failed
        };
        self.sessions.get_mut(session_id).expect("checked above").qualification = state;
        Ok(QualificationResult {
            state,
            correct,
            total,
            answers: graded,
        })
    }

    fn working_session(&self, session_id: &str) -> Result<&Session> {
        let s = self.session(session_id)?;
        match s.qualification {
            Qualification::Failed => Err(ServiceError::SessionLocked(s.id.clone())),
            Qualification::Pending => Err(ServiceError::QualificationPending(s.id.clone())),
            Qualification::Passed => Ok(s),
        }
    }

    /// Stores a card-sorting taxonomy under the session's worker.
    pub fn submit_taxonomy(&mut self, session_id: &str, mut taxonomy: Taxonomy) -> Result<u64> {
        let worker = self.working_session(session_id)?.worker.clone();
        taxonomy.author = worker;
        let repo = self.repository.as_mut().expect("sessions imply a sample");
        repo.set_taxonomy(taxonomy)?;
        Ok(repo.revision)
    }

    /// Validates and stores a justification. The author is always the
    /// session's worker.
    pub fn submit_justification(&mut self, session_id: &str, mut j: Justification) -> Result<Submission> {
        let s = self.working_session(session_id)?;
        if j.condition() != s.condition {
            return Err(ServiceError::ConditionMismatch {
                expected: s.condition.to_string(),
                found: j.condition().to_string(),
            });
        }
        if !s.queue.contains(&j.instance_id) {
            return Err(ServiceError::OutOfQueue(j.instance_id.clone()));
        }
        j.author = s.worker.clone();
        let instance_id = j.instance_id.clone();
        let repo = self.repository.as_mut().expect("sessions imply a sample");
        let validation = repo.add_justification(j)?;
        let revision = repo.revision;
        let s = self.sessions.get_mut(session_id).expect("checked above");
        s.completed.insert(instance_id);
        Ok(Submission {
            accepted: true,
            revision,
            warnings: validation.warnings,
            progress: s.progress(),
        })
    }

    /// Compiles the condition's model from the current repository and
    /// evaluates it on the corpus Test split.
    pub fn compile_and_evaluate(&mut self, condition: Condition) -> Result<ModelRecord> {
        let corpus = self.corpus()?;
        let (_, repo) = self.sampled()?;
        if corpus.splits.test.total() == 0 {
            return Err(ServiceError::Lifecycle("the corpus has no test split".into()));
        }
        let compiled = compile(repo, condition)?;
        let report = evaluate(&compiled.model, corpus, Split::Test)?;
        let record = ModelRecord {
            condition,
            repository_hash: repo.content_hash(),
            repository_revision: repo.revision,
            model: compiled.model,
            log: compiled.log,
            report,
        };
        self.models.insert(condition, record.clone());
        Ok(record)
    }

    pub fn export_repository(&self) -> Result<String> {
        Ok(self.sampled()?.1.export()?)
    }

    pub fn summary(&self) -> ProjectSummary {
        let current = self.repository.as_ref().map(|r| r.content_hash());
        ProjectSummary {
            id: self.id.clone(),
            name: self.name.clone(),
            corpus_hash: self.corpus_hash.clone(),
            sample: self.sample.clone(),
            repository_revision: self.repository.as_ref().map(|r| r.revision),
            gold_questions: self.gold.len(),
            sessions: self.sessions.len(),
            models: self
                .models
                .values()
                .map(|m| ModelStatus {
                    condition: m.condition,
                    repository_revision: m.repository_revision,
                    current: current.as_deref() == Some(m.repository_hash.as_str()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStatus {
    pub condition: Condition,
    pub repository_revision: u64,
    /// Compiled from the repository as it is now.
    pub current: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: String,
    pub name: Option<String>,
    pub corpus_hash: Option<String>,
    pub sample: Option<SampleRecord>,
    pub repository_revision: Option<u64>,
    pub gold_questions: usize,
    pub sessions: usize,
    pub models: Vec<ModelStatus>,
}

/// |a ∩ b| / |a ∪ b|, with two empty sets counting as identical.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Gold label of a sampled instance, for building answers in tests and
/// clients.
pub fn gold_label(project: &Project, instance_id: &str) -> Option<Label> {
    project.repository.as_ref()?.instance(instance_id).map(|i| i.label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use elicit_core::Span;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn jaccard_values() {
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["b", "c"])), 1.0 / 3.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&[])), 0.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
    }

    fn sampled_project() -> Project {
        let reviews: Vec<RawReview> = [
            ("The burgers were delicious", 5),
            ("Our server was rude", 1),
            ("Lovely patio and kind staff", 4),
            ("The soup was cold", 2),
            ("Great value for the price", 5),
            ("Waited an hour for cold fries", 1),
        ]
        .iter()
        .map(|&(t, s)| RawReview { text: t.into(), stars: s })
        .collect();
        let mut p = Project::new("p0001", None, Grading::default());
        p.upload_corpus(CorpusUpload::Reviews {
            reviews,
            seed: 1,
            train: 4,
            test: 2,
            split_seed: None,
        })
        .unwrap();
        p.request_sample(4, 7).unwrap();
        p
    }

    #[test]
    fn sample_requires_corpus() {
        let mut p = Project::new("p0001", None, Grading::default());
        assert!(matches!(p.request_sample(3, 1), Err(ServiceError::Lifecycle(_))));
        assert!(matches!(p.open_session("w", None), Err(ServiceError::Lifecycle(_))));
    }

    #[test]
    fn terms_grading_uses_jaccard() {
        let mut p = sampled_project();
        let id = p.sample.as_ref().unwrap().ids[0].clone();
        let text = p.repository.as_ref().unwrap().instance(&id).unwrap().text.clone();
        let first_word = text.split(' ').next().unwrap().to_string();
        let words: Vec<String> = text.split(' ').map(String::from).collect();
        p.set_gold(vec![GoldQuestion {
            instance_id: id.clone(),
            condition: Condition::Bow,
            answer: GoldAnswer::Terms {
                terms: words[..2].to_vec(),
                min_jaccard: None,
            },
        }])
        .unwrap();
        let q = p.gold[0].clone();
        let answer = |spans: Vec<Span>| Justification {
            instance_id: id.clone(),
            label: gold_label(&p, &id).unwrap(),
            author: "w".into(),
            body: JustificationBody::Bow { spans },
        };
        let both = Span::new(0, words[0].len() + 1 + words[1].len());
        assert!(p.grade(&q, &answer(vec![both])));
        // one of two expected words: 1/2
        assert!(p.grade(&q, &answer(vec![Span::find(&text, &first_word).unwrap()])));
        // two of three
        let three = Span::new(0, words[0].len() + 1 + words[1].len() + 1 + words[2].len());
        assert!(p.grade(&q, &answer(vec![three])));
        let last = Span::find(&text, words.last().unwrap()).unwrap();
        assert!(!p.grade(&q, &answer(vec![last])));
    }

    #[test]
    fn markers_grading() {
        let mut p = sampled_project();
        let id = p.sample.as_ref().unwrap().ids[0].clone();
        let text = p.repository.as_ref().unwrap().instance(&id).unwrap().text.clone();
        let last = text.split(' ').next_back().unwrap().to_lowercase();
        p.set_gold(vec![GoldQuestion {
            instance_id: id.clone(),
            condition: Condition::Perturbation,
            answer: GoldAnswer::Markers {
                require: vec![],
                forbid: vec![last.clone()],
            },
        }])
        .unwrap();
        let q = p.gold[0].clone();
        let answer = |t: &str| Justification {
            instance_id: id.clone(),
            label: gold_label(&p, &id).unwrap(),
            author: "w".into(),
            body: JustificationBody::Perturbation { perturbed_text: t.into() },
        };
        assert!(p.grade(&q, &answer("something else entirely")));
        assert!(!p.grade(&q, &answer(&format!("{text} indeed"))));
        // an unchanged perturbation is invalid, hence wrong
        assert!(!p.grade(&q, &answer(&text)));
    }

    #[test]
    fn gold_kind_must_fit_condition() {
        let mut p = sampled_project();
        let id = p.sample.as_ref().unwrap().ids[0].clone();
        let bad = GoldQuestion {
            instance_id: id,
            condition: Condition::Simplification,
            answer: GoldAnswer::Terms {
                terms: vec!["x".into()],
                min_jaccard: None,
            },
        };
        assert!(matches!(p.set_gold(vec![bad]), Err(ServiceError::InvalidArgument(_))));
    }

    #[test]
    fn same_worker_keeps_their_session() {
        let mut p = sampled_project();
        let a = p.open_session("w1", None).unwrap();
        let b = p.open_session("w1", None).unwrap();
        assert_eq!(a, b);
        assert!(p.open_session("w1", Some(Condition::ConceptBow)).is_err());
        assert_eq!(p.sessions.len(), 1);
    }
}
