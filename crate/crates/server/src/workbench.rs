//! Project registry with per-project write serialization and atomic
//! JSON-file persistence.
//!
//! Each project lives in `<dir>/<id>.json`; its corpus, which only changes
//! on upload, in `<dir>/<id>.corpus.json`. Writes go to a temporary file in
//! the same directory and are renamed into place, so a crash leaves either
//! the old or the new state on disk. A mutation is applied to a copy of the
//! project and only becomes visible once persisted.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use elicit_core::corpus::Corpus;
use elicit_core::{Condition, Justification, Taxonomy};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::project::{
    CorpusSummary, CorpusUpload, GoldQuestion, Grading, ModelRecord, Project, ProjectSummary, QualificationResult,
    SampleRecord, Session, Submission, Task, PROJECT_SCHEMA_VERSION,
};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CreateProject {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub grading: Option<Grading>,
}

#[derive(Default)]
pub struct Workbench {
    dir: Option<PathBuf>,
    projects: RwLock<BTreeMap<String, Arc<Mutex<Project>>>>,
    /// Serializes project creation so ids stay sequential.
    create: Mutex<()>,
}

fn storage<E: std::fmt::Display>(what: &Path) -> impl FnOnce(E) -> ServiceError + '_ {
    move |e| ServiceError::Storage(format!("{}: {e}", what.display()))
}

fn write_atomic(dir: &Path, file: &Path, contents: &str) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(storage(dir))?;
    tmp.write_all(contents.as_bytes()).map_err(storage(file))?;
    tmp.as_file().sync_all().map_err(storage(file))?;
    tmp.persist(file).map_err(storage(file))?;
    Ok(())
}

/// Session ids are `<project>-sNNNN`.
fn project_of_session(session_id: &str) -> Result<&str> {
    session_id
        .rsplit_once("-s")
        .map(|(p, _)| p)
        .ok_or_else(|| ServiceError::NotFound(format!("session {session_id}")))
}

impl Workbench {
    /// State held in memory only.
    pub fn in_memory() -> Self {
        Workbench::default()
    }

    /// Opens (creating if needed) a data directory and loads every project
    /// in it.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(storage(&dir))?;
        let mut projects = BTreeMap::new();
        for entry in fs::read_dir(&dir).map_err(storage(&dir))? {
            let path = entry.map_err(storage(&dir))?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if !name.ends_with(".json") || name.ends_with(".corpus.json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(storage(&path))?;
            let mut project: Project = serde_json::from_str(&text).map_err(storage(&path))?;
            if project.schema_version != PROJECT_SCHEMA_VERSION {
                return Err(ServiceError::Storage(format!(
                    "{}: unsupported project schema version {}",
                    path.display(),
                    project.schema_version
                )));
            }
            if project.corpus_hash.is_some() {
                let corpus_path = dir.join(format!("{}.corpus.json", project.id));
                let text = fs::read_to_string(&corpus_path).map_err(storage(&corpus_path))?;
                let corpus = Corpus::from_json(&text).map_err(storage(&corpus_path))?;
                if Some(corpus.content_hash()) != project.corpus_hash {
                    return Err(ServiceError::Storage(format!(
                        "{}: corpus does not match the project's corpus hash",
                        corpus_path.display()
                    )));
                }
                project.corpus = Some(Arc::new(corpus));
            }
            if let Some(repo) = &project.repository {
                repo.check().map_err(storage(&path))?;
            }
            tracing::info!(project = project.id, "loaded");
            projects.insert(project.id.clone(), Arc::new(Mutex::new(project)));
        }
        Ok(Workbench {
            dir: Some(dir),
            projects: RwLock::new(projects),
            create: Mutex::new(()),
        })
    }

    fn persist(&self, project: &Project, corpus_changed: bool) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        if corpus_changed {
            if let Some(corpus) = &project.corpus {
                let path = dir.join(format!("{}.corpus.json", project.id));
                write_atomic(dir, &path, &corpus.to_json()?)?;
            }
        }
        let path = dir.join(format!("{}.json", project.id));
        let text = serde_json::to_string_pretty(project).map_err(|e| ServiceError::Internal(e.to_string()))?;
        write_atomic(dir, &path, &text)
    }

    fn project(&self, id: &str) -> Result<Arc<Mutex<Project>>> {
        self.projects
            .read()
            .expect("project map lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("project {id}")))
    }

    fn read<T>(&self, id: &str, f: impl FnOnce(&Project) -> Result<T>) -> Result<T> {
        let project = self.project(id)?;
        let guard = project.lock().expect("project lock poisoned");
        f(&guard)
    }

    /// Runs `f` on a copy of the project and commits the copy once it is
    /// on disk.
    fn write<T>(&self, id: &str, corpus_changed: bool, f: impl FnOnce(&mut Project) -> Result<T>) -> Result<T> {
        let project = self.project(id)?;
        let mut guard = project.lock().expect("project lock poisoned");
        let mut draft = guard.clone();
        let out = f(&mut draft)?;
        self.persist(&draft, corpus_changed)?;
        *guard = draft;
        Ok(out)
    }

    pub fn create_project(&self, req: CreateProject) -> Result<ProjectSummary> {
        let _serial = self.create.lock().expect("create lock poisoned");
        let id = format!("p{:04}", self.projects.read().expect("project map lock poisoned").len() + 1);
        let project = Project::new(&id, req.name, req.grading.unwrap_or_default());
        self.persist(&project, false)?;
        let summary = project.summary();
        self.projects
            .write()
            .expect("project map lock poisoned")
            .insert(id, Arc::new(Mutex::new(project)));
        Ok(summary)
    }

    pub fn project_ids(&self) -> Vec<String> {
        self.projects.read().expect("project map lock poisoned").keys().cloned().collect()
    }

    pub fn summary(&self, id: &str) -> Result<ProjectSummary> {
        self.read(id, |p| Ok(p.summary()))
    }

    pub fn upload_corpus(&self, id: &str, upload: CorpusUpload) -> Result<CorpusSummary> {
        self.write(id, true, |p| p.upload_corpus(upload))
    }

    pub fn request_sample(&self, id: &str, m: usize, seed: u64) -> Result<SampleRecord> {
        self.write(id, false, |p| p.request_sample(m, seed))
    }

    pub fn set_gold(&self, id: &str, gold: Vec<GoldQuestion>) -> Result<usize> {
        let n = gold.len();
        self.write(id, false, |p| p.set_gold(gold))?;
        Ok(n)
    }

    pub fn open_session(&self, id: &str, worker: &str, condition: Option<Condition>) -> Result<Session> {
        self.write(id, false, |p| p.open_session(worker, condition))
    }

    pub fn session(&self, session_id: &str) -> Result<Session> {
        self.read(project_of_session(session_id)?, |p| p.session(session_id).cloned())
    }

    pub fn next_task(&self, session_id: &str) -> Result<Task> {
        self.read(project_of_session(session_id)?, |p| p.next_task(session_id))
    }

    pub fn check_qualification(&self, session_id: &str, answers: Vec<Justification>) -> Result<QualificationResult> {
        self.write(project_of_session(session_id)?, false, |p| p.check_qualification(session_id, answers))
    }

    pub fn submit_taxonomy(&self, session_id: &str, taxonomy: Taxonomy) -> Result<u64> {
        self.write(project_of_session(session_id)?, false, |p| p.submit_taxonomy(session_id, taxonomy))
    }

    pub fn submit_justification(&self, session_id: &str, j: Justification) -> Result<Submission> {
        self.write(project_of_session(session_id)?, false, |p| p.submit_justification(session_id, j))
    }

    pub fn compile_and_evaluate(&self, id: &str, condition: Condition) -> Result<ModelRecord> {
        self.write(id, false, |p| p.compile_and_evaluate(condition))
    }

    pub fn model(&self, id: &str, condition: Condition) -> Result<ModelRecord> {
        self.read(id, |p| {
            p.models
                .get(&condition)
                .cloned()
                .ok_or_else(|| ServiceError::NotFound(format!("{condition} model of project {id}")))
        })
    }

    pub fn export_repository(&self, id: &str) -> Result<String> {
        self.read(id, |p| p.export_repository())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use elicit_core::corpus::RawReview;

    fn upload() -> CorpusUpload {
        CorpusUpload::Reviews {
            reviews: (0..12)
                .map(|i| RawReview {
                    text: format!("review {i} was {}", if i % 2 == 0 { "great" } else { "awful" }),
                    stars: if i % 2 == 0 { 5 } else { 1 },
                })
                .collect(),
            seed: 3,
            train: 8,
            test: 4,
            split_seed: None,
        }
    }

    #[test]
    fn state_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (id, sample, session) = {
            let wb = Workbench::open(dir.path()).unwrap();
            let id = wb.create_project(CreateProject::default()).unwrap().id;
            wb.upload_corpus(&id, upload()).unwrap();
            let sample = wb.request_sample(&id, 4, 9).unwrap();
            let session = wb.open_session(&id, "w1", None).unwrap();
            (id, sample, session)
        };
        let wb = Workbench::open(dir.path()).unwrap();
        assert_eq!(wb.project_ids(), vec![id.clone()]);
        assert_eq!(wb.summary(&id).unwrap().sample, Some(sample));
        assert_eq!(wb.session(&session.id).unwrap(), session);
        // the corpus came back too: a second project id is fresh
        assert_eq!(wb.create_project(CreateProject::default()).unwrap().id, "p0002");
    }

    #[test]
    fn failed_mutation_leaves_state_untouched() {
        let wb = Workbench::in_memory();
        let id = wb.create_project(CreateProject::default()).unwrap().id;
        wb.upload_corpus(&id, upload()).unwrap();
        let before = wb.summary(&id).unwrap();
        assert!(wb.request_sample(&id, 100, 1).is_err());
        assert_eq!(wb.summary(&id).unwrap(), before);
    }

    #[test]
    fn unknown_ids() {
        let wb = Workbench::in_memory();
        assert!(matches!(wb.summary("p0404"), Err(ServiceError::NotFound(_))));
        assert!(matches!(wb.next_task("nonsense"), Err(ServiceError::NotFound(_))));
        assert!(matches!(wb.next_task("p0001-s0001"), Err(ServiceError::NotFound(_))));
    }
}
