//! One loaded project plus the result cache. Every front end goes through
//! [`Engine::recommend`], so they all produce the same documents.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use revrec_core::extract::lexicon::TechLexicon;
use revrec_core::extract::{analyze_pr, PrExtraction};
use revrec_core::history::load_history;
use revrec_core::repo::GitRepo;
use revrec_core::{
    ChangedFile, Config, Error as CoreError, Execution, Language, PrId, PrState, PullRequest,
    Recommendation, Recommender, ReviewRequest, Strategy,
};
use sha2::{Digest, Sha256};

use crate::cache::{CacheKey, Lookup, RecommendationCache};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("unknown pull request {0}")]
    UnknownPullRequest(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl From<CoreError> for EngineError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnknownPullRequest(id) => EngineError::UnknownPullRequest(id),
            CoreError::InvalidConfig(_) | CoreError::InvalidPullRequest { .. } => EngineError::Invalid(e.to_string()),
            other => EngineError::Internal(other.into()),
        }
    }
}

/// Settings shared by every command that loads a project.
#[derive(Clone, Debug)]
pub struct ProjectSpec {
    pub repo: PathBuf,
    pub history: PathBuf,
    pub window: usize,
    pub k: usize,
    pub tech_lexicon: Option<PathBuf>,
    pub stoplists: Vec<(Language, PathBuf)>,
    pub execution: Execution,
}

impl ProjectSpec {
    pub fn new(repo: impl Into<PathBuf>, history: impl Into<PathBuf>) -> Self {
        ProjectSpec {
            repo: repo.into(),
            history: history.into(),
            window: 30,
            k: 5,
            tech_lexicon: None,
            stoplists: Vec::new(),
            execution: Execution::default(),
        }
    }

    pub fn config(&self) -> revrec_core::Result<Config> {
        let mut cfg = Config {
            window_size: self.window,
            k: self.k,
            ..Config::default()
        };
        if let Some(path) = &self.tech_lexicon {
            cfg.tech_lexicon = TechLexicon::from_file(path)?;
        }
        for (language, path) in &self.stoplists {
            cfg.stoplists.extend_from_file(*language, path)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What to recommend reviewers for.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Existing(PrId),
    New { author: String, files: Vec<ChangedFile> },
}

#[derive(Clone, Debug)]
pub struct Query {
    pub target: Target,
    pub strategy: Strategy,
    pub k: Option<usize>,
    pub refresh: bool,
}

#[derive(Clone, Debug)]
pub struct Answer {
    /// The machine-readable document, identical across front ends.
    pub json: String,
    pub recommendation: Recommendation,
    pub lookup: Lookup,
}

pub struct Engine {
    recommender: Recommender,
    repo: GitRepo,
    cache: Arc<RecommendationCache>,
    project_digest: String,
    head: String,
}

fn digest_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(&h.finalize()[..8])
}

impl Engine {
    pub fn open(spec: &ProjectSpec, cache: Arc<RecommendationCache>) -> Result<Self, EngineError> {
        let cfg = spec.config()?;
        let history = load_history(&spec.history, &spec.repo).map_err(|e| EngineError::Invalid(e.to_string()))?;
        let repo = GitRepo::open(&spec.repo).map_err(|e| EngineError::Invalid(e.to_string()))?;
        let head = repo.head_commit()?.unwrap_or_else(|| "none".into());
        let metadata = std::fs::read(&spec.history).map_err(|e| EngineError::Internal(e.into()))?;
        let location = std::fs::canonicalize(&spec.repo).unwrap_or_else(|_| spec.repo.clone());
        let project_digest = digest_hex(&[location.to_string_lossy().as_bytes(), &metadata]);
        let recommender = Recommender::open(history, cfg)?.with_execution(spec.execution);
        Ok(Engine {
            recommender,
            repo,
            cache,
            project_digest,
            head,
        })
    }

    pub fn recommender(&self) -> &Recommender {
        &self.recommender
    }

    pub fn cache(&self) -> &RecommendationCache {
        &self.cache
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn repo_path(&self) -> &Path {
        self.repo.path()
    }

    /// Parses `REV:PATH` or `PATH` (at HEAD) and pins the revision to a
    /// commit id.
    pub fn resolve_file(&self, spec: &str) -> Result<ChangedFile, EngineError> {
        let (rev, path) = match spec.split_once(':') {
            Some((rev, path)) => (rev, path),
            None => ("HEAD", spec),
        };
        self.pin_file(rev, path)
    }

    pub fn pin_file(&self, rev: &str, path: &str) -> Result<ChangedFile, EngineError> {
        let commit = self
            .repo
            .resolve_commit(rev)
            .map_err(|e| EngineError::Invalid(format!("{path}: {e}")))?;
        let file = ChangedFile::new(path, commit);
        file.validate().map_err(EngineError::Invalid)?;
        Ok(file)
    }

    pub fn request(&self, target: &Target) -> Result<ReviewRequest, EngineError> {
        match target {
            Target::Existing(id) => Ok(ReviewRequest::existing(self.recommender.history(), id)?),
            Target::New { author, files } => {
                if author.trim().is_empty() {
                    return Err(EngineError::Invalid("author must not be empty".into()));
                }
                if files.is_empty() {
                    return Err(EngineError::Invalid("changed file list is empty".into()));
                }
                Ok(ReviewRequest::new_pr("new", author.clone(), files.clone()))
            }
        }
    }

    fn key(&self, query: &Query, cfg: &Config) -> CacheKey {
        let target = match &query.target {
            Target::Existing(id) => format!("pr:{id}"),
            Target::New { author, files } => {
                let listed: Vec<String> = files.iter().map(|f| format!("{}:{}", f.commit, f.path)).collect();
                format!("new:{}", digest_hex(&[author.as_bytes(), listed.join("\n").as_bytes()]))
            }
        };
        CacheKey {
            project: self.project_digest.clone(),
            head: self.head.clone(),
            config: cfg.digest(),
            request: format!("{target}:{}", query.strategy.name()),
        }
    }

    pub fn recommend(&self, query: &Query) -> Result<Answer, EngineError> {
        let mut cfg = self.recommender.config().clone();
        if let Some(k) = query.k {
            cfg.k = k;
        }
        cfg.validate()?;
        let request = self.request(&query.target)?;
        let key = self.key(query, &cfg);
        let (json, lookup) = self.cache.get_or_compute(&key, query.refresh, || {
            self.recommender
                .recommend_with(&request, query.strategy, Some(cfg.k), None)
                .map(|r| r.to_json())
        })?;
        let recommendation = serde_json::from_str(&json).map_err(|e| EngineError::Internal(e.into()))?;
        Ok(Answer {
            json,
            recommendation,
            lookup,
        })
    }

    /// Token extraction detail for a target, bypassing the cache.
    pub fn extract(&self, target: &Target) -> Result<PrExtraction, EngineError> {
        let pr = match target {
            Target::Existing(id) => self
                .recommender
                .history()
                .get(id)
                .cloned()
                .ok_or_else(|| EngineError::UnknownPullRequest(id.to_string()))?,
            Target::New { author, files } => PullRequest {
                id: PrId("new".into()),
                author: author.clone(),
                created_at: 0,
                closed_at: None,
                state: PrState::Open,
                commits: Vec::new(),
                changed_files: files.clone(),
                referenced_reviewers: Default::default(),
                actual_reviewers: Default::default(),
            },
        };
        let r = &self.recommender;
        Ok(analyze_pr(&pr, r.reader(), r.index(), r.config()))
    }
}
