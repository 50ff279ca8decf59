//! File contents at a given commit.
//!
//! Pull request metadata only lists paths; contents come from a local Git
//! object store. `git2::Repository` is not `Sync`, so [`GitRepo`] keeps a
//! small pool of handles and lends one per read.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use git2::{ObjectType, Oid, Repository, TreeWalkMode, TreeWalkResult};
use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReadError {
    #[error("commit {0} not found")]
    CommitNotFound(String),
    #[error("{path} not present at {commit}")]
    PathNotFound { commit: String, path: String },
    #[error("{0} is not a regular file")]
    NotAFile(String),
    #[error("repository error: {0}")]
    Repository(String),
}

/// Resolves a `(commit, path)` content handle to bytes. Must tolerate
/// concurrent calls.
pub trait SourceReader: Send + Sync {
    fn read_file(&self, commit: &str, path: &str) -> std::result::Result<Vec<u8>, ReadError>;
}

pub struct GitRepo {
    path: PathBuf,
    pool: Mutex<Vec<Repository>>,
}

impl std::fmt::Debug for GitRepo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GitRepo").field("path", &self.path).finish()
    }
}

impl GitRepo {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let repo = Repository::open(&path)
            .map_err(|e| Error::SnapshotUnavailable(format!("{}: {}", path.display(), e.message())))?;
        Ok(GitRepo {
            path,
            pool: Mutex::new(vec![repo]),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn with_repo<T>(&self, f: impl FnOnce(&Repository) -> T) -> std::result::Result<T, git2::Error> {
        let handle = self.pool.lock().expect("pool lock").pop();
        let repo = match handle {
            Some(r) => r,
            None => Repository::open(&self.path)?,
        };
        let out = f(&repo);
        self.pool.lock().expect("pool lock").push(repo);
        Ok(out)
    }

    /// Commit id that HEAD resolves to, or `None` for an empty repository.
    pub fn head_commit(&self) -> Result<Option<String>> {
        self.with_repo(|repo| match repo.head() {
            Ok(head) => head
                .peel_to_commit()
                .map(|c| Some(c.id().to_string()))
                .map_err(Error::from),
            Err(e) if e.code() == git2::ErrorCode::UnbornBranch || e.code() == git2::ErrorCode::NotFound => Ok(None),
            Err(e) => Err(Error::from(e)),
        })?
    }

    /// Every blob path in the tree of `rev` (HEAD when `None`).
    pub fn tree_paths(&self, rev: Option<&str>) -> Result<Vec<String>> {
        let commit = match rev {
            Some(r) => Some(r.to_string()),
            None => self.head_commit()?,
        };
        let Some(commit) = commit else {
            return Ok(Vec::new());
        };
        self.with_repo(|repo| -> Result<Vec<String>> {
            let tree = repo
                .revparse_single(&commit)
                .and_then(|o| o.peel_to_tree())
                .map_err(|e| Error::SnapshotUnavailable(e.message().to_string()))?;
            let mut paths = Vec::new();
            tree.walk(TreeWalkMode::PreOrder, |dir, entry| {
                if entry.kind() == Some(ObjectType::Blob) {
                    if let Ok(name) = entry.name() {
                        paths.push(format!("{dir}{name}"));
                    }
                }
                TreeWalkResult::Ok
            })?;
            paths.sort();
            Ok(paths)
        })
        .map_err(|e| Error::SnapshotUnavailable(e.message().to_string()))?
    }

    /// Resolves a revision expression (`HEAD`, a branch, an abbreviated id)
    /// to a full commit id.
    pub fn resolve_commit(&self, rev: &str) -> std::result::Result<String, ReadError> {
        self.with_repo(|repo| {
            repo.revparse_single(rev)
                .and_then(|o| o.peel_to_commit())
                .map(|c| c.id().to_string())
                .map_err(|_| ReadError::CommitNotFound(rev.to_string()))
        })
        .map_err(|e| ReadError::Repository(e.message().to_string()))?
    }
}

/// Reads `path` as recorded at `commit_id`.
pub fn read_file_at(
    repo: &GitRepo,
    commit_id: &str,
    path: &str,
) -> std::result::Result<Vec<u8>, ReadError> {
    repo.read_file(commit_id, path)
}

impl SourceReader for GitRepo {
    fn read_file(&self, commit: &str, path: &str) -> std::result::Result<Vec<u8>, ReadError> {
        self.with_repo(|repo| {
            let object = Oid::from_str(commit)
                .ok()
                .and_then(|oid| repo.find_commit(oid).ok())
                .or_else(|| repo.revparse_single(commit).ok()?.peel_to_commit().ok())
                .ok_or_else(|| ReadError::CommitNotFound(commit.to_string()))?;
            let tree = object
                .tree()
                .map_err(|e| ReadError::Repository(e.message().to_string()))?;
            let entry = tree.get_path(Path::new(path)).map_err(|_| ReadError::PathNotFound {
                commit: commit.to_string(),
                path: path.to_string(),
            })?;
            let blob = entry
                .to_object(repo)
                .and_then(|o| o.peel_to_blob())
                .map_err(|_| ReadError::NotAFile(path.to_string()))?;
            Ok(blob.content().to_vec())
        })
        .map_err(|e| ReadError::Repository(e.message().to_string()))?
    }
}

/// In-memory contents keyed by `(commit, path)`.
#[derive(Clone, Debug, Default)]
pub struct MemorySource {
    files: HashMap<(String, String), Vec<u8>>,
}

impl MemorySource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, commit: &str, path: &str, content: impl Into<Vec<u8>>) {
        self.files
            .insert((commit.to_string(), path.to_string()), content.into());
    }

    pub fn with(mut self, commit: &str, path: &str, content: impl Into<Vec<u8>>) -> Self {
        self.insert(commit, path, content);
        self
    }
}

impl SourceReader for MemorySource {
    fn read_file(&self, commit: &str, path: &str) -> std::result::Result<Vec<u8>, ReadError> {
        self.files
            .get(&(commit.to_string(), path.to_string()))
            .cloned()
            .ok_or_else(|| ReadError::PathNotFound {
                commit: commit.to_string(),
                path: path.to_string(),
            })
    }
}
