//! Pull request metadata files and window selection.
//!
//! Metadata is newline-delimited JSON, one pull request per line. Blank
//! lines are ignored.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ProjectHistory, PullRequest};
use crate::repo::GitRepo;

/// Parses metadata text. Record numbers in errors are 1-based line numbers.
pub fn parse_history(text: &str, repo_path: impl AsRef<Path>) -> Result<ProjectHistory> {
    let mut prs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(line);
        let pr: PullRequest = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            Error::MalformedRecord {
                index: i + 1,
                field: if field == "." { "<record>".into() } else { field },
                message: e.into_inner().to_string(),
            }
        })?;
        prs.push(pr);
    }
    ProjectHistory::new(prs, repo_path)
}

/// Loads metadata and checks that the repository can be opened.
pub fn load_history(metadata_path: &Path, repo_path: &Path) -> Result<ProjectHistory> {
    GitRepo::open(repo_path)?;
    let text = std::fs::read_to_string(metadata_path).map_err(|source| Error::Io {
        path: metadata_path.to_path_buf(),
        source,
    })?;
    parse_history(&text, repo_path)
}

/// Metadata text for `history`, one record per line in chronological order.
pub fn serialize_history(history: &ProjectHistory) -> String {
    let mut out = String::new();
    for pr in history.prs() {
        out.push_str(&serde_json::to_string(pr).expect("pull request serializes"));
        out.push('\n');
    }
    out
}

/// Up to `w` CLOSED pull requests closed strictly before `reference`, most
/// recent first (ties: larger id first). `None` means no upper bound.
pub fn select_window(
    history: &ProjectHistory,
    reference: Option<i64>,
    w: usize,
) -> Vec<&PullRequest> {
    let mut closed: Vec<&PullRequest> = history
        .prs()
        .iter()
        .filter(|pr| pr.is_closed())
        .filter(|pr| match (pr.closed_at, reference) {
            (Some(c), Some(r)) => c < r,
            (Some(_), None) => true,
            (None, _) => false,
        })
        .collect();
    closed.sort_by(|a, b| (b.closed_at, &b.id).cmp(&(a.closed_at, &a.id)));
    closed.truncate(w);
    closed
}
