use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::Language;

/// Top-level module names the project defines itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProjectModuleIndex {
    pub top_level_modules: BTreeSet<String>,
}

fn stem(file: &str) -> &str {
    file.rsplit_once('.').map(|(s, _)| s).unwrap_or(file)
}

impl ProjectModuleIndex {
    pub fn from_modules<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        ProjectModuleIndex {
            top_level_modules: names.into_iter().map(|n| n.as_ref().to_string()).collect(),
        }
    }

    /// Builds the index from every file path in a snapshot.
    ///
    /// Under the repository root, a directory counts when it holds an
    /// `__init__.py` and a source file counts by its stem. Under an explicit
    /// source root, any directory holding source files counts as well.
    pub fn build<S: AsRef<str>>(paths: &[S], source_roots: &[String]) -> Self {
        let all: BTreeSet<&str> = paths.iter().map(|p| p.as_ref()).collect();
        let mut modules = BTreeSet::new();

        for &path in &all {
            if Language::from_path(path) == Language::Other {
                continue;
            }
            // the repository root plus the deepest explicit root containing the path
            let explicit = source_roots
                .iter()
                .map(String::as_str)
                .filter(|r| !r.is_empty() && path.len() > r.len() && path.starts_with(r) && path.as_bytes()[r.len()] == b'/')
                .max_by_key(|r| r.len());
            for root in std::iter::once("").chain(explicit) {
                let rest = if root.is_empty() {
                    path
                } else {
                    match path
                        .strip_prefix(root)
                        .and_then(|r| r.strip_prefix('/'))
                    {
                        Some(r) => r,
                        None => continue,
                    }
                };
                match rest.split_once('/') {
                    None => {
                        modules.insert(stem(rest).to_string());
                    }
                    Some((dir, _)) => {
                        let marker = if root.is_empty() {
                            format!("{dir}/__init__.py")
                        } else {
                            format!("{root}/{dir}/__init__.py")
                        };
                        if !root.is_empty() || all.contains(marker.as_str()) {
                            modules.insert(dir.to_string());
                        }
                    }
                }
            }
        }
        ProjectModuleIndex {
            top_level_modules: modules,
        }
    }

    pub fn contains(&self, top_level: &str) -> bool {
        self.top_level_modules.contains(top_level)
    }
}
