//! Technology lexicon and standard-library stoplists.
//!
//! Both load from plain-text pattern files: one pattern per line, `#` starts
//! a comment. In a lexicon, a trailing `.` marks a prefix pattern that only
//! matches strict descendants (`google.` matches `google.cloud` but not
//! `google`). A plain pattern matches itself and anything below it on a
//! segment boundary (`ndb` matches `ndb` and `ndb.model`, not `ndbx`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Language;

/// Technologies named as examples of specialized platform facilities.
pub const DEFAULT_TECH_PATTERNS: &[&str] = &[
    "google.appengine",
    "ndb",
    "search",
    "taskqueue",
    "urlfetch",
    "memcache",
    "mapreduce",
    "pipeline",
];

const PYTHON_STDLIB: &[&str] = &[
    "__future__", "abc", "argparse", "ast", "asyncio", "base64", "bisect", "calendar",
    "collections", "contextlib", "copy", "csv", "dataclasses", "datetime", "decimal", "enum",
    "functools", "glob", "hashlib", "heapq", "hmac", "html", "http", "inspect", "io",
    "itertools", "json", "logging", "math", "mock", "operator", "os", "pathlib", "pickle",
    "pprint", "random", "re", "shutil", "socket", "string", "struct", "subprocess", "sys",
    "tempfile", "textwrap", "threading", "time", "traceback", "types", "typing", "unittest",
    "urllib", "urlparse", "uuid", "warnings", "weakref", "xml", "zlib",
];

const JAVA_STDLIB: &[&str] = &["java", "javax", "jdk", "sun"];

const RUBY_STDLIB: &[&str] = &[
    "benchmark", "bigdecimal", "csv", "date", "digest", "erb", "fileutils", "json", "logger",
    "net", "open3", "openssl", "optparse", "ostruct", "pathname", "pp", "securerandom", "set",
    "socket", "stringio", "tempfile", "time", "timeout", "uri", "yaml",
];

/// Parses the pattern-file format. Returns `(line number, pattern)` pairs.
pub fn parse_patterns(text: &str) -> std::result::Result<Vec<(usize, String)>, (usize, String)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.chars().any(char::is_whitespace) {
            return Err((i + 1, format!("pattern `{line}` contains whitespace")));
        }
        if line == "." || line.starts_with('.') || line.contains("..") {
            return Err((i + 1, format!("malformed pattern `{line}`")));
        }
        out.push((i + 1, line.to_string()));
    }
    Ok(out)
}

fn read_pattern_file(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_patterns(&text)
        .map(|v| v.into_iter().map(|(_, p)| p).collect())
        .map_err(|(line, message)| Error::PatternFile {
            path: path.to_path_buf(),
            line,
            message,
        })
}

fn segment_prefix_of(prefix: &str, path: &str) -> bool {
    path == prefix
        || (path.len() > prefix.len()
            && path.starts_with(prefix)
            && path.as_bytes()[prefix.len()] == b'.')
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TechLexicon {
    patterns: BTreeSet<String>,
}

impl Default for TechLexicon {
    fn default() -> Self {
        Self::from_patterns(DEFAULT_TECH_PATTERNS.iter().copied())
    }
}

impl TechLexicon {
    pub fn empty() -> Self {
        TechLexicon {
            patterns: BTreeSet::new(),
        }
    }

    pub fn from_patterns<S: AsRef<str>>(patterns: impl IntoIterator<Item = S>) -> Self {
        TechLexicon {
            patterns: patterns.into_iter().map(|p| p.as_ref().to_string()).collect(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::from_patterns(read_pattern_file(path)?))
    }

    pub fn patterns(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().map(String::as_str)
    }

    /// Longest pattern matching `path`, if any.
    pub fn matching_pattern(&self, path: &str) -> Option<&str> {
        self.patterns
            .iter()
            .filter(|p| match p.strip_suffix('.') {
                Some(stem) => path.len() > p.len() && path.starts_with(p.as_str()) && !stem.is_empty(),
                None => segment_prefix_of(p, path),
            })
            .max_by_key(|p| p.len())
            .map(String::as_str)
    }
}

/// Per-language sets of top-level module names to drop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stoplists {
    by_language: BTreeMap<Language, BTreeSet<String>>,
}

impl Default for Stoplists {
    fn default() -> Self {
        let mut s = Stoplists::empty();
        s.extend(Language::Python, PYTHON_STDLIB.iter().copied());
        s.extend(Language::Java, JAVA_STDLIB.iter().copied());
        s.extend(Language::Ruby, RUBY_STDLIB.iter().copied());
        s
    }
}

impl Stoplists {
    pub fn empty() -> Self {
        Stoplists {
            by_language: BTreeMap::new(),
        }
    }

    pub fn extend<S: AsRef<str>>(&mut self, language: Language, names: impl IntoIterator<Item = S>) {
        self.by_language
            .entry(language)
            .or_default()
            .extend(names.into_iter().map(|n| n.as_ref().to_string()));
    }

    pub fn extend_from_file(&mut self, language: Language, path: &Path) -> Result<()> {
        let names = read_pattern_file(path)?;
        self.extend(language, names);
        Ok(())
    }

    pub fn contains(&self, language: Language, top_level: &str) -> bool {
        self.by_language
            .get(&language)
            .is_some_and(|s| s.contains(top_level))
    }
}
