//! Domain types shared by every stage of the pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extract::lexicon::{Stoplists, TechLexicon};

/// Pull request identifier. Numeric ids in metadata files are accepted and
/// kept in their decimal string form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct PrId(pub String);

impl<'de> Deserialize<'de> for PrId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Num(u64),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Str(s) => PrId(s),
            Raw::Num(n) => PrId(n.to_string()),
        })
    }
}

impl fmt::Display for PrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PrId {
    fn from(s: &str) -> Self {
        PrId(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    Python,
    Java,
    Ruby,
    Other,
}

impl Language {
    pub fn from_path(path: &str) -> Self {
        let ext = path.rsplit_once('.').map(|(_, e)| e).unwrap_or("");
        match ext {
            "py" => Language::Python,
            "java" => Language::Java,
            "rb" => Language::Ruby,
            _ => Language::Other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
            Language::Ruby => "ruby",
            Language::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Some(Language::Python),
            "java" => Some(Language::Java),
            "ruby" | "rb" => Some(Language::Ruby),
            "other" => Some(Language::Other),
            _ => None,
        }
    }
}

/// A file touched by a pull request. `(commit, path)` is the content handle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedFile {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    language: Option<Language>,
    pub commit: String,
}

impl ChangedFile {
    pub fn new(path: impl Into<String>, commit: impl Into<String>) -> Self {
        ChangedFile {
            path: path.into(),
            language: None,
            commit: commit.into(),
        }
    }

    pub fn with_language(mut self, language: Language) -> Self {
        self.language = Some(language);
        self
    }

    pub fn language(&self) -> Language {
        self.language
            .unwrap_or_else(|| Language::from_path(&self.path))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.path.is_empty() {
            return Err("empty path".into());
        }
        if self.path.starts_with('/') {
            return Err(format!("path `{}` has a leading slash", self.path));
        }
        if self.path.contains('\\') {
            return Err(format!("path `{}` uses backslash separators", self.path));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PrState {
    Open,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequest {
    pub id: PrId,
    pub author: String,
    pub created_at: i64,
    #[serde(default)]
    pub closed_at: Option<i64>,
    pub state: PrState,
    #[serde(default)]
    pub commits: Vec<String>,
    #[serde(default)]
    pub changed_files: Vec<ChangedFile>,
    #[serde(default)]
    pub referenced_reviewers: BTreeSet<String>,
    #[serde(default)]
    pub actual_reviewers: BTreeSet<String>,
}

impl PullRequest {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::InvalidPullRequest {
            id: self.id.to_string(),
            message,
        };
        if self.id.0.is_empty() {
            return Err(fail("empty id".into()));
        }
        if self.author.is_empty() {
            return Err(fail("empty author".into()));
        }
        match (self.state, self.closed_at) {
            (PrState::Closed, None) => return Err(fail("CLOSED without closed_at".into())),
            (PrState::Closed, Some(c)) if c < self.created_at => {
                return Err(fail(format!(
                    "closed_at {c} precedes created_at {}",
                    self.created_at
                )))
            }
            _ => {}
        }
        let mut seen = BTreeSet::new();
        for file in &self.changed_files {
            file.validate().map_err(fail)?;
            if !seen.insert(file.path.as_str()) {
                return Err(fail(format!("duplicate changed file `{}`", file.path)));
            }
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.state == PrState::Closed
    }

    pub fn ground_truth(&self) -> BTreeSet<String> {
        ground_truth(self)
    }

    pub fn paths(&self) -> Vec<&str> {
        self.changed_files.iter().map(|f| f.path.as_str()).collect()
    }
}

/// Referenced and actual reviewers, minus the author.
pub fn ground_truth(pr: &PullRequest) -> BTreeSet<String> {
    pr.referenced_reviewers
        .union(&pr.actual_reviewers)
        .filter(|r| **r != pr.author)
        .cloned()
        .collect()
}

/// Library and technology token multisets of a file or pull request.
///
/// A token lives in at most one of the two maps; every stored count is
/// positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBag {
    pub libraries: BTreeMap<String, u32>,
    pub technologies: BTreeMap<String, u32>,
}

impl TokenBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_library(&mut self, token: &str) {
        debug_assert!(!self.technologies.contains_key(token));
        *self.libraries.entry(token.to_string()).or_insert(0) += 1;
    }

    pub fn add_technology(&mut self, token: &str) {
        debug_assert!(!self.libraries.contains_key(token));
        *self.technologies.entry(token.to_string()).or_insert(0) += 1;
    }

    /// Multiset sum.
    pub fn merge(&mut self, other: &TokenBag) {
        for (t, c) in &other.libraries {
            *self.libraries.entry(t.clone()).or_insert(0) += c;
        }
        for (t, c) in &other.technologies {
            *self.technologies.entry(t.clone()).or_insert(0) += c;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.libraries.is_empty() && self.technologies.is_empty()
    }

    /// Every count clamped to one.
    pub fn binarized(&self) -> TokenBag {
        TokenBag {
            libraries: self.libraries.keys().map(|k| (k.clone(), 1)).collect(),
            technologies: self.technologies.keys().map(|k| (k.clone(), 1)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub reviewer: String,
    pub lib_score: f64,
    pub tech_score: f64,
    pub total: f64,
    pub supporting_prs: BTreeSet<PrId>,
}

impl CandidateScore {
    pub fn new(reviewer: &str) -> Self {
        CandidateScore {
            reviewer: reviewer.to_string(),
            lib_score: 0.0,
            tech_score: 0.0,
            total: 0.0,
            supporting_prs: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendationEntry {
    pub reviewer: String,
    pub total_pct: u32,
    pub lib_pct: u32,
    pub tech_pct: u32,
    pub total: f64,
    pub lib_score: f64,
    pub tech_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub generated_for: PrId,
    pub strategy: String,
    pub k: usize,
    pub config_digest: String,
    /// Set when no candidate had a positive score and the window's review
    /// counts were used instead.
    pub fallback: bool,
    pub entries: Vec<RecommendationEntry>,
}

impl Recommendation {
    pub fn reviewers(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.reviewer.clone()).collect()
    }

    /// Canonical machine-readable form shared by the CLI, the HTTP service
    /// and the cache.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("recommendation serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub library: f64,
    pub technology: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            library: 1.0,
            technology: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenWeighting {
    /// Token counts are summed over every changed file.
    #[default]
    Frequency,
    /// Each token counts once per pull request.
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub window_size: usize,
    pub k: usize,
    pub tech_lexicon: TechLexicon,
    pub stoplists: Stoplists,
    pub languages_enabled: BTreeSet<Language>,
    pub fallback_enabled: bool,
    pub weights: ScoreWeights,
    pub weighting: TokenWeighting,
    /// Directories whose children are treated as top-level project modules,
    /// in addition to the repository root.
    pub source_roots: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            window_size: 30,
            k: 5,
            tech_lexicon: TechLexicon::default(),
            stoplists: Stoplists::default(),
            languages_enabled: [Language::Python, Language::Java, Language::Ruby]
                .into_iter()
                .collect(),
            fallback_enabled: true,
            weights: ScoreWeights::default(),
            weighting: TokenWeighting::Frequency,
            source_roots: ["src", "lib", "src/main/java"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::InvalidConfig("window_size must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let w = self.weights;
        if !(w.library.is_finite() && w.technology.is_finite())
            || w.library < 0.0
            || w.technology < 0.0
        {
            return Err(Error::InvalidConfig("weights must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Short stable hash of every setting that can change a recommendation.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let hash = Sha256::digest(&canonical);
        hex::encode(&hash[..8])
    }
}

/// Pull requests of one project in `(created_at, id)` order, bound to the
/// repository holding their contents.
#[derive(Clone, Debug)]
pub struct ProjectHistory {
    prs: Vec<PullRequest>,
    repo_path: PathBuf,
    by_id: HashMap<PrId, usize>,
}

impl ProjectHistory {
    pub fn new(mut prs: Vec<PullRequest>, repo_path: impl AsRef<Path>) -> Result<Self> {
        for pr in &prs {
            pr.validate()?;
        }
        prs.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        let mut by_id = HashMap::with_capacity(prs.len());
        for (i, pr) in prs.iter().enumerate() {
            if by_id.insert(pr.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(pr.id.to_string()));
            }
        }
        Ok(ProjectHistory {
            prs,
            repo_path: repo_path.as_ref().to_path_buf(),
            by_id,
        })
    }

    pub fn prs(&self) -> &[PullRequest] {
        &self.prs
    }

    pub fn len(&self) -> usize {
        self.prs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prs.is_empty()
    }

    pub fn repo_path(&self) -> &Path {
        &self.repo_path
    }

    pub fn position(&self, id: &PrId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn get(&self, id: &PrId) -> Option<&PullRequest> {
        self.position(id).map(|i| &self.prs[i])
    }
}
