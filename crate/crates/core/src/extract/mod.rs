//! From changed source files to a [`TokenBag`].
//!
//! Each import path is classified once, in this order:
//!
//! 1. the path or one of its dotted prefixes is in the technology lexicon:
//!    technology, keyed by the full path;
//! 2. its top-level segment is a project module, or the import is relative:
//!    dropped as internal;
//! 3. its top-level segment is on the language's stoplist: dropped;
//! 4. otherwise: external library, keyed by the full path.

pub mod index;
pub mod lexicon;
pub mod scan;

use serde::Serialize;

pub use index::ProjectModuleIndex;
pub use scan::{extract_imports, extract_imports_bytes, import_paths, Import};

use crate::model::{Config, Language, PullRequest, TokenBag, TokenWeighting};
use crate::repo::SourceReader;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Technology { pattern: String },
    Library,
    Internal,
    Stdlib,
}

pub fn classify_import(
    import: &Import,
    language: Language,
    index: &ProjectModuleIndex,
    cfg: &Config,
) -> Classification {
    if let Some(pattern) = cfg.tech_lexicon.matching_pattern(&import.path) {
        return Classification::Technology {
            pattern: pattern.to_string(),
        };
    }
    let top = import.path.split('.').next().unwrap_or("");
    if import.internal || index.contains(top) {
        Classification::Internal
    } else if cfg.stoplists.contains(language, top) {
        Classification::Stdlib
    } else {
        Classification::Library
    }
}

pub fn classify_tokens(
    imports: &[Import],
    language: Language,
    index: &ProjectModuleIndex,
    cfg: &Config,
) -> TokenBag {
    let mut bag = TokenBag::new();
    for import in imports {
        match classify_import(import, language, index, cfg) {
            Classification::Technology { .. } => bag.add_technology(&import.path),
            Classification::Library => bag.add_library(&import.path),
            Classification::Internal | Classification::Stdlib => {}
        }
    }
    bag
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FileOutcome {
    Scanned {
        tokens: Vec<(Import, Classification)>,
    },
    /// Language not scanned (unsupported or disabled).
    Skipped { reason: String },
    Failed { warning: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub path: String,
    pub language: Language,
    pub outcome: FileOutcome,
}

/// Per-file extraction detail for one pull request, plus the summed bag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrExtraction {
    pub bag: TokenBag,
    pub files: Vec<FileReport>,
    pub warnings: Vec<String>,
    /// Set when every scanned file failed to resolve.
    pub diagnostic: Option<String>,
}

pub fn analyze_file(
    path: &str,
    language: Language,
    content: std::result::Result<Vec<u8>, String>,
    index: &ProjectModuleIndex,
    cfg: &Config,
) -> FileReport {
    let outcome = if language == Language::Other {
        FileOutcome::Skipped {
            reason: "unsupported language".into(),
        }
    } else if !cfg.languages_enabled.contains(&language) {
        FileOutcome::Skipped {
            reason: format!("{} disabled", language.name()),
        }
    } else {
        match content.and_then(|bytes| extract_imports_bytes(&bytes, language)) {
            Ok(imports) => FileOutcome::Scanned {
                tokens: imports
                    .into_iter()
                    .map(|i| {
                        let c = classify_import(&i, language, index, cfg);
                        (i, c)
                    })
                    .collect(),
            },
            Err(warning) => FileOutcome::Failed {
                warning: format!("{path}: {warning}"),
            },
        }
    };
    FileReport {
        path: path.to_string(),
        language,
        outcome,
    }
}

/// Extraction over every changed file of `pr`. Files whose content cannot
/// be resolved or decoded contribute nothing and leave a warning.
pub fn analyze_pr(
    pr: &PullRequest,
    reader: &dyn SourceReader,
    index: &ProjectModuleIndex,
    cfg: &Config,
) -> PrExtraction {
    let mut files = Vec::with_capacity(pr.changed_files.len());
    for file in &pr.changed_files {
        let language = file.language();
        let scanned = language != Language::Other && cfg.languages_enabled.contains(&language);
        let content = if scanned {
            reader
                .read_file(&file.commit, &file.path)
                .map_err(|e| e.to_string())
        } else {
            Ok(Vec::new())
        };
        files.push(analyze_file(&file.path, language, content, index, cfg));
    }
    summarize(files, cfg)
}

fn summarize(files: Vec<FileReport>, cfg: &Config) -> PrExtraction {
    let mut bag = TokenBag::new();
    let mut warnings = Vec::new();
    let mut attempted = 0;
    let mut failed = 0;
    for report in &files {
        match &report.outcome {
            FileOutcome::Scanned { tokens } => {
                attempted += 1;
                for (import, class) in tokens {
                    match class {
                        Classification::Technology { .. } => bag.add_technology(&import.path),
                        Classification::Library => bag.add_library(&import.path),
                        _ => {}
                    }
                }
            }
            FileOutcome::Failed { warning } => {
                attempted += 1;
                failed += 1;
                warnings.push(warning.clone());
            }
            FileOutcome::Skipped { .. } => {}
        }
    }
    let diagnostic = (attempted > 0 && failed == attempted)
        .then(|| format!("no changed file could be read ({failed} failed)"));
    if cfg.weighting == TokenWeighting::Binary {
        bag = bag.binarized();
    }
    PrExtraction {
        bag,
        files,
        warnings,
        diagnostic,
    }
}

/// Multiset sum of the per-file bags of `pr`.
pub fn tokenbag_of_pr(
    pr: &PullRequest,
    reader: &dyn SourceReader,
    index: &ProjectModuleIndex,
    cfg: &Config,
) -> (TokenBag, Vec<String>) {
    let e = analyze_pr(pr, reader, index, cfg);
    (e.bag, e.warnings)
}
