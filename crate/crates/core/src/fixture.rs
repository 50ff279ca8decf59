//! Deterministic sample project: a small Git repository plus metadata for
//! 40 closed or open pull requests and one open request (#41) whose
//! imports are the libraries and technologies of a typical App Engine
//! change.
//!
//! Review expertise follows the libraries and technologies a change uses,
//! while file locations are shuffled across topics. Commit ids depend only
//! on the fixed contents and timestamps, so the metadata is reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use git2::{FileMode, Oid, Repository, Signature, Time};

use crate::error::{Error, Result};
use crate::model::{ChangedFile, PrId, PrState, PullRequest};

pub const BASE_TIME: i64 = 1_450_000_000;
const DAY: i64 = 86_400;
const HOUR: i64 = 3_600;

pub const HISTORY_SIZE: u32 = 40;
pub const TARGET_PR: &str = "41";

struct Topic {
    libraries: &'static [&'static str],
    technologies: &'static [&'static str],
    reviewers: &'static [&'static str],
}

const TOPICS: [Topic; 4] = [
    Topic {
        libraries: &["vtax", "vbilling", "vapi"],
        technologies: &["taskqueue", "google.appengine.api.taskqueue"],
        reviewers: &["cberenik-va", "ywang-va"],
    },
    Topic {
        libraries: &["vapi", "vform", "vapi.auth"],
        technologies: &["memcache"],
        reviewers: &["cgooding-va", "cberenik-va"],
    },
    Topic {
        libraries: &["vsearchutil", "vautil"],
        technologies: &["ndb", "search", "google.appengine.api.search"],
        reviewers: &["sgryschuk-va"],
    },
    Topic {
        libraries: &["vbcsdk", "vbcsdk.keys", "vautil.validators.email"],
        technologies: &["urlfetch"],
        reviewers: &["ksookocheff-va", "cgooding-va"],
    },
];

const AUTHORS: [&str; 5] = ["alice-va", "bob-va", "carol-va", "dave-va", "jrans-va"];
const DIRS: [&str; 4] = ["sr/handlers", "sr/models", "sr/api", "sr/tasks"];
const NAMES: [&str; 5] = ["account", "invoice", "listing", "report", "user"];

/// Locations of a generated fixture.
#[derive(Clone, Debug)]
pub struct FixturePaths {
    pub repo: PathBuf,
    pub history: PathBuf,
}

struct Builder<'r> {
    repo: &'r Repository,
    tree: BTreeMap<String, Oid>,
    head: Option<Oid>,
}

impl<'r> Builder<'r> {
    fn write_tree(&self, prefix: &str) -> Result<Oid> {
        let mut files = Vec::new();
        let mut dirs = BTreeSet::new();
        for path in self.tree.keys() {
            let Some(rest) = path.strip_prefix(prefix) else {
                continue;
            };
            match rest.split_once('/') {
                Some((dir, _)) => {
                    dirs.insert(dir.to_string());
                }
                None => files.push(rest.to_string()),
            }
        }
        let mut builder = self.repo.treebuilder(None)?;
        for name in files {
            builder.insert(&name, self.tree[&format!("{prefix}{name}")], FileMode::Blob.into())?;
        }
        for dir in dirs {
            let oid = self.write_tree(&format!("{prefix}{dir}/"))?;
            builder.insert(&dir, oid, FileMode::Tree.into())?;
        }
        Ok(builder.write()?)
    }

    fn commit(&mut self, author: &str, time: i64, message: &str, files: &[(String, String)]) -> Result<Oid> {
        for (path, content) in files {
            let blob = self.repo.blob(content.as_bytes())?;
            self.tree.insert(path.clone(), blob);
        }
        let tree = self.repo.find_tree(self.write_tree("")?)?;
        let sig = Signature::new(author, &format!("{author}@example.com"), &Time::new(time, 0))?;
        let parents: Vec<git2::Commit> = self.head.iter().map(|h| self.repo.find_commit(*h)).collect::<std::result::Result<_, _>>()?;
        let parent_refs: Vec<&git2::Commit> = parents.iter().collect();
        let oid = self.repo.commit(Some("refs/heads/main"), &sig, &sig, message, &tree, &parent_refs)?;
        self.head = Some(oid);
        Ok(oid)
    }
}

fn python_source(imports: &[String], body: &str) -> String {
    let mut s = String::from("# -*- coding: utf-8 -*-\n");
    for line in imports {
        s.push_str(line);
        s.push('\n');
    }
    s.push_str("\n\n");
    s.push_str(body);
    s.push('\n');
    s
}

fn topic_imports(i: u32, j: usize) -> Vec<String> {
    let topic = &TOPICS[(i % 4) as usize];
    let mut lines = vec!["import logging".to_string()];
    let lib_count = 1 + (i as usize + j) % topic.libraries.len();
    for lib in topic.libraries.iter().take(lib_count) {
        lines.push(format!("import {lib}"));
    }
    let tech = topic.technologies[(i as usize + j) % topic.technologies.len()];
    lines.push(format!("import {tech}"));
    if (i + j as u32).is_multiple_of(3) {
        lines.push("from sr.models import account".into());
    }
    lines
}

fn history_pr_files(i: u32) -> Vec<(String, String)> {
    let count = 1 + (i % 3) as usize;
    let mut files: Vec<(String, String)> = (0..count)
        .map(|j| {
            let dir = DIRS[((i / 4) as usize + j) % DIRS.len()];
            let name = NAMES[(i as usize * 3 + j) % NAMES.len()];
            let path = format!("{dir}/{name}.py");
            let body = format!("def handle_{i}_{j}(request):\n    return request");
            (path, python_source(&topic_imports(i, j), &body))
        })
        .collect();
    files.sort();
    files.dedup_by(|a, b| a.0 == b.0);
    if i.is_multiple_of(7) {
        files.push(("docs/CHANGES.md".into(), format!("- change {i}\n")));
    }
    if i % 4 == 3 && i % 8 == 3 {
        files.push((
            "java/src/com/vendasta/sdk/Client.java".into(),
            format!("package com.vendasta.sdk;\n\nimport com.vendasta.vbcsdk.Keys;\nimport java.util.List;\n\nclass Client{i} {{}}\n"),
        ));
    }
    if i % 4 == 1 && i % 8 == 5 {
        files.push((
            "scripts/deploy.rb".into(),
            format!("require 'json'\nrequire 'vapi/client'\n# deploy {i}\n"),
        ));
    }
    files
}

fn target_pr_files() -> Vec<(String, String)> {
    let f = |lines: &[&str], body: &str| {
        python_source(&lines.iter().map(|s| s.to_string()).collect::<Vec<_>>(), body)
    };
    vec![
        (
            "sr/handlers/tax.py".into(),
            f(&["import logging", "import vapi", "import vtax", "from sr.models import account"], "def tax(request):\n    return account"),
        ),
        (
            "sr/models/account.py".into(),
            f(&["import vbcsdk", "import vbcsdk.keys", "import google.appengine.ext"], "class Account(object):\n    pass"),
        ),
        (
            "sr/api/search_api.py".into(),
            f(&["import json", "import search", "import google.appengine.api.search"], "def query(q):\n    return q"),
        ),
        (
            "sr/tasks/email_task.py".into(),
            f(&["import vautil", "import vautil.validators.email", "import ndb"], "def send(to):\n    return to"),
        ),
        (
            "sr/handlers/tax_views.py".into(),
            f(&["import vapi", "from sr.handlers import tax"], "def view(request):\n    return tax"),
        ),
    ]
}

fn reviewers(i: u32) -> (BTreeSet<String>, BTreeSet<String>) {
    let topic = &TOPICS[(i % 4) as usize];
    if i == 9 {
        return (BTreeSet::new(), BTreeSet::new());
    }
    let referenced: BTreeSet<String> = topic.reviewers.iter().take(1).map(|s| s.to_string()).collect();
    let mut actual: BTreeSet<String> = if i.is_multiple_of(3) {
        referenced.clone()
    } else {
        topic.reviewers.iter().map(|s| s.to_string()).collect()
    };
    if i.is_multiple_of(5) {
        actual.insert("rwiebe-va".into());
    }
    (referenced, actual)
}

fn author(i: u32) -> String {
    match i {
        13 => "cgooding-va".into(),
        22 => "sgryschuk-va".into(),
        _ => AUTHORS[i as usize % AUTHORS.len()].into(),
    }
}

/// Writes `dir/repo` (a bare Git repository) and `dir/prs.ndjson`.
pub fn build_fixture(dir: &Path) -> Result<FixturePaths> {
    let repo_path = dir.join("repo");
    if repo_path.exists() {
        return Err(Error::InvalidConfig(format!("{} already exists", repo_path.display())));
    }
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let repo = Repository::init_bare(&repo_path)?;
    let mut b = Builder {
        repo: &repo,
        tree: BTreeMap::new(),
        head: None,
    };

    let skeleton: Vec<(String, String)> = [
        ("README.md", "# sr\n"),
        ("setup.py", "from setuptools import setup\n\nsetup(name='sr')\n"),
        ("sr/__init__.py", ""),
        ("sr/handlers/__init__.py", ""),
        ("sr/models/__init__.py", ""),
        ("sr/api/__init__.py", ""),
        ("sr/tasks/__init__.py", ""),
    ]
    .iter()
    .map(|(p, c)| (p.to_string(), c.to_string()))
    .collect();
    b.commit("jrans-va", BASE_TIME - DAY, "Initial layout", &skeleton)?;

    let mut prs = Vec::new();
    for i in 1..=HISTORY_SIZE + 1 {
        let created = BASE_TIME + i as i64 * DAY;
        let files = if i == HISTORY_SIZE + 1 { target_pr_files() } else { history_pr_files(i) };
        let author = if i == HISTORY_SIZE + 1 { "alice-va".to_string() } else { author(i) };
        let split = files.len().div_ceil(2);
        let mut changed = Vec::new();
        let mut commits = Vec::new();
        for (part, chunk) in [&files[..split], &files[split..]].into_iter().enumerate() {
            if chunk.is_empty() {
                continue;
            }
            let oid = b.commit(&author, created - HOUR * (2 - part as i64), &format!("PR {i}: part {}", part + 1), chunk)?;
            let commit = oid.to_string();
            for (path, _) in chunk {
                changed.push(ChangedFile::new(path.clone(), commit.clone()));
            }
            commits.push(commit);
        }

        let (state, closed_at, (referenced, actual)) = if i == HISTORY_SIZE + 1 || i == 33 {
            (PrState::Open, None, (BTreeSet::new(), BTreeSet::new()))
        } else {
            let closed = created + HOUR * (6 + (i as i64 * 17) % 40);
            (PrState::Closed, Some(closed), reviewers(i))
        };
        prs.push(PullRequest {
            id: PrId(i.to_string()),
            author,
            created_at: created,
            closed_at,
            state,
            commits,
            changed_files: changed,
            referenced_reviewers: referenced,
            actual_reviewers: actual,
        });
    }
    repo.set_head("refs/heads/main")?;

    let history_path = dir.join("prs.ndjson");
    let mut text = String::new();
    for pr in &prs {
        text.push_str(&serde_json::to_string(pr).expect("pull request serializes"));
        text.push('\n');
    }
    std::fs::write(&history_path, text).map_err(|source| Error::Io { path: history_path.clone(), source })?;
    Ok(FixturePaths {
        repo: repo_path,
        history: history_path,
    })
}

/// The libraries and technologies PR #41 imports.
pub const TARGET_LIBRARIES: [&str; 6] = ["vapi", "vtax", "vbcsdk", "vautil", "vbcsdk.keys", "vautil.validators.email"];
pub const TARGET_TECHNOLOGIES: [&str; 4] = ["google.appengine.ext", "ndb", "search", "google.appengine.api.search"];
