//! Small random projects: a history, an in-memory source tree rendering
//! each PR's tokens as Python imports, and one recommendation request.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use revrec_core::extract::ProjectModuleIndex;
use revrec_core::repo::MemorySource;
use revrec_core::{
    ChangedFile, Config, Execution, PrId, PrState, ProjectHistory, PullRequest, Recommender,
    ReviewRequest,
};

pub const LIBRARIES: [&str; 4] = ["vapi", "vtax", "vform", "vautil.validators"];
pub const TECHNOLOGIES: [&str; 4] = ["ndb", "memcache", "taskqueue", "google.appengine.ext"];
/// Reviewers are drawn from the first five; "alice" only ever authors.
pub const PEOPLE: [&str; 6] = ["r0", "r1", "r2", "r3", "r4", "alice"];

#[derive(Clone, Debug)]
pub struct PrSpec {
    pub created: i64,
    pub closed: Option<i64>,
    pub author: usize,
    pub libs: Vec<u32>,
    pub techs: Vec<u32>,
    pub referenced: BTreeSet<usize>,
    pub actual: BTreeSet<usize>,
    pub split: bool,
    pub doc: bool,
}

#[derive(Clone, Debug)]
pub enum RequestSpec {
    Existing(usize),
    New { author: usize, libs: Vec<u32>, techs: Vec<u32> },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub prs: Vec<PrSpec>,
    pub request: RequestSpec,
    pub window: usize,
    pub k: usize,
    pub fallback: bool,
}

pub fn counts() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(prop_oneof![3 => Just(0u32), 2 => 1u32..=3], 4)
}

fn people() -> impl Strategy<Value = BTreeSet<usize>> {
    prop::collection::btree_set(0usize..5, 0..=3)
}

pub fn pr_spec() -> impl Strategy<Value = PrSpec> {
    (
        0i64..200,
        prop::option::weighted(0.8, 0i64..300),
        0usize..6,
        counts(),
        counts(),
        people(),
        people(),
        any::<bool>(),
        prop::bool::weighted(0.2),
    )
        .prop_map(|(created, delay, author, libs, techs, referenced, actual, split, doc)| PrSpec {
            created,
            closed: delay.map(|d| created + d),
            author,
            libs,
            techs,
            referenced,
            actual,
            split,
            doc,
        })
}

pub fn scenario_with(max_prs: usize) -> impl Strategy<Value = Scenario> {
    prop::collection::vec(pr_spec(), 0..=max_prs).prop_flat_map(|prs| {
        let n = prs.len();
        let new = (0usize..6, counts(), counts())
            .prop_map(|(author, libs, techs)| RequestSpec::New { author, libs, techs });
        let request = if n == 0 {
            new.boxed()
        } else {
            prop_oneof![(0..n).prop_map(RequestSpec::Existing), new].boxed()
        };
        (Just(prs), request, 1usize..=12, 1usize..=6, prop::bool::weighted(0.7)).prop_map(
            |(prs, request, window, k, fallback)| Scenario {
                prs,
                request,
                window,
                k,
                fallback,
            },
        )
    })
}

pub fn scenario() -> impl Strategy<Value = Scenario> {
    scenario_with(10)
}

pub fn pr_id(i: usize) -> String {
    format!("p{i}")
}

fn import_lines(libs: &[u32], techs: &[u32]) -> Vec<String> {
    let mut lines = Vec::new();
    for (names, cs) in [(&LIBRARIES, libs), (&TECHNOLOGIES, techs)] {
        for (name, &c) in names.iter().zip(cs) {
            for _ in 0..c {
                lines.push(format!("import {name}"));
            }
        }
    }
    lines
}

/// Writes the imports into one or two Python files under `dir`.
fn add_files(source: &mut MemorySource, commit: &str, dir: &str, lines: &[String], split: bool) -> Vec<ChangedFile> {
    let mut a = String::from("import logging\n");
    let mut b = String::from("import os\n");
    for (i, line) in lines.iter().enumerate() {
        let target = if split && i % 2 == 1 { &mut b } else { &mut a };
        target.push_str(line);
        target.push('\n');
    }
    let mut files = vec![ChangedFile::new(format!("{dir}/a.py"), commit)];
    source.insert(commit, &format!("{dir}/a.py"), a);
    if split {
        files.push(ChangedFile::new(format!("{dir}/b.py"), commit));
        source.insert(commit, &format!("{dir}/b.py"), b);
    }
    files
}

pub struct Built {
    pub history: ProjectHistory,
    pub source: MemorySource,
    pub request: ReviewRequest,
    pub cfg: Config,
}

fn names(set: &BTreeSet<usize>) -> BTreeSet<String> {
    set.iter().map(|&i| PEOPLE[i].to_string()).collect()
}

impl Scenario {
    pub fn history_prs(&self, source: &mut MemorySource) -> Vec<PullRequest> {
        self.prs
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let commit = format!("c{i}");
                let mut files = add_files(source, &commit, &format!("m{i}"), &import_lines(&spec.libs, &spec.techs), spec.split);
                if spec.doc {
                    files.push(ChangedFile::new(format!("docs/{i}.md"), commit.as_str()));
                }
                PullRequest {
                    id: PrId(pr_id(i)),
                    author: PEOPLE[spec.author].to_string(),
                    created_at: spec.created,
                    closed_at: spec.closed,
                    state: if spec.closed.is_some() { PrState::Closed } else { PrState::Open },
                    commits: vec![commit],
                    changed_files: files,
                    referenced_reviewers: names(&spec.referenced),
                    actual_reviewers: names(&spec.actual),
                }
            })
            .collect()
    }

    pub fn config(&self) -> Config {
        Config {
            window_size: self.window,
            k: self.k,
            fallback_enabled: self.fallback,
            ..Config::default()
        }
    }

    pub fn build(&self) -> Built {
        let mut source = MemorySource::new();
        let prs = self.history_prs(&mut source);
        let history = ProjectHistory::new(prs, "memory").expect("generated history is valid");
        let request = match &self.request {
            RequestSpec::Existing(i) => ReviewRequest::existing(&history, &PrId(pr_id(*i))).expect("known id"),
            RequestSpec::New { author, libs, techs } => {
                let files = add_files(&mut source, "cnew", "new", &import_lines(libs, techs), false);
                ReviewRequest::new_pr("new", PEOPLE[*author], files)
            }
        };
        Built {
            history,
            source,
            request,
            cfg: self.config(),
        }
    }

    pub fn recommender(&self, exec: Execution) -> (Recommender, ReviewRequest) {
        let built = self.build();
        let rec = Recommender::new(
            Arc::new(built.history),
            Arc::new(built.source),
            ProjectModuleIndex::default(),
            built.cfg,
        )
        .expect("valid config")
        .with_execution(exec);
        (rec, built.request)
    }

    pub fn requester(&self) -> &'static str {
        match &self.request {
            RequestSpec::Existing(i) => PEOPLE[self.prs[*i].author],
            RequestSpec::New { author, .. } => PEOPLE[*author],
        }
    }
}
