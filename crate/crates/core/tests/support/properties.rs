//! Invariants as named property checks so several test targets can run
//! and report them.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use revrec_core::eval::metrics::{first_hit, mean_precision, mean_recall, mrr, top_k_accuracy};
use revrec_core::eval::{fps_similarity, mann_whitney_u, retrospective_evaluate};
use revrec_core::extract::lexicon::TechLexicon;
use revrec_core::extract::{analyze_pr, classify_tokens, extract_imports, Import, ProjectModuleIndex};
use revrec_core::history::{parse_history, select_window, serialize_history};
use revrec_core::rank::{cosine_similarity, rank_reviewers};
use revrec_core::repo::MemorySource;
use revrec_core::{
    ground_truth, ChangedFile, Config, Execution, Language, PrId, PrState, PullRequest, Strategy as Ranking,
};

use super::check;
use super::scenario::{scenario, PEOPLE};

pub const CASES: u32 = 1000;

pub struct Property {
    pub name: &'static str,
    pub run: fn(u32) -> Result<(), String>,
}

pub fn suite() -> Vec<Property> {
    macro_rules! props {
        ($($f:ident),* $(,)?) => { vec![$(Property { name: stringify!($f), run: $f }),*] };
    }
    props![
        cosine_symmetric_and_bounded,
        cosine_one_iff_scalar_multiple,
        cosine_scale_invariant,
        ranking_invariant_under_scaling,
        classification_exclusive,
        extraction_order_independent,
        extraction_monotone,
        scanner_concatenation,
        window_has_no_temporal_leakage,
        replay_has_no_temporal_leakage,
        metrics_bounded_and_monotone,
        metrics_match_brute_force,
        mann_whitney_u_sum,
        recommendation_excludes_requester,
        parallel_matches_sequential,
        window_order_irrelevant,
        ground_truth_excludes_author,
        history_round_trip,
        fps_symmetric_and_bounded,
    ]
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

const TOKENS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn bag() -> impl Strategy<Value = BTreeMap<String, u32>> {
    prop::collection::btree_map(prop::sample::select(&TOKENS[..]).prop_map(String::from), 1u32..6, 0..8)
}

fn proportional(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let (sa, sb): (u64, u64) = (a.values().map(|&x| x as u64).sum(), b.values().map(|&x| x as u64).sum());
    keys.iter().all(|k| {
        let x = *a.get(*k).unwrap_or(&0) as u64;
        let y = *b.get(*k).unwrap_or(&0) as u64;
        x * sb == y * sa
    })
}

fn scaled(m: &BTreeMap<String, u32>, c: u32) -> BTreeMap<String, u32> {
    m.iter().map(|(k, v)| (k.clone(), v * c)).collect()
}

pub fn cosine_symmetric_and_bounded(cases: u32) -> Result<(), String> {
    check(cases, (bag(), bag()), |(a, b)| {
        let x = cosine_similarity(&a, &b);
        let y = cosine_similarity(&b, &a);
        ensure(x == y, || format!("asymmetric {x} {y}"))?;
        ensure((0.0..=1.0).contains(&x), || format!("out of range {x}"))
    })
}

pub fn cosine_one_iff_scalar_multiple(cases: u32) -> Result<(), String> {
    let pair = prop_oneof![
        (bag(), bag()),
        (bag(), 1u32..5).prop_map(|(a, c)| (a.clone(), scaled(&a, c))),
        (bag(), 1u32..4, 1u32..4).prop_map(|(a, c, d)| (scaled(&a, c), scaled(&a, d))),
    ];
    check(cases, pair, |(a, b)| {
        let x = cosine_similarity(&a, &b);
        ensure((x == 1.0) == proportional(&a, &b), || format!("cos {x} for {a:?} {b:?}"))
    })
}

pub fn cosine_scale_invariant(cases: u32) -> Result<(), String> {
    check(cases, (bag(), bag(), 1u32..50), |(a, b, c)| {
        let x = cosine_similarity(&a, &b);
        let y = cosine_similarity(&a, &scaled(&b, c));
        ensure((x - y).abs() <= 1e-12, || format!("{x} vs {y} at scale {c}"))
    })
}

pub fn ranking_invariant_under_scaling(cases: u32) -> Result<(), String> {
    let factors = prop::sample::select(vec![0.125, 0.25, 0.5, 2.0, 4.0, 8.0, 1024.0]);
    check(cases, (scenario(), factors), |(s, c)| {
        let (rec, req) = s.recommender(Execution::Sequential);
        let window = rec.window_for(&req);
        let scores = rec.score(&req, &window, Ranking::Correct);
        let mut boosted = scores.clone();
        for v in boosted.values_mut() {
            v.lib_score *= c;
            v.tech_score *= c;
            v.total *= c;
        }
        let a = rank_reviewers(&scores, &req.author, &window, rec.config(), &req.id, Ranking::Correct);
        let b = rank_reviewers(&boosted, &req.author, &window, rec.config(), &req.id, Ranking::Correct);
        ensure(a.reviewers() == b.reviewers(), || format!("{:?} vs {:?}", a.reviewers(), b.reviewers()))?;
        let pct = |r: &revrec_core::Recommendation| r.entries.iter().map(|e| e.total_pct).collect::<Vec<_>>();
        ensure(pct(&a) == pct(&b), || "percentages moved".into())
    })
}

const IMPORTS: [&str; 12] = [
    "google", "google.appengine", "google.appengine.api", "ndb", "ndb.model", "vapi", "vapi.auth", "os",
    "os.path", "search", "searchlight", "app.views",
];
const PATTERNS: [&str; 6] = ["google.appengine", "ndb", "search", "os.path", "vapi.", "app"];

fn imports() -> impl Strategy<Value = Vec<Import>> {
    prop::collection::vec(
        (prop::sample::select(&IMPORTS[..]), prop::bool::weighted(0.1)).prop_map(|(p, internal)| Import {
            path: p.to_string(),
            internal,
        }),
        0..12,
    )
}

pub fn classification_exclusive(cases: u32) -> Result<(), String> {
    let lexicon = prop::sample::subsequence(&PATTERNS[..], 0..=PATTERNS.len());
    let modules = prop::sample::subsequence(vec!["app", "vapi", "ndb"], 0..=3);
    check(cases, (imports(), lexicon, modules), |(imports, lexicon, modules)| {
        let cfg = Config {
            tech_lexicon: TechLexicon::from_patterns(lexicon.iter()),
            ..Config::default()
        };
        let index = ProjectModuleIndex::from_modules(modules);
        let bag = classify_tokens(&imports, Language::Python, &index, &cfg);
        ensure(bag.libraries.keys().all(|k| !bag.technologies.contains_key(k)), || format!("{bag:?}"))?;
        ensure(bag.technologies.keys().all(|k| cfg.tech_lexicon.matching_pattern(k).is_some()), || {
            format!("unlisted technology in {bag:?}")
        })?;
        ensure(bag.libraries.values().chain(bag.technologies.values()).all(|&c| c > 0), || "zero count".into())
    })
}

fn source_file() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "import vapi",
            "import ndb, vtax as t",
            "from google.appengine.api import taskqueue",
            "from vapi import (auth,\n    keys)",
            "import os",
            "# import commented",
            "x = 1",
        ]),
        0..6,
    )
    .prop_map(|lines| lines.iter().map(|l| format!("{l}\n")).collect())
}

fn pr_of(files: &[(String, String)]) -> (PullRequest, MemorySource) {
    let mut src = MemorySource::new();
    let mut changed = Vec::new();
    for (path, content) in files {
        src.insert("c", path, content.clone());
        changed.push(ChangedFile::new(path.clone(), "c"));
    }
    let pr = PullRequest {
        id: PrId("1".into()),
        author: "alice".into(),
        created_at: 0,
        closed_at: None,
        state: PrState::Open,
        commits: vec!["c".into()],
        changed_files: changed,
        referenced_reviewers: BTreeSet::new(),
        actual_reviewers: BTreeSet::new(),
    };
    (pr, src)
}

fn named_files(contents: Vec<String>) -> Vec<(String, String)> {
    contents.into_iter().enumerate().map(|(i, c)| (format!("f{i}.py"), c)).collect()
}

pub fn extraction_order_independent(cases: u32) -> Result<(), String> {
    let files = prop::collection::vec(source_file(), 0..6)
        .prop_map(named_files)
        .prop_flat_map(|files| (Just(files.clone()), Just(files).prop_shuffle()));
    check(cases, files, |(files, shuffled)| {
        let cfg = Config::default();
        let index = ProjectModuleIndex::default();
        let (pr, src) = pr_of(&files);
        let (pr2, src2) = pr_of(&shuffled);
        let a = analyze_pr(&pr, &src, &index, &cfg).bag;
        let b = analyze_pr(&pr2, &src2, &index, &cfg).bag;
        ensure(a == b, || format!("{a:?} != {b:?}"))
    })
}

pub fn extraction_monotone(cases: u32) -> Result<(), String> {
    check(cases, (prop::collection::vec(source_file(), 0..5), source_file()), |(files, extra)| {
        let cfg = Config::default();
        let index = ProjectModuleIndex::default();
        let before = named_files(files.clone());
        let mut after_contents = files;
        after_contents.push(extra);
        let after = named_files(after_contents);
        let (p1, s1) = pr_of(&before);
        let (p2, s2) = pr_of(&after);
        let a = analyze_pr(&p1, &s1, &index, &cfg).bag;
        let b = analyze_pr(&p2, &s2, &index, &cfg).bag;
        let grew = |x: &BTreeMap<String, u32>, y: &BTreeMap<String, u32>| {
            x.iter().all(|(k, c)| y.get(k).is_some_and(|d| d >= c))
        };
        ensure(grew(&a.libraries, &b.libraries) && grew(&a.technologies, &b.technologies), || {
            format!("{a:?} -> {b:?}")
        })
    })
}

fn snippet(language: Language) -> BoxedStrategy<String> {
    let lines: Vec<&'static str> = match language {
        Language::Python => vec![
            "import a.b",
            "from c import d, e as f",
            "from . import g",
            "import h, \\\n    i",
            "from j import (k,\n  l)",
            "def m(): pass",
            "x = 'import n'",
        ],
        Language::Java => vec![
            "package p.q;",
            "import a.b.C;",
            "import static d.E.f;",
            "import g.*;",
            "// import h.I;",
            "class J {}",
        ],
        _ => vec![
            "require 'a/b'",
            "require_relative '../c'",
            "require \"d.rb\"",
            "puts 'x'",
            "# require 'e'",
        ],
    };
    prop::collection::vec(prop::sample::select(lines), 0..6)
        .prop_map(|ls| ls.iter().map(|l| format!("{l}\n")).collect())
        .boxed()
}

pub fn scanner_concatenation(cases: u32) -> Result<(), String> {
    let input = prop::sample::select(vec![Language::Python, Language::Java, Language::Ruby])
        .prop_flat_map(|lang| (Just(lang), snippet(lang), snippet(lang)));
    check(cases, input, |(lang, a, b)| {
        let whole = extract_imports(&format!("{a}{b}"), lang);
        let mut parts = extract_imports(&a, lang);
        parts.extend(extract_imports(&b, lang));
        ensure(whole == parts, || format!("{whole:?} != {parts:?}"))
    })
}

pub fn window_has_no_temporal_leakage(cases: u32) -> Result<(), String> {
    check(cases, (scenario(), prop::option::of(0i64..600), 1usize..12), |(s, reference, w)| {
        let built = s.build();
        let window = select_window(&built.history, reference, w);
        ensure(window.len() <= w, || "window too long".into())?;
        for pr in &window {
            ensure(pr.is_closed(), || format!("{} not closed", pr.id))?;
            if let Some(r) = reference {
                ensure(pr.closed_at.unwrap() < r, || format!("{} closed at/after {r}", pr.id))?;
            }
        }
        for pair in window.windows(2) {
            let key = |p: &PullRequest| (p.closed_at, p.id.clone());
            ensure(key(pair[0]) > key(pair[1]), || "window not strictly decreasing".into())?;
        }
        let eligible = built
            .history
            .prs()
            .iter()
            .filter(|p| p.is_closed() && reference.is_none_or(|r| p.closed_at.unwrap() < r))
            .count();
        ensure(window.len() == eligible.min(w), || "window missed eligible PRs".into())
    })
}

pub fn replay_has_no_temporal_leakage(cases: u32) -> Result<(), String> {
    check(cases, scenario(), |s| {
        let built = s.build();
        let violations = Mutex::new(Vec::new());
        let report = retrospective_evaluate(&built.history, "probe", &built.cfg, &[1, 3], Execution::Parallel, |p, window| {
            for w in window {
                if w.id == p.id || w.closed_at >= p.closed_at {
                    violations.lock().unwrap().push(format!("{} in window of {}", w.id, p.id));
                }
            }
            PEOPLE.iter().map(|s| s.to_string()).filter(|r| *r != p.author).collect()
        });
        let v = violations.into_inner().unwrap();
        ensure(v.is_empty(), || v.join(", "))?;
        let replayed = built.history.prs().iter().filter(|p| p.is_closed()).count();
        ensure(report.evaluated_prs + report.skipped_prs == replayed, || "counts do not add up".into())
    })
}

fn ranking_and_truth() -> impl Strategy<Value = (Vec<String>, BTreeSet<String>)> {
    let people: Vec<String> = PEOPLE.iter().map(|s| s.to_string()).collect();
    (
        prop::sample::subsequence(people.clone(), 0..=people.len()).prop_shuffle(),
        prop::collection::btree_set(prop::sample::select(people), 1..=4),
    )
}

fn instances() -> impl Strategy<Value = Vec<(Vec<String>, BTreeSet<String>)>> {
    prop::collection::vec(ranking_and_truth(), 1..=10)
}

pub fn metrics_bounded_and_monotone(cases: u32) -> Result<(), String> {
    check(cases, instances(), |inst| {
        let (rankings, truths): (Vec<_>, Vec<_>) = inst.into_iter().unzip();
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let mut last = (0.0, 0.0);
        for k in 1..=7 {
            let acc = top_k_accuracy(&rankings, &truths, k).unwrap();
            let p = mean_precision(&rankings, &truths, k).unwrap();
            let r = mean_recall(&rankings, &truths, k).unwrap();
            ensure(unit(acc) && unit(p) && unit(r), || format!("k={k}: {acc} {p} {r}"))?;
            ensure(acc >= last.0 && r >= last.1, || format!("not monotone at k={k}"))?;
            last = (acc, r);
        }
        let m = mrr(&rankings, &truths).unwrap();
        ensure(unit(m), || format!("mrr {m}"))?;
        let all_first = rankings.iter().zip(&truths).all(|(r, t)| first_hit(r, t) == Some(1));
        ensure((m == 1.0) == all_first, || format!("mrr {m} vs all-first {all_first}"))
    })
}

pub fn metrics_match_brute_force(cases: u32) -> Result<(), String> {
    check(cases, (instances(), 1usize..=7), |(inst, k)| {
        let n = inst.len() as f64;
        let (mut acc, mut rr, mut prec, mut rec) = (0.0, 0.0, 0.0, 0.0);
        for (ranking, truth) in &inst {
            let mut hits = 0;
            let mut first = None;
            for (i, r) in ranking.iter().enumerate() {
                if truth.contains(r) {
                    if first.is_none() {
                        first = Some(i + 1);
                    }
                    if i < k {
                        hits += 1;
                    }
                }
            }
            if hits > 0 {
                acc += 1.0;
            }
            if let Some(f) = first {
                rr += 1.0 / f as f64;
            }
            let shown = ranking.len().min(k);
            if shown > 0 {
                prec += hits as f64 / shown as f64;
            }
            rec += hits as f64 / truth.len() as f64;
        }
        let (rankings, truths): (Vec<_>, Vec<_>) = inst.into_iter().unzip();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
        ensure(close(top_k_accuracy(&rankings, &truths, k).unwrap(), acc / n), || "top-k".into())?;
        ensure(close(mrr(&rankings, &truths).unwrap(), rr / n), || "mrr".into())?;
        ensure(close(mean_precision(&rankings, &truths, k).unwrap(), prec / n), || "precision".into())?;
        ensure(close(mean_recall(&rankings, &truths, k).unwrap(), rec / n), || "recall".into())
    })
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec((0i32..6).prop_map(f64::from), 1..25),
        prop::collection::vec(-100.0f64..100.0, 1..25),
    ]
}

pub fn mann_whitney_u_sum(cases: u32) -> Result<(), String> {
    check(cases, (sample(), sample()), |(a, b)| {
        let r = mann_whitney_u(&a, &b).unwrap();
        let nm = (a.len() * b.len()) as f64;
        ensure(r.u_a + r.u_b == nm, || format!("{} + {} != {nm}", r.u_a, r.u_b))?;
        ensure((0.0..=1.0).contains(&r.p_value), || format!("p {}", r.p_value))
    })
}

pub fn recommendation_excludes_requester(cases: u32) -> Result<(), String> {
    check(cases, scenario(), |s| {
        let (rec, req) = s.recommender(Execution::Parallel);
        let r = rec.recommend(&req, Ranking::Correct);
        ensure(r.entries.iter().all(|e| e.reviewer != req.author), || format!("{} recommended to self", req.author))?;
        ensure(r.entries.len() <= s.k, || "too many entries".into())?;
        for e in &r.entries {
            ensure([e.total_pct, e.lib_pct, e.tech_pct].iter().all(|&p| p <= 100), || "pct over 100".into())?;
        }
        if let Some(top) = r.entries.first() {
            if top.total > 0.0 {
                ensure(top.total_pct == 100, || format!("top pct {}", top.total_pct))?;
            }
        }
        for pair in r.entries.windows(2) {
            ensure(pair[0].total >= pair[1].total - 1e-9, || "not sorted".into())?;
        }
        Ok(())
    })
}

pub fn parallel_matches_sequential(cases: u32) -> Result<(), String> {
    check(cases, scenario(), |s| {
        let (par, req) = s.recommender(Execution::Parallel);
        let (seq, _) = s.recommender(Execution::Sequential);
        par.warm();
        for strategy in Ranking::ALL {
            let a = par.recommend(&req, strategy).to_json();
            let b = seq.recommend(&req, strategy).to_json();
            ensure(a == b, || format!("{strategy:?}: {a} != {b}"))?;
        }
        Ok(())
    })
}

pub fn window_order_irrelevant(cases: u32) -> Result<(), String> {
    let input = scenario().prop_flat_map(|s| {
        let n = s.prs.len();
        (Just(s), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    });
    check(cases, input, |(s, perm)| {
        let (rec, req) = s.recommender(Execution::Sequential);
        let window = rec.window_for(&req);
        let shuffled: Vec<&PullRequest> = perm.iter().filter(|&&i| i < window.len()).map(|&i| window[i]).collect();
        let a = rec.score(&req, &window, Ranking::Correct);
        let b = rec.score(&req, &shuffled, Ranking::Correct);
        ensure(a.keys().eq(b.keys()), || "different candidates".into())?;
        for (x, y) in a.values().zip(b.values()) {
            ensure((x.total - y.total).abs() < 1e-12 && x.supporting_prs == y.supporting_prs, || {
                format!("{x:?} vs {y:?}")
            })?;
        }
        Ok(())
    })
}

pub fn ground_truth_excludes_author(cases: u32) -> Result<(), String> {
    check(cases, scenario(), |s| {
        let built = s.build();
        for pr in built.history.prs() {
            let t = ground_truth(pr);
            ensure(!t.contains(&pr.author), || format!("{} in own truth", pr.author))?;
            ensure(t.iter().all(|r| pr.referenced_reviewers.contains(r) || pr.actual_reviewers.contains(r)), || {
                "invented reviewer".into()
            })?;
            let union: BTreeSet<&String> = pr.referenced_reviewers.union(&pr.actual_reviewers).collect();
            ensure(t.len() + usize::from(union.contains(&pr.author)) == union.len(), || "lost reviewer".into())?;
        }
        Ok(())
    })
}

pub fn history_round_trip(cases: u32) -> Result<(), String> {
    check(cases, scenario(), |s| {
        let built = s.build();
        let text = serialize_history(&built.history);
        let back = parse_history(&text, "memory").map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(back.prs() == built.history.prs(), || "round trip changed the history".into())?;
        ensure(serialize_history(&back) == text, || "serialization not stable".into())
    })
}

fn paths() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[ab]{1,2}(/[ab]{1,2}){0,3}\\.py", 0..5)
}

pub fn fps_symmetric_and_bounded(cases: u32) -> Result<(), String> {
    check(cases, (paths(), paths()), |(a, b)| {
        let x = fps_similarity(&a, &b);
        let y = fps_similarity(&b, &a);
        ensure((x - y).abs() < 1e-12 && (0.0..=1.0).contains(&x), || format!("{x} {y}"))?;
        if !a.is_empty() {
            let same = fps_similarity(&a[..1], &a[..1]);
            ensure(same == 1.0, || format!("self similarity {same}"))?;
        }
        Ok(())
    })
}
