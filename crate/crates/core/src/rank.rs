//! Similarity, score propagation and reviewer ranking.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::fps::fps_similarity;
use crate::extract::{analyze_pr, ProjectModuleIndex};
use crate::history::select_window;
use crate::model::{
    ground_truth, CandidateScore, ChangedFile, Config, PrId, PrState, ProjectHistory, PullRequest,
    Recommendation, RecommendationEntry, ScoreWeights, TokenBag,
};
use crate::par::Execution;
use crate::repo::{GitRepo, SourceReader};

/// Totals closer than this are ranked as ties.
pub const TIE_RESOLUTION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Library and technology cosine similarity.
    Correct,
    /// File path similarity baseline.
    Fps,
    /// Review counts inside the window.
    Frequency,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Correct, Strategy::Fps, Strategy::Frequency];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Correct => "correct",
            Strategy::Fps => "fps",
            Strategy::Frequency => "frequency",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.name() == s)
    }
}

/// Cosine of two count vectors over their union vocabulary; 0 when either
/// side is empty.
pub fn cosine_similarity(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: u128 = small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| *x as u128 * *y as u128))
        .sum();
    if dot == 0 {
        return 0.0;
    }
    let norm = |m: &BTreeMap<String, u32>| m.values().map(|c| (*c as u128).pow(2)).sum::<u128>();
    let (na, nb) = (norm(a), norm(b));
    if dot * dot == na * nb {
        return 1.0;
    }
    let cos = dot as f64 / ((na as f64).sqrt() * (nb as f64).sqrt());
    // Cauchy-Schwarz is strict here; keep rounding from reaching 1.
    cos.min(1.0 - f64::EPSILON)
}

/// Library and technology similarity of `current` to one past bag.
pub fn pair_similarity(current: &TokenBag, past: &TokenBag) -> (f64, f64) {
    (
        cosine_similarity(&current.libraries, &past.libraries),
        cosine_similarity(&current.technologies, &past.technologies),
    )
}

/// Credits each window PR's `(library, technology)` similarity to its
/// ground-truth reviewers. Additions happen in window order.
pub fn propagate(
    window: &[&PullRequest],
    similarities: &[(f64, f64)],
    weights: ScoreWeights,
) -> BTreeMap<String, CandidateScore> {
    let mut scores: BTreeMap<String, CandidateScore> = BTreeMap::new();
    for (pr, &(lib, tech)) in window.iter().zip(similarities) {
        for reviewer in ground_truth(pr) {
            let entry = scores
                .entry(reviewer.clone())
                .or_insert_with(|| CandidateScore::new(&reviewer));
            entry.lib_score += lib;
            entry.tech_score += tech;
            if lib + tech > 0.0 {
                entry.supporting_prs.insert(pr.id.clone());
            }
        }
    }
    for s in scores.values_mut() {
        s.total = weights.library * s.lib_score + weights.technology * s.tech_score;
    }
    scores
}

pub fn score_candidates(
    current: &TokenBag,
    window: &[(&PullRequest, &TokenBag)],
    weights: ScoreWeights,
) -> BTreeMap<String, CandidateScore> {
    score_candidates_with(current, window, weights, Execution::Sequential)
}

pub fn score_candidates_with(
    current: &TokenBag,
    window: &[(&PullRequest, &TokenBag)],
    weights: ScoreWeights,
    exec: Execution,
) -> BTreeMap<String, CandidateScore> {
    let sims = exec.map(window, |(_, bag)| pair_similarity(current, bag));
    let prs: Vec<&PullRequest> = window.iter().map(|(pr, _)| *pr).collect();
    propagate(&prs, &sims, weights)
}

/// One-dimensional variant used by the path-similarity baseline: the whole
/// similarity lands in `total`.
pub fn propagate_total(window: &[&PullRequest], similarities: &[f64]) -> BTreeMap<String, CandidateScore> {
    let mut scores: BTreeMap<String, CandidateScore> = BTreeMap::new();
    for (pr, &sim) in window.iter().zip(similarities) {
        for reviewer in ground_truth(pr) {
            let entry = scores
                .entry(reviewer.clone())
                .or_insert_with(|| CandidateScore::new(&reviewer));
            entry.total += sim;
            if sim > 0.0 {
                entry.supporting_prs.insert(pr.id.clone());
            }
        }
    }
    scores
}

/// Review counts per reviewer inside the window.
pub fn review_counts(window: &[&PullRequest]) -> BTreeMap<String, CandidateScore> {
    let mut scores: BTreeMap<String, CandidateScore> = BTreeMap::new();
    for pr in window {
        for reviewer in ground_truth(pr) {
            let entry = scores
                .entry(reviewer.clone())
                .or_insert_with(|| CandidateScore::new(&reviewer));
            entry.total += 1.0;
            entry.supporting_prs.insert(pr.id.clone());
        }
    }
    scores
}

fn tie_key(total: f64) -> i64 {
    (total / TIE_RESOLUTION).round() as i64
}

/// Orders candidates by total (descending), then the most recent
/// supporting review, then identity.
fn order_candidates<'a>(
    mut candidates: Vec<&'a CandidateScore>,
    window: &[&PullRequest],
) -> Vec<&'a CandidateScore> {
    let closed: HashMap<&PrId, i64> = window
        .iter()
        .filter_map(|pr| pr.closed_at.map(|c| (&pr.id, c)))
        .collect();
    let latest = |c: &CandidateScore| {
        c.supporting_prs
            .iter()
            .filter_map(|id| closed.get(id).copied())
            .max()
    };
    candidates.sort_by(|a, b| {
        tie_key(b.total)
            .cmp(&tie_key(a.total))
            .then_with(|| latest(b).cmp(&latest(a)))
            .then_with(|| a.reviewer.cmp(&b.reviewer))
    });
    candidates
}

/// Scales each dimension so its maximum maps to 100, rounding half up. A
/// dimension whose maximum is 0 maps to 0 throughout.
pub fn normalize_scores(raw: &[[f64; 3]]) -> Vec<[u32; 3]> {
    let mut max = [0.0f64; 3];
    for r in raw {
        for d in 0..3 {
            max[d] = max[d].max(r[d]);
        }
    }
    raw.iter()
        .map(|r| {
            let mut pct = [0u32; 3];
            for d in 0..3 {
                if max[d] > 0.0 {
                    pct[d] = ((r[d] / max[d] * 100.0 + 0.5).floor() as u32).min(100);
                }
            }
            pct
        })
        .collect()
}

fn entries_from(ranked: &[&CandidateScore]) -> Vec<RecommendationEntry> {
    let raw: Vec<[f64; 3]> = ranked
        .iter()
        .map(|c| [c.total, c.lib_score, c.tech_score])
        .collect();
    ranked
        .iter()
        .zip(normalize_scores(&raw))
        .map(|(c, pct)| RecommendationEntry {
            reviewer: c.reviewer.clone(),
            total_pct: pct[0],
            lib_pct: pct[1],
            tech_pct: pct[2],
            total: c.total,
            lib_score: c.lib_score,
            tech_score: c.tech_score,
        })
        .collect()
}

/// Ranked list of the `cfg.k` best candidates other than `requester`.
/// Candidates without a positive total are left out; when none remains and
/// the fallback is enabled, the window's reviewers are ranked by review
/// count instead with every percentage at 0.
pub fn rank_reviewers(
    scores: &BTreeMap<String, CandidateScore>,
    requester: &str,
    window: &[&PullRequest],
    cfg: &Config,
    generated_for: &PrId,
    strategy: Strategy,
) -> Recommendation {
    let positive: Vec<&CandidateScore> = scores
        .values()
        .filter(|c| c.reviewer != requester && c.total > 0.0)
        .collect();

    let (entries, fallback) = if positive.is_empty() && cfg.fallback_enabled {
        let counts = review_counts(window);
        let pool: Vec<&CandidateScore> = counts.values().filter(|c| c.reviewer != requester).collect();
        let mut ranked = order_candidates(pool, window);
        ranked.truncate(cfg.k);
        let entries = ranked
            .iter()
            .map(|c| RecommendationEntry {
                reviewer: c.reviewer.clone(),
                total_pct: 0,
                lib_pct: 0,
                tech_pct: 0,
                total: 0.0,
                lib_score: 0.0,
                tech_score: 0.0,
            })
            .collect();
        (entries, true)
    } else {
        let mut ranked = order_candidates(positive, window);
        ranked.truncate(cfg.k);
        (entries_from(&ranked), false)
    };

    Recommendation {
        generated_for: generated_for.clone(),
        strategy: strategy.name().to_string(),
        k: cfg.k,
        config_digest: cfg.digest(),
        fallback,
        entries,
    }
}

/// A pull request to recommend reviewers for: either one already in the
/// history or a new change set.
#[derive(Clone, Debug, PartialEq)]
pub struct ReviewRequest {
    pub id: PrId,
    pub author: String,
    pub changed_files: Vec<ChangedFile>,
    /// Only PRs closed strictly before this instant are eligible; `None`
    /// admits every closed PR.
    pub reference: Option<i64>,
    position: Option<usize>,
}

impl ReviewRequest {
    pub fn new_pr(id: impl Into<String>, author: impl Into<String>, changed_files: Vec<ChangedFile>) -> Self {
        ReviewRequest {
            id: PrId(id.into()),
            author: author.into(),
            changed_files,
            reference: None,
            position: None,
        }
    }

    /// Request for a PR of the history. A closed PR is replayed as of its
    /// own closing time.
    pub fn existing(history: &ProjectHistory, id: &PrId) -> Result<Self> {
        let position = history
            .position(id)
            .ok_or_else(|| Error::UnknownPullRequest(id.to_string()))?;
        let pr = &history.prs()[position];
        Ok(ReviewRequest {
            id: pr.id.clone(),
            author: pr.author.clone(),
            changed_files: pr.changed_files.clone(),
            reference: pr.closed_at,
            position: Some(position),
        })
    }

    fn as_pull_request(&self) -> PullRequest {
        PullRequest {
            id: self.id.clone(),
            author: self.author.clone(),
            created_at: 0,
            closed_at: None,
            state: PrState::Open,
            commits: Vec::new(),
            changed_files: self.changed_files.clone(),
            referenced_reviewers: BTreeSet::new(),
            actual_reviewers: BTreeSet::new(),
        }
    }
}

/// The recommendation pipeline over one loaded project.
///
/// Token bags of history PRs are computed once per recommender and shared
/// by every request; they depend only on the extraction settings, which
/// are fixed at construction.
pub struct Recommender {
    history: Arc<ProjectHistory>,
    reader: Arc<dyn SourceReader>,
    index: ProjectModuleIndex,
    cfg: Config,
    exec: Execution,
    bags: Vec<OnceLock<TokenBag>>,
}

impl Recommender {
    pub fn new(
        history: Arc<ProjectHistory>,
        reader: Arc<dyn SourceReader>,
        index: ProjectModuleIndex,
        cfg: Config,
    ) -> Result<Self> {
        cfg.validate()?;
        let bags = (0..history.len()).map(|_| OnceLock::new()).collect();
        Ok(Recommender {
            history,
            reader,
            index,
            cfg,
            exec: Execution::default(),
            bags,
        })
    }

    /// Opens the history's repository and indexes the HEAD snapshot.
    pub fn open(history: ProjectHistory, cfg: Config) -> Result<Self> {
        let repo = GitRepo::open(history.repo_path())?;
        let paths = repo.tree_paths(None)?;
        let index = ProjectModuleIndex::build(&paths, &cfg.source_roots);
        Self::new(Arc::new(history), Arc::new(repo), index, cfg)
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn history(&self) -> &ProjectHistory {
        &self.history
    }

    pub fn index(&self) -> &ProjectModuleIndex {
        &self.index
    }

    pub fn reader(&self) -> &dyn SourceReader {
        self.reader.as_ref()
    }

    /// Token bag of the history PR at `position`, computed on first use.
    pub fn bag_at(&self, position: usize) -> &TokenBag {
        self.bags[position].get_or_init(|| {
            analyze_pr(&self.history.prs()[position], self.reader.as_ref(), &self.index, &self.cfg).bag
        })
    }

    /// Fills the token cache for every history PR.
    pub fn warm(&self) {
        let positions: Vec<usize> = (0..self.history.len()).collect();
        self.exec.map(&positions, |&p| {
            self.bag_at(p);
        });
    }

    pub fn bag_for(&self, request: &ReviewRequest) -> TokenBag {
        match request.position {
            Some(p) => self.bag_at(p).clone(),
            None => analyze_pr(&request.as_pull_request(), self.reader.as_ref(), &self.index, &self.cfg).bag,
        }
    }

    pub fn window_for(&self, request: &ReviewRequest) -> Vec<&PullRequest> {
        self.window_for_size(request, self.cfg.window_size)
    }

    fn window_for_size(&self, request: &ReviewRequest, w: usize) -> Vec<&PullRequest> {
        select_window(&self.history, request.reference, w)
            .into_iter()
            .filter(|pr| pr.id != request.id)
            .collect()
    }

    pub fn recommend(&self, request: &ReviewRequest, strategy: Strategy) -> Recommendation {
        let window = self.window_for(request);
        self.recommend_in_window(request, &window, strategy, &self.cfg)
    }

    /// Same as [`recommend`](Self::recommend) with overrides for list and
    /// window size.
    pub fn recommend_with(
        &self,
        request: &ReviewRequest,
        strategy: Strategy,
        k: Option<usize>,
        window_size: Option<usize>,
    ) -> Result<Recommendation> {
        let mut cfg = self.cfg.clone();
        if let Some(k) = k {
            cfg.k = k;
        }
        if let Some(w) = window_size {
            cfg.window_size = w;
        }
        cfg.validate()?;
        let window = self.window_for_size(request, cfg.window_size);
        Ok(self.recommend_in_window(request, &window, strategy, &cfg))
    }

    /// Runs `strategy` against an explicit window. `cfg` supplies ranking
    /// settings only; extraction always uses the recommender's settings.
    pub fn recommend_in_window(
        &self,
        request: &ReviewRequest,
        window: &[&PullRequest],
        strategy: Strategy,
        cfg: &Config,
    ) -> Recommendation {
        let scores = self.score(request, window, strategy);
        rank_reviewers(&scores, &request.author, window, cfg, &request.id, strategy)
    }

    pub fn score(
        &self,
        request: &ReviewRequest,
        window: &[&PullRequest],
        strategy: Strategy,
    ) -> BTreeMap<String, CandidateScore> {
        match strategy {
            Strategy::Correct => {
                let current = self.bag_for(request);
                let sims = self.exec.map(window, |pr| {
                    let position = self.history.position(&pr.id).expect("window PR is in history");
                    pair_similarity(&current, self.bag_at(position))
                });
                propagate(window, &sims, self.cfg.weights)
            }
            Strategy::Fps => {
                let current: Vec<&str> = request.changed_files.iter().map(|f| f.path.as_str()).collect();
                let sims = self.exec.map(window, |pr| fps_similarity(&current, &pr.paths()));
                propagate_total(window, &sims)
            }
            Strategy::Frequency => review_counts(window),
        }
    }
}
