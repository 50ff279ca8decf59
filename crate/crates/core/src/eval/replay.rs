//! Replays a project's closed pull requests in order and scores each
//! strategy's ranking against the recorded reviewers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::eval::metrics::{first_hit, mean_precision, mean_recall, mrr, top_k_accuracy};
use crate::eval::stats::{cohens_d, glass_delta, mann_whitney_u, MannWhitney, PValueMethod};
use crate::history::select_window;
use crate::model::{ground_truth, Config, PrId, ProjectHistory, PullRequest};
use crate::par::Execution;
use crate::rank::{Recommender, ReviewRequest, Strategy};

pub const DEFAULT_K_VALUES: [usize; 3] = [1, 3, 5];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMetrics {
    pub top_k_accuracy: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedPr {
    pub pr: PrId,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrOutcome {
    pub pr: PrId,
    pub truth: usize,
    pub ranked: usize,
    pub first_hit: Option<usize>,
    pub reciprocal_rank: f64,
}

/// Metrics are `null` when no pull request could be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub strategy: String,
    pub window_size: usize,
    pub evaluated_prs: usize,
    pub skipped_prs: usize,
    pub mrr: Option<f64>,
    pub per_k: BTreeMap<usize, Option<KMetrics>>,
    pub skipped: Vec<SkippedPr>,
    pub per_pr: Vec<PrOutcome>,
}

enum Step {
    Skipped(SkippedPr),
    Ranked {
        pr: PrId,
        truth: BTreeSet<String>,
        ranking: Vec<String>,
    },
}

/// Replays every CLOSED pull request of `history`.
///
/// For a PR `p` the window holds the `cfg.window_size` most recent PRs
/// closed strictly before `p` closed. `p` is skipped when that window is
/// empty or its ground truth is; otherwise `strategy(p, window)` must
/// return a ranked reviewer list with `p`'s author already excluded.
pub fn retrospective_evaluate<F>(
    history: &ProjectHistory,
    strategy_name: &str,
    cfg: &Config,
    k_values: &[usize],
    exec: Execution,
    strategy: F,
) -> EvaluationReport
where
    F: Fn(&PullRequest, &[&PullRequest]) -> Vec<String> + Sync + Send,
{
    let replayed: Vec<&PullRequest> = history.prs().iter().filter(|p| p.is_closed()).collect();
    let steps = exec.map(&replayed, |p| {
        let window = select_window(history, p.closed_at, cfg.window_size);
        debug_assert!(window.iter().all(|w| w.closed_at < p.closed_at));
        let truth = ground_truth(p);
        let reason = if window.is_empty() {
            Some("empty window")
        } else if truth.is_empty() {
            Some("empty ground truth")
        } else {
            None
        };
        match reason {
            Some(reason) => Step::Skipped(SkippedPr {
                pr: p.id.clone(),
                reason: reason.to_string(),
            }),
            None => Step::Ranked {
                pr: p.id.clone(),
                ranking: strategy(p, &window),
                truth,
            },
        }
    });

    let mut skipped = Vec::new();
    let mut ids = Vec::new();
    let mut rankings = Vec::new();
    let mut truths = Vec::new();
    for step in steps {
        match step {
            Step::Skipped(s) => skipped.push(s),
            Step::Ranked { pr, truth, ranking } => {
                ids.push(pr);
                rankings.push(ranking);
                truths.push(truth);
            }
        }
    }

    let per_k = k_values
        .iter()
        .map(|&k| {
            let metrics = (!rankings.is_empty()).then(|| KMetrics {
                top_k_accuracy: top_k_accuracy(&rankings, &truths, k).expect("non-empty"),
                mean_precision: mean_precision(&rankings, &truths, k).expect("truths non-empty"),
                mean_recall: mean_recall(&rankings, &truths, k).expect("truths non-empty"),
            });
            (k, metrics)
        })
        .collect();

    let per_pr = ids
        .into_iter()
        .zip(rankings.iter().zip(&truths))
        .map(|(pr, (ranking, truth))| {
            let hit = first_hit(ranking, truth);
            PrOutcome {
                pr,
                truth: truth.len(),
                ranked: ranking.len(),
                first_hit: hit,
                reciprocal_rank: hit.map_or(0.0, |r| 1.0 / r as f64),
            }
        })
        .collect();

    EvaluationReport {
        strategy: strategy_name.to_string(),
        window_size: cfg.window_size,
        evaluated_prs: rankings.len(),
        skipped_prs: skipped.len(),
        mrr: mrr(&rankings, &truths).ok(),
        per_k,
        skipped,
        per_pr,
    }
}

/// Replays `strategy` through `recommender` with full-length rankings.
pub fn evaluate_strategy(
    recommender: &Recommender,
    strategy: Strategy,
    k_values: &[usize],
) -> EvaluationReport {
    let mut ranking_cfg = recommender.config().clone();
    ranking_cfg.k = usize::MAX;
    let history = recommender.history();
    retrospective_evaluate(
        history,
        strategy.name(),
        recommender.config(),
        k_values,
        recommender.execution(),
        |p, window| {
            let request = ReviewRequest::existing(history, &p.id).expect("replayed PR is in history");
            recommender
                .recommend_in_window(&request, window, strategy, &ranking_cfg)
                .reviewers()
        },
    )
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn reciprocal_ranks(&self) -> Vec<f64> {
        self.per_pr.iter().map(|o| o.reciprocal_rank).collect()
    }

    /// Aligned plain-text summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "strategy: {}  window: {}  evaluated: {}  skipped: {}  MRR: {}",
            self.strategy,
            self.window_size,
            self.evaluated_prs,
            self.skipped_prs,
            fmt_metric(self.mrr)
        );
        let _ = writeln!(out, "{:>4}  {:>10}  {:>10}  {:>10}", "K", "top-K acc", "precision", "recall");
        for (k, m) in &self.per_k {
            let (a, p, r) = match m {
                Some(m) => (Some(m.top_k_accuracy), Some(m.mean_precision), Some(m.mean_recall)),
                None => (None, None, None),
            };
            let _ = writeln!(
                out,
                "{:>4}  {:>10}  {:>10}  {:>10}",
                k,
                fmt_metric(a),
                fmt_metric(p),
                fmt_metric(r)
            );
        }
        out
    }
}

/// Significance of the difference between two strategies' per-PR
/// reciprocal ranks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_rr_a: Option<f64>,
    pub mean_rr_b: Option<f64>,
    pub mann_whitney: Option<MannWhitney>,
    pub cohens_d: Option<f64>,
    pub glass_delta: Option<f64>,
    /// Why a statistic is missing.
    pub notes: Vec<String>,
}

pub fn compare_reports(a: &EvaluationReport, b: &EvaluationReport) -> Comparison {
    let (xa, xb) = (a.reciprocal_ranks(), b.reciprocal_ranks());
    let mut notes = Vec::new();
    let mut keep = |name: &str, r: crate::Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    let cohens = keep("cohens_d", cohens_d(&xa, &xb));
    let glass = keep("glass_delta", glass_delta(&xa, &xb));
    let mwu = match mann_whitney_u(&xa, &xb) {
        Ok(m) => Some(m),
        Err(e) => {
            notes.push(format!("mann_whitney: {e}"));
            None
        }
    };
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    Comparison {
        a: a.strategy.clone(),
        b: b.strategy.clone(),
        n_a: xa.len(),
        n_b: xb.len(),
        mean_rr_a: mean(&xa),
        mean_rr_b: mean(&xb),
        mann_whitney: mwu,
        cohens_d: cohens,
        glass_delta: glass,
        notes,
    }
}

impl Comparison {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} vs {} (reciprocal rank, n = {} / {})", self.a, self.b, self.n_a, self.n_b);
        if let Some(m) = &self.mann_whitney {
            let p = if m.p_value < 1e-4 { format!("{:.2e}", m.p_value) } else { format!("{:.4}", m.p_value) };
            let method = match m.method {
                PValueMethod::Exact => "exact",
                PValueMethod::Normal => "normal approximation",
            };
            let _ = writeln!(out, "  Mann-Whitney U_a = {}  U_b = {}  p = {p} ({method})", m.u_a, m.u_b);
        }
        let _ = writeln!(out, "  Cohen's d = {}", fmt_metric(self.cohens_d));
        let _ = writeln!(out, "  Glass delta = {}", fmt_metric(self.glass_delta));
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}
