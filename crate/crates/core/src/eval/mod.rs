//! Retrospective evaluation: metrics, the path-similarity baseline,
//! significance statistics and the replay harness.

pub mod fps;
pub mod metrics;
pub mod replay;
pub mod stats;

pub use fps::fps_similarity;
pub use metrics::{first_hit, mean_precision, mean_recall, mrr, top_k_accuracy};
pub use replay::{
    compare_reports, evaluate_strategy, retrospective_evaluate, Comparison, EvaluationReport,
    KMetrics,
};
pub use stats::{cohens_d, glass_delta, mann_whitney_u, MannWhitney};
