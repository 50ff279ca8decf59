//! Reviewer recommendation for pull requests.
//!
//! A pull request is reduced to two multisets of imported names: external
//! libraries and specialized technologies. Past closed pull requests inside
//! a recency window are compared against it with cosine similarity, and each
//! past request's similarity is credited to its reviewers. Reviewers are then
//! ranked by their accumulated score.
//!
//! The crate also carries a retrospective replay harness with the usual IR
//! metrics, a file-path-similarity baseline, and the statistics used to
//! compare two strategies.

pub mod error;
pub mod eval;
pub mod extract;
pub mod fixture;
pub mod history;
pub mod model;
pub mod par;
pub mod rank;
pub mod repo;

pub use error::{Error, Result};
pub use model::{
    ground_truth, CandidateScore, ChangedFile, Config, Language, PrId, PrState, ProjectHistory,
    PullRequest, Recommendation, RecommendationEntry, ScoreWeights, TokenBag, TokenWeighting,
};
pub use par::Execution;
pub use rank::{Recommender, ReviewRequest, Strategy};
