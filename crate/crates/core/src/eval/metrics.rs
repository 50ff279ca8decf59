//! Top-K accuracy, MRR, mean precision and mean recall over ranked lists.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

fn check(rankings: usize, truths: usize) -> Result<()> {
    if rankings != truths {
        return Err(Error::LengthMismatch(rankings, truths));
    }
    if rankings == 0 {
        return Err(Error::UndefinedMetric);
    }
    Ok(())
}

/// 1-based rank of the first ground-truth reviewer in `ranking`.
pub fn first_hit<S: AsRef<str>>(ranking: &[S], truth: &BTreeSet<String>) -> Option<usize> {
    ranking
        .iter()
        .position(|r| truth.contains(r.as_ref()))
        .map(|p| p + 1)
}

fn hits_at<S: AsRef<str>>(ranking: &[S], truth: &BTreeSet<String>, k: usize) -> usize {
    ranking
        .iter()
        .take(k)
        .filter(|r| truth.contains(r.as_ref()))
        .count()
}

pub fn top_k_accuracy<S: AsRef<str>>(
    rankings: &[Vec<S>],
    truths: &[BTreeSet<String>],
    k: usize,
) -> Result<f64> {
    check(rankings.len(), truths.len())?;
    let hits = rankings
        .iter()
        .zip(truths)
        .filter(|(r, t)| hits_at(r, t, k) > 0)
        .count();
    Ok(hits as f64 / rankings.len() as f64)
}

/// Reciprocal rank of the first hit anywhere in the list, averaged.
pub fn mrr<S: AsRef<str>>(rankings: &[Vec<S>], truths: &[BTreeSet<String>]) -> Result<f64> {
    check(rankings.len(), truths.len())?;
    let sum: f64 = rankings
        .iter()
        .zip(truths)
        .map(|(r, t)| first_hit(r, t).map_or(0.0, |rank| 1.0 / rank as f64))
        .sum();
    Ok(sum / rankings.len() as f64)
}

/// Per instance `|top-K ∩ truth| / min(K, |ranking|)`; empty rankings
/// contribute 0.
pub fn mean_precision<S: AsRef<str>>(
    rankings: &[Vec<S>],
    truths: &[BTreeSet<String>],
    k: usize,
) -> Result<f64> {
    check(rankings.len(), truths.len())?;
    let mut sum = 0.0;
    for (i, (r, t)) in rankings.iter().zip(truths).enumerate() {
        if t.is_empty() {
            return Err(Error::EmptyTruth(i));
        }
        let shown = k.min(r.len());
        if shown > 0 {
            sum += hits_at(r, t, k) as f64 / shown as f64;
        }
    }
    Ok(sum / rankings.len() as f64)
}

pub fn mean_recall<S: AsRef<str>>(
    rankings: &[Vec<S>],
    truths: &[BTreeSet<String>],
    k: usize,
) -> Result<f64> {
    check(rankings.len(), truths.len())?;
    let mut sum = 0.0;
    for (i, (r, t)) in rankings.iter().zip(truths).enumerate() {
        if t.is_empty() {
            return Err(Error::EmptyTruth(i));
        }
        sum += hits_at(r, t, k) as f64 / t.len() as f64;
    }
    Ok(sum / rankings.len() as f64)
}
