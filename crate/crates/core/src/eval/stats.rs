//! Mann-Whitney U and standardized effect sizes.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest `n·m` for which the p-value comes from the exact permutation
/// distribution; larger samples use the normal approximation.
pub const EXACT_LIMIT: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MannWhitney {
    /// Pairs where `a` wins, ties counting one half.
    pub u_a: f64,
    pub u_b: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Twice the U statistic of `a`, which is always an integer.
fn doubled_u(a: &[f64], b: &[f64]) -> u64 {
    let mut twice = 0u64;
    for x in a {
        for y in b {
            if x > y {
                twice += 2;
            } else if x == y {
                twice += 1;
            }
        }
    }
    twice
}

/// Sizes of runs of equal values in the pooled sample, in ascending order.
fn tie_groups(a: &[f64], b: &[f64]) -> Vec<usize> {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(|x, y| x.total_cmp(y));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Permutation distribution of `2U` for group sizes `groups`, `n` labels
/// drawn for the first sample. Index is `2U`, value the number of labelings.
fn exact_distribution(groups: &[usize], n: usize, m: usize) -> Vec<f64> {
    let max_u2 = 2 * n * m;
    // ways[a][u2]: labelings of the groups processed so far with `a` first-sample members
    let mut ways = vec![vec![0.0f64; max_u2 + 1]; n + 1];
    ways[0][0] = 1.0;
    let mut seen = 0usize;
    for &t in groups {
        let mut next = vec![vec![0.0f64; max_u2 + 1]; n + 1];
        for a_before in 0..=n.min(seen) {
            let b_before = seen - a_before;
            if b_before > m {
                continue;
            }
            for u2 in 0..=max_u2 {
                let w = ways[a_before][u2];
                if w == 0.0 {
                    continue;
                }
                for k in 0..=t.min(n - a_before) {
                    if b_before + (t - k) > m {
                        continue;
                    }
                    // each chosen member beats b_before and ties (t - k)
                    let gain = k * (2 * b_before + (t - k));
                    next[a_before + k][u2 + gain] += w * binomial(t, k);
                }
            }
        }
        ways = next;
        seen += t;
    }
    ways.swap_remove(n)
}

fn exact_p_value(a: &[f64], b: &[f64], u2: u64) -> f64 {
    // the two-sided tail is symmetric in the samples; label the smaller one
    if a.len() > b.len() {
        let mirrored = 2 * (a.len() * b.len()) as u64 - u2;
        return exact_p_value(b, a, mirrored);
    }
    let (n, m) = (a.len(), b.len());
    let dist = exact_distribution(&tie_groups(a, b), n, m);
    let center = (n * m) as i64;
    let observed = (u2 as i64 - center).abs();
    let total: f64 = dist.iter().sum();
    let extreme: f64 = dist
        .iter()
        .enumerate()
        .filter(|(v, _)| (*v as i64 - center).abs() >= observed)
        .map(|(_, w)| w)
        .sum();
    (extreme / total).min(1.0)
}

fn normal_p_value(a: &[f64], b: &[f64], u_a: f64) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let total = n + m;
    let ties: f64 = tie_groups(a, b)
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = n * m / 12.0 * ((total + 1.0) - ties / (total * (total - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let deviation = ((u_a - n * m / 2.0).abs() - 0.5).max(0.0);
    let z = deviation / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Two-sample Mann-Whitney U test.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<MannWhitney> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample);
    }
    let nm = sample_a.len() * sample_b.len();
    let u2 = doubled_u(sample_a, sample_b);
    let u_a = u2 as f64 / 2.0;
    let u_b = nm as f64 - u_a;
    let (p_value, method) = if nm <= EXACT_LIMIT {
        (exact_p_value(sample_a, sample_b, u2), PValueMethod::Exact)
    } else {
        (normal_p_value(sample_a, sample_b, u_a), PValueMethod::Normal)
    };
    Ok(MannWhitney {
        u_a,
        u_b,
        p_value,
        method,
    })
}

/// The normal-approximation p-value regardless of sample size.
pub fn mann_whitney_normal_p(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample);
    }
    let u_a = doubled_u(sample_a, sample_b) as f64 / 2.0;
    Ok(normal_p_value(sample_a, sample_b, u_a))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations from the mean.
fn sum_sq(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum()
}

/// `(mean(a) − mean(b)) / pooled sd`, both variances with `n − 1`.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let dof = a.len() + b.len();
    if dof <= 2 {
        return Err(Error::DegenerateVariance);
    }
    let pooled = ((sum_sq(a) + sum_sq(b)) / (dof - 2) as f64).sqrt();
    if pooled == 0.0 || !pooled.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    Ok((mean(a) - mean(b)) / pooled)
}

/// `(mean(a) − mean(b)) / sd(b)`; `b` is the control sample.
pub fn glass_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if b.len() < 2 {
        return Err(Error::DegenerateVariance);
    }
    let sd = (sum_sq(b) / (b.len() - 1) as f64).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    Ok((mean(a) - mean(b)) / sd)
}
