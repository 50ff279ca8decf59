//! Human-readable output.

use std::fmt::Write as _;

use revrec_core::extract::{Classification, FileOutcome, PrExtraction};
use revrec_core::Recommendation;

/// Reviewer table with percentage columns for total, library and
/// technology score.
pub fn recommendation_table(r: &Recommendation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Reviewers for PR {} ({}, top {})", r.generated_for, r.strategy, r.k);
    if r.entries.is_empty() {
        out.push_str("no reviewers to recommend\n");
        return out;
    }
    if r.fallback {
        out.push_str("no similar past pull requests; ranked by review count\n");
    }
    let width = r.entries.iter().map(|e| e.reviewer.len()).max().unwrap_or(0).max("Reviewer".len());
    let _ = writeln!(out, "{:<width$}  {:>6}  {:>7}  {:>10}", "Reviewer", "Total", "Library", "Technology");
    for e in &r.entries {
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}%  {:>6}%  {:>9}%",
            e.reviewer, e.total_pct, e.lib_pct, e.tech_pct
        );
    }
    out
}

fn kind(c: &Classification) -> String {
    match c {
        Classification::Technology { pattern } => format!("technology ({pattern})"),
        Classification::Library => "library".into(),
        Classification::Internal => "internal".into(),
        Classification::Stdlib => "standard library".into(),
    }
}

/// Token counts followed by each file's imports and how they were
/// classified.
pub fn extraction_listing(e: &PrExtraction) -> String {
    let mut out = String::new();
    if e.bag.is_empty() {
        out.push_str("no tokens\n");
    } else {
        for (title, tokens) in [("libraries", &e.bag.libraries), ("technologies", &e.bag.technologies)] {
            let _ = writeln!(out, "{title}:");
            if tokens.is_empty() {
                out.push_str("  (none)\n");
            }
            for (token, count) in tokens {
                let _ = writeln!(out, "  {token}  {count}");
            }
        }
    }
    if !e.files.is_empty() {
        out.push_str("files:\n");
    }
    for f in &e.files {
        match &f.outcome {
            FileOutcome::Scanned { tokens } => {
                let _ = writeln!(out, "  {} ({})", f.path, f.language.name());
                for (import, class) in tokens {
                    let _ = writeln!(out, "    {}  {}", import.path, kind(class));
                }
            }
            FileOutcome::Skipped { reason } => {
                let _ = writeln!(out, "  {} skipped ({reason})", f.path);
            }
            FileOutcome::Failed { warning } => {
                let _ = writeln!(out, "  {} unreadable: {warning}", f.path);
            }
        }
    }
    if let Some(d) = &e.diagnostic {
        let _ = writeln!(out, "note: {d}");
    }
    out
}
