//! File path similarity: how far two changed-file lists agree on leading
//! path components.

fn common_prefix_ratio(a: &str, b: &str) -> f64 {
    let ca: Vec<&str> = a.split('/').collect();
    let cb: Vec<&str> = b.split('/').collect();
    let common = ca.iter().zip(&cb).take_while(|(x, y)| x == y).count();
    common as f64 / ca.len().max(cb.len()) as f64
}

/// Mean common-leading-component ratio over every cross pair; 0 when either
/// list is empty.
pub fn fps_similarity<A: AsRef<str>, B: AsRef<str>>(files_a: &[A], files_b: &[B]) -> f64 {
    if files_a.is_empty() || files_b.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for a in files_a {
        for b in files_b {
            sum += common_prefix_ratio(a.as_ref(), b.as_ref());
        }
    }
    sum / (files_a.len() * files_b.len()) as f64
}
