/// Fraction of rows where `score > tau` agrees with the label.
pub fn accuracy_at(scores: &[f64], labels: &[bool], tau: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| (**s > tau) == **l)
        .count();
    correct as f64 / scores.len() as f64
}

/// Decision threshold maximizing training accuracy.
///
/// Candidates are `-inf`, the midpoints between adjacent distinct scores,
/// and `+inf`; the smallest maximizing candidate is returned.
pub fn select_threshold(scores: &[f64], labels: &[bool]) -> f64 {
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // tau = -inf: everything predicted positive.
    let mut correct: i64 = pairs.iter().filter(|p| p.1).count() as i64;
    let mut best = correct;
    let mut best_tau = f64::NEG_INFINITY;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == v {
            correct += if pairs[j].1 { -1 } else { 1 };
            j += 1;
        }
        let tau = match pairs.get(j) {
            Some(next) => 0.5 * (v + next.0),
            None => f64::INFINITY,
        };
        if correct > best {
            best = correct;
            best_tau = tau;
        }
        i = j;
    }
    best_tau
}
