use crate::pipeline::{MemoryShape, MemorySpec};

/// 1-based ranks by descending probability; ties go to the smaller object id.
pub fn memory_rank(items: &[(&str, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .1
            .total_cmp(&items[a].1)
            .then_with(|| items[a].0.cmp(items[b].0))
    });
    let mut ranks = vec![0; items.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

pub fn memory_feature(rank: usize, spec: &MemorySpec) -> f64 {
    let r = rank as f64;
    let n = spec.capacity as f64;
    match spec.shape {
        MemoryShape::Tanh => (r - n).tanh(),
        MemoryShape::Step => f64::from(u8::from(rank > spec.capacity)),
        MemoryShape::Linear => r,
    }
}
