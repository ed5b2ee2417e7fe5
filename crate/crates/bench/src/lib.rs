//! Fixtures shared by the benchmarks: a synthetic dataset and the inputs
//! each pipeline stage sees.

use ndarray::Array2;

use sa_core::pipeline::label_index;
use sa_core::synth::{gen_dataset, GenConfig};
use sa_core::{extract_all, Dataset, FeatureConfig, FeatureTable, Preset, ReferenceHeights};

pub fn dataset(n_scenes: usize, n_participants: usize) -> Dataset {
    let cfg = GenConfig {
        seed: 1,
        n_scenes,
        n_participants,
        ..GenConfig::default()
    };
    gen_dataset(&cfg)
        .expect("default generator config is valid")
        .0
}

pub fn table(ds: &Dataset) -> FeatureTable {
    extract_all(ds, &FeatureConfig::default(), &ReferenceHeights::unit()).expect("valid dataset")
}

/// Labeled rows restricted to the method 1+2 columns, with their labels.
pub fn design_matrix(ds: &Dataset, table: &FeatureTable) -> (Array2<f64>, Vec<bool>) {
    let labels = label_index(ds);
    let cols = Preset::Method12.spec().expect("learned preset").columns();
    let rows: Vec<_> = table
        .rows
        .iter()
        .filter_map(|r| labels.get(&r.key).map(|&y| (r, y)))
        .collect();
    let x = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| {
        rows[i].0.features.values[cols[j]]
    });
    (x, rows.iter().map(|r| r.1).collect())
}
