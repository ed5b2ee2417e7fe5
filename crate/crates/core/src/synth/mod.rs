//! Synthetic datasets with planted awareness.
//!
//! Objects move linearly with per-frame jitter and carry random properties.
//! Gaze alternates between the road ahead and objects chosen by a softmax
//! over a fixed linear salience. An object is aware when the fixation rule
//! fires on the generated gaze and it ranks within the memory capacity among
//! all objects of the scene by salience, recency and dwell; labels are then
//! flipped with a small probability.

mod config;
mod generate;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use config::{AttentionConfig, GenConfig, OracleConfig, SalienceWeights};
pub use generate::gen_dataset;

use crate::error::{Error, Result};
use crate::scene::{write_dataset, Dataset};

/// File written next to a synthetic dataset. Never read by training.
pub const ORACLE_FILE: &str = "oracle.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub participant: String,
    pub scene: String,
    pub object: String,
    pub is_target: bool,
    /// Longest contiguous run within the fixation radius, in ms.
    pub fixated_ms: f64,
    /// Total time within the fixation radius in the window, in seconds.
    pub dwell_s: f64,
    pub salience: f64,
    pub strength: f64,
    /// Memory rank among every object in the scene, 1 = strongest.
    pub rank: usize,
    /// The participant's capacity; empty when unlimited.
    pub capacity: Option<usize>,
    pub fixated: bool,
    pub pre_label: bool,
    pub label: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleTrace {
    pub rows: Vec<OracleRow>,
}

impl OracleTrace {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Writes the dataset directory and the oracle trace beside it.
pub fn write_synthetic(ds: &Dataset, trace: &OracleTrace, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    write_dataset(ds, root)?;
    let path = root.join(ORACLE_FILE);
    let file = std::fs::File::create(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    trace.write_csv(std::io::BufWriter::new(file))
}

/// Dwell histogram bin width in seconds.
pub const DWELL_BIN_S: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    /// Target rows summarized.
    pub n_targets: usize,
    pub negative_share: f64,
    pub flip_rate: f64,
    pub fixated_share: f64,
    /// Awareness rate of targets ranked within / beyond the capacity.
    pub aware_within_capacity: Option<f64>,
    pub aware_beyond_capacity: Option<f64>,
    pub mean_dwell_s: f64,
    pub max_dwell_s: f64,
    /// Counts of target dwell times per `DWELL_BIN_S` bin.
    pub dwell_histogram: Vec<usize>,
    pub mean_objects_per_scene: f64,
}

fn share(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// Summary over the target rows of a trace.
pub fn oracle_stats(trace: &OracleTrace) -> Result<OracleStats> {
    let targets: Vec<&OracleRow> = trace.rows.iter().filter(|r| r.is_target).collect();
    if targets.is_empty() {
        return Err(Error::Empty("oracle trace has no target rows".into()));
    }
    let n = targets.len();
    let rate = |rows: Vec<&&OracleRow>| {
        (!rows.is_empty()).then(|| share(rows.iter().filter(|r| r.label).count(), rows.len()))
    };
    let beyond_capacity = |r: &OracleRow| r.capacity.is_some_and(|n| r.rank > n);
    let within = rate(targets.iter().filter(|r| !beyond_capacity(r)).collect());
    let beyond = rate(targets.iter().filter(|r| beyond_capacity(r)).collect());
    let mut histogram = Vec::new();
    for r in &targets {
        let bin = (r.dwell_s / DWELL_BIN_S).floor() as usize;
        if histogram.len() <= bin {
            histogram.resize(bin + 1, 0);
        }
        histogram[bin] += 1;
    }
    let mut scenes = std::collections::BTreeMap::<(&str, &str), usize>::new();
    for r in &trace.rows {
        *scenes.entry((&r.participant, &r.scene)).or_default() += 1;
    }
    Ok(OracleStats {
        n_targets: n,
        negative_share: share(targets.iter().filter(|r| !r.label).count(), n),
        flip_rate: share(targets.iter().filter(|r| r.label != r.pre_label).count(), n),
        fixated_share: share(targets.iter().filter(|r| r.fixated).count(), n),
        aware_within_capacity: within,
        aware_beyond_capacity: beyond,
        mean_dwell_s: targets.iter().map(|r| r.dwell_s).sum::<f64>() / n as f64,
        max_dwell_s: targets.iter().map(|r| r.dwell_s).fold(0.0, f64::max),
        dwell_histogram: histogram,
        mean_objects_per_scene: share(scenes.values().sum(), scenes.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::load_dataset;

    fn small(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            n_scenes: 3,
            n_participants: 4,
            ..GenConfig::default()
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let (a, ta) = gen_dataset(&small(5)).unwrap();
        let (b, tb) = gen_dataset(&small(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = gen_dataset(&small(6)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn closed_loop_through_the_loader() {
        let (ds, trace) = gen_dataset(&small(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_synthetic(&ds, &trace, dir.path()).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap(), ds);
        assert!(dir.path().join(ORACLE_FILE).exists());
    }

    #[test]
    fn noiseless_has_no_flips() {
        let mut cfg = small(2);
        cfg.oracle.label_noise = 0.0;
        let (_, trace) = gen_dataset(&cfg).unwrap();
        let s = oracle_stats(&trace).unwrap();
        assert_eq!(s.flip_rate, 0.0);
        assert!(s.dwell_histogram.len() as f64 * DWELL_BIN_S <= 10.0 + DWELL_BIN_S);
        assert!(s.max_dwell_s <= 10.0);
    }

    #[test]
    fn labels_follow_the_trace() {
        let (ds, trace) = gen_dataset(&small(3)).unwrap();
        let labels = ds.label_map();
        let targets: Vec<&OracleRow> = trace.rows.iter().filter(|r| r.is_target).collect();
        assert_eq!(targets.len(), labels.len());
        for r in targets {
            let key = (r.participant.clone(), r.scene.clone(), r.object.clone());
            assert_eq!(labels[&key], r.label);
        }
    }
}
