use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    extract_all, FeatureConfig, FeatureRow, FeatureTable, ReferenceHeights, RowKey,
};
use crate::numeric::{
    fit_pca, sigmoid, train_logistic, train_svm, ClassWeights, LinearSvm, LogisticModel,
    MinMaxScaler, PcaBasis,
};
use crate::pipeline::{
    memory_feature, memory_rank, select_threshold, MemorySpec, MethodSpec, PcaK, PipelineConfig,
};
use crate::scene::Dataset;

/// Artifact layout version written with every trained pipeline.
pub const FORMAT_VERSION: u32 = 1;

/// Mapping from SVM margin to stage-1 probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// `sigmoid(margin)`
    Sigmoid,
    /// `sigmoid(a * margin + b)` with `a, b` fit on the training margins.
    Platt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1 {
    /// Feature-table columns used, in table order.
    pub columns: Vec<usize>,
    pub scaler: MinMaxScaler,
    pub pca: PcaBasis,
    pub svm: LinearSvm,
    /// Slope and intercept applied to the margin before the sigmoid.
    pub calibration: (f64, f64),
    pub svm_iterations: usize,
    pub svm_converged: bool,
}

impl Stage1 {
    fn select(&self, row: &FeatureRow) -> Vec<f64> {
        self.columns
            .iter()
            .map(|&c| row.features.values[c])
            .collect()
    }

    /// Scaled and projected features.
    pub fn project(&self, row: &FeatureRow) -> Vec<f64> {
        self.pca
            .project_row(&self.scaler.transform_row(&self.select(row)))
    }

    pub fn margin(&self, row: &FeatureRow) -> f64 {
        self.svm.decision(&self.project(row))
    }

    pub fn probability(&self, row: &FeatureRow) -> f64 {
        let (a, b) = self.calibration;
        sigmoid(a * self.margin(row) + b)
    }
}

fn design(rows: &[&FeatureRow], columns: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), columns.len()), |(i, j)| {
        rows[i].features.values[columns[j]]
    })
}

fn to_array(rows: Vec<Vec<f64>>, d: usize) -> Array2<f64> {
    let n = rows.len();
    Array2::from_shape_vec((n, d), rows.concat()).expect("rectangular rows")
}

/// Scale, project onto `k` components and fit the class-weighted SVM.
pub fn train_stage1(
    rows: &[&FeatureRow],
    labels: &[bool],
    spec: &MethodSpec,
    k: usize,
    config: &PipelineConfig,
) -> Result<Stage1> {
    if rows.len() != labels.len() {
        return Err(Error::invalid("labels", "row/label count mismatch"));
    }
    let columns = spec.columns();
    let x = design(rows, &columns);
    let scaler = MinMaxScaler::fit(x.view())?;
    let scaled = scaler.transform(x.view())?;
    let pca = fit_pca(scaled.view(), k)?;
    let z = pca.project(scaled.view())?;
    let weights = ClassWeights::balanced(labels)?;
    let fit = train_svm(z.view(), labels, weights, &config.svm)?;
    let calibration = match config.calibration {
        Calibration::Sigmoid => (1.0, 0.0),
        Calibration::Platt => {
            let margins: Vec<Vec<f64>> = z
                .rows()
                .into_iter()
                .map(|r| vec![fit.model.decision(&r.to_vec())])
                .collect();
            let m = train_logistic(
                to_array(margins, 1).view(),
                labels,
                weights,
                &config.logistic,
            )?;
            (m.weights[0], m.bias)
        }
    };
    Ok(Stage1 {
        columns,
        scaler,
        pca,
        svm: fit.model,
        calibration,
        svm_iterations: fit.iterations,
        svm_converged: fit.converged,
    })
}

/// Chooses `k` by leave-one-scene-out accuracy inside the training rows.
/// Ties go to the smallest `k`.
fn choose_k(
    rows: &[&FeatureRow],
    labels: &[bool],
    spec: &MethodSpec,
    config: &PipelineConfig,
) -> Result<usize> {
    let d = spec.columns().len();
    let grid: Vec<usize> = if config.auto_k_grid.is_empty() {
        (1..=d).collect()
    } else {
        let mut g: Vec<usize> = config
            .auto_k_grid
            .iter()
            .copied()
            .filter(|k| (1..=d).contains(k))
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    if grid.is_empty() {
        return Err(Error::invalid(
            "auto_k_grid",
            format!("no candidate within 1..={d}"),
        ));
    }
    let scenes: BTreeSet<&str> = rows.iter().map(|r| r.key.scene.as_str()).collect();
    if scenes.len() < 2 {
        return Ok(*grid.last().expect("non-empty"));
    }
    let scores: Vec<(usize, usize)> = grid
        .par_iter()
        .map(|&k| {
            let mut correct = 0;
            for held in &scenes {
                let (train, test): (Vec<usize>, Vec<usize>) =
                    (0..rows.len()).partition(|&i| rows[i].key.scene != *held);
                let tr_rows: Vec<&FeatureRow> = train.iter().map(|&i| rows[i]).collect();
                let tr_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
                let Ok(stage) = train_stage1(&tr_rows, &tr_labels, spec, k, config) else {
                    continue;
                };
                let tr_p: Vec<f64> = tr_rows.iter().map(|r| stage.probability(r)).collect();
                let tau = finite_threshold(select_threshold(&tr_p, &tr_labels));
                correct += test
                    .iter()
                    .filter(|&&i| (stage.probability(rows[i]) > tau) == labels[i])
                    .count();
            }
            (k, correct)
        })
        .collect();
    let best = scores.iter().map(|s| s.1).max().unwrap_or(0);
    Ok(scores
        .iter()
        .find(|s| s.1 == best)
        .map(|s| s.0)
        .expect("non-empty grid"))
}

/// Maps the infinite thresholds onto the probability range.
fn finite_threshold(tau: f64) -> f64 {
    if tau == f64::NEG_INFINITY {
        0.0
    } else if tau == f64::INFINITY {
        1.0
    } else {
        tau
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2 {
    pub memory: MemorySpec,
    pub append_features: bool,
    pub model: LogisticModel,
}

impl Stage2 {
    fn input(&self, stage1: &Stage1, row: &FeatureRow, p: f64, rank: usize) -> Vec<f64> {
        let mut v = vec![p, memory_feature(rank, &self.memory)];
        if self.append_features {
            v.extend(stage1.project(row));
        }
        v
    }
}

/// Ranks of every row within its (participant, scene) group.
fn group_ranks(rows: &[&FeatureRow], probs: &[f64]) -> Vec<usize> {
    let mut groups: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        groups
            .entry((&r.key.participant, &r.key.scene))
            .or_default()
            .push(i);
    }
    let mut ranks = vec![0; rows.len()];
    for idx in groups.values() {
        let items: Vec<(&str, f64)> = idx
            .iter()
            .map(|&i| (rows[i].key.object.as_str(), probs[i]))
            .collect();
        for (&i, r) in idx.iter().zip(memory_rank(&items)) {
            ranks[i] = r;
        }
    }
    ranks
}

/// Fits the memory stage on top of a trained stage 1. `rows` holds every
/// object (targets and non-targets) of the training scenes; only labeled
/// targets are training examples. Returns the model and its training
/// threshold.
pub fn train_stage2(
    stage1: &Stage1,
    rows: &[&FeatureRow],
    labels: &BTreeMap<RowKey, bool>,
    memory: MemorySpec,
    config: &PipelineConfig,
) -> Result<(Stage2, f64)> {
    let probs: Vec<f64> = rows.iter().map(|r| stage1.probability(r)).collect();
    let ranks = group_ranks(rows, &probs);
    let stage2 = Stage2 {
        memory,
        append_features: config.stage2_append_features,
        model: LogisticModel {
            weights: Vec::new(),
            bias: 0.0,
            grad_norm: 0.0,
            iterations: 0,
        },
    };
    let mut inputs = Vec::new();
    let mut y = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if !r.is_target {
            continue;
        }
        if let Some(&label) = labels.get(&r.key) {
            inputs.push(stage2.input(stage1, r, probs[i], ranks[i]));
            y.push(label);
        }
    }
    let d = inputs.first().map(Vec::len).unwrap_or(2);
    let x = to_array(inputs, d);
    let model = train_logistic(x.view(), &y, ClassWeights::balanced(&y)?, &config.logistic)?;
    let train_p: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| model.predict_proba(&r.to_vec()))
        .collect();
    let tau = finite_threshold(select_threshold(&train_p, &y));
    Ok((Stage2 { model, ..stage2 }, tau))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub key: RowKey,
    /// Final probability compared against the threshold.
    pub score: f64,
    pub aware: bool,
    pub stage1_probability: f64,
    /// Memory rank within the (participant, scene); memory methods only.
    pub rank: Option<usize>,
}

/// Scores the target rows of `rows`. Non-target rows only take part in the
/// memory ranking.
pub(crate) fn predict_rows(
    stage1: &Stage1,
    stage2: Option<&Stage2>,
    threshold: f64,
    rows: &[&FeatureRow],
) -> Vec<Prediction> {
    let probs: Vec<f64> = rows.par_iter().map(|r| stage1.probability(r)).collect();
    let ranks = stage2.map(|_| group_ranks(rows, &probs));
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.is_target)
        .map(|(i, r)| {
            let rank = ranks.as_ref().map(|rk| rk[i]);
            let score = match (stage2, rank) {
                (Some(s2), Some(rank)) => {
                    s2.model.predict_proba(&s2.input(stage1, r, probs[i], rank))
                }
                _ => probs[i],
            };
            Prediction {
                key: r.key.clone(),
                score,
                aware: score > threshold,
                stage1_probability: probs[i],
                rank,
            }
        })
        .collect()
}

/// Label keys consulted while training; used to check fold hygiene.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingAudit {
    pub label_keys: BTreeSet<RowKey>,
}

impl TrainingAudit {
    pub fn scenes(&self) -> BTreeSet<&str> {
        self.label_keys.iter().map(|k| k.scene.as_str()).collect()
    }
}

/// A fitted method with everything needed to score new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub format_version: u32,
    pub method: MethodSpec,
    pub config: PipelineConfig,
    pub feature_config: FeatureConfig,
    pub reference_heights: ReferenceHeights,
    /// Recorded for provenance; training itself is deterministic.
    pub seed: u64,
    pub selected_k: usize,
    pub stage1: Stage1,
    pub stage2: Option<Stage2>,
    /// Decision threshold on the final probability.
    pub threshold: f64,
    pub training_scenes: Vec<String>,
}

/// Labels keyed like feature rows.
pub fn label_index(ds: &Dataset) -> BTreeMap<RowKey, bool> {
    ds.labels
        .iter()
        .map(|l| {
            (
                RowKey::new(&l.participant_id, &l.scene_id, &l.object_id),
                l.aware,
            )
        })
        .collect()
}

/// Trains a learned method on every row of `table`.
///
/// `table` must have been extracted with `reference_heights`; only targets
/// with an entry in `labels` are used as examples.
pub fn train_pipeline(
    table: &FeatureTable,
    labels: &BTreeMap<RowKey, bool>,
    spec: &MethodSpec,
    config: &PipelineConfig,
    feature_config: FeatureConfig,
    reference_heights: ReferenceHeights,
    seed: u64,
) -> Result<(TrainedPipeline, TrainingAudit)> {
    spec.validate()?;
    let all: Vec<&FeatureRow> = table.rows.iter().collect();
    let mut audit = TrainingAudit::default();
    let mut examples = Vec::new();
    let mut y = Vec::new();
    for r in &all {
        if !r.is_target {
            continue;
        }
        if let Some(&label) = labels.get(&r.key) {
            audit.label_keys.insert(r.key.clone());
            examples.push(*r);
            y.push(label);
        }
    }
    if examples.is_empty() {
        return Err(Error::Empty("no labeled targets to train on".into()));
    }
    let k = match spec.pca_k {
        PcaK::Fixed(k) => k,
        PcaK::Auto => choose_k(&examples, &y, spec, config)?,
    };
    let stage1 = train_stage1(&examples, &y, spec, k, config)?;
    let (stage2, threshold) = match spec.memory {
        Some(memory) => {
            let (s2, tau) = train_stage2(&stage1, &all, labels, memory, config)?;
            (Some(s2), tau)
        }
        None => {
            let p: Vec<f64> = examples.iter().map(|r| stage1.probability(r)).collect();
            (None, finite_threshold(select_threshold(&p, &y)))
        }
    };
    let training_scenes = all
        .iter()
        .map(|r| r.key.scene.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok((
        TrainedPipeline {
            format_version: FORMAT_VERSION,
            method: spec.clone(),
            config: config.clone(),
            feature_config,
            reference_heights,
            seed,
            selected_k: k,
            stage1,
            stage2,
            threshold,
            training_scenes,
        },
        audit,
    ))
}

impl TrainedPipeline {
    /// Extracts features for the whole dataset and trains on all of it.
    pub fn fit_dataset(
        ds: &Dataset,
        spec: &MethodSpec,
        config: &PipelineConfig,
        feature_config: FeatureConfig,
        seed: u64,
    ) -> Result<Self> {
        let heights = ReferenceHeights::from_scenes(&ds.scenes)?;
        let table = extract_all(ds, &feature_config, &heights)?;
        let (p, _) = train_pipeline(
            &table,
            &label_index(ds),
            spec,
            config,
            feature_config,
            heights,
            seed,
        )?;
        Ok(p)
    }

    pub fn predict(&self, rows: &[FeatureRow]) -> Vec<Prediction> {
        let refs: Vec<&FeatureRow> = rows.iter().collect();
        predict_rows(&self.stage1, self.stage2.as_ref(), self.threshold, &refs)
    }

    /// Extracts features with the training-time settings and scores every
    /// target.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Prediction>> {
        let table = extract_all(ds, &self.feature_config, &self.reference_heights)?;
        Ok(self.predict(&table.rows))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        if p.format_version != FORMAT_VERSION {
            return Err(Error::invalid(
                "format_version",
                format!("expected {FORMAT_VERSION}, found {}", p.format_version),
            ));
        }
        Ok(p)
    }
}
