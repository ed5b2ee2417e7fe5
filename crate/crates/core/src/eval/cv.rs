use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{make_folds, roc_auc, FoldPlan, RocCurve};
use crate::features::{
    covisible_frames, extract_all, FeatureConfig, FeatureRow, FeatureTable, ReferenceHeights,
    RowKey,
};
use crate::pipeline::{
    fixation_score_ms, label_index, predict_rows, train_pipeline, train_stage2, FixationRule,
    MemorySpec, MethodSpec, PipelineConfig, Preset,
};
use crate::scene::Dataset;

/// What a cross-validation run evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    FixationRule(FixationRule),
    Learned(MethodSpec),
}

impl EvalMethod {
    pub fn from_preset(preset: Preset) -> Self {
        match preset.spec() {
            Some(spec) => EvalMethod::Learned(spec),
            None => EvalMethod::FixationRule(FixationRule::default()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            EvalMethod::FixationRule(_) => Preset::Baseline1.name(),
            EvalMethod::Learned(spec) => &spec.name,
        }
    }
}

/// Features and labels shared by every method evaluated on one dataset.
pub struct CvData<'a> {
    pub ds: &'a Dataset,
    pub plan: FoldPlan,
    pub feature_config: FeatureConfig,
    /// Extracted with unit reference heights; rescaled per fold.
    pub table: FeatureTable,
    pub labels: BTreeMap<RowKey, bool>,
    fold_heights: Vec<ReferenceHeights>,
}

impl<'a> CvData<'a> {
    pub fn prepare(ds: &'a Dataset, feature_config: FeatureConfig) -> Result<Self> {
        let plan = make_folds(ds)?;
        let table = extract_all(ds, &feature_config, &ReferenceHeights::unit())?;
        let fold_heights = plan
            .folds
            .iter()
            .map(|f| {
                ReferenceHeights::from_scenes(
                    ds.scenes
                        .iter()
                        .filter(|s| f.train_scenes.contains(&s.scene_id)),
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            ds,
            plan,
            feature_config,
            table,
            labels: label_index(ds),
            fold_heights,
        })
    }

    /// Training and test tables of one fold with fold-local size scaling.
    fn split(&self, fold: usize) -> Result<(FeatureTable, FeatureTable)> {
        let test = &self.plan.folds[fold].test_scene;
        let heights = &self.fold_heights[fold];
        let mut train = self.table.filter_scenes(|s| s != test);
        let mut held = self.table.filter_scenes(|s| s == test);
        train.rescale_size(&ReferenceHeights::unit(), heights)?;
        held.rescale_size(&ReferenceHeights::unit(), heights)?;
        Ok((train, held))
    }

    fn train_labels(&self, fold: usize) -> BTreeMap<RowKey, bool> {
        let test = &self.plan.folds[fold].test_scene;
        self.labels
            .iter()
            .filter(|(k, _)| &k.scene != test)
            .map(|(k, v)| (k.clone(), *v))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl Confusion {
    fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.true_positive += 1,
            (true, false) => self.false_positive += 1,
            (false, false) => self.true_negative += 1,
            (false, true) => self.false_negative += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    pub fn correct(&self) -> usize {
        self.true_positive + self.true_negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test_scene: String,
    /// Set when the fold could not be trained; its rows are left out of the pooled metrics.
    pub failure: Option<String>,
    pub n_test: usize,
    pub accuracy_pct: Option<f64>,
    pub threshold: Option<f64>,
    pub selected_k: Option<usize>,
    pub auc: Option<f64>,
    pub roc: Option<RocCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub label: String,
    pub evaluated: EvalMethod,
    pub config: PipelineConfig,
    pub feature_config: FeatureConfig,
    pub seed: u64,
    pub n_rows: usize,
    pub n_positive: usize,
    /// Pooled over every successful fold, each at its own threshold.
    pub accuracy_pct: f64,
    pub mean_fold_accuracy_pct: f64,
    /// Majority-class share of the pooled rows.
    pub chance_rate_pct: f64,
    pub confusion: Confusion,
    pub auc: Option<f64>,
    pub roc: Option<RocCurve>,
    pub folds: Vec<FoldResult>,
}

struct Scored {
    score: f64,
    aware: bool,
    label: bool,
}

struct FoldOutcome {
    rows: Vec<Scored>,
    threshold: f64,
    selected_k: Option<usize>,
}

fn fold_fixation(data: &CvData, fold: usize, rule: &FixationRule) -> Result<FoldOutcome> {
    let test = &data.plan.folds[fold].test_scene;
    let scene = data
        .ds
        .scene(test)
        .expect("fold scenes come from the dataset");
    let rows = data
        .labels
        .iter()
        .filter(|(k, _)| &k.scene == test)
        .map(|(k, &label)| {
            let obj = scene
                .object(&k.object)
                .ok_or_else(|| Error::Integrity(format!("unknown object {}", k.object)))?;
            let frames = data
                .ds
                .gaze_track(&k.participant, test)
                .map(|g| covisible_frames(g, obj, scene))
                .unwrap_or_default();
            let score = fixation_score_ms(&frames, rule.radius_deg, scene.frame_rate);
            Ok(Scored {
                score,
                aware: score > rule.duration_ms,
                label,
            })
        })
        .collect::<Result<_>>()?;
    Ok(FoldOutcome {
        rows,
        threshold: rule.duration_ms,
        selected_k: None,
    })
}

fn fold_learned(
    data: &CvData,
    fold: usize,
    spec: &MethodSpec,
    config: &PipelineConfig,
    seed: u64,
) -> Result<FoldOutcome> {
    let test = &data.plan.folds[fold].test_scene;
    let (train, held) = data.split(fold)?;
    let labels = data.train_labels(fold);
    let (pipeline, audit) = train_pipeline(
        &train,
        &labels,
        spec,
        config,
        data.feature_config,
        data.fold_heights[fold].clone(),
        seed,
    )?;
    check_hygiene(&audit.scenes(), test)?;
    let rows = pipeline
        .predict(&held.rows)
        .into_iter()
        .filter_map(|p| {
            data.labels.get(&p.key).map(|&label| Scored {
                score: p.score,
                aware: p.aware,
                label,
            })
        })
        .collect();
    Ok(FoldOutcome {
        rows,
        threshold: pipeline.threshold,
        selected_k: Some(pipeline.selected_k),
    })
}

fn check_hygiene(train_scenes: &std::collections::BTreeSet<&str>, test: &str) -> Result<()> {
    if train_scenes.contains(test) {
        return Err(Error::Integrity(format!(
            "training read labels of held-out scene {test}"
        )));
    }
    Ok(())
}

fn pct(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * correct as f64 / total as f64
    }
}

/// Leave-one-scene-out evaluation of one method.
pub fn run_cv(
    data: &CvData,
    method: &EvalMethod,
    config: &PipelineConfig,
    seed: u64,
) -> Result<EvalReport> {
    if let EvalMethod::Learned(spec) = method {
        spec.validate()?;
    }
    let outcomes: Vec<Result<FoldOutcome>> = (0..data.plan.len())
        .into_par_iter()
        .map(|i| match method {
            EvalMethod::FixationRule(rule) => fold_fixation(data, i, rule),
            EvalMethod::Learned(spec) => fold_learned(data, i, spec, config, seed),
        })
        .collect();

    let mut confusion = Confusion::default();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut folds = Vec::new();
    let mut fold_acc = Vec::new();
    for (fold, outcome) in data.plan.folds.iter().zip(outcomes) {
        match outcome {
            Ok(o) => {
                let mut c = Confusion::default();
                for r in &o.rows {
                    c.add(r.aware, r.label);
                    confusion.add(r.aware, r.label);
                    scores.push(r.score);
                    labels.push(r.label);
                }
                let fs: Vec<f64> = o.rows.iter().map(|r| r.score).collect();
                let fl: Vec<bool> = o.rows.iter().map(|r| r.label).collect();
                let roc = roc_auc(&fs, &fl).ok();
                let acc = pct(c.correct(), c.total());
                fold_acc.push(acc);
                folds.push(FoldResult {
                    test_scene: fold.test_scene.clone(),
                    failure: None,
                    n_test: c.total(),
                    accuracy_pct: Some(acc),
                    threshold: Some(o.threshold),
                    selected_k: o.selected_k,
                    auc: roc.as_ref().map(|r| r.auc),
                    roc,
                });
            }
            Err(e @ (Error::SingleClass | Error::Empty(_))) => {
                folds.push(FoldResult {
                    test_scene: fold.test_scene.clone(),
                    failure: Some(e.to_string()),
                    n_test: 0,
                    accuracy_pct: None,
                    threshold: None,
                    selected_k: None,
                    auc: None,
                    roc: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let n_positive = labels.iter().filter(|l| **l).count();
    let majority = n_positive.max(labels.len() - n_positive);
    let roc = roc_auc(&scores, &labels).ok();
    let (label, name) = match method {
        EvalMethod::FixationRule(_) => (
            Preset::Baseline1.label().to_owned(),
            method.name().to_owned(),
        ),
        EvalMethod::Learned(spec) => (
            spec.name
                .parse::<Preset>()
                .map(|p| p.label().to_owned())
                .unwrap_or_else(|_| spec.name.clone()),
            spec.name.clone(),
        ),
    };
    Ok(EvalReport {
        method: name,
        label,
        evaluated: method.clone(),
        config: config.clone(),
        feature_config: data.feature_config,
        seed,
        n_rows: labels.len(),
        n_positive,
        accuracy_pct: pct(confusion.correct(), confusion.total()),
        mean_fold_accuracy_pct: if fold_acc.is_empty() {
            0.0
        } else {
            fold_acc.iter().sum::<f64>() / fold_acc.len() as f64
        },
        chance_rate_pct: pct(majority, labels.len()),
        confusion,
        auc: roc.as_ref().map(|r| r.auc),
        roc,
        folds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySweepEntry {
    pub memory: MemorySpec,
    pub accuracy_pct: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySweepReport {
    /// Stage-1 method shared by every entry.
    pub stage1: MethodSpec,
    pub seed: u64,
    /// Pooled accuracy of stage 1 alone.
    pub stage1_accuracy_pct: f64,
    pub entries: Vec<MemorySweepEntry>,
}

impl MemorySweepReport {
    pub fn best(&self) -> Option<&MemorySweepEntry> {
        self.entries
            .iter()
            .fold(None, |best: Option<&MemorySweepEntry>, e| match best {
                Some(b) if b.accuracy_pct >= e.accuracy_pct => Some(b),
                _ => Some(e),
            })
    }
}

/// Evaluates several memory stages on top of one shared stage 1 per fold.
pub fn run_memory_sweep(
    data: &CvData,
    stage1_spec: &MethodSpec,
    memories: &[MemorySpec],
    config: &PipelineConfig,
    seed: u64,
) -> Result<MemorySweepReport> {
    let spec = MethodSpec {
        memory: None,
        ..stage1_spec.clone()
    };
    spec.validate()?;
    type FoldRows = (Vec<Scored>, Vec<Vec<Scored>>);
    let per_fold: Vec<Option<FoldRows>> = (0..data.plan.len())
        .into_par_iter()
        .map(|i| -> Result<Option<FoldRows>> {
            let test = &data.plan.folds[i].test_scene;
            let (train, held) = data.split(i)?;
            let labels = data.train_labels(i);
            let trained = train_pipeline(
                &train,
                &labels,
                &spec,
                config,
                data.feature_config,
                data.fold_heights[i].clone(),
                seed,
            );
            let (pipeline, audit) = match trained {
                Ok(t) => t,
                Err(Error::SingleClass) => return Ok(None),
                Err(e) => return Err(e),
            };
            check_hygiene(&audit.scenes(), test)?;
            let label_of = |k: &RowKey| data.labels.get(k).copied();
            let to_scored = |preds: Vec<crate::pipeline::Prediction>| -> Vec<Scored> {
                preds
                    .into_iter()
                    .filter_map(|p| {
                        label_of(&p.key).map(|label| Scored {
                            score: p.score,
                            aware: p.aware,
                            label,
                        })
                    })
                    .collect()
            };
            let base = to_scored(pipeline.predict(&held.rows));
            let train_rows: Vec<&FeatureRow> = train.rows.iter().collect();
            let held_rows: Vec<&FeatureRow> = held.rows.iter().collect();
            let mut sweeps = Vec::with_capacity(memories.len());
            for &m in memories {
                let (s2, tau) = train_stage2(&pipeline.stage1, &train_rows, &labels, m, config)?;
                sweeps.push(to_scored(predict_rows(
                    &pipeline.stage1,
                    Some(&s2),
                    tau,
                    &held_rows,
                )));
            }
            Ok(Some((base, sweeps)))
        })
        .collect::<Result<_>>()?;

    let pooled = |rows: Vec<&Scored>| -> (f64, Option<f64>) {
        let correct = rows.iter().filter(|r| r.aware == r.label).count();
        let s: Vec<f64> = rows.iter().map(|r| r.score).collect();
        let l: Vec<bool> = rows.iter().map(|r| r.label).collect();
        (
            pct(correct, rows.len()),
            roc_auc(&s, &l).ok().map(|c| c.auc),
        )
    };
    let ok: Vec<&FoldRows> = per_fold.iter().flatten().collect();
    let (stage1_accuracy_pct, _) = pooled(ok.iter().flat_map(|f| f.0.iter()).collect());
    let entries = memories
        .iter()
        .enumerate()
        .map(|(j, &memory)| {
            let (accuracy_pct, auc) = pooled(ok.iter().flat_map(|f| f.1[j].iter()).collect());
            MemorySweepEntry {
                memory,
                accuracy_pct,
                auc,
            }
        })
        .collect();
    Ok(MemorySweepReport {
        stage1: spec,
        seed,
        stage1_accuracy_pct,
        entries,
    })
}
