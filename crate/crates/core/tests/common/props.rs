//! Randomized invariants as (strategy, property) pairs, so the same checks
//! run under `proptest!` and from the acceptance runner.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use ndarray::Array2;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use sa_core::eval::{make_folds, roc_auc, FoldPlan};
use sa_core::features::{object_property_features, CoFrame, SensoryFeatures};
use sa_core::numeric::{
    logistic_objective_gradient, train_svm, ClassWeights, MinMaxScaler, SvmConfig,
};
use sa_core::pipeline::{accuracy_at, label_index, memory_feature, memory_rank, train_pipeline};
use sa_core::scene::{Contrast, Movement};
use sa_core::synth::{gen_dataset, GenConfig};
use sa_core::{
    extract_all, Dataset, FeatureConfig, FeatureTable, MemoryShape, MemorySpec, ObjectKind,
    ObjectProperties, PipelineConfig, Preset, ReferenceHeights, SceneRecord, SensoryRadii,
};

pub const CASES: u32 = 1000;

type Outcome = Result<(), TestCaseError>;
type Problem = (Array2<f64>, Vec<bool>);

pub fn config() -> Config {
    Config {
        failure_persistence: None,
        ..Config::with_cases(CASES)
    }
}

/// Distinct frames inside a 10 s window at 60 Hz ending at t = 20.
pub fn frames() -> impl Strategy<Value = Vec<CoFrame>> {
    prop::collection::btree_set(0usize..600, 0..120).prop_flat_map(|idx| {
        let n = idx.len();
        (Just(idx), prop::collection::vec(0.0f64..40.0, n)).prop_map(|(idx, d)| {
            idx.into_iter()
                .zip(d)
                .map(|(k, distance)| CoFrame {
                    t: 10.0 + (k + 1) as f64 / 60.0,
                    distance,
                })
                .collect()
        })
    })
}

pub fn sensory_monotone(frames: Vec<CoFrame>) -> Outcome {
    let scene = SceneRecord::new("s", 20.0);
    let hv =
        SensoryFeatures::from_frames(&frames, &scene, &SensoryRadii::default(), 60.0).per_radius;
    for n in 0..3 {
        prop_assert!(hv[n].dwell <= hv[n + 1].dwell);
        prop_assert!(hv[n].elapse >= hv[n + 1].elapse);
    }
    for h in &hv {
        prop_assert!((0.0..=scene.window_len).contains(&h.dwell));
        prop_assert!((0.0..=scene.window_len).contains(&h.elapse));
    }
    Ok(())
}

pub fn properties() -> impl Strategy<Value = ObjectProperties> {
    (
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
        0usize..3,
        0usize..4,
        any::<bool>(),
    )
        .prop_map(
            |(ped, relevance, light_green, c, m, area_change)| ObjectProperties {
                kind: if ped {
                    ObjectKind::Pedestrian
                } else {
                    ObjectKind::Vehicle
                },
                relevance,
                light_green,
                contrast: Contrast::ALL[c],
                movement: Movement::ALL[m],
                area_change,
            },
        )
}

pub fn one_hot_sums(p: ObjectProperties) -> Outcome {
    let enc = object_property_features(&p).to_array();
    prop_assert_eq!(enc[4..7].iter().sum::<f64>(), 1.0);
    prop_assert_eq!(enc[7..].iter().sum::<f64>(), 1.0);
    prop_assert!(enc.iter().all(|v| *v == 0.0 || *v == 1.0));
    Ok(())
}

/// `(capacity, rank, shape)`; `|rank - capacity|` stays where tanh is
/// still below 1 in f64.
pub fn memory_inputs() -> impl Strategy<Value = (usize, usize, MemoryShape)> {
    (
        1usize..16,
        1usize..16,
        prop_oneof![
            Just(MemoryShape::Tanh),
            Just(MemoryShape::Step),
            Just(MemoryShape::Linear)
        ],
    )
}

pub fn memory_shape_bounds((capacity, rank, shape): (usize, usize, MemoryShape)) -> Outcome {
    let spec = MemorySpec { capacity, shape };
    let here = memory_feature(rank, &spec);
    prop_assert!(here <= memory_feature(rank + 1, &spec));
    match shape {
        MemoryShape::Tanh => {
            prop_assert!(here > -1.0 && here < 1.0);
            prop_assert_eq!(memory_feature(capacity, &spec), 0.0);
        }
        MemoryShape::Step => prop_assert!(here == 0.0 || here == 1.0),
        MemoryShape::Linear => prop_assert_eq!(here, rank as f64),
    }
    Ok(())
}

pub fn rank_inputs() -> impl Strategy<Value = (Vec<f64>, f64, u64)> {
    (
        prop::collection::vec(-5.0f64..5.0, 1..30),
        0.01f64..100.0,
        any::<u64>(),
    )
}

/// Ranks are a permutation of 1..=n, follow their item under reordering,
/// and keep their order when margins are scaled before the sigmoid.
pub fn rank_permutation((margins, scale, seed): (Vec<f64>, f64, u64)) -> Outcome {
    let ids: Vec<String> = (0..margins.len()).map(|i| format!("o{i:02}")).collect();
    let items: Vec<(&str, f64)> = ids
        .iter()
        .map(String::as_str)
        .zip(margins.iter().copied())
        .collect();
    let ranks = memory_rank(&items);

    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    prop_assert_eq!(sorted, (1..=items.len()).collect::<Vec<_>>());

    let scaled: Vec<(&str, f64)> = items
        .iter()
        .map(|(id, m)| (*id, 1.0 / (1.0 + (-scale * m).exp())))
        .collect();
    let scaled_ranks = memory_rank(&scaled);
    for i in 0..items.len() {
        for j in 0..items.len() {
            if scaled[i].1 > scaled[j].1 {
                prop_assert!(scaled_ranks[i] < scaled_ranks[j]);
            }
        }
    }

    let mut perm: Vec<usize> = (0..items.len()).collect();
    let mut s = seed;
    for i in (1..perm.len()).rev() {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        perm.swap(i, (s >> 33) as usize % (i + 1));
    }
    let permuted: Vec<(&str, f64)> = perm.iter().map(|&i| items[i]).collect();
    let permuted_ranks = memory_rank(&permuted);
    for (pos, &i) in perm.iter().enumerate() {
        prop_assert_eq!(permuted_ranks[pos], ranks[i]);
    }
    Ok(())
}

pub fn scene_ids() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set("[a-z]{1,4}", 2..12)
}

pub fn fold_partition(ids: BTreeSet<String>) -> Outcome {
    let ids: Vec<String> = ids.into_iter().collect();
    let plan = FoldPlan::from_scene_ids(&ids).unwrap();
    prop_assert_eq!(plan.len(), ids.len());
    let tests: BTreeSet<&str> = plan.folds.iter().map(|f| f.test_scene.as_str()).collect();
    prop_assert_eq!(tests.len(), ids.len());
    for f in &plan.folds {
        prop_assert!(!f.train_scenes.contains(&f.test_scene));
        prop_assert_eq!(f.train_scenes.len() + 1, ids.len());
    }
    Ok(())
}

/// Small labelled problem with both classes present.
pub fn problem(max_rows: usize, cols: usize) -> impl Strategy<Value = Problem> {
    (4..max_rows).prop_flat_map(move |n| {
        (
            prop::collection::vec(-3.0f64..3.0, n * cols),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(v, mut y)| {
                y[0] = true;
                y[1] = false;
                (Array2::from_shape_vec((n, cols), v).unwrap(), y)
            })
    })
}

pub fn svm_inputs() -> impl Strategy<Value = (Problem, f64)> {
    (problem(30, 3), 0.1f64..10.0)
}

pub fn svm_descent(((x, y), c): (Problem, f64)) -> Outcome {
    let config = SvmConfig {
        c,
        max_iter: 200,
        ..SvmConfig::default()
    };
    let weights = ClassWeights::balanced(&y).unwrap();
    let fit = train_svm(x.view(), &y, weights, &config).unwrap();
    for w in fit.objective_log.windows(2) {
        prop_assert!(w[1] <= w[0]);
    }
    // The origin scores C times the total sample weight.
    let origin: f64 = y.iter().map(|&l| weights.of(l)).sum::<f64>() * c;
    prop_assert!(fit.model.objective(x.view(), &y) <= origin + 1e-9);
    Ok(())
}

pub fn affine_inputs() -> impl Strategy<Value = (Problem, Vec<f64>, Vec<f64>, f64)> {
    (
        problem(12, 4),
        prop::collection::vec(-5.0f64..5.0, 4),
        prop::collection::vec(-5.0f64..5.0, 4),
        -2.0f64..2.0,
    )
}

pub fn svm_affine(((x, y), a, b, alpha): (Problem, Vec<f64>, Vec<f64>, f64)) -> Outcome {
    let config = SvmConfig {
        max_iter: 50,
        ..SvmConfig::default()
    };
    let m = train_svm(x.view(), &y, ClassWeights::uniform(), &config)
        .unwrap()
        .model;
    let mix: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(p, q)| alpha * p + (1.0 - alpha) * q)
        .collect();
    let want = alpha * m.decision(&a) + (1.0 - alpha) * m.decision(&b);
    prop_assert!((m.decision(&mix) - want).abs() <= 1e-10 * (1.0 + want.abs()));
    Ok(())
}

pub fn gradient_inputs() -> impl Strategy<Value = (Problem, Vec<f64>, f64, bool)> {
    (
        problem(25, 3),
        prop::collection::vec(-2.0f64..2.0, 4),
        0.0f64..1.0,
        any::<bool>(),
    )
}

/// Analytic gradient against central differences, 1e-6 relative.
pub fn logistic_gradient(
    ((x, y), params, l2, balanced): (Problem, Vec<f64>, f64, bool),
) -> Outcome {
    let weights = if balanced {
        ClassWeights::balanced(&y).unwrap()
    } else {
        ClassWeights::uniform()
    };
    let f = |p: &[f64]| logistic_objective_gradient(p, x.view(), &y, &weights, l2);
    let (_, grad) = f(&params);
    let h = 1e-5;
    for k in 0..params.len() {
        let mut hi = params.clone();
        let mut lo = params.clone();
        hi[k] += h;
        lo[k] -= h;
        let numeric = (f(&hi).0 - f(&lo).0) / (2.0 * h);
        let scale = grad[k].abs().max(numeric.abs()).max(1e-3);
        prop_assert!(
            (grad[k] - numeric).abs() / scale <= 1e-6,
            "component {}: analytic {}, numeric {}",
            k,
            grad[k],
            numeric
        );
    }
    Ok(())
}

pub fn scaler_inputs() -> impl Strategy<Value = Problem> {
    problem(20, 5)
}

pub fn scaler_unit_range((x, _): Problem) -> Outcome {
    let z = MinMaxScaler::fit(x.view())
        .unwrap()
        .transform(x.view())
        .unwrap();
    for c in 0..x.ncols() {
        let col = z.column(c);
        prop_assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
        prop_assert_eq!(col.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
    }
    Ok(())
}

pub fn roc_inputs() -> impl Strategy<Value = (Vec<u8>, Vec<bool>)> {
    (
        prop::collection::vec(0u8..20, 2..80),
        prop::collection::vec(any::<bool>(), 80),
    )
}

pub fn roc_monotone((raw, seed_labels): (Vec<u8>, Vec<bool>)) -> Outcome {
    let scores: Vec<f64> = raw.iter().map(|&s| f64::from(s) / 4.0).collect();
    let mut labels = seed_labels[..scores.len()].to_vec();
    labels[0] = true;
    labels[1] = false;
    let curve = roc_auc(&scores, &labels).unwrap();
    for w in curve.points.windows(2) {
        prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
    }
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|l| **l).count() as f64;
    prop_assert!((accuracy_at(&scores, &labels, f64::INFINITY) - (n - pos) / n).abs() < 1e-12);
    prop_assert!((accuracy_at(&scores, &labels, f64::NEG_INFINITY) - pos / n).abs() < 1e-12);
    Ok(())
}

struct Fixture {
    ds: Dataset,
    table: FeatureTable,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let (ds, _) = gen_dataset(&GenConfig {
            seed: 5,
            n_scenes: 4,
            n_participants: 3,
            ..GenConfig::default()
        })
        .unwrap();
        let table = extract_all(&ds, &FeatureConfig::default(), &ReferenceHeights::unit()).unwrap();
        Fixture { ds, table }
    })
}

pub fn hygiene_inputs() -> impl Strategy<Value = (usize, u64)> {
    (0usize..4, any::<u64>())
}

/// Training on a fold's training scenes never consults a held-out label.
pub fn pause_out_hygiene((fold, seed): (usize, u64)) -> Outcome {
    let fx = fixture();
    let plan = make_folds(&fx.ds).unwrap();
    let test = &plan.folds[fold].test_scene;
    let table = fx.table.filter_scenes(|s| s != test);
    let labels: BTreeMap<_, _> = label_index(&fx.ds)
        .into_iter()
        .filter(|(k, _)| &k.scene != test)
        .collect();
    let config = PipelineConfig {
        svm: SvmConfig {
            max_iter: 20,
            ..SvmConfig::default()
        },
        ..PipelineConfig::default()
    };
    let (_, audit) = train_pipeline(
        &table,
        &labels,
        &Preset::Method123.spec().unwrap(),
        &config,
        FeatureConfig::default(),
        ReferenceHeights::unit(),
        seed,
    )
    .unwrap();
    prop_assert!(!audit.scenes().contains(test.as_str()));
    prop_assert!(!audit.label_keys.is_empty());
    Ok(())
}

fn run<S: Strategy>(strategy: S, property: impl Fn(S::Value) -> Outcome) -> Result<(), String> {
    TestRunner::new(config())
        .run(&strategy, property)
        .map_err(|e| e.to_string())
}

/// Every suite, `CASES` cases each, by name.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("HV radii monotonicity", run(frames(), sensory_monotone)),
        ("one-hot sums", run(properties(), one_hot_sums)),
        (
            "memory shapes (tanh bounds, M(R=N)=0)",
            run(memory_inputs(), memory_shape_bounds),
        ),
        ("rank permutation", run(rank_inputs(), rank_permutation)),
        ("fold partition", run(scene_ids(), fold_partition)),
        (
            "pause-out hygiene",
            run(hygiene_inputs(), pause_out_hygiene),
        ),
        ("SVM objective descent", run(svm_inputs(), svm_descent)),
        ("SVM decision affine", run(affine_inputs(), svm_affine)),
        (
            "logistic gradient vs finite differences",
            run(gradient_inputs(), logistic_gradient),
        ),
        (
            "min-max unit range",
            run(scaler_inputs(), scaler_unit_range),
        ),
        (
            "ROC monotone, threshold extremes",
            run(roc_inputs(), roc_monotone),
        ),
    ]
}
