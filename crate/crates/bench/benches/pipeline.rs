use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use sa_bench::{dataset, design_matrix, table};
use sa_core::eval::{roc_auc, run_cv, CvData, EvalMethod};
use sa_core::numeric::{fit_pca, train_svm, ClassWeights, MinMaxScaler, SvmConfig};
use sa_core::pipeline::{baseline1_roc, FixationRule, SweepMode};
use sa_core::synth::{gen_dataset, GenConfig};
use sa_core::{extract_all, FeatureConfig, PipelineConfig, Preset, ReferenceHeights};

fn features(c: &mut Criterion) {
    let ds = dataset(8, 44);
    c.bench_function("extract_all 44x8", |b| {
        b.iter(|| extract_all(&ds, &FeatureConfig::default(), &ReferenceHeights::unit()).unwrap())
    });
    c.bench_function("gen_dataset 44x8", |b| {
        b.iter(|| gen_dataset(&GenConfig::default()).unwrap())
    });
}

fn numeric(c: &mut Criterion) {
    let ds = dataset(8, 44);
    let t = table(&ds);
    let (x, y) = design_matrix(&ds, &t);
    let scaled = MinMaxScaler::fit(x.view())
        .unwrap()
        .transform(x.view())
        .unwrap();
    c.bench_function("fit_pca k=11", |b| {
        b.iter(|| fit_pca(scaled.view(), 11).unwrap())
    });
    let projected = fit_pca(scaled.view(), 11)
        .unwrap()
        .project(scaled.view())
        .unwrap();
    let weights = ClassWeights::balanced(&y).unwrap();
    c.bench_function("train_svm", |b| {
        b.iter(|| train_svm(projected.view(), &y, weights, &SvmConfig::default()).unwrap())
    });
    let scores: Vec<f64> = (0..y.len()).map(|i| projected[[i, 0]]).collect();
    c.bench_function("roc_auc", |b| b.iter(|| roc_auc(&scores, &y).unwrap()));
}

fn evaluation(c: &mut Criterion) {
    let ds = dataset(8, 44);
    let rule = FixationRule::default();
    c.bench_function("baseline1 radius sweep", |b| {
        b.iter(|| baseline1_roc(&ds, SweepMode::Radius, &rule).unwrap())
    });
    let small = dataset(4, 12);
    let mut group = c.benchmark_group("cross validation");
    group.sample_size(10);
    group.bench_function("method123 4 scenes x 12", |b| {
        b.iter_batched(
            || CvData::prepare(&small, FeatureConfig::default()).unwrap(),
            |data| {
                let method = EvalMethod::from_preset(Preset::Method123);
                run_cv(&data, &method, &PipelineConfig::default(), 1).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, features, numeric, evaluation);
criterion_main!(benches);
