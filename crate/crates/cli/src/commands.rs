use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use sa_core::eval::{
    comparison_csv, fit_feature_pca, pca_report, render_comparison, roc_auc, run_cv, CvData,
    EvalMethod, EvalReport,
};
use sa_core::pipeline::{baseline1_roc, label_index, SweepMode};
use sa_core::synth::{gen_dataset, write_synthetic};
use sa_core::{
    extract_all, load_dataset, Dataset, FeatureRow, MemoryShape, MethodSpec, PcaK, Preset,
    ReferenceHeights, TrainedPipeline,
};

use crate::config::{usage, RunConfig};
use crate::{Cli, Command, MethodArgs, Sweep};

struct Ctx {
    dataset: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    config: RunConfig,
}

impl Ctx {
    fn dataset(&self) -> anyhow::Result<Dataset> {
        let path = self
            .dataset
            .as_deref()
            .ok_or_else(|| usage("--dataset is required"))?;
        Ok(load_dataset(path)?)
    }

    fn seed(&self) -> anyhow::Result<u64> {
        self.seed.ok_or_else(|| usage("--seed is required"))
    }

    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting the worker pool")?;
    }
    let ctx = Ctx {
        dataset: cli.global.dataset,
        seed: cli.global.seed,
        out: cli.global.out,
        config: RunConfig::load(cli.global.config.as_deref())?,
    };
    match cli.command {
        Command::Features => features(&ctx),
        Command::Train(args) => train(&ctx, &args),
        Command::Eval(args) => eval(&ctx, &args.method),
        Command::Roc { model } => roc(&ctx, &model),
        Command::Baseline1 { sweep } => baseline1(&ctx, sweep),
        Command::PcaReport { top, method } => pca(&ctx, top, &method),
        Command::Synth {
            scenes,
            participants,
        } => synth(&ctx, scenes, participants),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn features(ctx: &Ctx) -> anyhow::Result<()> {
    let ds = ctx.dataset()?;
    let heights = ReferenceHeights::from_scenes(&ds.scenes)?;
    let table = extract_all(&ds, &ctx.config.features, &heights)?;
    let path = ctx.out_or("features.csv");
    let mut w = create(&path)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let labeled = label_index(&ds);
    let n_labeled = table
        .rows
        .iter()
        .filter(|r| labeled.contains_key(&r.key))
        .count();
    println!(
        "wrote {} rows ({n_labeled} labeled) to {}",
        table.len(),
        path.display()
    );
    Ok(())
}

/// The preset with any `--pca-k` / `--memory-*` overrides applied.
fn method_spec(args: &MethodArgs) -> anyhow::Result<Option<MethodSpec>> {
    let preset: Preset = args.method.parse()?;
    let Some(mut spec) = preset.spec() else {
        if args.pca_k.is_some() || args.memory_n.is_some() || args.memory_shape.is_some() {
            return Err(usage("baseline1 takes no --pca-k or --memory-* flags"));
        }
        return Ok(None);
    };
    if let Some(k) = &args.pca_k {
        spec.pca_k = k.parse::<PcaK>()?;
    }
    if args.memory_n.is_some() || args.memory_shape.is_some() {
        let mut memory = spec.memory.unwrap_or_default();
        if let Some(n) = args.memory_n {
            memory.capacity = n;
        }
        if let Some(shape) = &args.memory_shape {
            memory.shape = shape.parse::<MemoryShape>()?;
        }
        spec.memory = Some(memory);
    }
    spec.validate()?;
    Ok(Some(spec))
}

fn train(ctx: &Ctx, args: &MethodArgs) -> anyhow::Result<()> {
    let seed = ctx.seed()?;
    let spec = method_spec(args)?
        .ok_or_else(|| usage("baseline1 is a fixed rule; there is nothing to train"))?;
    let ds = ctx.dataset()?;
    let model =
        TrainedPipeline::fit_dataset(&ds, &spec, &ctx.config.pipeline, ctx.config.features, seed)?;
    let path = ctx.out_or("model.json");
    write_text(&path, &(model.to_json()? + "\n"))?;
    println!(
        "trained {} (k = {}, threshold {:.6}) -> {}",
        spec.name,
        model.selected_k,
        model.threshold,
        path.display()
    );
    Ok(())
}

fn write_report(dir: &Path, report: &EvalReport) -> anyhow::Result<()> {
    write_json(&dir.join(format!("{}.json", report.method)), report)?;
    if let Some(roc) = &report.roc {
        let mut w = create(&dir.join(format!("{}_roc.csv", report.method)))?;
        roc.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn summary(report: &EvalReport) -> String {
    let failed = report.folds.iter().filter(|f| f.failure.is_some()).count();
    let auc = report
        .auc
        .map_or_else(|| "n/a".to_owned(), |a| format!("{a:.3}"));
    let mut line = format!(
        "{}: accuracy {:.1}% (chance {:.1}%), AUC {auc}",
        report.method, report.accuracy_pct, report.chance_rate_pct
    );
    if failed > 0 {
        line.push_str(&format!(", {failed} failed fold(s)"));
    }
    line
}

fn eval(ctx: &Ctx, args: &MethodArgs) -> anyhow::Result<()> {
    let seed = ctx.seed()?;
    let all = args.method == "all";
    if all && (args.pca_k.is_some() || args.memory_n.is_some() || args.memory_shape.is_some()) {
        return Err(usage(
            "--method all runs the presets as defined; drop the overrides",
        ));
    }
    let methods: Vec<EvalMethod> = if all {
        Preset::ALL
            .into_iter()
            .map(|p| match p.spec() {
                Some(spec) => EvalMethod::Learned(spec),
                None => EvalMethod::FixationRule(ctx.config.fixation_rule),
            })
            .collect()
    } else {
        vec![match method_spec(args)? {
            Some(spec) => EvalMethod::Learned(spec),
            None => EvalMethod::FixationRule(ctx.config.fixation_rule),
        }]
    };
    let ds = ctx.dataset()?;
    let data = CvData::prepare(&ds, ctx.config.features)?;
    let dir = ctx.out_or("eval");
    let mut reports = Vec::with_capacity(methods.len());
    for method in &methods {
        let report = run_cv(&data, method, &ctx.config.pipeline, seed)?;
        write_report(&dir, &report)?;
        println!("{}", summary(&report));
        reports.push(report);
    }
    if all {
        let table = render_comparison(&reports);
        write_text(&dir.join("comparison.md"), &table)?;
        write_text(&dir.join("comparison.csv"), &comparison_csv(&reports))?;
        print!("\n{table}");
    }
    Ok(())
}

fn roc(ctx: &Ctx, model_path: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(model_path)
        .with_context(|| format!("reading model {}", model_path.display()))?;
    let model = TrainedPipeline::from_json(&text)?;
    let ds = ctx.dataset()?;
    let labels = label_index(&ds);
    let (scores, truth): (Vec<f64>, Vec<bool>) = model
        .predict_dataset(&ds)?
        .into_iter()
        .filter_map(|p| labels.get(&p.key).map(|&l| (p.score, l)))
        .unzip();
    let curve = roc_auc(&scores, &truth)?;
    let path = ctx.out_or("roc.csv");
    let mut w = create(&path)?;
    curve.write_csv(&mut w)?;
    w.flush()?;
    println!(
        "AUC {:.4} over {} rows -> {}",
        curve.auc,
        scores.len(),
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    mode: SweepMode,
    auc: f64,
    points: usize,
    csv: String,
}

fn baseline1(ctx: &Ctx, sweep: Sweep) -> anyhow::Result<()> {
    let modes: &[SweepMode] = match sweep {
        Sweep::Radius => &[SweepMode::Radius],
        Sweep::Duration => &[SweepMode::Duration],
        Sweep::Both => &[SweepMode::Radius, SweepMode::Duration],
    };
    let ds = ctx.dataset()?;
    let dir = ctx.out_or("baseline1");
    let mut summaries = Vec::new();
    for &mode in modes {
        let roc = baseline1_roc(&ds, mode, &ctx.config.fixation_rule)?;
        let name = match mode {
            SweepMode::Radius => "baseline1_radius.csv",
            SweepMode::Duration => "baseline1_duration.csv",
        };
        let mut w = create(&dir.join(name))?;
        roc.write_csv(&mut w)?;
        w.flush()?;
        println!(
            "{mode:?} sweep: {} points, AUC {:.4}",
            roc.points.len(),
            roc.auc
        );
        summaries.push(SweepSummary {
            mode,
            auc: roc.auc,
            points: roc.points.len(),
            csv: name.to_owned(),
        });
    }
    write_json(&dir.join("baseline1.json"), &summaries)
}

fn pca(ctx: &Ctx, top: usize, method: &str) -> anyhow::Result<()> {
    let spec = method
        .parse::<Preset>()?
        .spec()
        .ok_or_else(|| usage("baseline1 has no feature columns"))?;
    let columns = spec.columns();
    if top == 0 || top > columns.len() {
        return Err(usage(format!(
            "--top must lie in 1..={} for {method}",
            columns.len()
        )));
    }
    let ds = ctx.dataset()?;
    let heights = ReferenceHeights::from_scenes(&ds.scenes)?;
    let table = extract_all(&ds, &ctx.config.features, &heights)?;
    let labeled = label_index(&ds);
    let rows: Vec<&FeatureRow> = table
        .rows
        .iter()
        .filter(|r| labeled.contains_key(&r.key))
        .collect();
    let basis = fit_feature_pca(&rows, &columns, columns.len())?;
    let names: Vec<String> = columns.iter().map(|&c| table.names[c].clone()).collect();
    let report = pca_report(&basis, &names, top)?;
    let dir = ctx.out_or("pca");
    let mut w = create(&dir.join("loadings.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let md = report.to_markdown();
    write_text(&dir.join("loadings.md"), &md)?;
    println!(
        "top {top} components explain {:.1}% of the variance",
        report.cumulative_pct()
    );
    Ok(())
}

fn synth(ctx: &Ctx, scenes: Option<usize>, participants: Option<usize>) -> anyhow::Result<()> {
    let mut cfg = ctx.config.synth;
    cfg.seed = ctx.seed()?;
    if let Some(n) = scenes {
        cfg.n_scenes = n;
    }
    if let Some(n) = participants {
        cfg.n_participants = n;
    }
    let (ds, trace) = gen_dataset(&cfg)?;
    let dir = ctx.out_or("synthetic");
    write_synthetic(&ds, &trace, &dir)?;
    println!(
        "wrote {} scenes, {} participants, {} labels to {}",
        ds.scenes.len(),
        cfg.n_participants,
        ds.labels.len(),
        dir.display()
    );
    Ok(())
}
