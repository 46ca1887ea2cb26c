//! `tipatch` — trains, applies, tiles, simulates, and evaluates adversarial
//! patches against differentiable no-reference quality metrics.
//!
//! stdout carries machine-readable JSON only; human-facing logs go to
//! stderr. Exit codes: 0 success, 1 usage error, 2 data/computation error.

mod config;
mod data;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::fmt;
use std::path::{Path, PathBuf};
use tipatch_core::camsim::wallpaper_gain;
use tipatch_core::evalkit::{
    compare_report, evaluate_images, evaluate_videos, synth_dataset, EvalProtocol, EvalReport,
    ProtocolMode, ReportEntry,
};
use tipatch_core::imagery::{
    load_image, load_patch, save_image, save_patch, Image, Patch, Placement, RngStream, Rotation,
    Seed,
};
use tipatch_core::metrics::{create_metric, grad_check, Metric};
use tipatch_core::patch_ops::{apply_patch, tile_patch, TileSpec};
use tipatch_core::trainer::{train, train_all_variants, VariantConfig};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors that should exit with code 1 (bad invocation) rather than 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "tipatch",
    version,
    about = "Adversarial patches against no-reference quality metrics",
    disable_help_subcommand = true
)]
struct Cli {
    /// JSON run configuration; flags override config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override for both training and evaluation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch-parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Metric id: proxy | tinycnn.
    #[arg(long, global = true)]
    metric: Option<String>,
    /// Weight file for the tinycnn metric.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one variant and write the best-checkpoint patch.
    Train(TrainArgs),
    /// Train all eight variants with a shared seed and emit a comparison.
    TrainAll(TrainAllArgs),
    /// Evaluate a patch over a dataset and write a gain report.
    Eval(EvalArgs),
    /// Composite a patch into one image.
    Apply(ApplyArgs),
    /// Tile a patch over a region of one image.
    Tile(TileArgs),
    /// Push an image through the capture-distortion pipeline.
    Simulate(SimulateArgs),
    /// Check analytic metric gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Generate a synthetic PPM dataset.
    Synth(SynthArgs),
    /// Merge evaluation reports into a variant-by-dataset table.
    Report(ReportArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Variant name, e.g. baseline, baseline-wrl+, bw-baseline-l+.
    #[arg(long)]
    variant: Option<String>,
    /// Training image directory.
    #[arg(long)]
    data: PathBuf,
    /// Validation image directory.
    #[arg(long)]
    val: PathBuf,
    /// Output patch file.
    #[arg(short, long, default_value = "patch.tipf")]
    output: PathBuf,
    /// Training-log CSV path (default: output with .csv extension).
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    patch_size: Option<usize>,
    /// sign-ascent | adam-like.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    lambda_tv: Option<f64>,
    #[arg(long)]
    lambda_nps: Option<f64>,
    #[arg(long)]
    palette: Option<PathBuf>,
    #[arg(long)]
    relight_max_delta: Option<f64>,
    #[arg(long)]
    val_cadence: Option<u64>,
}

#[derive(Args)]
struct TrainAllArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    val: PathBuf,
    /// Held-out directory for the comparison table (default: the val set).
    #[arg(long)]
    test: Option<PathBuf>,
    /// Directory for the eight patches and the comparison table.
    #[arg(long, default_value = "variants")]
    out_dir: PathBuf,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    lambda_tv: Option<f64>,
    #[arg(long)]
    lambda_nps: Option<f64>,
    #[arg(long)]
    palette: Option<PathBuf>,
    #[arg(long)]
    relight_max_delta: Option<f64>,
    #[arg(long)]
    val_cadence: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    patch: PathBuf,
    /// Image directory, or a directory of per-video frame directories for
    /// the video-fixed protocol.
    #[arg(long)]
    data: PathBuf,
    /// image-random | video-fixed | tiled | wallpaper.
    #[arg(long)]
    protocol: Option<String>,
    /// Force the rotation policy instead of following the patch's variant.
    #[arg(long)]
    rotation: Option<bool>,
    #[arg(short, long, default_value = "report.json")]
    output: PathBuf,
    /// Optional per-item gain CSV mirror.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Score through the camsim pipeline from the config (wallpaper only).
    #[arg(long, default_value_t = false)]
    simulate: bool,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    patch: PathBuf,
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long, default_value_t = 0)]
    y: usize,
    /// Rotation in degrees: 0, 90, 180, or 270 (counter-clockwise).
    #[arg(long, default_value_t = 0)]
    rot: u32,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct TileArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    patch: PathBuf,
    /// `full` or `x0,y0,w,h`.
    #[arg(long, default_value = "full")]
    region: String,
    #[arg(long, default_value_t = 0)]
    gap: usize,
    /// Omit partial tiles at the region edge instead of cropping them.
    #[arg(long, default_value_t = false)]
    no_crop_partial: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    image: PathBuf,
    /// Config file holding the camsim.stages pipeline (defaults to --config).
    #[arg(long)]
    pipeline: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 25)]
    probes: usize,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Side length of the random probe image (defaults to the metric's
    /// minimum).
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(short = 'n', long = "count", default_value_t = 8)]
    count: usize,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 256)]
    width: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Evaluation report JSON files.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Comparison CSV path.
    #[arg(short, long, default_value = "comparison.csv")]
    output: PathBuf,
    /// Optional JSON table with raw gains.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<UsageError>().is_some() {
                1
            } else {
                2
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    // Global flags override config.
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
        cfg.eval.seed = seed;
    }
    if let Some(metric) = &cli.metric {
        cfg.metric.id = metric.clone();
    }
    if let Some(weights) = &cli.weights {
        cfg.metric.weights = Some(weights.clone());
    }
    if let Some(threads) = cli.threads {
        cfg.io.threads = Some(threads);
    }
    tipatch_core::configure_threads(cfg.io.threads).map_err(|e| anyhow!(e))?;

    match cli.cmd {
        Cmd::Train(args) => cmd_train(cfg, args),
        Cmd::TrainAll(args) => cmd_train_all(cfg, args),
        Cmd::Eval(args) => cmd_eval(cfg, args),
        Cmd::Apply(args) => cmd_apply(args),
        Cmd::Tile(args) => cmd_tile(args),
        Cmd::Simulate(sim_args) => cmd_simulate(cfg, sim_args),
        Cmd::Gradcheck(args) => cmd_gradcheck(cfg, args),
        Cmd::Synth(args) => cmd_synth(cfg, args),
        Cmd::Report(args) => cmd_report(args),
    }
}

fn build_metric(cfg: &RunConfig) -> Result<Box<dyn Metric>> {
    create_metric(&cfg.metric.id, cfg.metric.weights.as_deref())
        .map_err(|e| usage_err(e.to_string()))
}

fn echo_config(cfg: &RunConfig) {
    eprintln!(
        "effective config (sha256 {}): {}",
        cfg.sha256(),
        serde_json::to_string(&cfg.to_json()).expect("config serializes")
    );
}

fn apply_train_overrides(cfg: &mut RunConfig, args: &TrainArgs) {
    if let Some(v) = &args.variant {
        cfg.train.variant = v.clone();
    }
    if let Some(v) = args.iters {
        cfg.train.iterations = v;
    }
    if let Some(v) = args.batch {
        cfg.train.batch_size = v;
    }
    if let Some(v) = args.step {
        cfg.train.step = v;
    }
    if let Some(v) = args.patch_size {
        cfg.train.patch_size = v;
    }
    if let Some(v) = &args.optimizer {
        cfg.train.optimizer = v.clone();
    }
    if let Some(v) = args.lambda_tv {
        cfg.losses.lambda_tv = v;
    }
    if let Some(v) = args.lambda_nps {
        cfg.losses.lambda_nps = v;
    }
    if let Some(v) = &args.palette {
        cfg.losses.palette_path = Some(v.clone());
    }
    if let Some(v) = args.relight_max_delta {
        cfg.train.relight_max_delta = v;
    }
    if let Some(v) = args.val_cadence {
        cfg.train.validation_cadence = v;
    }
}

fn stamp_meta(patch: Patch, cfg: &RunConfig) -> Patch {
    let mut meta = patch.meta().clone();
    meta.config_sha256 = Some(cfg.sha256());
    meta.tool_version = Some(TOOL_VERSION.to_string());
    patch.with_meta(meta)
}

fn cmd_train(mut cfg: RunConfig, args: TrainArgs) -> Result<()> {
    apply_train_overrides(&mut cfg, &args);
    echo_config(&cfg);
    let vc = VariantConfig::by_name(&cfg.train.variant).map_err(|e| usage_err(e.to_string()))?;
    let tc = cfg.train_config().map_err(|e| usage_err(e.to_string()))?;
    let palette = cfg.palette()?;
    let metric = build_metric(&cfg)?;
    let train_set = data::load_images(&args.data)?;
    let val_set = data::load_images(&args.val)?;
    eprintln!(
        "training {} on {} images (val {}), seed {}",
        vc.name,
        train_set.len(),
        val_set.len(),
        tc.seed.0
    );
    let (patch, log) = train(&train_set, &val_set, metric.as_ref(), &vc, &tc, &palette)?;
    let patch = stamp_meta(patch, &cfg);
    save_patch(&patch, &args.output)?;
    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| args.output.with_extension("csv"));
    std::fs::write(&log_path, log.to_csv())
        .with_context(|| format!("writing {}", log_path.display()))?;
    println!(
        "{}",
        serde_json::json!({
            "patch": args.output,
            "log": log_path,
            "variant": vc.name,
            "best_iter": log.best_iter,
            "best_val_gain": log.best_gain,
            "seed": tc.seed.0,
            "config_sha256": cfg.sha256(),
        })
    );
    Ok(())
}

fn cmd_train_all(mut base_cfg: RunConfig, args: TrainAllArgs) -> Result<()> {
    let overrides = TrainArgs {
        variant: None,
        data: args.data.clone(),
        val: args.val.clone(),
        output: PathBuf::new(),
        log: None,
        iters: args.iters,
        batch: args.batch,
        step: args.step,
        patch_size: args.patch_size,
        optimizer: args.optimizer.clone(),
        lambda_tv: args.lambda_tv,
        lambda_nps: args.lambda_nps,
        palette: args.palette.clone(),
        relight_max_delta: args.relight_max_delta,
        val_cadence: args.val_cadence,
    };
    apply_train_overrides(&mut base_cfg, &overrides);
    echo_config(&base_cfg);
    let tc = base_cfg
        .train_config()
        .map_err(|e| usage_err(e.to_string()))?;
    let palette = base_cfg.palette()?;
    let metric = build_metric(&base_cfg)?;
    let train_set = data::load_images(&args.data)?;
    let val_set = data::load_images(&args.val)?;
    let (test_set, test_name) = match &args.test {
        Some(dir) => (data::load_images(dir)?, dir_label(dir)),
        None => (val_set.clone(), dir_label(&args.val)),
    };
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    eprintln!(
        "training all 8 variants on {} images, seed {}",
        train_set.len(),
        tc.seed.0
    );
    let outcome = train_all_variants(
        &train_set,
        &val_set,
        &test_set,
        metric.as_ref(),
        &tc,
        &palette,
        &test_name,
    )?;
    let mut patch_paths = Vec::new();
    for (vc, patch, log) in &outcome.patches {
        let path = args.out_dir.join(format!("{}.tipf", vc.kebab()));
        save_patch(&stamp_meta(patch.clone(), &base_cfg), &path)?;
        std::fs::write(
            args.out_dir.join(format!("{}.csv", vc.kebab())),
            log.to_csv(),
        )?;
        patch_paths.push(path);
    }
    let csv_path = args.out_dir.join("comparison.csv");
    std::fs::write(&csv_path, outcome.table.to_csv())?;
    let json_path = args.out_dir.join("comparison.json");
    let envelope = serde_json::json!({
        "generated_at": chrono::Utc::now().to_rfc3339(),
        "tool_version": TOOL_VERSION,
        "seed": tc.seed.0,
        "config_sha256": base_cfg.sha256(),
        "effective_config": base_cfg.to_json(),
        "table": outcome.table.to_json(),
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&envelope)?)?;
    println!(
        "{}",
        serde_json::json!({
            "out_dir": args.out_dir,
            "patches": patch_paths,
            "comparison_csv": csv_path,
            "comparison_json": json_path,
            "seed": tc.seed.0,
            "config_sha256": base_cfg.sha256(),
        })
    );
    Ok(())
}

fn dir_label(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn cmd_eval(mut cfg: RunConfig, args: EvalArgs) -> Result<()> {
    if let Some(p) = &args.protocol {
        cfg.eval.protocol = p.clone();
    }
    if let Some(r) = args.rotation {
        cfg.eval.with_rotation = Some(r);
    }
    echo_config(&cfg);
    let mode = ProtocolMode::parse(&cfg.eval.protocol).map_err(|e| usage_err(e.to_string()))?;
    let metric = build_metric(&cfg)?;
    let patch = load_patch(&args.patch)?;
    // Default rotation policy follows how the patch was trained.
    let with_rotation = cfg.eval.with_rotation.unwrap_or_else(|| {
        VariantConfig::by_name(&patch.meta().variant)
            .map(|vc| vc.use_rotation)
            .unwrap_or(true)
    });
    let proto = EvalProtocol {
        mode,
        with_rotation,
        seed: Seed(cfg.eval.seed),
    };
    let report = match mode {
        ProtocolMode::VideoFixed => {
            let videos = data::load_videos(&args.data)?;
            evaluate_videos(metric.as_ref(), &videos, &patch, &proto)?
        }
        ProtocolMode::Wallpaper if args.simulate => {
            wallpaper_report_simulated(&cfg, metric.as_ref(), &patch, &args.data, &proto)?
        }
        _ => {
            let images = data::load_images(&args.data)?;
            evaluate_images(metric.as_ref(), &images, &patch, &proto)?
        }
    };
    let envelope = serde_json::json!({
        "generated_at": chrono::Utc::now().to_rfc3339(),
        "tool_version": TOOL_VERSION,
        "seed": cfg.eval.seed,
        "config_sha256": cfg.sha256(),
        "effective_config": cfg.to_json(),
        "dataset": dir_label(&args.data),
        "report": report,
    });
    std::fs::write(&args.output, serde_json::to_string_pretty(&envelope)?)
        .with_context(|| format!("writing {}", args.output.display()))?;
    if let Some(csv) = &args.csv {
        let mut text = String::from("index,gain\n");
        for (i, g) in report.gains.iter().enumerate() {
            text.push_str(&format!("{i},{g}\n"));
        }
        std::fs::write(csv, text).with_context(|| format!("writing {}", csv.display()))?;
    }
    println!(
        "{}",
        serde_json::json!({
            "report": args.output,
            "n": report.n,
            "mean": report.mean,
            "ci95": report.ci95,
            "protocol": report.protocol.mode.as_str(),
        })
    );
    Ok(())
}

/// Wallpaper protocol with the configured capture pipeline on both sides of
/// each gain.
fn wallpaper_report_simulated(
    cfg: &RunConfig,
    metric: &dyn Metric,
    patch: &Patch,
    data_dir: &Path,
    proto: &EvalProtocol,
) -> Result<EvalReport> {
    let pipe = cfg.pipeline()?;
    let images = data::load_images(data_dir)?;
    let mut gains = Vec::with_capacity(images.len());
    for (i, img) in images.iter().enumerate() {
        let mut rng = RngStream::new(proto.seed, &format!("eval/wallpaper/{i}"));
        gains.push(wallpaper_gain(img, patch, &pipe, metric, &mut rng)?);
    }
    Ok(EvalReport::from_gains(
        gains,
        *proto,
        &metric.descriptor().id,
        patch.meta().clone(),
        Some(1.0),
    )?)
}

fn cmd_apply(args: ApplyArgs) -> Result<()> {
    let rot = Rotation::from_degrees(args.rot).map_err(|e| usage_err(e.to_string()))?;
    let img = load_image(&args.image)?;
    let patch = load_patch(&args.patch)?;
    let out = apply_patch(&img, &patch, &Placement::new(args.x, args.y, rot))?;
    save_image(&out, &args.output)?;
    println!(
        "{}",
        serde_json::json!({
            "output": args.output,
            "x": args.x,
            "y": args.y,
            "rot": args.rot,
            "patch_size": patch.size(),
        })
    );
    Ok(())
}

fn parse_region(s: &str, img: &Image) -> Result<TileSpec> {
    if s == "full" {
        return Ok(TileSpec::full_frame(img.height(), img.width()));
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(usage_err(format!(
            "region must be `full` or `x0,y0,w,h`, got {s:?}"
        )));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage_err(format!("region components must be integers, got {s:?}")))?;
    Ok(TileSpec::new(nums[0], nums[1], nums[2], nums[3]))
}

fn cmd_tile(args: TileArgs) -> Result<()> {
    let img = load_image(&args.image)?;
    let patch = load_patch(&args.patch)?;
    let spec = parse_region(&args.region, &img)?
        .with_gap(args.gap)
        .with_crop_partial(!args.no_crop_partial);
    let out = tile_patch(&img, &patch, &spec)?;
    save_image(&out, &args.output)?;
    let footprint = spec.footprint_pixels(patch.size());
    println!(
        "{}",
        serde_json::json!({
            "output": args.output,
            "footprint_pixels": footprint,
            "footprint_fraction": footprint as f64 / (img.height() * img.width()) as f64,
        })
    );
    Ok(())
}

fn cmd_simulate(mut cfg: RunConfig, args: SimulateArgs) -> Result<()> {
    // A --pipeline file supplies the stage list; seeds and the rest stay
    // with the flag-merged main config.
    if let Some(path) = &args.pipeline {
        cfg.camsim = RunConfig::load(Some(path))?.camsim;
    }
    echo_config(&cfg);
    let pipe = cfg.pipeline()?;
    let img = load_image(&args.image)?;
    let mut rng = RngStream::new(Seed(cfg.eval.seed), "simulate");
    let out = tipatch_core::camsim::simulate(&img, &pipe, &mut rng)?;
    save_image(&out, &args.output)?;
    println!(
        "{}",
        serde_json::json!({
            "output": args.output,
            "stages": pipe.stages.len(),
            "seed": cfg.eval.seed,
        })
    );
    Ok(())
}

fn cmd_gradcheck(cfg: RunConfig, args: GradcheckArgs) -> Result<()> {
    if args.probes == 0 {
        return Err(usage_err("--probes must be at least 1"));
    }
    if args.step <= 0.0 {
        return Err(usage_err("--step must be positive"));
    }
    echo_config(&cfg);
    let metric = build_metric(&cfg)?;
    let side = args.size.unwrap_or(metric.descriptor().min_side);
    let mut img_rng = RngStream::new(Seed(cfg.eval.seed), "gradcheck/image");
    let img = Image::from_fn(side, side, |_, _, _| img_rng.uniform_f64())?;
    let mut probe_rng = RngStream::new(Seed(cfg.eval.seed), "gradcheck/probes");
    let err = grad_check(metric.as_ref(), &img, args.probes, args.step, &mut probe_rng)?;
    let pass = err <= 1e-4;
    println!(
        "{}",
        serde_json::json!({
            "metric": metric.descriptor().id,
            "max_rel_err": err,
            "probes": args.probes,
            "step": args.step,
            "threshold": 1e-4,
            "pass": pass,
        })
    );
    if !pass {
        bail!("max relative error {err:.3e} exceeds 1e-4");
    }
    Ok(())
}

fn cmd_synth(cfg: RunConfig, args: SynthArgs) -> Result<()> {
    if args.count == 0 {
        return Err(usage_err("-n must be at least 1"));
    }
    if args.height < 32 || args.width < 32 {
        return Err(usage_err("synthetic images must be at least 32x32"));
    }
    echo_config(&cfg);
    std::fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    let rng = RngStream::new(Seed(cfg.eval.seed), "synth");
    let images = synth_dataset(args.count, args.height, args.width, &rng);
    for (i, img) in images.iter().enumerate() {
        save_image(img, args.output.join(format!("img_{i:05}.ppm")))?;
    }
    println!(
        "{}",
        serde_json::json!({
            "dir": args.output,
            "count": args.count,
            "height": args.height,
            "width": args.width,
            "seed": cfg.eval.seed,
        })
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut entries = Vec::new();
    for path in &args.reports {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let envelope: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        let report: EvalReport = serde_json::from_value(
            envelope
                .get("report")
                .cloned()
                .ok_or_else(|| anyhow!("{} has no report field", path.display()))?,
        )?;
        let dataset = envelope
            .get("dataset")
            .and_then(|d| d.as_str())
            .unwrap_or("dataset")
            .to_string();
        let variant = if report.patch_meta.variant.is_empty() {
            path.display().to_string()
        } else {
            report.patch_meta.variant.clone()
        };
        entries.push(ReportEntry {
            variant,
            dataset,
            report,
        });
    }
    let table = compare_report(&entries)?;
    std::fs::write(&args.output, table.to_csv())
        .with_context(|| format!("writing {}", args.output.display()))?;
    if let Some(json_path) = &args.json {
        std::fs::write(json_path, serde_json::to_string_pretty(&table.to_json())?)?;
    }
    println!(
        "{}",
        serde_json::json!({
            "csv": args.output,
            "variants": table.variants,
            "datasets": table.datasets,
        })
    );
    Ok(())
}
