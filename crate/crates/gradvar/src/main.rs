use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gradvar::ablation::{preset, run_ablation, write_table, PRESETS};
use gradvar::config::{default_patch, write_manifest, TrainConfig};
use gradvar::core::image::{crop_to_multiple, to_grayscale};
use gradvar::core::loss::{base_loss, gradient_variance, gv_loss, tv_loss, BaseLoss};
use gradvar::core::metrics::{log_edges, variance_profile, HISTOGRAM_BINS, HISTOGRAM_FLOOR};
use gradvar::core::model::predict;
use gradvar::core::resample::{make_lr, upscale_bicubic};
use gradvar::core::synthetic::{ShapeKind, SyntheticSetSpec};
use gradvar::core::{composite_loss, sobel_forward, CompositeLossSpec, Image, ScaleFactor, Scalar};
use gradvar::dataset::{make_synthetic_dataset, Dataset};
use gradvar::evaluate::{bicubic_predictor, evaluate_dir, model_predictor, write_eval_outputs, write_histogram_csv, write_profile_csv};
use gradvar::io::{fmt_scalar, gradient_to_display, load_png, save_png, upsample_nearest, write_csv, write_text};
use gradvar::plot::histogram_svg;
use gradvar::trainer::run_training;
use gradvar::{checkpoint, Error, Result};
use log::{info, warn};

/// Gradient-variance loss toolkit: losses, maps, training and evaluation.
#[derive(Parser)]
#[command(name = "gradvar", version)]
struct Cli {
    /// Seed for every random choice (dataset generation, init, shuffles, crops).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic hard-edged HR dataset as PNGs plus a manifest.
    MakeDataset(MakeDataset),
    /// Train the SR network.
    Train(Train),
    /// Evaluate a checkpoint (or the bicubic baseline) on a directory of HR PNGs.
    Eval(Eval),
    /// Train one model per loss in a grid and tabulate PSNR, SSIM and variances.
    Ablate(Ablate),
    /// Print a loss between two images.
    Loss(LossCmd),
    /// Export Sobel gradient maps and patch-variance maps of an image.
    Gvmap(Gvmap),
    /// Compare patch-variance distributions of an HR image and an SR result.
    AnalyzeVariance(AnalyzeVariance),
}

#[derive(Args)]
struct MakeDataset {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Number of images.
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 96)]
    size: usize,
    /// Minimum luma contrast between a shape and the background.
    #[arg(long, default_value_t = 0.25)]
    min_contrast: Scalar,
    /// Comma-separated shape vocabulary (rectangle, circle, line, stroke).
    #[arg(long, value_delimiter = ',')]
    shapes: Option<Vec<String>>,
}

/// Settings shared by `train` and `ablate`; flags override the config file.
#[derive(Args)]
struct TrainArgs {
    /// Plain-text `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Upscaling ratio.
    #[arg(long)]
    scale: Option<usize>,
    /// GV patch size (default 8 for scale 2, otherwise 16).
    #[arg(long)]
    n: Option<usize>,
    /// Regularizer weight.
    #[arg(long)]
    lambda: Option<Scalar>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// HR training crop size.
    #[arg(long)]
    crop: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    lr: Option<Scalar>,
    /// Directory of training HR PNGs (requires --val-dir); synthetic data otherwise.
    #[arg(long, requires = "val_dir")]
    train_dir: Option<PathBuf>,
    /// Directory of validation HR PNGs.
    #[arg(long, requires = "train_dir")]
    val_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Train {
    #[command(flatten)]
    common: TrainArgs,
    /// Loss label, e.g. l2, l2+gv, ssim+tv.
    #[arg(long)]
    loss: Option<String>,
}

#[derive(Args)]
struct Ablate {
    #[command(flatten)]
    common: TrainArgs,
    /// Named grid: table2-desk or gv-desk.
    #[arg(long, conflicts_with = "grid")]
    preset: Option<String>,
    /// Comma-separated loss labels.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<String>>,
}

#[derive(Args)]
struct Eval {
    /// Directory of HR PNGs.
    #[arg(long)]
    data: PathBuf,
    /// Model checkpoint.
    #[arg(long, required_unless_present = "bicubic")]
    checkpoint: Option<PathBuf>,
    /// Evaluate plain bicubic upscaling instead of a model.
    #[arg(long, conflicts_with = "checkpoint", requires = "scale")]
    bicubic: bool,
    /// Upscaling ratio (taken from the checkpoint when omitted).
    #[arg(long)]
    scale: Option<usize>,
    /// Patch size for variance profiles.
    #[arg(long)]
    n: Option<usize>,
    /// Pixels excluded from PSNR on each side (default: the scale).
    #[arg(long)]
    border: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LossCmd {
    /// SR / candidate image.
    img_a: PathBuf,
    /// Reference image (ignored by tv).
    img_b: PathBuf,
    /// l1, l2, tv, ssim, gv, or a combination such as l2+gv.
    #[arg(long, default_value = "gv")]
    loss: String,
    /// GV patch size.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Regularizer weight for combined losses.
    #[arg(long, default_value_t = 1.0)]
    lambda: Scalar,
    /// Write the gradient w.r.t. img_a as a PNG (mid-gray is zero).
    #[arg(long)]
    grad_out: Option<PathBuf>,
}

#[derive(Args)]
struct Gvmap {
    img: PathBuf,
    /// Patch size.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Output prefix; writes <prefix>_{gx,gy,vx,vy}.png and <prefix>_variance.csv.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct AnalyzeVariance {
    /// HR reference image.
    #[arg(long)]
    hr: PathBuf,
    /// SR image to compare; without it the HR image is degraded and
    /// reconstructed by --checkpoint or by bicubic upscaling.
    #[arg(long)]
    sr: Option<PathBuf>,
    #[arg(long, conflicts_with = "sr")]
    checkpoint: Option<PathBuf>,
    /// Upscaling ratio used when reconstructing.
    #[arg(long, default_value_t = 2)]
    scale: usize,
    /// Patch size.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::MakeDataset(a) => cmd_make_dataset(a, seed),
        Command::Train(a) => cmd_train(a, seed),
        Command::Eval(a) => cmd_eval(a),
        Command::Ablate(a) => cmd_ablate(a, seed),
        Command::Loss(a) => cmd_loss(a),
        Command::Gvmap(a) => cmd_gvmap(a),
        Command::AnalyzeVariance(a) => cmd_analyze_variance(a),
    }
}

fn scale(s: usize) -> Result<ScaleFactor> {
    ScaleFactor::new(s).map_err(|e| Error::Config(e.to_string()))
}

fn cmd_make_dataset(a: MakeDataset, seed: Option<u64>) -> Result<()> {
    let mut spec = SyntheticSetSpec {
        count: a.count,
        height: a.size,
        width: a.size,
        min_contrast: a.min_contrast,
        seed: seed.unwrap_or(0),
        ..SyntheticSetSpec::default()
    };
    if let Some(names) = a.shapes {
        spec.shapes = names
            .iter()
            .map(|n| ShapeKind::from_name(n).ok_or_else(|| Error::Config(format!("unknown shape `{n}`"))))
            .collect::<Result<_>>()?;
    }
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let m = make_synthetic_dataset(&spec, &a.out)?;
    info!("wrote {} images and {}", m.files.len(), m.manifest.display());
    Ok(())
}

fn resolve_config(a: &TrainArgs, seed: Option<u64>) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(p) => TrainConfig::from_file(p)?,
        None => TrainConfig::default(),
    };
    for kv in &a.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    let overrides = [
        ("seed", seed.map(|v| v.to_string())),
        ("scale", a.scale.map(|v| v.to_string())),
        ("gv_patch", a.n.map(|v| v.to_string())),
        ("lambda", a.lambda.map(|v| v.to_string())),
        ("epochs", a.epochs.map(|v| v.to_string())),
        ("batch_size", a.batch_size.map(|v| v.to_string())),
        ("crop", a.crop.map(|v| v.to_string())),
        ("learning_rate", a.lr.map(|v| v.to_string())),
        ("train_dir", a.train_dir.as_ref().map(|p| p.display().to_string())),
        ("val_dir", a.val_dir.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    Ok(cfg)
}

fn cmd_train(a: Train, seed: Option<u64>) -> Result<()> {
    let mut cfg = resolve_config(&a.common, seed)?;
    if let Some(l) = &a.loss {
        cfg.set("loss", l)?;
    }
    cfg.validate()?;
    let data = Dataset::load(&cfg)?;
    info!(
        "training {} on {} images ({} validation), s={}, n={}",
        cfg.loss.label(),
        data.train.len(),
        data.val.len(),
        cfg.scale.get(),
        cfg.patch()
    );
    let (outcome, files) = run_training(&cfg, &data, &a.common.out)?;
    if let Some(last) = outcome.reports.last() {
        info!(
            "final: psnr {:.3} dB, ssim {:.5}",
            last.val.psnr_db, last.val.ssim
        );
    }
    info!("checkpoint: {}", files.checkpoint.display());
    Ok(())
}

fn cmd_ablate(a: Ablate, seed: Option<u64>) -> Result<()> {
    let cfg = resolve_config(&a.common, seed)?;
    let grid = match (&a.preset, &a.grid) {
        (Some(name), _) => preset(name).ok_or_else(|| {
            Error::Config(format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))
        })?,
        (None, Some(labels)) => labels
            .iter()
            .map(|l| l.parse::<CompositeLossSpec>().map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<_>>()?,
        (None, None) => preset("table2-desk").expect("built-in preset"),
    };
    cfg.validate()?;
    let data = Dataset::load(&cfg)?;
    let table = run_ablation(&cfg, &grid, &data, Some(&a.common.out))?;
    write_table(&table.rows, &a.common.out.join("ablation.csv"))?;
    for r in &table.rows {
        println!(
            "{:<8} psnr {:>8.3} dB  ssim {:.6}  vx {:.4}  vy {:.4}",
            r.spec.label(),
            r.val.psnr_db,
            r.val.ssim,
            r.val.mean_vx,
            r.val.mean_vy
        );
    }
    println!(
        "{:<8} {:>36}  vx {:.4}  vy {:.4}",
        "HR", "", table.hr_mean_vx, table.hr_mean_vy
    );
    Ok(())
}

fn cmd_eval(a: Eval) -> Result<()> {
    let params = a.checkpoint.as_deref().map(checkpoint::load).transpose()?;
    let s = match (&params, a.scale) {
        (Some(p), Some(s)) if p.scale().get() != s => {
            return Err(Error::Config(format!(
                "--scale {s} disagrees with the checkpoint's scale {}",
                p.scale().get()
            )))
        }
        (Some(p), _) => p.scale(),
        (None, Some(s)) => scale(s)?,
        (None, None) => return Err(Error::Config("--scale is required with --bicubic".into())),
    };
    let n = a.n.unwrap_or_else(|| default_patch(s));
    let border = a.border.unwrap_or(s.get());
    let report = match &params {
        Some(p) => evaluate_dir(&a.data, s, n, border, &model_predictor(p))?,
        None => evaluate_dir(&a.data, s, n, border, &bicubic_predictor(s))?,
    };
    write_eval_outputs(&report, &a.out)?;
    let mut entries = vec![
        ("data".to_string(), a.data.display().to_string()),
        (
            "model".to_string(),
            a.checkpoint
                .as_ref()
                .map_or("bicubic".to_string(), |p| p.display().to_string()),
        ),
        ("scale".to_string(), s.get().to_string()),
        ("gv_patch".to_string(), n.to_string()),
        ("border".to_string(), border.to_string()),
        ("psnr_space".to_string(), "luma".to_string()),
    ];
    for (p, why) in &report.skipped {
        entries.push(("skipped".to_string(), format!("{} ({why})", p.display())));
    }
    write_manifest(&a.out, &entries)?;
    println!(
        "{} images: psnr {:.3} dB, ssim {:.6}{}",
        report.rows.len(),
        report.mean_psnr(),
        report.mean_ssim(),
        if report.skipped.is_empty() {
            String::new()
        } else {
            format!(" ({} skipped)", report.skipped.len())
        }
    );
    Ok(())
}

fn cmd_loss(a: LossCmd) -> Result<()> {
    let img_a = load_png(&a.img_a)?;
    let img_b = load_png(&a.img_b)?;
    let label = a.loss.to_ascii_lowercase();
    let result = match label.as_str() {
        "tv" => {
            warn!("tv is unary; {} is ignored", a.img_b.display());
            tv_loss(&img_a)?
        }
        "gv" => {
            // Sizes that are not multiples of n are center-cropped, as in training.
            img_a.check_same_shape(&img_b)?;
            gv_loss(&crop_to_multiple(&img_a, a.n)?, &crop_to_multiple(&img_b, a.n)?, a.n)?
        }
        other => match other.parse::<BaseLoss>() {
            Ok(base) => base_loss(base, &img_a, &img_b)?,
            Err(_) => {
                let spec = other
                    .parse::<CompositeLossSpec>()
                    .map_err(|e| Error::Config(e.to_string()))?
                    .with_weight(a.lambda)
                    .with_patch(a.n);
                composite_loss(&spec, &img_a, &img_b)?
            }
        },
    };
    println!("{:.9}", result.value);
    if let Some(path) = &a.grad_out {
        let peak = result.grad_sr.data().iter().fold(0.0 as Scalar, |m, v| m.max(v.abs()));
        let vis = if peak > 0.0 {
            result.grad_sr.map(|v| 0.5 + 0.5 * v / peak)
        } else {
            result.grad_sr.map(|_| 0.5)
        };
        save_png(&vis, path)?;
    }
    Ok(())
}

fn prefixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn variance_image(values: &[Scalar], rows: usize, cols: usize, n: usize) -> Result<Image> {
    let peak = values.iter().fold(0.0 as Scalar, |m, &v| m.max(v));
    let grid = Image::new(
        1,
        rows,
        cols,
        values.iter().map(|&v| if peak > 0.0 { v / peak } else { 0.0 }).collect(),
    )?;
    Ok(upsample_nearest(&grid, n))
}

fn cmd_gvmap(a: Gvmap) -> Result<()> {
    let img = crop_to_multiple(&load_png(&a.img)?, a.n)?;
    let grads = sobel_forward(&to_grayscale(&img)?)?;
    let gv = gradient_variance(&img, a.n)?;
    save_png(&gradient_to_display(&grads.gx), &prefixed(&a.out_prefix, "_gx.png"))?;
    save_png(&gradient_to_display(&grads.gy), &prefixed(&a.out_prefix, "_gy.png"))?;
    let (r, c) = (gv.vx.rows, gv.vx.cols);
    save_png(&variance_image(&gv.vx.values, r, c, a.n)?, &prefixed(&a.out_prefix, "_vx.png"))?;
    save_png(&variance_image(&gv.vy.values, r, c, a.n)?, &prefixed(&a.out_prefix, "_vy.png"))?;
    let rows = gv
        .vx
        .values
        .iter()
        .zip(&gv.vy.values)
        .enumerate()
        .map(|(i, (x, y))| vec![i.to_string(), fmt_scalar(*x), fmt_scalar(*y)]);
    write_csv(&prefixed(&a.out_prefix, "_variance.csv"), &["patch_index", "vx", "vy"], rows)
}

fn cmd_analyze_variance(a: AnalyzeVariance) -> Result<()> {
    let hr = load_png(&a.hr)?;
    let (hr, sr) = match &a.sr {
        Some(p) => {
            let sr = load_png(p)?;
            hr.check_same_shape(&sr)?;
            (crop_to_multiple(&hr, a.n)?, crop_to_multiple(&sr, a.n)?)
        }
        None => {
            let params = a.checkpoint.as_deref().map(checkpoint::load).transpose()?;
            let s = params.as_ref().map_or(scale(a.scale), |p| Ok(p.scale()))?;
            let hr = gradvar::trainer::validation_target(&hr, s.get(), a.n)?;
            let lr = make_lr(&hr, s)?;
            let sr = match &params {
                Some(p) => predict(p, &lr)?,
                None => upscale_bicubic(&lr, s)?,
            };
            (hr, sr)
        }
    };
    let hp = variance_profile(&hr, a.n)?;
    let sp = variance_profile(&sr, a.n)?;
    let edges = log_edges(HISTOGRAM_FLOOR, hp.max_value().max(sp.max_value()), HISTOGRAM_BINS);
    let (hp, sp) = (hp.rebin(&edges), sp.rebin(&edges));
    write_profile_csv(&hp, &a.out.join("hr_patches.csv"))?;
    write_profile_csv(&sp, &a.out.join("sr_patches.csv"))?;
    write_histogram_csv(&hp, &a.out.join("hist_hr.csv"))?;
    write_histogram_csv(&sp, &a.out.join("hist_sr.csv"))?;
    let title = format!("{}×{} gradient-map patch variances", a.n, a.n);
    write_text(&a.out.join("hist.svg"), &histogram_svg(&title, &[("HR", &hp), ("SR", &sp)]))?;
    println!(
        "mean vx: HR {:.6} SR {:.6}; mean vy: HR {:.6} SR {:.6}",
        hp.mean_vx(),
        sp.mean_vx(),
        hp.mean_vy(),
        sp.mean_vy()
    );
    Ok(())
}
