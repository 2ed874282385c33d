//! Dataset evaluation: per-image PSNR/SSIM and gradient-variance profiles.

use std::path::{Path, PathBuf};

use gradvar_core::metrics::{log_edges, psnr, ssim, variance_profile, VarianceHistogram, HISTOGRAM_BINS, HISTOGRAM_FLOOR};
use gradvar_core::model::{predict, ModelParams};
use gradvar_core::resample::{make_lr, upscale_bicubic};
use gradvar_core::{Image, ScaleFactor, Scalar};
use log::warn;

use crate::error::Result;
use crate::io::{fmt_scalar, list_pngs, load_png, write_csv, write_text};
use crate::plot::histogram_svg;
use crate::trainer::validation_target;

/// Produces an SR image from `(lr, hr)`; the HR image is offered so that
/// oracles can be plugged in.
pub type Predictor<'a> = dyn Fn(&Image, &Image) -> Result<Image> + 'a;

pub fn model_predictor(params: &ModelParams) -> impl Fn(&Image, &Image) -> Result<Image> + '_ {
    move |lr, _| Ok(predict(params, lr)?)
}

pub fn bicubic_predictor(s: ScaleFactor) -> impl Fn(&Image, &Image) -> Result<Image> {
    move |lr, _| Ok(upscale_bicubic(lr, s)?)
}

#[derive(Debug, Clone)]
pub struct ImageReport {
    pub path: PathBuf,
    pub psnr_db: Scalar,
    pub ssim: Scalar,
    pub sr_profile: VarianceHistogram,
    pub hr_profile: VarianceHistogram,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub border: usize,
    pub patch: usize,
    pub rows: Vec<ImageReport>,
    /// Inputs that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl EvalReport {
    pub fn mean_psnr(&self) -> Scalar {
        mean(self.rows.iter().map(|r| r.psnr_db))
    }
    pub fn mean_ssim(&self) -> Scalar {
        mean(self.rows.iter().map(|r| r.ssim))
    }
    pub fn mean_vx(&self, sr: bool) -> Scalar {
        mean(self.rows.iter().map(|r| if sr { &r.sr_profile } else { &r.hr_profile }.mean_vx()))
    }
    pub fn mean_vy(&self, sr: bool) -> Scalar {
        mean(self.rows.iter().map(|r| if sr { &r.sr_profile } else { &r.hr_profile }.mean_vy()))
    }

    /// SR and HR histograms pooled over all images on one shared axis.
    pub fn pooled_histograms(&self) -> (VarianceHistogram, VarianceHistogram) {
        let pool = |sr: bool| {
            let mut vx = Vec::new();
            let mut vy = Vec::new();
            for r in &self.rows {
                let p = if sr { &r.sr_profile } else { &r.hr_profile };
                vx.extend_from_slice(&p.vx);
                vy.extend_from_slice(&p.vy);
            }
            VarianceHistogram {
                patch: self.patch,
                vx,
                vy,
                edges: Vec::new(),
                counts_x: Vec::new(),
                counts_y: Vec::new(),
            }
        };
        let (sr, hr) = (pool(true), pool(false));
        let hi = sr.max_value().max(hr.max_value());
        let edges = log_edges(HISTOGRAM_FLOOR, hi, HISTOGRAM_BINS);
        (sr.rebin(&edges), hr.rebin(&edges))
    }
}

fn mean(it: impl Iterator<Item = Scalar>) -> Scalar {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        Scalar::NAN
    } else {
        sum / n as Scalar
    }
}

/// Evaluates one HR image: crop to divisibility, degrade, predict, measure.
pub fn evaluate_image(
    hr: &Image,
    s: ScaleFactor,
    n: usize,
    border: usize,
    predictor: &Predictor<'_>,
) -> Result<(Scalar, Scalar, VarianceHistogram, VarianceHistogram)> {
    let hr = validation_target(hr, s.get(), n)?;
    let sr = predictor(&make_lr(&hr, s)?, &hr)?;
    Ok((
        psnr(&sr, &hr, border)?,
        ssim(&sr, &hr)?,
        variance_profile(&sr, n)?,
        variance_profile(&hr, n)?,
    ))
}

/// Evaluates every PNG in `dir` in name order. Unreadable files are skipped
/// with a warning and listed in the report.
pub fn evaluate_dir(
    dir: &Path,
    s: ScaleFactor,
    n: usize,
    border: usize,
    predictor: &Predictor<'_>,
) -> Result<EvalReport> {
    let mut report = EvalReport {
        border,
        patch: n,
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for path in list_pngs(dir)? {
        let hr = match load_png(&path) {
            Ok(img) => img,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                report.skipped.push((path, e.to_string()));
                continue;
            }
        };
        let (psnr_db, ssim, sr_profile, hr_profile) = evaluate_image(&hr, s, n, border, predictor)?;
        report.rows.push(ImageReport {
            path,
            psnr_db,
            ssim,
            sr_profile,
            hr_profile,
        });
    }
    Ok(report)
}

/// `path,psnr_db,ssim` rows plus a final `MEAN` row. Paths are file names
/// within the evaluated directory.
pub fn write_metrics_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let name = r.path.file_name().map_or_else(
                || r.path.display().to_string(),
                |n| n.to_string_lossy().into_owned(),
            );
            vec![name, fmt_scalar(r.psnr_db), fmt_scalar(r.ssim)]
        })
        .chain(std::iter::once(vec![
            "MEAN".to_string(),
            fmt_scalar(report.mean_psnr()),
            fmt_scalar(report.mean_ssim()),
        ]));
    write_csv(path, &["path", "psnr_db", "ssim"], rows)
}

/// `patch_index,vx,vy` rows.
pub fn write_profile_csv(profile: &VarianceHistogram, path: &Path) -> Result<()> {
    let rows = profile
        .vx
        .iter()
        .zip(&profile.vy)
        .enumerate()
        .map(|(i, (x, y))| vec![i.to_string(), fmt_scalar(*x), fmt_scalar(*y)]);
    write_csv(path, &["patch_index", "vx", "vy"], rows)
}

/// `bin_lo,bin_hi,count_x,count_y` rows.
pub fn write_histogram_csv(profile: &VarianceHistogram, path: &Path) -> Result<()> {
    let rows = profile.edges.windows(2).enumerate().map(|(k, e)| {
        vec![
            fmt_scalar(e[0]),
            fmt_scalar(e[1]),
            profile.counts_x[k].to_string(),
            profile.counts_y[k].to_string(),
        ]
    });
    write_csv(path, &["bin_lo", "bin_hi", "count_x", "count_y"], rows)
}

/// Writes `metrics.csv`, per-image `variance/<stem>_{sr,hr}.csv`, pooled
/// `hist_{sr,hr}.csv` and `hist.svg` under `out_dir`.
pub fn write_eval_outputs(report: &EvalReport, out_dir: &Path) -> Result<()> {
    write_metrics_csv(report, &out_dir.join("metrics.csv"))?;
    for r in &report.rows {
        let stem = r.path.file_stem().unwrap_or_default().to_string_lossy();
        write_profile_csv(&r.sr_profile, &out_dir.join("variance").join(format!("{stem}_sr.csv")))?;
        write_profile_csv(&r.hr_profile, &out_dir.join("variance").join(format!("{stem}_hr.csv")))?;
    }
    let (sr, hr) = report.pooled_histograms();
    write_histogram_csv(&sr, &out_dir.join("hist_sr.csv"))?;
    write_histogram_csv(&hr, &out_dir.join("hist_hr.csv"))?;
    let title = format!("{}×{} gradient-map patch variances", report.patch, report.patch);
    write_text(&out_dir.join("hist.svg"), &histogram_svg(&title, &[("HR", &hr), ("SR", &sr)]))
}
