//! Seeded training loop and validation.

use std::path::{Path, PathBuf};

use gradvar_core::image::crop_to_multiple;
use gradvar_core::metrics::{psnr, ssim, variance_profile};
use gradvar_core::model::{
    adam_step, loss_and_gradients, predict, AdamConfig, Architecture, Gradients, ModelParams,
};
use gradvar_core::resample::make_lr;
use gradvar_core::{Image, Scalar};
use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::checkpoint;
use crate::config::{write_manifest, TrainConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::{fmt_scalar, write_csv};

/// Validation summary after one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    /// 1-based; 0 denotes the untrained model.
    pub epoch: usize,
    /// Mean training loss over the epoch's steps (NaN for epoch 0).
    pub train_loss: Scalar,
    pub val: Validation,
}

/// Means over the validation set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    pub mse: Scalar,
    pub psnr_db: Scalar,
    pub ssim: Scalar,
    /// Mean gradient-map patch variance of the SR outputs.
    pub mean_vx: Scalar,
    pub mean_vy: Scalar,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub initial: Validation,
    pub reports: Vec<EpochReport>,
    /// SHA-256 of the initial checkpoint.
    pub init_sha256: String,
}

/// Hex SHA-256 of a parameter set's checkpoint encoding.
pub fn params_sha256(params: &ModelParams) -> String {
    Sha256::digest(checkpoint::encode(params))
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn architecture(cfg: &TrainConfig, channels: usize) -> Architecture {
    Architecture::espcn_with_width(channels, cfg.width, cfg.scale)
}

/// HR validation target: the center crop divisible by both `s` and `n`.
pub fn validation_target(hr: &Image, s: usize, n: usize) -> Result<Image> {
    let m = s * n / gcd(s, n);
    Ok(crop_to_multiple(hr, m)?)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Validation means of `params` on `images`.
pub fn validate(params: &ModelParams, images: &[Image], cfg: &TrainConfig) -> Result<Validation> {
    let (s, n) = (cfg.scale.get(), cfg.patch());
    let mut acc = [0.0 as Scalar; 5];
    for hr in images {
        let hr = validation_target(hr, s, n)?;
        let sr = predict(params, &make_lr(&hr, cfg.scale)?)?;
        let mse = sr
            .data()
            .iter()
            .zip(hr.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<Scalar>()
            / sr.data().len() as Scalar;
        let profile = variance_profile(&sr, n)?;
        let vals = [
            mse,
            psnr(&sr, &hr, cfg.border())?,
            ssim(&sr, &hr)?,
            profile.mean_vx(),
            profile.mean_vy(),
        ];
        for (a, v) in acc.iter_mut().zip(vals) {
            *a += v;
        }
    }
    let k = images.len().max(1) as Scalar;
    Ok(Validation {
        mse: acc[0] / k,
        psnr_db: acc[1] / k,
        ssim: acc[2] / k,
        mean_vx: acc[3] / k,
        mean_vy: acc[4] / k,
    })
}

/// Training data failed mid-run; `last_good` holds the parameters before
/// the failing step.
#[derive(Debug)]
pub struct Aborted {
    pub error: Error,
    pub last_good: ModelParams,
    pub reports: Vec<EpochReport>,
}

/// Trains from the seeded initialisation. `on_epoch` sees each report as it
/// is produced.
pub fn train(
    cfg: &TrainConfig,
    data: &Dataset,
    mut on_epoch: impl FnMut(&EpochReport),
) -> std::result::Result<TrainOutcome, Box<Aborted>> {
    let fail = |error: Error, params: &ModelParams, reports: &[EpochReport]| {
        Box::new(Aborted {
            error,
            last_good: params.clone(),
            reports: reports.to_vec(),
        })
    };
    let channels = data.train.first().or(data.val.first()).map_or(3, Image::channels);
    let mut params = ModelParams::init(architecture(cfg, channels), cfg.seed);
    let mut reports = Vec::with_capacity(cfg.epochs);
    if let Err(e) = check_inputs(cfg, data) {
        return Err(fail(e, &params, &reports));
    }
    let init_sha256 = params_sha256(&params);
    let initial = validate(&params, &data.val, cfg).map_err(|e| fail(e, &params, &reports))?;
    let loss = cfg.loss_spec();
    let adam = AdamConfig::with_learning_rate(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..data.train.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut steps = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeros(params.values.len());
            let mut batch_loss = 0.0;
            for &i in batch {
                let (value, g) = random_crop(&data.train[i], cfg.crop, &mut rng)
                    .and_then(|hr| {
                        let lr = make_lr(&hr, cfg.scale)?;
                        Ok(loss_and_gradients(&params, &lr, &hr, &loss)?)
                    })
                    .map_err(|e| fail(e, &params, &reports))?;
                batch_loss += value;
                grads.add_assign(&g);
            }
            grads.scale(1.0 / batch.len() as Scalar);
            adam_step(&mut params, &grads, &adam).map_err(|e| fail(e.into(), &params, &reports))?;
            loss_sum += batch_loss / batch.len() as Scalar;
            steps += 1;
        }
        let val = validate(&params, &data.val, cfg).map_err(|e| fail(e, &params, &reports))?;
        let report = EpochReport {
            epoch,
            train_loss: loss_sum / steps.max(1) as Scalar,
            val,
        };
        if !report.train_loss.is_finite() {
            let e = Error::Numeric(format!("epoch {epoch}: training loss {}", report.train_loss));
            return Err(fail(e, &params, &reports));
        }
        on_epoch(&report);
        reports.push(report);
    }
    Ok(TrainOutcome {
        params,
        initial,
        reports,
        init_sha256,
    })
}

fn check_inputs(cfg: &TrainConfig, data: &Dataset) -> Result<()> {
    cfg.validate()?;
    if data.train.is_empty() || data.val.is_empty() {
        return Err(Error::Config("training and validation sets must be nonempty".into()));
    }
    let channels = data.train[0].channels();
    for img in data.train.iter().chain(&data.val) {
        if img.channels() != channels {
            return Err(Error::Config("images mix grayscale and RGB".into()));
        }
    }
    if let Some(img) = data.train.iter().find(|i| i.height() < cfg.crop || i.width() < cfg.crop) {
        return Err(Error::Config(format!(
            "training image {}×{} is smaller than the crop {}",
            img.height(),
            img.width(),
            cfg.crop
        )));
    }
    Ok(())
}

fn random_crop(img: &Image, size: usize, rng: &mut ChaCha8Rng) -> Result<Image> {
    let top = rng.random_range(0..=(img.height() - size) as u32) as usize;
    let left = rng.random_range(0..=(img.width() - size) as u32) as usize;
    Ok(img.crop(top, left, size, size)?)
}

/// Paths written by [`run_training`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub checkpoint: PathBuf,
    pub reports: PathBuf,
    pub manifest: PathBuf,
}

pub fn write_reports(path: &Path, initial: &Validation, reports: &[EpochReport]) -> Result<()> {
    let row = |epoch: usize, loss: Scalar, v: &Validation| {
        vec![
            epoch.to_string(),
            fmt_scalar(loss),
            fmt_scalar(v.psnr_db),
            fmt_scalar(v.ssim),
            fmt_scalar(v.mean_vx),
            fmt_scalar(v.mean_vy),
        ]
    };
    let rows = std::iter::once(row(0, Scalar::NAN, initial))
        .chain(reports.iter().map(|r| row(r.epoch, r.train_loss, &r.val)));
    write_csv(
        path,
        &["epoch", "train_loss", "val_psnr_db", "val_ssim", "mean_vx", "mean_vy"],
        rows,
    )
}

/// Trains and writes `checkpoint.bin`, `epochs.csv` and `manifest.txt` to
/// `out_dir`. On a numeric abort the last good parameters are saved as
/// `checkpoint_last_good.bin` before the error is returned.
pub fn run_training(cfg: &TrainConfig, data: &Dataset, out_dir: &Path) -> Result<(TrainOutcome, RunArtifacts)> {
    let outcome = match train(cfg, data, |r| {
        info!(
            "epoch {:>3}: loss {:.6}  psnr {:.3} dB  ssim {:.5}  vx {:.4}  vy {:.4}",
            r.epoch, r.train_loss, r.val.psnr_db, r.val.ssim, r.val.mean_vx, r.val.mean_vy
        )
    }) {
        Ok(o) => o,
        Err(aborted) => {
            if matches!(aborted.error.exit_code(), 3) {
                let path = out_dir.join("checkpoint_last_good.bin");
                checkpoint::save(&aborted.last_good, &path)?;
                log::error!("aborted; last good parameters saved to {}", path.display());
            }
            return Err(aborted.error);
        }
    };
    let checkpoint_path = out_dir.join("checkpoint.bin");
    checkpoint::save(&outcome.params, &checkpoint_path)?;
    let reports = out_dir.join("epochs.csv");
    write_reports(&reports, &outcome.initial, &outcome.reports)?;
    let mut entries = cfg.entries();
    entries.push(("init_sha256".into(), outcome.init_sha256.clone()));
    entries.push(("final_sha256".into(), params_sha256(&outcome.params)));
    let manifest = write_manifest(out_dir, &entries)?;
    Ok((
        outcome,
        RunArtifacts {
            checkpoint: checkpoint_path,
            reports,
            manifest,
        },
    ))
}
