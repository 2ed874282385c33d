//! Loss-grid comparison: one model per loss from the same seed and data.

use std::path::Path;

use gradvar_core::metrics::variance_profile;
use gradvar_core::{CompositeLossSpec, Scalar};
use log::info;

use crate::checkpoint;
use crate::config::{write_manifest, TrainConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::{fmt_scalar, write_csv};
use crate::trainer::{train, validation_target, Validation};

/// Named loss grids.
pub fn preset(name: &str) -> Option<Vec<CompositeLossSpec>> {
    let labels: &[&str] = match name {
        "table2-desk" => &[
            "l2", "l2+tv", "l2+gv", "l1", "l1+tv", "l1+gv", "ssim", "ssim+tv", "ssim+gv",
        ],
        "gv-desk" => &["l2", "l2+tv", "l2+gv"],
        _ => return None,
    };
    Some(labels.iter().map(|l| l.parse().expect("preset labels parse")).collect())
}

pub const PRESETS: &[&str] = &["table2-desk", "gv-desk"];

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub spec: CompositeLossSpec,
    pub val: Validation,
    pub init_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
    /// Mean patch variances of the HR validation targets.
    pub hr_mean_vx: Scalar,
    pub hr_mean_vy: Scalar,
}

impl AblationTable {
    pub fn row(&self, label: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.spec.label().eq_ignore_ascii_case(label))
    }
}

/// `loss,psnr_db,ssim,mean_vx,mean_vy`.
pub fn write_table(rows: &[AblationRow], path: &Path) -> Result<()> {
    let body = rows.iter().map(|r| {
        vec![
            r.spec.label(),
            fmt_scalar(r.val.psnr_db),
            fmt_scalar(r.val.ssim),
            fmt_scalar(r.val.mean_vx),
            fmt_scalar(r.val.mean_vy),
        ]
    });
    write_csv(path, &["loss", "psnr_db", "ssim", "mean_vx", "mean_vy"], body)
}

fn hr_means(cfg: &TrainConfig, data: &Dataset) -> Result<(Scalar, Scalar)> {
    let (s, n) = (cfg.scale.get(), cfg.patch());
    let (mut vx, mut vy) = (0.0, 0.0);
    for hr in &data.val {
        let p = variance_profile(&validation_target(hr, s, n)?, n)?;
        vx += p.mean_vx();
        vy += p.mean_vy();
    }
    let k = data.val.len().max(1) as Scalar;
    Ok((vx / k, vy / k))
}

/// Trains one model per grid entry, keeping every other setting of `base`
/// (the regularizer weight included). With `out_dir`, writes `ablation.csv`
/// after every row (so a failure leaves a partial table), per-row
/// checkpoints and a manifest.
pub fn run_ablation(
    base: &TrainConfig,
    grid: &[CompositeLossSpec],
    data: &Dataset,
    out_dir: Option<&Path>,
) -> Result<AblationTable> {
    if grid.is_empty() {
        return Err(Error::Config("ablation grid is empty".into()));
    }
    let (hr_mean_vx, hr_mean_vy) = hr_means(base, data)?;
    let mut rows: Vec<AblationRow> = Vec::with_capacity(grid.len());
    for spec in grid {
        let mut cfg = base.clone();
        cfg.loss = CompositeLossSpec {
            base: spec.base,
            regularizer: spec.regularizer,
            ..base.loss
        };
        let label = cfg.loss.label();
        info!("ablation: training {label}");
        let outcome = match train(&cfg, data, |r| {
            info!("  {label} epoch {:>3}: loss {:.6} ssim {:.5}", r.epoch, r.train_loss, r.val.ssim)
        }) {
            Ok(o) => o,
            Err(aborted) => {
                if let Some(dir) = out_dir {
                    write_table(&rows, &dir.join("ablation.csv"))?;
                }
                return Err(aborted.error);
            }
        };
        if let Some(first) = rows.first() {
            if first.init_sha256 != outcome.init_sha256 {
                return Err(Error::Numeric(format!(
                    "row {label} started from different weights than row {}",
                    first.spec.label()
                )));
            }
        }
        let val = outcome.reports.last().map_or(outcome.initial, |r| r.val);
        rows.push(AblationRow {
            spec: cfg.loss_spec(),
            val,
            init_sha256: outcome.init_sha256.clone(),
        });
        if let Some(dir) = out_dir {
            let file = label.to_ascii_lowercase().replace('+', "_");
            checkpoint::save(&outcome.params, &dir.join("checkpoints").join(format!("{file}.bin")))?;
            write_table(&rows, &dir.join("ablation.csv"))?;
        }
    }
    if let Some(dir) = out_dir {
        let mut entries = base.entries();
        entries.retain(|(k, _)| k != "loss");
        entries.push(("grid".into(), grid.iter().map(|s| s.label()).collect::<Vec<_>>().join(",")));
        entries.push(("init_sha256".into(), rows[0].init_sha256.clone()));
        entries.push(("hr_mean_vx".into(), fmt_scalar(hr_mean_vx)));
        entries.push(("hr_mean_vy".into(), fmt_scalar(hr_mean_vy)));
        write_manifest(dir, &entries)?;
    }
    Ok(AblationTable {
        rows,
        hr_mean_vx,
        hr_mean_vy,
    })
}
