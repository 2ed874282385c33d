//! Training configuration, its plain-text `key = value` form, and run
//! manifests.
//!
//! A config file holds one `key = value` pair per line; `#` starts a
//! comment. Recognised keys:
//!
//! | key               | meaning                                              | default |
//! |-------------------|------------------------------------------------------|---------|
//! | `seed`            | seed for init, data generation, shuffles and crops   | 0       |
//! | `scale`           | upscaling ratio `s`                                  | 2       |
//! | `loss`            | loss label such as `l2`, `l2+gv`, `ssim+tv`          | `l2+gv` |
//! | `lambda`          | regularizer weight                                   | 1.0     |
//! | `gv_patch`        | GV patch size `n`; defaults to 8 for s=2, else 16    | auto    |
//! | `gv_reduction`    | `mean` or `euclidean`                                | `mean`  |
//! | `epochs`          | training epochs                                      | 30      |
//! | `batch_size`      | images per Adam step                                 | 8       |
//! | `crop`            | HR training crop size                                | 64      |
//! | `learning_rate`   | Adam step size                                       | 0.001   |
//! | `width`           | hidden feature channels                              | 32      |
//! | `border`          | pixels excluded from PSNR; defaults to `s`           | auto    |
//! | `train_dir`       | directory of HR PNGs (with `val_dir`)                | unset   |
//! | `val_dir`         | directory of validation HR PNGs                      | unset   |
//! | `synthetic_count` | synthetic images when no directories are given       | 200     |
//! | `synthetic_size`  | synthetic image side length                          | 96      |
//! | `val_count`       | synthetic images held out for validation             | 40      |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gradvar_core::synthetic::SyntheticSetSpec;
use gradvar_core::{CompositeLossSpec, GvReduction, ScaleFactor, Scalar};

use crate::error::{Error, Result};
use crate::io::write_text;

/// Where training and validation images come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Generated in memory; the last `val_count` images are held out.
    Synthetic { spec: SyntheticSetSpec, val_count: usize },
    Dirs { train: PathBuf, val: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub scale: ScaleFactor,
    /// Loss terms and weight; its patch size is overridden by [`Self::patch`].
    pub loss: CompositeLossSpec,
    pub gv_patch: Option<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub crop: usize,
    pub learning_rate: Scalar,
    pub width: usize,
    pub border: Option<usize>,
    pub data: DataSource,
}

/// GV patch size paired with an upscaling ratio: 8 for ×2, 16 otherwise.
pub fn default_patch(scale: ScaleFactor) -> usize {
    if scale.get() == 2 {
        8
    } else {
        16
    }
}

impl Default for TrainConfig {
    /// The desk-scale preset.
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            scale: ScaleFactor::new(2).expect("2 is a valid scale"),
            loss: "l2+gv".parse().expect("valid label"),
            gv_patch: None,
            epochs: 30,
            batch_size: 8,
            crop: 64,
            learning_rate: 1e-3,
            width: 32,
            border: None,
            data: DataSource::Synthetic {
                spec: SyntheticSetSpec::default(),
                val_count: 40,
            },
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl TrainConfig {
    pub fn patch(&self) -> usize {
        self.gv_patch.unwrap_or_else(|| default_patch(self.scale))
    }

    pub fn border(&self) -> usize {
        self.border.unwrap_or(self.scale.get())
    }

    /// The loss with the resolved patch size.
    pub fn loss_spec(&self) -> CompositeLossSpec {
        self.loss.with_patch(self.patch())
    }

    /// Synthetic spec with the run seed applied, if the data is synthetic.
    pub fn synthetic_spec(&self) -> Option<SyntheticSetSpec> {
        match &self.data {
            DataSource::Synthetic { spec, .. } => Some(SyntheticSetSpec {
                seed: self.seed,
                ..spec.clone()
            }),
            DataSource::Dirs { .. } => None,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, value)?,
            "scale" => {
                self.scale = ScaleFactor::new(parse(key, value)?).map_err(|e| Error::Config(e.to_string()))?
            }
            "loss" => {
                let spec: CompositeLossSpec =
                    value.parse().map_err(|e: gradvar_core::Error| Error::Config(e.to_string()))?;
                self.loss = CompositeLossSpec {
                    reg_weight: self.loss.reg_weight,
                    gv_reduction: self.loss.gv_reduction,
                    ..spec
                };
            }
            "lambda" => self.loss.reg_weight = parse(key, value)?,
            "gv_patch" => self.gv_patch = Some(parse(key, value)?),
            "gv_reduction" => {
                self.loss.gv_reduction = match value {
                    "mean" => GvReduction::MeanSquared,
                    "euclidean" => GvReduction::Euclidean,
                    _ => return Err(Error::Config(format!("`gv_reduction`: unknown `{value}`"))),
                }
            }
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "crop" => self.crop = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "width" => self.width = parse(key, value)?,
            "border" => self.border = Some(parse(key, value)?),
            "train_dir" | "val_dir" => {
                let (mut train, mut val) = match &self.data {
                    DataSource::Dirs { train, val } => (train.clone(), val.clone()),
                    DataSource::Synthetic { .. } => (PathBuf::new(), PathBuf::new()),
                };
                if key.trim() == "train_dir" {
                    train = value.into();
                } else {
                    val = value.into();
                }
                self.data = DataSource::Dirs { train, val };
            }
            "synthetic_count" | "synthetic_size" | "val_count" => {
                let n: usize = parse(key, value)?;
                let (mut spec, mut val_count) = match &self.data {
                    DataSource::Synthetic { spec, val_count } => (spec.clone(), *val_count),
                    DataSource::Dirs { .. } => (SyntheticSetSpec::default(), 40),
                };
                match key.trim() {
                    "synthetic_count" => spec.count = n,
                    "synthetic_size" => {
                        spec.height = n;
                        spec.width = n;
                    }
                    _ => val_count = n,
                }
                self.data = DataSource::Synthetic { spec, val_count };
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every setting in a `key = value` text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = TrainConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.loss_spec()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let (s, n) = (self.scale.get(), self.patch());
        if self.crop == 0 || self.crop % s != 0 || self.crop % n != 0 {
            return Err(Error::Config(format!(
                "crop {} must be a positive multiple of both s = {s} and n = {n}",
                self.crop
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.width == 0 {
            return Err(Error::Config("width must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if let DataSource::Synthetic { spec, val_count } = &self.data {
            if *val_count == 0 || *val_count >= spec.count {
                return Err(Error::Config(format!(
                    "val_count {val_count} must be in 1..{}",
                    spec.count
                )));
            }
            if spec.height < self.crop || spec.width < self.crop {
                return Err(Error::Config(format!(
                    "synthetic images ({}×{}) are smaller than the crop {}",
                    spec.height, spec.width, self.crop
                )));
            }
        }
        Ok(())
    }

    /// Fully resolved settings in file order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut e = vec![
            ("seed", self.seed.to_string()),
            ("scale", self.scale.get().to_string()),
            ("loss", self.loss.label()),
            ("lambda", self.loss.reg_weight.to_string()),
            ("gv_patch", self.patch().to_string()),
            (
                "gv_reduction",
                match self.loss.gv_reduction {
                    GvReduction::MeanSquared => "mean",
                    GvReduction::Euclidean => "euclidean",
                }
                .to_string(),
            ),
            ("epochs", self.epochs.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("crop", self.crop.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("width", self.width.to_string()),
            ("border", self.border().to_string()),
        ];
        match &self.data {
            DataSource::Synthetic { spec, val_count } => {
                e.push(("synthetic_count", spec.count.to_string()));
                e.push(("synthetic_size", spec.height.to_string()));
                e.push(("val_count", val_count.to_string()));
            }
            DataSource::Dirs { train, val } => {
                e.push(("train_dir", train.display().to_string()));
                e.push(("val_dir", val.display().to_string()));
            }
        }
        e.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        render(&self.entries())
    }
}

fn render(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Writes `manifest.txt` in `dir`: the given entries followed by the code
/// version.
pub fn write_manifest(dir: &Path, entries: &[(String, String)]) -> Result<PathBuf> {
    let mut all = entries.to_vec();
    all.push(("code_version".into(), env!("CARGO_PKG_VERSION").into()));
    let path = dir.join("manifest.txt");
    write_text(&path, &render(&all))?;
    Ok(path)
}
