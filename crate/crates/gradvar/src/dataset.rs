//! Synthetic dataset export and HR image loading.

use std::path::{Path, PathBuf};

use gradvar_core::synthetic::{generate_image, SyntheticSetSpec};
use gradvar_core::Image;

use crate::config::{write_manifest, DataSource, TrainConfig};
use crate::error::{Error, Result};
use crate::io::{list_pngs, load_png, save_png};

/// Files written by [`make_synthetic_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub seed: u64,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes `spec.count` HR PNGs named `img_0000.png`, … into `dir`, plus a
/// manifest listing them with the generator settings.
pub fn make_synthetic_dataset(spec: &SyntheticSetSpec, dir: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let path = dir.join(format!("img_{i:04}.png"));
        save_png(&generate_image(spec, i)?, &path)?;
        files.push(path);
    }
    let shapes: Vec<&str> = spec.shapes.iter().map(|s| s.name()).collect();
    let mut entries = vec![
        ("seed".to_string(), spec.seed.to_string()),
        ("count".to_string(), spec.count.to_string()),
        ("height".to_string(), spec.height.to_string()),
        ("width".to_string(), spec.width.to_string()),
        ("shapes".to_string(), shapes.join(",")),
        (
            "shapes_per_image".to_string(),
            format!("{}..={}", spec.shapes_per_image.0, spec.shapes_per_image.1),
        ),
        ("min_contrast".to_string(), spec.min_contrast.to_string()),
    ];
    for f in &files {
        let name = f.file_name().unwrap_or_default().to_string_lossy().into_owned();
        entries.push(("file".to_string(), name));
    }
    let manifest = write_manifest(dir, &entries)?;
    Ok(DatasetManifest {
        seed: spec.seed,
        files,
        manifest,
    })
}

/// HR images for training and validation.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<Image>,
    pub val: Vec<Image>,
    pub val_names: Vec<String>,
}

fn load_all(dir: &Path) -> Result<(Vec<Image>, Vec<String>)> {
    let mut images = Vec::new();
    let mut names = Vec::new();
    for path in list_pngs(dir)? {
        images.push(load_png(&path)?);
        names.push(path.file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    Ok((images, names))
}

impl Dataset {
    pub fn load(cfg: &TrainConfig) -> Result<Self> {
        match &cfg.data {
            DataSource::Synthetic { val_count, .. } => {
                let spec = cfg.synthetic_spec().expect("synthetic source");
                spec.validate()?;
                let mut train = Vec::with_capacity(spec.count);
                for i in 0..spec.count {
                    train.push(generate_image(&spec, i)?);
                }
                let val = train.split_off(spec.count - val_count.min(&spec.count));
                let val_names = (spec.count - val.len()..spec.count)
                    .map(|i| format!("img_{i:04}"))
                    .collect();
                Ok(Dataset {
                    train,
                    val,
                    val_names,
                })
            }
            DataSource::Dirs { train, val } => {
                let (train, _) = load_all(train)?;
                let (val, val_names) = load_all(val)?;
                Ok(Dataset {
                    train,
                    val,
                    val_names,
                })
            }
        }
    }
}
