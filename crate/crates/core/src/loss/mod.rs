//! Differentiable losses. Every loss returns its value and the exact
//! gradient with respect to the super-resolved image; the reference image
//! is treated as a constant.

use core::fmt;
use core::str::FromStr;

use alloc::string::String;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

mod gv;
mod pixel;
mod ssim;

pub use gv::{
    fold, gradient_variance, gv_loss, gv_loss_with, patch_variance, patch_variance_backward,
    unfold, GradientVariance, GvReduction, UnfoldedPatches, VarianceMap,
};
pub use pixel::{l1_loss, l2_loss, tv_loss};
pub use ssim::{gaussian_taps, ssim_index, ssim_loss, DYNAMIC_RANGE, K1, K2, SIGMA, WINDOW};

/// Loss value with `∂value/∂sr`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub value: Scalar,
    pub grad_sr: Image,
}

/// Fidelity term of a composite objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseLoss {
    L1,
    L2,
    Ssim,
}

/// Optional structure term added to the fidelity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularizer {
    None,
    Tv,
    Gv,
}

impl BaseLoss {
    pub fn name(self) -> &'static str {
        match self {
            BaseLoss::L1 => "L1",
            BaseLoss::L2 => "L2",
            BaseLoss::Ssim => "SSIM",
        }
    }
}

impl Regularizer {
    pub fn name(self) -> &'static str {
        match self {
            Regularizer::None => "none",
            Regularizer::Tv => "TV",
            Regularizer::Gv => "GV",
        }
    }
}

impl FromStr for BaseLoss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(BaseLoss::L1),
            "l2" | "mse" => Ok(BaseLoss::L2),
            "ssim" => Ok(BaseLoss::Ssim),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown base loss `{s}`"))),
        }
    }
}

impl FromStr for Regularizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "" | "-" => Ok(Regularizer::None),
            "tv" => Ok(Regularizer::Tv),
            "gv" => Ok(Regularizer::Gv),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown regularizer `{s}`"))),
        }
    }
}

/// `base(sr, hr) + weight · regularizer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeLossSpec {
    pub base: BaseLoss,
    pub regularizer: Regularizer,
    pub reg_weight: Scalar,
    pub gv_patch: usize,
    pub gv_reduction: GvReduction,
}

impl CompositeLossSpec {
    pub fn new(base: BaseLoss, regularizer: Regularizer) -> Self {
        CompositeLossSpec {
            base,
            regularizer,
            reg_weight: 1.0,
            gv_patch: 8,
            gv_reduction: GvReduction::MeanSquared,
        }
    }

    pub fn with_weight(mut self, weight: Scalar) -> Self {
        self.reg_weight = weight;
        self
    }

    pub fn with_patch(mut self, n: usize) -> Self {
        self.gv_patch = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reg_weight >= 0.0) || !self.reg_weight.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "regularizer weight must be finite and nonnegative, got {}",
                self.reg_weight
            )));
        }
        if self.gv_patch < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "GV patch size must be at least 2, got {}",
                self.gv_patch
            )));
        }
        Ok(())
    }

    /// Short label such as `L2`, `L2+GV`.
    pub fn label(&self) -> String {
        match self.regularizer {
            Regularizer::None => String::from(self.base.name()),
            r => alloc::format!("{}+{}", self.base.name(), r.name()),
        }
    }
}

impl fmt::Display for CompositeLossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for CompositeLossSpec {
    type Err = Error;

    /// Parses labels like `l2`, `L1+TV`, `ssim+gv`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('+').map(str::trim);
        let base: BaseLoss = parts.next().unwrap_or_default().parse()?;
        let reg: Regularizer = match parts.next() {
            Some(r) => r.parse()?,
            None => Regularizer::None,
        };
        if parts.next().is_some() {
            return Err(Error::InvalidArgument(alloc::format!(
                "loss label `{s}` has more than two terms"
            )));
        }
        Ok(CompositeLossSpec::new(base, reg))
    }
}

/// Evaluates a fidelity loss.
pub fn base_loss(base: BaseLoss, sr: &Image, hr: &Image) -> Result<LossResult> {
    match base {
        BaseLoss::L1 => l1_loss(sr, hr),
        BaseLoss::L2 => l2_loss(sr, hr),
        BaseLoss::Ssim => ssim_loss(sr, hr),
    }
}

/// Evaluates `spec` on one SR/HR pair.
pub fn composite_loss(spec: &CompositeLossSpec, sr: &Image, hr: &Image) -> Result<LossResult> {
    spec.validate()?;
    let mut total = base_loss(spec.base, sr, hr)?;
    let reg = match spec.regularizer {
        Regularizer::None => return Ok(total),
        Regularizer::Tv => tv_loss(sr)?,
        Regularizer::Gv => gv_loss_with(sr, hr, spec.gv_patch, spec.gv_reduction)?,
    };
    if spec.reg_weight == 0.0 {
        return Ok(total);
    }
    total.value += spec.reg_weight * reg.value;
    total.grad_sr.axpy(spec.reg_weight, &reg.grad_sr)?;
    Ok(total)
}
