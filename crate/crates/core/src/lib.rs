//! Differentiable image losses built around the gradient variance (GV) loss.
//!
//! The GV loss converts both images to luma, takes Sobel gradient maps, cuts
//! each map into non-overlapping `n × n` patches and compares the per-patch
//! (unbiased) variances of the super-resolved and reference images. Every
//! loss in this crate returns its value together with the exact cotangent
//! with respect to the super-resolved input, so the losses can drive the
//! small sub-pixel convolution network in [`model`] without an autodiff
//! framework.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the training
//! harness and the command line live in the `gradvar` companion crate.
//!
//! # Layout
//! - [`image`]: planar image type, luma conversion, cropping.
//! - [`resample`]: cubic-convolution resizing and LR/HR pair generation.
//! - [`gradients`]: Sobel operator and its adjoint.
//! - [`loss`]: GV loss, L1, L2, TV and SSIM losses, composite objectives.
//! - [`metrics`]: PSNR, SSIM, patch-variance profiles and histograms.
//! - [`model`]: convolution layers, pixel shuffle, Adam.
//! - [`synthetic`]: procedural hard-edged training images.

#![no_std]

extern crate alloc;

mod error;
pub mod math;
pub mod gradients;
pub mod image;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod resample;
mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use gradients::{sobel_backward, sobel_forward, GradientPair};
pub use image::{Image, ScaleFactor, Shape};
pub use loss::{
    composite_loss, BaseLoss, CompositeLossSpec, GvReduction, LossResult, Regularizer,
};
pub use scalar::Scalar;
