//! Sub-pixel convolution super-resolution network.
//!
//! A stack of same-size convolutions followed by a pixel shuffle. All
//! parameters live in one flat vector (layer by layer, weights then biases),
//! which is also the layout of [`Gradients`], the Adam moments and the
//! checkpoint blob.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{Image, ScaleFactor, Shape};
use crate::loss::{composite_loss, CompositeLossSpec};
use crate::math;
use crate::scalar::Scalar;

mod adam;
mod conv;
mod shuffle;

pub use adam::{adam_step, AdamConfig};
pub use conv::{conv_backward, conv_forward, pad_replicate, unpad_replicate_adjoint};
pub use shuffle::{pixel_shuffle, pixel_unshuffle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    None,
    Tanh,
    Relu,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::None => 0,
            Activation::Tanh => 1,
            Activation::Relu => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::None),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Relu),
            _ => None,
        }
    }

    fn apply(self, x: Scalar) -> Scalar {
        match self {
            Activation::None => x,
            Activation::Tanh => math::tanh(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: Scalar) -> Scalar {
        match self {
            Activation::None => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::None => "none",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

/// One convolution layer: `in_ch → out_ch`, odd `kernel × kernel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvSpec {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub activation: Activation,
}

impl ConvSpec {
    pub const fn new(in_ch: usize, out_ch: usize, kernel: usize, activation: Activation) -> Self {
        ConvSpec {
            in_ch,
            out_ch,
            kernel,
            activation,
        }
    }
    pub const fn weight_count(&self) -> usize {
        self.out_ch * self.in_ch * self.kernel * self.kernel
    }
    pub const fn param_count(&self) -> usize {
        self.weight_count() + self.out_ch
    }
    pub const fn padding(&self) -> usize {
        (self.kernel - 1) / 2
    }
    pub const fn fan_in(&self) -> usize {
        self.in_ch * self.kernel * self.kernel
    }
}

/// Layer stack plus upscaling ratio.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Architecture {
    pub layers: Vec<ConvSpec>,
    pub scale: ScaleFactor,
}

impl Architecture {
    /// Validates layer chaining, odd kernels and the `c·s²` output width.
    pub fn new(layers: Vec<ConvSpec>, scale: ScaleFactor) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("architecture has no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.kernel % 2 == 0 || l.in_ch == 0 || l.out_ch == 0 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "layer {i}: kernel must be odd and channel counts positive"
                )));
            }
            if i > 0 && layers[i - 1].out_ch != l.in_ch {
                return Err(Error::InvalidArgument(alloc::format!(
                    "layer {i} expects {} channels but layer {} produces {}",
                    l.in_ch,
                    i - 1,
                    layers[i - 1].out_ch
                )));
            }
        }
        let s2 = scale.get() * scale.get();
        let last = layers[layers.len() - 1];
        if last.out_ch % s2 != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "final layer width {} is not a multiple of s² = {s2}",
                last.out_ch
            )));
        }
        Ok(Architecture { layers, scale })
    }

    /// conv `c→32` 5×5 tanh, conv `32→32` 3×3 tanh, conv `32→c·s²` 3×3, shuffle.
    pub fn espcn(channels: usize, scale: ScaleFactor) -> Self {
        Self::espcn_with_width(channels, 32, scale)
    }

    pub fn espcn_with_width(channels: usize, width: usize, scale: ScaleFactor) -> Self {
        let s2 = scale.get() * scale.get();
        Architecture {
            layers: vec![
                ConvSpec::new(channels, width, 5, Activation::Tanh),
                ConvSpec::new(width, width, 3, Activation::Tanh),
                ConvSpec::new(width, channels * s2, 3, Activation::None),
            ],
            scale,
        }
    }

    pub fn input_channels(&self) -> usize {
        self.layers[0].in_ch
    }

    pub fn output_channels(&self) -> usize {
        self.layers[self.layers.len() - 1].out_ch / (self.scale.get() * self.scale.get())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(ConvSpec::param_count).sum()
    }

    /// Start offset of each layer's weights in the flat parameter vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.layers
            .iter()
            .map(|l| {
                let o = acc;
                acc += l.param_count();
                o
            })
            .collect()
    }
}

/// Trainable state: parameters, Adam moments and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub arch: Architecture,
    pub values: Vec<Scalar>,
    pub first_moment: Vec<Scalar>,
    pub second_moment: Vec<Scalar>,
    pub step: u64,
}

/// Gradient with the same flat layout as [`ModelParams::values`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<Scalar>,
}

impl Gradients {
    pub fn zeros(len: usize) -> Self {
        Gradients {
            values: vec![0.0; len],
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn scale(&mut self, alpha: Scalar) {
        for a in &mut self.values {
            *a *= alpha;
        }
    }
}

impl ModelParams {
    /// Uniform `±1/√fan_in` initialisation for weights and biases, drawn
    /// from ChaCha8 seeded with `seed`.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(arch.param_count());
        for l in &arch.layers {
            let bound = 1.0 / math::sqrt(l.fan_in() as Scalar);
            for _ in 0..l.param_count() {
                values.push(rng.random_range(-bound..bound));
            }
        }
        Self::from_values(arch, values).expect("length computed from architecture")
    }

    pub fn zeros(arch: Architecture) -> Self {
        let n = arch.param_count();
        Self::from_values(arch, vec![0.0; n]).expect("length computed from architecture")
    }

    /// Wraps a parameter vector with fresh optimizer state.
    pub fn from_values(arch: Architecture, values: Vec<Scalar>) -> Result<Self> {
        let n = arch.param_count();
        if values.len() != n {
            return Err(Error::Length {
                expected: n,
                found: values.len(),
            });
        }
        Ok(ModelParams {
            arch,
            values,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            step: 0,
        })
    }

    pub fn scale(&self) -> ScaleFactor {
        self.arch.scale
    }

    /// Weight and bias slices of layer `i`.
    pub fn layer(&self, i: usize) -> (&[Scalar], &[Scalar]) {
        let offset: usize = self.arch.layers[..i].iter().map(ConvSpec::param_count).sum();
        let l = &self.arch.layers[i];
        let w = &self.values[offset..offset + l.weight_count()];
        let b = &self.values[offset + l.weight_count()..offset + l.param_count()];
        (w, b)
    }
}

struct LayerTape {
    padded_input: Image,
    output: Image,
}

/// Activations cached by [`forward`] for [`backward`].
pub struct ForwardTape {
    layers: Vec<LayerTape>,
    arch: Architecture,
    step: u64,
    input_shape: Shape,
}

impl ForwardTape {
    /// Shape of the SR output this tape belongs to.
    pub fn output_shape(&self) -> Shape {
        let s = self.arch.scale.get();
        Shape::new(
            self.arch.output_channels(),
            self.input_shape.height * s,
            self.input_shape.width * s,
        )
    }
}

/// Runs the network on `lr`, returning the SR image and the tape.
pub fn forward(params: &ModelParams, lr: &Image) -> Result<(Image, ForwardTape)> {
    let arch = &params.arch;
    if lr.channels() != arch.input_channels() {
        return Err(Error::Channels {
            found: lr.channels(),
            expected: "the first layer's input width",
        });
    }
    if lr.height() == 0 || lr.width() == 0 {
        return Err(Error::TooSmall {
            height: lr.height(),
            width: lr.width(),
            min_height: 1,
            min_width: 1,
        });
    }
    let mut tape = Vec::with_capacity(arch.layers.len());
    let mut x = lr.clone();
    for (i, spec) in arch.layers.iter().enumerate() {
        let (w, b) = params.layer(i);
        let padded = pad_replicate(&x, spec.padding());
        let mut out = conv_forward(&padded, spec.out_ch, spec.kernel, w, b);
        if spec.activation != Activation::None {
            for v in out.data_mut() {
                *v = spec.activation.apply(*v);
            }
        }
        x = out.clone();
        tape.push(LayerTape {
            padded_input: padded,
            output: out,
        });
    }
    let sr = pixel_shuffle(&x, arch.scale.get())?;
    Ok((
        sr,
        ForwardTape {
            layers: tape,
            arch: arch.clone(),
            step: params.step,
            input_shape: lr.shape(),
        },
    ))
}

/// Parameter gradients for the cotangent `grad_sr` of the SR output.
pub fn backward(params: &ModelParams, tape: &ForwardTape, grad_sr: &Image) -> Result<Gradients> {
    if tape.arch != params.arch || tape.step != params.step {
        return Err(Error::InvalidArgument(
            "forward tape does not belong to these parameters (stale or mismatched)".into(),
        ));
    }
    if grad_sr.shape() != tape.output_shape() {
        return Err(Error::ShapeMismatch {
            expected: tape.output_shape(),
            found: grad_sr.shape(),
        });
    }
    let arch = &params.arch;
    let mut grads = Gradients::zeros(arch.param_count());
    let offsets = arch.offsets();
    let mut g = pixel_unshuffle(grad_sr, arch.scale.get())?;
    for i in (0..arch.layers.len()).rev() {
        let spec = arch.layers[i];
        let lt = &tape.layers[i];
        if spec.activation != Activation::None {
            for (gv, y) in g.data_mut().iter_mut().zip(lt.output.data()) {
                *gv *= spec.activation.derivative_from_output(*y);
            }
        }
        let (w, _) = params.layer(i);
        let (gw, gb) =
            grads.values[offsets[i]..offsets[i] + spec.param_count()].split_at_mut(spec.weight_count());
        let grad_padded = conv_backward(&lt.padded_input, &g, spec.kernel, w, gw, gb, i > 0);
        if let Some(gp) = grad_padded {
            g = unpad_replicate_adjoint(&gp, spec.padding());
        }
    }
    Ok(grads)
}

/// Forward, loss and backward for one LR/HR pair.
pub fn loss_and_gradients(
    params: &ModelParams,
    lr: &Image,
    hr: &Image,
    spec: &CompositeLossSpec,
) -> Result<(Scalar, Gradients)> {
    let (sr, tape) = forward(params, lr)?;
    let loss = composite_loss(spec, &sr, hr)?;
    if !loss.value.is_finite() {
        return Err(Error::NonFinite(alloc::format!("loss value {}", loss.value)));
    }
    let grads = backward(params, &tape, &loss.grad_sr)?;
    Ok((loss.value, grads))
}

/// Super-resolves `lr` without keeping a tape.
pub fn predict(params: &ModelParams, lr: &Image) -> Result<Image> {
    forward(params, lr).map(|(sr, _)| sr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> ScaleFactor {
        ScaleFactor::new(2).unwrap()
    }

    #[test]
    fn zero_params_give_zero_output() {
        let params = ModelParams::zeros(Architecture::espcn(3, s2()));
        let lr = Image::filled(3, 16, 16, 0.5);
        let (sr, _) = forward(&params, &lr).unwrap();
        assert_eq!(sr.shape(), Shape::new(3, 32, 32));
        assert!(sr.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_cotangent_gives_zero_gradients() {
        let params = ModelParams::init(Architecture::espcn_with_width(3, 4, s2()), 1);
        let lr = Image::from_fn(3, 6, 6, |c, y, x| ((c + y + x) % 4) as Scalar / 4.0);
        let (sr, tape) = forward(&params, &lr).unwrap();
        let g = backward(&params, &tape, &Image::zeros(3, sr.height(), sr.width())).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn final_bias_gradient_is_unshuffled_channel_sum() {
        let params = ModelParams::init(Architecture::espcn_with_width(1, 4, s2()), 3);
        let lr = Image::from_fn(1, 5, 4, |_, y, x| ((y * 3 + x) % 5) as Scalar / 5.0);
        let (sr, tape) = forward(&params, &lr).unwrap();
        let cot = Image::from_fn(1, sr.height(), sr.width(), |_, y, x| (y as Scalar) - 0.3 * x as Scalar);
        let g = backward(&params, &tape, &cot).unwrap();
        let un = pixel_unshuffle(&cot, 2).unwrap();
        let n = params.values.len();
        for ch in 0..4 {
            let expected: Scalar = un.plane(ch).iter().sum();
            assert!((g.values[n - 4 + ch] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn stale_tape_rejected() {
        let mut params = ModelParams::init(Architecture::espcn_with_width(1, 4, s2()), 3);
        let lr = Image::filled(1, 4, 4, 0.2);
        let (sr, tape) = forward(&params, &lr).unwrap();
        let grads = Gradients::zeros(params.values.len());
        adam_step(&mut params, &grads, &AdamConfig::default()).unwrap();
        assert!(backward(&params, &tape, &sr).is_err());
    }

    #[test]
    fn channel_mismatch_rejected() {
        let params = ModelParams::zeros(Architecture::espcn(3, s2()));
        assert!(forward(&params, &Image::zeros(1, 8, 8)).is_err());
    }

    #[test]
    fn architecture_validation() {
        let s = s2();
        assert!(Architecture::new(vec![ConvSpec::new(3, 12, 4, Activation::None)], s).is_err());
        assert!(Architecture::new(vec![ConvSpec::new(3, 10, 3, Activation::None)], s).is_err());
        assert!(Architecture::new(
            vec![
                ConvSpec::new(3, 8, 3, Activation::Tanh),
                ConvSpec::new(4, 12, 3, Activation::None)
            ],
            s
        )
        .is_err());
        let arch = Architecture::espcn(3, s);
        assert_eq!(Architecture::new(arch.layers.clone(), s).unwrap(), arch);
        assert_eq!(arch.param_count(), 3 * 32 * 25 + 32 + 32 * 32 * 9 + 32 + 32 * 12 * 9 + 12);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut params = ModelParams::init(Architecture::espcn_with_width(1, 4, s2()), 9);
        let before = params.values.clone();
        adam_step(&mut params, &Gradients::zeros(before.len()), &AdamConfig::default()).unwrap();
        assert_eq!(params.values, before);
        assert_eq!(params.step, 1);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut params = ModelParams::zeros(Architecture::espcn_with_width(1, 4, s2()));
        let n = params.values.len();
        let grads = Gradients {
            values: (0..n).map(|i| if i % 2 == 0 { 0.3 } else { -2.0 }).collect(),
        };
        adam_step(&mut params, &grads, &AdamConfig::with_learning_rate(0.01)).unwrap();
        for (p, g) in params.values.iter().zip(&grads.values) {
            assert!((p + 0.01 * g.signum()).abs() < 1e-8);
        }
    }

    #[test]
    fn adam_rejects_non_finite() {
        let mut params = ModelParams::zeros(Architecture::espcn_with_width(1, 4, s2()));
        let mut grads = Gradients::zeros(params.values.len());
        grads.values[5] = Scalar::NAN;
        let before = params.clone();
        assert!(matches!(
            adam_step(&mut params, &grads, &AdamConfig::default()),
            Err(Error::NonFinite(_))
        ));
        assert_eq!(params, before);
    }

    #[test]
    fn init_is_seeded() {
        let arch = Architecture::espcn(3, s2());
        let a = ModelParams::init(arch.clone(), 42);
        let b = ModelParams::init(arch.clone(), 42);
        let c = ModelParams::init(arch, 43);
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        let bound = 1.0 / (75.0 as Scalar).sqrt();
        assert!(a.values[..2432].iter().all(|v| v.abs() < bound));
    }
}
