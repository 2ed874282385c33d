
use super::{Gradients, ModelParams};
use crate::error::{Error, Result};
use crate::math;
use crate::scalar::Scalar;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: Scalar,
    pub beta1: Scalar,
    pub beta2: Scalar,
    pub epsilon: Scalar,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: Scalar) -> Self {
        AdamConfig {
            learning_rate,
            ..Default::default()
        }
    }
}

/// One bias-corrected Adam update. Increments the step counter.
///
/// Parameters are left untouched if any gradient is not finite.
pub fn adam_step(params: &mut ModelParams, grads: &Gradients, cfg: &AdamConfig) -> Result<()> {
    if grads.values.len() != params.values.len() {
        return Err(Error::Length {
            expected: params.values.len(),
            found: grads.values.len(),
        });
    }
    if let Some(i) = grads.values.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(alloc::format!(
            "gradient of parameter {i} is {}",
            grads.values[i]
        )));
    }
    params.step += 1;
    let t = params.step as i32;
    let c1 = 1.0 - math::powi(cfg.beta1, t);
    let c2 = 1.0 - math::powi(cfg.beta2, t);
    let moments = params.first_moment.iter_mut().zip(params.second_moment.iter_mut());
    for ((p, g), (m, v)) in params.values.iter_mut().zip(&grads.values).zip(moments) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.learning_rate * m_hat / (math::sqrt(v_hat) + cfg.epsilon);
    }
    Ok(())
}
