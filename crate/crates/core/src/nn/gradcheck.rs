use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mlp::MlpModel;
use super::train::{loss, loss_and_gradients};
use crate::error::Result;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;

/// Gradients smaller than this are compared on an absolute scale, since
/// the central difference carries roughly 1e-11 of rounding noise.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// Deliberate corruption of the analytic gradient, for testing the check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientFault {
    #[default]
    None,
    FlipSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    /// Largest relative error among the sampled parameters of each layer.
    pub per_layer: Vec<f64>,
    pub max_relative_error: f64,
    pub samples: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compares backprop against central differences on `samples_per_layer`
/// randomly chosen weights and biases of every layer.
pub fn gradient_check(
    model: &MlpModel,
    input: &[f64],
    label: usize,
    samples_per_layer: usize,
    seed: u64,
    fault: GradientFault,
) -> Result<GradientCheck> {
    let labels = [label];
    let (_, grads) = loss_and_gradients(model, input, &labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = model.clone();
    let mut per_layer = Vec::with_capacity(model.layers().len());

    for i in 0..model.layers().len() {
        let n_weights = model.layers()[i].weights.len();
        let n_params = n_weights + model.layers()[i].bias.len();
        let mut worst: f64 = 0.0;
        for _ in 0..samples_per_layer {
            let k = rng.random_range(0..n_params);
            let (analytic, original) = if k < n_weights {
                (grads.weights[i][k], model.layers()[i].weights[k])
            } else {
                (grads.bias[i][k - n_weights], model.layers()[i].bias[k - n_weights])
            };
            let mut at = |value: f64| {
                let layer = &mut probe.layers_mut()[i];
                if k < n_weights {
                    layer.weights[k] = value;
                } else {
                    layer.bias[k - n_weights] = value;
                }
                loss(&probe, input, &labels)
            };
            let plus = at(original + STEP)?;
            let minus = at(original - STEP)?;
            at(original)?;
            let numeric = (plus - minus) / (2.0 * STEP);
            let analytic = match fault {
                GradientFault::None => analytic,
                GradientFault::FlipSign => -analytic,
            };
            worst = worst.max(relative_error(analytic, numeric));
        }
        per_layer.push(worst);
    }
    Ok(GradientCheck {
        max_relative_error: per_layer.iter().cloned().fold(0.0, f64::max),
        per_layer,
        samples: samples_per_layer * model.layers().len(),
    })
}
