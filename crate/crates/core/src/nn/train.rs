use rand::seq::SliceRandom;

use super::backprop::gradients_with_loss;
use super::{adam_step, AdamState, LabeledInput, NetworkParams};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 64,
            epochs: 30,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("adam_epsilon", self.adam_epsilon)?;
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be >= 1"));
        }
        Ok(())
    }
}

/// Final parameters plus the loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean loss of every minibatch, measured before its update.
    pub step_losses: Vec<f64>,
}

/// Trains a network of shape `dims` from a He initialization keyed by
/// `config.seed`.
pub fn train(dims: &[usize], samples: &[LabeledInput<'_>], config: &TrainConfig) -> Result<TrainOutcome> {
    let init = NetworkParams::init(dims, derive_seed(&[config.seed, 0x494e4954]))?;
    train_from(init, samples, config)
}

/// Trains starting from `params`. With `epochs == 0` the input comes back
/// unchanged.
pub fn train_from(
    mut params: NetworkParams,
    samples: &[LabeledInput<'_>],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if samples.is_empty() {
        return Err(invalid("training set is empty"));
    }
    let classes = params.output_dim();
    let mut seen = vec![false; classes];
    for (i, &(x, c)) in samples.iter().enumerate() {
        if c >= classes {
            return Err(invalid(format!("sample {i} has class {c}, network has {classes} outputs")));
        }
        if x.len() != params.input_dim() {
            return Err(invalid(format!("sample {i} has {} values, expected {}", x.len(), params.input_dim())));
        }
        seen[c] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(invalid(format!("class {missing} is missing from the training set")));
    }

    let mut state = AdamState::new(&params);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut step_losses = Vec::new();
    let mut batch = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng_from_seed(derive_seed(&[config.seed, epoch as u64])));
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| samples[i]));
            let (grads, loss) = gradients_with_loss(&params, &batch)?;
            adam_step(&mut params, &grads, &mut state, config)?;
            total += loss * chunk.len() as f64;
            step_losses.push(loss);
        }
        epoch_losses.push(total / samples.len() as f64);
    }
    Ok(TrainOutcome { params, epoch_losses, step_losses })
}
