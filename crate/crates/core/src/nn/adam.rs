use super::{NetworkParams, TrainConfig};
use crate::error::{invalid, Result};

/// First and second moment estimates with the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: NetworkParams,
    pub second_moment: NetworkParams,
    pub step_count: u64,
}

impl AdamState {
    pub fn new(params: &NetworkParams) -> Self {
        let zeros = NetworkParams::zeros(&params.layer_dims()).expect("dims of a valid network");
        Self { first_moment: zeros.clone(), second_moment: zeros, step_count: 0 }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &NetworkParams,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if !params.same_shape(grads)
        || !params.same_shape(&state.first_moment)
        || !params.same_shape(&state.second_moment)
    {
        return Err(invalid("parameter, gradient and optimizer state shapes differ"));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let m = state.first_moment.values_mut();
    let v = state.second_moment.values_mut();
    for (((p, g), m), v) in params.values_mut().zip(grads.values()).zip(m).zip(v) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
    }
    Ok(())
}
