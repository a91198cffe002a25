use super::{softmax, LabeledInput, Layer, NetworkParams};
use crate::error::{invalid, Result};

/// Mean cross-entropy gradient over `batch`, returned in the shape of
/// `params`. Samples are accumulated in batch order.
pub fn gradients(params: &NetworkParams, batch: &[LabeledInput<'_>]) -> Result<NetworkParams> {
    gradients_with_loss(params, batch).map(|(g, _)| g)
}

/// Like [`gradients`], also returning the batch's mean loss.
pub(crate) fn gradients_with_loss(
    params: &NetworkParams,
    batch: &[LabeledInput<'_>],
) -> Result<(NetworkParams, f64)> {
    if batch.is_empty() {
        return Err(invalid("gradient batch is empty"));
    }
    for (i, (x, class)) in batch.iter().enumerate() {
        if x.len() != params.input_dim() {
            return Err(invalid(format!(
                "batch sample {i} has {} values, network expects {}",
                x.len(),
                params.input_dim()
            )));
        }
        if *class >= params.output_dim() {
            return Err(invalid(format!("batch sample {i} has class {class} out of range")));
        }
    }

    let layers = params.layers();
    let mut grads: Vec<Layer> = layers.iter().map(|l| Layer::zeros(l.out_dim, l.in_dim)).collect();
    let mut loss = 0.0;
    let mut acts: Vec<Vec<f64>> = vec![Vec::new(); layers.len()];

    for &(x, class) in batch {
        // acts[i] holds the output of layer i (post-ReLU for hidden layers).
        for i in 0..layers.len() {
            let (done, rest) = acts.split_at_mut(i);
            let input = if i == 0 { x } else { &done[i - 1] };
            let out = &mut rest[0];
            layers[i].affine(input, out);
            if i + 1 < layers.len() {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        let probs = softmax(&acts[layers.len() - 1]);
        loss += super::cross_entropy(&probs, class);

        // Fused softmax + cross-entropy: dL/dz = p - onehot.
        let mut delta = probs;
        delta[class] -= 1.0;
        for i in (0..layers.len()).rev() {
            let input: &[f64] = if i == 0 { x } else { &acts[i - 1] };
            let g = &mut grads[i];
            for (r, &d) in delta.iter().enumerate() {
                g.biases[r] += d;
                if d == 0.0 {
                    continue;
                }
                let row = &mut g.weights[r * g.in_dim..(r + 1) * g.in_dim];
                for (w, &a) in row.iter_mut().zip(input) {
                    *w += d * a;
                }
            }
            if i == 0 {
                break;
            }
            // Back through W^T, then the ReLU mask (derivative 0 at 0).
            let layer = &layers[i];
            let mut prev = vec![0.0; layer.in_dim];
            for (r, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (p, &w) in prev.iter_mut().zip(layer.row(r)) {
                    *p += d * w;
                }
            }
            for (p, &a) in prev.iter_mut().zip(&acts[i - 1]) {
                if a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    let n = batch.len() as f64;
    for g in &mut grads {
        g.weights.iter_mut().chain(g.biases.iter_mut()).for_each(|v| *v /= n);
    }
    Ok((NetworkParams::from_layers(grads)?, loss / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{cross_entropy, forward};
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn loss_at(params: &NetworkParams, x: &[f64], class: usize) -> f64 {
        cross_entropy(&forward(params, x).unwrap().probs, class)
    }

    /// Central differences, h = 1e-5.
    fn numeric_gradient(params: &NetworkParams, x: &[f64], class: usize) -> Vec<f64> {
        let h = 1e-5;
        let n = params.num_params();
        (0..n)
            .map(|k| {
                let mut plus = params.clone();
                let mut minus = params.clone();
                *plus.values_mut().nth(k).unwrap() += h;
                *minus.values_mut().nth(k).unwrap() -= h;
                (loss_at(&plus, x, class) - loss_at(&minus, x, class)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn matches_finite_differences_on_4_3_2() {
        let params = NetworkParams::init(&[4, 3, 2], 21).unwrap();
        let mut rng = rng_from_seed(5);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = gradients(&params, &[(&x, 1)]).unwrap();
        let numeric = numeric_gradient(&params, &x, 1);
        for (a, b) in g.values().zip(numeric) {
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
            assert!(rel <= 1e-4 || (a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn duplicated_sample_gives_same_gradient() {
        let params = NetworkParams::init(&[5, 4, 3], 2).unwrap();
        let x = [0.1, -0.4, 0.9, 0.0, 0.3];
        let one = gradients(&params, &[(&x, 2)]).unwrap();
        let two = gradients(&params, &[(&x, 2), (&x, 2)]).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn zero_network_output_bias_gradient_is_uniform_minus_onehot() {
        let params = NetworkParams::zeros(&[6, 5, 7]).unwrap();
        let x = [0.5; 6];
        let g = gradients(&params, &[(&x, 4)]).unwrap();
        let out = &g.layers()[1];
        for (r, &b) in out.biases.iter().enumerate() {
            let expected = 1.0 / 7.0 - if r == 4 { 1.0 } else { 0.0 };
            assert!((b - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_empty_and_malformed_batches() {
        let params = NetworkParams::zeros(&[3, 2]).unwrap();
        assert!(gradients(&params, &[]).is_err());
        assert!(gradients(&params, &[(&[0.0, 1.0], 0)]).is_err());
        assert!(gradients(&params, &[(&[0.0, 1.0, 2.0], 2)]).is_err());
    }
}
