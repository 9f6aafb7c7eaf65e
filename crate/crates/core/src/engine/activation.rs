//! Element-wise activations and inverted dropout.

use rand::Rng;

use crate::engine::Tensor;
use crate::error::{Error, Result};

pub fn tanh_forward(input: &Tensor) -> Tensor {
    input.map(f32::tanh)
}

/// Uses the forward output: `d tanh = 1 − y²`.
pub fn tanh_backward(grad_out: &Tensor, output: &Tensor) -> Result<Tensor> {
    grad_out.expect_shape(output.shape(), "tanh grad_out")?;
    let data = grad_out
        .data()
        .iter()
        .zip(output.data())
        .map(|(&g, &y)| g * (1.0 - y * y))
        .collect();
    Tensor::new(output.shape().to_vec(), data)
}

pub fn relu_forward(input: &Tensor) -> Tensor {
    input.map(|x| x.max(0.0))
}

/// Gradient passes where the forward input was strictly positive.
pub fn relu_backward(grad_out: &Tensor, input: &Tensor) -> Result<Tensor> {
    grad_out.expect_shape(input.shape(), "relu grad_out")?;
    let data = grad_out
        .data()
        .iter()
        .zip(input.data())
        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

pub fn check_dropout_p(p: f32) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Config(format!("dropout probability must lie in [0, 1), got {p}")));
    }
    Ok(())
}

/// Inverted dropout. In training mode each element is zeroed with
/// probability `p` and survivors are scaled by `1/(1−p)`; the returned mask
/// holds the per-element multiplier. Evaluation mode (or `p == 0`) is the
/// identity and returns no mask.
pub fn dropout_forward<R: Rng + ?Sized>(
    input: &Tensor,
    p: f32,
    training: bool,
    rng: &mut R,
) -> (Tensor, Option<Vec<f32>>) {
    if !training || p == 0.0 {
        return (input.clone(), None);
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f32> = (0..input.len())
        .map(|_| if rng.gen::<f32>() < p { 0.0 } else { keep })
        .collect();
    let out = input.data().iter().zip(&mask).map(|(&x, &m)| x * m).collect();
    (
        Tensor::new(input.shape().to_vec(), out).expect("shape unchanged"),
        Some(mask),
    )
}

pub fn dropout_backward(grad_out: &Tensor, mask: Option<&[f32]>) -> Result<Tensor> {
    match mask {
        None => Ok(grad_out.clone()),
        Some(mask) => {
            if mask.len() != grad_out.len() {
                return Err(Error::Shape("dropout mask does not match grad_out".into()));
            }
            let data = grad_out.data().iter().zip(mask).map(|(&g, &m)| g * m).collect();
            Tensor::new(grad_out.shape().to_vec(), data)
        }
    }
}
