use crate::engine::Tensor;
use crate::error::{Error, Result};

/// Windowed maximum over `[N, C, H, W]`.
///
/// Returns the pooled tensor and, for every output element, the flat index
/// of the input element that produced it. Ties go to the first maximal
/// element in row-major window order.
pub fn maxpool2d_forward(input: &Tensor, size: usize, stride: usize) -> Result<(Tensor, Vec<usize>)> {
    let (n, c, h, w) = input.dims4()?;
    if size == 0 || stride == 0 {
        return Err(Error::Config("pool size and stride must be positive".into()));
    }
    if h < size || w < size || !(h - size).is_multiple_of(stride) || !(w - size).is_multiple_of(stride) {
        return Err(Error::Shape(format!(
            "{h}x{w} input does not tile with pool size {size}, stride {stride}"
        )));
    }
    let oh = (h - size) / stride + 1;
    let ow = (w - size) / stride + 1;
    let x = input.data();
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    let mut argmax = vec![0usize; n * c * oh * ow];
    let o = out.data_mut();
    for plane in 0..n * c {
        let base = plane * h * w;
        for i in 0..oh {
            for j in 0..ow {
                let mut best = base + i * stride * w + j * stride;
                for a in 0..size {
                    for b in 0..size {
                        let idx = base + (i * stride + a) * w + j * stride + b;
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                let oi = (plane * oh + i) * ow + j;
                o[oi] = x[best];
                argmax[oi] = best;
            }
        }
    }
    Ok((out, argmax))
}

/// Routes each output gradient to the input position recorded in `argmax`.
pub fn maxpool2d_backward(grad_out: &Tensor, argmax: &[usize], input_shape: &[usize]) -> Result<Tensor> {
    if grad_out.len() != argmax.len() {
        return Err(Error::Shape(format!(
            "pool grad_out has {} elements, forward produced {}",
            grad_out.len(),
            argmax.len()
        )));
    }
    let mut grad_in = Tensor::zeros(input_shape);
    let gi = grad_in.data_mut();
    for (&g, &idx) in grad_out.data().iter().zip(argmax) {
        gi[idx] += g;
    }
    Ok(grad_in)
}
