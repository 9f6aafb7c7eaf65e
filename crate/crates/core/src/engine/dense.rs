use crate::engine::gemm::sgemm;
use crate::engine::Tensor;
use crate::error::{Error, Result};

fn check(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize)> {
    let (n, fin) = input.dims2()?;
    let (fout, win) = weight.dims2()?;
    if win != fin {
        return Err(Error::Shape(format!("dense weight expects {win} inputs, got {fin}")));
    }
    bias.expect_shape(&[fout], "dense bias")?;
    Ok((n, fin, fout))
}

/// `y = x·Wᵀ + b` with `x: [N, in]`, `W: [out, in]`, `b: [out]`.
pub fn dense_forward(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, fin, fout) = check(input, weight, bias)?;
    let mut out = Tensor::zeros(&[n, fout]);
    for row in out.data_mut().chunks_exact_mut(fout) {
        row.copy_from_slice(bias.data());
    }
    sgemm(n, fin, fout, input.data(), (fin, 1), weight.data(), (1, fin), 1.0, out.data_mut());
    Ok(out)
}

/// Returns `(grad_input, grad_weight, grad_bias)`.
pub fn dense_backward(grad_out: &Tensor, input: &Tensor, weight: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, fin) = input.dims2()?;
    let (fout, win) = weight.dims2()?;
    if win != fin {
        return Err(Error::Shape(format!("dense weight expects {win} inputs, got {fin}")));
    }
    grad_out.expect_shape(&[n, fout], "dense grad_out")?;
    let g = grad_out.data();
    let mut gx = Tensor::zeros(&[n, fin]);
    let mut gw = Tensor::zeros(&[fout, fin]);
    let mut gb = Tensor::zeros(&[fout]);
    // dx[N×in] = g[N×out] · W[out×in]
    sgemm(n, fout, fin, g, (fout, 1), weight.data(), (fin, 1), 0.0, gx.data_mut());
    // dW[out×in] = gᵀ[out×N] · x[N×in]
    sgemm(fout, n, fin, g, (1, fout), input.data(), (fin, 1), 0.0, gw.data_mut());
    for row in g.chunks_exact(fout) {
        for (b, &v) in gb.data_mut().iter_mut().zip(row) {
            *b += v;
        }
    }
    Ok((gx, gw, gb))
}
