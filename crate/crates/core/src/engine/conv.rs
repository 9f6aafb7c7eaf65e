//! 2-D convolution (cross-correlation) over `[N, C, H, W]` batches.
//!
//! Three forward paths are kept: a direct loop nest that reads exactly like
//! the defining sum and serves as the test reference, the im2col + GEMM path
//! used for most training, and a row-wise direct path for stride-1 layers
//! with very few channel pairs (where a GEMM with one or two output rows
//! spends its time packing).

use crate::engine::gemm::sgemm;
use crate::engine::Tensor;
use crate::error::{Error, Result};

/// Resolved sizes of one convolution call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub batch: usize,
    pub in_channels: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub filters: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeometry {
    pub fn resolve(input: &Tensor, weight: &Tensor, bias: &Tensor, stride: usize, padding: usize) -> Result<Self> {
        let (batch, in_channels, in_h, in_w) = input.dims4()?;
        let (filters, wc, kh, kw) = weight.dims4()?;
        if wc != in_channels {
            return Err(Error::Shape(format!(
                "conv weight expects {wc} input channels, input has {in_channels}"
            )));
        }
        if kh != kw {
            return Err(Error::Shape(format!("conv kernel must be square, got {kh}x{kw}")));
        }
        bias.expect_shape(&[filters], "conv bias")?;
        let out_h = output_size(in_h, kh, stride, padding)?;
        let out_w = output_size(in_w, kw, stride, padding)?;
        Ok(ConvGeometry {
            batch,
            in_channels,
            in_h,
            in_w,
            filters,
            kernel: kh,
            stride,
            padding,
            out_h,
            out_w,
        })
    }

    fn patch_len(&self) -> usize {
        self.in_channels * self.kernel * self.kernel
    }

    fn out_plane(&self) -> usize {
        self.out_h * self.out_w
    }

    pub fn output_shape(&self) -> [usize; 4] {
        [self.batch, self.filters, self.out_h, self.out_w]
    }
}

/// `(in + 2·pad − k) / stride + 1`, rejecting non-integral or empty results.
pub fn output_size(input: usize, kernel: usize, stride: usize, padding: usize) -> Result<usize> {
    if stride == 0 || kernel == 0 {
        return Err(Error::Config("stride and kernel size must be positive".into()));
    }
    let padded = input + 2 * padding;
    if padded < kernel {
        return Err(Error::Config(format!(
            "kernel {kernel} larger than padded input {padded}"
        )));
    }
    if !(padded - kernel).is_multiple_of(stride) {
        return Err(Error::Config(format!(
            "output size ({padded} - {kernel}) / {stride} + 1 is not an integer"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

/// Direct evaluation of
/// `out[n,f,i,j] = bias[f] + Σ_{c,a,b} weight[f,c,a,b] · x[n,c,i·s+a−p, j·s+b−p]`
/// with zero fill outside the input.
pub fn conv2d_forward_direct(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let g = ConvGeometry::resolve(input, weight, bias, stride, padding)?;
    let x = input.data();
    let w = weight.data();
    let k = g.kernel;
    let mut out = Tensor::zeros(&g.output_shape());
    let o = out.data_mut();
    for n in 0..g.batch {
        for f in 0..g.filters {
            for i in 0..g.out_h {
                for j in 0..g.out_w {
                    let mut acc = bias.data()[f];
                    for c in 0..g.in_channels {
                        for a in 0..k {
                            for b in 0..k {
                                let r = (i * stride + a) as isize - padding as isize;
                                let s = (j * stride + b) as isize - padding as isize;
                                if r < 0 || s < 0 || r >= g.in_h as isize || s >= g.in_w as isize {
                                    continue;
                                }
                                let xi = ((n * g.in_channels + c) * g.in_h + r as usize) * g.in_w + s as usize;
                                let wi = ((f * g.in_channels + c) * k + a) * k + b;
                                acc += w[wi] * x[xi];
                            }
                        }
                    }
                    o[((n * g.filters + f) * g.out_h + i) * g.out_w + j] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Unfolds one sample `[C, H, W]` into a `[C·k·k, out_h·out_w]` column matrix.
fn im2col(sample: &[f32], g: &ConvGeometry, col: &mut [f32]) {
    let k = g.kernel;
    let plane = g.out_plane();
    for c in 0..g.in_channels {
        let channel = &sample[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
        for a in 0..k {
            for b in 0..k {
                let row = &mut col[((c * k + a) * k + b) * plane..][..plane];
                for i in 0..g.out_h {
                    let r = (i * g.stride + a) as isize - g.padding as isize;
                    let dst = &mut row[i * g.out_w..(i + 1) * g.out_w];
                    if r < 0 || r >= g.in_h as isize {
                        dst.fill(0.0);
                        continue;
                    }
                    let src = &channel[r as usize * g.in_w..(r as usize + 1) * g.in_w];
                    for (j, d) in dst.iter_mut().enumerate() {
                        let s = (j * g.stride + b) as isize - g.padding as isize;
                        *d = if s < 0 || s >= g.in_w as isize { 0.0 } else { src[s as usize] };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters column gradients back onto `[C, H, W]`.
fn col2im(col: &[f32], g: &ConvGeometry, sample: &mut [f32]) {
    let k = g.kernel;
    let plane = g.out_plane();
    for c in 0..g.in_channels {
        let channel = &mut sample[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
        for a in 0..k {
            for b in 0..k {
                let row = &col[((c * k + a) * k + b) * plane..][..plane];
                for i in 0..g.out_h {
                    let r = (i * g.stride + a) as isize - g.padding as isize;
                    if r < 0 || r >= g.in_h as isize {
                        continue;
                    }
                    let dst = &mut channel[r as usize * g.in_w..(r as usize + 1) * g.in_w];
                    for j in 0..g.out_w {
                        let s = (j * g.stride + b) as isize - g.padding as isize;
                        if s >= 0 && (s as usize) < g.in_w {
                            dst[s as usize] += row[i * g.out_w + j];
                        }
                    }
                }
            }
        }
    }
}

/// Largest `filters × in_channels` handled by the row-wise path.
const ROWWISE_MAX_PAIRS: usize = 9;

fn use_rowwise(g: &ConvGeometry) -> bool {
    g.stride == 1 && g.filters * g.in_channels <= ROWWISE_MAX_PAIRS
}

#[derive(Debug, Clone)]
enum Saved {
    /// Unfolded input of every sample, `[N][C·k·k × out_h·out_w]`.
    Cols(Vec<f32>),
    Input(Vec<f32>),
}

/// Forward state retained for the backward pass.
#[derive(Debug, Clone)]
pub struct ConvCache {
    pub geometry: ConvGeometry,
    saved: Saved,
}

/// Output columns `j` whose input column `j + b − pad` lies inside the row.
fn col_span(g: &ConvGeometry, b: usize) -> (usize, usize) {
    let lo = g.padding.saturating_sub(b);
    let hi = (g.in_w + g.padding).saturating_sub(b).min(g.out_w);
    (lo, hi.max(lo))
}

/// Input row feeding output row `i` through kernel row `a`, if inside.
fn src_row(g: &ConvGeometry, i: usize, a: usize) -> Option<usize> {
    (i + a).checked_sub(g.padding).filter(|&r| r < g.in_h)
}

fn rowwise_forward(x: &[f32], w: &[f32], bias: &[f32], g: &ConvGeometry, o: &mut [f32]) {
    let k = g.kernel;
    let (ip, op) = (g.in_h * g.in_w, g.out_plane());
    for n in 0..g.batch {
        for f in 0..g.filters {
            let out = &mut o[(n * g.filters + f) * op..][..op];
            out.fill(bias[f]);
            for c in 0..g.in_channels {
                let src = &x[(n * g.in_channels + c) * ip..][..ip];
                let wk = &w[(f * g.in_channels + c) * k * k..][..k * k];
                for i in 0..g.out_h {
                    let dst = &mut out[i * g.out_w..(i + 1) * g.out_w];
                    for a in 0..k {
                        let Some(r) = src_row(g, i, a) else { continue };
                        let row = &src[r * g.in_w..(r + 1) * g.in_w];
                        for b in 0..k {
                            let (lo, hi) = col_span(g, b);
                            let wv = wk[a * k + b];
                            let s0 = lo + b - g.padding;
                            for (d, &v) in dst[lo..hi].iter_mut().zip(&row[s0..s0 + hi - lo]) {
                                *d += wv * v;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn rowwise_backward(
    x: &[f32],
    w: &[f32],
    gout: &[f32],
    g: &ConvGeometry,
    grad_in: &mut [f32],
    grad_w: &mut [f32],
) {
    let k = g.kernel;
    let (ip, op) = (g.in_h * g.in_w, g.out_plane());
    for n in 0..g.batch {
        for f in 0..g.filters {
            let go = &gout[(n * g.filters + f) * op..][..op];
            for c in 0..g.in_channels {
                let base = (n * g.in_channels + c) * ip;
                let src = &x[base..base + ip];
                let gi = &mut grad_in[base..base + ip];
                let widx = (f * g.in_channels + c) * k * k;
                for i in 0..g.out_h {
                    let grow = &go[i * g.out_w..(i + 1) * g.out_w];
                    for a in 0..k {
                        let Some(r) = src_row(g, i, a) else { continue };
                        for b in 0..k {
                            let (lo, hi) = col_span(g, b);
                            let s0 = r * g.in_w + lo + b - g.padding;
                            let wv = w[widx + a * k + b];
                            let mut dot = 0.0f32;
                            for ((d, &v), &gv) in gi[s0..s0 + hi - lo]
                                .iter_mut()
                                .zip(&src[s0..s0 + hi - lo])
                                .zip(&grow[lo..hi])
                            {
                                *d += wv * gv;
                                dot += gv * v;
                            }
                            grad_w[widx + a * k + b] += dot;
                        }
                    }
                }
            }
        }
    }
}

/// Forward pass (im2col + GEMM, or the row-wise path for tiny channel
/// counts). Returns the output and the cache needed by [`conv2d_backward`].
pub fn conv2d_forward(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<(Tensor, ConvCache)> {
    let g = ConvGeometry::resolve(input, weight, bias, stride, padding)?;
    let mut out = Tensor::zeros(&g.output_shape());
    if use_rowwise(&g) {
        rowwise_forward(input.data(), weight.data(), bias.data(), &g, out.data_mut());
        let saved = Saved::Input(input.data().to_vec());
        return Ok((out, ConvCache { geometry: g, saved }));
    }
    let patch = g.patch_len();
    let plane = g.out_plane();
    let sample_in = g.in_channels * g.in_h * g.in_w;
    let sample_out = g.filters * plane;
    let mut cols = vec![0.0f32; g.batch * patch * plane];
    let o = out.data_mut();
    for n in 0..g.batch {
        let col = &mut cols[n * patch * plane..(n + 1) * patch * plane];
        im2col(&input.data()[n * sample_in..(n + 1) * sample_in], &g, col);
        let dst = &mut o[n * sample_out..(n + 1) * sample_out];
        for (f, row) in dst.chunks_exact_mut(plane).enumerate() {
            row.fill(bias.data()[f]);
        }
        sgemm(g.filters, patch, plane, weight.data(), (patch, 1), col, (plane, 1), 1.0, dst);
    }
    Ok((out, ConvCache { geometry: g, saved: Saved::Cols(cols) }))
}

/// Gradients `(d input, d weight, d bias)` for the call that produced `cache`.
pub fn conv2d_backward(grad_out: &Tensor, cache: &ConvCache, weight: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let g = &cache.geometry;
    grad_out.expect_shape(&g.output_shape(), "conv grad_out")?;
    weight.expect_shape(&[g.filters, g.in_channels, g.kernel, g.kernel], "conv weight")?;
    let patch = g.patch_len();
    let plane = g.out_plane();
    let sample_in = g.in_channels * g.in_h * g.in_w;
    let sample_out = g.filters * plane;

    let mut grad_w = Tensor::zeros(weight.shape());
    let mut grad_b = Tensor::zeros(&[g.filters]);
    let mut grad_in = Tensor::zeros(&[g.batch, g.in_channels, g.in_h, g.in_w]);
    for n in 0..g.batch {
        let gout = &grad_out.data()[n * sample_out..(n + 1) * sample_out];
        for (f, row) in gout.chunks_exact(plane).enumerate() {
            grad_b.data_mut()[f] += row.iter().sum::<f32>();
        }
    }
    match &cache.saved {
        Saved::Input(x) => rowwise_backward(
            x,
            weight.data(),
            grad_out.data(),
            g,
            grad_in.data_mut(),
            grad_w.data_mut(),
        ),
        Saved::Cols(cols) => {
            let mut grad_col = vec![0.0f32; patch * plane];
            for n in 0..g.batch {
                let gout = &grad_out.data()[n * sample_out..(n + 1) * sample_out];
                let col = &cols[n * patch * plane..(n + 1) * patch * plane];
                // dW[F×K] += gout[F×P] · colᵀ[P×K]
                sgemm(g.filters, plane, patch, gout, (plane, 1), col, (1, plane), 1.0, grad_w.data_mut());
                // dcol[K×P] = Wᵀ[K×F] · gout[F×P]
                sgemm(patch, g.filters, plane, weight.data(), (1, patch), gout, (plane, 1), 0.0, &mut grad_col);
                col2im(&grad_col, g, &mut grad_in.data_mut()[n * sample_in..(n + 1) * sample_in]);
            }
        }
    }
    Ok((grad_in, grad_w, grad_b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_gives_bias() {
        let x = Tensor::zeros(&[1, 1, 3, 3]);
        let w = Tensor::filled(&[1, 1, 2, 2], 0.7);
        let b = Tensor::new(vec![1], vec![0.5]).unwrap();
        let (y, _) = conv2d_forward(&x, &w, &b, 1, 0).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert!(y.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn scalar_kernel_scales_input() {
        let x = Tensor::new(vec![1, 1, 2, 2], vec![1., 2., 3., 4.]).unwrap();
        let w = Tensor::new(vec![1, 1, 1, 1], vec![2.]).unwrap();
        let b = Tensor::zeros(&[1]);
        let (y, cache) = conv2d_forward(&x, &w, &b, 1, 0).unwrap();
        assert_eq!(y.data(), &[2., 4., 6., 8.]);
        assert_eq!(conv2d_forward_direct(&x, &w, &b, 1, 0).unwrap().data(), &[2., 4., 6., 8.]);

        let (_, gw, gb) = conv2d_backward(&Tensor::filled(&[1, 1, 2, 2], 1.0), &cache, &w).unwrap();
        assert_eq!(gw.data(), &[10.]);
        assert_eq!(gb.data(), &[4.]);
    }

    #[test]
    fn zero_grad_out_gives_zero_gradients() {
        let x = Tensor::new(vec![1, 2, 4, 4], (0..32).map(|v| v as f32 * 0.1).collect()).unwrap();
        let w = Tensor::filled(&[3, 2, 3, 3], 0.2);
        let b = Tensor::zeros(&[3]);
        let (y, cache) = conv2d_forward(&x, &w, &b, 1, 1).unwrap();
        let (gi, gw, gb) = conv2d_backward(&Tensor::zeros(y.shape()), &cache, &w).unwrap();
        for t in [gi, gw, gb] {
            assert!(t.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn configuration_errors() {
        let x = Tensor::zeros(&[1, 1, 5, 5]);
        let b = Tensor::zeros(&[1]);
        // (5 - 2) / 2 is not integral
        assert!(matches!(
            conv2d_forward(&x, &Tensor::zeros(&[1, 1, 2, 2]), &b, 2, 0),
            Err(Error::Config(_))
        ));
        // channel mismatch
        assert!(matches!(
            conv2d_forward(&x, &Tensor::zeros(&[1, 2, 3, 3]), &b, 1, 0),
            Err(Error::Shape(_))
        ));
        // kernel larger than padded input
        assert!(conv2d_forward(&x, &Tensor::zeros(&[1, 1, 7, 7]), &b, 1, 0).is_err());
    }

    #[test]
    fn same_padding_preserves_shape_for_odd_kernels() {
        for k in [1usize, 3, 5, 7, 9] {
            let x = Tensor::zeros(&[2, 1, 12, 10]);
            let w = Tensor::zeros(&[1, 1, k, k]);
            let (y, _) = conv2d_forward(&x, &w, &Tensor::zeros(&[1]), 1, (k - 1) / 2).unwrap();
            assert_eq!(y.shape(), &[2, 1, 12, 10]);
        }
    }
}
