use rand::Rng;

use crate::engine::activation::{
    check_dropout_p, dropout_backward, dropout_forward, relu_backward, relu_forward, tanh_backward, tanh_forward,
};
use crate::engine::conv::{conv2d_backward, conv2d_forward, output_size, ConvCache};
use crate::engine::dense::{dense_backward, dense_forward};
use crate::engine::pool::{maxpool2d_backward, maxpool2d_forward};
use crate::engine::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
        padding: usize,
    },
    MaxPool2d {
        size: usize,
        stride: usize,
    },
    Dense {
        in_features: usize,
        out_features: usize,
    },
    Tanh,
    ReLU,
    Dropout {
        p: f32,
    },
    Flatten,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel_size,
                stride,
                ..
            } => {
                if in_channels == 0 || out_channels == 0 || kernel_size == 0 || stride == 0 {
                    return Err(Error::Config(format!("degenerate conv layer {self:?}")));
                }
            }
            LayerSpec::MaxPool2d { size, stride } => {
                if size == 0 || stride == 0 {
                    return Err(Error::Config(format!("degenerate pool layer {self:?}")));
                }
            }
            LayerSpec::Dense {
                in_features,
                out_features,
            } => {
                if in_features == 0 || out_features == 0 {
                    return Err(Error::Config(format!("degenerate dense layer {self:?}")));
                }
            }
            LayerSpec::Dropout { p } => check_dropout_p(p)?,
            LayerSpec::Tanh | LayerSpec::ReLU | LayerSpec::Flatten => {}
        }
        Ok(())
    }

    /// Shapes of the trainable tensors, in storage order (weight, bias).
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel_size,
                ..
            } => vec![vec![out_channels, in_channels, kernel_size, kernel_size], vec![out_channels]],
            LayerSpec::Dense {
                in_features,
                out_features,
            } => vec![vec![out_features, in_features], vec![out_features]],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes().iter().map(|s| s.iter().product::<usize>()).sum()
    }

    /// Output shape for a given input shape, without running the layer.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let rank4 = |what: &str| -> Result<(usize, usize, usize, usize)> {
            match *input {
                [n, c, h, w] => Ok((n, c, h, w)),
                _ => Err(Error::Shape(format!("{what} expects [N, C, H, W], got {input:?}"))),
            }
        };
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel_size,
                stride,
                padding,
            } => {
                let (n, c, h, w) = rank4("conv")?;
                if c != in_channels {
                    return Err(Error::Shape(format!("conv expects {in_channels} channels, got {c}")));
                }
                Ok(vec![
                    n,
                    out_channels,
                    output_size(h, kernel_size, stride, padding)?,
                    output_size(w, kernel_size, stride, padding)?,
                ])
            }
            LayerSpec::MaxPool2d { size, stride } => {
                let (n, c, h, w) = rank4("pool")?;
                if h < size || w < size || (h - size) % stride != 0 || (w - size) % stride != 0 {
                    return Err(Error::Shape(format!("{h}x{w} does not tile with pool {size}/{stride}")));
                }
                Ok(vec![n, c, (h - size) / stride + 1, (w - size) / stride + 1])
            }
            LayerSpec::Dense {
                in_features,
                out_features,
            } => match *input {
                [n, f] if f == in_features => Ok(vec![n, out_features]),
                _ => Err(Error::Shape(format!("dense expects [N, {in_features}], got {input:?}"))),
            },
            LayerSpec::Flatten => Ok(vec![input[0], input[1..].iter().product()]),
            LayerSpec::Tanh | LayerSpec::ReLU | LayerSpec::Dropout { .. } => Ok(input.to_vec()),
        }
    }
}

/// Per-layer state saved by the training forward pass.
#[derive(Debug, Clone)]
pub enum LayerCache {
    Conv(ConvCache),
    Pool { argmax: Vec<usize>, input_shape: Vec<usize> },
    Dense { input: Tensor },
    Tanh { output: Tensor },
    ReLU { input: Tensor },
    Dropout { mask: Option<Vec<f32>> },
    Flatten { input_shape: Vec<usize> },
}

/// A layer together with its parameters (`[weight, bias]` for conv and
/// dense layers, empty otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    spec: LayerSpec,
    params: Vec<Tensor>,
}

impl Layer {
    /// Kaiming-uniform (fan-in) weights, `U(−√(6/fan_in), √(6/fan_in))`, and
    /// zero biases.
    pub fn init<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let params = spec
            .param_shapes()
            .into_iter()
            .enumerate()
            .map(|(i, shape)| {
                if i == 1 {
                    return Tensor::zeros(&shape);
                }
                let fan_in: usize = shape[1..].iter().product();
                let bound = (6.0 / fan_in as f64).sqrt() as f32;
                let data = (0..shape.iter().product::<usize>())
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect();
                Tensor::new(shape, data).expect("shape from spec")
            })
            .collect();
        Ok(Layer { spec, params })
    }

    pub fn from_params(spec: LayerSpec, params: Vec<Tensor>) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.param_shapes();
        if shapes.len() != params.len() || shapes.iter().zip(&params).any(|(s, p)| s.as_slice() != p.shape()) {
            return Err(Error::Shape(format!(
                "parameters {:?} do not fit layer {spec:?}",
                params.iter().map(|p| p.shape().to_vec()).collect::<Vec<_>>()
            )));
        }
        Ok(Layer { spec, params })
    }

    pub fn spec(&self) -> &LayerSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn forward<R: Rng + ?Sized>(&self, input: &Tensor, training: bool, rng: &mut R) -> Result<(Tensor, LayerCache)> {
        Ok(match self.spec {
            LayerSpec::Conv2d { stride, padding, .. } => {
                let (out, cache) = conv2d_forward(input, &self.params[0], &self.params[1], stride, padding)?;
                (out, LayerCache::Conv(cache))
            }
            LayerSpec::MaxPool2d { size, stride } => {
                let (out, argmax) = maxpool2d_forward(input, size, stride)?;
                (
                    out,
                    LayerCache::Pool {
                        argmax,
                        input_shape: input.shape().to_vec(),
                    },
                )
            }
            LayerSpec::Dense { .. } => (
                dense_forward(input, &self.params[0], &self.params[1])?,
                LayerCache::Dense { input: input.clone() },
            ),
            LayerSpec::Tanh => {
                let out = tanh_forward(input);
                (out.clone(), LayerCache::Tanh { output: out })
            }
            LayerSpec::ReLU => (relu_forward(input), LayerCache::ReLU { input: input.clone() }),
            LayerSpec::Dropout { p } => {
                let (out, mask) = dropout_forward(input, p, training, rng);
                (out, LayerCache::Dropout { mask })
            }
            LayerSpec::Flatten => {
                let out = self.flatten(input)?;
                (
                    out,
                    LayerCache::Flatten {
                        input_shape: input.shape().to_vec(),
                    },
                )
            }
        })
    }

    /// Inference-mode forward without retaining backward state.
    pub fn forward_eval(&self, input: &Tensor) -> Result<Tensor> {
        Ok(match self.spec {
            LayerSpec::Conv2d { stride, padding, .. } => {
                conv2d_forward(input, &self.params[0], &self.params[1], stride, padding)?.0
            }
            LayerSpec::MaxPool2d { size, stride } => maxpool2d_forward(input, size, stride)?.0,
            LayerSpec::Dense { .. } => dense_forward(input, &self.params[0], &self.params[1])?,
            LayerSpec::Tanh => tanh_forward(input),
            LayerSpec::ReLU => relu_forward(input),
            LayerSpec::Dropout { .. } => input.clone(),
            LayerSpec::Flatten => self.flatten(input)?,
        })
    }

    fn flatten(&self, input: &Tensor) -> Result<Tensor> {
        let n = input.shape()[0];
        input.clone().reshape(vec![n, input.len() / n])
    }

    /// Returns the gradient w.r.t. the layer input and the parameter
    /// gradients (same order as [`Layer::params`]).
    pub fn backward(&self, grad_out: &Tensor, cache: &LayerCache) -> Result<(Tensor, Vec<Tensor>)> {
        let mismatch = || Error::Shape(format!("cache does not belong to layer {:?}", self.spec));
        Ok(match (&self.spec, cache) {
            (LayerSpec::Conv2d { .. }, LayerCache::Conv(c)) => {
                let (gi, gw, gb) = conv2d_backward(grad_out, c, &self.params[0])?;
                (gi, vec![gw, gb])
            }
            (LayerSpec::MaxPool2d { .. }, LayerCache::Pool { argmax, input_shape }) => {
                (maxpool2d_backward(grad_out, argmax, input_shape)?, Vec::new())
            }
            (LayerSpec::Dense { .. }, LayerCache::Dense { input }) => {
                let (gi, gw, gb) = dense_backward(grad_out, input, &self.params[0])?;
                (gi, vec![gw, gb])
            }
            (LayerSpec::Tanh, LayerCache::Tanh { output }) => (tanh_backward(grad_out, output)?, Vec::new()),
            (LayerSpec::ReLU, LayerCache::ReLU { input }) => (relu_backward(grad_out, input)?, Vec::new()),
            (LayerSpec::Dropout { .. }, LayerCache::Dropout { mask }) => {
                (dropout_backward(grad_out, mask.as_deref())?, Vec::new())
            }
            (LayerSpec::Flatten, LayerCache::Flatten { input_shape }) => {
                (grad_out.clone().reshape(input_shape.clone())?, Vec::new())
            }
            _ => return Err(mismatch()),
        })
    }
}
