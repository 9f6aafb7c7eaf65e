use std::fmt;

use crate::engine::LayerSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// LeNet-5 backbone alone.
    LeNet5,
    /// Precortical module followed by the same LeNet-5 backbone.
    RetiLeNet,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::LeNet5 => "lenet5",
            Architecture::RetiLeNet => "retilenet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lenet5" | "lenet" | "lenet-5" => Ok(Architecture::LeNet5),
            "retilenet" => Ok(Architecture::RetiLeNet),
            other => Err(Error::Config(format!("unknown model {other:?} (lenet5, retilenet)"))),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const PRECORTICAL_BLOCKS: usize = 3;
pub const DEFAULT_KERNEL_SIZE: usize = 7;
pub const DEFAULT_DROPOUT: f32 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub name: Architecture,
    pub in_channels: usize,
    pub input_size: usize,
    /// Precortical kernel size (odd). Stored but unused by LeNet-5.
    pub kernel_size: usize,
    pub dropout_p: f32,
    pub num_classes: usize,
}

impl ModelSpec {
    pub fn lenet5(in_channels: usize, input_size: usize) -> Self {
        ModelSpec {
            name: Architecture::LeNet5,
            in_channels,
            input_size,
            kernel_size: DEFAULT_KERNEL_SIZE,
            dropout_p: DEFAULT_DROPOUT,
            num_classes: 10,
        }
    }

    pub fn retilenet(in_channels: usize, input_size: usize, kernel_size: usize, dropout_p: f32) -> Self {
        ModelSpec {
            name: Architecture::RetiLeNet,
            in_channels,
            input_size,
            kernel_size,
            dropout_p,
            num_classes: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "precortical kernel size must be odd, got {}",
                self.kernel_size
            )));
        }
        if !matches!(self.in_channels, 1 | 3) {
            return Err(Error::Config(format!("in_channels must be 1 or 3, got {}", self.in_channels)));
        }
        if !matches!(self.input_size, 28 | 32) {
            return Err(Error::Config(format!("unsupported input size {} (28 or 32)", self.input_size)));
        }
        if self.num_classes != 10 {
            return Err(Error::Config(format!("backbone has 10 outputs, got num_classes {}", self.num_classes)));
        }
        if self.kernel_size > self.input_size {
            return Err(Error::Config(format!(
                "kernel size {} exceeds input size {}",
                self.kernel_size, self.input_size
            )));
        }
        LayerSpec::Dropout { p: self.dropout_p }.validate()
    }

    /// Tagged layer list. The precortical module is three channel-preserving
    /// `conv(k, pad (k−1)/2) → dropout → tanh` blocks; the backbone is the
    /// classic LeNet-5 with ReLU and max-pooling, its first convolution
    /// padded by 2 on 28×28 inputs so both geometries reach a 16×5×5 map.
    pub fn layers(&self) -> Result<Vec<(String, LayerSpec)>> {
        self.validate()?;
        let n = self.in_channels;
        let mut layers = Vec::new();
        if self.name == Architecture::RetiLeNet {
            for i in 1..=PRECORTICAL_BLOCKS {
                layers.push((
                    format!("precortical.conv{i}"),
                    LayerSpec::Conv2d {
                        in_channels: n,
                        out_channels: n,
                        kernel_size: self.kernel_size,
                        stride: 1,
                        padding: (self.kernel_size - 1) / 2,
                    },
                ));
                layers.push((format!("precortical.dropout{i}"), LayerSpec::Dropout { p: self.dropout_p }));
                layers.push((format!("precortical.tanh{i}"), LayerSpec::Tanh));
            }
        }
        let conv = |cin, cout, padding| LayerSpec::Conv2d {
            in_channels: cin,
            out_channels: cout,
            kernel_size: 5,
            stride: 1,
            padding,
        };
        let pool = LayerSpec::MaxPool2d { size: 2, stride: 2 };
        let dense = |i, o| LayerSpec::Dense {
            in_features: i,
            out_features: o,
        };
        let first_pad = if self.input_size == 28 { 2 } else { 0 };
        let backbone = [
            ("conv1", conv(n, 6, first_pad)),
            ("relu1", LayerSpec::ReLU),
            ("pool1", pool),
            ("conv2", conv(6, 16, 0)),
            ("relu2", LayerSpec::ReLU),
            ("pool2", pool),
            ("flatten", LayerSpec::Flatten),
            ("fc1", dense(400, 120)),
            ("relu3", LayerSpec::ReLU),
            ("fc2", dense(120, 84)),
            ("relu4", LayerSpec::ReLU),
            ("fc3", dense(84, self.num_classes)),
        ];
        layers.extend(backbone.into_iter().map(|(t, s)| (format!("backbone.{t}"), s)));

        // Walk the shapes once so an inconsistent spec fails here rather
        // than on the first batch.
        let mut shape = vec![1, n, self.input_size, self.input_size];
        for (_, spec) in &layers {
            shape = spec.output_shape(&shape)?;
        }
        debug_assert_eq!(shape, vec![1, self.num_classes]);
        Ok(layers)
    }

    pub fn param_count(&self) -> Result<usize> {
        Ok(self.layers()?.iter().map(|(_, s)| s.param_count()).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_delta_is_three_precortical_convs() {
        for (n, size) in [(1, 28), (3, 32), (1, 32), (3, 28)] {
            for k in [3, 5, 7, 9] {
                let base = ModelSpec::lenet5(n, size).param_count().unwrap();
                let reti = ModelSpec::retilenet(n, size, k, 0.2).param_count().unwrap();
                assert_eq!(reti - base, 3 * (n * n * k * k + n));
            }
        }
    }

    #[test]
    fn rejects_even_kernel_and_odd_sizes() {
        assert!(ModelSpec::retilenet(1, 28, 6, 0.2).validate().is_err());
        assert!(ModelSpec::retilenet(1, 30, 7, 0.2).validate().is_err());
        assert!(ModelSpec::retilenet(2, 28, 7, 0.2).validate().is_err());
        assert!(ModelSpec::retilenet(1, 28, 7, 1.0).validate().is_err());
    }

    #[test]
    fn lenet_has_no_precortical_layers() {
        let layers = ModelSpec::lenet5(1, 28).layers().unwrap();
        assert!(layers.iter().all(|(t, _)| t.starts_with("backbone.")));
        assert_eq!(layers.len(), 12);
    }
}
