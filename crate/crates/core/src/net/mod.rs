//! LeNet-5 and RetiLeNet (LeNet-5 behind a trainable precortical module),
//! checkpointing, training and activation statistics.

pub mod checkpoint;
mod model;
mod spec;
mod stats;
mod train;

pub use model::{accuracy, ForwardOutput, Mode, Model, NamedLayer};
pub use spec::{Architecture, ModelSpec, DEFAULT_DROPOUT, DEFAULT_KERNEL_SIZE, PRECORTICAL_BLOCKS};
pub use stats::{capture_layer_stats, LayerStats};
pub use train::{epoch_seed, train, EpochLog};

use crate::error::Result;
use crate::rng::{stream, Stream};

/// Tag of the first precortical convolution.
pub const FIRST_PRECORTICAL_CONV: &str = "precortical.conv1";

/// Builds a model with weights drawn from the init stream of `seed`.
pub fn build_model(spec: ModelSpec, seed: u64) -> Result<Model> {
    Model::build(spec, &mut stream(seed, Stream::Init))
}
