use std::time::Instant;

use super::model::{accuracy, Model};
use crate::data::{shuffled_indices, Dataset};
use crate::engine::loss::softmax_cross_entropy;
use crate::engine::{adam_step, AdamState, TrainConfig};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub test_accuracy: Option<f64>,
    /// Wall-clock time; the only non-reproducible field.
    pub seconds: f64,
}

/// Shuffle seed for one epoch, derived from the run seed.
pub fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Mini-batch ADAM training. Every random choice (dropout masks, batch
/// order) is drawn from streams of `config.seed`, so two runs with the same
/// model, data and config produce bitwise-identical parameters.
///
/// `on_epoch` is called after each epoch; a non-finite batch loss aborts
/// with [`Error::Divergence`].
pub fn train(
    model: &mut Model,
    train_set: &Dataset,
    test_set: Option<&Dataset>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<Vec<EpochLog>> {
    config.validate()?;
    let (c, h, _) = train_set.image_shape();
    if c != model.spec().in_channels || h != model.spec().input_size {
        return Err(Error::Config(format!(
            "{} model expects {}x{}x{} images, dataset {} has {c}x{h}x{h}",
            model.spec().name,
            model.spec().in_channels,
            model.spec().input_size,
            model.spec().input_size,
            train_set.name
        )));
    }
    let mut dropout_rng = stream(config.seed, Stream::Dropout);
    let mut state = AdamState::new(model.params());
    let mut logs = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let order = shuffled_indices(train_set.len(), epoch_seed(config.seed, epoch));
        let mut loss_sum = 0.0f64;
        let mut seen = 0usize;
        for (batch_no, idx) in order.chunks(config.batch_size).enumerate() {
            let images = train_set.images.gather_outer(idx)?;
            let labels: Vec<usize> = idx.iter().map(|&i| train_set.labels[i] as usize).collect();
            let (logits, caches) = model.forward_train(&images, &mut dropout_rng)?;
            let (loss, grad) = softmax_cross_entropy(&logits, &labels)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, batch: batch_no });
            }
            let grads = model.backward(&caches, &grad)?;
            adam_step(&mut model.params_mut(), &grads, &mut state, config)?;
            loss_sum += loss as f64 * idx.len() as f64;
            seen += idx.len();
        }
        let test_accuracy = test_set
            .map(|t| accuracy(model, &t.images, &t.labels))
            .transpose()?;
        let log = EpochLog {
            epoch,
            mean_loss: loss_sum / seen as f64,
            test_accuracy,
            seconds: started.elapsed().as_secs_f64(),
        };
        on_epoch(&log);
        logs.push(log);
    }
    Ok(logs)
}
