use rand::Rng;

use super::spec::ModelSpec;
use crate::engine::loss::argmax_rows;
use crate::engine::{Layer, LayerCache, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedLayer {
    pub tag: String,
    pub layer: Layer,
}

#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub logits: Tensor,
    /// Output of the tapped layer, when a tap was requested.
    pub tapped: Option<Tensor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    layers: Vec<NamedLayer>,
}

impl Model {
    pub fn build<R: Rng + ?Sized>(spec: ModelSpec, rng: &mut R) -> Result<Self> {
        let layers = spec
            .layers()?
            .into_iter()
            .map(|(tag, s)| Ok(NamedLayer { tag, layer: Layer::init(s, rng)? }))
            .collect::<Result<_>>()?;
        Ok(Model { spec, layers })
    }

    pub(crate) fn from_layers(spec: ModelSpec, layers: Vec<NamedLayer>) -> Self {
        Model { spec, layers }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[NamedLayer] {
        &self.layers
    }

    pub fn layer(&self, tag: &str) -> Result<&Layer> {
        self.layers
            .iter()
            .find(|l| l.tag == tag)
            .map(|l| &l.layer)
            .ok_or_else(|| Error::TagNotFound(tag.to_string()))
    }

    fn position(&self, tag: &str) -> Result<usize> {
        self.layers
            .iter()
            .position(|l| l.tag == tag)
            .ok_or_else(|| Error::TagNotFound(tag.to_string()))
    }

    /// Parameter tensors in layer order, each with its `<tag>.<weight|bias>`
    /// name.
    pub fn named_params(&self) -> Vec<(String, &Tensor)> {
        self.layers
            .iter()
            .flat_map(|l| {
                l.layer
                    .params()
                    .iter()
                    .zip(["weight", "bias"])
                    .map(move |(p, kind)| (format!("{}.{kind}", l.tag), p))
            })
            .collect()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.layer.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.layer.params_mut()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn check_input(&self, batch: &Tensor) -> Result<()> {
        let (_, c, h, w) = batch.dims4()?;
        let s = &self.spec;
        if c != s.in_channels || h != s.input_size || w != s.input_size {
            return Err(Error::Shape(format!(
                "{} expects [N, {}, {}, {}] input, got {:?}",
                s.name,
                s.in_channels,
                s.input_size,
                s.input_size,
                batch.shape()
            )));
        }
        Ok(())
    }

    /// Forward pass. Dropout is active only in [`Mode::Train`]; `tap` names a
    /// layer whose output is returned alongside the logits.
    pub fn forward<R: Rng + ?Sized>(&self, batch: &Tensor, mode: Mode, rng: &mut R, tap: Option<&str>) -> Result<ForwardOutput> {
        self.check_input(batch)?;
        let tap_at = tap.map(|t| self.position(t)).transpose()?;
        let mut x = batch.clone();
        let mut tapped = None;
        for (i, l) in self.layers.iter().enumerate() {
            x = match mode {
                Mode::Eval => l.layer.forward_eval(&x)?,
                Mode::Train => l.layer.forward(&x, true, rng)?.0,
            };
            if tap_at == Some(i) {
                tapped = Some(x.clone());
            }
        }
        Ok(ForwardOutput { logits: x, tapped })
    }

    /// Evaluation-mode logits.
    pub fn logits(&self, batch: &Tensor) -> Result<Tensor> {
        self.check_input(batch)?;
        self.layers.iter().try_fold(batch.clone(), |x, l| l.layer.forward_eval(&x))
    }

    /// Input and output of the tagged layer in evaluation mode.
    pub fn layer_io(&self, batch: &Tensor, tag: &str) -> Result<(Tensor, Tensor)> {
        self.check_input(batch)?;
        let at = self.position(tag)?;
        let mut x = batch.clone();
        for l in &self.layers[..at] {
            x = l.layer.forward_eval(&x)?;
        }
        let y = self.layers[at].layer.forward_eval(&x)?;
        Ok((x, y))
    }

    /// Training forward pass keeping every layer's backward state.
    pub fn forward_train<R: Rng + ?Sized>(&self, batch: &Tensor, rng: &mut R) -> Result<(Tensor, Vec<LayerCache>)> {
        self.check_input(batch)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for l in &self.layers {
            let (y, cache) = l.layer.forward(&x, true, rng)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, caches))
    }

    /// Parameter gradients, in the order of [`Model::params`].
    pub fn backward(&self, caches: &[LayerCache], grad_logits: &Tensor) -> Result<Vec<Tensor>> {
        if caches.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "{} caches for {} layers",
                caches.len(),
                self.layers.len()
            )));
        }
        let mut grads_rev: Vec<Vec<Tensor>> = Vec::with_capacity(self.layers.len());
        let mut g = grad_logits.clone();
        for (l, cache) in self.layers.iter().zip(caches).rev() {
            let (gi, pg) = l.layer.backward(&g, cache)?;
            grads_rev.push(pg);
            g = gi;
        }
        Ok(grads_rev.into_iter().rev().flatten().collect())
    }

    /// Argmax predictions in evaluation mode, processed in chunks.
    pub fn predict(&self, images: &Tensor, chunk: usize) -> Result<Vec<usize>> {
        let n = images.shape()[0];
        let chunk = chunk.max(1);
        let mut out = Vec::with_capacity(n);
        let mut start = 0;
        while start < n {
            let end = (start + chunk).min(n);
            out.extend(argmax_rows(&self.logits(&images.slice_outer(start, end)?)?)?);
            start = end;
        }
        Ok(out)
    }
}

/// Fraction of `labels` matched by the model's argmax predictions.
pub fn accuracy(model: &Model, images: &Tensor, labels: &[u8]) -> Result<f64> {
    let preds = model.predict(images, 500)?;
    if preds.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: preds.len(),
            labels: labels.len(),
        });
    }
    let correct = preds.iter().zip(labels).filter(|(&p, &l)| p == l as usize).count();
    Ok(correct as f64 / labels.len() as f64)
}
