use super::model::Model;
use crate::engine::Tensor;
use crate::error::{Error, Result};

/// Box-plot summary of a set of activation values.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStats {
    pub layer_tag: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// `max(q1 − 1.5·IQR, min)`
    pub whisker_low: f64,
    /// `min(q3 + 1.5·IQR, max)`
    pub whisker_high: f64,
    pub mean: f64,
    pub std: f64,
    pub sample_count: usize,
}

/// Linear-interpolation quantile of sorted data (the `(n−1)·q` rule).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl LayerStats {
    pub fn from_values(layer_tag: impl Into<String>, values: &[f32]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("no values to summarize".into()));
        }
        let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        sorted.sort_unstable_by(|a, b| a.total_cmp(b));
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (q1, median, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
        let iqr = q3 - q1;
        Ok(LayerStats {
            layer_tag: layer_tag.into(),
            q1,
            median,
            q3,
            whisker_low: (q1 - 1.5 * iqr).max(sorted[0]),
            whisker_high: (q3 + 1.5 * iqr).min(sorted[sorted.len() - 1]),
            mean,
            std: var.sqrt(),
            sample_count: sorted.len(),
        })
    }
}

/// Summaries of the tagged layer's input ("before") and output ("after")
/// over the whole batch, in evaluation mode.
pub fn capture_layer_stats(model: &Model, images: &Tensor, layer_tag: &str) -> Result<(LayerStats, LayerStats)> {
    let (input, output) = model.layer_io(images, layer_tag)?;
    Ok((
        LayerStats::from_values(format!("{layer_tag}:input"), input.data())?,
        LayerStats::from_values(format!("{layer_tag}:output"), output.data())?,
    ))
}
