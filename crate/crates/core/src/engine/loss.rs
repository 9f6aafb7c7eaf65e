use crate::engine::Tensor;
use crate::error::{Error, Result};

/// Mean softmax cross-entropy over the batch and its gradient w.r.t. the
/// logits. Each row is shifted by its maximum before exponentiation.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f32, Tensor)> {
    let (n, classes) = logits.dims2()?;
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} logit rows", labels.len())));
    }
    let mut grad = Tensor::zeros(&[n, classes]);
    let mut total = 0.0f64;
    let inv_n = 1.0 / n as f32;
    for (row, (&label, g)) in labels.iter().zip(grad.data_mut().chunks_exact_mut(classes)).enumerate() {
        if label >= classes {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        let z = &logits.data()[row * classes..(row + 1) * classes];
        let max = z.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let sum: f64 = z.iter().map(|&v| ((v - max) as f64).exp()).sum();
        let log_sum = sum.ln();
        total += log_sum - (z[label] - max) as f64;
        for (gi, &v) in g.iter_mut().zip(z) {
            *gi = (((v - max) as f64).exp() / sum) as f32 * inv_n;
        }
        g[label] -= inv_n;
    }
    Ok(((total / n as f64) as f32, grad))
}

/// Index of the largest logit in each row (first on ties).
pub fn argmax_rows(logits: &Tensor) -> Result<Vec<usize>> {
    let (_, classes) = logits.dims2()?;
    Ok(logits
        .data()
        .chunks_exact(classes)
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f32::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                .0
        })
        .collect())
}
