use crate::engine::Tensor;
use crate::error::{Error, Result};

/// Test-time perturbation: a mean offset `mu` followed by a contrast
/// division `sigma`. `(0, 1)` is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub mu: f32,
    pub sigma: f32,
}

impl PerturbationSpec {
    pub const IDENTITY: PerturbationSpec = PerturbationSpec { mu: 0.0, sigma: 1.0 };

    pub fn new(mu: f32, sigma: f32) -> Result<Self> {
        let s = PerturbationSpec { mu, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn offset(mu: f32) -> Self {
        PerturbationSpec { mu, sigma: 1.0 }
    }

    pub fn contrast(sigma: f32) -> Result<Self> {
        Self::new(0.0, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::Parameter(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Parameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.mu == 0.0 && self.sigma == 1.0
    }

    /// Offset first, then contrast. Identity components are skipped so the
    /// identity spec returns the input bitwise.
    pub fn apply(&self, images: &Tensor) -> Result<Tensor> {
        self.validate()?;
        let shifted = if self.mu == 0.0 { images.clone() } else { apply_offset(images, self.mu) };
        if self.sigma == 1.0 {
            Ok(shifted)
        } else {
            apply_contrast(&shifted, self.sigma)
        }
    }
}

/// `x ← x − mu` on every pixel, without clamping.
pub fn apply_offset(images: &Tensor, mu: f32) -> Tensor {
    images.map(|x| x - mu)
}

/// `x ← (x − X̄)/sigma + X̄` with `X̄` the mean of each image over all of its
/// channels and pixels; no clamping.
pub fn apply_contrast(images: &Tensor, sigma: f32) -> Result<Tensor> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let n = images.shape().first().copied().unwrap_or(0);
    let mut out = images.clone();
    if n == 0 || out.is_empty() {
        return Ok(out);
    }
    let per = out.len() / n;
    for img in out.data_mut().chunks_exact_mut(per) {
        let mean = (img.iter().map(|&v| v as f64).sum::<f64>() / per as f64) as f32;
        for v in img.iter_mut() {
            *v = (*v - mean) / sigma + mean;
        }
    }
    Ok(out)
}
