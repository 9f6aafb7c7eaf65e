use std::f64::consts::PI;

use rand::Rng;

use super::field::ScalarField;
use super::kernel::CenterSurroundKernel;
use super::transform::ganglionic_transform;
use crate::error::{Error, Result};

/// Relative slack allowed for discretisation when comparing the observed
/// difference quotient with the analytic constant.
pub const LIPSCHITZ_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub rho: f64,
    pub epsilon: f64,
    pub m: f64,
    pub n: f64,
    pub l_bound: f64,
    pub l_empirical: f64,
    pub num_pairs: usize,
    pub pass: bool,
}

/// `L = (M − N) · max(π·rho, 2·rho)` for a kernel with weights of unit
/// magnitude. The `π·rho` term covers points at least `2·rho` apart, where
/// the two discs are disjoint; the `2·rho` term bounds nearby points through
/// `area(A∖B) ≤ 2·rho·d`.
pub fn lipschitz_bound(rho: f64, epsilon: f64, m: f64, n: f64) -> Result<f64> {
    if !(m >= n) {
        return Err(Error::Parameter(format!("bounds require N <= M, got N={n}, M={m}")));
    }
    if !(rho > 0.0) || !(epsilon > 0.0 && epsilon < rho) {
        return Err(Error::Parameter(format!(
            "need 0 < epsilon < rho, got epsilon={epsilon}, rho={rho}"
        )));
    }
    Ok((m - n) * (PI * rho).max(2.0 * rho))
}

/// Constant that holds for the signed kernel itself rather than for its
/// support: moving the centre by `d` changes the kernel on two crescents of
/// area about `4·r·d` each (outer rim, weight jump 1; inner rim, weight
/// jump 2), and an adversarial field in `[N, M]` collects half of that L¹
/// change, giving `(M − N) · (2·rho + 4·(rho − epsilon))`.
pub fn signed_kernel_lipschitz_bound(rho: f64, epsilon: f64, m: f64, n: f64) -> Result<f64> {
    lipschitz_bound(rho, epsilon, m, n)?;
    Ok((m - n) * (2.0 * rho + 4.0 * (rho - epsilon)))
}

/// Area of `A ∖ B` for two discs of radius `rho` whose centres are `d`
/// apart.
pub fn disc_difference_area(d: f64, rho: f64) -> f64 {
    let disc = PI * rho * rho;
    if d >= 2.0 * rho {
        return disc;
    }
    let lens = 2.0 * rho * rho * (d / (2.0 * rho)).acos() - (d / 2.0) * (4.0 * rho * rho - d * d).sqrt();
    (disc - lens).max(0.0)
}

/// Transforms `field`, then samples `num_pairs` pairs of valid-interior grid
/// points and reports the largest `|S(p) − S(q)| / ‖p − q‖`. Half the pairs
/// are local (offsets up to `2·rho`, where the quotient is largest), half
/// uniform over the interior. The bound is scaled by the largest kernel
/// weight magnitude, which is 1 unless the kernel is balanced.
pub fn verify_lipschitz<R: Rng + ?Sized>(
    field: &ScalarField,
    kernel: &CenterSurroundKernel,
    num_pairs: usize,
    rng: &mut R,
) -> Result<LipschitzReport> {
    let (n, m) = field
        .bounds()
        .ok_or_else(|| Error::Parameter("field has no declared bounds (N, M)".into()))?;
    let s = ganglionic_transform(field, kernel)?;
    let (w, h) = (s.width(), s.height());
    if w * h < 2 {
        return Err(Error::Parameter("valid interior has fewer than two points".into()));
    }
    let l_bound = lipschitz_bound(kernel.rho, kernel.epsilon, m, n)? * kernel.max_abs_weight();
    let reach = ((2.0 * kernel.rho / s.spacing()).ceil() as isize).max(1);
    let mut l_empirical = 0.0f64;
    for k in 0..num_pairs {
        let (pi, pj) = (rng.gen_range(0..h), rng.gen_range(0..w));
        let (qi, qj) = loop {
            let (qi, qj) = if k % 2 == 0 {
                (
                    pi as isize + rng.gen_range(-reach..=reach),
                    pj as isize + rng.gen_range(-reach..=reach),
                )
            } else {
                (rng.gen_range(0..h) as isize, rng.gen_range(0..w) as isize)
            };
            let inside = qi >= 0 && qj >= 0 && (qi as usize) < h && (qj as usize) < w;
            if inside && (qi as usize, qj as usize) != (pi, pj) {
                break (qi as usize, qj as usize);
            }
        };
        let di = pi as f64 - qi as f64;
        let dj = pj as f64 - qj as f64;
        let dist = s.spacing() * (di * di + dj * dj).sqrt();
        l_empirical = l_empirical.max((s.get(pi, pj) - s.get(qi, qj)).abs() / dist);
    }
    Ok(LipschitzReport {
        rho: kernel.rho,
        epsilon: kernel.epsilon,
        m,
        n,
        l_bound,
        l_empirical,
        num_pairs,
        pass: l_empirical <= l_bound * (1.0 + LIPSCHITZ_TOLERANCE),
    })
}
