use std::f64::consts::{PI, TAU};

use super::field::ScalarField;
use crate::error::Result;

/// Orientation angle per cell, meaningful only where `regular_mask` holds.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationField {
    pub width: usize,
    pub height: usize,
    pub spacing: f64,
    pub origin: (f64, f64),
    /// Radians in `[0, 2π)`; `0` at non-regular cells.
    pub theta: Vec<f64>,
    pub regular_mask: Vec<bool>,
}

impl OrientationField {
    pub fn regular_count(&self) -> usize {
        self.regular_mask.iter().filter(|&&r| r).count()
    }
}

/// Points `(x, y, θ)` of the lifted surface over the regular cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OrientationLift {
    pub points: Vec<(f64, f64, f64)>,
}

/// `(∂F/∂x, ∂F/∂y)` by central differences, one-sided at the borders and
/// zero along an axis with a single cell.
pub fn gradient(field: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let (w, h, sp) = (field.width(), field.height(), field.spacing());
    let diff = |n: usize, k: usize, at: &dyn Fn(usize) -> f64| -> f64 {
        if n < 2 {
            0.0
        } else if k == 0 {
            (at(1) - at(0)) / sp
        } else if k == n - 1 {
            (at(n - 1) - at(n - 2)) / sp
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * sp)
        }
    };
    let mut fx = Vec::with_capacity(w * h);
    let mut fy = Vec::with_capacity(w * h);
    for i in 0..h {
        for j in 0..w {
            fx.push(diff(w, j, &|c| field.get(i, c)));
            fy.push(diff(h, i, &|r| field.get(r, j)));
        }
    }
    (fx, fy)
}

/// `(sin θ, cos θ)` computed from θ reduced to `[0, π)`, negated for the
/// other half turn, so `θ` and `θ + π` yield exactly opposite pairs.
fn direction(theta: f64) -> (f64, f64) {
    let t = theta.rem_euclid(TAU);
    if t >= PI {
        let u = t - PI;
        (-u.sin(), -u.cos())
    } else {
        (t.sin(), t.cos())
    }
}

/// `ζ(θ) = −sin θ · ∂F/∂x + cos θ · ∂F/∂y` at every cell.
pub fn directional_response(field: &ScalarField, theta: f64) -> Result<ScalarField> {
    let (fx, fy) = gradient(field);
    let (s, c) = direction(theta);
    let values = fx.iter().zip(&fy).map(|(&gx, &gy)| -s * gx + c * gy).collect();
    Ok(ScalarField::new(field.width(), field.height(), field.spacing(), values)?.with_origin(field.origin()))
}

/// Default regularity threshold: `1e-6 · (value range) / spacing`.
pub fn default_grad_tolerance(field: &ScalarField) -> f64 {
    let (lo, hi) = field.range();
    1e-6 * (hi - lo) / field.spacing()
}

/// Closed-form maximiser of `ζ`: `atan2(−∂F/∂x, ∂F/∂y)` in `[0, 2π)`.
pub fn orientation_angle(fx: f64, fy: f64) -> f64 {
    let t = (-fx).atan2(fy).rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Maximiser of `ζ` over `steps` equally spaced angles, first one on ties.
pub fn brute_force_orientation(fx: f64, fy: f64, steps: usize) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..steps {
        let t = TAU * k as f64 / steps as f64;
        let z = -t.sin() * fx + t.cos() * fy;
        if z > best.0 {
            best = (z, t);
        }
    }
    best.1
}

/// Orientation where `‖∇F‖ > grad_tolerance` (default
/// [`default_grad_tolerance`]); other cells are marked non-regular.
pub fn orientation_field(field: &ScalarField, grad_tolerance: Option<f64>) -> OrientationField {
    let tol = grad_tolerance.unwrap_or_else(|| default_grad_tolerance(field));
    let (fx, fy) = gradient(field);
    let mut theta = Vec::with_capacity(fx.len());
    let mut regular_mask = Vec::with_capacity(fx.len());
    for (&gx, &gy) in fx.iter().zip(&fy) {
        let regular = gx.hypot(gy) > tol;
        regular_mask.push(regular);
        theta.push(if regular { orientation_angle(gx, gy) } else { 0.0 });
    }
    OrientationField {
        width: field.width(),
        height: field.height(),
        spacing: field.spacing(),
        origin: field.origin(),
        theta,
        regular_mask,
    }
}

pub fn orientation_lift(of: &OrientationField) -> OrientationLift {
    let mut points = Vec::with_capacity(of.regular_count());
    for i in 0..of.height {
        for j in 0..of.width {
            let k = i * of.width + j;
            if of.regular_mask[k] {
                let x = of.origin.0 + j as f64 * of.spacing;
                let y = of.origin.1 + i as f64 * of.spacing;
                points.push((x, y, of.theta[k]));
            }
        }
    }
    OrientationLift { points }
}

/// The bump `F(x, y) = −1 / (1 + (0.04·x² + 0.04·y²)^100)`: ≈ −1 inside the
/// circle of radius 5, ≈ 0 outside, with a sharp rim.
pub fn bump(x: f64, y: f64) -> f64 {
    -1.0 / (1.0 + (0.04 * x * x + 0.04 * y * y).powi(100))
}

/// Rim point where `ζ(θ)` of [`bump`] peaks: the outward normal equals
/// `(−sin θ, cos θ)`, i.e. the point `5·(−sin θ, cos θ)`.
pub fn bump_peak(theta: f64) -> (f64, f64) {
    let (s, c) = direction(theta);
    (-5.0 * s, 5.0 * c)
}
