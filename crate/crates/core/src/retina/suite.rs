//! Batch checks of the retina model shared by the command line and the
//! acceptance harness.

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::Rng;

use super::field::ScalarField;
use super::kernel::{build_kernel, Polarity};
use super::lipschitz::{verify_lipschitz, LipschitzReport};
use super::orientation::{bump, bump_peak, directional_response, gradient, orientation_field};
use crate::error::Result;
use crate::rng::seeded;

/// `(rho, epsilon)` pairs exercised by [`lipschitz_suite`].
pub const SUITE_GEOMETRIES: [(f64, f64); 3] = [(3.0, 1.0), (5.0, 2.0), (7.0, 3.0)];
pub const SUITE_SPACING: f64 = 0.25;

/// Discontinuous field in `[N, M]`: i.i.d. two-level cells, i.i.d. uniform
/// cells, or random piecewise-constant blocks, chosen by `kind % 3`.
pub fn random_discontinuous_field<R: Rng + ?Sized>(n: usize, spacing: f64, kind: usize, rng: &mut R) -> Result<ScalarField> {
    let lo = rng.gen_range(-2.0..1.0f64);
    let hi = lo + rng.gen_range(0.5..3.0f64);
    let values: Vec<f64> = match kind % 3 {
        0 => (0..n * n).map(|_| if rng.gen::<bool>() { hi } else { lo }).collect(),
        1 => (0..n * n).map(|_| rng.gen_range(lo..=hi)).collect(),
        _ => {
            let block = rng.gen_range(2..12usize);
            let blocks = n.div_ceil(block);
            let levels: Vec<f64> = (0..blocks * blocks).map(|_| rng.gen_range(lo..=hi)).collect();
            (0..n * n).map(|k| levels[(k / n / block) * blocks + (k % n) / block]).collect()
        }
    };
    ScalarField::new(n, n, spacing, values)?.with_bounds(lo, hi)
}

/// One report per (geometry, field): `fields` random discontinuous fields
/// for each of [`SUITE_GEOMETRIES`] at [`SUITE_SPACING`].
pub fn lipschitz_suite(seed: u64, fields: usize, pairs: usize) -> Result<Vec<LipschitzReport>> {
    let mut rng = seeded(seed);
    let mut reports = Vec::with_capacity(SUITE_GEOMETRIES.len() * fields);
    for &(rho, eps) in &SUITE_GEOMETRIES {
        let kernel = build_kernel(rho, eps, Polarity::OnCenter, false, SUITE_SPACING)?;
        for k in 0..fields {
            let field = random_discontinuous_field(kernel.side() + 40, SUITE_SPACING, k, &mut rng)?;
            reports.push(verify_lipschitz(&field, &kernel, pairs, &mut rng)?);
        }
    }
    Ok(reports)
}

/// Sum of a few random plane waves sampled on an `n × n` grid.
pub fn random_smooth_field<R: Rng + ?Sized>(n: usize, spacing: f64, rng: &mut R) -> Result<ScalarField> {
    let waves: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(0.0..TAU),
            ]
        })
        .collect();
    ScalarField::centered(n, spacing, |x, y| {
        waves.iter().map(|w| w[0] * (w[1] * x + w[2] * y + w[3]).sin()).sum()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxReport {
    pub fields: usize,
    pub regular_points: usize,
    /// Largest angular distance between closed form and grid argmax.
    pub max_gap: f64,
    /// Largest number of grid angles tied for the maximum at one point.
    pub max_tied: usize,
    pub steps: usize,
    pub pass: bool,
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Closed-form orientation against the argmax over `steps` equally spaced
/// angles on `fields` random smooth fields. Passes when every regular point
/// agrees within one grid step and the maximisers form at most two
/// adjacent grid angles.
pub fn argmax_suite(seed: u64, fields: usize, steps: usize) -> Result<ArgmaxReport> {
    let mut rng = seeded(seed);
    let table: Vec<(f64, f64)> = (0..steps).map(|k| (TAU * k as f64 / steps as f64).sin_cos()).collect();
    let step = TAU / steps as f64;
    let (mut max_gap, mut max_tied, mut regular_points) = (0.0f64, 0usize, 0usize);
    let mut adjacent = true;
    for _ in 0..fields {
        let f = random_smooth_field(16, 0.4, &mut rng)?;
        let of = orientation_field(&f, None);
        let (fx, fy) = gradient(&f);
        for k in 0..fx.len() {
            if !of.regular_mask[k] {
                continue;
            }
            regular_points += 1;
            let z: Vec<f64> = table.iter().map(|&(s, c)| -s * fx[k] + c * fy[k]).collect();
            let best = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let slack = 1e-12 * fx[k].hypot(fy[k]);
            let tied: Vec<usize> = (0..steps).filter(|&s| z[s] >= best - slack).collect();
            max_tied = max_tied.max(tied.len());
            if tied.len() == 2 {
                let d = tied[1] - tied[0];
                adjacent &= d == 1 || d == steps - 1;
            }
            let arg = tied[0] as f64 * step;
            max_gap = max_gap.max(angle_gap(arg, of.theta[k]));
        }
    }
    Ok(ArgmaxReport {
        fields,
        regular_points,
        max_gap,
        max_tied,
        steps,
        pass: max_gap <= step && max_tied <= 2 && adjacent,
    })
}

/// The four angles shown for the bump: π/4, 3π/4, 7π/4, 5π/4.
pub const BUMP_ANGLES: [f64; 4] = [FRAC_PI_4, 3.0 * FRAC_PI_4, 7.0 * FRAC_PI_4, 5.0 * FRAC_PI_4];

#[derive(Debug, Clone, PartialEq)]
pub struct BumpPanel {
    pub theta: f64,
    pub response: ScalarField,
    /// Location of the largest response.
    pub peak: (f64, f64),
    /// Where the analytic argument puts it.
    pub expected: (f64, f64),
    pub peak_radius: f64,
    pub pass: bool,
}

/// Samples [`bump`] on an `n × n` grid centred at the origin and computes its
/// directional responses for [`BUMP_ANGLES`]. A panel passes when the peak
/// lies in the expected quadrant within two cells of the circle of radius 5.
pub fn bump_panels(n: usize, spacing: f64) -> Result<(ScalarField, Vec<BumpPanel>)> {
    let field = ScalarField::centered(n, spacing, bump)?;
    let panels = BUMP_ANGLES
        .iter()
        .map(|&theta| {
            let response = directional_response(&field, theta)?;
            let mut best = (f64::NEG_INFINITY, 0);
            for (k, &v) in response.values().iter().enumerate() {
                if v > best.0 {
                    best = (v, k);
                }
            }
            let peak = response.coords(best.1 / n, best.1 % n);
            let expected = bump_peak(theta);
            let peak_radius = peak.0.hypot(peak.1);
            let quadrant = peak.0.signum() == expected.0.signum() && peak.1.signum() == expected.1.signum();
            let pass = quadrant && (peak_radius - 5.0).abs() <= 2.0 * spacing;
            Ok(BumpPanel { theta, response, peak, expected, peak_radius, pass })
        })
        .collect::<Result<_>>()?;
    Ok((field, panels))
}
