use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Positive inner disc, negative annulus.
    OnCenter,
    /// Negative inner disc, positive annulus.
    OffCenter,
}

impl Polarity {
    fn sign(self) -> f64 {
        match self {
            Polarity::OnCenter => 1.0,
            Polarity::OffCenter => -1.0,
        }
    }
}

/// Center-surround receptive field: one sign on the disc of radius
/// `rho − epsilon`, the other on the annulus out to `rho`, zero beyond.
/// The grid is `(2R+1) × (2R+1)` cells with `R = ⌊rho / spacing⌋`, centred on
/// the middle cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSurroundKernel {
    pub rho: f64,
    pub epsilon: f64,
    pub polarity: Polarity,
    pub balanced: bool,
    spacing: f64,
    radius_cells: usize,
    center_weight: f64,
    surround_weight: f64,
    grid: Vec<f64>,
}

/// Relative slack when classifying a cell centre that sits exactly on a
/// radius, so that e.g. a centre at distance 3 counts as inside `r ≤ 3`.
const RADIUS_SLACK: f64 = 1e-9;

pub fn build_kernel(
    rho: f64,
    epsilon: f64,
    polarity: Polarity,
    balanced: bool,
    spacing: f64,
) -> Result<CenterSurroundKernel> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Parameter(format!("rho must be positive, got {rho}")));
    }
    if !(epsilon > 0.0 && epsilon < rho) {
        return Err(Error::Parameter(format!(
            "epsilon must lie in (0, rho), got epsilon={epsilon}, rho={rho}"
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parameter(format!("spacing must be positive, got {spacing}")));
    }
    let radius_cells = ((rho / spacing) * (1.0 + RADIUS_SLACK)).floor() as usize;
    let side = 2 * radius_cells + 1;
    let inner = rho - epsilon;
    let r = radius_cells as isize;
    let mut zones = Vec::with_capacity(side * side);
    for a in -r..=r {
        for b in -r..=r {
            zones.push(zone(spacing * ((a * a + b * b) as f64).sqrt(), inner, rho));
        }
    }
    let n_center = zones.iter().filter(|&&z| z == Zone::Center).count();
    let n_surround = zones.iter().filter(|&&z| z == Zone::Surround).count();
    let s = polarity.sign();
    let (center_weight, surround_weight) = if balanced {
        if n_surround == 0 {
            return Err(Error::Parameter(format!(
                "spacing {spacing} too coarse: no grid cell falls in the annulus of width {epsilon}"
            )));
        }
        (s, -s * n_center as f64 / n_surround as f64)
    } else {
        (s, -s)
    };
    let grid = zones
        .iter()
        .map(|z| match z {
            Zone::Center => center_weight,
            Zone::Surround => surround_weight,
            Zone::Outside => 0.0,
        })
        .collect();
    Ok(CenterSurroundKernel {
        rho,
        epsilon,
        polarity,
        balanced,
        spacing,
        radius_cells,
        center_weight,
        surround_weight,
        grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Center,
    Surround,
    Outside,
}

fn zone(r: f64, inner: f64, rho: f64) -> Zone {
    if r <= inner * (1.0 + RADIUS_SLACK) {
        Zone::Center
    } else if r <= rho * (1.0 + RADIUS_SLACK) {
        Zone::Surround
    } else {
        Zone::Outside
    }
}

impl CenterSurroundKernel {
    /// Kernel weight at distance `r` from its centre.
    pub fn value_at(&self, r: f64) -> f64 {
        match zone(r, self.rho - self.epsilon, self.rho) {
            Zone::Center => self.center_weight,
            Zone::Surround => self.surround_weight,
            Zone::Outside => 0.0,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `R`: the grid spans offsets `−R..=R` cells in each direction.
    pub fn radius_cells(&self) -> usize {
        self.radius_cells
    }

    pub fn side(&self) -> usize {
        2 * self.radius_cells + 1
    }

    /// Row-major weights, `side × side`.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn center_weight(&self) -> f64 {
        self.center_weight
    }

    pub fn surround_weight(&self) -> f64 {
        self.surround_weight
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.center_weight.abs().max(self.surround_weight.abs())
    }
}
