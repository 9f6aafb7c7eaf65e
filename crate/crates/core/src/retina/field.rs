use crate::error::{Error, Result};

/// Sampled real field on a regular square grid. Cell `(i, j)` (row `i`,
/// column `j`) sits at `x = origin.0 + j·spacing`, `y = origin.1 + i·spacing`,
/// so `y` grows with the row index, as in image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    spacing: f64,
    origin: (f64, f64),
    values: Vec<f64>,
    bounds: Option<(f64, f64)>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter("field must have at least one cell".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Parameter(format!("spacing must be positive, got {spacing}")));
        }
        if values.len() != width * height {
            return Err(Error::Shape(format!(
                "{} values for a {width}x{height} field",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("field value {v} is not finite")));
        }
        Ok(ScalarField {
            width,
            height,
            spacing,
            origin: (0.0, 0.0),
            values,
            bounds: None,
        })
    }

    /// Samples `f(x, y)` at every cell.
    pub fn from_fn(
        width: usize,
        height: usize,
        spacing: f64,
        origin: (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                values.push(f(origin.0 + j as f64 * spacing, origin.1 + i as f64 * spacing));
            }
        }
        Ok(Self::new(width, height, spacing, values)?.with_origin(origin))
    }

    /// Square grid of `n × n` cells centred on the origin.
    pub fn centered(n: usize, spacing: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let o = -((n as f64 - 1.0) / 2.0) * spacing;
        Self::from_fn(n, n, spacing, (o, o), f)
    }

    pub fn with_origin(mut self, origin: (f64, f64)) -> Self {
        self.origin = origin;
        self
    }

    /// Declares `n ≤ value ≤ m`, checking it.
    pub fn with_bounds(mut self, n: f64, m: f64) -> Result<Self> {
        if !(n <= m) {
            return Err(Error::Parameter(format!("bounds require N <= M, got N={n}, M={m}")));
        }
        if let Some(v) = self.values.iter().find(|&&v| v < n || v > m) {
            return Err(Error::Parameter(format!("value {v} outside declared bounds [{n}, {m}]")));
        }
        self.bounds = Some((n, m));
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(N, M)` if declared.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + j as f64 * self.spacing,
            self.origin.1 + i as f64 * self.spacing,
        )
    }

    /// `(min, max)` of the stored values.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Ok(Self::new(self.width, self.height, self.spacing, values)?.with_origin(self.origin))
    }
}
