//! Test-time luminosity and contrast perturbations, accuracy sweeps over
//! them, and CSV export of the results.

mod csv;
mod perturb;

pub use csv::{export_csv, export_stats_csv, sweep_csv, stats_csv, SWEEP_HEADER, STATS_HEADER};
pub use perturb::{apply_contrast, apply_offset, PerturbationSpec};

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::net::{accuracy, capture_layer_stats, LayerStats, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Mu,
    Sigma,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Mu => "mu",
            Axis::Sigma => "sigma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Axis::Mu),
            "sigma" => Ok(Axis::Sigma),
            _ => Err(Error::Config(format!("unknown axis {s:?} (expected mu or sigma)"))),
        }
    }

    pub fn spec(self, value: f64) -> Result<PerturbationSpec> {
        match self {
            Axis::Mu => PerturbationSpec::new(value as f32, 1.0),
            Axis::Sigma => PerturbationSpec::new(0.0, value as f32),
        }
    }

    /// −2.0 … 2.0 for `mu`, 0.1 … 3.9 for `sigma`, both in steps of 0.2.
    pub fn default_grid(self) -> Grid {
        match self {
            Axis::Mu => Grid { start: -2.0, stop: 2.0, step: 0.2 },
            Axis::Sigma => Grid { start: 0.1, stop: 3.9, step: 0.2 },
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inclusive arithmetic grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    /// Grid values, snapped to 10 decimals so that e.g. the seventh step of
    /// `-2:2:0.2` prints as `-0.6` rather than `-0.6000000000000001`.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() || self.stop < self.start {
            return Err(Error::Config(format!(
                "grid {}:{}:{} must have start <= stop and a positive step",
                self.start, self.stop, self.step
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e10).round() / 1e10)
            .collect())
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("grid {s:?} is not start:stop:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let g = Grid { start: num(parts[0])?, stop: num(parts[1])?, step: num(parts[2])? };
        g.values()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub accuracy: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub model_name: String,
    pub dataset_name: String,
    pub axis: Axis,
    pub points: Vec<SweepPoint>,
}

/// Activation summaries of one layer at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsPoint {
    pub param: f64,
    pub before: LayerStats,
    pub after: LayerStats,
}

/// Accuracy over the whole dataset after perturbing its images.
pub fn evaluate(model: &Model, dataset: &Dataset, perturbation: PerturbationSpec) -> Result<f64> {
    let (c, h, _) = dataset.image_shape();
    let spec = model.spec();
    if c != spec.in_channels || h != spec.input_size {
        return Err(Error::Config(format!(
            "{} model expects {}x{}x{} images, dataset {} has {c}x{h}x{h}",
            spec.name, spec.in_channels, spec.input_size, spec.input_size, dataset.name
        )));
    }
    if perturbation.is_identity() {
        return accuracy(model, &dataset.images, &dataset.labels);
    }
    accuracy(model, &perturbation.apply(&dataset.images)?, &dataset.labels)
}

fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sweep grid must be strictly increasing".into()));
    }
    Ok(())
}

/// One [`evaluate`] per grid value along `axis`, in grid order.
pub fn run_sweep(model: &Model, dataset: &Dataset, axis: Axis, grid: &[f64]) -> Result<SweepResult> {
    check_increasing(grid)?;
    let points = grid
        .iter()
        .map(|&param| {
            Ok(SweepPoint {
                param,
                accuracy: evaluate(model, dataset, axis.spec(param)?)?,
                sample_count: dataset.len(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        model_name: model.spec().name.name().to_string(),
        dataset_name: dataset.name.clone(),
        axis,
        points,
    })
}

/// Input and output summaries of `layer_tag` at every grid value.
pub fn sweep_layer_stats(model: &Model, dataset: &Dataset, axis: Axis, grid: &[f64], layer_tag: &str) -> Result<Vec<StatsPoint>> {
    check_increasing(grid)?;
    grid.iter()
        .map(|&param| {
            let images = axis.spec(param)?.apply(&dataset.images)?;
            let (before, after) = capture_layer_stats(model, &images, layer_tag)?;
            Ok(StatsPoint { param, before, after })
        })
        .collect()
}
