use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Axis, StatsPoint, SweepResult};
use crate::error::{Error, Result};
use crate::net::LayerStats;

pub const SWEEP_HEADER: &str = "model,dataset,axis,param,accuracy,n";
pub const STATS_HEADER: &str =
    "model,dataset,axis,param,stage,layer,q1,median,q3,whisker_low,whisker_high,mean,std,n";

// Floats use Rust's shortest round-trip formatting, which is locale-free and
// parses back to the identical value.

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for p in &result.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            result.model_name, result.dataset_name, result.axis, p.param, p.accuracy, p.sample_count
        );
    }
    s
}

fn stats_row(s: &mut String, prefix: &str, stage: &str, st: &LayerStats) {
    let _ = writeln!(
        s,
        "{prefix},{stage},{},{},{},{},{},{},{},{},{}",
        st.layer_tag, st.q1, st.median, st.q3, st.whisker_low, st.whisker_high, st.mean, st.std, st.sample_count
    );
}

pub fn stats_csv(model_name: &str, dataset_name: &str, axis: Axis, points: &[StatsPoint]) -> String {
    let mut s = format!("{STATS_HEADER}\n");
    for p in points {
        let prefix = format!("{model_name},{dataset_name},{axis},{}", p.param);
        stats_row(&mut s, &prefix, "before", &p.before);
        stats_row(&mut s, &prefix, "after", &p.after);
    }
    s
}

pub fn export_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, sweep_csv(result)).map_err(|e| Error::io(path, e))
}

pub fn export_stats_csv(model_name: &str, dataset_name: &str, axis: Axis, points: &[StatsPoint], path: &Path) -> Result<()> {
    fs::write(path, stats_csv(model_name, dataset_name, axis, points)).map_err(|e| Error::io(path, e))
}
