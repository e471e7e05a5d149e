//! Machine-readable run reports.

use serde::Serialize;

use crate::problem::Tolerances;

/// Discretization and tolerances a verdict is relative to.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub tolerances: Tolerances,
    /// Per block: one entry for a problem, one per player for a game.
    pub points_per_dim: Vec<usize>,
    /// Feasible grid points searched, per block.
    pub feasible_grid_points: Vec<usize>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub args: Vec<String>,
    pub config: ConfigEcho,
    pub verdict: String,
    pub details: serde_json::Value,
    pub timing_ms: f64,
}

impl RunReport {
    /// Report without the wall-clock field, for comparisons.
    pub fn stable_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or_default();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing_ms");
        }
        v
    }
}
