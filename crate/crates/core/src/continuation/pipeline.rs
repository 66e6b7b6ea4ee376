use std::sync::Arc;

use super::family::{pole_family, DiscFamily, StepControls};
use super::glue::{glue, GlueReport};
use super::hypersurface::{assemble_hypersurface, Hypersurface};
use super::leaf::{gauge_leaves, Gauge};
use crate::disc::DiscGrid;
use crate::error::Result;
use crate::scenario::{PoleLabel, Scenario};

#[derive(Debug, Clone)]
pub struct FillOptions {
    pub grid: Arc<DiscGrid>,
    pub controls: StepControls,
    pub glue_tol: f64,
    /// Leaf parameter at which the two families meet.
    pub junction: f64,
}

impl Default for FillOptions {
    fn default() -> Self {
        FillOptions { grid: DiscGrid::default_grid(), controls: StepControls::default(), glue_tol: 1e-5, junction: 0.5 }
    }
}

/// Filling of the sphere by Bishop discs.
#[derive(Debug, Clone)]
pub struct FillingResult {
    pub gauge: Gauge,
    /// For two-pole scenarios, the glued family in the global parameter.
    pub family: DiscFamily,
    pub glue_report: Option<GlueReport>,
    pub hypersurface: Hypersurface,
}

/// Families from both poles up to the junction, glued.
pub fn glued_family(scenario: &Scenario, gauge: &Gauge, opts: &FillOptions) -> Result<(DiscFamily, GlueReport)> {
    let controls = StepControls { stop_at: Some(opts.junction), ..opts.controls.clone() };
    let p = pole_family(scenario, PoleLabel::P, gauge, &opts.grid, &controls)?;
    let controls = StepControls { stop_at: Some(1.0 - opts.junction), ..opts.controls.clone() };
    let q = pole_family(scenario, PoleLabel::Q, gauge, &opts.grid, &controls)?;
    let g = glue(scenario, &p, &q, opts.glue_tol)?;
    Ok((g.family, g.report))
}

/// Leaves, families, gluing and the assembled hypersurface.
///
/// Local scenarios have a single pole; their family runs along the reference
/// leaf to `controls.stop_at` or the chart boundary and is not glued.
pub fn fill(scenario: &Scenario, opts: &FillOptions) -> Result<FillingResult> {
    let gauge = gauge_leaves(scenario)?;
    let (family, glue_report) = if scenario.is_global() {
        let (f, r) = glued_family(scenario, &gauge, opts)?;
        (f, Some(r))
    } else {
        (pole_family(scenario, PoleLabel::P, &gauge, &opts.grid, &opts.controls)?, None)
    };
    let hypersurface = assemble_hypersurface(&family, scenario)?;
    Ok(FillingResult { gauge, family, glue_report, hypersurface })
}
