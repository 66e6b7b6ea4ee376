use num_complex::Complex64;
use serde::Serialize;

use super::leaf::CharacteristicLeaf;
use crate::bishop::{boundary_mu, BishopDisc};
use crate::disc::{d_zeta, DiscField};
use crate::error::{Error, Result};
use crate::geometry::{disc_area, disc_partials, sphere_area_bound};
use crate::scenario::Scenario;

/// Collar rings used for the decay fit `-r(f) >= c (1 - rho)^{4/3}`.
pub const COLLAR: (f64, f64) = (0.9, 0.99);

/// Per-disc diagnostics computed by [`Monitor::check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub mu: i64,
    pub area: f64,
    pub area_bound: Option<f64>,
    /// Minimum over the boundary of the Hopf coefficient `d/d rho (r o f)`.
    pub a_min: f64,
    pub max_grad: f64,
    pub crossings: Option<usize>,
    /// Fitted collar constant `min -r(f) / (1 - rho)^{4/3}` over the collar rings.
    pub collar_c: f64,
    /// Largest `r(f)` over the rings with `rho <= 0.9`.
    pub interior_max_r: f64,
}

impl MonitorReport {
    pub fn area_ok(&self) -> bool {
        self.area_bound.map_or(true, |b| self.area <= b + 1e-6)
    }

    /// The acceptance conditions for a continuation step.
    pub fn accepted(&self) -> bool {
        self.mu == 0 && self.a_min > 0.0 && self.crossings.map_or(true, |c| c == 1)
    }
}

/// Evaluates disc diagnostics against a scenario and an optional reference leaf.
pub struct Monitor<'a> {
    scenario: &'a Scenario,
    leaf: Option<&'a CharacteristicLeaf>,
    area_bound: Option<f64>,
}

impl<'a> Monitor<'a> {
    pub fn new(scenario: &'a Scenario, leaf: Option<&'a CharacteristicLeaf>) -> Self {
        let area_bound = scenario.sphere.as_ref().map(|s| sphere_area_bound(s.as_ref(), &scenario.chart.omega));
        Monitor { scenario, leaf, area_bound }
    }

    pub fn area_bound(&self) -> Option<f64> {
        self.area_bound
    }

    pub fn check(&self, disc: &BishopDisc) -> Result<MonitorReport> {
        let chart = &self.scenario.chart;
        let grid = disc.grid();
        let area = disc_area(&disc.f, &chart.omega)?;
        if !(area.abs() > 1e-12) {
            return Err(Error::Precondition("disc has zero area".into()));
        }
        let mu = boundary_mu(&disc.f, self.scenario.surface.as_ref())?;

        let mut values = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            values.push(Complex64::new(chart.r.value(&disc.node_point(idx))?, 0.0));
        }
        let rf = DiscField::new(grid.clone(), values);
        let drf = d_zeta(&rf)?;
        let br = grid.boundary_ring();
        let a_min = (0..grid.n_theta())
            .map(|j| 2.0 * (grid.node(br, j) * drf.at(br, j)).re)
            .fold(f64::INFINITY, f64::min);

        let (fx, fy) = disc_partials(&disc.f)?;
        let max_grad = fx
            .iter()
            .zip(&fy)
            .map(|(a, b)| (a.norm_squared() + b.norm_squared()).sqrt())
            .fold(0.0, f64::max);

        let mut collar_c = f64::INFINITY;
        let mut interior_max_r = f64::NEG_INFINITY;
        for (ir, &rho) in grid.rho().iter().enumerate().take(grid.n_rho()) {
            let ring = rf.ring(ir);
            if rho >= COLLAR.0 && rho <= COLLAR.1 {
                let w = (1.0 - rho).powf(4.0 / 3.0);
                collar_c = ring.iter().map(|v| -v.re / w).fold(collar_c, f64::min);
            }
            if rho <= COLLAR.0 {
                interior_max_r = ring.iter().map(|v| v.re).fold(interior_max_r, f64::max);
            }
        }

        let crossings = self.leaf.map(|l| l.crossings(&disc.boundary_points()));
        Ok(MonitorReport { mu, area, area_bound: self.area_bound, a_min, max_grad, crossings, collar_c, interior_max_r })
    }

    /// Runs [`Monitor::check`] and stores the results in the disc diagnostics.
    pub fn annotate(&self, disc: &mut BishopDisc) -> Result<MonitorReport> {
        let report = self.check(disc)?;
        let d = &mut disc.diagnostics;
        d.mu = Some(report.mu);
        d.area = Some(report.area);
        d.a_min = Some(report.a_min);
        d.max_grad = Some(report.max_grad);
        d.crossings = report.crossings;
        Ok(report)
    }
}

/// One-shot form of [`Monitor::check`].
pub fn monitor(disc: &BishopDisc, scenario: &Scenario, leaf: Option<&CharacteristicLeaf>) -> Result<MonitorReport> {
    Monitor::new(scenario, leaf).check(disc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bishop::model_family;
    use crate::continuation::leaf::integrate_leaf;
    use crate::disc::DiscGrid;
    use crate::scenario::{PoleLabel, ScenarioKind};
    use std::f64::consts::PI;

    fn flat(c: f64) -> BishopDisc {
        let g = DiscGrid::default_grid();
        let s = (1.0 - c * c).sqrt();
        let h = [vec![Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)], vec![Complex64::new(c, 0.0)]];
        BishopDisc::from_taylor(&g, h, &crate::geometry::StandardStructure, None).unwrap()
    }

    #[test]
    fn flat_ball_disc() {
        let s = Scenario::ball();
        let leaf = integrate_leaf(&s, &s.pole(PoleLabel::P).unwrap().sphere_point(s.trim, 0.3)).unwrap();
        let r = monitor(&flat(0.6), &s, Some(&leaf)).unwrap();
        assert_eq!(r.mu, 0);
        assert!((r.area - 0.64 * PI).abs() < 1e-12);
        // d/d rho of (1 - c^2)(rho^2 - 1) at rho = 1
        assert!((r.a_min - 2.0 * 0.64).abs() < 1e-10);
        assert_eq!(r.crossings, Some(1));
        assert!((r.max_grad - 0.8 * 2f64.sqrt()).abs() < 1e-12);
        assert!(r.collar_c > 0.0 && r.interior_max_r < 0.0);
        assert!(r.area_ok() && r.accepted());
        assert!((r.area_bound.unwrap() - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn model_quadric_disc_has_zero_mu() {
        let s = Scenario::build(ScenarioKind::ModelQuadric { gamma: 0.3 }).unwrap();
        let g = DiscGrid::new(256, 32).unwrap();
        let d = model_family(&g, 0.3, &[0.5]).unwrap().remove(0);
        let r = monitor(&d, &s, None).unwrap();
        assert_eq!(r.mu, 0);
        assert!(r.a_min > 0.0);
    }

    #[test]
    fn constant_disc_is_rejected() {
        let s = Scenario::ball();
        let g = DiscGrid::default_grid();
        let h = [vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(1.0, 0.0)]];
        let d = BishopDisc::from_taylor(&g, h, &crate::geometry::StandardStructure, None).unwrap();
        assert!(matches!(monitor(&d, &s, None), Err(Error::Precondition(_))));
    }
}
