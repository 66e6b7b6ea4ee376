use std::sync::Arc;

use num_complex::Complex64;

use super::leaf::{CharacteristicLeaf, Gauge};
use super::monitor::{Monitor, MonitorReport};
use crate::bishop::{bishop_solve, dilate, ellipse_map, BishopDisc, BishopProblem, PinCurve, Pins, SolveOptions};
use crate::disc::DiscGrid;
use crate::error::{Error, Result};
use crate::scenario::{Pole, PoleLabel, Scenario};
use crate::types::{to_complex, to_real, Point};

/// Step size rules of the continuation, in leaf arclength.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControls {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    pub grow: f64,
    /// Grow the step after a corrector that needed at most this many iterations.
    pub fast_iterations: usize,
    /// Absolute gradient cap; `None` means `1e3` times the seed gradient.
    pub grad_cap: Option<f64>,
    /// Family parameter at which to stop; `None` runs to the far end of the leaf.
    pub stop_at: Option<f64>,
    pub solve: SolveOptions,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls {
            initial: 0.02,
            min: 1e-4,
            max: 5e-2,
            grow: 1.5,
            fast_iterations: 4,
            grad_cap: None,
            stop_at: None,
            solve: SolveOptions::default(),
        }
    }
}

/// Discs with strictly increasing family parameter `t`.
///
/// For a family seeded at `q` the reference leaf is traversed backwards, so
/// the leaf parameter of a member is `1 - t`.
#[derive(Debug, Clone)]
pub struct DiscFamily {
    pub discs: Vec<BishopDisc>,
    pub seed_pole: PoleLabel,
    pub reports: Vec<MonitorReport>,
}

impl DiscFamily {
    pub fn len(&self) -> usize {
        self.discs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discs.is_empty()
    }

    pub fn last(&self) -> Option<&BishopDisc> {
        self.discs.last()
    }

    /// Parameter on the reference leaf of a family parameter.
    pub fn leaf_parameter(&self, t: f64) -> f64 {
        leaf_parameter(self.seed_pole, t)
    }

    /// Smallest distance between boundary samples of consecutive members.
    pub fn min_boundary_separation(&self) -> f64 {
        self.discs
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].boundary_points(), w[1].boundary_points());
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| (x - y).norm()))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn leaf_parameter(label: PoleLabel, t: f64) -> f64 {
    match label {
        PoleLabel::P => t,
        PoleLabel::Q => 1.0 - t,
    }
}

/// A pin curve seen in the dilated adapted coordinates of a pole.
struct DilatedCurve<'a> {
    inner: &'a dyn PinCurve,
    pole: &'a Pole,
    delta: f64,
}

impl DilatedCurve<'_> {
    fn forward(pole: &Pole, delta: f64, x: &Point) -> Point {
        let z = to_complex(x);
        pole.from_adapted(&[z[0] * delta.sqrt(), z[1] * delta])
    }
}

impl PinCurve for DilatedCurve<'_> {
    fn signed_distance(&self, x: &Point) -> f64 {
        self.inner.signed_distance(&Self::forward(self.pole, self.delta, x)) / self.delta.sqrt()
    }
}

/// Angle `theta` with `arg z(e^{i theta}) = beta` for a star-shaped boundary map.
fn boundary_angle(eval: impl Fn(Complex64) -> Complex64, beta: f64) -> f64 {
    let g = |th: f64| (eval(Complex64::from_polar(1.0, th)) * Complex64::from_polar(1.0, -beta)).arg();
    let mut th = beta;
    for _ in 0..50 {
        let v = g(th);
        if v.abs() < 1e-15 {
            break;
        }
        let d = (g(th + 1e-7) - g(th - 1e-7)) / 2e-7;
        th -= v / d;
    }
    th
}

/// The disc at the pole `label` whose boundary passes through the end of the
/// reference leaf on the trim circle, with the other pins on the gauge leaves.
///
/// The model disc of the osculating quadric is corrected in the dilated
/// coordinates `(z1 / sqrt(delta), z2 / delta)` with `delta = trim^2`, mapped
/// back and polished in the chart.
pub fn cap_seed(
    scenario: &Scenario,
    label: PoleLabel,
    gauge: &Gauge,
    grid: &Arc<DiscGrid>,
    opts: &SolveOptions,
) -> Result<BishopDisc> {
    let pole = scenario.pole(label)?;
    let leaf = gauge.reference();
    let anchor = match label {
        PoleLabel::P => leaf.points[0],
        PoleLabel::Q => {
            if leaf.end != super::leaf::LeafEnd::Pole(PoleLabel::Q) {
                return Err(Error::Precondition("reference leaf does not reach q".into()));
            }
            *leaf.points.last().unwrap()
        }
    };
    let delta = scenario.trim * scenario.trim;
    let model = dilate(&pole.model(scenario.chart.structure.clone())?, delta);
    let za = pole.to_adapted(&anchor);
    let zd = [za[0] / delta.sqrt(), za[1] / delta];
    let map = ellipse_map(pole.gamma, zd[1].re)?;
    let theta0 = boundary_angle(|z| map.eval(z), zd[0].arg());
    let n = opts.n_taylor + 1;
    let h1: Vec<Complex64> =
        map.taylor.iter().take(n).enumerate().map(|(k, a)| a * Complex64::from_polar(1.0, k as f64 * theta0)).collect();
    let h = [h1, vec![Complex64::new(zd[1].re, 0.0)]];
    let init = BishopDisc::from_taylor(grid, h, model.structure.as_ref(), None)?;

    let curves = [
        DilatedCurve { inner: &gauge.leaves[1], pole, delta },
        DilatedCurve { inner: &gauge.leaves[2], pole, delta },
    ];
    let problem = BishopProblem {
        grid: grid.clone(),
        structure: model.structure.as_ref(),
        surface: model.surface.as_ref(),
        pins: Pins { anchor: to_real(&zd), curves: [&curves[0], &curves[1]] },
    };
    let local = bishop_solve(&problem, &init, opts)?;
    let s = [pole.scale[0] * delta.sqrt(), pole.scale[1] * delta];
    let mapped = local.mapped(pole.shift, s);
    let mut seed = bishop_solve(&global_problem(scenario, grid, gauge, anchor), &mapped, opts)?;
    seed.t = 0.0;
    Ok(seed)
}

fn global_problem<'a>(scenario: &'a Scenario, grid: &Arc<DiscGrid>, gauge: &'a Gauge, anchor: Point) -> BishopProblem<'a> {
    BishopProblem {
        grid: grid.clone(),
        structure: scenario.structure(),
        surface: scenario.surface.as_ref(),
        pins: Pins { anchor, curves: [&gauge.leaves[1], &gauge.leaves[2]] },
    }
}

/// Secant extrapolation of the last two discs to parameter `t`.
fn predict(discs: &[BishopDisc], t: f64) -> BishopDisc {
    let last = discs.last().expect("nonempty family");
    let mut pred = last.clone();
    pred.t = t;
    if discs.len() < 2 {
        return pred;
    }
    let prev = &discs[discs.len() - 2];
    let w = (t - last.t) / (last.t - prev.t);
    for k in 0..2 {
        let n = last.h[k].len().max(prev.h[k].len());
        let at = |v: &[Complex64], m: usize| v.get(m).copied().unwrap_or_default();
        pred.h[k] = (0..n).map(|m| at(&last.h[k], m) + (at(&last.h[k], m) - at(&prev.h[k], m)) * w).collect();
        pred.f[k] = last.f[k].zip_map(&prev.f[k], |a, b| a + (a - b) * w);
    }
    pred
}

/// Predictor-corrector continuation of `seed` along the reference leaf.
///
/// Each step advances the `f(1)` pin along the leaf, extrapolates the last
/// two discs and corrects with [`bishop_solve`]. A step is accepted when the
/// disc has `mu = 0`, positive Hopf coefficient and one crossing with the
/// reference leaf; otherwise the step is halved.
pub fn continue_family(scenario: &Scenario, seed: DiscFamily, gauge: &Gauge, controls: &StepControls) -> Result<DiscFamily> {
    let first = seed.discs.first().ok_or_else(|| Error::Precondition("empty seed family".into()))?;
    let grid = first.grid().clone();
    let leaf: &CharacteristicLeaf = gauge.reference();
    let length = leaf.length();
    let monitor = Monitor::new(scenario, Some(leaf));
    let label = seed.seed_pole;
    let mut family = seed;
    if family.reports.len() != family.discs.len() {
        family.reports = family.discs.iter_mut().map(|d| monitor.annotate(d)).collect::<Result<_>>()?;
    }
    let cap = controls.grad_cap.unwrap_or(1e3 * family.reports[0].max_grad);
    if let Some(bad) = family.reports.iter().zip(&family.discs).find(|(r, _)| r.max_grad > cap) {
        return Err(Error::BlowUp { max_grad: bad.0.max_grad, t: bad.1.t });
    }
    let end = controls.stop_at.unwrap_or(1.0).min(1.0);
    let mut ds = controls.initial.clamp(controls.min, controls.max);
    loop {
        let t = family.discs.last().unwrap().t;
        if t >= end - 1e-14 {
            break;
        }
        let mut t_next = (t + ds / length).min(end);
        if (end - t_next) * length < 0.5 * controls.min {
            t_next = end;
        }
        let anchor = leaf.point_at(leaf_parameter(label, t_next).clamp(0.0, 1.0))?;
        let problem = global_problem(scenario, &grid, gauge, anchor);
        let pred = predict(&family.discs, t_next);
        let attempt = bishop_solve(&problem, &pred, &controls.solve).and_then(|mut disc| {
            disc.t = t_next;
            let report = monitor.annotate(&mut disc)?;
            Ok((disc, report))
        });
        match attempt {
            Ok((disc, report)) if report.accepted() => {
                if report.max_grad > cap {
                    return Err(Error::BlowUp { max_grad: report.max_grad, t: t_next });
                }
                if disc.diagnostics.iterations <= controls.fast_iterations {
                    ds = (ds * controls.grow).min(controls.max);
                }
                family.discs.push(disc);
                family.reports.push(report);
            }
            _ => {
                ds *= 0.5;
                if ds < controls.min {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
    }
    Ok(family)
}

/// Seeds at `label` and continues to `controls.stop_at`.
pub fn pole_family(
    scenario: &Scenario,
    label: PoleLabel,
    gauge: &Gauge,
    grid: &Arc<DiscGrid>,
    controls: &StepControls,
) -> Result<DiscFamily> {
    let seed = cap_seed(scenario, label, gauge, grid, &controls.solve)?;
    let family = DiscFamily { discs: vec![seed], seed_pole: label, reports: Vec::new() };
    continue_family(scenario, family, gauge, controls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::leaf::gauge_leaves;
    use crate::scenario::ScenarioKind;

    /// Distance from a disc image to the flat disc `{z2 = c, |z1|^2 <= 1 - c^2}`
    /// with `c` read off the boundary.
    pub(crate) fn flat_distance(d: &BishopDisc) -> f64 {
        let c = d.f[1].boundary()[0].re;
        let s = (1.0 - c * c).sqrt();
        let mut worst: f64 = 0.0;
        for idx in 0..d.grid().len() {
            let z = [d.f[0].values()[idx], d.f[1].values()[idx]];
            let excess = (z[0].norm() - s).max(0.0);
            worst = worst.max(((z[1] - c).norm().powi(2) + excess * excess).sqrt());
        }
        worst
    }

    #[test]
    fn ball_seed_is_the_flat_cap_disc() {
        let s = Scenario::ball();
        let gauge = gauge_leaves(&s).unwrap();
        let grid = DiscGrid::default_grid();
        let seed = cap_seed(&s, PoleLabel::P, &gauge, &grid, &SolveOptions::default()).unwrap();
        let c = (1.0 - s.trim * s.trim).sqrt();
        assert!((seed.h[0][1] - Complex64::new(s.trim, 0.0)).norm() < 1e-10);
        assert!((seed.h[1][0] - Complex64::new(c, 0.0)).norm() < 1e-10);
        assert!(flat_distance(&seed) < 1e-10);
        let q = cap_seed(&s, PoleLabel::Q, &gauge, &grid, &SolveOptions::default()).unwrap();
        assert!((q.h[1][0] + Complex64::new(c, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn ball_family_is_flat() {
        let s = Scenario::ball();
        let gauge = gauge_leaves(&s).unwrap();
        let grid = DiscGrid::default_grid();
        let fam = pole_family(&s, PoleLabel::P, &gauge, &grid, &StepControls::default()).unwrap();
        assert!(fam.len() >= 30, "{} discs", fam.len());
        assert!(fam.discs.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(fam.discs.last().unwrap().t, 1.0);
        for (d, r) in fam.discs.iter().zip(&fam.reports) {
            assert!(flat_distance(d) < 1e-6);
            assert_eq!(r.mu, 0);
            assert_eq!(r.crossings, Some(1));
            assert!(r.a_min > 0.0 && r.area_ok());
            let c = d.f[1].boundary()[0].re;
            assert!((r.area - std::f64::consts::PI * (1.0 - c * c)).abs() < 1e-6);
        }
        assert!(fam.min_boundary_separation() > 0.0);
    }

    #[test]
    fn low_gradient_cap_reports_blow_up() {
        let s = Scenario::ball();
        let gauge = gauge_leaves(&s).unwrap();
        let grid = DiscGrid::default_grid();
        let controls = StepControls { grad_cap: Some(0.5), ..StepControls::default() };
        match pole_family(&s, PoleLabel::P, &gauge, &grid, &controls) {
            Err(Error::BlowUp { max_grad, t }) => assert!(max_grad > 0.5 && t > 0.0 && t < 0.5),
            other => panic!("expected BlowUp, got {other:?}"),
        }
    }

    #[test]
    fn weak_m2_family_stays_transverse() {
        let s = Scenario::build(ScenarioKind::WeakM { m: 2 }).unwrap();
        let gauge = gauge_leaves(&s).unwrap();
        let grid = DiscGrid::default_grid();
        let controls = StepControls { stop_at: Some(0.5), ..StepControls::default() };
        let fam = pole_family(&s, PoleLabel::P, &gauge, &grid, &controls).unwrap();
        assert_eq!(fam.discs.last().unwrap().t, 0.5);
        for r in &fam.reports {
            assert!(r.a_min > 0.0 && r.mu == 0 && r.collar_c > 0.0);
        }
    }

    #[test]
    fn empty_seed_is_rejected() {
        let s = Scenario::ball();
        let gauge = gauge_leaves(&s).unwrap();
        let fam = DiscFamily { discs: vec![], seed_pole: PoleLabel::P, reports: vec![] };
        assert!(matches!(continue_family(&s, fam, &gauge, &StepControls::default()), Err(Error::Precondition(_))));
    }
}
