//! Compiled-in scenarios: an ambient chart, a two-sphere in its boundary and
//! the elliptic complex points of the sphere in adapted coordinates.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::Serialize;

use crate::bishop::{EllipticPointModel, FnSurface, GraphSurface, Surface};
use crate::error::{Error, Result};
use crate::geometry::{
    standard_omega, AmbientChart, FnField, LinearPullback, SphereParam, StandardStructure, Structure,
    TensorStructure,
};
use crate::types::{to_complex, to_real, Mat2c, Point};

/// Default radius of the trim caps, measured by `|z1|` in adapted coordinates.
pub const DEFAULT_TRIM: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ScenarioKind {
    Ball,
    PerturbedBall { epsilon: f64 },
    /// `|z1|^2 + |z2|^{2m} < 1`.
    WeakM { m: u32 },
    ModelQuadric { gamma: f64 },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Ball => "ball",
            ScenarioKind::PerturbedBall { .. } => "perturbed-ball",
            ScenarioKind::WeakM { .. } => "weak-m2",
            ScenarioKind::ModelQuadric { .. } => "model-quadric",
        }
    }
}

/// Which elliptic point a family grows from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoleLabel {
    P,
    Q,
}

type GraphFn = dyn Fn(Complex64) -> f64 + Send + Sync;

/// An elliptic complex point with adapted coordinates `z = shift + scale * z'`
/// in which the sphere is the graph `{x2' = G(z1'), y2' = 0}`.
#[derive(Clone)]
pub struct Pole {
    pub label: PoleLabel,
    pub shift: [Complex64; 2],
    pub scale: [Complex64; 2],
    pub gamma: f64,
    graph: Arc<GraphFn>,
}

impl std::fmt::Debug for Pole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pole")
            .field("label", &self.label)
            .field("shift", &self.shift)
            .field("scale", &self.scale)
            .field("gamma", &self.gamma)
            .finish()
    }
}

impl Pole {
    pub fn point(&self) -> Point {
        to_real(&self.shift)
    }

    pub fn to_adapted(&self, p: &Point) -> [Complex64; 2] {
        let z = to_complex(p);
        [(z[0] - self.shift[0]) / self.scale[0], (z[1] - self.shift[1]) / self.scale[1]]
    }

    pub fn from_adapted(&self, z: &[Complex64; 2]) -> Point {
        to_real(&[self.shift[0] + self.scale[0] * z[0], self.shift[1] + self.scale[1] * z[1]])
    }

    pub fn graph(&self, z1: Complex64) -> f64 {
        (self.graph)(z1)
    }

    /// Adapted `|z1'|`.
    pub fn cap_radius(&self, p: &Point) -> f64 {
        self.to_adapted(p)[0].norm()
    }

    /// Inside the trim cap: small `|z1'|` and close to this pole in `z2'`.
    pub fn in_cap(&self, p: &Point, trim: f64) -> bool {
        let z = self.to_adapted(p);
        z[0].norm() < trim && z[1].norm() < 1.0
    }

    /// The sphere point with adapted `z1' = s e^{i alpha}`.
    pub fn sphere_point(&self, s: f64, alpha: f64) -> Point {
        let z1 = Complex64::from_polar(s, alpha);
        self.from_adapted(&[z1, Complex64::new(self.graph(z1), 0.0)])
    }

    /// The local model in adapted coordinates.
    pub fn model(&self, structure: Arc<dyn Structure>) -> Result<EllipticPointModel> {
        let pulled: Arc<dyn Structure> = if structure.is_standard() {
            structure
        } else {
            Arc::new(LinearPullback::new(structure, self.shift, self.scale))
        };
        EllipticPointModel::new(self.gamma, pulled, Arc::new(GraphSurface::from_arc(self.graph.clone())))
    }
}

/// Upper and lower graphs `x2 = +-(1 - s^2)^{1/(2m)}` over `|z1| = s`.
struct RoundSphere {
    m: u32,
}

impl SphereParam for RoundSphere {
    fn sphere_point(&self, s: f64, theta: f64, upper: bool) -> Point {
        let h = (1.0 - s * s).max(0.0).powf(0.5 / self.m as f64);
        Point::new(s * theta.cos(), s * theta.sin(), if upper { h } else { -h }, 0.0)
    }
}

/// A compiled-in scenario.
pub struct Scenario {
    pub kind: ScenarioKind,
    pub chart: AmbientChart,
    /// Defining pair of the sphere in the chart.
    pub surface: Arc<dyn Surface>,
    pub sphere: Option<Arc<dyn SphereParam>>,
    /// `p` first; local scenarios have a single pole.
    pub poles: Vec<Pole>,
    pub trim: f64,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn structure(&self) -> &dyn Structure {
        self.chart.structure.as_ref()
    }

    pub fn pole(&self, label: PoleLabel) -> Result<&Pole> {
        self.poles
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| Error::Precondition(format!("scenario {} has no pole {label:?}", self.name())))
    }

    pub fn in_domain(&self, p: &Point) -> bool {
        (0..4).all(|k| p[k] >= self.chart.domain[k].0 && p[k] <= self.chart.domain[k].1)
    }

    pub fn is_global(&self) -> bool {
        self.poles.len() == 2
    }

    pub fn build(kind: ScenarioKind) -> Result<Scenario> {
        match kind {
            ScenarioKind::Ball => Ok(round(kind, 1, Arc::new(StandardStructure))),
            ScenarioKind::PerturbedBall { epsilon } => {
                if !(epsilon.abs() <= 0.2) {
                    return Err(Error::Precondition(format!("epsilon = {epsilon} leaves the tame regime")));
                }
                Ok(round(kind, 1, perturbed_structure(epsilon)))
            }
            ScenarioKind::WeakM { m } => {
                if m == 0 {
                    return Err(Error::Precondition("m must be at least 1".into()));
                }
                Ok(round(kind, m, Arc::new(StandardStructure)))
            }
            ScenarioKind::ModelQuadric { gamma } => model_quadric(gamma),
        }
    }

    pub fn ball() -> Scenario {
        round(ScenarioKind::Ball, 1, Arc::new(StandardStructure))
    }
}

/// `A(z) = epsilon (1 - z2^2) [[0, 1], [1, 0]]`, vanishing at `z2 = +-1`.
pub fn perturbed_structure(epsilon: f64) -> Arc<dyn Structure> {
    Arc::new(TensorStructure::new(move |p: &Point| {
        let z2 = Complex64::new(p[2], p[3]);
        let a = (1.0 - z2 * z2) * epsilon;
        let zero = Complex64::new(0.0, 0.0);
        Mat2c::new(zero, a, a, zero)
    }))
}

fn norm_sq_field() -> FnField {
    FnField::with_gradient(|p: &Point| p.norm_squared(), |p: &Point| p * 2.0)
}

/// `|z1|^2 + |z2|^{2m} < 1` with the sphere `y2 = 0` in its boundary.
fn round(kind: ScenarioKind, m: u32, structure: Arc<dyn Structure>) -> Scenario {
    let mf = m as f64;
    let r_value = move |p: &Point| p[0] * p[0] + p[1] * p[1] + (p[2] * p[2] + p[3] * p[3]).powi(m as i32) - 1.0;
    let r_grad = move |p: &Point| {
        let s = p[2] * p[2] + p[3] * p[3];
        let c = 2.0 * mf * s.powi(m as i32 - 1);
        Vector4::new(2.0 * p[0], 2.0 * p[1], c * p[2], c * p[3])
    };
    let surface = FnSurface::with_gradients(
        move |p: &Point| [r_value(p), p[3]],
        move |p: &Point| [r_grad(p), Vector4::new(0.0, 0.0, 0.0, 1.0)],
    );
    let chart = AmbientChart {
        domain: [(-1.5, 1.5); 4],
        structure,
        omega: standard_omega(),
        r: Arc::new(FnField::with_gradient(r_value, r_grad)),
        psi: Some(Arc::new(norm_sq_field())),
    };
    let k = 2.0 * mf;
    let graph: Arc<GraphFn> = Arc::new(move |z1: Complex64| k * (1.0 - (1.0 - z1.norm_sqr()).max(0.0).powf(1.0 / k)));
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let poles = vec![
        Pole {
            label: PoleLabel::P,
            shift: [zero, one],
            scale: [one, Complex64::new(-1.0 / k, 0.0)],
            gamma: 0.0,
            graph: graph.clone(),
        },
        Pole {
            label: PoleLabel::Q,
            shift: [zero, -one],
            scale: [one, Complex64::new(1.0 / k, 0.0)],
            gamma: 0.0,
            graph,
        },
    ];
    Scenario {
        kind,
        chart,
        surface: Arc::new(surface),
        sphere: Some(Arc::new(RoundSphere { m })),
        poles,
        trim: DEFAULT_TRIM,
    }
}

/// The local model `{P(z1) - x2 + y2^2 < 0}` around the quadric `x2 = P(z1)`.
fn model_quadric(gamma: f64) -> Result<Scenario> {
    crate::bishop::EllipticPointModel::quadric(gamma)?;
    let p_of = move |x: f64, y: f64| (1.0 + gamma) * x * x + (1.0 - gamma) * y * y;
    let r_value = move |p: &Point| p_of(p[0], p[1]) - p[2] + p[3] * p[3];
    let r_grad = move |p: &Point| Vector4::new(2.0 * (1.0 + gamma) * p[0], 2.0 * (1.0 - gamma) * p[1], -1.0, 2.0 * p[3]);
    let surface = FnSurface::with_gradients(
        move |p: &Point| [p[2] - p_of(p[0], p[1]), p[3]],
        move |p: &Point| {
            [
                Vector4::new(-2.0 * (1.0 + gamma) * p[0], -2.0 * (1.0 - gamma) * p[1], 1.0, 0.0),
                Vector4::new(0.0, 0.0, 0.0, 1.0),
            ]
        },
    );
    let chart = AmbientChart {
        domain: [(-1.0, 1.0), (-1.0, 1.0), (-0.5, 2.0), (-1.0, 1.0)],
        structure: Arc::new(StandardStructure),
        omega: standard_omega(),
        r: Arc::new(FnField::with_gradient(r_value, r_grad)),
        psi: Some(Arc::new(norm_sq_field())),
    };
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let pole = Pole {
        label: PoleLabel::P,
        shift: [zero, zero],
        scale: [one, one],
        gamma,
        graph: Arc::new(move |z: Complex64| crate::bishop::quadric(gamma, z)),
    };
    Ok(Scenario {
        kind: ScenarioKind::ModelQuadric { gamma },
        chart,
        surface: Arc::new(surface),
        sphere: None,
        poles: vec![pole],
        trim: DEFAULT_TRIM,
    })
}

/// Equally spaced angles `0, 2 pi / 3, -2 pi / 3` of the three gauge leaves.
pub fn gauge_angles() -> [f64; 3] {
    [0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bishop::validate_adapted;
    use crate::geometry::{check_chart, deformation_tensor, sphere_area_bound};

    fn all() -> Vec<Scenario> {
        [
            ScenarioKind::Ball,
            ScenarioKind::PerturbedBall { epsilon: 0.05 },
            ScenarioKind::WeakM { m: 2 },
            ScenarioKind::ModelQuadric { gamma: 0.3 },
        ]
        .into_iter()
        .map(|k| Scenario::build(k).unwrap())
        .collect()
    }

    #[test]
    fn charts_satisfy_structure_invariants() {
        for s in all() {
            let report = check_chart(&s.chart, 40, 4, 7);
            assert!(report.pass, "{}: {report:?}", s.name());
        }
    }

    #[test]
    fn poles_lie_on_the_sphere_and_are_adapted() {
        for s in all() {
            for pole in &s.poles {
                let r = s.surface.rho_pair(&pole.point());
                assert!(r[0].abs() < 1e-14 && r[1].abs() < 1e-14);
                let model = pole.model(s.chart.structure.clone()).unwrap();
                validate_adapted(&model).unwrap();
                let d = deformation_tensor(&s.chart, &pole.point()).unwrap();
                assert!(crate::types::mat2c_norm(&d.at(&pole.point()).unwrap()) <= 1e-12);
                for alpha in [0.0, 1.0, 2.5] {
                    let x = pole.sphere_point(0.3, alpha);
                    let r = s.surface.rho_pair(&x);
                    assert!(r[0].abs() < 1e-13 && r[1].abs() < 1e-13, "{}", s.name());
                }
            }
        }
    }

    #[test]
    fn cap_membership_is_local_to_each_pole() {
        let s = Scenario::ball();
        let p = s.pole(PoleLabel::P).unwrap();
        let q = s.pole(PoleLabel::Q).unwrap();
        let near_p = p.sphere_point(0.01, 0.3);
        assert!(p.in_cap(&near_p, s.trim));
        assert!(!q.in_cap(&near_p, s.trim));
        assert!(!p.in_cap(&p.sphere_point(0.2, 0.3), s.trim));
    }

    #[test]
    fn round_spheres_have_area_bound_two_pi() {
        for kind in [ScenarioKind::Ball, ScenarioKind::WeakM { m: 2 }] {
            let s = Scenario::build(kind).unwrap();
            let bound = sphere_area_bound(s.sphere.as_deref().unwrap(), &s.chart.omega);
            assert!((bound - 2.0 * PI).abs() < 1e-4, "{bound}");
        }
    }

    #[test]
    fn rejects_parabolic_model() {
        assert_eq!(Scenario::build(ScenarioKind::ModelQuadric { gamma: 1.0 }).err(), Some(Error::ParabolicPoint));
    }
}
