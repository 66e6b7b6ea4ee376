use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::disc::{boundary_mu, boundary_residual, BishopDisc, DiscDiagnostics};
use super::surface::{GraphSurface, MappedSurface, Surface};
use crate::disc::{conjugate_samples, DiscField, DiscGrid};
use crate::error::{Error, Result};
use crate::geometry::{disc_area, standard_omega, LinearPullback, StandardStructure, Structure};
use crate::types::{mat2c_norm, to_real, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointType {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Classifies a complex point by its invariant `gamma`.
pub fn classify_point(gamma: f64) -> Result<PointType> {
    if !(gamma >= 0.0) {
        return Err(Error::NegativeGamma(gamma));
    }
    Ok(if gamma < 1.0 {
        PointType::Elliptic
    } else if gamma == 1.0 {
        PointType::Parabolic
    } else {
        PointType::Hyperbolic
    })
}

/// `P(z1) = |z1|^2 + gamma Re z1^2`.
pub fn quadric(gamma: f64, z1: Complex64) -> f64 {
    z1.norm_sqr() + gamma * (z1 * z1).re
}

/// Local model of an elliptic complex point in adapted coordinates.
#[derive(Clone)]
pub struct EllipticPointModel {
    pub gamma: f64,
    pub structure: Arc<dyn Structure>,
    pub surface: Arc<dyn Surface>,
    pub delta: f64,
}

impl EllipticPointModel {
    pub fn new(gamma: f64, structure: Arc<dyn Structure>, surface: Arc<dyn Surface>) -> Result<Self> {
        match classify_point(gamma)? {
            PointType::Elliptic => Ok(EllipticPointModel { gamma, structure, surface, delta: 1.0 }),
            PointType::Parabolic => Err(Error::ParabolicPoint),
            PointType::Hyperbolic => Err(Error::Precondition(format!("gamma = {gamma} is hyperbolic"))),
        }
    }

    /// The model quadric `z2 = P(z1)` with the standard structure.
    pub fn quadric(gamma: f64) -> Result<Self> {
        Self::new(gamma, Arc::new(StandardStructure), Arc::new(GraphSurface::new(move |z| quadric(gamma, z))))
    }
}

/// Outcome of [`validate_adapted`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptationReport {
    pub tensor_at_origin: f64,
    pub first_column_slope: f64,
    pub remainder_ratios: Vec<f64>,
}

/// Checks the normal form at the origin: `A(0) = 0`, the first column of `A`
/// vanishes to second order along `{z2 = 0}`, and `rho - (z2 - P(z1))` is
/// `o(|z1|^2)` along the model surface.
pub fn validate_adapted(model: &EllipticPointModel) -> Result<AdaptationReport> {
    let zero = Complex64::new(0.0, 0.0);
    let tensor_at_origin = mat2c_norm(&model.structure.tensor(&Point::zeros()));
    if tensor_at_origin > 1e-10 {
        return Err(Error::AdaptationFailure(format!("A(0) = {tensor_at_origin:.3e}")));
    }
    let h = 1e-4;
    let mut first_column_slope: f64 = 0.0;
    for k in 0..8 {
        let dir = Complex64::from_polar(h, PI * k as f64 / 8.0);
        let a = model.structure.tensor(&to_real(&[dir, zero]));
        let b = model.structure.tensor(&to_real(&[-dir, zero]));
        let d = ((a[(0, 0)] - b[(0, 0)]).norm_sqr() + (a[(1, 0)] - b[(1, 0)]).norm_sqr()).sqrt() / (2.0 * h);
        first_column_slope = first_column_slope.max(d);
    }
    if first_column_slope > 1e-6 {
        return Err(Error::AdaptationFailure(format!(
            "first column of A has slope {first_column_slope:.3e} along z2 = 0"
        )));
    }
    let remainder_ratios: Vec<f64> = (2..=4)
        .map(|k| {
            let s = 10f64.powi(-k);
            (0..8)
                .map(|j| {
                    let z1 = Complex64::from_polar(s, 2.0 * PI * j as f64 / 8.0);
                    let p = to_real(&[z1, Complex64::new(quadric(model.gamma, z1), 0.0)]);
                    let r = model.surface.rho_pair(&p);
                    r[0].hypot(r[1]) / (s * s)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let (r2, r3, r4) = (remainder_ratios[0], remainder_ratios[1], remainder_ratios[2]);
    let vanishing = r4 <= 1e-3 || (r2 > r3 && r3 > r4 && r4 <= 0.1 * r2);
    if !vanishing {
        return Err(Error::AdaptationFailure(format!(
            "surface deviates from z2 = P(z1) at order |z1|^2 (ratios {r2:.3e}, {r3:.3e}, {r4:.3e})"
        )));
    }
    Ok(AdaptationReport { tensor_at_origin, first_column_slope, remainder_ratios })
}

/// Non-isotropic dilation `(z1, z2) -> (z1 / sqrt(delta), z2 / delta)`, with
/// `rho_delta(z) = rho(Lambda^{-1} z) / delta`.
pub fn dilate(model: &EllipticPointModel, delta: f64) -> EllipticPointModel {
    if delta == 1.0 {
        return model.clone();
    }
    let zero = Complex64::new(0.0, 0.0);
    let scale = [Complex64::new(delta.sqrt(), 0.0), Complex64::new(delta, 0.0)];
    EllipticPointModel {
        gamma: model.gamma,
        structure: Arc::new(LinearPullback::new(model.structure.clone(), [zero, zero], scale)),
        surface: Arc::new(MappedSurface::new(model.surface.clone(), [zero, zero], scale, delta)),
        delta: model.delta * delta,
    }
}

/// Conformal map of the unit disc onto `{P < r}` with `z(0) = 0, z'(0) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipseMap {
    pub gamma: f64,
    pub r: f64,
    /// Boundary correspondence `phi(theta_j)` at equispaced `theta_j`.
    pub phi: Vec<f64>,
    /// Taylor coefficients `z(zeta) = sum a_n zeta^n`.
    pub taylor: Vec<Complex64>,
    pub iterations: usize,
}

impl EllipseMap {
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.taylor.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * zeta + a)
    }
}

const THEODORSEN_MIN_SAMPLES: usize = 1024;
const THEODORSEN_MAX_SAMPLES: usize = 16384;

/// Theodorsen iteration `phi <- theta + C[log R(phi)]` for the ellipse with
/// polar form `R(phi) = sqrt(r / (1 + gamma cos 2 phi))`.
///
/// The update is relaxed by `1 - gamma^2`, which keeps the linearized
/// iteration contracting for every `gamma < 1`. The sample count doubles
/// until the Taylor tail is below roundoff.
pub fn ellipse_map(gamma: f64, r: f64) -> Result<EllipseMap> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("r must be positive, got {r}")));
    }
    if classify_point(gamma)? != PointType::Elliptic {
        return Err(Error::Precondition(format!("gamma = {gamma} does not bound an ellipse")));
    }
    let mut n = THEODORSEN_MIN_SAMPLES;
    loop {
        let map = theodorsen(gamma, r, n)?;
        let tail = map.taylor.iter().skip(n / 4).map(|c| c.norm()).fold(0.0, f64::max);
        if tail <= 1e-15 * r.sqrt() || n >= THEODORSEN_MAX_SAMPLES {
            return Ok(map);
        }
        n *= 2;
    }
}

fn theodorsen(gamma: f64, r: f64, n: usize) -> Result<EllipseMap> {
    let theta: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let log_radius = |phi: f64| 0.5 * (r / (1.0 + gamma * (2.0 * phi).cos())).ln();
    let relax = 1.0 - gamma * gamma;
    let mut phi = theta.clone();
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < 200 {
        iterations += 1;
        let lr: Vec<f64> = phi.iter().map(|&p| log_radius(p)).collect();
        let conj = conjugate_samples(&lr);
        let mut change: f64 = 0.0;
        for j in 0..n {
            let target = theta[j] + conj[j];
            change = change.max((target - phi[j]).abs());
            phi[j] += relax * (target - phi[j]);
        }
        if !change.is_finite() {
            break;
        }
        last_change = change;
        if change <= 1e-12 {
            let samples: Vec<Complex64> = phi.iter().map(|&p| Complex64::from_polar(log_radius(p).exp(), p)).collect();
            let b = crate::disc::BoundaryField::from_samples(&samples);
            let mut taylor: Vec<Complex64> = (0..n / 2).map(|m| b.coeff(m as i64)).collect();
            while taylor.len() > 2 && taylor.last().map(|c| c.norm() < 1e-17).unwrap_or(false) {
                taylor.pop();
            }
            return Ok(EllipseMap { gamma, r, phi, taylor, iterations });
        }
    }
    Err(Error::TheodorsenDiverged { last_change })
}

/// The model family `(z_{1,r}(zeta), r)` attached to `z2 = P(z1)`.
pub fn model_family(grid: &Arc<DiscGrid>, gamma: f64, r_list: &[f64]) -> Result<Vec<BishopDisc>> {
    if r_list.is_empty() || r_list.iter().any(|r| !(*r > 0.0)) || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("r_list must be positive and increasing".into()));
    }
    let unit = ellipse_map(gamma, 1.0)?;
    let surface = GraphSurface::new(move |z| quadric(gamma, z));
    let mut out = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let s = r.sqrt();
        let h1: Vec<Complex64> = unit.taylor.iter().map(|a| a * s).collect();
        let h2 = vec![Complex64::new(r, 0.0)];
        // Sample the full series: eccentric ellipses need more modes than the grid band.
        let f = [DiscField::from_fn(grid, |z| unit.eval(z) * s), DiscField::from_taylor(grid, &h2)];
        let diagnostics = DiscDiagnostics {
            cr_residual: 0.0,
            boundary_residual: boundary_residual(&f, &surface),
            mu: Some(boundary_mu(&f, &surface)?),
            area: Some(disc_area(&f, &standard_omega())?),
            ..DiscDiagnostics::default()
        };
        out.push(BishopDisc { f, h: [h1, h2], t: r, diagnostics });
    }
    check_family_rank(&unit)?;
    Ok(out)
}

/// The map `(r, theta) -> (sqrt(r) z(e^{i theta}), r)` has rank two: its
/// `r`-derivative always has the non-zero `z2` component 1, and the angular
/// derivative has zero `z2` component and non-zero `z1` component.
fn check_family_rank(unit: &EllipseMap) -> Result<()> {
    let h = 1e-6;
    for j in 0..64 {
        let th = 2.0 * PI * j as f64 / 64.0;
        let d = (unit.eval(Complex64::from_polar(1.0, th + h)) - unit.eval(Complex64::from_polar(1.0, th - h))) / (2.0 * h);
        if d.norm() < 1e-8 {
            return Err(Error::Precondition("model family parametrization is singular".into()));
        }
    }
    Ok(())
}
