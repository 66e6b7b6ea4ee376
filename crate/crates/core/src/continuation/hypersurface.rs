use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use super::family::DiscFamily;
use crate::disc::DiscInterpolant;
use crate::error::{Error, Result};
use crate::geometry::{levi_form, AmbientChart, FnField};
use crate::scenario::Scenario;
use crate::types::{cross3, to_real, Point};

/// Radii and angles of the Levi samples on each interior disc.
pub const LEVI_RADII: [f64; 2] = [0.3, 0.6];
pub const LEVI_ANGLES: usize = 4;
/// Spacing of the in-disc stencil used by the local graph fit.
pub const FIT_STEP: f64 = 0.05;

/// A sample `(t, rho, theta) -> x` of the filling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudPoint {
    pub t: f64,
    pub rho: f64,
    pub theta: f64,
    pub x: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypersurface {
    pub points: Vec<CloudPoint>,
    /// Largest `|L|` of the fitted hypersurface over the interior samples.
    pub max_levi: Option<f64>,
    pub levi_samples: usize,
    /// Fewer than two parameter values: no hypersurface to speak of.
    pub degenerate: bool,
    /// Largest surface residual of the boundary circles.
    pub boundary_residual: f64,
}

fn eval(f: &[DiscInterpolant; 2], z: Complex64) -> Point {
    to_real(&[f[0].eval(z), f[1].eval(z)])
}

/// Exponents of the monomials of degree 1 to 3 in three variables, without `u3^3`.
fn monomials() -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for deg in 1..=3u8 {
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                let c = deg - a - b;
                if c != 3 {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn monomial(e: &[u8; 3], v: &Vector3<f64>) -> f64 {
    v[0].powi(e[0] as i32) * v[1].powi(e[1] as i32) * v[2].powi(e[2] as i32)
}

fn monomial_grad(e: &[u8; 3], v: &Vector3<f64>) -> Vector3<f64> {
    let mut g = Vector3::zeros();
    for k in 0..3 {
        if e[k] > 0 {
            let mut d = *e;
            d[k] -= 1;
            g[k] = e[k] as f64 * monomial(&d, v);
        }
    }
    g
}

/// Levi form of the hypersurface swept by three consecutive discs, at `f_k(zeta0)`
/// in the disc direction.
///
/// The hypersurface is fitted as a cubic graph over its tangent space, with
/// the frame `(f_xi, f_eta, d_t f)` and normal `n`; the defining function is
/// `n . (x - x0) - P(u)` with `u` the tangential coordinates.
fn levi_at(chart: &AmbientChart, f: [&[DiscInterpolant; 2]; 3], zeta0: Complex64) -> Result<f64> {
    let x0 = eval(f[1], zeta0);
    let (a, b) = (f[1][0].eval_with_derivatives(zeta0, 1e-5), f[1][1].eval_with_derivatives(zeta0, 1e-5));
    let i = Complex64::new(0.0, 1.0);
    let fx = to_real(&[a.1 + a.2, b.1 + b.2]);
    let fy = to_real(&[i * (a.1 - a.2), i * (b.1 - b.2)]);
    let ft = eval(f[2], zeta0) - eval(f[0], zeta0);
    let e1 = fx.normalize();
    let e2 = (fy - e1 * e1.dot(&fy)).normalize();
    let e3 = (ft - e1 * e1.dot(&ft) - e2 * e2.dot(&ft)).normalize();
    let n = cross3(&e1, &e2, &e3).normalize();
    let frame = [e1, e2, e3];

    let mut stencil = Vec::with_capacity(27);
    for disc in f {
        for p in -1..=1 {
            for q in -1..=1 {
                stencil.push(eval(disc, zeta0 + Complex64::new(p as f64, q as f64) * FIT_STEP));
            }
        }
    }
    let u: Vec<Vector3<f64>> = stencil.iter().map(|x| Vector3::from_fn(|k, _| frame[k].dot(&(x - x0)))).collect();
    let scale = Vector3::from_fn(|k, _| u.iter().map(|v| v[k].abs()).fold(0.0, f64::max));
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::FrameDegenerate);
    }
    let exps = monomials();
    let mut design = DMatrix::zeros(u.len(), exps.len());
    let mut rhs = DVector::zeros(u.len());
    for (row, (v, x)) in u.iter().zip(&stencil).enumerate() {
        let v = v.component_div(&scale);
        for (col, e) in exps.iter().enumerate() {
            design[(row, col)] = monomial(e, &v);
        }
        rhs[row] = n.dot(&(x - x0));
    }
    let coeffs = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Precondition(format!("graph fit failed: {e}")))?;
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();

    let fit = move |x: &Point| -> (f64, Vector4<f64>) {
        let d = x - x0;
        let v = Vector3::from_fn(|k, _| frame[k].dot(&d) / scale[k]);
        let mut value = n.dot(&d);
        let mut grad = n;
        for (c, e) in coeffs.iter().zip(&exps) {
            value -= c * monomial(e, &v);
            let g = monomial_grad(e, &v);
            for k in 0..3 {
                grad -= frame[k] * (c * g[k] / scale[k]);
            }
        }
        (value, grad)
    };
    let fit = std::sync::Arc::new(fit);
    let fv = fit.clone();
    let rho = FnField::with_gradient(move |x| fv(x).0, move |x| fit(x).1);
    levi_form(chart, &rho, &x0, &e1)
}

/// The point cloud `(t, rho, theta) -> f^t(rho e^{i theta})` of a family and
/// a Levi-flatness certificate from local graph fits at interior discs.
pub fn assemble_hypersurface(family: &DiscFamily, scenario: &Scenario) -> Result<Hypersurface> {
    let mut points = Vec::new();
    let mut boundary_residual: f64 = 0.0;
    for d in &family.discs {
        let grid = d.grid();
        for ir in 0..grid.n_rings() {
            for j in 0..grid.n_theta() {
                let x = d.node_point(grid.index(ir, j));
                points.push(CloudPoint { t: d.t, rho: grid.rho()[ir], theta: grid.theta(j), x: [x[0], x[1], x[2], x[3]] });
            }
        }
        for x in d.boundary_points() {
            let r = scenario.surface.rho_pair(&x);
            boundary_residual = boundary_residual.max(r[0].abs()).max(r[1].abs());
        }
    }
    let distinct = family.discs.windows(2).filter(|w| w[1].t != w[0].t).count() + usize::from(!family.is_empty());
    if distinct < 2 {
        return Ok(Hypersurface { points, max_levi: None, levi_samples: 0, degenerate: true, boundary_residual });
    }
    let interps: Vec<[DiscInterpolant; 2]> = family.discs.iter().map(|d| d.interpolants()).collect();
    let mut max_levi: Option<f64> = None;
    let mut levi_samples = 0;
    for k in 1..interps.len().saturating_sub(1) {
        for &r in &LEVI_RADII {
            for a in 0..LEVI_ANGLES {
                let zeta = Complex64::from_polar(r, 2.0 * PI * a as f64 / LEVI_ANGLES as f64);
                let l = levi_at(&scenario.chart, [&interps[k - 1], &interps[k], &interps[k + 1]], zeta)?;
                max_levi = Some(max_levi.unwrap_or(0.0).max(l.abs()));
                levi_samples += 1;
            }
        }
    }
    Ok(Hypersurface { points, max_levi, levi_samples, degenerate: false, boundary_residual })
}
