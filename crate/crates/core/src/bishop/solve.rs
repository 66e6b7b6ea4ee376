use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::disc::{boundary_mu, boundary_residual, BishopDisc, DiscDiagnostics};
use super::psi::{cr_residual, psi_inverse, psi_inverse_unchecked, DiscPair};
use super::surface::Surface;
use crate::disc::{BoundaryField, DiscField, DiscGrid};
use crate::error::{Error, Result};
use crate::geometry::Structure;
use crate::types::{to_real, Point};

/// A curve on the surface that a boundary point must cross, seen through a
/// signed distance.
pub trait PinCurve: Send + Sync {
    fn signed_distance(&self, x: &Point) -> f64;
}

/// Gauge constraints: `f(1) = anchor`, `f(e^{2 pi i/3})` on `curves[0]` and
/// `f(e^{-2 pi i/3})` on `curves[1]`.
pub struct Pins<'a> {
    pub anchor: Point,
    pub curves: [&'a dyn PinCurve; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub n_taylor: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub max_halvings: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { n_taylor: 24, tol: 1e-10, max_iter: 25, fd_step: 1e-6, max_halvings: 8 }
    }
}

pub struct BishopProblem<'a> {
    pub grid: Arc<DiscGrid>,
    pub structure: &'a dyn Structure,
    pub surface: &'a dyn Surface,
    pub pins: Pins<'a>,
}

struct Evaluation {
    residual: DVector<f64>,
    f: Option<DiscPair>,
}

impl BishopProblem<'_> {
    fn coeffs(&self, x: &DVector<f64>, n: usize) -> [Vec<Complex64>; 2] {
        let mut h = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for (k, hk) in h.iter_mut().enumerate() {
            for m in 0..n {
                let i = 2 * (k * n + m);
                hk.push(Complex64::new(x[i], x[i + 1]));
            }
        }
        h
    }

    fn evaluate(&self, x: &DVector<f64>, n: usize, warm: Option<&DiscPair>) -> Result<Evaluation> {
        let h = self.coeffs(x, n);
        let nt = self.grid.n_theta();
        let pin_angles = [0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0];
        let (boundary, pins, f) = if self.structure.is_standard() {
            let mut b = [vec![Complex64::new(0.0, 0.0); nt], vec![Complex64::new(0.0, 0.0); nt]];
            for k in 0..2 {
                b[k][..n].copy_from_slice(&h[k]);
                self.grid.inverse(&mut b[k]);
            }
            let horner = |c: &[Complex64], z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
            let pins: Vec<[Complex64; 2]> = pin_angles
                .iter()
                .map(|&a| {
                    let z = Complex64::from_polar(1.0, a);
                    [horner(&h[0], z), horner(&h[1], z)]
                })
                .collect();
            (b, pins, None)
        } else {
            let hp = [DiscField::from_taylor(&self.grid, &h[0]), DiscField::from_taylor(&self.grid, &h[1])];
            let f = psi_inverse_unchecked(self.structure, &hp, warm)?;
            let b = [f[0].boundary().to_vec(), f[1].boundary().to_vec()];
            let bf = [BoundaryField::from_samples(&b[0]), BoundaryField::from_samples(&b[1])];
            let pins: Vec<[Complex64; 2]> = pin_angles.iter().map(|&a| [bf[0].eval(a), bf[1].eval(a)]).collect();
            (b, pins, Some(f))
        };
        let mut r = DVector::zeros(2 * nt + 4);
        for j in 0..nt {
            let rho = self.surface.rho_pair(&to_real(&[boundary[0][j], boundary[1][j]]));
            r[2 * j] = rho[0];
            r[2 * j + 1] = rho[1];
        }
        let anchor = &self.pins.anchor;
        let [ta, tb] = self.surface.tangent_basis(anchor);
        let d = to_real(&pins[0]) - anchor;
        r[2 * nt] = d.dot(&ta);
        r[2 * nt + 1] = d.dot(&tb);
        r[2 * nt + 2] = self.pins.curves[0].signed_distance(&to_real(&pins[1]));
        r[2 * nt + 3] = self.pins.curves[1].signed_distance(&to_real(&pins[2]));
        Ok(Evaluation { residual: r, f })
    }

    fn full_disc(&self, x: &DVector<f64>, n: usize, f: Option<DiscPair>) -> DiscPair {
        match f {
            Some(f) => f,
            None => {
                let h = self.coeffs(x, n);
                [DiscField::from_taylor(&self.grid, &h[0]), DiscField::from_taylor(&self.grid, &h[1])]
            }
        }
    }
}

/// Gauss-Newton on the Taylor coefficients of `h` for the boundary problem
/// `rho(psi_inverse(h)) = 0` on the circle plus the gauge pins.
pub fn bishop_solve(problem: &BishopProblem, init: &BishopDisc, opts: &SolveOptions) -> Result<BishopDisc> {
    let n = opts.n_taylor + 1;
    if n > problem.grid.n_theta() / 2 {
        return Err(Error::Precondition(format!(
            "N_taylor = {} does not fit the angular band of n_theta = {}",
            opts.n_taylor,
            problem.grid.n_theta()
        )));
    }
    let mut x = DVector::zeros(4 * n);
    for k in 0..2 {
        for (m, c) in init.h[k].iter().take(n).enumerate() {
            x[2 * (k * n + m)] = c.re;
            x[2 * (k * n + m) + 1] = c.im;
        }
    }
    let mut warm = if problem.structure.is_standard() { None } else { Some(init.f.clone()) };
    let mut current = problem.evaluate(&x, n, warm.as_ref())?;
    if current.f.is_some() {
        warm = current.f.clone();
    }
    let mut iterations = 0;
    while current.residual.amax() > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::MaxIterations { residual: current.residual.amax() });
        }
        iterations += 1;
        let m = current.residual.len();
        let mut jac = DMatrix::zeros(m, 4 * n);
        for i in 0..4 * n {
            let step = opts.fd_step * x[i].abs().max(1.0);
            let mut xp = x.clone();
            xp[i] += step;
            let ev = problem.evaluate(&xp, n, warm.as_ref())?;
            jac.set_column(i, &((ev.residual - &current.residual) / step));
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let dx = svd
            .solve(&current.residual, 1e-12 * smax)
            .map_err(|e| Error::Precondition(format!("least-squares solve failed: {e}")))?;
        let norm0 = current.residual.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let xn = &x - &dx * lambda;
            if let Ok(ev) = problem.evaluate(&xn, n, warm.as_ref()) {
                if ev.residual.norm() < norm0 {
                    accepted = Some((xn, ev));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (xn, ev) = accepted.ok_or(Error::NewtonStalled { iteration: iterations, residual: current.residual.amax() })?;
        x = xn;
        current = ev;
        if current.f.is_some() {
            warm = current.f.clone();
        }
        let f = problem.full_disc(&x, n, current.f.clone());
        let mu = boundary_mu(&f, problem.surface)?;
        if mu != 0 {
            return Err(Error::WindingChanged { mu });
        }
    }
    let h = problem.coeffs(&x, n);
    let hp = [DiscField::from_taylor(&problem.grid, &h[0]), DiscField::from_taylor(&problem.grid, &h[1])];
    let f = psi_inverse(problem.structure, &hp, warm.as_ref())?;
    let diagnostics = DiscDiagnostics {
        cr_residual: cr_residual(problem.structure, &f)?,
        boundary_residual: boundary_residual(&f, problem.surface),
        mu: Some(boundary_mu(&f, problem.surface)?),
        iterations,
        ..DiscDiagnostics::default()
    };
    if diagnostics.boundary_residual > 1e-8 {
        return Err(Error::ResidualTooLarge { residual: diagnostics.boundary_residual, tolerance: 1e-8 });
    }
    Ok(BishopDisc { f, h, t: init.t, diagnostics })
}
