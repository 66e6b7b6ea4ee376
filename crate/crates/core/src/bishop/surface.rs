use std::sync::Arc;

use nalgebra::{Matrix2, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{to_complex, to_real, Point};

/// A real surface `{rho_1 = rho_2 = 0}` in a chart of C^2.
pub trait Surface: Send + Sync {
    fn rho_pair(&self, p: &Point) -> [f64; 2];

    fn rho_gradients(&self, p: &Point) -> [Vector4<f64>; 2] {
        fd_pair_gradients(|q| self.rho_pair(q), p)
    }

    /// Minimum-norm Newton projection onto the surface.
    fn project(&self, p: &Point) -> Result<Point> {
        let mut x = *p;
        for _ in 0..50 {
            let r = self.rho_pair(&x);
            if r[0].abs().max(r[1].abs()) <= 1e-14 {
                return Ok(x);
            }
            let [g1, g2] = self.rho_gradients(&x);
            let gram = Matrix2::new(g1.dot(&g1), g1.dot(&g2), g2.dot(&g1), g2.dot(&g2));
            let lam = gram
                .try_inverse()
                .ok_or_else(|| Error::Precondition("surface gradients are dependent".into()))?
                * Vector2::new(r[0], r[1]);
            x -= g1 * lam[0] + g2 * lam[1];
        }
        let r = self.rho_pair(&x);
        if r[0].abs().max(r[1].abs()) <= 1e-12 {
            Ok(x)
        } else {
            Err(Error::ResidualTooLarge { residual: r[0].abs().max(r[1].abs()), tolerance: 1e-12 })
        }
    }

    /// Orthonormal basis of the tangent plane.
    fn tangent_basis(&self, p: &Point) -> [Vector4<f64>; 2] {
        let [g1, g2] = self.rho_gradients(p);
        let n1 = g1.normalize();
        let n2 = (g2 - n1 * n1.dot(&g2)).normalize();
        let mut basis = Vec::with_capacity(2);
        for k in 0..4 {
            let mut e = Vector4::zeros();
            e[k] = 1.0;
            let mut v = e - n1 * n1.dot(&e) - n2 * n2.dot(&e);
            for b in &basis {
                let b: &Vector4<f64> = b;
                v -= b * b.dot(&v);
            }
            if v.norm() > 0.3 {
                basis.push(v.normalize());
                if basis.len() == 2 {
                    break;
                }
            }
        }
        [basis[0], basis[1]]
    }
}

/// Fourth-order central differences with step `1e-4`.
pub fn fd_pair_gradients(f: impl Fn(&Point) -> [f64; 2], p: &Point) -> [Vector4<f64>; 2] {
    let h = 1e-4;
    let mut g = [Vector4::zeros(), Vector4::zeros()];
    for k in 0..4 {
        let at = |s: f64| {
            let mut q = *p;
            q[k] += s * h;
            f(&q)
        };
        let (a1, b1, a2, b2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        for c in 0..2 {
            g[c][k] = (8.0 * (a1[c] - b1[c]) - (a2[c] - b2[c])) / (12.0 * h);
        }
    }
    g
}

type PairFn = dyn Fn(&Point) -> [f64; 2] + Send + Sync;
type PairGradFn = dyn Fn(&Point) -> [Vector4<f64>; 2] + Send + Sync;

/// Surface given by closed-form defining functions.
pub struct FnSurface {
    rho: Box<PairFn>,
    grad: Option<Box<PairGradFn>>,
}

impl FnSurface {
    pub fn new(rho: impl Fn(&Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        FnSurface { rho: Box::new(rho), grad: None }
    }

    pub fn with_gradients(
        rho: impl Fn(&Point) -> [f64; 2] + Send + Sync + 'static,
        grad: impl Fn(&Point) -> [Vector4<f64>; 2] + Send + Sync + 'static,
    ) -> Self {
        FnSurface { rho: Box::new(rho), grad: Some(Box::new(grad)) }
    }
}

impl Surface for FnSurface {
    fn rho_pair(&self, p: &Point) -> [f64; 2] {
        (self.rho)(p)
    }

    fn rho_gradients(&self, p: &Point) -> [Vector4<f64>; 2] {
        match &self.grad {
            Some(g) => g(p),
            None => fd_pair_gradients(|q| (self.rho)(q), p),
        }
    }
}

type GraphFn = dyn Fn(Complex64) -> f64 + Send + Sync;

/// The graph `{x2 = G(z1), y2 = 0}` with `rho = (x2 - G(z1), y2)`.
#[derive(Clone)]
pub struct GraphSurface {
    graph: Arc<GraphFn>,
}

impl GraphSurface {
    pub fn new(graph: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        GraphSurface { graph: Arc::new(graph) }
    }

    pub fn from_arc(graph: Arc<GraphFn>) -> Self {
        GraphSurface { graph }
    }

    pub fn height(&self, z1: Complex64) -> f64 {
        (self.graph)(z1)
    }

    pub fn point(&self, z1: Complex64) -> Point {
        to_real(&[z1, Complex64::new((self.graph)(z1), 0.0)])
    }
}

impl Surface for GraphSurface {
    fn rho_pair(&self, p: &Point) -> [f64; 2] {
        let z = to_complex(p);
        [z[1].re - (self.graph)(z[0]), z[1].im]
    }
}

/// Pull-back `rho'(z') = rho(shift + diag(scale) z') / weight`.
pub struct MappedSurface {
    inner: Arc<dyn Surface>,
    shift: [Complex64; 2],
    scale: [Complex64; 2],
    weight: f64,
}

impl MappedSurface {
    pub fn new(inner: Arc<dyn Surface>, shift: [Complex64; 2], scale: [Complex64; 2], weight: f64) -> Self {
        MappedSurface { inner, shift, scale, weight }
    }

    fn forward(&self, p: &Point) -> Point {
        let z = to_complex(p);
        to_real(&[self.shift[0] + self.scale[0] * z[0], self.shift[1] + self.scale[1] * z[1]])
    }
}

impl Surface for MappedSurface {
    fn rho_pair(&self, p: &Point) -> [f64; 2] {
        let r = self.inner.rho_pair(&self.forward(p));
        [r[0] / self.weight, r[1] / self.weight]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> FnSurface {
        FnSurface::new(|p: &Point| [p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0, p[3]])
    }

    #[test]
    fn projection_lands_on_surface() {
        let s = sphere();
        let x = s.project(&Point::new(0.3, 0.4, 0.9, 0.05)).unwrap();
        let r = s.rho_pair(&x);
        assert!(r[0].abs() < 1e-14 && r[1].abs() < 1e-14);
        let [a, b] = s.tangent_basis(&x);
        let [g1, g2] = s.rho_gradients(&x);
        assert!(a.dot(&g1).abs() < 1e-8 && a.dot(&g2).abs() < 1e-8);
        assert!(b.dot(&g1).abs() < 1e-8 && b.dot(&g2).abs() < 1e-8);
        assert!(a.dot(&b).abs() < 1e-12);
    }

    #[test]
    fn graph_surface_contains_its_points() {
        let g = GraphSurface::new(|z| z.norm_sqr());
        let p = g.point(Complex64::new(0.2, -0.1));
        assert_eq!(g.rho_pair(&p), [0.0, 0.0]);
    }
}
