use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::psi::{psi_inverse, DiscPair};
use super::surface::Surface;
use crate::disc::{d_zeta, dbar, winding_number_samples, DiscField, DiscGrid, DiscInterpolant};
use crate::error::{Error, Result};
use crate::geometry::Structure;
use crate::types::{cross3, to_complex, to_real, Point};

/// Per-disc diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiscDiagnostics {
    pub cr_residual: f64,
    pub boundary_residual: f64,
    pub mu: Option<i64>,
    pub area: Option<f64>,
    pub a_min: Option<f64>,
    pub max_grad: Option<f64>,
    /// Boundary crossings with the reference leaf.
    pub crossings: Option<usize>,
    pub iterations: usize,
}

/// A disc with boundary on a totally real surface, stored both as samples
/// and as the Taylor coefficients of its holomorphic preimage `h`.
#[derive(Debug, Clone)]
pub struct BishopDisc {
    pub f: DiscPair,
    pub h: [Vec<Complex64>; 2],
    pub t: f64,
    pub diagnostics: DiscDiagnostics,
}

impl BishopDisc {
    /// Builds the disc `psi_inverse(h)` on `grid`.
    pub fn from_taylor(
        grid: &Arc<DiscGrid>,
        h: [Vec<Complex64>; 2],
        structure: &dyn Structure,
        warm: Option<&DiscPair>,
    ) -> Result<BishopDisc> {
        let hp = [DiscField::from_taylor(grid, &h[0]), DiscField::from_taylor(grid, &h[1])];
        let f = psi_inverse(structure, &hp, warm)?;
        Ok(BishopDisc { f, h, t: 0.0, diagnostics: DiscDiagnostics::default() })
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        self.f[0].grid()
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.f[0]
            .boundary()
            .iter()
            .zip(self.f[1].boundary())
            .map(|(a, b)| to_real(&[*a, *b]))
            .collect()
    }

    pub fn node_point(&self, idx: usize) -> Point {
        to_real(&[self.f[0].values()[idx], self.f[1].values()[idx]])
    }

    pub fn interpolants(&self) -> [DiscInterpolant; 2] {
        [self.f[0].interpolant(), self.f[1].interpolant()]
    }

    /// Maps the disc by a complex-diagonal affine map `z -> shift + scale z`.
    pub fn mapped(&self, shift: [Complex64; 2], scale: [Complex64; 2]) -> BishopDisc {
        let f = [
            self.f[0].map(|v| shift[0] + scale[0] * v),
            self.f[1].map(|v| shift[1] + scale[1] * v),
        ];
        let mut h = [self.h[0].clone(), self.h[1].clone()];
        for k in 0..2 {
            for c in h[k].iter_mut() {
                *c *= scale[k];
            }
            if h[k].is_empty() {
                h[k].push(Complex64::new(0.0, 0.0));
            }
            h[k][0] += shift[k];
        }
        BishopDisc { f, h, t: self.t, diagnostics: self.diagnostics.clone() }
    }

    pub fn record(&self) -> BishopDiscRecord {
        BishopDiscRecord {
            t: self.t,
            h1: self.h[0].iter().map(|c| [c.re, c.im]).collect(),
            h2: self.h[1].iter().map(|c| [c.re, c.im]).collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// JSON form of a [`BishopDisc`].
#[derive(Debug, Clone, Serialize)]
pub struct BishopDiscRecord {
    pub t: f64,
    pub h1: Vec<[f64; 2]>,
    pub h2: Vec<[f64; 2]>,
    pub diagnostics: DiscDiagnostics,
}

/// Sup of `|rho_1|, |rho_2|` over the boundary ring.
pub fn boundary_residual(f: &DiscPair, surface: &dyn Surface) -> f64 {
    f[0].boundary()
        .iter()
        .zip(f[1].boundary())
        .map(|(a, b)| {
            let r = surface.rho_pair(&to_real(&[*a, *b]));
            r[0].abs().max(r[1].abs())
        })
        .fold(0.0, f64::max)
}

/// Winding of the surface tangent frame along the boundary, measured in the
/// complex normal line of the disc.
///
/// `X1` is the boundary tangent, `X2` the unit vector of the surface tangent
/// plane orthogonal to it (oriented by the surface normals), and the angle
/// function is the Hermitian pairing of `X2` with the normal `(-conj b, conj a)`
/// where `d_zeta f = (a, b)`.
pub fn boundary_mu(f: &DiscPair, surface: &dyn Surface) -> Result<i64> {
    let grid = f[0].grid();
    let dz = [d_zeta(&f[0])?, d_zeta(&f[1])?];
    let dzb = [dbar(&f[0])?, dbar(&f[1])?];
    let i = Complex64::new(0.0, 1.0);
    let br = grid.boundary_ring();
    let mut phase = Vec::with_capacity(grid.n_theta());
    for j in 0..grid.n_theta() {
        let zeta = grid.node(br, j);
        let idx = grid.index(br, j);
        let a = [dz[0].values()[idx], dz[1].values()[idx]];
        let b = [dzb[0].values()[idx], dzb[1].values()[idx]];
        let x1 = to_real(&[i * (zeta * a[0] - zeta.conj() * b[0]), i * (zeta * a[1] - zeta.conj() * b[1])]);
        let p = to_real(&[f[0].values()[idx], f[1].values()[idx]]);
        let [g1, g2] = surface.rho_gradients(&p);
        let n1 = g1.normalize();
        let n2 = (g2 - n1 * n1.dot(&g2)).normalize();
        let e1 = x1 - n1 * n1.dot(&x1) - n2 * n2.dot(&x1);
        if e1.norm() < 1e-12 {
            return Err(Error::FrameDegenerate);
        }
        let x2 = cross3(&n1, &n2, &e1.normalize());
        let x2c = to_complex(&x2);
        let n = [-a[1].conj(), a[0].conj()];
        phase.push(x2c[0] * n[0].conj() + x2c[1] * n[1].conj());
    }
    winding_number_samples(&phase).map_err(|e| match e {
        Error::ZeroOnCircle { .. } => Error::FrameDegenerate,
        other => other,
    })
}
