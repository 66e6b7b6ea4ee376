use num_complex::Complex64;

use crate::disc::{cauchy_green, d_zeta, dbar, DiscField};
use crate::error::{Error, Result};
use crate::geometry::Structure;
use crate::types::to_real;

/// The two complex components `(z1, z2)` of a disc.
pub type DiscPair = [DiscField; 2];

/// `A(f) conj(d_zeta f)` at every node.
fn tensor_term(structure: &dyn Structure, f: &DiscPair) -> Result<DiscPair> {
    let d = [d_zeta(&f[0])?, d_zeta(&f[1])?];
    let n = f[0].values().len();
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for idx in 0..n {
        let p = to_real(&[f[0].values()[idx], f[1].values()[idx]]);
        let a = structure.tensor(&p);
        let v = [d[0].values()[idx].conj(), d[1].values()[idx].conj()];
        out[0].push(a[(0, 0)] * v[0] + a[(0, 1)] * v[1]);
        out[1].push(a[(1, 0)] * v[0] + a[(1, 1)] * v[1]);
    }
    let g = f[0].grid().clone();
    let [a, b] = out;
    Ok([DiscField::new(g.clone(), a), DiscField::new(g, b)])
}

/// `h = f + T(A(f) dbar(conj f))`.
pub fn psi_apply(structure: &dyn Structure, f: &DiscPair) -> Result<DiscPair> {
    if structure.is_standard() {
        return Ok(f.clone());
    }
    let term = tensor_term(structure, f)?;
    Ok([&f[0] + &cauchy_green(&term[0]), &f[1] + &cauchy_green(&term[1])])
}

/// Sup norm of `dbar f + A(f) dbar(conj f)`.
pub fn cr_residual(structure: &dyn Structure, f: &DiscPair) -> Result<f64> {
    let db = [dbar(&f[0])?, dbar(&f[1])?];
    if structure.is_standard() {
        return Ok(db[0].sup_norm().max(db[1].sup_norm()));
    }
    let term = tensor_term(structure, f)?;
    Ok((&db[0] + &term[0]).sup_norm().max((&db[1] + &term[1]).sup_norm()))
}

pub const PSI_TOL: f64 = 1e-12;
pub const PSI_MAX_ITER: usize = 100;

/// Inverse of [`psi_apply`] on holomorphic `h` by fixed-point iteration,
/// optionally warm-started from a nearby solution.
pub fn psi_inverse(structure: &dyn Structure, h: &DiscPair, warm: Option<&DiscPair>) -> Result<DiscPair> {
    let f = psi_inverse_unchecked(structure, h, warm)?;
    let residual = cr_residual(structure, &f)?;
    if residual > 1e-8 {
        return Err(Error::ResidualTooLarge { residual, tolerance: 1e-8 });
    }
    Ok(f)
}

/// Fixed-point iteration without the a-posteriori residual check.
pub fn psi_inverse_unchecked(structure: &dyn Structure, h: &DiscPair, warm: Option<&DiscPair>) -> Result<DiscPair> {
    if structure.is_standard() {
        return Ok(h.clone());
    }
    let mut f = warm.cloned().unwrap_or_else(|| h.clone());
    let mut last_change = f64::INFINITY;
    for _ in 0..PSI_MAX_ITER {
        let term = tensor_term(structure, &f)?;
        let next = [&h[0] - &cauchy_green(&term[0]), &h[1] - &cauchy_green(&term[1])];
        let change = next[0].sup_dist(&f[0]).max(next[1].sup_dist(&f[1]));
        if !change.is_finite() {
            break;
        }
        f = next;
        last_change = change;
        if change <= PSI_TOL {
            return Ok(f);
        }
    }
    Err(Error::NoContraction { iterations: PSI_MAX_ITER, last_change })
}

/// Complex value of the pair at one grid index.
pub fn pair_at(f: &DiscPair, idx: usize) -> [Complex64; 2] {
    [f[0].values()[idx], f[1].values()[idx]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::DiscGrid;
    use crate::geometry::{StandardStructure, TensorStructure};
    use crate::types::{to_complex, Mat2c, Point};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn perturbed(eps: f64) -> TensorStructure {
        TensorStructure::new(move |p: &Point| {
            let z = to_complex(p);
            let e = (c(1.0, 0.0) - z[1] * z[1]) * eps;
            Mat2c::new(c(0.0, 0.0), e, e, c(0.0, 0.0))
        })
    }

    #[test]
    fn standard_structure_is_identity() {
        let g = DiscGrid::default_grid();
        let h = [DiscField::from_fn(&g, |z| z), DiscField::constant(&g, c(0.5, 0.0))];
        let f = psi_inverse(&StandardStructure, &h, None).unwrap();
        assert_eq!(f[0].sup_dist(&h[0]), 0.0);
        let back = psi_apply(&StandardStructure, &f).unwrap();
        assert_eq!(back[1].sup_dist(&h[1]), 0.0);
    }

    #[test]
    fn perturbed_inverse_solves_the_cr_equation() {
        let g = DiscGrid::default_grid();
        let s = perturbed(0.05);
        let h = [DiscField::from_fn(&g, |z| z), DiscField::constant(&g, c(0.5, 0.0))];
        let f = psi_inverse(&s, &h, None).unwrap();
        assert!(cr_residual(&s, &f).unwrap() <= 1e-8);
        let back = psi_apply(&s, &f).unwrap();
        assert!(back[0].sup_dist(&h[0]).max(back[1].sup_dist(&h[1])) <= 1e-9);
        let hb = [dbar(&back[0]).unwrap(), dbar(&back[1]).unwrap()];
        assert!(hb[0].sup_norm().max(hb[1].sup_norm()) <= 1e-7);
    }

    #[test]
    fn apply_is_linear_in_the_tensor() {
        let g = DiscGrid::default_grid();
        let f = [DiscField::from_fn(&g, |z| z + z.conj() * 0.1), DiscField::from_fn(&g, |z| z * z * 0.3)];
        let constant = |k: f64| {
            TensorStructure::new(move |_: &Point| Mat2c::new(c(0.0, 0.0), c(0.02 * k, 0.01 * k), c(0.03 * k, 0.0), c(0.0, 0.0)))
        };
        let h1 = psi_apply(&constant(1.0), &f).unwrap();
        let h2 = psi_apply(&constant(2.0), &f).unwrap();
        for k in 0..2 {
            let d1 = &h1[k] - &f[k];
            let d2 = &h2[k] - &f[k];
            assert!(d2.sup_dist(&d1.scale(c(2.0, 0.0))) <= 1e-9);
        }
    }
}
