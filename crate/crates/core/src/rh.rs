//! Linear Riemann-Hilbert problems for generalized analytic functions.
//!
//! Solves `dbar w - b w - c conj(w) = h` in the disc with `Re(conj(lambda) w) = g`
//! on the circle, for boundary data of nonnegative index.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::disc::{cauchy_green, schwarz_taylor, winding_number, BoundaryField, DiscField, DiscGrid};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A linear Riemann-Hilbert problem on a disc grid.
#[derive(Debug, Clone)]
pub struct RhProblem {
    pub b: DiscField,
    pub c: DiscField,
    pub h: DiscField,
    /// Unimodular boundary coefficient.
    pub lambda: BoundaryField,
    /// Real boundary data, rescaled together with `lambda`.
    pub g: BoundaryField,
    pub kappa: i64,
}

impl RhProblem {
    /// Builds a problem, normalizing `lambda` to modulus one.
    pub fn new(b: DiscField, c: DiscField, h: DiscField, lambda: &BoundaryField, g: &BoundaryField) -> Result<Self> {
        let grid = b.grid().clone();
        let n = grid.n_theta();
        if lambda.len() != n || g.len() != n {
            return Err(Error::Precondition(format!(
                "boundary data must have {n} samples, got {} and {}",
                lambda.len(),
                g.len()
            )));
        }
        if c.grid().len() != grid.len() || h.grid().len() != grid.len() {
            return Err(Error::Precondition("coefficients live on different grids".into()));
        }
        g.check_real()?;
        let ls = lambda.samples();
        let min = ls.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(min >= 1e-8) {
            return Err(Error::ZeroOnCircle { min_modulus: min });
        }
        let gs = g.real_samples();
        let unit: Vec<Complex64> = ls.iter().map(|v| v / v.norm()).collect();
        let scaled: Vec<f64> = gs.iter().zip(&ls).map(|(g, l)| g / l.norm()).collect();
        let lambda = BoundaryField::from_samples(&unit);
        let kappa = winding_number(&lambda)?;
        Ok(RhProblem { b, c, h, lambda, g: BoundaryField::from_real_samples(&scaled), kappa })
    }

    /// The pure `dbar w = h` problem.
    pub fn holomorphic(h: DiscField, lambda: &BoundaryField, g: &BoundaryField) -> Result<Self> {
        let grid = h.grid().clone();
        Self::new(DiscField::zeros(&grid), DiscField::zeros(&grid), h, lambda, g)
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        self.b.grid()
    }

    /// Interior residual `dbar w - b w - c conj(w) - h`.
    pub fn interior_residual(&self, w: &DiscField) -> Result<f64> {
        let d = crate::disc::dbar(w)?;
        let mut sup: f64 = 0.0;
        for (k, dv) in d.values().iter().enumerate() {
            let wv = w.values()[k];
            let r = dv - self.b.values()[k] * wv - self.c.values()[k] * wv.conj() - self.h.values()[k];
            sup = sup.max(r.norm());
        }
        Ok(sup)
    }

    /// Boundary residual `Re(conj(lambda) w) - g` on the boundary samples.
    pub fn boundary_residual(&self, w: &DiscField) -> f64 {
        let ls = self.lambda.samples();
        let gs = self.g.real_samples();
        w.boundary()
            .iter()
            .zip(ls.iter().zip(&gs))
            .map(|(wv, (l, g))| ((l.conj() * wv).re - g).abs())
            .fold(0.0, f64::max)
    }
}

/// How the free parameters of the particular solution are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// Zero Schwarz offset and zero coefficients on the homogeneous basis.
    None,
    /// `Im w(1) = 0`, remaining homogeneous coefficients zero.
    ImAtOne,
}

/// Particular solution plus homogeneous basis.
#[derive(Debug, Clone)]
pub struct RhSolutionFamily {
    pub particular: DiscField,
    pub basis: Vec<DiscField>,
    pub kappa: i64,
    pub normalization: Normalization,
    pub sweeps: usize,
    pub used_fallback: bool,
}

impl RhSolutionFamily {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Description of the gauge used to fix the free parameters.
    pub fn gauge(&self) -> &'static str {
        match self.normalization {
            Normalization::None => "zero Schwarz offset; homogeneous coefficients zero",
            Normalization::ImAtOne => "Im w(1) = 0; remaining homogeneous coefficients zero",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RhOptions {
    pub max_sweeps: usize,
    pub tolerance: f64,
    /// Retry with GMRES on the same affine map when the sweep does not contract.
    pub fallback: bool,
    pub initial: Option<DiscField>,
}

impl Default for RhOptions {
    fn default() -> Self {
        RhOptions { max_sweeps: 200, tolerance: 1e-11, fallback: true, initial: None }
    }
}

/// Continuous argument of unimodular samples, starting in `(-pi, pi]`.
fn unwrap_arg(samples: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = samples[0].arg();
    out.push(acc);
    for w in samples.windows(2) {
        acc += (w[1] / w[0]).arg();
        out.push(acc);
    }
    out
}

/// Zero-free holomorphic `X = exp(i S[sigma])` with `conj(lambda) X > 0` on the circle,
/// where `sigma` is a continuous argument of `lambda`.
pub fn canonical_function(grid: &Arc<DiscGrid>, lambda: &BoundaryField) -> Result<DiscField> {
    if lambda.len() != grid.n_theta() {
        return Err(Error::Precondition(format!(
            "lambda has {} samples, grid has {}",
            lambda.len(),
            grid.n_theta()
        )));
    }
    let samples = lambda.samples();
    let dev = samples.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::Precondition(format!("lambda is not unimodular (deviation {dev:.3e})")));
    }
    let kappa = winding_number(lambda)?;
    if kappa != 0 {
        return Err(Error::NonzeroIndex(kappa));
    }
    let sigma = BoundaryField::from_real_samples(&unwrap_arg(&samples));
    let s = DiscField::from_taylor(grid, &schwarz_taylor(&sigma, 0.0)?);
    Ok(s.map(|v| (I * v).exp()))
}

/// Holomorphic solutions of `Re(e^{-i kappa theta} u) = 0` on the circle.
pub fn homogeneous_basis(grid: &Arc<DiscGrid>, kappa: i64) -> Result<Vec<DiscField>> {
    if kappa < 0 {
        return Err(Error::NegativeIndexUnsupported(kappa));
    }
    let k = kappa as usize;
    let mono = |pairs: &[(usize, Complex64)]| {
        let mut a = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        for &(n, c) in pairs {
            a[n] += c;
        }
        DiscField::from_taylor(grid, &a)
    };
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![mono(&[(k, I)])];
    for j in 0..k {
        out.push(mono(&[(j, one), (2 * k - j, -one)]));
        out.push(mono(&[(j, I), (2 * k - j, I)]));
    }
    Ok(out)
}

/// Data of the index reduction `lambda = zeta^kappa lambda0`, `X0` canonical for `lambda0`.
struct Reduction {
    x0: DiscField,
    /// `conj(lambda) X0 zeta^kappa` on the circle, real and positive.
    p: Vec<f64>,
    kappa: usize,
}

impl Reduction {
    fn new(problem: &RhProblem) -> Result<Self> {
        let grid = problem.grid();
        let kappa = problem.kappa;
        if kappa < 0 {
            return Err(Error::NegativeIndexUnsupported(kappa));
        }
        let thetas = grid.thetas();
        let ls = problem.lambda.samples();
        let l0: Vec<Complex64> = ls
            .iter()
            .zip(&thetas)
            .map(|(l, t)| l * Complex64::from_polar(1.0, -(kappa as f64) * t))
            .collect();
        let x0 = canonical_function(grid, &BoundaryField::from_samples(&l0))?;
        let p: Vec<f64> = x0
            .boundary()
            .iter()
            .zip(&l0)
            .map(|(x, l)| (l.conj() * x).re)
            .collect();
        Ok(Reduction { x0, p, kappa: kappa as usize })
    }

    /// Holomorphic `phi` with `Re(conj(lambda) phi) = q` on the circle, in the zero gauge.
    fn holomorphic_part(&self, grid: &Arc<DiscGrid>, q: &[f64]) -> Result<DiscField> {
        let scaled: Vec<f64> = q.iter().zip(&self.p).map(|(q, p)| q / p).collect();
        let a = schwarz_taylor(&BoundaryField::from_real_samples(&scaled), 0.0)?;
        let mut shifted = vec![Complex64::new(0.0, 0.0); self.kappa];
        shifted.extend(a);
        shifted.truncate(grid.n_theta() / 2);
        let psi = DiscField::from_taylor(grid, &shifted);
        Ok(&self.x0 * &psi)
    }
}

/// One application of the affine sweep map.
struct Sweep<'a> {
    problem: &'a RhProblem,
    red: &'a Reduction,
    normalization: Normalization,
    extra: Option<&'a DiscField>,
    with_data: bool,
}

impl Sweep<'_> {
    fn apply(&self, w: &DiscField) -> Result<DiscField> {
        let pr = self.problem;
        let grid = pr.grid();
        let mut f = w.zip_map(&pr.b, |w, b| b * w);
        for (k, v) in f.values_mut().iter_mut().enumerate() {
            *v += pr.c.values()[k] * w.values()[k].conj();
            if self.with_data {
                *v += pr.h.values()[k];
            }
        }
        let tf = cauchy_green(&f);
        let ls = pr.lambda.samples();
        let gs = pr.g.real_samples();
        let q: Vec<f64> = tf
            .boundary()
            .iter()
            .zip(ls.iter().zip(&gs))
            .map(|(t, (l, g))| if self.with_data { g } else { &0.0 } - (l.conj() * t).re)
            .collect();
        let mut out = &tf + &self.red.holomorphic_part(grid, &q)?;
        if let Some(e) = self.extra {
            if self.with_data {
                out = &out + e;
            }
        }
        if self.normalization == Normalization::ImAtOne {
            // Add t i X0 zeta^kappa so that Im w(1) = 0; theta = 0 is boundary node 0.
            let x1 = self.red.x0.boundary()[0];
            if x1.re.abs() < 1e-8 {
                return Err(Error::NormalizationDegenerate);
            }
            let t = -out.boundary()[0].im / x1.re;
            let kappa = self.red.kappa as i32;
            let hom = &DiscField::from_fn(grid, |z| z.powi(kappa)) * &self.red.x0;
            out = &out + &hom.scale(I * t);
        }
        Ok(out)
    }
}

fn to_reals(f: &DiscField) -> Vec<f64> {
    f.values().iter().flat_map(|v| [v.re, v.im]).collect()
}

fn from_reals(grid: &Arc<DiscGrid>, x: &[f64]) -> DiscField {
    DiscField::new(grid.clone(), x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES for `x - L x = r`, with `L` given as a closure.
fn gmres(op: impl Fn(&[f64]) -> Result<Vec<f64>>, rhs: &[f64], x0: Vec<f64>, tol: f64) -> Result<Option<Vec<f64>>> {
    const RESTART: usize = 60;
    const CYCLES: usize = 10;
    let apply = |x: &[f64]| -> Result<Vec<f64>> {
        let lx = op(x)?;
        Ok(x.iter().zip(&lx).map(|(a, b)| a - b).collect())
    };
    let bnorm = norm(rhs).max(1e-300);
    let mut x = x0;
    for _ in 0..CYCLES {
        let ax = apply(&x)?;
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let beta = norm(&r);
        if beta <= tol * bnorm {
            return Ok(Some(x));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|a| a / beta).collect()];
        let mut hcol: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut s = vec![beta];
        for j in 0..RESTART {
            let mut wv = apply(&v[j])?;
            let mut hj = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                hj[i] = dot(&wv, vi);
                for (a, b) in wv.iter_mut().zip(vi) {
                    *a -= hj[i] * b;
                }
            }
            hj[j + 1] = norm(&wv);
            for i in 0..j {
                let t = cs[i] * hj[i] + sn[i] * hj[i + 1];
                hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
                hj[i] = t;
            }
            let d = hj[j].hypot(hj[j + 1]);
            let (c, sg) = if d == 0.0 { (1.0, 0.0) } else { (hj[j] / d, hj[j + 1] / d) };
            cs.push(c);
            sn.push(sg);
            let next = hj[j + 1];
            hj[j] = d;
            hj[j + 1] = 0.0;
            s.push(-sg * s[j]);
            s[j] *= c;
            hcol.push(hj);
            let done = s[j + 1].abs() <= tol * bnorm || next == 0.0;
            if !done {
                v.push(wv.iter().map(|a| a / next).collect());
            }
            if done || j + 1 == RESTART {
                let m = hcol.len();
                let mut y = vec![0.0; m];
                for i in (0..m).rev() {
                    let mut acc = s[i];
                    for k in i + 1..m {
                        acc -= hcol[k][i] * y[k];
                    }
                    y[i] = acc / hcol[i][i];
                }
                for (k, yk) in y.iter().enumerate() {
                    for (a, b) in x.iter_mut().zip(&v[k]) {
                        *a += yk * b;
                    }
                }
                break;
            }
        }
    }
    let ax = apply(&x)?;
    let res = norm(&rhs.iter().zip(&ax).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(if res <= tol * bnorm * 10.0 { Some(x) } else { None })
}

struct Fixed {
    w: DiscField,
    sweeps: usize,
    used_fallback: bool,
}

fn fixed_point(sweep: &Sweep<'_>, options: &RhOptions) -> Result<Fixed> {
    let grid = sweep.problem.grid().clone();
    let mut w = options.initial.clone().unwrap_or_else(|| DiscField::zeros(&grid));
    let mut last_change = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < options.max_sweeps {
        sweeps += 1;
        let next = sweep.apply(&w)?;
        let change = next.sup_dist(&w);
        w = next;
        if !change.is_finite() {
            break;
        }
        last_change = change;
        if change <= options.tolerance {
            return Ok(Fixed { w, sweeps, used_fallback: false });
        }
    }
    if options.fallback {
        let linear = Sweep { with_data: false, ..*sweep };
        let rhs = to_reals(&sweep.apply(&DiscField::zeros(&grid))?);
        let op = |x: &[f64]| -> Result<Vec<f64>> { Ok(to_reals(&linear.apply(&from_reals(&grid, x))?)) };
        let start = if w.is_finite() { to_reals(&w) } else { vec![0.0; rhs.len()] };
        if let Some(x) = gmres(op, &rhs, start, 1e-13)? {
            return Ok(Fixed { w: from_reals(&grid, &x), sweeps, used_fallback: true });
        }
    }
    Err(Error::NoContraction { iterations: sweeps, last_change })
}

pub fn solve_rh(problem: &RhProblem, normalization: Normalization) -> Result<RhSolutionFamily> {
    solve_rh_with(problem, normalization, &RhOptions::default())
}

/// Particular solution by the sweep `w <- T(b w + c conj(w) + h) + phi(w)`, where the
/// holomorphic `phi` restores the boundary condition; the basis is transported
/// through the same sweep with zero data.
pub fn solve_rh_with(problem: &RhProblem, normalization: Normalization, options: &RhOptions) -> Result<RhSolutionFamily> {
    if problem.kappa < 0 {
        return Err(Error::NegativeIndexUnsupported(problem.kappa));
    }
    let grid = problem.grid().clone();
    let red = Reduction::new(problem)?;
    let sweep = Sweep { problem, red: &red, normalization, extra: None, with_data: true };
    let part = fixed_point(&sweep, options)?;

    let zero_data = RhProblem {
        h: DiscField::zeros(&grid),
        g: BoundaryField::from_real_samples(&vec![0.0; grid.n_theta()]),
        ..problem.clone()
    };
    let mut basis = Vec::new();
    let basis_options = RhOptions { initial: None, ..options.clone() };
    for u in homogeneous_basis(&grid, problem.kappa)? {
        let extra = &red.x0 * &u;
        let s = Sweep { problem: &zero_data, red: &red, normalization: Normalization::None, extra: Some(&extra), with_data: true };
        basis.push(fixed_point(&s, &basis_options)?.w);
    }
    Ok(RhSolutionFamily {
        particular: part.w,
        basis,
        kappa: problem.kappa,
        normalization,
        sweeps: part.sweeps,
        used_fallback: part.used_fallback,
    })
}

/// Smallest singular value of the boundary Gram matrix of `fields`, as real functions.
pub fn gram_min_singular_value(fields: &[DiscField]) -> f64 {
    let n = fields.len();
    let rows: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| f.boundary().iter().flat_map(|v| [v.re, v.im]).collect())
        .collect();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    let scale = 1.0 / (m as f64 / 2.0);
    let g = nalgebra::DMatrix::from_fn(n, n, |i, j| dot(&rows[i], &rows[j]) * scale);
    g.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::dbar;

    fn grid() -> Arc<DiscGrid> {
        DiscGrid::default_grid()
    }

    fn real_fn(n: usize, f: impl Fn(f64) -> f64) -> BoundaryField {
        BoundaryField::from_real_fn(n, f)
    }

    fn unit(n: usize) -> BoundaryField {
        BoundaryField::from_fn(n, |_| Complex64::new(1.0, 0.0))
    }

    #[test]
    fn canonical_function_examples() {
        let g = grid();
        let x = canonical_function(&g, &unit(64)).unwrap();
        assert!(x.sup_dist(&DiscField::constant(&g, Complex64::new(1.0, 0.0))) < 1e-14);

        let lam = BoundaryField::from_fn(64, |t| Complex64::from_polar(1.0, 0.3 * t.cos()));
        let x = canonical_function(&g, &lam).unwrap();
        for (l, xv) in lam.samples().iter().zip(x.boundary()) {
            let v = l.conj() * xv;
            assert!(v.im.abs() <= 1e-8 && v.re > 0.0);
        }
        assert!(dbar(&x).unwrap().sup_norm() < 1e-9);

        let lam = BoundaryField::from_fn(64, |_| I);
        let x = canonical_function(&g, &lam).unwrap();
        assert!(x.sup_dist(&DiscField::constant(&g, I)) < 1e-14);
    }

    #[test]
    fn canonical_function_rejects_nonzero_index() {
        let lam = BoundaryField::from_fn(64, |t| Complex64::from_polar(1.0, t));
        assert_eq!(canonical_function(&grid(), &lam).unwrap_err(), Error::NonzeroIndex(1));
    }

    #[test]
    fn homogeneous_basis_examples() {
        let g = grid();
        let b0 = homogeneous_basis(&g, 0).unwrap();
        assert_eq!(b0.len(), 1);
        assert!(b0[0].sup_dist(&DiscField::constant(&g, I)) < 1e-15);

        for kappa in 0..3i64 {
            let b = homogeneous_basis(&g, kappa).unwrap();
            assert_eq!(b.len(), 2 * kappa as usize + 1);
            for f in &b {
                for (j, v) in f.boundary().iter().enumerate() {
                    let e = Complex64::from_polar(1.0, -(kappa as f64) * g.theta(j));
                    assert!((e * v).re.abs() <= 1e-10);
                }
            }
            assert!(gram_min_singular_value(&b) > 1e-6);
        }
        let b1 = homogeneous_basis(&g, 1).unwrap();
        let expect = [
            DiscField::from_fn(&g, |z| I * z),
            DiscField::from_fn(&g, |z| 1.0 - z * z),
            DiscField::from_fn(&g, |z| I * (1.0 + z * z)),
        ];
        for (a, e) in b1.iter().zip(&expect) {
            assert!(a.sup_dist(e) < 1e-13);
        }
        assert_eq!(homogeneous_basis(&g, -1).unwrap_err(), Error::NegativeIndexUnsupported(-1));
    }

    #[test]
    fn schwarz_example_gives_zeta() {
        let g = grid();
        let p = RhProblem::holomorphic(DiscField::zeros(&g), &unit(64), &real_fn(64, f64::cos)).unwrap();
        let sol = solve_rh(&p, Normalization::ImAtOne).unwrap();
        assert!(sol.particular.sup_dist(&DiscField::from_fn(&g, |z| z)) <= 1e-8);
        assert_eq!(sol.dimension(), 1);
    }

    #[test]
    fn constant_source_satisfies_structural_checks() {
        let g = grid();
        let one = DiscField::constant(&g, Complex64::new(1.0, 0.0));
        let p = RhProblem::holomorphic(one.clone(), &unit(64), &real_fn(64, |_| 0.0)).unwrap();
        let w = solve_rh(&p, Normalization::ImAtOne).unwrap().particular;
        assert!(dbar(&w).unwrap().sup_dist(&one) <= 1e-8);
        assert!(w.boundary().iter().all(|v| v.re.abs() <= 1e-8));
        assert!(w.boundary()[0].im.abs() <= 1e-8);
    }

    #[test]
    fn index_one_family_has_dimension_three() {
        let g = grid();
        let lam = BoundaryField::from_fn(64, |t| Complex64::from_polar(1.0, t));
        let zero = real_fn(64, |_| 0.0);
        let p = RhProblem::holomorphic(DiscField::zeros(&g), &lam, &zero).unwrap();
        assert_eq!(p.kappa, 1);
        let sol = solve_rh(&p, Normalization::None).unwrap();
        assert_eq!(sol.dimension(), 3);
        for (f, e) in sol.basis.iter().zip(homogeneous_basis(&g, 1).unwrap()) {
            assert!(f.sup_dist(&e) < 1e-12);
            assert!(p.boundary_residual(f) <= 1e-10);
        }
        assert!(sol.particular.sup_norm() < 1e-14);
    }

    fn generic_problem(kappa: i64, shift: f64) -> RhProblem {
        let g = DiscGrid::new(128, 32).unwrap();
        let b = DiscField::from_fn(&g, |z| 0.2 * z + Complex64::new(0.05, 0.0));
        let c = DiscField::from_fn(&g, |z| 0.15 * z.conj() * z + Complex64::new(0.0, 0.1));
        let h = DiscField::from_fn(&g, |z| Complex64::new(1.0 + shift, 0.5) * z - 0.3);
        let lam = BoundaryField::from_fn(128, |t| Complex64::from_polar(1.0, kappa as f64 * t + 0.4 * (2.0 * t).sin()));
        let gb = real_fn(128, |t| (t + shift).cos() + 0.2 * (3.0 * t).sin());
        RhProblem::new(b, c, h, &lam, &gb).unwrap()
    }

    #[test]
    fn residual_invariants_hold_for_generic_problems() {
        for kappa in 0..3 {
            let p = generic_problem(kappa, 0.0);
            for norm in [Normalization::None, Normalization::ImAtOne] {
                let sol = solve_rh(&p, norm).unwrap();
                assert!(p.interior_residual(&sol.particular).unwrap() <= 1e-7, "kappa {kappa} {:e}", p.interior_residual(&sol.particular).unwrap());
                assert!(p.boundary_residual(&sol.particular) <= 1e-8, "kappa {kappa}");
                assert_eq!(sol.dimension(), 2 * kappa as usize + 1);
                let hp = RhProblem { h: DiscField::zeros(p.grid()), g: real_fn(128, |_| 0.0), ..p.clone() };
                for f in &sol.basis {
                    assert!(hp.interior_residual(f).unwrap() <= 1e-7);
                    assert!(hp.boundary_residual(f) <= 1e-8);
                }
                assert!(gram_min_singular_value(&sol.basis) > 1e-6);
                if norm == Normalization::ImAtOne {
                    assert!(sol.particular.boundary()[0].im.abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn im_at_one_solution_is_unique() {
        let p = generic_problem(0, 0.0);
        let a = solve_rh(&p, Normalization::ImAtOne).unwrap();
        let start = DiscField::from_fn(p.grid(), |z| Complex64::new(3.0, -2.0) * z.conj() + z * z);
        let opts = RhOptions { initial: Some(start), ..RhOptions::default() };
        let b = solve_rh_with(&p, Normalization::ImAtOne, &opts).unwrap();
        assert!(a.particular.sup_dist(&b.particular) <= 1e-9);
    }

    #[test]
    fn gmres_fallback_matches_sweep() {
        let p = generic_problem(1, 0.0);
        let a = solve_rh(&p, Normalization::ImAtOne).unwrap();
        let opts = RhOptions { max_sweeps: 2, ..RhOptions::default() };
        let b = solve_rh_with(&p, Normalization::ImAtOne, &opts).unwrap();
        assert!(b.used_fallback);
        assert!(a.particular.sup_dist(&b.particular) <= 1e-9);
    }

    #[test]
    fn reports_no_contraction_without_fallback() {
        let p = generic_problem(0, 0.0);
        let opts = RhOptions { max_sweeps: 2, fallback: false, ..RhOptions::default() };
        assert!(matches!(
            solve_rh_with(&p, Normalization::None, &opts),
            Err(Error::NoContraction { iterations: 2, .. })
        ));
    }

    #[test]
    fn normalization_degenerates_when_x_is_imaginary_at_one() {
        let g = grid();
        // lambda = i e^{i theta}: X0 = i, so i X0(1) is real.
        let lam = BoundaryField::from_fn(64, |t| I * Complex64::from_polar(1.0, t));
        let p = RhProblem::holomorphic(DiscField::zeros(&g), &lam, &real_fn(64, |_| 0.0)).unwrap();
        assert_eq!(solve_rh(&p, Normalization::ImAtOne).unwrap_err(), Error::NormalizationDegenerate);
    }

    #[test]
    fn rejects_vanishing_lambda() {
        let g = grid();
        let lam = BoundaryField::from_fn(64, |t| Complex64::new(t.cos(), 0.0));
        let r = RhProblem::holomorphic(DiscField::zeros(&g), &lam, &real_fn(64, |_| 0.0));
        assert!(matches!(r, Err(Error::ZeroOnCircle { .. })));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn solve_is_additive(
            a in proptest::collection::vec(-1.0f64..1.0, 4),
            d in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let grid = DiscGrid::default_grid();
            let b = DiscField::from_fn(&grid, |z| 0.1 * z);
            let c = DiscField::from_fn(&grid, |z| Complex64::new(0.1, 0.05) * z.conj());
            let lam = BoundaryField::from_fn(64, |t| Complex64::from_polar(1.0, 0.3 * t.sin()));
            let h1 = DiscField::from_fn(&grid, |z| Complex64::new(a[0], a[1]) + a[2] * z);
            let h2 = DiscField::from_fn(&grid, |z| Complex64::new(d[0], d[1]) * z.conj());
            let g1 = BoundaryField::from_real_fn(64, |t| a[3] * t.cos());
            let g2 = BoundaryField::from_real_fn(64, |t| d[2] * (2.0 * t).sin() + d[3]);
            let g12 = BoundaryField::from_real_fn(64, |t| a[3] * t.cos() + d[2] * (2.0 * t).sin() + d[3]);
            let solve = |h: DiscField, g: &BoundaryField| {
                let p = RhProblem::new(b.clone(), c.clone(), h, &lam, g).unwrap();
                solve_rh(&p, Normalization::ImAtOne).unwrap().particular
            };
            let w1 = solve(h1.clone(), &g1);
            let w2 = solve(h2.clone(), &g2);
            let w12 = solve(&h1 + &h2, &g12);
            prop_assert!(w12.sup_dist(&(&w1 + &w2)) <= 1e-8);
        }
    }
}
