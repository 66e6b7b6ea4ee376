use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::DiscGrid;

/// Complex samples of a function on every node of a [`DiscGrid`].
#[derive(Debug, Clone)]
pub struct DiscField {
    grid: Arc<DiscGrid>,
    values: Vec<Complex64>,
}

impl DiscField {
    pub fn new(grid: Arc<DiscGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match grid");
        DiscField { grid, values }
    }

    pub fn zeros(grid: &Arc<DiscGrid>) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: &Arc<DiscGrid>, c: Complex64) -> Self {
        DiscField { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: &Arc<DiscGrid>, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        DiscField { grid: grid.clone(), values }
    }

    /// Holomorphic polynomial `sum_n a_n zeta^n`.
    pub fn from_taylor(grid: &Arc<DiscGrid>, coeffs: &[Complex64]) -> Self {
        let n = grid.n_theta();
        let mut values = Vec::with_capacity(grid.len());
        for ir in 0..grid.n_rings() {
            let r = grid.rho()[ir];
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let mut rp = 1.0;
            for (k, a) in coeffs.iter().enumerate() {
                // Coefficients beyond the band fold onto aliases; callers keep them below n/2.
                buf[k % n] += a * rp;
                rp *= r;
            }
            grid.inverse(&mut buf);
            values.extend(buf);
        }
        DiscField { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, ir: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(ir, j)]
    }

    pub fn ring(&self, ir: usize) -> &[Complex64] {
        let n = self.grid.n_theta();
        &self.values[ir * n..(ir + 1) * n]
    }

    pub fn boundary(&self) -> &[Complex64] {
        self.ring(self.grid.boundary_ring())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        DiscField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &DiscField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        DiscField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_dist(&self, other: &DiscField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Integral over the disc with the grid quadrature.
    pub fn integrate(&self) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for ir in 0..self.grid.n_rho() {
            let s: Complex64 = self.ring(ir).iter().sum();
            total += s * self.grid.area_weight(ir);
        }
        total
    }

    /// Angular Fourier coefficients per ring, `modes[ir][slot]`.
    pub fn modes(&self) -> Vec<Vec<Complex64>> {
        (0..self.grid.n_rings())
            .map(|ir| {
                let mut buf = self.ring(ir).to_vec();
                self.grid.forward(&mut buf);
                buf
            })
            .collect()
    }

    pub fn from_modes(grid: &Arc<DiscGrid>, modes: Vec<Vec<Complex64>>) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for mut buf in modes {
            grid.inverse(&mut buf);
            values.extend(buf);
        }
        DiscField { grid: grid.clone(), values }
    }

    /// Spectral interpolant for evaluation off the grid.
    pub fn interpolant(&self) -> DiscInterpolant {
        DiscInterpolant { grid: self.grid.clone(), modes: self.modes() }
    }
}

impl Add for &DiscField {
    type Output = DiscField;
    fn add(self, rhs: &DiscField) -> DiscField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &DiscField {
    type Output = DiscField;
    fn sub(self, rhs: &DiscField) -> DiscField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &DiscField {
    type Output = DiscField;
    fn mul(self, rhs: &DiscField) -> DiscField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &DiscField {
    type Output = DiscField;
    fn neg(self) -> DiscField {
        self.map(|v| -v)
    }
}

/// Evaluates a [`DiscField`] at arbitrary points of the closed disc.
#[derive(Debug, Clone)]
pub struct DiscInterpolant {
    grid: Arc<DiscGrid>,
    modes: Vec<Vec<Complex64>>,
}

impl DiscInterpolant {
    /// Value at `zeta`; points up to `1e-3` outside the unit circle are
    /// extrapolated so that difference stencils stay centred at the boundary.
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        let r = zeta.norm().min(1.0 + 1e-3);
        let theta = zeta.im.atan2(zeta.re);
        let basis = self.grid.radial_basis(r);
        let n = self.grid.n_theta();
        let mut out = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let c: Complex64 = basis.iter().zip(&self.modes).map(|(b, row)| row[k] * b).sum();
            let m = self.grid.mode(k);
            if 2 * m == n as i64 {
                out += c * (m as f64 * theta).cos();
            } else {
                out += c * Complex64::from_polar(1.0, m as f64 * theta);
            }
        }
        out
    }

    /// Value together with the Wirtinger derivatives `(f, d/dzeta f, d/dzeta-bar f)`.
    pub fn eval_with_derivatives(&self, zeta: Complex64, h: f64) -> (Complex64, Complex64, Complex64) {
        let f = self.eval(zeta);
        let fx = (self.eval(zeta + h) - self.eval(zeta - h)) / (2.0 * h);
        let iy = Complex64::new(0.0, h);
        let fy = (self.eval(zeta + iy) - self.eval(zeta - iy)) / (2.0 * h);
        let i = Complex64::new(0.0, 1.0);
        (f, 0.5 * (fx - i * fy), 0.5 * (fx + i * fy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn taylor_matches_pointwise_polynomial() {
        let g = DiscGrid::new(32, 12).unwrap();
        let c = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.0), Complex64::new(0.0, 2.0)];
        let a = DiscField::from_taylor(&g, &c);
        let b = DiscField::from_fn(&g, |z| c[0] + c[1] * z + c[2] * z * z);
        assert!(a.sup_dist(&b) < 1e-13);
    }

    #[test]
    fn integrate_and_interpolate() {
        let g = DiscGrid::default_grid();
        let f = DiscField::from_fn(&g, |z| z.norm_sqr().into());
        assert!((f.integrate().re - PI / 2.0).abs() < 1e-12);
        let h = DiscField::from_fn(&g, |z| z.exp() * z.conj());
        let it = h.interpolant();
        for z in [Complex64::new(0.3, -0.2), Complex64::new(-0.7, 0.65), Complex64::new(0.0, 1.0)] {
            assert!((it.eval(z) - z.exp() * z.conj()).norm() < 1e-12);
        }
        let (_, dz, dzb) = it.eval_with_derivatives(Complex64::new(0.2, 0.1), 1e-4);
        let z = Complex64::new(0.2, 0.1);
        assert!((dz - z.exp() * z.conj()).norm() < 1e-7);
        assert!((dzb - z.exp()).norm() < 1e-7);
    }
}
