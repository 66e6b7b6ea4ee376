use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quadrature::{
    barycentric_weights, differentiation_matrix, gauss_legendre_on, lagrange_basis,
};

/// Polar tensor grid on the closed unit disc.
///
/// Radial nodes are Gauss-Legendre points in `(0, 1)` followed by the boundary
/// ring `rho = 1`. Values are stored ring-major: index `ir * n_theta + j`.
pub struct DiscGrid {
    n_theta: usize,
    n_rho: usize,
    rho: Vec<f64>,
    ring_weights: Vec<f64>,
    bary: Vec<f64>,
    diff: Vec<f64>,
    cg: Vec<Vec<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiscGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscGrid")
            .field("n_theta", &self.n_theta)
            .field("n_rho", &self.n_rho)
            .finish()
    }
}

impl DiscGrid {
    pub const DEFAULT_N_THETA: usize = 64;
    pub const DEFAULT_N_RHO: usize = 32;

    pub fn new(n_theta: usize, n_rho: usize) -> Result<Arc<DiscGrid>> {
        if n_theta < 16 || !n_theta.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "n_theta must be a power of two >= 16, got {n_theta}"
            )));
        }
        if n_rho < 8 {
            return Err(Error::Precondition(format!("n_rho must be >= 8, got {n_rho}")));
        }
        let (mut rho, w) = gauss_legendre_on(n_rho, 0.0, 1.0);
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut ring_weights: Vec<f64> = rho.iter().zip(&w).map(|(r, wi)| r * wi * dtheta).collect();
        rho.push(1.0);
        ring_weights.push(0.0);
        let bary = barycentric_weights(&rho);
        let diff = differentiation_matrix(&rho, &bary);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n_theta);
        let inv = planner.plan_fft_inverse(n_theta);
        let cg = cauchy_green_matrices(&rho, &bary, n_theta);
        Ok(Arc::new(DiscGrid {
            n_theta,
            n_rho,
            rho,
            ring_weights,
            bary,
            diff,
            cg,
            fwd,
            inv,
        }))
    }

    pub fn default_grid() -> Arc<DiscGrid> {
        DiscGrid::new(Self::DEFAULT_N_THETA, Self::DEFAULT_N_RHO).expect("default grid is valid")
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_rho(&self) -> usize {
        self.n_rho
    }

    /// Number of rings including the boundary.
    pub fn n_rings(&self) -> usize {
        self.n_rho + 1
    }

    pub fn len(&self) -> usize {
        self.n_rings() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn boundary_ring(&self) -> usize {
        self.n_rho
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|j| self.theta(j)).collect()
    }

    pub fn index(&self, ir: usize, j: usize) -> usize {
        ir * self.n_theta + j
    }

    /// The node `zeta` at ring `ir`, angle index `j`.
    pub fn node(&self, ir: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.rho[ir], self.theta(j))
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for ir in 0..self.n_rings() {
            for j in 0..self.n_theta {
                out.push(self.node(ir, j));
            }
        }
        out
    }

    /// Area weight of every node in ring `ir` (zero on the boundary ring).
    pub fn area_weight(&self, ir: usize) -> f64 {
        self.ring_weights[ir]
    }

    pub(crate) fn diff(&self) -> &[f64] {
        &self.diff
    }

    pub(crate) fn cg_matrix(&self, k: usize) -> &[f64] {
        &self.cg[k]
    }

    /// Signed frequency of FFT slot `k`; the Nyquist slot maps to `+n/2`.
    pub fn mode(&self, k: usize) -> i64 {
        let n = self.n_theta as i64;
        let k = k as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.n_theta as i64) as usize
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
        let s = 1.0 / self.n_theta as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }

    /// Lagrange basis values of the radial nodes at `r`.
    pub(crate) fn radial_basis(&self, r: f64) -> Vec<f64> {
        lagrange_basis(&self.rho, &self.bary, r)
    }
}

/// Per-mode radial matrices of the Cauchy-Green transform.
///
/// For input mode `m`, output mode `m - 1` has radial profile
/// `2 rho \int_0^1 c(rho t) t^{1-m} dt` when `m <= 0` and
/// `-2 \int_rho^1 c(s) (rho/s)^{m-1} ds` when `m >= 1`.
fn cauchy_green_matrices(rho: &[f64], bary: &[f64], n_theta: usize) -> Vec<Vec<f64>> {
    let nr = rho.len();
    let nq = nr + n_theta / 4 + 8;
    let (tq, wq) = gauss_legendre_on(nq, 0.0, 1.0);
    // inner[i][q] = basis at rho_i * t_q, outer[i][q] = basis at rho_i + (1 - rho_i) t_q
    let inner: Vec<Vec<Vec<f64>>> = rho
        .iter()
        .map(|&r| tq.iter().map(|&t| lagrange_basis(rho, bary, r * t)).collect())
        .collect();
    let outer: Vec<Vec<Vec<f64>>> = rho
        .iter()
        .map(|&r| {
            tq.iter()
                .map(|&t| lagrange_basis(rho, bary, r + (1.0 - r) * t))
                .collect()
        })
        .collect();
    let n = n_theta as i64;
    (0..n_theta)
        .map(|k| {
            let m = if k as i64 <= n / 2 { k as i64 } else { k as i64 - n };
            let mut mat = vec![0.0; nr * nr];
            for i in 0..nr {
                let r = rho[i];
                let row = &mut mat[i * nr..(i + 1) * nr];
                if m <= 0 {
                    for q in 0..nq {
                        let wt = 2.0 * r * wq[q] * tq[q].powi((1 - m) as i32);
                        for (l, b) in inner[i][q].iter().enumerate() {
                            row[l] += wt * b;
                        }
                    }
                } else if r < 1.0 {
                    for q in 0..nq {
                        let s = r + (1.0 - r) * tq[q];
                        let wt = -2.0 * (1.0 - r) * wq[q] * (r / s).powi((m - 1) as i32);
                        for (l, b) in outer[i][q].iter().enumerate() {
                            row[l] += wt * b;
                        }
                    }
                }
            }
            mat
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_quadrature_of_one_is_pi() {
        let g = DiscGrid::default_grid();
        let total: f64 = (0..g.n_rings()).map(|ir| g.area_weight(ir) * g.n_theta() as f64).sum();
        assert!((total - PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(DiscGrid::new(48, 16).is_err());
        assert!(DiscGrid::new(8, 16).is_err());
        assert!(DiscGrid::new(32, 4).is_err());
    }

    #[test]
    fn mode_slots_round_trip() {
        let g = DiscGrid::new(16, 8).unwrap();
        for k in 0..16 {
            assert_eq!(g.slot(g.mode(k)), k);
        }
        assert_eq!(g.mode(8), 8);
        assert_eq!(g.mode(9), -7);
    }
}
