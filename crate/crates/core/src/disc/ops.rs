use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::boundary::BoundaryField;
use super::field::DiscField;
use super::grid::DiscGrid;
use crate::error::{Error, Result};

const RESOLUTION_RATIO: f64 = 1e-6;

/// Fraction of the angular energy carried by the top two frequencies.
pub fn top_mode_fraction(modes: &[Vec<Complex64>], n_theta: usize) -> f64 {
    let half = n_theta / 2;
    let mut total = 0.0;
    let mut top = 0.0;
    for row in modes {
        for (k, c) in row.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if k == half || k == half - 1 || k == half + 1 {
                top += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        top / total
    }
}

fn check_resolved(modes: &[Vec<Complex64>], n_theta: usize, what: &str) -> Result<()> {
    let frac = top_mode_fraction(modes, n_theta);
    if frac > RESOLUTION_RATIO {
        return Err(Error::Underresolved(format!(
            "{what}: top angular modes carry {frac:.3e} of the energy"
        )));
    }
    Ok(())
}

/// Radial derivative of every angular mode.
fn radial_derivative(grid: &DiscGrid, modes: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let nr = grid.n_rings();
    let n = grid.n_theta();
    let d = grid.diff();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; nr];
    for i in 0..nr {
        for l in 0..nr {
            let w = d[i * nr + l];
            if w == 0.0 {
                continue;
            }
            for k in 0..n {
                out[i][k] += modes[l][k] * w;
            }
        }
    }
    out
}

/// Wirtinger derivative with respect to `conj(zeta)`.
pub fn dbar(f: &DiscField) -> Result<DiscField> {
    wirtinger(f, -1)
}

/// Wirtinger derivative with respect to `zeta`.
pub fn d_zeta(f: &DiscField) -> Result<DiscField> {
    wirtinger(f, 1)
}

/// Mode `m` with radial profile `c` maps to mode `m - sign` with
/// profile `(c' - sign * m c / rho) / 2`.
fn wirtinger(f: &DiscField, sign: i64) -> Result<DiscField> {
    let grid = f.grid();
    let n = grid.n_theta();
    let modes = f.modes();
    check_resolved(&modes, n, if sign < 0 { "dbar" } else { "d_zeta" })?;
    let deriv = radial_derivative(grid, &modes);
    let half = (n / 2) as i64;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; grid.n_rings()];
    for (ir, row) in out.iter_mut().enumerate() {
        let r = grid.rho()[ir];
        for k in 0..n {
            let mut m = grid.mode(k);
            if m == half && sign < 0 {
                m = -half;
            }
            let v = 0.5 * (deriv[ir][k] + modes[ir][k] * (sign * m) as f64 / r);
            row[grid.slot(m - sign)] = v;
        }
    }
    Ok(DiscField::from_modes(grid, out))
}

/// Cauchy-Green transform `Tf(zeta) = (1/pi) \iint f(tau) / (zeta - tau) dA(tau)`,
/// the right inverse of [`dbar`] with `T(1) = conj(zeta)`.
pub fn cauchy_green(f: &DiscField) -> DiscField {
    let grid = f.grid();
    let n = grid.n_theta();
    let nr = grid.n_rings();
    let modes = f.modes();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; nr];
    for k in 0..n {
        let m = grid.mode(k);
        let mat = grid.cg_matrix(k);
        let dst = grid.slot(m - 1);
        for i in 0..nr {
            let row = &mat[i * nr..(i + 1) * nr];
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..nr {
                acc += modes[l][k] * row[l];
            }
            out[i][dst] = acc;
        }
    }
    DiscField::from_modes(grid, out)
}

/// Taylor coefficients of the holomorphic function whose boundary real part is `g`
/// and whose imaginary part at the origin is `offset`.
pub fn schwarz_taylor(g: &BoundaryField, offset: f64) -> Result<Vec<Complex64>> {
    g.check_real()?;
    let n = g.len();
    let mut a = Vec::with_capacity(n / 2 + 1);
    a.push(Complex64::new(g.coeff(0).re, offset));
    for m in 1..n / 2 {
        a.push(2.0 * g.coeff(m as i64));
    }
    a.push(g.coeff((n / 2) as i64));
    Ok(a)
}

/// Schwarz integral of a real boundary field, sampled on `grid`.
pub fn schwarz(grid: &Arc<DiscGrid>, g: &BoundaryField) -> Result<DiscField> {
    schwarz_with_offset(grid, g, 0.0)
}

pub fn schwarz_with_offset(grid: &Arc<DiscGrid>, g: &BoundaryField, offset: f64) -> Result<DiscField> {
    if g.len() != grid.n_theta() {
        return Err(Error::Precondition(format!(
            "boundary field has {} samples, grid has {}",
            g.len(),
            grid.n_theta()
        )));
    }
    let a = schwarz_taylor(g, offset)?;
    Ok(DiscField::from_taylor(grid, &a))
}

/// Harmonic conjugate on the circle: multiplier `-i sgn(m)`, Nyquist dropped.
pub fn conjugate(g: &BoundaryField) -> Result<BoundaryField> {
    g.check_real()?;
    let n = g.len() as i64;
    Ok(g.map_coeffs(
        |m, c| {
            if m == 0 || 2 * m == n {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, -(m.signum() as f64))
            }
        },
        true,
    ))
}

/// Conjugate of real samples, returned as real samples.
pub fn conjugate_samples(samples: &[f64]) -> Vec<f64> {
    let g = BoundaryField::from_real_samples(samples);
    let n = g.len() as i64;
    g.map_coeffs(
        |m, c| {
            if m == 0 || 2 * m == n {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, -(m.signum() as f64))
            }
        },
        true,
    )
    .real_samples()
}

/// Winding number of a nowhere-vanishing sampled loop.
pub fn winding_number_samples(samples: &[Complex64]) -> Result<i64> {
    let min = samples.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(min > 1e-8) {
        return Err(Error::ZeroOnCircle { min_modulus: min });
    }
    let n = samples.len();
    let mut total = 0.0;
    for j in 0..n {
        let d = (samples[(j + 1) % n] / samples[j]).arg();
        if d.abs() >= PI * (1.0 - 1e-9) {
            return Err(Error::Underresolved(format!(
                "phase jump {d:.6} between samples {j} and {}",
                (j + 1) % n
            )));
        }
        total += d;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

pub fn winding_number(g: &BoundaryField) -> Result<i64> {
    winding_number_samples(&g.samples())
}
