use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// A function on the unit circle in Fourier form.
///
/// Coefficients are stored in FFT slot order: slot `k` holds frequency `k` for
/// `k <= n/2` and `k - n` above.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    coeffs: Vec<Complex64>,
    real: bool,
}

impl BoundaryField {
    pub fn from_samples(samples: &[Complex64]) -> Self {
        let n = samples.len();
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let s = 1.0 / n as f64;
        for v in &mut buf {
            *v *= s;
        }
        BoundaryField { coeffs: buf, real: false }
    }

    /// Real-valued field; the flag is validated by [`BoundaryField::check_real`].
    pub fn from_real_samples(samples: &[f64]) -> Self {
        let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut b = Self::from_samples(&c);
        b.real = true;
        b
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let s: Vec<Complex64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
        Self::from_samples(&s)
    }

    pub fn from_real_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let s: Vec<f64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
        Self::from_real_samples(&s)
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>, real: bool) -> Self {
        BoundaryField { coeffs, real }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_flagged_real(&self) -> bool {
        self.real
    }

    pub fn mode(&self, k: usize) -> i64 {
        let n = self.coeffs.len() as i64;
        if (k as i64) <= n / 2 {
            k as i64
        } else {
            k as i64 - n
        }
    }

    /// Coefficient of frequency `m` (zero outside the band).
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        if m.abs() > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[m.rem_euclid(n) as usize]
    }

    pub fn samples(&self) -> Vec<Complex64> {
        let n = self.coeffs.len();
        let mut buf = self.coeffs.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }

    pub fn real_samples(&self) -> Vec<f64> {
        self.samples().into_iter().map(|v| v.re).collect()
    }

    /// Checks the conjugate symmetry required of a real-valued field.
    pub fn check_real(&self) -> Result<()> {
        if !self.real {
            return Err(Error::NotReal);
        }
        let n = self.coeffs.len();
        for k in 0..n {
            let partner = (n - k) % n;
            if (self.coeffs[k] - self.coeffs[partner].conj()).norm() > 1e-12 {
                return Err(Error::NotReal);
            }
        }
        Ok(())
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let n = self.coeffs.len();
        let mut out = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let m = self.mode(k);
            if 2 * m == n as i64 {
                out += self.coeffs[k] * (m as f64 * theta).cos();
            } else {
                out += self.coeffs[k] * Complex64::from_polar(1.0, m as f64 * theta);
            }
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64, real: bool) -> Self {
        let coeffs = (0..self.coeffs.len()).map(|k| f(self.mode(k), self.coeffs[k])).collect();
        BoundaryField { coeffs, real }
    }
}
