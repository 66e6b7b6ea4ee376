//! Coordinates on C^2 = R^4.
//!
//! Real points are ordered `(x1, y1, x2, y2)` with `z_k = x_k + i y_k`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub type Point = Vector4<f64>;
pub type C2 = [Complex64; 2];
pub type Mat2c = Matrix2<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn to_complex(p: &Point) -> C2 {
    [Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])]
}

pub fn to_real(z: &C2) -> Point {
    Point::new(z[0].re, z[0].im, z[1].re, z[1].im)
}

/// Multiplication by `i` on each complex coordinate.
pub fn j_standard() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(1, 0)] = 1.0;
    j[(0, 1)] = -1.0;
    j[(3, 2)] = 1.0;
    j[(2, 3)] = -1.0;
    j
}

/// Real 4x4 matrix of the anti-linear map `v -> a * conj(v)`.
pub fn antilinear_matrix(a: &Mat2c) -> Matrix4<f64> {
    let mut u = Matrix4::zeros();
    for row in 0..2 {
        for col in 0..2 {
            let c = a[(row, col)];
            // (c.re + i c.im)(x - i y) = (c.re x + c.im y) + i (c.im x - c.re y)
            u[(2 * row, 2 * col)] = c.re;
            u[(2 * row, 2 * col + 1)] = c.im;
            u[(2 * row + 1, 2 * col)] = c.im;
            u[(2 * row + 1, 2 * col + 1)] = -c.re;
        }
    }
    u
}

/// Real 4x4 matrix of the complex-linear map `v -> m * v`.
pub fn linear_matrix(m: &Mat2c) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    for row in 0..2 {
        for col in 0..2 {
            let c = m[(row, col)];
            out[(2 * row, 2 * col)] = c.re;
            out[(2 * row, 2 * col + 1)] = -c.im;
            out[(2 * row + 1, 2 * col)] = c.im;
            out[(2 * row + 1, 2 * col + 1)] = c.re;
        }
    }
    out
}

pub fn c2_norm(z: &C2) -> f64 {
    (z[0].norm_sqr() + z[1].norm_sqr()).sqrt()
}

pub fn mat2c_norm(a: &Mat2c) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// The vector orthogonal to `a`, `b`, `c` with components `det[a; b; c; e_i]`.
pub fn cross3(a: &Vector4<f64>, b: &Vector4<f64>, c: &Vector4<f64>) -> Vector4<f64> {
    let mut out = Vector4::zeros();
    for i in 0..4 {
        let mut e = Vector4::zeros();
        e[i] = 1.0;
        out[i] = Matrix4::from_rows(&[a.transpose(), b.transpose(), c.transpose(), e.transpose()]).determinant();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antilinear_matrix_matches_complex_action() {
        let a = Mat2c::new(
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.05),
            Complex64::new(0.0, -0.4),
            Complex64::new(0.7, 0.1),
        );
        let v = [Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5)];
        let expect = [
            a[(0, 0)] * v[0].conj() + a[(0, 1)] * v[1].conj(),
            a[(1, 0)] * v[0].conj() + a[(1, 1)] * v[1].conj(),
        ];
        let got = antilinear_matrix(&a) * to_real(&v);
        assert!((got - to_real(&expect)).norm() < 1e-14);
        let lin = linear_matrix(&a) * to_real(&v);
        let expect_lin = [
            a[(0, 0)] * v[0] + a[(0, 1)] * v[1],
            a[(1, 0)] * v[0] + a[(1, 1)] * v[1],
        ];
        assert!((lin - to_real(&expect_lin)).norm() < 1e-14);
    }

    #[test]
    fn cross3_is_orthogonal() {
        let a = Vector4::new(1.0, 2.0, 0.5, -1.0);
        let b = Vector4::new(0.0, 1.0, -1.0, 2.0);
        let c = Vector4::new(3.0, 0.0, 1.0, 1.0);
        let v = cross3(&a, &b, &c);
        assert!(v.norm() > 1.0);
        for w in [a, b, c] {
            assert!(v.dot(&w).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_structure_squares_to_minus_identity() {
        let j = j_standard();
        assert!((j * j + Matrix4::identity()).norm() < 1e-15);
        let v = [Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5)];
        let iv = [I * v[0], I * v[1]];
        assert!((j * to_real(&v) - to_real(&iv)).norm() < 1e-15);
    }
}
