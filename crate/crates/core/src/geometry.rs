//! Almost complex structures, Levi forms and related ambient quantities.

use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disc::{d_zeta, dbar, DiscField, DiscGrid};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::types::{antilinear_matrix, j_standard, to_complex, to_real, Mat2c, Point};

/// Step for the finite-difference exterior derivative in the Levi form.
pub const H_FD: f64 = 1e-4;

/// An almost complex structure on a chart of C^2.
///
/// Implementors provide the deformation tensor `A(p)` in closed form; the
/// real matrix `J(p)` is reconstructed from it unless overridden.
pub trait Structure: Send + Sync {
    fn tensor(&self, p: &Point) -> Mat2c;

    fn matrix(&self, p: &Point) -> Matrix4<f64> {
        matrix_from_tensor(&self.tensor(p))
    }

    /// True when `A` vanishes identically.
    fn is_standard(&self) -> bool {
        false
    }
}

/// The standard structure, multiplication by `i`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardStructure;

impl Structure for StandardStructure {
    fn tensor(&self, _p: &Point) -> Mat2c {
        Mat2c::zeros()
    }

    fn matrix(&self, _p: &Point) -> Matrix4<f64> {
        j_standard()
    }

    fn is_standard(&self) -> bool {
        true
    }
}

type TensorFn = dyn Fn(&Point) -> Mat2c + Send + Sync;

/// Structure given by a closed-form deformation tensor.
pub struct TensorStructure {
    tensor: Box<TensorFn>,
}

impl TensorStructure {
    pub fn new(tensor: impl Fn(&Point) -> Mat2c + Send + Sync + 'static) -> Self {
        TensorStructure { tensor: Box::new(tensor) }
    }
}

impl Structure for TensorStructure {
    fn tensor(&self, p: &Point) -> Mat2c {
        (self.tensor)(p)
    }
}

/// Pull-back of a structure under `z = shift + diag(scale) z'`.
///
/// The tensor transforms as `A'(z') = D^{-1} A(z) conj(D)`.
pub struct LinearPullback {
    inner: Arc<dyn Structure>,
    shift: [Complex64; 2],
    scale: [Complex64; 2],
}

impl LinearPullback {
    pub fn new(inner: Arc<dyn Structure>, shift: [Complex64; 2], scale: [Complex64; 2]) -> Self {
        LinearPullback { inner, shift, scale }
    }

    pub fn forward(&self, zp: &Point) -> Point {
        let z = to_complex(zp);
        to_real(&[self.shift[0] + self.scale[0] * z[0], self.shift[1] + self.scale[1] * z[1]])
    }
}

impl Structure for LinearPullback {
    fn tensor(&self, p: &Point) -> Mat2c {
        if self.inner.is_standard() {
            return Mat2c::zeros();
        }
        let a = self.inner.tensor(&self.forward(p));
        let mut out = Mat2c::zeros();
        for j in 0..2 {
            for k in 0..2 {
                out[(j, k)] = a[(j, k)] * self.scale[k].conj() / self.scale[j];
            }
        }
        out
    }

    fn is_standard(&self) -> bool {
        self.inner.is_standard()
    }
}

/// `J = (I - u) J_st (I - u)^{-1}` with `u(v) = A conj(v)`.
pub fn matrix_from_tensor(a: &Mat2c) -> Matrix4<f64> {
    let u = antilinear_matrix(a);
    let id = Matrix4::identity();
    let inv = (id - u).try_inverse().expect("I - u is invertible for small A");
    (id - u) * j_standard() * inv
}

/// Inverse of [`matrix_from_tensor`]: `u = -(J_st + J)^{-1}(J_st - J)`.
pub fn tensor_from_matrix(j: &Matrix4<f64>) -> Result<Mat2c> {
    let jst = j_standard();
    let sum = jst + j;
    let lu = sum.lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::SingularMatrix);
    }
    let u = -lu.solve(&(jst - j)).ok_or(Error::SingularMatrix)?;
    let mut a = Mat2c::zeros();
    for k in 0..2 {
        let col = u.column(2 * k);
        a[(0, k)] = Complex64::new(col[0], col[1]);
        a[(1, k)] = Complex64::new(col[2], col[3]);
    }
    Ok(a)
}

/// A scalar field on the chart with its gradient.
pub trait ScalarField: Send + Sync {
    fn value(&self, p: &Point) -> Result<f64>;

    fn gradient(&self, p: &Point) -> Result<Vector4<f64>> {
        fd_gradient(|q| self.value(q), p)
    }
}

/// Fourth-order central differences with step `1e-3`.
pub fn fd_gradient(f: impl Fn(&Point) -> Result<f64>, p: &Point) -> Result<Vector4<f64>> {
    let h = 1e-3;
    let mut g = Vector4::zeros();
    for k in 0..4 {
        let at = |s: f64| {
            let mut q = *p;
            q[k] += s * h;
            f(&q)
        };
        g[k] = (8.0 * (at(1.0)? - at(-1.0)?) - (at(2.0)? - at(-2.0)?)) / (12.0 * h);
    }
    Ok(g)
}

type ValueFn = dyn Fn(&Point) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Point) -> Vector4<f64> + Send + Sync;

/// Closed-form scalar field.
pub struct FnField {
    value: Box<ValueFn>,
    gradient: Option<Box<GradFn>>,
}

impl FnField {
    pub fn new(value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        FnField { value: Box::new(value), gradient: None }
    }

    pub fn with_gradient(
        value: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Point) -> Vector4<f64> + Send + Sync + 'static,
    ) -> Self {
        FnField { value: Box::new(value), gradient: Some(Box::new(gradient)) }
    }
}

impl ScalarField for FnField {
    fn value(&self, p: &Point) -> Result<f64> {
        Ok((self.value)(p))
    }

    fn gradient(&self, p: &Point) -> Result<Vector4<f64>> {
        match &self.gradient {
            Some(g) => Ok(g(p)),
            None => fd_gradient(|q| Ok((self.value)(q)), p),
        }
    }
}

/// The standard symplectic form `dx1^dy1 + dx2^dy2` as a matrix, `omega(v, w) = v^T W w`.
pub fn standard_omega() -> Matrix4<f64> {
    let mut w = Matrix4::zeros();
    w[(0, 1)] = 1.0;
    w[(1, 0)] = -1.0;
    w[(2, 3)] = 1.0;
    w[(3, 2)] = -1.0;
    w
}

/// An ambient chart: structure, symplectic form, defining function and
/// optional plurisubharmonic auxiliary function.
///
/// The symplectic form is constant, so it is closed.
#[derive(Clone)]
pub struct AmbientChart {
    pub domain: [(f64, f64); 4],
    pub structure: Arc<dyn Structure>,
    pub omega: Matrix4<f64>,
    pub r: Arc<dyn ScalarField>,
    pub psi: Option<Arc<dyn ScalarField>>,
}

impl AmbientChart {
    pub fn j(&self, p: &Point) -> Matrix4<f64> {
        self.structure.matrix(p)
    }

    pub fn sample_point(&self, rng: &mut impl Rng) -> Point {
        let mut p = Point::zeros();
        for k in 0..4 {
            let (a, b) = self.domain[k];
            p[k] = rng.random_range(a..b);
        }
        p
    }
}

/// Complex deformation tensor of a chart normalized at `base`.
#[derive(Clone)]
pub struct DeformationTensor {
    structure: Arc<dyn Structure>,
    pub base_point: Point,
}

impl DeformationTensor {
    /// `A(p)` obtained from `J(p)` by the Cayley-type formula.
    pub fn at(&self, p: &Point) -> Result<Mat2c> {
        tensor_from_matrix(&self.structure.matrix(p))
    }
}

pub fn deformation_tensor(chart: &AmbientChart, base: &Point) -> Result<DeformationTensor> {
    let deviation = (chart.j(base) - j_standard()).norm();
    if deviation > 1e-10 {
        return Err(Error::NotNormalized { deviation });
    }
    Ok(DeformationTensor { structure: chart.structure.clone(), base_point: *base })
}

/// Outcome of the chart invariant suite.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartReport {
    pub max_square_defect: f64,
    pub min_taming: f64,
    pub pass: bool,
}

/// Checks `J^2 = -I` and `omega(v, Jv) > 0` at random points and unit vectors.
pub fn check_chart(chart: &AmbientChart, points: usize, vectors_per_point: usize, seed: u64) -> ChartReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_square_defect: f64 = 0.0;
    let mut min_taming = f64::INFINITY;
    for _ in 0..points {
        let p = chart.sample_point(&mut rng);
        let j = chart.j(&p);
        max_square_defect = max_square_defect.max((j * j + Matrix4::identity()).norm());
        for _ in 0..vectors_per_point {
            let v = random_unit(&mut rng);
            min_taming = min_taming.min((v.transpose() * chart.omega * j * v)[0]);
        }
    }
    ChartReport {
        max_square_defect,
        min_taming,
        pass: max_square_defect <= 1e-10 && min_taming > 0.0,
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Vector4<f64> {
    loop {
        let v = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn levi_at_step(chart: &AmbientChart, rho: &dyn ScalarField, p: &Point, t: &Vector4<f64>, h: f64) -> Result<f64> {
    let alpha = |q: &Point| -> Result<Vector4<f64>> { Ok(chart.j(q).transpose() * rho.gradient(q)?) };
    let jt = chart.j(p) * t;
    let d_t = (alpha(&(p + t * h))? - alpha(&(p - t * h))?) / (2.0 * h);
    let d_jt = (alpha(&(p + jt * h))? - alpha(&(p - jt * h))?) / (2.0 * h);
    Ok(-(d_t.dot(&jt) - d_jt.dot(t)))
}

/// Levi form `-d(J^* d rho)(t, J t)` with constant extension of `t`.
///
/// The exterior derivative uses central differences at steps `h` and `2h`;
/// the Richardson combination is returned. Starting from `h = H_FD`, the step
/// is refined twice by a factor 4 while the two estimates disagree.
pub fn levi_form(chart: &AmbientChart, rho: &dyn ScalarField, p: &Point, t: &Vector4<f64>) -> Result<f64> {
    let mut relative_gap = f64::INFINITY;
    for k in 0..3 {
        let h = H_FD / 4f64.powi(k);
        let a = levi_at_step(chart, rho, p, t, h)?;
        let b = levi_at_step(chart, rho, p, t, 2.0 * h)?;
        let scale = a.abs().max(b.abs()) + 1e-3 * t.norm_squared();
        relative_gap = (a - b).abs() / scale;
        if relative_gap <= 1e-3 {
            return Ok((4.0 * a - b) / 3.0);
        }
    }
    Err(Error::StepTooLarge { relative_gap })
}

/// Radius of the probe discs used by [`levi_form_via_disc`].
pub const PROBE_RADIUS: f64 = 1e-2;

/// Levi form as the Laplacian of `rho` along a small J-holomorphic disc
/// through `p` with `df(0) e1 = t`.
pub fn levi_form_via_disc(chart: &AmbientChart, rho: &dyn ScalarField, p: &Point, t: &Vector4<f64>) -> Result<f64> {
    let grid = DiscGrid::new(32, 12)?;
    let s = PROBE_RADIUS;
    let pc = to_complex(p);
    let tc = to_complex(t);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // h = a + b zeta, adjusted until f(0) = p and d_x f(0) = s t.
    let mut a = pc;
    let mut b = [s * tc[0], s * tc[1]];
    let mut f = None;
    for _ in 0..30 {
        let h = [
            DiscField::from_taylor(&grid, &[a[0], b[0]]),
            DiscField::from_taylor(&grid, &[a[1], b[1]]),
        ];
        let fi = crate::bishop::psi_inverse(chart.structure.as_ref(), &h, f.as_ref())
            .map_err(|e| Error::DiscSolveFailed(e.to_string()))?;
        let mut err: f64 = 0.0;
        for k in 0..2 {
            let v = fi[k].interpolant().eval(zero);
            let fx = d_zeta(&fi[k])?.interpolant().eval(zero) + dbar(&fi[k])?.interpolant().eval(zero);
            let e0 = pc[k] - v;
            let e1 = s * tc[k] - fx;
            a[k] += e0;
            b[k] += e1;
            err = err.max(e0.norm()).max(e1.norm() / s);
        }
        f = Some(fi);
        if err < 1e-12 {
            break;
        }
    }
    let f = f.expect("at least one iteration");
    // Exact derivatives at the origin from the spectral data.
    let d = [d_zeta(&f[0])?, d_zeta(&f[1])?];
    let db = [dbar(&f[0])?, dbar(&f[1])?];
    let fx: Vec<Complex64> = (0..2)
        .map(|k| d[k].interpolant().eval(zero) + db[k].interpolant().eval(zero))
        .collect();
    let f0: Vec<Complex64> = (0..2).map(|k| f[k].interpolant().eval(zero)).collect();
    let pos_err = (f0[0] - pc[0]).norm() + (f0[1] - pc[1]).norm();
    let dir_err = (fx[0] - s * tc[0]).norm() + (fx[1] - s * tc[1]).norm();
    if pos_err > 1e-10 || dir_err > 1e-10 * s {
        return Err(Error::DiscSolveFailed(format!(
            "probe disc misses its constraints ({pos_err:.2e}, {dir_err:.2e})"
        )));
    }
    let its = [f[0].interpolant(), f[1].interpolant()];
    let eval = |z: Complex64| -> Result<f64> {
        let q = to_real(&[its[0].eval(z), its[1].eval(z)]);
        rho.value(&q)
    };
    let delta = 0.05;
    let i = Complex64::new(0.0, 1.0);
    let c = eval(zero)?;
    let lap = (eval(one * delta)? + eval(-one * delta)? + eval(i * delta)? + eval(-i * delta)? - 4.0 * c)
        / (delta * delta);
    Ok(lap / (s * s))
}

/// Result of a plurisubharmonicity check over samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PshReport {
    pub min_value: f64,
    pub argmin: usize,
    pub positive_fraction: f64,
    pub pass: bool,
}

/// Minimum Levi value over the samples; passes iff the minimum is at least `-1e-8`.
pub fn check_plurisubharmonic(
    chart: &AmbientChart,
    rho: &dyn ScalarField,
    samples: &[(Point, Vector4<f64>)],
) -> Result<PshReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let mut min_value = f64::INFINITY;
    let mut argmin = 0;
    let mut positive = 0usize;
    for (k, (p, t)) in samples.iter().enumerate() {
        let l = levi_form(chart, rho, p, t)?;
        if l > 0.0 {
            positive += 1;
        }
        if l < min_value {
            min_value = l;
            argmin = k;
        }
    }
    Ok(PshReport {
        min_value,
        argmin,
        positive_fraction: positive as f64 / samples.len() as f64,
        pass: min_value >= -1e-8,
    })
}

/// The exhaustion `-(-r e^{-A psi})^eta`.
pub struct DfExhaustion {
    r: Arc<dyn ScalarField>,
    psi: Arc<dyn ScalarField>,
    a: f64,
    eta: f64,
}

impl ScalarField for DfExhaustion {
    fn value(&self, p: &Point) -> Result<f64> {
        let r = self.r.value(p)?;
        if r >= 0.0 {
            return Err(Error::DomainError(format!("r = {r:.3e} is not negative")));
        }
        let psi = self.psi.value(p)?;
        Ok(-(-r * (-self.a * psi).exp()).powf(self.eta))
    }

    /// Chain rule: `grad rho = rho * eta * (grad r / r - A grad psi)`.
    fn gradient(&self, p: &Point) -> Result<Vector4<f64>> {
        let rho = self.value(p)?;
        let r = self.r.value(p)?;
        let gr = self.r.gradient(p)?;
        let gp = self.psi.gradient(p)?;
        Ok((gr / r - gp * self.a) * (rho * self.eta))
    }
}

pub fn df_exhaustion(chart: &AmbientChart, a: f64, eta: f64) -> Result<DfExhaustion> {
    let psi = chart
        .psi
        .clone()
        .ok_or_else(|| Error::Precondition("chart has no auxiliary function psi".into()))?;
    if !(a >= 0.0) || !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Precondition(format!("invalid exhaustion parameters A = {a}, eta = {eta}")));
    }
    Ok(DfExhaustion { r: chart.r.clone(), psi, a, eta })
}

/// Default collar band `r in [-0.05, -0.01]` for exhaustion checks.
pub const COLLAR_BAND: (f64, f64) = (-0.05, -0.01);

/// Random points with `r` in `band` together with random unit vectors.
///
/// Points are found by bisection of `r` along rays from the origin, which
/// requires the sublevel set `{r < 0}` to be star-shaped about the origin.
pub fn collar_samples(chart: &AmbientChart, band: (f64, f64), count: usize, seed: u64) -> Result<Vec<(Point, Vector4<f64>)>> {
    if !(band.0 < band.1 && band.1 < 0.0) {
        return Err(Error::Precondition(format!("collar band {band:?} must be negative and increasing")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r0 = chart.r.value(&Point::zeros())?;
    if !(r0 < band.0) {
        return Err(Error::Precondition("origin does not lie below the collar".into()));
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = random_unit(&mut rng);
        let target = rng.random_range(band.0..band.1);
        let mut hi = 1.0;
        while chart.r.value(&(u * hi))? < target {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Precondition("sublevel set is unbounded along a ray".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if chart.r.value(&(u * mid))? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push((u * (0.5 * (lo + hi)), random_unit(&mut rng)));
    }
    Ok(out)
}

/// One `(A, eta)` pair of a Diederich-Fornaess scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DfScanEntry {
    pub a: f64,
    pub eta: f64,
    /// The check, or the Levi-form error that stopped it.
    pub outcome: Result<PshReport>,
}

impl DfScanEntry {
    /// Non-negative everywhere and strictly positive on at least 95% of the samples.
    pub fn pass(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.pass && r.positive_fraction >= 0.95)
    }
}

/// Plurisubharmonicity of `-(-r e^{-A psi})^eta` on the samples for every pair.
pub fn df_scan(
    chart: &AmbientChart,
    a_values: &[f64],
    eta_values: &[f64],
    samples: &[(Point, Vector4<f64>)],
) -> Result<Vec<DfScanEntry>> {
    let mut out = Vec::with_capacity(a_values.len() * eta_values.len());
    for &a in a_values {
        for &eta in eta_values {
            let rho = df_exhaustion(chart, a, eta)?;
            out.push(DfScanEntry { a, eta, outcome: check_plurisubharmonic(chart, &rho, samples) });
        }
    }
    Ok(out)
}

/// Real tangent vectors `(d_x f, d_y f)` of a disc pair at every node.
pub fn disc_partials(f: &[DiscField; 2]) -> Result<(Vec<Vector4<f64>>, Vec<Vector4<f64>>)> {
    let dz = [d_zeta(&f[0])?, d_zeta(&f[1])?];
    let dzb = [dbar(&f[0])?, dbar(&f[1])?];
    let i = Complex64::new(0.0, 1.0);
    let n = f[0].values().len();
    let mut fx = Vec::with_capacity(n);
    let mut fy = Vec::with_capacity(n);
    for idx in 0..n {
        let a = [dz[0].values()[idx], dz[1].values()[idx]];
        let b = [dzb[0].values()[idx], dzb[1].values()[idx]];
        fx.push(to_real(&[a[0] + b[0], a[1] + b[1]]));
        fy.push(to_real(&[i * (a[0] - b[0]), i * (a[1] - b[1])]));
    }
    Ok((fx, fy))
}

/// Symplectic area `\int_D f^* omega` with the grid quadrature.
pub fn disc_area(f: &[DiscField; 2], omega: &Matrix4<f64>) -> Result<f64> {
    let (fx, fy) = disc_partials(f)?;
    let grid = f[0].grid();
    let mut total = 0.0;
    for ir in 0..grid.n_rho() {
        let w = grid.area_weight(ir);
        for j in 0..grid.n_theta() {
            let idx = grid.index(ir, j);
            total += w * (fx[idx].transpose() * omega * fy[idx])[0];
        }
    }
    Ok(total)
}

/// A two-sphere given as upper and lower graphs over the closed unit disc,
/// `(s, theta, upper) -> point`, joined along `s = 1`.
pub trait SphereParam: Send + Sync {
    fn sphere_point(&self, s: f64, theta: f64, upper: bool) -> Point;
}

/// `\int_{S^2} |omega|` by Gauss-Legendre in `s` and the trapezoid rule in `theta`.
pub fn sphere_area_bound(surface: &dyn SphereParam, omega: &Matrix4<f64>) -> f64 {
    let (ss, ws) = gauss_legendre_on(96, 0.0, 1.0);
    let nth = 128;
    let dth = 2.0 * std::f64::consts::PI / nth as f64;
    let mut total = 0.0;
    for upper in [true, false] {
        for (&s, &w) in ss.iter().zip(&ws) {
            let hs = 1e-7;
            for j in 0..nth {
                let th = j as f64 * dth;
                let fs = (surface.sphere_point(s + hs, th, upper) - surface.sphere_point(s - hs, th, upper)) / (2.0 * hs);
                let ft = (surface.sphere_point(s, th + 1e-6, upper) - surface.sphere_point(s, th - 1e-6, upper)) / 2e-6;
                total += w * dth * (fs.transpose() * omega * ft)[0].abs();
            }
        }
    }
    total
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn levi_form_is_quadratic(
            p in proptest::array::uniform4(-0.5f64..0.5),
            t in proptest::array::uniform4(-1.0f64..1.0),
            lambda in prop_oneof![Just(2.0), Just(3.0)],
        ) {
            let chart = AmbientChart {
                domain: [(-1.0, 1.0); 4],
                structure: Arc::new(TensorStructure::new(|p: &Point| {
                    let z = to_complex(p);
                    let e = Complex64::new(0.05, 0.0) * (Complex64::new(1.0, 0.0) - z[1] * z[1]);
                    Mat2c::new(Complex64::new(0.0, 0.0), e, e, Complex64::new(0.0, 0.0))
                })),
                omega: standard_omega(),
                r: Arc::new(FnField::new(|p: &Point| p.norm_squared() - 1.0)),
                psi: None,
            };
            let p = Point::from(p);
            let t = Vector4::from(t);
            prop_assume!(t.norm() > 0.1);
            let l1 = levi_form(&chart, chart.r.as_ref(), &p, &t).unwrap();
            let l2 = levi_form(&chart, chart.r.as_ref(), &p, &(t * lambda)).unwrap();
            prop_assert!((l2 - lambda * lambda * l1).abs() <= 1e-8 * (1.0 + l2.abs()));
        }

        #[test]
        fn exhaustion_is_monotone_in_r(
            psi in 0.0f64..2.0,
            a in 0.0f64..8.0,
            eta in 0.1f64..1.0,
            r1 in -1.0f64..-0.001,
            dr in 0.0001f64..0.5,
        ) {
            // r = x1 - 1 along the x1 axis, psi held constant.
            let chart = AmbientChart {
                domain: [(-1.0, 1.0); 4],
                structure: Arc::new(StandardStructure),
                omega: standard_omega(),
                r: Arc::new(FnField::new(|p: &Point| p[0] - 1.0)),
                psi: Some(Arc::new(FnField::new(move |_: &Point| psi))),
            };
            let f = df_exhaustion(&chart, a, eta).unwrap();
            let r2 = (r1 + dr).min(-1e-4);
            prop_assume!(r2 > r1);
            let v1 = f.value(&Point::new(1.0 + r1, 0.0, 0.0, 0.0)).unwrap();
            let v2 = f.value(&Point::new(1.0 + r2, 0.0, 0.0, 0.0)).unwrap();
            prop_assert!(v2 > v1);
        }

        #[test]
        fn taming_holds_for_small_tensors(seed in 0u64..1000) {
            let chart = AmbientChart {
                domain: [(-1.0, 1.0); 4],
                structure: Arc::new(TensorStructure::new(|p: &Point| {
                    let z = to_complex(p);
                    let e = Complex64::new(0.05, 0.0) * (Complex64::new(1.0, 0.0) - z[1] * z[1]);
                    Mat2c::new(Complex64::new(0.0, 0.0), e, e, Complex64::new(0.0, 0.0))
                })),
                omega: standard_omega(),
                r: Arc::new(FnField::new(|p: &Point| p.norm_squared() - 1.0)),
                psi: None,
            };
            let rep = check_chart(&chart, 10, 50, seed);
            prop_assert!(rep.pass, "{:?}", rep);
        }
    }
}
