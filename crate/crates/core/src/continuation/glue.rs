use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use super::family::DiscFamily;
use crate::bishop::{psi_apply, BishopDisc};
use crate::disc::{BoundaryField, DiscField, DiscInterpolant};
use crate::error::{Error, Result};
use crate::geometry::Structure;
use crate::scenario::{PoleLabel, Scenario};
use crate::types::{to_real, Point};

/// Radii of the interior circles sampled by [`image_distance`].
pub const INTERIOR_CIRCLES: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 0.9];

const CANDIDATES: usize = 3;

fn eval_pair(f: &[DiscInterpolant; 2], z: Complex64) -> Point {
    to_real(&[f[0].eval(z), f[1].eval(z)])
}

/// Samples of a disc image on the boundary and on [`INTERIOR_CIRCLES`].
pub fn image_samples(disc: &BishopDisc) -> Vec<Point> {
    let mut out = disc.boundary_points();
    let f = disc.interpolants();
    let n = disc.grid().n_theta();
    for &r in &INTERIOR_CIRCLES {
        for j in 0..n {
            out.push(eval_pair(&f, Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64)));
        }
    }
    out
}

/// Parameter `zeta` in the closed disc minimizing `|f(zeta) - x|`, and the distance.
pub fn locate(disc: &BishopDisc, f: &[DiscInterpolant; 2], x: &Point) -> (Complex64, f64) {
    let grid = disc.grid();
    let mut best = (0, f64::INFINITY);
    for idx in 0..grid.len() {
        let d = (disc.node_point(idx) - x).norm_squared();
        if d < best.1 {
            best = (idx, d);
        }
    }
    let nodes = grid.nodes();
    let mut z = nodes[best.0];
    let i = Complex64::new(0.0, 1.0);
    for _ in 0..30 {
        let (a, b) = (f[0].eval_with_derivatives(z, 1e-5), f[1].eval_with_derivatives(z, 1e-5));
        let r = to_real(&[a.0, b.0]) - x;
        let fx = to_real(&[a.1 + a.2, b.1 + b.2]);
        let fy = to_real(&[i * (a.1 - a.2), i * (b.1 - b.2)]);
        let gram = Matrix2::new(fx.dot(&fx), fx.dot(&fy), fy.dot(&fx), fy.dot(&fy));
        let Some(inv) = gram.try_inverse() else { break };
        let step = inv * Vector2::new(fx.dot(&r), fy.dot(&r));
        let mut zn = z - Complex64::new(step[0], step[1]);
        if zn.norm() > 1.0 {
            zn /= zn.norm();
        }
        let moved = (zn - z).norm();
        z = zn;
        if moved < 1e-13 {
            break;
        }
    }
    (z, (eval_pair(f, z) - x).norm())
}

/// One-sided distance from sample points to the image of `disc`.
pub fn distance_to_image(samples: &[Point], disc: &BishopDisc) -> f64 {
    let f = disc.interpolants();
    samples.iter().map(|x| locate(disc, &f, x).1).fold(0.0, f64::max)
}

/// Hausdorff distance between two disc images, estimated from
/// [`image_samples`] projected onto the other image.
pub fn image_distance(a: &BishopDisc, b: &BishopDisc) -> f64 {
    distance_to_image(&image_samples(a), b).max(distance_to_image(&image_samples(b), a))
}

fn boundary_distance(a: &[Point], b: &[Point]) -> f64 {
    let one = |a: &[Point], b: &[Point]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Outcome of [`glue`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueReport {
    /// Global parameter of the last disc of the first family.
    pub junction_t: f64,
    /// Global parameter of the matched disc minus `junction_t`.
    pub offset: f64,
    pub hausdorff: f64,
    pub tolerance: f64,
    pub first_index: usize,
    pub second_index: usize,
    /// Whether a Moebius map was needed to align the pins of the second family.
    pub aligned: bool,
}

/// A family in the global parameter, increasing from `p` to `q`.
#[derive(Debug, Clone)]
pub struct GluedFamily {
    pub family: DiscFamily,
    pub report: GlueReport,
}

fn global_t(label: PoleLabel, t: f64) -> f64 {
    match label {
        PoleLabel::P => t,
        PoleLabel::Q => 1.0 - t,
    }
}

type Mobius = [Complex64; 4];

fn mobius_apply(m: &Mobius, z: Complex64) -> Complex64 {
    (m[0] * z + m[1]) / (m[2] * z + m[3])
}

/// Moebius map sending `a, b, c` to `0, 1, infinity`.
fn to_standard(a: Complex64, b: Complex64, c: Complex64) -> Mobius {
    [b - c, -a * (b - c), b - a, -c * (b - a)]
}

fn mobius_inverse(m: &Mobius) -> Mobius {
    [m[3], -m[1], -m[2], m[0]]
}

fn mobius_compose(m: &Mobius, n: &Mobius) -> Mobius {
    [
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    ]
}

/// The Moebius map with `phi(from[k]) = to[k]`.
pub fn three_point_mobius(from: [Complex64; 3], to: [Complex64; 3]) -> impl Fn(Complex64) -> Complex64 {
    let m = mobius_compose(&mobius_inverse(&to_standard(to[0], to[1], to[2])), &to_standard(from[0], from[1], from[2]));
    move |z| mobius_apply(&m, z)
}

/// The reparametrized disc `f o phi`, with `h` recomputed through `psi`.
pub fn reparametrize(disc: &BishopDisc, structure: &dyn Structure, phi: impl Fn(Complex64) -> Complex64) -> Result<BishopDisc> {
    let grid = disc.grid();
    let f = disc.interpolants();
    let nodes = grid.nodes();
    let g = [
        DiscField::new(grid.clone(), nodes.iter().map(|&z| f[0].eval(phi(z))).collect()),
        DiscField::new(grid.clone(), nodes.iter().map(|&z| f[1].eval(phi(z))).collect()),
    ];
    let hp = psi_apply(structure, &g)?;
    let mut h = [Vec::new(), Vec::new()];
    for k in 0..2 {
        let b = BoundaryField::from_samples(hp[k].boundary());
        let n = disc.h[0].len().max(disc.h[1].len());
        h[k] = (0..n as i64).map(|m| b.coeff(m)).collect();
    }
    Ok(BishopDisc { f: g, h, t: disc.t, diagnostics: disc.diagnostics.clone() })
}

/// Glues `second` onto the end of `first`.
///
/// The member of `second` whose image is closest to the last disc of `first`
/// is located (boundary prescreen, then [`image_distance`] on the best
/// candidates). If it is within `tol`, the pins of `second` are aligned with
/// those of `first` by a Moebius map, its parameter is shifted onto the
/// junction and the members beyond the junction are appended.
pub fn glue(scenario: &Scenario, first: &DiscFamily, second: &DiscFamily, tol: f64) -> Result<GluedFamily> {
    let last = first.last().ok_or_else(|| Error::Precondition("first family is empty".into()))?;
    if second.is_empty() {
        return Err(Error::Precondition("second family is empty".into()));
    }
    let lb = last.boundary_points();
    let mut order: Vec<(usize, f64)> =
        second.discs.iter().enumerate().map(|(k, d)| (k, boundary_distance(&lb, &d.boundary_points()))).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (second_index, hausdorff) = order
        .iter()
        .take(CANDIDATES)
        .map(|&(k, _)| (k, image_distance(last, &second.discs[k])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    if !(hausdorff <= tol) {
        return Err(Error::NoMatch { distance: hausdorff, tolerance: tol });
    }
    let matched = &second.discs[second_index];
    let junction_t = global_t(first.seed_pole, last.t);
    let offset = global_t(second.seed_pole, matched.t) - junction_t;

    // Pins of `first` as seen in the parametrization of the matched disc.
    let pins = [0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0].map(|a| Complex64::from_polar(1.0, a));
    let fl = last.interpolants();
    let fm = matched.interpolants();
    let located = pins.map(|w| locate(matched, &fm, &eval_pair(&fl, w)).0);
    let aligned = pins.iter().zip(&located).any(|(a, b)| (a - b).norm() > 1e-8);

    let increasing = first.seed_pole == PoleLabel::P;
    let mut members: Vec<(BishopDisc, _)> = first
        .discs
        .iter()
        .zip(first.reports.iter().map(Some).chain(std::iter::repeat(None)))
        .map(|(d, r)| {
            let mut d = d.clone();
            d.t = global_t(first.seed_pole, d.t);
            (d, r.cloned())
        })
        .collect();
    let phi = three_point_mobius(pins, located);
    for (d, r) in second.discs.iter().zip(second.reports.iter().map(Some).chain(std::iter::repeat(None))) {
        let t = global_t(second.seed_pole, d.t) - offset;
        let beyond = if increasing { t > junction_t + 1e-12 } else { t < junction_t - 1e-12 };
        if !beyond {
            continue;
        }
        let mut d = if aligned { reparametrize(d, scenario.structure(), &phi)? } else { d.clone() };
        d.t = t;
        members.push((d, r.cloned()));
    }
    members.sort_by(|a, b| a.0.t.total_cmp(&b.0.t));
    let has_reports = members.iter().all(|m| m.1.is_some());
    let (discs, reports): (Vec<_>, Vec<_>) = members.into_iter().unzip();
    let family = DiscFamily {
        discs,
        seed_pole: PoleLabel::P,
        reports: if has_reports { reports.into_iter().flatten().collect() } else { Vec::new() },
    };
    let report = GlueReport {
        junction_t,
        offset,
        hausdorff,
        tolerance: tol,
        first_index: first.len() - 1,
        second_index,
        aligned,
    };
    Ok(GluedFamily { family, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{gauge_leaves, pole_family, StepControls};
    use crate::disc::DiscGrid;
    use crate::geometry::StandardStructure;
    use std::sync::OnceLock;

    fn halves() -> &'static (DiscFamily, DiscFamily) {
        static F: OnceLock<(DiscFamily, DiscFamily)> = OnceLock::new();
        F.get_or_init(|| {
            let s = Scenario::ball();
            let gauge = gauge_leaves(&s).unwrap();
            let grid = DiscGrid::default_grid();
            let c = StepControls { stop_at: Some(0.5), ..StepControls::default() };
            (
                pole_family(&s, PoleLabel::P, &gauge, &grid, &c).unwrap(),
                pole_family(&s, PoleLabel::Q, &gauge, &grid, &c).unwrap(),
            )
        })
    }

    fn flat(c: f64, rot: f64) -> BishopDisc {
        let g = DiscGrid::default_grid();
        let s = (1.0 - c * c).sqrt();
        let h = [vec![Complex64::new(0.0, 0.0), Complex64::from_polar(s, rot)], vec![Complex64::new(c, 0.0)]];
        BishopDisc::from_taylor(&g, h, &StandardStructure, None).unwrap()
    }

    #[test]
    fn image_distance_is_parametrization_free() {
        let (a, b) = (flat(0.3, 0.0), flat(0.3, 1.1));
        assert!(image_distance(&a, &b) < 1e-10);
        let d = image_distance(&a, &flat(0.35, 0.0));
        // boundary circles of radii sqrt(1 - c^2) at heights 0.3 and 0.35
        let exact = ((1.0f64 - 0.09).sqrt() - (1.0f64 - 0.35 * 0.35).sqrt()).hypot(0.05);
        assert!((d - exact).abs() < 1e-8, "{d} {exact}");
    }

    #[test]
    fn three_point_mobius_is_a_disc_rotation_for_rotated_points() {
        let w = [0.0, 2.0, -2.0].map(|a: f64| Complex64::from_polar(1.0, a));
        let v = w.map(|z| z * Complex64::from_polar(1.0, 0.4));
        let phi = three_point_mobius(w, v);
        let z = Complex64::new(0.3, -0.2);
        assert!((phi(z) - z * Complex64::from_polar(1.0, 0.4)).norm() < 1e-14);
    }

    #[test]
    fn ball_halves_glue_at_the_junction() {
        let s = Scenario::ball();
        let (p, q) = halves();
        let g = glue(&s, p, q, 1e-5).unwrap();
        assert!(g.report.hausdorff <= 1e-5);
        assert!(!g.report.aligned);
        let c_p = p.last().unwrap().f[1].boundary()[0].re;
        let c_q = q.discs[g.report.second_index].f[1].boundary()[0].re;
        assert!((c_p - c_q).abs() < 1e-6);
        assert_eq!(g.family.len(), p.len() + q.len() - 1);
        // monotone in x2
        let heights: Vec<f64> = g.family.discs.iter().map(|d| d.f[1].boundary()[0].re).collect();
        assert!(heights.windows(2).all(|w| w[1] < w[0]));
        assert!(g.family.discs.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(g.family.reports.len(), g.family.len());

        let swapped = glue(&s, q, p, 1e-5).unwrap();
        assert!((swapped.report.junction_t - g.report.junction_t).abs() <= 1e-8);
    }

    #[test]
    fn rotated_second_family_is_realigned() {
        let s = Scenario::ball();
        let (p, q) = halves();
        let mut rotated = q.clone();
        let rot = Complex64::from_polar(1.0, 0.7);
        for d in rotated.discs.iter_mut() {
            *d = reparametrize(d, &StandardStructure, |z| z * rot).unwrap();
        }
        let g = glue(&s, p, &rotated, 1e-5).unwrap();
        assert!(g.report.aligned);
        let next = &g.family.discs[p.len()];
        let reference = &q.discs[q.len() - 2];
        assert!((next.f[0].sup_dist(&reference.f[0])) < 1e-8);
        assert!((next.h[0][1] - reference.h[0][1]).norm() < 1e-8);
    }

    #[test]
    fn truncated_families_do_not_match() {
        let s = Scenario::ball();
        let (p, q) = halves();
        let cut = |f: &DiscFamily| DiscFamily { discs: f.discs[..5].to_vec(), seed_pole: f.seed_pole, reports: vec![] };
        assert!(matches!(glue(&s, &cut(p), &cut(q), 1e-5), Err(Error::NoMatch { .. })));
    }
}
