use std::sync::Arc;

use nalgebra::{Matrix3x4, Vector4};

use crate::bishop::{PinCurve, Surface};
use crate::error::{Error, Result};
use crate::scenario::{gauge_angles, Pole, PoleLabel, Scenario};
use crate::types::{cross3, Point};

/// Unit vector spanning `ker dr ∩ ker(J^* dr) ∩ TS` at `s`, oriented along `previous`.
pub fn characteristic_field(scenario: &Scenario, s: &Point, previous: Option<&Vector4<f64>>) -> Result<Vector4<f64>> {
    if scenario.poles.iter().any(|p| p.in_cap(s, scenario.trim)) {
        return Err(Error::ComplexPointProximity);
    }
    raw_field(scenario, s, previous)
}

fn raw_field(scenario: &Scenario, s: &Point, previous: Option<&Vector4<f64>>) -> Result<Vector4<f64>> {
    let [g1, g2] = scenario.surface.rho_gradients(s);
    let jr = scenario.chart.j(s).transpose() * scenario.chart.r.gradient(s)?;
    let rows = [g1.normalize(), g2.normalize(), jr.normalize()];
    let m = Matrix3x4::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()]);
    let sv = m.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-6 * smax) {
        return Err(Error::ComplexPointProximity);
    }
    let mut v = cross3(&rows[0], &rows[1], &rows[2]).normalize();
    if let Some(p) = previous {
        if v.dot(p) < 0.0 {
            v = -v;
        }
    }
    Ok(v)
}

/// How a leaf ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LeafEnd {
    /// Entered the trim cap of the given pole.
    Pole(PoleLabel),
    /// Left the chart domain (local scenarios).
    Domain,
}

/// An integral curve of the characteristic field between two trim caps,
/// extended by radial rays in adapted coordinates to the poles themselves.
#[derive(Clone)]
pub struct CharacteristicLeaf {
    pub points: Vec<Point>,
    pub arclength: Vec<f64>,
    pub start_trim: f64,
    pub end_trim: f64,
    pub start: PoleLabel,
    pub end: LeafEnd,
    /// Pole, leaf points and pole again, used as the gauge curve.
    curve: Vec<Point>,
    /// Chord-length tangents of `curve` for its cubic Hermite interpolant.
    tangents: Vec<Vector4<f64>>,
    surface: Arc<dyn Surface>,
}

impl std::fmt::Debug for CharacteristicLeaf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CharacteristicLeaf")
            .field("points", &self.points.len())
            .field("length", &self.length())
            .field("start", &self.start)
            .field("end", &self.end)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Largest turn of the field over one step, in radians.
    pub angle_tol: f64,
    pub max_length: f64,
    /// Radius of the tube used to detect closed leaves.
    pub tube: f64,
}

impl Default for LeafOptions {
    fn default() -> Self {
        LeafOptions { initial_step: 1e-3, min_step: 1e-9, max_step: 0.01, angle_tol: 2e-3, max_length: 50.0, tube: 1e-3 }
    }
}

const RAY_POINTS: usize = 10;

fn cap_ray(pole: &Pole, end: &Point) -> Vec<Point> {
    let z = pole.to_adapted(end);
    let (s, alpha) = (z[0].norm(), z[0].arg());
    let mut ray: Vec<Point> = (0..RAY_POINTS).map(|k| pole.sphere_point(s * k as f64 / RAY_POINTS as f64, alpha)).collect();
    ray.push(*end);
    ray
}

impl CharacteristicLeaf {
    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap_or(&0.0)
    }

    /// Leaf point at arclength fraction `t`, projected onto the sphere.
    pub fn point_at(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Precondition(format!("leaf parameter {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(self.points[0]);
        }
        if t == 1.0 {
            return Ok(*self.points.last().unwrap());
        }
        let s = t * self.length();
        let k = self.arclength.partition_point(|&a| a <= s).clamp(1, self.points.len() - 1);
        let (a0, a1) = (self.arclength[k - 1], self.arclength[k]);
        let w = if a1 > a0 { (s - a0) / (a1 - a0) } else { 0.0 };
        let x = self.points[k - 1] * (1.0 - w) + self.points[k] * w;
        self.surface.project(&x)
    }

    /// The full gauge curve from pole to pole.
    pub fn curve(&self) -> &[Point] {
        &self.curve
    }

    /// Closest point of the polygonal gauge curve: `(point, segment, fraction)`.
    fn closest(&self, x: &Point) -> (Point, usize, f64) {
        let mut best = (f64::INFINITY, self.curve[0], 0, 0.0);
        for k in 0..self.curve.len() - 1 {
            let (a, b) = (self.curve[k], self.curve[k + 1]);
            let d = b - a;
            let len2 = d.norm_squared();
            let w = if len2 > 0.0 { ((x - a).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let y = a + d * w;
            let dist = (x - y).norm_squared();
            if dist < best.0 {
                best = (dist, y, k, w);
            }
        }
        (best.1, best.2, best.3)
    }

    /// Hermite segment `k` at `u`: value, first and second derivative.
    fn hermite(&self, k: usize, u: f64) -> [Vector4<f64>; 3] {
        let (a, b) = (self.curve[k], self.curve[k + 1]);
        let len = (b - a).norm();
        let (ma, mb) = (self.tangents[k] * len, self.tangents[k + 1] * len);
        let (u2, u3) = (u * u, u * u * u);
        let p = a * (2.0 * u3 - 3.0 * u2 + 1.0) + ma * (u3 - 2.0 * u2 + u) + b * (3.0 * u2 - 2.0 * u3) + mb * (u3 - u2);
        let d = a * (6.0 * u2 - 6.0 * u) + ma * (3.0 * u2 - 4.0 * u + 1.0) + b * (6.0 * u - 6.0 * u2) + mb * (3.0 * u2 - 2.0 * u);
        let dd = a * (12.0 * u - 6.0) + ma * (6.0 * u - 4.0) + b * (6.0 - 12.0 * u) + mb * (6.0 * u - 2.0);
        [p, d, dd]
    }

    /// Closest point of the `C^1` gauge curve and its tangent.
    fn closest_smooth(&self, x: &Point) -> (Point, Vector4<f64>) {
        let (_, k0, w0) = self.closest(x);
        let last = self.curve.len() - 2;
        let mut best = (f64::INFINITY, self.curve[k0], self.curve[k0 + 1] - self.curve[k0]);
        for k in k0.saturating_sub(1)..=(k0 + 1).min(last) {
            let mut u = if k == k0 { w0 } else if k < k0 { 1.0 } else { 0.0 };
            for _ in 0..20 {
                let [p, d, dd] = self.hermite(k, u);
                let g = (p - x).dot(&d);
                let gp = d.norm_squared() + (p - x).dot(&dd);
                if !(gp > 0.0) {
                    break;
                }
                let un = (u - g / gp).clamp(0.0, 1.0);
                let moved = (un - u).abs();
                u = un;
                if moved < 1e-15 {
                    break;
                }
            }
            let [p, d, _] = self.hermite(k, u);
            let dist = (p - x).norm_squared();
            if dist < best.0 {
                best = (dist, p, d);
            }
        }
        (best.1, best.2)
    }

    /// Number of transversal crossings of a closed sampled curve with the gauge curve.
    pub fn crossings(&self, closed: &[Point]) -> usize {
        let n = closed.len();
        let last_segment = self.curve.len() - 2;
        let info: Vec<(f64, bool)> = closed
            .iter()
            .map(|x| {
                let (_, k, w) = self.closest(x);
                let at_end = (k == 0 && w == 0.0) || (k == last_segment && w == 1.0);
                (self.signed_distance(x), at_end)
            })
            .collect();
        (0..n)
            .filter(|&j| {
                let (a, b) = (info[j], info[(j + 1) % n]);
                let gap = (closed[(j + 1) % n] - closed[j]).norm();
                a.0.signum() != b.0.signum() && !a.1 && !b.1 && a.0.abs() + b.0.abs() <= 2.0 * gap
            })
            .count()
    }
}

impl PinCurve for CharacteristicLeaf {
    /// Distance to the gauge curve, signed by the normal `cross3(grad rho_1, grad rho_2, tangent)`.
    fn signed_distance(&self, x: &Point) -> f64 {
        let (y, tau) = self.closest_smooth(x);
        let [g1, g2] = self.surface.rho_gradients(&y);
        let nu = cross3(&g1, &g2, &tau);
        let nn = nu.norm();
        if nn == 0.0 {
            return (x - y).norm();
        }
        (x - y).dot(&nu) / nn
    }
}

/// Second-order unit-speed tangents of a polyline from its chord lengths.
fn chord_tangents(curve: &[Point]) -> Vec<Vector4<f64>> {
    let n = curve.len();
    let chord = |k: usize| {
        let d = curve[k + 1] - curve[k];
        let l = d.norm();
        (if l > 0.0 { d / l } else { d }, l)
    };
    (0..n)
        .map(|k| {
            if k == 0 {
                chord(0).0
            } else if k == n - 1 {
                chord(n - 2).0
            } else {
                let ((da, la), (db, lb)) = (chord(k - 1), chord(k));
                if la + lb > 0.0 {
                    (da * lb + db * la) / (la + lb)
                } else {
                    da
                }
            }
        })
        .collect()
}

fn rk4_step(scenario: &Scenario, x: &Point, k1: &Vector4<f64>, h: f64) -> Result<(Point, Vector4<f64>)> {
    let k2 = raw_field(scenario, &(x + k1 * (h / 2.0)), Some(k1))?;
    let k3 = raw_field(scenario, &(x + k2 * (h / 2.0)), Some(k1))?;
    let k4 = raw_field(scenario, &(x + k3 * h), Some(k1))?;
    let y = scenario.surface.project(&(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)))?;
    Ok((y, k4))
}

/// Integrates the characteristic field from a point on the boundary of a
/// trim cap until it enters another cap or leaves the chart.
pub fn integrate_leaf(scenario: &Scenario, start: &Point) -> Result<CharacteristicLeaf> {
    integrate_leaf_with(scenario, start, &LeafOptions::default())
}

pub fn integrate_leaf_with(scenario: &Scenario, start: &Point, opts: &LeafOptions) -> Result<CharacteristicLeaf> {
    let trim = scenario.trim;
    let origin = scenario
        .poles
        .iter()
        .find(|p| {
            let z = p.to_adapted(start);
            z[1].norm() < 1.0 && z[0].norm() >= trim * (1.0 - 1e-9) && z[0].norm() <= 2.0 * trim
        })
        .ok_or_else(|| Error::Precondition("leaf start is not in a trim annulus".into()))?;
    let target = scenario.poles.iter().find(|p| p.label != origin.label);
    let start = scenario.surface.project(start)?;

    let mut dir = raw_field(scenario, &start, None)?;
    if origin.cap_radius(&(start + dir * 1e-6)) < origin.cap_radius(&start) {
        dir = -dir;
    }
    let mut points = vec![start];
    let mut arclength = vec![0.0];
    let mut x = start;
    let mut h = opts.initial_step;
    let mut end = None;
    while end.is_none() {
        let s = *arclength.last().unwrap();
        if s > opts.max_length {
            return Err(Error::LeafStalled { arclength: s });
        }
        let k1 = raw_field(scenario, &x, Some(&dir))?;
        let (y, k4) = rk4_step(scenario, &x, &k1, h)?;
        let turn = k1.dot(&k4).clamp(-1.0, 1.0).acos();
        if turn > opts.angle_tol && h > opts.min_step {
            h *= 0.5;
            continue;
        }
        if h < opts.min_step {
            return Err(Error::LeafStalled { arclength: s });
        }
        let entered = target.filter(|p| p.in_cap(&y, trim));
        let outside = !scenario.in_domain(&y);
        let mut advance = h;
        let y = if entered.is_some() || outside {
            // Bisect the step length onto the cap boundary or the chart boundary.
            let inside = |p: &Point| match entered {
                Some(pole) => !pole.in_cap(p, trim),
                None => scenario.in_domain(p),
            };
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (p, _) = rk4_step(scenario, &x, &k1, mid)?;
                if inside(&p) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            end = Some(entered.map(|p| LeafEnd::Pole(p.label)).unwrap_or(LeafEnd::Domain));
            advance = lo;
            let (mut p, _) = rk4_step(scenario, &x, &k1, lo)?;
            if let Some(pole) = entered {
                // Land exactly on the cap circle.
                let z = pole.to_adapted(&p);
                p = pole.sphere_point(trim, z[0].arg());
            }
            p
        } else {
            y
        };
        // The field has unit length, so the integration parameter is arclength.
        let s_new = s + advance;
        for (q, a) in points.iter().zip(&arclength) {
            if s_new - a > 10.0 * opts.tube && (y - q).norm() < opts.tube {
                return Err(Error::ClosedLeafDetected { arclength: s_new });
            }
        }
        points.push(y);
        arclength.push(s_new);
        dir = k1;
        x = y;
        if turn < opts.angle_tol / 4.0 {
            h = (h * 1.5).min(opts.max_step);
        }
    }
    let end = end.expect("loop exits with an end");
    let mut curve = cap_ray(origin, &points[0]);
    curve.pop();
    curve.extend_from_slice(&points);
    if let LeafEnd::Pole(label) = end {
        let pole = scenario.pole(label)?;
        let mut tail = cap_ray(pole, points.last().unwrap());
        tail.reverse();
        curve.extend(tail.into_iter().skip(1));
    }
    let tangents = chord_tangents(&curve);
    Ok(CharacteristicLeaf {
        tangents,
        points,
        arclength,
        start_trim: trim,
        end_trim: trim,
        start: origin.label,
        end,
        curve,
        surface: scenario.surface.clone(),
    })
}

/// The three gauge leaves starting on the cap of pole `p` at angles `0, 2 pi/3, -2 pi/3`.
#[derive(Debug, Clone)]
pub struct Gauge {
    pub leaves: [CharacteristicLeaf; 3],
}

impl Gauge {
    pub fn reference(&self) -> &CharacteristicLeaf {
        &self.leaves[0]
    }
}

pub fn gauge_leaves(scenario: &Scenario) -> Result<Gauge> {
    let p = scenario.pole(PoleLabel::P)?;
    let [a, b, c] = gauge_angles();
    let leaf = |alpha: f64| integrate_leaf(scenario, &p.sphere_point(scenario.trim, alpha));
    Ok(Gauge { leaves: [leaf(a)?, leaf(b)?, leaf(c)?] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioKind;

    #[test]
    fn ball_field_is_tangent_and_complex_orthogonal() {
        let s = Scenario::ball();
        let a = 1.0 / 2f64.sqrt();
        let p = Point::new(a, 0.0, a, 0.0);
        let v = characteristic_field(&s, &p, None).unwrap();
        let [g1, g2] = s.surface.rho_gradients(&p);
        let jr = s.chart.j(&p).transpose() * s.chart.r.gradient(&p).unwrap();
        assert!(v.dot(&g1).abs() <= 1e-10 && v.dot(&g2).abs() <= 1e-10 && v.dot(&jr).abs() <= 1e-10);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        // meridian direction: radial in z1, along x2
        assert!(v[2].abs() > 0.5 && v[1].abs() < 1e-12);
    }

    #[test]
    fn field_is_rejected_inside_trim_caps() {
        let s = Scenario::ball();
        let p = s.pole(PoleLabel::P).unwrap().sphere_point(0.01, 0.4);
        assert_eq!(characteristic_field(&s, &p, None), Err(Error::ComplexPointProximity));
    }

    #[test]
    fn ball_leaf_runs_between_the_caps() {
        let s = Scenario::ball();
        let p = s.pole(PoleLabel::P).unwrap();
        let leaf = integrate_leaf(&s, &p.sphere_point(s.trim, 0.7)).unwrap();
        assert_eq!(leaf.end, LeafEnd::Pole(PoleLabel::Q));
        let q = s.pole(PoleLabel::Q).unwrap();
        assert!((q.cap_radius(leaf.points.last().unwrap()) - s.trim).abs() < 1e-12);
        for x in &leaf.points {
            let r = s.surface.rho_pair(x);
            assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
            // meridian: constant angle in z1
            assert!((x[1].atan2(x[0]) - 0.7).abs() < 1e-9);
        }
        // every circle x2 = c is crossed exactly once
        for c in [-0.9, -0.5, 0.0, 0.3, 0.8] {
            let n = leaf.points.windows(2).filter(|w| (w[0][2] - c) * (w[1][2] - c) < 0.0).count();
            assert_eq!(n, 1);
        }
        let expected = (s.trim).asin();
        assert!((leaf.length() - (std::f64::consts::PI - 2.0 * expected)).abs() < 1e-8);
    }

    #[test]
    fn model_quadric_leaf_climbs_the_quadric() {
        let s = Scenario::build(ScenarioKind::ModelQuadric { gamma: 0.3 }).unwrap();
        let p = s.pole(PoleLabel::P).unwrap();
        let leaf = integrate_leaf(&s, &p.sphere_point(s.trim, 1.0)).unwrap();
        assert_eq!(leaf.end, LeafEnd::Domain);
        let levels: Vec<f64> = leaf.points.iter().map(|x| crate::bishop::quadric(0.3, crate::types::to_complex(x)[0])).collect();
        assert!(levels.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn start_outside_trim_annulus_is_rejected() {
        let s = Scenario::ball();
        let p = s.pole(PoleLabel::P).unwrap().sphere_point(0.4, 0.0);
        assert!(matches!(integrate_leaf(&s, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn point_at_interpolates_on_the_sphere() {
        let s = Scenario::ball();
        let leaf = integrate_leaf(&s, &s.pole(PoleLabel::P).unwrap().sphere_point(s.trim, 0.0)).unwrap();
        let x = leaf.point_at(0.5).unwrap();
        assert!(x[2].abs() < 1e-6);
        assert!(leaf.signed_distance(&x).abs() < 1e-12);
        let off = Point::new(x[0], 0.01, x[2], 0.0);
        assert!((leaf.signed_distance(&off).abs() - 0.01).abs() < 1e-6);
    }

    #[test]
    fn flat_circle_crosses_the_leaf_once() {
        let s = Scenario::ball();
        let leaf = integrate_leaf(&s, &s.pole(PoleLabel::P).unwrap().sphere_point(s.trim, 0.0)).unwrap();
        for c in [0.9, 0.2, -0.6] {
            let r = (1.0f64 - c * c).sqrt();
            let circle: Vec<Point> = (0..64)
                .map(|j| {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / 64.0 + 0.01;
                    Point::new(r * th.cos(), r * th.sin(), c, 0.0)
                })
                .collect();
            assert_eq!(leaf.crossings(&circle), 1);
        }
    }
}
