//! Parametrized smooth closed curves, their Nystrom quadrature grids, and
//! the elliptic coordinate map.
//!
//! Every curve is stored by a trigonometric parametrization
//! `x(t) = sum_m xc[m] cos(mt) + xs[m] sin(mt)` (same for the second
//! coordinate), traversed counterclockwise over `t in [0, 2pi)`.  Circles and
//! ellipses are special cases, kept tagged so that downstream code can use
//! exact shape data when available.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// JSON schema for curves, consumed by the CLI:
/// `{"shape": "circle", "radius": r, "center": [x, y]?}`,
/// `{"shape": "ellipse", "a": ..., "b": ..., "center": ...?}`, or
/// `{"shape": "trig", "x_cos": [...], "x_sin": [...], "y_cos": [...], "y_sin": [...]}`
/// where index m multiplies `cos(mt)` / `sin(mt)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum CurveSpec {
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Trig {
        x_cos: Vec<f64>,
        #[serde(default)]
        x_sin: Vec<f64>,
        y_cos: Vec<f64>,
        #[serde(default)]
        y_sin: Vec<f64>,
    },
}

/// Shape tag retained by a validated curve.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeInfo {
    Circle { radius: f64, center: [f64; 2] },
    Ellipse { a: f64, b: f64, center: [f64; 2] },
    Trig,
}

/// A C^{1,alpha} Jordan curve with origin strictly inside, counterclockwise.
#[derive(Debug, Clone)]
pub struct ClosedCurve {
    xc: Vec<f64>,
    xs: Vec<f64>,
    yc: Vec<f64>,
    ys: Vec<f64>,
    shape: ShapeInfo,
}

const VALIDATION_GRID: usize = 512;

impl ClosedCurve {
    pub fn circle(radius: f64) -> Result<Self> {
        Self::circle_at(radius, [0.0, 0.0])
    }

    pub fn circle_at(radius: f64, center: [f64; 2]) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidCurve("circle radius must be positive".into()));
        }
        let curve = ClosedCurve {
            xc: vec![center[0], radius],
            xs: vec![0.0, 0.0],
            yc: vec![center[1], 0.0],
            ys: vec![0.0, radius],
            shape: ShapeInfo::Circle { radius, center },
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::ellipse_at(a, b, [0.0, 0.0])
    }

    pub fn ellipse_at(a: f64, b: f64, center: [f64; 2]) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidCurve(
                "ellipse semi-axes must be positive".into(),
            ));
        }
        let curve = ClosedCurve {
            xc: vec![center[0], a],
            xs: vec![0.0, 0.0],
            yc: vec![center[1], 0.0],
            ys: vec![0.0, b],
            shape: ShapeInfo::Ellipse { a, b, center },
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn trig(xc: Vec<f64>, xs: Vec<f64>, yc: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let curve = ClosedCurve {
            xc,
            xs,
            yc,
            ys,
            shape: ShapeInfo::Trig,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        match spec {
            CurveSpec::Circle { radius, center } => Self::circle_at(*radius, *center),
            CurveSpec::Ellipse { a, b, center } => Self::ellipse_at(*a, *b, *center),
            CurveSpec::Trig {
                x_cos,
                x_sin,
                y_cos,
                y_sin,
            } => Self::trig(x_cos.clone(), x_sin.clone(), y_cos.clone(), y_sin.clone()),
        }
    }

    pub fn shape(&self) -> &ShapeInfo {
        &self.shape
    }

    /// Translate by `d` (the shape tag follows for circles and ellipses).
    pub fn translate(&self, d: [f64; 2]) -> Result<Self> {
        let mut xc = self.xc.clone();
        let mut yc = self.yc.clone();
        if xc.is_empty() {
            xc.push(0.0);
        }
        if yc.is_empty() {
            yc.push(0.0);
        }
        xc[0] += d[0];
        yc[0] += d[1];
        let shape = match self.shape {
            ShapeInfo::Circle { radius, center } => ShapeInfo::Circle {
                radius,
                center: [center[0] + d[0], center[1] + d[1]],
            },
            ShapeInfo::Ellipse { a, b, center } => ShapeInfo::Ellipse {
                a,
                b,
                center: [center[0] + d[0], center[1] + d[1]],
            },
            ShapeInfo::Trig => ShapeInfo::Trig,
        };
        let curve = ClosedCurve {
            xc,
            xs: self.xs.clone(),
            yc,
            ys: self.ys.clone(),
            shape,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        [
            eval_trig(&self.xc, &self.xs, t),
            eval_trig(&self.yc, &self.ys, t),
        ]
    }

    pub fn velocity(&self, t: f64) -> [f64; 2] {
        [
            eval_trig_deriv(&self.xc, &self.xs, t),
            eval_trig_deriv(&self.yc, &self.ys, t),
        ]
    }

    pub fn acceleration(&self, t: f64) -> [f64; 2] {
        [
            eval_trig_deriv2(&self.xc, &self.xs, t),
            eval_trig_deriv2(&self.yc, &self.ys, t),
        ]
    }

    pub fn speed(&self, t: f64) -> f64 {
        let v = self.velocity(t);
        v[0].hypot(v[1])
    }

    /// Outward unit normal (counterclockwise orientation assumed).
    pub fn normal(&self, t: f64) -> [f64; 2] {
        let v = self.velocity(t);
        let s = v[0].hypot(v[1]);
        [v[1] / s, -v[0] / s]
    }

    /// Signed curvature.
    pub fn curvature(&self, t: f64) -> f64 {
        let v = self.velocity(t);
        let a = self.acceleration(t);
        let s = v[0].hypot(v[1]);
        (v[0] * a[1] - v[1] * a[0]) / (s * s * s)
    }

    /// Enclosed area by the boundary divergence formula
    /// `A = 1/2 oint (x1 dx2 - x2 dx1)`.
    pub fn area(&self) -> f64 {
        let n = 1024;
        let mut s = 0.0;
        for i in 0..n {
            let t = 2.0 * PI * i as f64 / n as f64;
            let p = self.point(t);
            let v = self.velocity(t);
            s += p[0] * v[1] - p[1] * v[0];
        }
        0.5 * s * 2.0 * PI / n as f64
    }

    pub fn length(&self) -> f64 {
        let n = 1024;
        (0..n)
            .map(|i| self.speed(2.0 * PI * i as f64 / n as f64))
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    /// Largest distance of a boundary point from the origin.
    pub fn max_radius(&self) -> f64 {
        (0..VALIDATION_GRID)
            .map(|i| {
                let p = self.point(2.0 * PI * i as f64 / VALIDATION_GRID as f64);
                p[0].hypot(p[1])
            })
            .fold(0.0f64, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        // cheap bound adequate for near-curve warnings
        2.0 * self.max_radius()
    }

    /// Winding-number test; `true` when `x` is strictly inside.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        let n = VALIDATION_GRID;
        let mut winding = 0.0;
        let mut prev = self.point(0.0);
        for i in 1..=n {
            let t = 2.0 * PI * i as f64 / n as f64;
            let p = self.point(t);
            let a0 = (prev[1] - x[1]).atan2(prev[0] - x[0]);
            let a1 = (p[1] - x[1]).atan2(p[0] - x[0]);
            let mut da = a1 - a0;
            while da > PI {
                da -= 2.0 * PI;
            }
            while da < -PI {
                da += 2.0 * PI;
            }
            winding += da;
            prev = p;
        }
        (winding / (2.0 * PI)).round() != 0.0
    }

    /// Distance from `x` to the sampled boundary.
    pub fn distance_to(&self, x: [f64; 2]) -> f64 {
        (0..VALIDATION_GRID)
            .map(|i| {
                let p = self.point(2.0 * PI * i as f64 / VALIDATION_GRID as f64);
                (p[0] - x[0]).hypot(p[1] - x[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Scale all positions by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidCurve("scale factor must be positive".into()));
        }
        let scale_vec = |v: &[f64]| v.iter().map(|c| c * factor).collect::<Vec<_>>();
        let shape = match self.shape {
            ShapeInfo::Circle { radius, center } => ShapeInfo::Circle {
                radius: radius * factor,
                center: [center[0] * factor, center[1] * factor],
            },
            ShapeInfo::Ellipse { a, b, center } => ShapeInfo::Ellipse {
                a: a * factor,
                b: b * factor,
                center: [center[0] * factor, center[1] * factor],
            },
            ShapeInfo::Trig => ShapeInfo::Trig,
        };
        Ok(ClosedCurve {
            xc: scale_vec(&self.xc),
            xs: scale_vec(&self.xs),
            yc: scale_vec(&self.yc),
            ys: scale_vec(&self.ys),
            shape,
        })
    }

    fn validate(&self) -> Result<()> {
        let n = VALIDATION_GRID;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| self.point(2.0 * PI * i as f64 / n as f64))
            .collect();
        for i in 0..n {
            let t = 2.0 * PI * i as f64 / n as f64;
            if self.speed(t) <= 1e-9 {
                return Err(Error::InvalidCurve(format!(
                    "parametrization speed vanishes near t = {t:.4}"
                )));
            }
        }
        if self.area() <= 0.0 {
            return Err(Error::InvalidCurve(
                "curve must be traversed counterclockwise (signed area <= 0)".into(),
            ));
        }
        if !self.contains([0.0, 0.0]) {
            return Err(Error::InvalidCurve(
                "origin must lie strictly inside".into(),
            ));
        }
        if self_intersects(&pts) {
            return Err(Error::InvalidCurve(
                "curve self-intersects on the check grid".into(),
            ));
        }
        Ok(())
    }
}

fn eval_trig(c: &[f64], s: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for (m, &cm) in c.iter().enumerate() {
        v += cm * (m as f64 * t).cos();
    }
    for (m, &sm) in s.iter().enumerate() {
        v += sm * (m as f64 * t).sin();
    }
    v
}

fn eval_trig_deriv(c: &[f64], s: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for (m, &cm) in c.iter().enumerate() {
        v -= cm * m as f64 * (m as f64 * t).sin();
    }
    for (m, &sm) in s.iter().enumerate() {
        v += sm * m as f64 * (m as f64 * t).cos();
    }
    v
}

fn eval_trig_deriv2(c: &[f64], s: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for (m, &cm) in c.iter().enumerate() {
        v -= cm * (m as f64) * (m as f64) * (m as f64 * t).cos();
    }
    for (m, &sm) in s.iter().enumerate() {
        v -= sm * (m as f64) * (m as f64) * (m as f64 * t).sin();
    }
    v
}

fn self_intersects(pts: &[[f64; 2]]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        for j in (i + 2)..n {
            // skip adjacent segments (shared endpoint)
            if i == 0 && j == n - 1 {
                continue;
            }
            let c = pts[j];
            let d = pts[(j + 1) % n];
            if segments_cross(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Scale `curve` by `eps`; when `outer` is supplied the scaled curve must
/// stay strictly inside it.
pub fn scale_curve(
    curve: &ClosedCurve,
    eps: f64,
    outer: Option<&ClosedCurve>,
) -> Result<ClosedCurve> {
    if !(eps > 0.0) {
        return Err(Error::Domain("scaling factor must be positive".into()));
    }
    let scaled = curve.scaled(eps)?;
    if let Some(omega) = outer {
        if !hole_inside(&scaled, omega) {
            let eps0 = eps0_estimate(curve, omega);
            return Err(Error::Containment { eps, eps0 });
        }
    }
    Ok(scaled)
}

fn hole_inside(hole: &ClosedCurve, omega: &ClosedCurve) -> bool {
    let n = 256;
    for i in 0..n {
        let p = hole.point(2.0 * PI * i as f64 / n as f64);
        if !omega.contains(p) || omega.distance_to(p) < 1e-9 {
            return false;
        }
    }
    true
}

/// Numerical estimate of the largest eps with `eps * closure(omega_hole)`
/// inside `omega`; bisection on the sampled containment predicate, with no
/// sharpness guarantee.
pub fn eps0_estimate(hole: &ClosedCurve, omega: &ClosedCurve) -> f64 {
    let mut lo = 0.0;
    let mut hi = 4.0 * omega.max_radius() / hole.max_radius().max(1e-12);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let scaled = match hole.scaled(mid) {
            Ok(c) => c,
            Err(_) => break,
        };
        if hole_inside(&scaled, omega) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Nystrom grid on a closed curve: equispaced parameter nodes with
/// positions, outward normals, speeds, curvatures, and trapezoidal weights.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub n: usize,
    pub t: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub speeds: Vec<f64>,
    pub curvatures: Vec<f64>,
    /// Arc-length weights `speed * 2pi/n`.
    pub weights: Vec<f64>,
    curve: ClosedCurve,
}

pub const DEFAULT_NODES: usize = 256;

impl QuadratureGrid {
    pub fn new(curve: &ClosedCurve, n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidCurve(format!(
                "node count must be even and at least 16, got {n}"
            )));
        }
        let mut t = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut speeds = Vec::with_capacity(n);
        let mut curvatures = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let ti = 2.0 * PI * i as f64 / n as f64;
            t.push(ti);
            points.push(curve.point(ti));
            normals.push(curve.normal(ti));
            let s = curve.speed(ti);
            speeds.push(s);
            curvatures.push(curve.curvature(ti));
            weights.push(s * 2.0 * PI / n as f64);
        }
        Ok(QuadratureGrid {
            n,
            t,
            points,
            normals,
            speeds,
            curvatures,
            weights,
            curve: curve.clone(),
        })
    }

    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted boundary integral of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Elliptic coordinates attached to the ellipse with semi-axes `a > b > 0`:
/// `c^2 = a^2 - b^2`, `a = c cosh(xi_bar)`, `b = c sinh(xi_bar)`.
#[derive(Debug, Clone, Copy)]
pub struct EllipticCoords {
    pub c: f64,
    pub xi_bar: f64,
}

impl EllipticCoords {
    pub fn from_ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > b && b > 0.0) {
            return Err(Error::Domain(format!(
                "elliptic coordinates need a > b > 0, got a = {a}, b = {b}"
            )));
        }
        let c = (a * a - b * b).sqrt();
        Ok(EllipticCoords {
            c,
            xi_bar: (a / c).acosh(),
        })
    }

    /// The conformal map `(xi, eta) -> (c cosh xi cos eta, c sinh xi sin eta)`.
    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        assert!(xi >= 0.0, "elliptic map requires xi >= 0");
        [
            self.c * xi.cosh() * eta.cos(),
            self.c * xi.sinh() * eta.sin(),
        ]
    }

    pub fn map_jacobian(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        [
            [
                self.c * xi.sinh() * eta.cos(),
                -self.c * xi.cosh() * eta.sin(),
            ],
            [
                self.c * xi.cosh() * eta.sin(),
                self.c * xi.sinh() * eta.cos(),
            ],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn wavy_curve() -> ClosedCurve {
        // trig-polynomial perturbed circle
        ClosedCurve::trig(
            vec![0.0, 1.0, 0.0, 0.12],
            vec![0.0, 0.0, 0.08],
            vec![0.0, 0.0, -0.05],
            vec![0.0, 1.0, 0.0, 0.1],
        )
        .unwrap()
    }

    #[test]
    fn circle_and_ellipse_areas() {
        let c = ClosedCurve::circle(1.0).unwrap();
        assert_abs_diff_eq!(c.area(), PI, epsilon = 1e-12);
        let e = ClosedCurve::ellipse(1.5, 0.7).unwrap();
        assert_abs_diff_eq!(e.area(), PI * 1.5 * 0.7, epsilon = 1e-10);
    }

    #[test]
    fn wavy_area_matches_shoelace_oracle() {
        let w = wavy_curve();
        // polygonal shoelace at 1e5 vertices
        let n = 100_000;
        let mut s = 0.0;
        let mut prev = w.point(0.0);
        for i in 1..=n {
            let p = w.point(2.0 * PI * i as f64 / n as f64);
            s += prev[0] * p[1] - prev[1] * p[0];
            prev = p;
        }
        assert_abs_diff_eq!(w.area(), 0.5 * s, epsilon = 1e-8);
    }

    #[test]
    fn scaling() {
        let c = ClosedCurve::circle(1.0).unwrap();
        let s = scale_curve(&c, 0.25, None).unwrap();
        match s.shape() {
            ShapeInfo::Circle { radius, .. } => assert_abs_diff_eq!(*radius, 0.25),
            _ => panic!("shape tag lost"),
        }
        let e = ClosedCurve::ellipse(1.5, 0.7).unwrap();
        let se = scale_curve(&e, 0.1, None).unwrap();
        assert_abs_diff_eq!(se.area(), PI * 0.15 * 0.07, epsilon = 1e-12);
        // normals unchanged, speeds scaled
        let t = 1.234;
        assert_abs_diff_eq!(se.normal(t)[0], e.normal(t)[0], epsilon = 1e-13);
        assert_abs_diff_eq!(se.speed(t), 0.1 * e.speed(t), epsilon = 1e-13);
    }

    #[test]
    fn containment_rejects_boundary_contact() {
        let omega = ClosedCurve::circle(1.0).unwrap();
        let hole = ClosedCurve::circle(1.0).unwrap();
        assert!(scale_curve(&hole, 1.0, Some(&omega)).is_err());
        assert!(scale_curve(&hole, 0.5, Some(&omega)).is_ok());
        let eps0 = eps0_estimate(&hole, &omega);
        assert!((eps0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn normals_unit_and_outward() {
        let w = wavy_curve();
        let g = QuadratureGrid::new(&w, 128).unwrap();
        // centroid of the boundary samples
        let mut cx = 0.0;
        let mut cy = 0.0;
        for p in &g.points {
            cx += p[0];
            cy += p[1];
        }
        cx /= g.n as f64;
        cy /= g.n as f64;
        for i in 0..g.n {
            let nv = g.normals[i];
            assert_abs_diff_eq!(nv[0].hypot(nv[1]), 1.0, epsilon = 1e-12);
            let dx = g.points[i][0] - cx;
            let dy = g.points[i][1] - cy;
            assert!(
                nv[0] * dx + nv[1] * dy > 0.0,
                "normal not outward at node {i}"
            );
        }
    }

    #[test]
    fn grid_refinement_is_spectral() {
        let e = ClosedCurve::ellipse(1.3, 0.6).unwrap();
        let g1 = QuadratureGrid::new(&e, 64).unwrap();
        let g2 = QuadratureGrid::new(&e, 128).unwrap();
        assert_abs_diff_eq!(g1.length(), g2.length(), epsilon = 1e-12);
        let c = ClosedCurve::circle(2.0).unwrap();
        let gc = QuadratureGrid::new(&c, 64).unwrap();
        assert_abs_diff_eq!(gc.length(), 4.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn elliptic_map_vertices_and_orthogonality() {
        let ec = EllipticCoords::from_ellipse(1.5, 0.7).unwrap();
        let v1 = ec.map(ec.xi_bar, 0.0);
        assert_abs_diff_eq!(v1[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v1[1], 0.0, epsilon = 1e-12);
        let v2 = ec.map(ec.xi_bar, PI / 2.0);
        assert_abs_diff_eq!(v2[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v2[1], 0.7, epsilon = 1e-12);
        // conformality: the two coordinate directions stay orthogonal
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let xi = 2.0 * next();
            let eta = 2.0 * PI * next();
            let j = ec.map_jacobian(xi, eta);
            let dot = j[0][0] * j[0][1] + j[1][0] * j[1][1];
            assert_abs_diff_eq!(dot, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_clockwise_and_excluded_origin() {
        // clockwise circle: swap sin sign
        let cw = ClosedCurve::trig(
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, -1.0],
        );
        assert!(cw.is_err());
        let off = ClosedCurve::circle_at(0.5, [2.0, 0.0]);
        assert!(off.is_err());
    }

    #[test]
    fn curvature_of_circle() {
        let c = ClosedCurve::circle(2.0).unwrap();
        for i in 0..8 {
            assert_relative_eq!(c.curvature(i as f64), 0.5, max_relative = 1e-12);
        }
    }
}
