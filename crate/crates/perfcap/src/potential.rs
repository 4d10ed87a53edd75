//! Logarithmic potential theory on closed curves: the fundamental solution
//! `S(x) = log|x| / 2pi` with all partial derivatives, single and double
//! layer potentials, and Nystrom matrices for the boundary operators.
//!
//! On-curve single-layer traces use the classical trigonometric product
//! quadrature for periodic logarithmic kernels (Kress weights); the double
//! layer kernels are smooth on analytic curves and take plain trapezoidal
//! weights with the curvature limit on the diagonal.  Normal derivatives of
//! double layer potentials are evaluated through the Maue-type identity
//! `T psi = d/ds V[d psi/ds]`, which keeps everything spectrally accurate.

use crate::error::{Error, Result};
use crate::geometry::QuadratureGrid;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// S(x) = log|x| / (2 pi).
pub fn fundamental(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1]).ln() / (2.0 * PI)
}

/// grad S(x) = x / (2 pi |x|^2).
pub fn grad_fundamental(x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    [x[0] / (2.0 * PI * r2), x[1] / (2.0 * PI * r2)]
}

/// Mixed partial `d1^a d2^b S` evaluated via the holomorphic derivative of
/// `log z / 2pi`: for n = a + b >= 1 it equals
/// `(1/2pi) (-1)^(n-1) (n-1)! Re(i^b / z^n)`.
pub fn fundamental_deriv(a: usize, b: usize, x: [f64; 2]) -> f64 {
    let n = a + b;
    if n == 0 {
        return fundamental(x);
    }
    // i^b / z^n in polar form
    let r = x[0].hypot(x[1]);
    let theta = x[1].atan2(x[0]);
    let phase = b as f64 * PI / 2.0 - n as f64 * theta;
    let mut fact = 1.0;
    for m in 1..n {
        fact *= m as f64;
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * fact / (2.0 * PI) * phase.cos() / r.powi(n as i32)
}

/// Gradient of `d1^a d2^b S`.
pub fn grad_fundamental_deriv(a: usize, b: usize, x: [f64; 2]) -> [f64; 2] {
    [
        fundamental_deriv(a + 1, b, x),
        fundamental_deriv(a, b + 1, x),
    ]
}

/// Laplacian of S away from the origin vanishes; finite-difference check
/// used by tests.
pub fn laplacian_fd(x: [f64; 2], h: f64) -> f64 {
    (fundamental([x[0] + h, x[1]])
        + fundamental([x[0] - h, x[1]])
        + fundamental([x[0], x[1] + h])
        + fundamental([x[0], x[1] - h])
        - 4.0 * fundamental(x))
        / (h * h)
}

/// Boundary operator flavors assembled by [`assemble`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Trace of the double layer potential (without the jump term).
    DoubleLayer,
    /// Adjoint: normal derivative kernel of the single layer.
    AdjointDoubleLayer,
    /// Single layer trace with logarithmic-kernel quadrature.
    SingleLayerTrace,
    /// Single layer kernel from `source` evaluated at off-curve `target` points.
    CrossSingle,
    /// `nu_target(x) . grad S(x - y)` from `source` to off-curve `target`.
    CrossGradTargetNormal,
}

/// Dense Nystrom matrix for one of the boundary operators.
#[derive(Debug, Clone)]
pub struct LayerOperatorMatrix {
    pub kind: OperatorKind,
    pub matrix: DMatrix<f64>,
}

fn same_grid(a: &QuadratureGrid, b: &QuadratureGrid) -> bool {
    a.n == b.n
        && a.points
            .iter()
            .zip(&b.points)
            .all(|(p, q)| p[0] == q[0] && p[1] == q[1])
}

/// Assemble the Nystrom matrix of the named operator. Same-curve kinds
/// require `source` and `target` to be the same grid.
pub fn assemble(
    kind: OperatorKind,
    source: &QuadratureGrid,
    target: &QuadratureGrid,
) -> Result<LayerOperatorMatrix> {
    if source.n % 2 != 0 {
        return Err(Error::InvalidCurve("odd node counts are rejected".into()));
    }
    let matrix = match kind {
        OperatorKind::DoubleLayer
        | OperatorKind::AdjointDoubleLayer
        | OperatorKind::SingleLayerTrace => {
            if !same_grid(source, target) {
                return Err(Error::InvalidCurve(
                    "same-curve operator requested with distinct source and target grids".into(),
                ));
            }
            match kind {
                OperatorKind::DoubleLayer => double_layer_matrix(source),
                OperatorKind::AdjointDoubleLayer => adjoint_double_layer_matrix(source),
                _ => single_layer_trace_matrix(source),
            }
        }
        OperatorKind::CrossSingle => {
            let mut m = DMatrix::zeros(target.n, source.n);
            for i in 0..target.n {
                for j in 0..source.n {
                    let d = diff(target.points[i], source.points[j]);
                    m[(i, j)] = fundamental(d) * source.weights[j];
                }
            }
            m
        }
        OperatorKind::CrossGradTargetNormal => {
            let mut m = DMatrix::zeros(target.n, source.n);
            for i in 0..target.n {
                let nu = target.normals[i];
                for j in 0..source.n {
                    let d = diff(target.points[i], source.points[j]);
                    let g = grad_fundamental(d);
                    m[(i, j)] = (nu[0] * g[0] + nu[1] * g[1]) * source.weights[j];
                }
            }
            m
        }
    };
    Ok(LayerOperatorMatrix { kind, matrix })
}

fn diff(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// W: psi -> -int psi(y) nu(y).grad S(x - y) dsigma_y on the curve.
fn double_layer_matrix(g: &QuadratureGrid) -> DMatrix<f64> {
    let n = g.n;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                m[(i, j)] = g.curvatures[i] / (4.0 * PI) * g.weights[i];
            } else {
                let d = diff(g.points[i], g.points[j]);
                let gs = grad_fundamental(d);
                let nu = g.normals[j];
                m[(i, j)] = -(nu[0] * gs[0] + nu[1] * gs[1]) * g.weights[j];
            }
        }
    }
    m
}

/// W*: phi -> int phi(y) nu(x).grad S(x - y) dsigma_y on the curve.
fn adjoint_double_layer_matrix(g: &QuadratureGrid) -> DMatrix<f64> {
    let n = g.n;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let nu = g.normals[i];
        for j in 0..n {
            if i == j {
                m[(i, j)] = g.curvatures[i] / (4.0 * PI) * g.weights[i];
            } else {
                let d = diff(g.points[i], g.points[j]);
                let gs = grad_fundamental(d);
                m[(i, j)] = (nu[0] * gs[0] + nu[1] * gs[1]) * g.weights[j];
            }
        }
    }
    m
}

/// Single layer trace with the trigonometric product rule for the periodic
/// log kernel: split `(1/2pi) log|x(t)-x(s)|` into
/// `(1/4pi) log(4 sin^2((t-s)/2))` plus a smooth remainder.
fn single_layer_trace_matrix(g: &QuadratureGrid) -> DMatrix<f64> {
    let n = g.n;
    let half = n / 2;
    let mut m = DMatrix::zeros(n, n);
    // product-quadrature weights R_j(t_i) for the log(4 sin^2) kernel
    let mut r = vec![0.0; n];
    for (d, rd) in r.iter_mut().enumerate() {
        let dt = 2.0 * PI * d as f64 / n as f64;
        let mut s = 0.0;
        for mm in 1..half {
            s += (mm as f64 * dt).cos() / mm as f64;
        }
        *rd = -(2.0 * PI / half as f64) * s
            - PI / (half as f64 * half as f64) * (half as f64 * dt).cos();
    }
    for i in 0..n {
        for j in 0..n {
            let d = (i + n - j) % n;
            let smooth = if i == j {
                g.speeds[i].ln() / (2.0 * PI)
            } else {
                let dd = diff(g.points[i], g.points[j]);
                let r2 = dd[0] * dd[0] + dd[1] * dd[1];
                let s2 = {
                    let h = 0.5 * (g.t[i] - g.t[j]);
                    4.0 * h.sin() * h.sin()
                };
                (r2 / s2).ln() / (4.0 * PI)
            };
            m[(i, j)] = r[d] / (4.0 * PI) * g.speeds[j] + smooth * g.weights[j];
        }
    }
    m
}

/// Single layer potential at an off-curve point.
pub fn single_layer_eval(g: &QuadratureGrid, density: &DVector<f64>, x: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for j in 0..g.n {
        s += density[j] * fundamental(diff(x, g.points[j])) * g.weights[j];
    }
    s
}

/// Gradient of the single layer potential at an off-curve point.
pub fn grad_single_layer_eval(g: &QuadratureGrid, density: &DVector<f64>, x: [f64; 2]) -> [f64; 2] {
    let mut s = [0.0, 0.0];
    for j in 0..g.n {
        let gs = grad_fundamental(diff(x, g.points[j]));
        s[0] += density[j] * gs[0] * g.weights[j];
        s[1] += density[j] * gs[1] * g.weights[j];
    }
    s
}

/// Double layer potential at an off-curve point.
pub fn double_layer_eval(g: &QuadratureGrid, density: &DVector<f64>, x: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for j in 0..g.n {
        let gs = grad_fundamental(diff(x, g.points[j]));
        let nu = g.normals[j];
        s -= density[j] * (nu[0] * gs[0] + nu[1] * gs[1]) * g.weights[j];
    }
    s
}

/// Gradient of the double layer potential at an off-curve point.
pub fn grad_double_layer_eval(g: &QuadratureGrid, density: &DVector<f64>, x: [f64; 2]) -> [f64; 2] {
    let mut s = [0.0, 0.0];
    for j in 0..g.n {
        let nu = g.normals[j];
        let d = diff(x, g.points[j]);
        // grad_x of nu(y).grad S(x-y)
        let gx = grad_fundamental_deriv(1, 0, d);
        let gy = grad_fundamental_deriv(0, 1, d);
        s[0] -= density[j] * (nu[0] * gx[0] + nu[1] * gy[0]) * g.weights[j];
        s[1] -= density[j] * (nu[0] * gx[1] + nu[1] * gy[1]) * g.weights[j];
    }
    s
}

/// True when quadrature accuracy degrades at `x` (distance below
/// `2 pi diam / n`).
pub fn near_curve(g: &QuadratureGrid, x: [f64; 2]) -> bool {
    g.curve().distance_to(x) < 2.0 * PI * g.curve().diameter() / g.n as f64
}

/// Periodic spectral differentiation matrix (d/dt) for even n.
pub fn spectral_diff_matrix(n: usize) -> DMatrix<f64> {
    assert!(n % 2 == 0);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let delta = PI * (i as f64 - j as f64) / n as f64;
                let sign = if (i + n - j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = 0.5 * sign / delta.tan();
            }
        }
    }
    d
}

/// Normal derivative of the double layer potential with density `psi`
/// (equal from both sides) through the Maue identity `T psi = d/ds V[psi']`.
pub struct HypersingularApplier {
    diff: DMatrix<f64>,
    vmat: DMatrix<f64>,
    speeds: Vec<f64>,
}

impl HypersingularApplier {
    pub fn new(g: &QuadratureGrid) -> Result<Self> {
        Ok(HypersingularApplier {
            diff: spectral_diff_matrix(g.n),
            vmat: assemble(OperatorKind::SingleLayerTrace, g, g)?.matrix,
            speeds: g.speeds.clone(),
        })
    }

    pub fn apply(&self, psi: &DVector<f64>) -> DVector<f64> {
        let mut dpsi = &self.diff * psi;
        for (v, s) in dpsi.iter_mut().zip(&self.speeds) {
            *v /= s;
        }
        let v = &self.vmat * dpsi;
        let mut out = &self.diff * v;
        for (v, s) in out.iter_mut().zip(&self.speeds) {
            *v /= s;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ClosedCurve;
    use approx::assert_abs_diff_eq;

    fn circle_grid(n: usize) -> QuadratureGrid {
        QuadratureGrid::new(&ClosedCurve::circle(1.0).unwrap(), n).unwrap()
    }

    fn ellipse_grid(n: usize) -> QuadratureGrid {
        QuadratureGrid::new(&ClosedCurve::ellipse(1.3, 0.8).unwrap(), n).unwrap()
    }

    fn smooth_density(g: &QuadratureGrid, f: impl Fn(f64) -> f64) -> DVector<f64> {
        DVector::from_iterator(g.n, g.t.iter().map(|&t| f(t)))
    }

    #[test]
    fn fundamental_derivatives_match_finite_differences() {
        let x = [0.73, -0.41];
        let h = 1e-5;
        let d1 = (fundamental([x[0] + h, x[1]]) - fundamental([x[0] - h, x[1]])) / (2.0 * h);
        assert_abs_diff_eq!(fundamental_deriv(1, 0, x), d1, epsilon = 1e-9);
        let d2 = (fundamental([x[0], x[1] + h]) - fundamental([x[0], x[1] - h])) / (2.0 * h);
        assert_abs_diff_eq!(fundamental_deriv(0, 1, x), d2, epsilon = 1e-9);
        // second mixed derivative
        let dxy = (fundamental_deriv(1, 0, [x[0], x[1] + h])
            - fundamental_deriv(1, 0, [x[0], x[1] - h]))
            / (2.0 * h);
        assert_abs_diff_eq!(fundamental_deriv(1, 1, x), dxy, epsilon = 1e-8);
        // harmonicity
        assert_abs_diff_eq!(laplacian_fd(x, 1e-4), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(
            fundamental_deriv(2, 0, x) + fundamental_deriv(0, 2, x),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            fundamental_deriv(3, 1, x) + fundamental_deriv(1, 3, x),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gauss_identity_on_curve() {
        for g in [circle_grid(256), ellipse_grid(256)] {
            let w = assemble(OperatorKind::DoubleLayer, &g, &g).unwrap().matrix;
            let ones = DVector::from_element(g.n, 1.0);
            let half = &w * &ones;
            for i in 0..g.n {
                assert_abs_diff_eq!(half[i], 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_constant_on_circle() {
        let g = circle_grid(256);
        let ws = assemble(OperatorKind::AdjointDoubleLayer, &g, &g)
            .unwrap()
            .matrix;
        let ones = DVector::from_element(g.n, 1.0);
        let half = &ws * &ones;
        for i in 0..g.n {
            assert_abs_diff_eq!(half[i], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn transpose_duality() {
        // <W psi, phi> = <psi, W* phi> in L^2 of the arc measure
        let g = ellipse_grid(128);
        let w = assemble(OperatorKind::DoubleLayer, &g, &g).unwrap().matrix;
        let ws = assemble(OperatorKind::AdjointDoubleLayer, &g, &g)
            .unwrap()
            .matrix;
        let psi = smooth_density(&g, |t| (2.0 * t).cos() + 0.3 * (3.0 * t).sin());
        let phi = smooth_density(&g, |t| t.sin() - 0.5 * (4.0 * t).cos());
        let wpsi = &w * &psi;
        let wsphi = &ws * &phi;
        let lhs: f64 = (0..g.n).map(|i| wpsi[i] * phi[i] * g.weights[i]).sum();
        let rhs: f64 = (0..g.n).map(|i| psi[i] * wsphi[i] * g.weights[i]).sum();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn single_layer_radial_values() {
        let g = circle_grid(256);
        let one = DVector::from_element(g.n, 1.0);
        // v[1](x) = log|x| outside, 0 inside/at the origin
        assert_abs_diff_eq!(
            single_layer_eval(&g, &one, [0.0, 0.0]),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            single_layer_eval(&g, &one, [0.5, 0.0]),
            0.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            single_layer_eval(&g, &one, [2.0, 0.0]),
            2.0f64.ln(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            single_layer_eval(&g, &one, [0.0, -3.7]),
            3.7f64.ln(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn single_layer_trace_fourier_modes() {
        // on the unit circle V[cos(m t)] = -cos(m t)/(2m), V[1] = 0
        let g = circle_grid(128);
        let v = assemble(OperatorKind::SingleLayerTrace, &g, &g)
            .unwrap()
            .matrix;
        let one = DVector::from_element(g.n, 1.0);
        let v1 = &v * &one;
        for i in 0..g.n {
            assert_abs_diff_eq!(v1[i], 0.0, epsilon = 1e-12);
        }
        for m in [1usize, 3, 7] {
            let cm = smooth_density(&g, |t| (m as f64 * t).cos());
            let vm = &v * &cm;
            for i in 0..g.n {
                assert_abs_diff_eq!(vm[i], -cm[i] / (2.0 * m as f64), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn double_layer_gauss_identity_off_curve() {
        let g = ellipse_grid(256);
        let one = DVector::from_element(g.n, 1.0);
        assert_abs_diff_eq!(
            double_layer_eval(&g, &one, [0.2, -0.1]),
            1.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            double_layer_eval(&g, &one, [2.5, 1.0]),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn double_layer_fourier_mode_matches_disk_solution() {
        // density cos(theta) on the unit circle: w^+ = r cos(theta) / 2
        let g = circle_grid(256);
        let psi = smooth_density(&g, |t| t.cos());
        for &r in &[0.2, 0.5, 0.8] {
            let val = double_layer_eval(&g, &psi, [r, 0.0]);
            assert_abs_diff_eq!(val, 0.5 * r, epsilon = 1e-9);
        }
    }

    #[test]
    fn jump_relation_for_double_layer() {
        // limits from inside/outside differ by psi; the wall distance must
        // stay a few grid spacings away from the curve, so extrapolate the
        // O(delta) behavior from resolvable distances.
        let g = ellipse_grid(256);
        let psi = smooth_density(&g, |t| (2.0 * t).cos() + 0.4 * t.sin());
        let i = 37;
        let p = g.points[i];
        let nu = g.normals[i];
        let jump = |d: f64| {
            let outside = double_layer_eval(&g, &psi, [p[0] + d * nu[0], p[1] + d * nu[1]]);
            let inside = double_layer_eval(&g, &psi, [p[0] - d * nu[0], p[1] - d * nu[1]]);
            inside - outside
        };
        let est = 2.0 * jump(0.06) - jump(0.12);
        assert_abs_diff_eq!(est, psi[i], epsilon = 5e-2);
    }

    #[test]
    fn trace_relations_against_off_curve_limits() {
        // w^+ trace = 1/2 psi + W psi, checked against extrapolated interior values
        let g = ellipse_grid(256);
        let w = assemble(OperatorKind::DoubleLayer, &g, &g).unwrap().matrix;
        let psi = smooth_density(&g, |t| (3.0 * t).sin());
        let trace = {
            let mut v = &w * &psi;
            v += 0.5 * &psi;
            v
        };
        let i = 101;
        let p = g.points[i];
        let nu = g.normals[i];
        let f = |d: f64| double_layer_eval(&g, &psi, [p[0] - d * nu[0], p[1] - d * nu[1]]);
        let est = 2.0 * f(0.06) - f(0.12);
        assert_abs_diff_eq!(trace[i], est, epsilon = 5e-2);
    }

    #[test]
    fn maue_identity_on_circle() {
        // normal derivative of w[cos(m theta)] on the unit circle is (m/2) cos(m theta)
        let g = circle_grid(128);
        let t = HypersingularApplier::new(&g).unwrap();
        for m in [1usize, 2, 5] {
            let psi = smooth_density(&g, |tt| (m as f64 * tt).cos());
            let dn = t.apply(&psi);
            for i in 0..g.n {
                assert_abs_diff_eq!(dn[i], 0.5 * m as f64 * psi[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn second_kind_solve_is_spectrally_converged() {
        // solve (1/2 I + W) psi = g on an ellipse at n = 128 and n = 256
        let solve = |n: usize| {
            let g = ellipse_grid(n);
            let w = assemble(OperatorKind::DoubleLayer, &g, &g).unwrap().matrix;
            let mut a = w;
            for i in 0..n {
                a[(i, i)] += 0.5;
            }
            let rhs = smooth_density(&g, |t| (t.cos() * 2.0).exp().sin());
            let sol = a.lu().solve(&rhs).unwrap();
            (g, sol)
        };
        let (g1, s1) = solve(128);
        let (_g2, s2) = solve(256);
        for i in 0..g1.n {
            assert_abs_diff_eq!(s1[i], s2[2 * i], epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_mean_adjoint_system_is_invertible() {
        // bordered (1/2 I - W*) with the mean constraint has finite condition
        let g = ellipse_grid(128);
        let ws = assemble(OperatorKind::AdjointDoubleLayer, &g, &g)
            .unwrap()
            .matrix;
        let n = g.n;
        let mut a = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = -ws[(i, j)];
            }
            a[(i, i)] += 0.5;
            a[(i, n)] = 1.0;
            a[(n, i)] = g.weights[i];
        }
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = smax / smin;
        println!("bordered second-kind condition number: {cond:.3e}");
        assert!(cond.is_finite() && cond < 1e6);
    }

    #[test]
    fn near_curve_predicate() {
        let g = circle_grid(64);
        assert!(near_curve(&g, [0.999, 0.0]));
        assert!(!near_curve(&g, [0.3, 0.0]));
    }
}
