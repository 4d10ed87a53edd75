//! Independent perturbed-spectrum ground truth: Dirichlet eigenvalues of
//! the concentric annulus through Bessel cross-products, of the eccentric
//! annulus through Graf's addition theorem, and the exact concentric-disk
//! capacity.
//!
//! The eccentric solver couples Fourier modes about the two centers.  With
//! the hole center rotated onto the positive axis the configuration is
//! mirror symmetric, so the coupled system block-diagonalizes into even
//! (cosine) and odd (sine) sectors; each eigenvalue appears as a simple
//! root of one sector determinant, which keeps concentric double
//! eigenvalues detectable as one root per sector.

use crate::error::{Error, Result};
use crate::specfun::{jn, yn};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Geometry of an annular reference domain: unit outer disk, hole of radius
/// `eps` centered at `center`.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusSpec {
    pub eps: f64,
    pub center: [f64; 2],
}

impl AnnulusSpec {
    pub fn new(eps: f64, center: [f64; 2]) -> Result<Self> {
        let r0 = center[0].hypot(center[1]);
        if !(eps > 0.0 && eps + r0 < 1.0) {
            return Err(Error::Domain(format!(
                "annulus requires eps + |center| < 1, got eps = {eps}, |center| = {r0}"
            )));
        }
        Ok(AnnulusSpec { eps, center })
    }
}

/// Cross-product function whose roots in `x = sqrt(lambda)` are the
/// concentric-annulus eigenvalues of angular order k.
pub fn cross_product(k: u32, eps: f64, x: f64) -> f64 {
    jn(k as i64, x * eps) * yn(k as i64, x) - yn(k as i64, x * eps) * jn(k as i64, x)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-13 * m.abs().max(1.0) {
            return m;
        }
        let fm = f(m);
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Roots of the order-k cross product with sqrt(lambda) below `x_max`.
pub fn concentric_roots(k: u32, eps: f64, x_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let step = 0.05;
    let mut x = (k as f64).max(0.05);
    let mut fx = cross_product(k, eps, x);
    while x < x_max {
        let x1 = x + step;
        let fx1 = cross_product(k, eps, x1);
        if fx == 0.0 {
            out.push(x);
        } else if fx * fx1 < 0.0 {
            out.push(bisect(|t| cross_product(k, eps, t), x, x1));
        }
        x = x1;
        fx = fx1;
    }
    out
}

/// Eigenvalue with its angular order and multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusMode {
    pub lambda: f64,
    pub k: u32,
    pub multiplicity: usize,
}

/// First `count` Dirichlet eigenvalues of the concentric annulus, sorted,
/// each k >= 1 mode carrying multiplicity 2.
pub fn concentric_modes(eps: f64, count: usize) -> Result<Vec<AnnulusMode>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain("annulus requires 0 < eps < 1".into()));
    }
    let mut x_max = 4.0 * (count as f64) / (1.0 - eps) + 10.0;
    loop {
        let mut modes = Vec::new();
        let mut k = 0u32;
        loop {
            let roots = concentric_roots(k, eps, x_max);
            if roots.is_empty() {
                if k as f64 > x_max {
                    break;
                }
                k += 1;
                continue;
            }
            for r in roots {
                modes.push(AnnulusMode {
                    lambda: r * r,
                    k,
                    multiplicity: if k == 0 { 1 } else { 2 },
                });
            }
            k += 1;
            if k > 32 {
                break;
            }
        }
        modes.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
        let total: usize = modes.iter().map(|m| m.multiplicity).sum();
        if total >= count {
            // enough below the scan ceiling
            let mut flat = 0;
            let mut needed = Vec::new();
            for m in modes {
                if flat >= count {
                    break;
                }
                flat += m.multiplicity;
                needed.push(m);
            }
            return Ok(needed);
        }
        if modes.is_empty() && x_max > 1e4 {
            return Err(Error::Bracketing(format!(
                "no cross-product roots found below sqrt(lambda) = {x_max}"
            )));
        }
        x_max *= 1.5;
    }
}

/// First `count` eigenvalues with multiplicity, flattened.
pub fn concentric_spectrum(eps: f64, count: usize) -> Result<Vec<f64>> {
    let modes = concentric_modes(eps, count)?;
    let mut out = Vec::with_capacity(count);
    for m in modes {
        for _ in 0..m.multiplicity {
            if out.len() < count {
                out.push(m.lambda);
            }
        }
    }
    Ok(out)
}

/// Standard capacity of the concentric disk pair: `2 pi / |log eps|`.
pub fn concentric_capacity(eps: f64) -> f64 {
    2.0 * PI / eps.abs().ln().abs()
}

// ---------------------------------------------------------------------------
// Eccentric annulus via Graf's addition theorem
// ---------------------------------------------------------------------------

/// Mirror sector of the eccentric problem (hole center on the positive axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Even,
    Odd,
}

/// Bessel value tables shared by all entries of one sector matrix.
struct BesselTables {
    /// J_q(kappa r0) for q = 0..=2 m_trunc (negative orders by reflection).
    j_shift: Vec<f64>,
    j_outer: Vec<f64>,
    y_outer: Vec<f64>,
    j_hole: Vec<f64>,
    y_hole: Vec<f64>,
}

impl BesselTables {
    fn new(kappa: f64, eps: f64, r0: f64, m_trunc: usize) -> Self {
        let j_shift = if kappa * r0 > 0.0 {
            crate::specfun::jn_all(2 * m_trunc as u32, kappa * r0)
        } else {
            let mut v = vec![0.0; 2 * m_trunc + 1];
            v[0] = 1.0;
            v
        };
        let j_outer = crate::specfun::jn_all(m_trunc as u32, kappa);
        let j_hole = crate::specfun::jn_all(m_trunc as u32, kappa * eps);
        let y_at = |x: f64| -> Vec<f64> { (0..=m_trunc as i64).map(|m| yn(m, x)).collect() };
        BesselTables {
            j_shift,
            j_outer,
            y_outer: y_at(kappa),
            j_hole,
            y_hole: y_at(kappa * eps),
        }
    }

    /// J_q(kappa r0) with integer-order reflection for q < 0.
    fn shift(&self, q: i64) -> f64 {
        let a = q.unsigned_abs() as usize;
        let v = self.j_shift[a];
        if q < 0 && q % 2 != 0 {
            -v
        } else {
            v
        }
    }
}

/// Sector matrix at `lambda`: modes `J_n(kappa r) trig(n theta)` about the
/// origin and `Y_m(kappa rho) trig(m theta')` about the hole center, coupled
/// through the addition-theorem coefficients `J_{n-m}(kappa r0)`.
fn sector_matrix(lambda: f64, eps: f64, r0: f64, m_trunc: usize, sector: Sector) -> DMatrix<f64> {
    let kappa = lambda.sqrt();
    let tb = BesselTables::new(kappa, eps, r0, m_trunc);
    let (lo, size) = match sector {
        Sector::Even => (0usize, m_trunc + 1),
        Sector::Odd => (1usize, m_trunc),
    };
    let mut t = DMatrix::zeros(2 * size, 2 * size);
    let pm = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };
    for (row, n) in (lo..=m_trunc).enumerate() {
        // outer boundary, coefficient of trig(n theta) at r = 1
        t[(row, row)] = tb.j_outer[n];
        for (col, m) in (lo..=m_trunc).enumerate() {
            let jm = tb.shift(n as i64 - m as i64);
            let jp = tb.shift(n as i64 + m as i64);
            let alpha = match sector {
                Sector::Even => {
                    if n == 0 {
                        pm(m) * tb.shift(m as i64)
                    } else {
                        jm + pm(m) * jp
                    }
                }
                Sector::Odd => jm - pm(m) * jp,
            };
            t[(row, size + col)] = alpha * tb.y_outer[n];
        }
    }
    for (row, m) in (lo..=m_trunc).enumerate() {
        // hole boundary, coefficient of trig(m theta') at rho = eps
        for (col, n) in (lo..=m_trunc).enumerate() {
            let jm = tb.shift(n as i64 - m as i64);
            let jp = tb.shift(n as i64 + m as i64);
            let beta = match sector {
                Sector::Even => {
                    if m == 0 {
                        tb.shift(n as i64)
                    } else {
                        jm + pm(m) * jp
                    }
                }
                Sector::Odd => jm - pm(m) * jp,
            };
            t[(size + row, col)] = beta * tb.j_hole[m];
        }
        t[(size + row, size + row)] = tb.y_hole[m];
    }
    t
}

/// Sign of the sector determinant after positive column scaling.
fn sector_det_sign(lambda: f64, eps: f64, r0: f64, m_trunc: usize, sector: Sector) -> f64 {
    let mut t = sector_matrix(lambda, eps, r0, m_trunc, sector);
    let n = t.ncols();
    for j in 0..n {
        let mut mx = 0.0f64;
        for i in 0..n {
            mx = mx.max(t[(i, j)].abs());
        }
        if mx > 0.0 {
            for i in 0..n {
                t[(i, j)] /= mx;
            }
        }
    }
    let det = t.lu().determinant();
    if det > 0.0 {
        1.0
    } else if det < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Roots of one sector determinant inside the window, by sign scan plus
/// bisection.
pub fn sector_roots_in_window(
    eps: f64,
    r0: f64,
    m_trunc: usize,
    sector: Sector,
    window: (f64, f64),
    scan_step: f64,
) -> Vec<f64> {
    let mut out = Vec::new();
    let mut lam = window.0.max(1e-6);
    let mut s = sector_det_sign(lam, eps, r0, m_trunc, sector);
    while lam < window.1 {
        let lam1 = (lam + scan_step).min(window.1);
        let s1 = sector_det_sign(lam1, eps, r0, m_trunc, sector);
        if s != 0.0 && s1 != 0.0 && s * s1 < 0.0 {
            let root = {
                let f = |l: f64| sector_det_sign(l, eps, r0, m_trunc, sector);
                let (mut a, mut b) = (lam, lam1);
                let fa = f(a);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    if f(mid) == fa {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            };
            out.push(root);
        }
        lam = lam1;
        s = s1;
    }
    out
}

/// Eccentric-annulus spectrum with a truncation self-check.
pub struct EccentricSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Largest movement of a root when the truncation order doubles.
    pub truncation_shift: f64,
    pub warnings: Vec<String>,
}

/// First `count` Dirichlet eigenvalues of the unit disk with a round hole of
/// radius `eps` centered at `x0`; `m_trunc >= 8` angular modes per center.
pub fn eccentric_spectrum(
    eps: f64,
    x0: [f64; 2],
    count: usize,
    m_trunc: usize,
) -> Result<EccentricSpectrum> {
    let spec = AnnulusSpec::new(eps, x0)?;
    if m_trunc < 8 {
        return Err(Error::Domain("truncation order must be at least 8".into()));
    }
    if spec.eps + x0[0].hypot(x0[1]) >= 0.9 {
        return Err(Error::Domain(
            "eccentric solver requires eps + |x0| < 0.9".into(),
        ));
    }
    let r0 = x0[0].hypot(x0[1]);
    let collect = |mt: usize| -> Vec<f64> {
        let lo = 1.0;
        let mut hi = 40.0;
        loop {
            let mut vals = Vec::new();
            for sector in [Sector::Even, Sector::Odd] {
                vals.extend(sector_roots_in_window(eps, r0, mt, sector, (lo, hi), 0.05));
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if vals.len() >= count {
                vals.truncate(count);
                return vals;
            }
            hi *= 1.6;
            if hi > 1e4 {
                return vals;
            }
        }
    };
    let base = collect(m_trunc);
    let refined = collect(2 * m_trunc);
    let mut shift = 0.0f64;
    for (a, b) in base.iter().zip(&refined) {
        shift = shift.max((a - b).abs());
    }
    let mut warnings = Vec::new();
    if shift > 1e-6 {
        warnings.push(format!(
            "truncation may be insufficient: doubling the order moved a root by {shift:.3e}"
        ));
    }
    if base.len() < count {
        return Err(Error::Bracketing(format!(
            "found only {} of {count} requested eigenvalues",
            base.len()
        )));
    }
    Ok(EccentricSpectrum {
        eigenvalues: refined,
        truncation_shift: shift,
        warnings,
    })
}

/// Both sector roots in a window around a target eigenvalue; used to track
/// individual branches near a former double eigenvalue.
pub fn eccentric_branches_near(
    eps: f64,
    x0: [f64; 2],
    window: (f64, f64),
    m_trunc: usize,
    scan_step: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    AnnulusSpec::new(eps, x0)?;
    let r0 = x0[0].hypot(x0[1]);
    let even = sector_roots_in_window(eps, r0, m_trunc, Sector::Even, window, scan_step);
    let odd = sector_roots_in_window(eps, r0, m_trunc, Sector::Odd, window, scan_step);
    Ok((even, odd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_j_zero, BesselOrder};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn graf_addition_theorem_identity() {
        // J_n(|z - d|) e^{i n arg(z-d)} expanded about the origin, and the
        // same identity for Y when |z| > |d|
        let kappa = 2.0;
        let d = [0.3f64, 0.2];
        let rd = d[0].hypot(d[1]);
        let phid = d[1].atan2(d[0]);
        let z = [0.9f64, 0.3];
        let rz = z[0].hypot(z[1]);
        let thz = z[1].atan2(z[0]);
        let w = [z[0] - d[0], z[1] - d[1]];
        let rw = w[0].hypot(w[1]);
        let thw = w[1].atan2(w[0]);
        let check = |n: i64, use_y: bool| {
            let c_fn = |m: i64, x: f64| if use_y { yn(m, x) } else { jn(m, x) };
            let lhs_re = c_fn(n, kappa * rw) * (n as f64 * thw).cos();
            let lhs_im = c_fn(n, kappa * rw) * (n as f64 * thw).sin();
            let mut re = 0.0;
            let mut im = 0.0;
            for q in -40i64..=40 {
                let sgn = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let c = sgn * jn(q, kappa * rd);
                let ang = (n - q) as f64 * thz + q as f64 * phid;
                re += c * c_fn(n - q, kappa * rz) * ang.cos();
                im += c * c_fn(n - q, kappa * rz) * ang.sin();
            }
            assert_abs_diff_eq!(lhs_re, re, epsilon = 1e-12);
            assert_abs_diff_eq!(lhs_im, im, epsilon = 1e-12);
        };
        for n in [0i64, 1, 3] {
            check(n, false);
            check(n, true);
        }
    }

    #[test]
    fn concentric_limit_to_disk() {
        // eps -> 0: the first eigenvalue approaches j_{0,1}^2 from above at
        // the logarithmic rate 2 pi u1(0)^2 / |log eps|
        let j01 = bessel_j_zero(BesselOrder::new(0).unwrap(), 1);
        let j1 = jn(1, j01);
        let u0_sq = 1.0 / (PI * j1 * j1);
        let mut prev = f64::INFINITY;
        for &eps in &[1e-3, 1e-4, 1e-5, 1e-6] {
            let lam = concentric_spectrum(eps, 1).unwrap()[0];
            let dev = lam - j01 * j01;
            assert!(dev > 0.0 && dev < prev, "deviation not shrinking");
            prev = dev;
            let ratio = dev * eps.ln().abs() / (2.0 * PI * u0_sq);
            assert!(
                ratio > 0.8 && ratio < 1.3,
                "log-rate ratio {ratio} at eps {eps}"
            );
        }
    }

    #[test]
    fn concentric_first_root_matches_independent_bisection() {
        let eps = 0.5;
        let spec = concentric_modes(eps, 1).unwrap();
        // independent bracketing on a fine grid
        let f = |x: f64| cross_product(0, eps, x);
        let mut x = 0.5;
        let (mut a, mut b) = (0.0, 0.0);
        while x < 50.0 {
            if f(x) * f(x + 1e-3) < 0.0 {
                a = x;
                b = x + 1e-3;
                break;
            }
            x += 1e-3;
        }
        let root = bisect(f, a, b);
        assert_abs_diff_eq!(spec[0].lambda, root * root, epsilon = 1e-9);
        // for eps = 1/2 the k = 0 roots sit near (n pi / (1 - eps))^2
        assert_relative_eq!(root, 2.0 * PI, max_relative = 0.02);
    }

    #[test]
    fn domain_monotonicity_in_eps() {
        let counts = 6;
        let s1 = concentric_spectrum(0.01, counts).unwrap();
        let s2 = concentric_spectrum(0.05, counts).unwrap();
        let s3 = concentric_spectrum(0.1, counts).unwrap();
        for i in 0..counts {
            assert!(s1[i] < s2[i], "eigenvalue {i} not increasing");
            assert!(s2[i] < s3[i], "eigenvalue {i} not increasing");
        }
    }

    #[test]
    fn paired_roots_stay_double() {
        let modes = concentric_modes(0.05, 8).unwrap();
        let mut found_double = false;
        for m in &modes {
            if m.k >= 1 {
                assert_eq!(m.multiplicity, 2);
                found_double = true;
            }
        }
        assert!(found_double);
    }

    #[test]
    fn eccentric_reduces_to_concentric_at_center() {
        let eps = 0.1;
        let conc = concentric_spectrum(eps, 5).unwrap();
        let ecc = eccentric_spectrum(eps, [0.0, 0.0], 5, 10).unwrap();
        for (a, b) in conc.iter().zip(&ecc.eigenvalues) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn eccentric_converges_to_disk_spectrum() {
        // deviations from the disk spectrum shrink as eps -> 0 (the slowest
        // branches converge only logarithmically)
        let disk = crate::eigenbasis::disk_spectrum(5).unwrap();
        let dev_at = |eps: f64| -> f64 {
            let ecc = eccentric_spectrum(eps, [0.3, 0.0], 5, 10).unwrap();
            ecc.eigenvalues
                .iter()
                .zip(&disk)
                .map(|(a, b)| {
                    assert!(*a > b.lambda - 1e-9, "domain monotonicity violated");
                    (a - b.lambda).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let d3 = dev_at(1e-3);
        let d4 = dev_at(1e-4);
        assert!(d4 < d3, "max deviation did not shrink: {d4} vs {d3}");
        assert!(d4 < 1.0);
    }

    #[test]
    fn eccentric_truncation_self_consistency() {
        let s12 = eccentric_spectrum(0.05, [0.3, 0.0], 5, 12).unwrap();
        let s24 = eccentric_spectrum(0.05, [0.3, 0.0], 5, 24).unwrap();
        for (a, b) in s12.eigenvalues.iter().zip(&s24.eigenvalues) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn eccentric_center_can_be_off_axis() {
        // rotation invariance: only |x0| matters
        let s1 = eccentric_spectrum(0.05, [0.3, 0.0], 4, 12).unwrap();
        let s2 =
            eccentric_spectrum(0.05, [0.3 / 2.0f64.sqrt(), 0.3 / 2.0f64.sqrt()], 4, 12).unwrap();
        for (a, b) in s1.eigenvalues.iter().zip(&s2.eigenvalues) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn concentric_capacity_values() {
        assert_abs_diff_eq!(
            concentric_capacity(1.0 / std::f64::consts::E),
            2.0 * PI,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            concentric_capacity(1e-2),
            2.0 * PI / (2.0 * 10.0f64.ln()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn annulus_spec_validation() {
        assert!(AnnulusSpec::new(0.5, [0.6, 0.0]).is_err());
        assert!(AnnulusSpec::new(0.0, [0.0, 0.0]).is_err());
        assert!(AnnulusSpec::new(0.2, [0.3, 0.2]).is_ok());
    }
}
