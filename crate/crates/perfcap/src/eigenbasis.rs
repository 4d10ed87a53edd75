//! Analytic Dirichlet eigenpairs of the unit disk, Taylor germs of
//! eigenfunctions at interior points, order decomposition of eigenspaces,
//! and polar principal parts.
//!
//! Taylor coefficients at an off-center point come from the Wirtinger ladder
//! for solid Helmholtz modes `psi_k = J_k(c r) e^{i k theta}`:
//! `d/dz psi_k = (c/2) psi_{k-1}` and `d/dzbar psi_k = -(c/2) psi_{k+1}`,
//! so every mixed derivative is an exact Bessel evaluation.

use crate::error::{Error, Result};
use crate::poly::{AnalyticGerm, Poly2};
use crate::specfun::{bessel_j_zero, jn, BesselOrder};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Parity of the angular factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

/// One Dirichlet eigenmode of the unit disk:
/// `N J_k(j_{k,n} r) {cos,sin}(k theta)`, `lambda = j_{k,n}^2`.
#[derive(Debug, Clone)]
pub struct DiskEigenMode {
    pub k: u32,
    pub n: u32,
    pub parity: Parity,
    pub lambda: f64,
    /// L2(disk) normalization constant.
    pub norm: f64,
}

impl DiskEigenMode {
    pub fn new(k: u32, n: u32, parity: Parity) -> Result<Self> {
        if k == 0 && parity == Parity::Sin {
            return Err(Error::Domain(
                "k = 0 modes only exist with cos parity".into(),
            ));
        }
        let z = bessel_j_zero(BesselOrder::new(k)?, n);
        // ||J_k(j r) trig(k theta)||^2 = (pi or 2pi) J_{k+1}(j)^2 / 2
        let ang = if k == 0 { 2.0 * PI } else { PI };
        let jp = jn(k as i64 + 1, z);
        let norm = 1.0 / (ang * jp * jp / 2.0).sqrt();
        Ok(DiskEigenMode {
            k,
            n,
            parity,
            lambda: z * z,
            norm,
        })
    }

    /// Value at a point of the closed unit disk.
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        let ang = match self.parity {
            Parity::Cos => (self.k as f64 * th).cos(),
            Parity::Sin => (self.k as f64 * th).sin(),
        };
        self.norm * jn(self.k as i64, self.lambda.sqrt() * r) * ang
    }
}

/// The first `count` Dirichlet eigenvalues of the unit disk, nondecreasing,
/// with multiplicity (each k >= 1 contributes a cos and a sin mode).
pub fn disk_spectrum(count: usize) -> Result<Vec<DiskEigenMode>> {
    if count > 64 {
        return Err(Error::Domain("disk spectrum is limited to 64 modes".into()));
    }
    // Collect enough zeros: the n-th zero of J_k exceeds both k and n pi, so
    // scanning k while j_{k,1} stays below the running cutoff terminates.
    let per_order = count.max(8) as u32;
    let mut candidates: Vec<(f64, u32, u32)> = Vec::new();
    let mut k = 0u32;
    loop {
        let zeros = crate::specfun::jn_zeros(k, per_order);
        let first = zeros[0];
        for (i, &z) in zeros.iter().enumerate() {
            candidates.push((z, k, i as u32 + 1));
        }
        // cutoff: count-th smallest squared zero collected so far
        let mut flat: Vec<f64> = candidates
            .iter()
            .flat_map(|&(z, kk, _)| if kk == 0 { vec![z] } else { vec![z, z] })
            .collect();
        flat.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if flat.len() >= count && first > flat[count - 1] {
            // the next order starts even higher
            let next_first = bessel_j_zero(BesselOrder::new((k + 1).min(32))?, 1);
            if next_first > flat[count - 1] {
                break;
            }
        }
        k += 1;
        if k > 32 {
            break;
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut modes: Vec<DiskEigenMode> = Vec::new();
    for &(_, kk, nn) in &candidates {
        if modes.len() >= count {
            break;
        }
        modes.push(DiskEigenMode::new(kk, nn, Parity::Cos)?);
        if kk >= 1 && modes.len() < count {
            modes.push(DiskEigenMode::new(kk, nn, Parity::Sin)?);
        }
    }
    modes.truncate(count);
    Ok(modes)
}

/// All modes sharing the eigenvalue at the 1-based spectral index.
pub fn eigenspace_at_index(index: usize) -> Result<(f64, Vec<DiskEigenMode>)> {
    if index == 0 {
        return Err(Error::Domain("spectral index is 1-based".into()));
    }
    let modes = disk_spectrum((index + 2).min(64))?;
    if index > modes.len() {
        return Err(Error::Domain(format!(
            "spectral index {index} beyond computed spectrum"
        )));
    }
    let lambda = modes[index - 1].lambda;
    let group: Vec<DiskEigenMode> = modes
        .into_iter()
        .filter(|m| (m.lambda - lambda).abs() < 1e-8 * lambda)
        .collect();
    Ok((lambda, group))
}

/// Taylor germ of a disk eigenmode at an interior point, to total degree D.
pub fn germ_at(mode: &DiskEigenMode, x0: [f64; 2], degree: usize) -> Result<AnalyticGerm> {
    if degree > 12 {
        return Err(Error::Domain("germ degree is limited to 12".into()));
    }
    let r0 = x0[0].hypot(x0[1]);
    if r0 >= 1.0 {
        return Err(Error::Domain(
            "expansion point must be interior to the disk".into(),
        ));
    }
    let c = mode.lambda.sqrt();
    let k = mode.k as i64;
    let theta0 = if r0 == 0.0 { 0.0 } else { x0[1].atan2(x0[0]) };
    // J_m(c r0) e^{i m theta0}
    let psi = |m: i64| -> (f64, f64) {
        let val = jn(m, c * r0);
        (
            val * (m as f64 * theta0).cos(),
            val * (m as f64 * theta0).sin(),
        )
    };

    // Wirtinger Taylor: u(x0 + h) = sum_{p,q} T_pq h^p hbar^q with
    // T_pq = (c/2)^{p+q} (-1)^q psi_{k-p+q}(x0) / (p! q!)
    let mut re = Poly2::zero(degree);
    let mut im = Poly2::zero(degree);
    let mut fact = vec![1.0f64; degree + 1];
    for i in 1..=degree {
        fact[i] = fact[i - 1] * i as f64;
    }
    for p in 0..=degree {
        for q in 0..=(degree - p) {
            let m = k - p as i64 + q as i64;
            let (pr, pi) = psi(m);
            let amp = (c / 2.0).powi((p + q) as i32) / (fact[p] * fact[q]);
            let sgn = if q % 2 == 0 { 1.0 } else { -1.0 };
            let (tr, ti) = (sgn * amp * pr, sgn * amp * pi);
            // h^p hbar^q = (h1 + i h2)^p (h1 - i h2)^q expanded binomially
            for a in 0..=p {
                for b in 0..=q {
                    let deg1 = a + b;
                    let deg2 = p + q - a - b;
                    let bin = binom(p, a) * binom(q, b);
                    // i^{p-a} (-i)^{q-b}
                    let pow = ((p - a) as i64 - (q - b) as i64).rem_euclid(4);
                    let (cr, ci) = match pow {
                        0 => (1.0, 0.0),
                        1 => (0.0, 1.0),
                        2 => (-1.0, 0.0),
                        _ => (0.0, -1.0),
                    };
                    re.add_coeff(deg1, deg2, bin * (tr * cr - ti * ci));
                    im.add_coeff(deg1, deg2, bin * (tr * ci + ti * cr));
                }
            }
        }
    }
    let poly = match mode.parity {
        Parity::Cos => re,
        Parity::Sin => im,
    };
    Ok(AnalyticGerm::from_poly(poly.scale(mode.norm)).with_radius(1.0 - r0))
}

fn binom(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// One group of the order decomposition: all members vanish to order
/// exactly `k` at the expansion point.
#[derive(Debug, Clone)]
pub struct OrderGroup {
    pub k: usize,
    pub dim: usize,
    pub germs: Vec<AnalyticGerm>,
    /// Coefficient vectors of the group basis in the input basis.
    pub basis: Vec<DVector<f64>>,
}

/// Unique orthogonal decomposition of an eigenspace by vanishing order,
/// groups sorted by strictly decreasing order.
#[derive(Debug, Clone)]
pub struct OrderDecomposition {
    pub groups: Vec<OrderGroup>,
}

const RANK_TOL: f64 = 1e-9;
const GUARD_LO: f64 = 1e-11;
const GUARD_HI: f64 = 1e-7;

/// Compute the order decomposition of the span of L2-orthonormal germs from
/// the kernels of the coefficient-truncation maps.  A singular value inside
/// the guard band `[1e-11, 1e-7]` is refused rather than classified.
pub fn order_decomposition(germs: &[AnalyticGerm]) -> Result<OrderDecomposition> {
    let m = germs.len();
    if m == 0 {
        return Err(Error::Domain("empty germ list".into()));
    }
    let max_deg = germs.iter().map(|g| g.degree()).min().unwrap();

    // kernel of the degree-<=k truncation map, as orthonormal columns in R^m
    let kernel_at = |k: i64| -> Result<DMatrix<f64>> {
        if k < 0 {
            return Ok(DMatrix::identity(m, m));
        }
        let rows = ((k + 1) * (k + 2) / 2) as usize;
        let mut t = DMatrix::zeros(rows, m);
        for (col, g) in germs.iter().enumerate() {
            let mut row = 0;
            for d in 0..=(k as usize) {
                for j in 0..=d {
                    t[(row, col)] = g.poly().coeff(d - j, j);
                    row += 1;
                }
            }
        }
        // pad with zero rows so the thin SVD carries the full right basis
        let t = if rows < m { t.resize(m, m, 0.0) } else { t };
        let svd = t.svd(false, true);
        let vt = svd.v_t.unwrap();
        let mut kernel_cols = Vec::new();
        for i in 0..m {
            let s = svd.singular_values[i];
            if s > GUARD_LO && s < GUARD_HI {
                return Err(Error::RankAmbiguous(s));
            }
            if s < RANK_TOL {
                kernel_cols.push(vt.row(i).transpose());
            }
        }
        let mut out = DMatrix::zeros(m, kernel_cols.len());
        for (i, cvec) in kernel_cols.iter().enumerate() {
            out.set_column(i, cvec);
        }
        Ok(out)
    };

    let mut kernels: Vec<DMatrix<f64>> = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    for k in -1..=(max_deg as i64) {
        let ker = kernel_at(k)?;
        dims.push(ker.ncols());
        let trivial = ker.ncols() == 0;
        kernels.push(ker);
        if trivial {
            break;
        }
    }
    if kernels.last().map(|k| k.ncols()).unwrap_or(0) != 0 {
        return Err(Error::Domain(
            "a germ combination vanishes beyond the stored degree; raise the germ degree".into(),
        ));
    }

    let mut groups = Vec::new();
    for i in 1..kernels.len() {
        let k = i - 1; // truncation order of kernels[i]
        if dims[i] < dims[i - 1] {
            // group = N_{k-1} intersect N_k^perp
            let big = &kernels[i - 1];
            let small = &kernels[i];
            let mut basis: Vec<DVector<f64>> = Vec::new();
            for col in 0..big.ncols() {
                let mut v = big.column(col).into_owned();
                for sc in 0..small.ncols() {
                    let s = small.column(sc).into_owned();
                    let dot = v.dot(&s);
                    v -= dot * s;
                }
                for b in &basis {
                    let dot = v.dot(b);
                    v -= dot * b;
                }
                let norm = v.norm();
                if norm > 1e-8 {
                    basis.push(v / norm);
                }
            }
            let expect = dims[i - 1] - dims[i];
            if basis.len() != expect {
                return Err(Error::Domain(format!(
                    "order decomposition produced {} directions where {} were expected",
                    basis.len(),
                    expect
                )));
            }
            let group_germs: Vec<AnalyticGerm> = basis
                .iter()
                .map(|v| AnalyticGerm::linear_combination(germs, v.as_slice()))
                .collect();
            for g in &group_germs {
                if g.vanishing_order() != k {
                    return Err(Error::Domain(format!(
                        "group germ has vanishing order {} instead of {k}",
                        g.vanishing_order()
                    )));
                }
            }
            groups.push(OrderGroup {
                k,
                dim: basis.len(),
                germs: group_germs,
                basis,
            });
        }
    }
    groups.sort_by(|a, b| b.k.cmp(&a.k));
    Ok(OrderDecomposition { groups })
}

/// Polar form of a harmonic homogeneous principal part:
/// `beta r^k sin(k t + k phi)` with `phi` normalized to `]-pi/2k, pi/2k]`
/// (for k = 0 the constant value).  `beta` carries a sign when the phase
/// interval cannot absorb it.
#[derive(Debug, Clone, Copy)]
pub struct PolarPrincipalPart {
    pub k: usize,
    pub beta: f64,
    pub phi: f64,
}

/// Extract `(k, beta, phi)` from the principal part of a germ.
pub fn polar_principal(germ: &AnalyticGerm) -> Result<PolarPrincipalPart> {
    let k = germ.vanishing_order();
    let p = germ.principal_part();
    let norm = p.max_abs_coeff().max(1e-300);
    let lap = p.laplacian().max_abs_coeff();
    if lap > 1e-10 * norm {
        return Err(Error::NonHarmonic(lap / norm));
    }
    if k == 0 {
        return Ok(PolarPrincipalPart {
            k: 0,
            beta: p.coeff(0, 0),
            phi: 0.0,
        });
    }
    // p = A Re z^k + B Im z^k with A = beta sin(k phi), B = beta cos(k phi)
    let a = p.coeff(k, 0);
    let b = p.coeff(k - 1, 1) / k as f64;
    let mut beta = a.hypot(b);
    let mut kphi = a.atan2(b);
    // fold into ]-pi/2, pi/2], flipping the sign of beta per half-turn
    if kphi > PI / 2.0 {
        kphi -= PI;
        beta = -beta;
    } else if kphi <= -PI / 2.0 {
        kphi += PI;
        beta = -beta;
    }
    Ok(PolarPrincipalPart {
        k,
        beta,
        phi: kphi / k as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::polar_sine_germ;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn spectrum_leading_eigenvalues() {
        let modes = disk_spectrum(6).unwrap();
        let j01 = 2.404825557695773f64;
        let j11 = 3.831705970207512f64;
        let j21 = 5.135622301840683f64;
        assert_relative_eq!(modes[0].lambda, j01 * j01, max_relative = 1e-12);
        assert_eq!((modes[0].k, modes[0].n), (0, 1));
        // double eigenvalue j_{1,1}^2
        assert_relative_eq!(modes[1].lambda, j11 * j11, max_relative = 1e-12);
        assert_relative_eq!(modes[2].lambda, j11 * j11, max_relative = 1e-12);
        assert!(modes[1].parity != modes[2].parity);
        // ordering: j_{2,1}^2 < j_{0,2}^2
        assert_relative_eq!(modes[3].lambda, j21 * j21, max_relative = 1e-12);
        let j02 = 5.520078110286311f64;
        assert!(j21 * j21 < j02 * j02);
        assert!((j21 * j21 - 26.3746).abs() < 1e-3);
        assert!((j02 * j02 - 30.4713).abs() < 1e-3);
    }

    #[test]
    fn modes_are_normalized_and_vanish_on_boundary() {
        let mode = DiskEigenMode::new(1, 1, Parity::Sin).unwrap();
        // midpoint-rule radial check of the L2 normalization
        let nr = 4000;
        let mut l2 = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) / nr as f64;
            let v = mode.norm * jn(1, mode.lambda.sqrt() * r);
            l2 += v * v * r / nr as f64;
        }
        l2 *= PI;
        assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-6);
        for i in 0..16 {
            let th = 2.0 * PI * i as f64 / 16.0;
            assert_abs_diff_eq!(mode.eval([th.cos(), th.sin()]), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn germ_reproduces_mode_locally() {
        let mode = DiskEigenMode::new(1, 1, Parity::Cos).unwrap();
        let x0 = [0.3, 0.2];
        let germ = germ_at(&mode, x0, 8).unwrap();
        for i in 0..24 {
            let th = 2.0 * PI * i as f64 / 24.0;
            let h = [0.05 * th.cos(), 0.05 * th.sin()];
            let exact = mode.eval([x0[0] + h[0], x0[1] + h[1]]);
            assert_abs_diff_eq!(germ.eval(h), exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn germ_satisfies_eigen_equation() {
        let mode = DiskEigenMode::new(2, 1, Parity::Sin).unwrap();
        let germ = germ_at(&mode, [0.25, -0.1], 8).unwrap();
        let res = germ.poly().laplacian().add(&germ.poly().scale(mode.lambda));
        let scale = germ.poly().max_abs_coeff() * mode.lambda;
        for d in 0..=6 {
            assert!(
                res.homogeneous_norm(d) <= 1e-8 * scale,
                "degree {d} residual"
            );
        }
    }

    #[test]
    fn germ_at_center_structure() {
        let sin_mode = DiskEigenMode::new(1, 1, Parity::Sin).unwrap();
        let g = germ_at(&sin_mode, [0.0, 0.0], 3).unwrap();
        assert_eq!(g.vanishing_order(), 1);
        // degree-1 part proportional to x2: J_1(z r) ~ z r / 2
        assert_abs_diff_eq!(g.poly().coeff(1, 0), 0.0, epsilon = 1e-14);
        let expect = sin_mode.norm * sin_mode.lambda.sqrt() / 2.0;
        assert_relative_eq!(g.poly().coeff(0, 1), expect, max_relative = 1e-12);

        let k0 = DiskEigenMode::new(0, 1, Parity::Cos).unwrap();
        let g0 = germ_at(&k0, [0.0, 0.0], 3).unwrap();
        assert_eq!(g0.vanishing_order(), 0);
        assert!(g0.value_at_origin() > 0.0);
    }

    #[test]
    fn decomposition_of_double_eigenspace_at_center() {
        let (lam, modes) = eigenspace_at_index(2).unwrap();
        assert_eq!(modes.len(), 2);
        assert_relative_eq!(lam, 14.681970642123893, max_relative = 1e-10);
        let germs: Vec<AnalyticGerm> = modes
            .iter()
            .map(|m| germ_at(m, [0.0, 0.0], 6).unwrap())
            .collect();
        let dec = order_decomposition(&germs).unwrap();
        assert_eq!(dec.groups.len(), 1);
        assert_eq!(dec.groups[0].k, 1);
        assert_eq!(dec.groups[0].dim, 2);
    }

    #[test]
    fn decomposition_at_generic_point_splits() {
        let (_, modes) = eigenspace_at_index(2).unwrap();
        let germs: Vec<AnalyticGerm> = modes
            .iter()
            .map(|m| germ_at(m, [0.3, 0.2], 8).unwrap())
            .collect();
        let dec = order_decomposition(&germs).unwrap();
        assert_eq!(dec.groups.len(), 2);
        assert_eq!((dec.groups[0].k, dec.groups[0].dim), (1, 1));
        assert_eq!((dec.groups[1].k, dec.groups[1].dim), (0, 1));
        for g in &dec.groups {
            assert!(g.dim <= 2);
            if g.k == 0 {
                assert_eq!(g.dim, 1);
            }
        }
    }

    #[test]
    fn decomposition_invariant_under_rotation_of_basis() {
        let (_, modes) = eigenspace_at_index(2).unwrap();
        let germs: Vec<AnalyticGerm> = modes
            .iter()
            .map(|m| germ_at(m, [0.3, 0.2], 8).unwrap())
            .collect();
        let dec1 = order_decomposition(&germs).unwrap();
        let (c, s) = (0.6f64, 0.8f64);
        let rotated = vec![
            AnalyticGerm::linear_combination(&germs, &[c, s]),
            AnalyticGerm::linear_combination(&germs, &[-s, c]),
        ];
        let dec2 = order_decomposition(&rotated).unwrap();
        assert_eq!(dec1.groups.len(), dec2.groups.len());
        for (g1, g2) in dec1.groups.iter().zip(&dec2.groups) {
            assert_eq!((g1.k, g1.dim), (g2.k, g2.dim));
            // one-dimensional groups: the germs must be parallel
            let p1 = g1.germs[0].poly();
            let p2 = g2.germs[0].poly();
            let mut dot = 0.0;
            let mut n1 = 0.0;
            let mut n2 = 0.0;
            for (h, j, c1) in p1.terms() {
                dot += c1 * p2.coeff(h, j);
                n1 += c1 * c1;
            }
            for (_, _, c2) in p2.terms() {
                n2 += c2 * c2;
            }
            assert!(dot.abs() > (1.0 - 1e-8) * (n1 * n2).sqrt());
        }
    }

    #[test]
    fn polar_principal_reference_cases() {
        // x2 = r sin(theta)
        let g = AnalyticGerm::new(1, &[(0, 1, 1.0)]).unwrap();
        let p = polar_principal(&g).unwrap();
        assert_eq!(p.k, 1);
        assert_abs_diff_eq!(p.beta, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.phi, 0.0, epsilon = 1e-14);
        // x1 = r sin(theta + pi/2)
        let g = AnalyticGerm::new(1, &[(1, 0, 1.0)]).unwrap();
        let p = polar_principal(&g).unwrap();
        assert_abs_diff_eq!(p.beta, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.phi, PI / 2.0, epsilon = 1e-14);
        // r^2 sin(2 theta + 0.6)
        let g2 = polar_sine_germ(2, 1.0, 0.3);
        let p2 = polar_principal(&g2).unwrap();
        assert_eq!(p2.k, 2);
        assert_abs_diff_eq!(p2.beta, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p2.phi, 0.3, epsilon = 1e-10);
        // normalization: phi in ]-pi/2k, pi/2k], sign folded into beta
        let g3 = polar_sine_germ(2, 1.0, 1.2);
        let p3 = polar_principal(&g3).unwrap();
        assert!(p3.phi > -PI / 4.0 && p3.phi <= PI / 4.0);
        let x = [0.37f64, -0.81];
        assert_abs_diff_eq!(
            p3.beta * x[0].hypot(x[1]).powi(2) * (2.0 * (x[1].atan2(x[0]) + p3.phi)).sin(),
            g3.eval(x),
            epsilon = 1e-12
        );
    }

    #[test]
    fn polar_principal_rejects_non_harmonic() {
        let g = AnalyticGerm::new(2, &[(2, 0, 1.0)]).unwrap();
        assert!(matches!(polar_principal(&g), Err(Error::NonHarmonic(_))));
    }

    #[test]
    fn reconstruction_from_polar_data() {
        let mode = DiskEigenMode::new(1, 1, Parity::Cos).unwrap();
        let g = germ_at(&mode, [0.0, 0.0], 4).unwrap();
        let p = polar_principal(&g).unwrap();
        assert_eq!(p.k, 1);
        // cos mode: N J_1(zr) cos(theta) = beta r sin(theta + pi/2) + ...
        assert_abs_diff_eq!(p.phi, PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(
            p.beta,
            mode.norm * mode.lambda.sqrt() / 2.0,
            max_relative = 1e-12
        );
    }
}
