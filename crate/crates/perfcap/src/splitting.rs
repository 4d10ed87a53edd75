//! Eigenvalue-branch prediction for a perforated domain: the capacity-based
//! perturbation matrix at fixed hole size, the asymptotic branches driven by
//! the order decomposition, closed-form matrices for elliptic holes, and an
//! abstract small-eigenvalue checker.

use crate::capacity::{
    direct_capacity_with, potential_l2_matrix, q_form, solve_densities_with_rho, solve_rho,
    CapacityWorkspace, HoleOperators,
};
use crate::eigenbasis::OrderDecomposition;
use crate::error::{Error, Result};
use crate::poly::AnalyticGerm;
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

/// The asymptotic scale: `1/|log eps|` for order 0, `eps^{2k}` for k >= 1.
pub fn rho_scale(k: usize, eps: f64) -> f64 {
    assert!(eps > 0.0 && eps < 1.0, "rho_scale needs eps in ]0,1[");
    if k == 0 {
        1.0 / eps.ln().abs()
    } else {
        eps.powi(2 * k as i32)
    }
}

/// Whether the L2 term of the perturbation form is computed or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Mode {
    /// Drop the term (it is of lower order than the capacity term).
    Drop,
    /// Compute it by polar quadrature; requires a disk outer domain.
    DiskQuadrature,
}

/// Matrix of the perturbation form on an orthonormal eigenbasis:
/// capacity pairing minus `lambda` times the L2 pairing of potentials.
pub struct REpsMatrix {
    pub eps: f64,
    pub matrix: DMatrix<f64>,
    /// None when the L2 term was dropped.
    pub l2_term: Option<DMatrix<f64>>,
}

pub fn r_eps_matrix(
    ws: &CapacityWorkspace,
    basis: &[AnalyticGerm],
    lambda: f64,
    eps: f64,
    include_l2: L2Mode,
) -> Result<REpsMatrix> {
    let m = basis.len();
    let rho = solve_rho(ws, eps)?;
    let sols: Vec<_> = basis
        .iter()
        .map(|g| solve_densities_with_rho(ws, &rho, g))
        .collect::<Result<Vec<_>>>()?;
    let mut cap = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = direct_capacity_with(ws, &sols[i], &basis[j]);
            cap[(i, j)] = v;
            cap[(j, i)] = v;
        }
    }
    let l2 = match include_l2 {
        L2Mode::Drop => None,
        L2Mode::DiskQuadrature => {
            let refs: Vec<&_> = sols.iter().collect();
            let grefs: Vec<&AnalyticGerm> = basis.iter().collect();
            Some(potential_l2_matrix(ws, &refs, &grefs)?)
        }
    };
    let mut matrix = cap;
    if let Some(l) = &l2 {
        matrix -= lambda * l;
    }
    Ok(REpsMatrix {
        eps,
        matrix,
        l2_term: l2,
    })
}

/// Relative eigenvalue gap below which a group is reported as non-split.
const SPLIT_GAP_TOL: f64 = 1e-8;

/// One group of predicted branches departing from a common eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct BranchGroup {
    pub k: usize,
    pub dim: usize,
    /// Ascending eigenvalues of the group's limiting form.
    pub mu: Vec<f64>,
    pub split: bool,
}

/// Predicted splitting of an eigenvalue under removal of a scaled hole.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingReport {
    pub lambda: f64,
    pub groups: Vec<BranchGroup>,
}

impl SplittingReport {
    /// Branch value `lambda + mu * rho_scale(k, eps)` for group `j`, branch `l`.
    pub fn branch(&self, j: usize, l: usize, eps: f64) -> f64 {
        self.lambda + self.groups[j].mu[l] * rho_scale(self.groups[j].k, eps)
    }

    /// All branches at `eps`, ordered as the perturbed eigenvalues
    /// (ascending within each group, groups from the highest order down).
    pub fn branches_at(&self, eps: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (j, g) in self.groups.iter().enumerate() {
            for l in 0..g.dim {
                out.push(self.branch(j, l, eps));
            }
        }
        out
    }
}

/// Assemble and diagonalize the limiting form of each order group:
/// `2 pi u(0) v(0)` for order zero, the energy form otherwise.
pub fn predict_branches(
    hole: &HoleOperators,
    decomp: &OrderDecomposition,
    lambda: f64,
) -> Result<SplittingReport> {
    let mut groups = Vec::new();
    for g in &decomp.groups {
        let d = g.dim;
        let mut q = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = if g.k == 0 {
                    2.0 * PI * g.germs[i].value_at_origin() * g.germs[j].value_at_origin()
                } else {
                    q_form(hole, &g.germs[i], &g.germs[j])?
                };
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(q);
        let mut mu: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if mu[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "limiting form is not positive definite (smallest eigenvalue {:.3e})",
                mu[0]
            )));
        }
        let split = d > 1 && (mu[d - 1] - mu[0]) > SPLIT_GAP_TOL * mu[d - 1];
        groups.push(BranchGroup {
            k: g.k,
            dim: d,
            mu,
            split,
        });
    }
    Ok(SplittingReport { lambda, groups })
}

// ---------------------------------------------------------------------------
// Closed-form matrix for elliptic holes
// ---------------------------------------------------------------------------

fn binom(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// `C_k = 4^{1-k} sum_{1<=m<=k, k+m even} m binom(k, (k+m)/2)^2`.
pub fn elliptic_c_constant(k: usize) -> f64 {
    let mut s = 0.0;
    for m in 1..=k {
        if (k + m) % 2 == 0 {
            let b = binom(k, (k + m) / 2);
            s += m as f64 * b * b;
        }
    }
    4.0f64.powi(1 - k as i32) * s
}

/// Exterior-plus-interior constant `Q_k(a, b)` of the elliptic closed form,
/// written through powers of `(a + b)` and `(a - b)` so the circular limit
/// `b -> a` is exact:
/// exterior part `c^{2k} D_k(xi) = 4^{1-k}/4 sum_m m binom^2 [(a+b)^{k+m}(a-b)^{k-m} + (a+b)^{k-m}(a-b)^{k+m}]`,
/// interior part `4^{-k} sum_j binom(k,j)^2 (k-2j) (a+b)^{2(k-j)} (a-b)^{2j}`.
pub fn elliptic_q_constant(k: usize, a: f64, b: f64) -> f64 {
    let p = a + b;
    let q = a - b;
    let mut ext = 0.0;
    for m in 1..=k {
        if (k + m) % 2 == 0 {
            let c = binom(k, (k + m) / 2);
            ext += m as f64
                * c
                * c
                * (p.powi((k + m) as i32) * q.powi((k - m) as i32)
                    + p.powi((k - m) as i32) * q.powi((k + m) as i32));
        }
    }
    ext *= 4.0f64.powi(1 - k as i32) / 4.0;
    let mut interior = 0.0;
    for j in 0..=k {
        let c = binom(k, j);
        interior +=
            c * c * (k as f64 - 2.0 * j as f64) * p.powi(2 * (k - j) as i32) * q.powi(2 * j as i32);
    }
    interior *= 4.0f64.powi(-(k as i32));
    ext + interior
}

/// Closed-form 2x2 matrix of the limiting energy form for an elliptic hole
/// with semi-axes `a > b > 0` and two order-k polar principal parts.  The
/// entry convention follows the circular limit: `m[0][0]` carries the second
/// pair, `m[1][1]` the first.
pub fn elliptic_m(
    a: f64,
    b: f64,
    k: usize,
    first: (f64, f64),
    second: (f64, f64),
) -> Result<[[f64; 2]; 2]> {
    elliptic_m_with_constants(a, b, k, first, second, None)
}

/// Test hook: `c_k_override` replaces the internal constant, for fault
/// injection in the validation suite.
pub fn elliptic_m_with_constants(
    a: f64,
    b: f64,
    k: usize,
    (beta1, phi1): (f64, f64),
    (beta2, phi2): (f64, f64),
    c_k_override: Option<f64>,
) -> Result<[[f64; 2]; 2]> {
    if !(a > b && b > 0.0) {
        return Err(Error::Domain(
            "elliptic closed form needs a > b > 0 (rotate inputs otherwise)".into(),
        ));
    }
    if k < 1 {
        return Err(Error::Domain(
            "elliptic closed form needs order k >= 1".into(),
        ));
    }
    let kf = k as f64;
    let c2k = ((a + b) * (a - b)).powi(k as i32); // c^{2k}
    let ck = c_k_override.unwrap_or_else(|| elliptic_c_constant(k));
    let qk = elliptic_q_constant(k, a, b);
    let m11 =
        -PI * beta2 * beta2 * c2k / 2.0 * ck * (2.0 * kf * phi2).cos() + PI * beta2 * beta2 * qk;
    let m22 =
        -PI * beta1 * beta1 * c2k / 2.0 * ck * (2.0 * kf * phi1).cos() + PI * beta1 * beta1 * qk;
    let m12 = -PI * beta1 * beta2 * c2k / 2.0 * ck * (kf * (phi1 + phi2)).cos()
        + PI * beta1 * beta2 * qk * (kf * (phi1 - phi2)).cos();
    Ok([[m11, m12], [m12, m22]])
}

// ---------------------------------------------------------------------------
// Abstract small-eigenvalue checker
// ---------------------------------------------------------------------------

/// Outcome of checking the small-eigenvalue estimate on a concrete
/// finite-dimensional quadratic form.
#[derive(Debug, Clone, Serialize)]
pub struct SmallEvReport {
    pub gamma: f64,
    pub delta: f64,
    pub n_index: usize,
    pub m: usize,
    /// Hypothesis flags: (H1) delta < gamma/sqrt(2); (H2) the spectral
    /// window; (H3) the measured mixed-block bound.
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub measured_delta: f64,
    /// Per-index |nu_{N+i-1} - xi_i| against the bound 4 delta^2 / gamma.
    pub deviations: Vec<f64>,
    pub eigenvalue_bound: f64,
    /// Operator-norm distance of the projection to the identity on F.
    pub projection_deviation: f64,
    pub projection_bound: f64,
    /// True when the hypotheses hold and both conclusions are satisfied.
    pub pass: bool,
    /// True when a hypothesis failed (no conclusion is then claimed).
    pub hypothesis_violation: bool,
}

/// Check the small-eigenvalue estimate for a symmetric matrix `q` on the
/// trial subspace spanned by the columns of `f_basis`:
/// with (H1)-(H3) in force, the eigenvalues of the restriction approximate
/// `nu_N .. nu_{N+m-1}` within `4 delta^2 / gamma`, and the spectral
/// projection is `sqrt(2) delta / gamma`-close to the identity on F.
/// `n_index` is 1-based.
pub fn small_ev_check(
    q: &DMatrix<f64>,
    f_basis: &DMatrix<f64>,
    n_index: usize,
    m: usize,
    gamma: f64,
    delta: f64,
) -> SmallEvReport {
    assert!(n_index >= 1 && m >= 1);
    let dim = q.nrows();
    assert_eq!(q.ncols(), dim);
    assert_eq!(f_basis.nrows(), dim);
    assert_eq!(f_basis.ncols(), m);

    let eig = nalgebra::SymmetricEigen::new(q.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let nu: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    // orthonormalize the trial basis (Gram correction)
    let gram = f_basis.transpose() * f_basis;
    let chol = nalgebra::Cholesky::new(gram.clone()).expect("trial basis is rank deficient");
    let f_on = f_basis
        * chol
            .l()
            .transpose()
            .try_inverse()
            .expect("triangular inverse");

    // H1
    let h1 = delta > 0.0 && delta < gamma / 2.0f64.sqrt();
    // H2 (1-based window)
    let mut h2 = true;
    for i in 0..m {
        if nu[n_index - 1 + i].abs() > gamma {
            h2 = false;
        }
    }
    if n_index - 1 + m < dim {
        if nu[n_index - 1 + m] < gamma {
            h2 = false;
        }
    } else {
        h2 = false;
    }
    if n_index >= 2 && nu[n_index - 2] > -gamma {
        h2 = false;
    }
    // H3: operator norm of q restricted to F x H
    let qf = q * &f_on;
    let measured_delta = qf.clone().svd(false, false).singular_values.max();
    let h3 = measured_delta <= delta * (1.0 + 1e-12);

    // eigenvalues of the restriction (the Gram matrix is absorbed in f_on)
    let restر = f_on.transpose() * q * &f_on;
    let eig_f = nalgebra::SymmetricEigen::new(restر);
    let mut xi: Vec<f64> = eig_f.eigenvalues.iter().copied().collect();
    xi.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let eigenvalue_bound = 4.0 * delta * delta / gamma;
    let deviations: Vec<f64> = (0..m)
        .map(|i| (nu[n_index - 1 + i] - xi[i]).abs())
        .collect();

    // projection onto the span of eigenvectors N..N+m-1
    let mut g_n = DMatrix::zeros(dim, m);
    for i in 0..m {
        g_n.set_column(i, &eig.eigenvectors.column(order[n_index - 1 + i]));
    }
    let proj = &g_n * g_n.transpose();
    let diff = &proj * &f_on - &f_on;
    let projection_deviation = diff.svd(false, false).singular_values.max();
    let projection_bound = 2.0f64.sqrt() * delta / gamma;

    let hypothesis_violation = !(h1 && h2 && h3);
    let conclusions = deviations.iter().all(|d| *d <= eigenvalue_bound + 1e-14)
        && projection_deviation <= projection_bound + 1e-14;
    SmallEvReport {
        gamma,
        delta,
        n_index,
        m,
        h1,
        h2,
        h3,
        measured_delta,
        deviations,
        eigenvalue_bound,
        projection_deviation,
        projection_bound,
        pass: !hypothesis_violation && conclusions,
        hypothesis_violation,
    }
}

/// Eigenvalues of the pencil `(A, C)` for a symmetric `A` and a Gram matrix
/// `C = I + E` close to the identity, via the Cholesky reduction.
pub fn gram_corrected_eigenvalues(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = nalgebra::Cholesky::new(c.clone()).ok_or_else(|| Error::LinearSolve {
        context: "Gram matrix is not positive definite".into(),
    })?;
    let l_inv = chol.l().try_inverse().ok_or_else(|| Error::LinearSolve {
        context: "triangular inverse".into(),
    })?;
    let reduced = &l_inv * a * l_inv.transpose();
    let eig = nalgebra::SymmetricEigen::new(reduced);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals)
}
