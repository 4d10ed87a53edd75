//! Direct (u,v)-capacity solves at fixed hole size, the full power-series
//! expansion of the capacity in the scaling parameter, exterior harmonic
//! extensions and the energy form built from principal parts.
//!
//! The capacity of the scaled hole is evaluated from a representation of the
//! capacitary potential as a double layer plus a logarithmically weighted
//! single layer.  Two coupled second-kind systems are solved per hole size:
//! an adjoint pair fixing the equilibrium-type densities (`rho`) and a double
//! layer pair carrying the boundary datum (`theta`).  The same operators,
//! expanded in powers of the hole size, produce the coefficient tables of
//! the capacity series.

use crate::error::{Error, Result};
use crate::geometry::{eps0_estimate, ClosedCurve, QuadratureGrid, ShapeInfo};
use crate::poly::{AnalyticGerm, Poly2};
use crate::potential::{
    assemble, double_layer_eval, fundamental, fundamental_deriv, grad_double_layer_eval,
    grad_fundamental, grad_fundamental_deriv, grad_single_layer_eval, single_layer_eval,
    HypersingularApplier, OperatorKind,
};
use nalgebra::{DMatrix, DVector, Dyn, LU};
use std::f64::consts::PI;

type DenseLu = LU<f64, Dyn, Dyn>;

const SOLVE_RESIDUAL_TOL: f64 = 1e-9;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|m| m as f64).product()
}

/// Operator set on the hole boundary; sufficient for exterior problems and
/// reused by the outer-domain workspace.
pub struct HoleOperators {
    pub grid: QuadratureGrid,
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub w_star: DMatrix<f64>,
    lu_adjoint: DenseLu,
    lu_double_layer: DenseLu,
    lu_single_layer: DenseLu,
    hyper: HypersingularApplier,
}

fn bordered(core: DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let n = core.nrows();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&core);
    for i in 0..n {
        m[(i, n)] = 1.0;
        m[(n, i)] = weights[i];
    }
    m
}

impl HoleOperators {
    pub fn new(curve: &ClosedCurve, n: usize) -> Result<Self> {
        let grid = QuadratureGrid::new(curve, n)?;
        let v = assemble(OperatorKind::SingleLayerTrace, &grid, &grid)?.matrix;
        let w = assemble(OperatorKind::DoubleLayer, &grid, &grid)?.matrix;
        let w_star = assemble(OperatorKind::AdjointDoubleLayer, &grid, &grid)?.matrix;

        // (1/2 I - W*) and (1/2 I - W) have one-dimensional defects on a
        // closed curve; the mean constraint plus a compensating column makes
        // the systems square and well conditioned.
        let mut adj = -&w_star;
        let mut dl = -&w;
        for i in 0..n {
            adj[(i, i)] += 0.5;
            dl[(i, i)] += 0.5;
        }
        let lu_adjoint = bordered(adj, &grid.weights).lu();
        let lu_double_layer = bordered(dl, &grid.weights).lu();
        let lu_single_layer = bordered(v.clone(), &grid.weights).lu();
        let hyper = HypersingularApplier::new(&grid)?;
        Ok(HoleOperators {
            grid,
            v,
            w,
            w_star,
            lu_adjoint,
            lu_double_layer,
            lu_single_layer,
            hyper,
        })
    }

    fn solve_bordered(
        &self,
        lu: &DenseLu,
        rhs: &DVector<f64>,
        last: f64,
        what: &str,
    ) -> Result<(DVector<f64>, f64)> {
        let n = self.grid.n;
        let mut full = DVector::zeros(n + 1);
        full.rows_mut(0, n).copy_from(rhs);
        full[n] = last;
        let sol = lu.solve(&full).ok_or_else(|| Error::LinearSolve {
            context: what.to_string(),
        })?;
        Ok((sol.rows(0, n).into_owned(), sol[n]))
    }

    /// Solve `(1/2 - W*) rho = rhs` with `int rho = mean`.
    pub fn solve_adjoint(&self, rhs: &DVector<f64>, mean: f64) -> Result<DVector<f64>> {
        Ok(self
            .solve_bordered(
                &self.lu_adjoint,
                rhs,
                mean,
                "adjoint system on hole boundary",
            )?
            .0)
    }

    /// Solve `(1/2 - W) theta = rhs` with zero-mean `theta`.
    pub fn solve_double_layer(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self
            .solve_bordered(
                &self.lu_double_layer,
                rhs,
                0.0,
                "double layer system on hole boundary",
            )?
            .0)
    }

    /// Solve `V phi + C = rhs` with zero-mean `phi`; returns `(phi, C)`.
    /// This is the bounded exterior Dirichlet problem: `C` is the value at
    /// infinity of the represented solution.
    pub fn solve_exterior(&self, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        self.solve_bordered(
            &self.lu_single_layer,
            rhs,
            0.0,
            "exterior single layer system",
        )
    }

    /// Exterior-side normal derivative of the single layer with density `phi`.
    pub fn single_layer_exterior_dnu(&self, phi: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.w_star * phi;
        out += 0.5 * phi;
        out
    }

    /// Trace of `-w^-[., theta]` on the hole boundary.
    pub fn neg_exterior_double_layer_trace(&self, theta: &DVector<f64>) -> DVector<f64> {
        let mut out = -(&self.w * theta);
        out += 0.5 * theta;
        out
    }

    /// Normal derivative of the double layer with density `theta` (no jump).
    pub fn double_layer_dnu(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.hyper.apply(theta)
    }

    /// Exact integral of a polynomial over the enclosed region, by reduction
    /// to a boundary integral of the antiderivative.
    pub fn area_integral(&self, p: &Poly2) -> f64 {
        let anti = p.antiderivative_x();
        let g = &self.grid;
        (0..g.n)
            .map(|i| anti.eval(g.points[i]) * g.normals[i][0] * g.weights[i])
            .sum()
    }

    /// `int_omega grad p . grad q` for polynomials, exactly.
    pub fn dirichlet_product(&self, p: &Poly2, q: &Poly2) -> f64 {
        let integrand = p.dx().mul(&q.dx()).add(&p.dy().mul(&q.dy()));
        self.area_integral(&integrand)
    }

    pub fn values(&self, p: &Poly2) -> DVector<f64> {
        DVector::from_iterator(self.grid.n, self.grid.points.iter().map(|&x| p.eval(x)))
    }
}

/// Grids and factorizations for a fixed pair (outer domain, hole shape).
pub struct CapacityWorkspace {
    pub outer: QuadratureGrid,
    pub hole: HoleOperators,
    w_omega: DMatrix<f64>,
    w_star_omega: DMatrix<f64>,
    lu_dl_omega: DenseLu,
    lu_adj_omega: DenseLu,
    pub eps0: f64,
}

impl CapacityWorkspace {
    pub fn new(outer_curve: &ClosedCurve, hole_curve: &ClosedCurve, n: usize) -> Result<Self> {
        let outer = QuadratureGrid::new(outer_curve, n)?;
        let hole = HoleOperators::new(hole_curve, n)?;
        let w_omega = assemble(OperatorKind::DoubleLayer, &outer, &outer)?.matrix;
        let w_star_omega = assemble(OperatorKind::AdjointDoubleLayer, &outer, &outer)?.matrix;
        let mut dl = w_omega.clone();
        let mut adj = w_star_omega.clone();
        for i in 0..n {
            dl[(i, i)] += 0.5;
            adj[(i, i)] += 0.5;
        }
        let eps0 = eps0_estimate(hole_curve, outer_curve);
        Ok(CapacityWorkspace {
            outer,
            hole,
            w_omega,
            w_star_omega,
            lu_dl_omega: dl.lu(),
            lu_adj_omega: adj.lu(),
            eps0,
        })
    }

    fn check_eps(&self, eps: f64, germ: Option<&AnalyticGerm>) -> Result<()> {
        if !(eps > 0.0) || eps >= self.eps0 {
            return Err(Error::Containment {
                eps,
                eps0: self.eps0,
            });
        }
        if let Some(g) = germ {
            let reach = eps * self.hole.grid.curve().max_radius();
            if reach > g.radius() {
                return Err(Error::Domain(format!(
                    "scaled hole reaches radius {reach:.3e}, beyond the germ's stated convergence radius {:.3e}",
                    g.radius()
                )));
            }
        }
        Ok(())
    }

    /// Solve `(1/2 + W_Omega) x = rhs` on the outer boundary.
    fn solve_dl_outer(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu_dl_omega
            .solve(rhs)
            .ok_or_else(|| Error::LinearSolve {
                context: "double layer system on outer boundary".into(),
            })
    }

    fn solve_adj_outer(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu_adj_omega
            .solve(rhs)
            .ok_or_else(|| Error::LinearSolve {
                context: "adjoint system on outer boundary".into(),
            })
    }
}

/// Densities solving both coupled systems at a fixed hole size.
pub struct DensitySolution {
    pub eps: f64,
    pub rho_outer: DVector<f64>,
    pub rho_hole: DVector<f64>,
    pub theta_outer: DVector<f64>,
    pub theta_hole: DVector<f64>,
    /// `int_{d omega} u^a(eps t) rho_hole(t) dsigma_t`.
    pub datum_mean: f64,
    /// Denominator of the representation: mean single layer plus `log|eps|/2pi`.
    pub denominator: f64,
    pub residual_rho: f64,
    pub residual_theta: f64,
    germ_a: AnalyticGerm,
}

/// Equilibrium-type pair (geometry only, independent of the germ).
pub struct RhoSolution {
    pub eps: f64,
    pub outer: DVector<f64>,
    pub hole: DVector<f64>,
    pub residual: f64,
}

pub fn solve_rho(ws: &CapacityWorkspace, eps: f64) -> Result<RhoSolution> {
    ws.check_eps(eps, None)?;
    let no = ws.outer.n;
    let nh = ws.hole.grid.n;
    let size = no + nh + 1;
    let mut m = DMatrix::zeros(size, size);
    // outer rows: (1/2 + W*_Omega) rho_o + cross rho_i = 0
    for i in 0..no {
        for j in 0..no {
            m[(i, j)] = ws.w_star_omega[(i, j)];
        }
        m[(i, i)] += 0.5;
        let x = ws.outer.points[i];
        let nu = ws.outer.normals[i];
        for l in 0..nh {
            let s = ws.hole.grid.points[l];
            let g = grad_fundamental([x[0] - eps * s[0], x[1] - eps * s[1]]);
            m[(i, no + l)] = (nu[0] * g[0] + nu[1] * g[1]) * ws.hole.grid.weights[l];
        }
    }
    // hole rows: -eps cross rho_o + (1/2 - W*_omega) rho_i + c = 0
    for i in 0..nh {
        let t = ws.hole.grid.points[i];
        let nu = ws.hole.grid.normals[i];
        for l in 0..no {
            let y = ws.outer.points[l];
            let g = grad_fundamental([eps * t[0] - y[0], eps * t[1] - y[1]]);
            m[(no + i, l)] = -eps * (nu[0] * g[0] + nu[1] * g[1]) * ws.outer.weights[l];
        }
        for j in 0..nh {
            m[(no + i, no + j)] = -ws.hole.w_star[(i, j)];
        }
        m[(no + i, no + i)] += 0.5;
        m[(no + i, size - 1)] = 1.0;
    }
    // constraint row: int rho_i = 1
    for j in 0..nh {
        m[(size - 1, no + j)] = ws.hole.grid.weights[j];
    }
    let mut rhs = DVector::zeros(size);
    rhs[size - 1] = 1.0;
    let lu = m.clone().lu();
    let sol = lu.solve(&rhs).ok_or_else(|| Error::LinearSolve {
        context: "coupled equilibrium system".into(),
    })?;
    let residual = (&m * &sol - &rhs).amax();
    Ok(RhoSolution {
        eps,
        outer: sol.rows(0, no).into_owned(),
        hole: sol.rows(no, nh).into_owned(),
        residual,
    })
}

/// Boundary-datum pair for the germ `u^a`, given the equilibrium pair.
pub struct ThetaSolution {
    pub outer: DVector<f64>,
    pub hole: DVector<f64>,
    pub datum_mean: f64,
    pub denominator: f64,
    pub residual: f64,
}

pub fn solve_theta(
    ws: &CapacityWorkspace,
    rho: &RhoSolution,
    germ_a: &AnalyticGerm,
    eps: f64,
) -> Result<ThetaSolution> {
    ws.check_eps(eps, Some(germ_a))?;
    let no = ws.outer.n;
    let nh = ws.hole.grid.n;
    let size = no + nh + 1;
    let hg = &ws.hole.grid;

    // u^a(eps t) on the hole boundary and its rho-weighted mean
    let datum: Vec<f64> = hg
        .points
        .iter()
        .map(|&t| germ_a.eval([eps * t[0], eps * t[1]]))
        .collect();
    let datum_mean: f64 = (0..nh)
        .map(|l| datum[l] * rho.hole[l] * hg.weights[l])
        .sum();

    let mut m = DMatrix::zeros(size, size);
    // outer rows: (1/2 + W_Omega) theta_o + eps cross theta_i = 0
    for i in 0..no {
        for j in 0..no {
            m[(i, j)] = ws.w_omega[(i, j)];
        }
        m[(i, i)] += 0.5;
        let x = ws.outer.points[i];
        for l in 0..nh {
            let s = hg.points[l];
            let nu = hg.normals[l];
            let g = grad_fundamental([x[0] - eps * s[0], x[1] - eps * s[1]]);
            m[(i, no + l)] = eps * (nu[0] * g[0] + nu[1] * g[1]) * hg.weights[l];
        }
    }
    // hole rows: w[outer, theta_o](eps t) + (1/2 - W_omega) theta_i + c = datum - mean
    for i in 0..nh {
        let t = hg.points[i];
        for l in 0..no {
            let y = ws.outer.points[l];
            let nu = ws.outer.normals[l];
            let g = grad_fundamental([eps * t[0] - y[0], eps * t[1] - y[1]]);
            m[(no + i, l)] = -(nu[0] * g[0] + nu[1] * g[1]) * ws.outer.weights[l];
        }
        for j in 0..nh {
            m[(no + i, no + j)] = -ws.hole.w[(i, j)];
        }
        m[(no + i, no + i)] += 0.5;
        m[(no + i, size - 1)] = 1.0;
    }
    for j in 0..nh {
        m[(size - 1, no + j)] = hg.weights[j];
    }
    let mut rhs = DVector::zeros(size);
    for i in 0..nh {
        rhs[no + i] = datum[i] - datum_mean;
    }
    let lu = m.clone().lu();
    let sol = lu.solve(&rhs).ok_or_else(|| Error::LinearSolve {
        context: "coupled boundary-datum system".into(),
    })?;
    let residual = (&m * &sol - &rhs).amax();

    // denominator: mean over the hole boundary of the single layer sum, plus
    // log|eps|/2pi; the own-curve trace goes through the log-kernel rule
    let own_trace = &ws.hole.v * &rho.hole;
    let mut mean_v = 0.0;
    for l in 0..nh {
        let s = hg.points[l];
        let vs = single_layer_eval(&ws.outer, &rho.outer, [eps * s[0], eps * s[1]]) + own_trace[l];
        mean_v += vs * hg.weights[l];
    }
    mean_v /= hg.length();
    let denominator = mean_v + eps.abs().ln() / (2.0 * PI);

    Ok(ThetaSolution {
        outer: sol.rows(0, no).into_owned(),
        hole: sol.rows(no, nh).into_owned(),
        datum_mean,
        denominator,
        residual,
    })
}

pub fn solve_densities(
    ws: &CapacityWorkspace,
    germ_a: &AnalyticGerm,
    eps: f64,
) -> Result<DensitySolution> {
    let rho = solve_rho(ws, eps)?;
    solve_densities_with_rho(ws, &rho, germ_a)
}

/// Reuse an equilibrium solve across several germs at the same hole size.
pub fn solve_densities_with_rho(
    ws: &CapacityWorkspace,
    rho: &RhoSolution,
    germ_a: &AnalyticGerm,
) -> Result<DensitySolution> {
    let theta = solve_theta(ws, rho, germ_a, rho.eps)?;
    if rho.residual > SOLVE_RESIDUAL_TOL || theta.residual > SOLVE_RESIDUAL_TOL {
        return Err(Error::LinearSolve {
            context: format!(
                "density solve residuals too large: {:.3e}, {:.3e}",
                rho.residual, theta.residual
            ),
        });
    }
    Ok(DensitySolution {
        eps: rho.eps,
        rho_outer: rho.outer.clone(),
        rho_hole: rho.hole.clone(),
        theta_outer: theta.outer,
        theta_hole: theta.hole,
        datum_mean: theta.datum_mean,
        denominator: theta.denominator,
        residual_rho: rho.residual,
        residual_theta: theta.residual,
        germ_a: germ_a.clone(),
    })
}

/// Normal derivative on the hole boundary of the rescaled capacitary
/// potential `t -> V(eps t)` represented by `sol`.
fn rescaled_normal_derivative(ws: &CapacityWorkspace, sol: &DensitySolution) -> DVector<f64> {
    let hg = &ws.hole.grid;
    let nh = hg.n;
    let eps = sol.eps;
    let maue = ws.hole.double_layer_dnu(&sol.theta_hole);
    let sl_dnu = ws.hole.single_layer_exterior_dnu(&sol.rho_hole);
    let scale = sol.datum_mean / sol.denominator;
    DVector::from_iterator(
        nh,
        (0..nh).map(|i| {
            let t = hg.points[i];
            let nu = hg.normals[i];
            let xt = [eps * t[0], eps * t[1]];
            let gw = grad_double_layer_eval(&ws.outer, &sol.theta_outer, xt);
            let gv = grad_single_layer_eval(&ws.outer, &sol.rho_outer, xt);
            eps * (nu[0] * gw[0] + nu[1] * gw[1]) - maue[i]
                + scale * (eps * (nu[0] * gv[0] + nu[1] * gv[1]) + sl_dnu[i])
        }),
    )
}

/// `int_omega (grad u^a)(eps t).(grad u^b)(eps t) dt`, exactly.
fn gradient_pairing(ws: &CapacityWorkspace, eps: f64, a: &AnalyticGerm, b: &AnalyticGerm) -> f64 {
    let ax = a.poly().dx().scale_arguments(eps);
    let ay = a.poly().dy().scale_arguments(eps);
    let bx = b.poly().dx().scale_arguments(eps);
    let by = b.poly().dy().scale_arguments(eps);
    let integrand = ax.mul(&bx).add(&ay.mul(&by));
    ws.hole.area_integral(&integrand)
}

/// Capacity from an existing solve for `u^a`, paired against `u^b`.
pub fn direct_capacity_with(
    ws: &CapacityWorkspace,
    sol: &DensitySolution,
    germ_b: &AnalyticGerm,
) -> f64 {
    let hg = &ws.hole.grid;
    let eps = sol.eps;
    let dnu = rescaled_normal_derivative(ws, sol);
    let mut boundary = 0.0;
    for i in 0..hg.n {
        let t = hg.points[i];
        boundary -= dnu[i] * germ_b.eval([eps * t[0], eps * t[1]]) * hg.weights[i];
    }
    boundary + eps * eps * gradient_pairing(ws, eps, &sol.germ_a, germ_b)
}

/// `Cap(eps omega, u^a, u^b)` by the direct boundary-integral route.
pub fn direct_capacity(
    ws: &CapacityWorkspace,
    germ_a: &AnalyticGerm,
    germ_b: &AnalyticGerm,
    eps: f64,
) -> Result<f64> {
    let sol = solve_densities(ws, germ_a, eps)?;
    Ok(direct_capacity_with(ws, &sol, germ_b))
}

/// Capacitary potential of `sol` evaluated at a point of the perforated
/// domain (original, unscaled coordinates).
pub fn potential_value(ws: &CapacityWorkspace, sol: &DensitySolution, x: [f64; 2]) -> f64 {
    let eps = sol.eps;
    let th = [x[0] / eps, x[1] / eps];
    let w_part = double_layer_eval(&ws.outer, &sol.theta_outer, x)
        - double_layer_eval(&ws.hole.grid, &sol.theta_hole, th);
    let v_part = single_layer_eval(&ws.outer, &sol.rho_outer, x)
        + single_layer_eval(&ws.hole.grid, &sol.rho_hole, th)
        + eps.abs().ln() / (2.0 * PI);
    w_part + sol.datum_mean * v_part / sol.denominator
}

// ---------------------------------------------------------------------------
// Power series machinery
// ---------------------------------------------------------------------------

/// Coefficient sequences of the density expansions and everything derived
/// from them that does not involve the second germ.  Index k holds the
/// epsilon^k Taylor coefficient (factorials already absorbed).
pub struct DensitySeries {
    pub order: usize,
    pub rho_outer: Vec<DVector<f64>>,
    pub rho_hole: Vec<DVector<f64>>,
    pub theta_outer: Vec<DVector<f64>>,
    pub theta_hole: Vec<DVector<f64>>,
    /// Trace on the hole boundary of the k-th solution term.
    pub sol_trace: Vec<DVector<f64>>,
    /// Its outward normal derivative.
    pub sol_dnu: Vec<DVector<f64>>,
    /// Trace of the k-th logarithmic-unit term.
    pub aux_trace: Vec<DVector<f64>>,
    pub aux_dnu: Vec<DVector<f64>>,
    /// Scalar datum means g_k.
    pub datum_means: Vec<f64>,
    /// Scalar denominator means r_k; `denom_means[0]` is the constant r0.
    pub denom_means: Vec<f64>,
    /// Homogeneous parts of the first germ sampled on the hole boundary.
    pub u_sharp_a: Vec<DVector<f64>>,
    germ_a: AnalyticGerm,
}

pub fn series_densities(
    ws: &CapacityWorkspace,
    germ_a: &AnalyticGerm,
    order: usize,
) -> Result<DensitySeries> {
    if germ_a.degree() < order {
        return Err(Error::DegreeTooLow {
            have: germ_a.degree(),
            need: order,
        });
    }
    let no = ws.outer.n;
    let nh = ws.hole.grid.n;
    let og = &ws.outer;
    let hg = &ws.hole.grid;

    // rho series
    let mut rho_o: Vec<DVector<f64>> = Vec::with_capacity(order + 1);
    let mut rho_h: Vec<DVector<f64>> = Vec::with_capacity(order + 1);
    rho_h.push(ws.hole.solve_adjoint(&DVector::zeros(nh), 1.0)?);
    {
        let rhs = DVector::from_iterator(
            no,
            (0..no).map(|i| {
                let g = grad_fundamental(og.points[i]);
                let nu = og.normals[i];
                -(nu[0] * g[0] + nu[1] * g[1])
            }),
        );
        rho_o.push(ws.solve_adj_outer(&rhs)?);
    }
    for k in 1..=order {
        // q^{(a,b)}_kappa: gradient moments of outer equilibrium terms
        let q_moment = |a: usize, b: usize, kappa: usize| -> [f64; 2] {
            let mut s = [0.0, 0.0];
            for l in 0..no {
                let g = grad_fundamental_deriv(a, b, og.points[l]);
                let w = og.weights[l] * rho_o[kappa][l];
                s[0] += w * g[0];
                s[1] += w * g[1];
            }
            s
        };
        let mut rhs_h = DVector::zeros(nh);
        for j in 0..k {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 }; // (-1)^{j+1}
            for h in 0..=j {
                let q = q_moment(h, j - h, k - 1 - j);
                let inv = 1.0 / (factorial(h) * factorial(j - h));
                for i in 0..nh {
                    let t = hg.points[i];
                    let nu = hg.normals[i];
                    rhs_h[i] += sign
                        * inv
                        * t[0].powi(h as i32)
                        * t[1].powi((j - h) as i32)
                        * (nu[0] * q[0] + nu[1] * q[1]);
                }
            }
        }
        rho_h.push(ws.hole.solve_adjoint(&rhs_h, 0.0)?);

        let m_moment = |a: usize, b: usize, kappa: usize| -> f64 {
            (0..nh)
                .map(|l| {
                    let s = hg.points[l];
                    hg.weights[l] * rho_h[kappa][l] * s[0].powi(a as i32) * s[1].powi(b as i32)
                })
                .sum()
        };
        let mut rhs_o = DVector::zeros(no);
        for j in 0..=k {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            for h in 0..=j {
                let mm = m_moment(h, j - h, k - j);
                if mm == 0.0 {
                    continue;
                }
                let inv = 1.0 / (factorial(h) * factorial(j - h));
                for i in 0..no {
                    let g = grad_fundamental_deriv(h, j - h, og.points[i]);
                    let nu = og.normals[i];
                    rhs_o[i] += sign * inv * mm * (nu[0] * g[0] + nu[1] * g[1]);
                }
            }
        }
        rho_o.push(ws.solve_adj_outer(&rhs_o)?);
    }

    // germ homogeneous parts sampled on the hole boundary
    let u_sharp_a: Vec<DVector<f64>> = (0..=order)
        .map(|k| ws.hole.values(&germ_a.homogeneous_part(k)))
        .collect();
    let inner_product = |l: usize, kappa: usize| -> f64 {
        (0..nh)
            .map(|i| u_sharp_a[l][i] * rho_h[kappa][i] * hg.weights[i])
            .sum()
    };

    // theta series; within each level the outer part is solved first
    let mut th_o: Vec<DVector<f64>> = vec![DVector::zeros(no)];
    let mut th_h: Vec<DVector<f64>> = vec![DVector::zeros(nh)];
    for k in 1..=order {
        let n_moment = |a: usize, b: usize, kappa: usize| -> [f64; 2] {
            let mut s = [0.0, 0.0];
            for l in 0..nh {
                let p = hg.points[l];
                let nu = hg.normals[l];
                let w = hg.weights[l] * th_h[kappa][l] * p[0].powi(a as i32) * p[1].powi(b as i32);
                s[0] += w * nu[0];
                s[1] += w * nu[1];
            }
            s
        };
        let mut rhs_o = DVector::zeros(no);
        if k >= 2 {
            for j in 0..=(k - 2) {
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                for h in 0..=j {
                    let nm = n_moment(h, j - h, k - 1 - j);
                    let inv = 1.0 / (factorial(h) * factorial(j - h));
                    for i in 0..no {
                        let g = grad_fundamental_deriv(h, j - h, og.points[i]);
                        rhs_o[i] += sign * inv * (g[0] * nm[0] + g[1] * nm[1]);
                    }
                }
            }
        }
        th_o.push(ws.solve_dl_outer(&rhs_o)?);

        let p_moment = |a: usize, b: usize, kappa: usize| -> f64 {
            (0..no)
                .map(|l| {
                    let g = grad_fundamental_deriv(a, b, og.points[l]);
                    let nu = og.normals[l];
                    og.weights[l] * th_o[kappa][l] * (nu[0] * g[0] + nu[1] * g[1])
                })
                .sum()
        };
        let mut rhs_h = DVector::zeros(nh);
        for j in 0..k {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            for h in 0..=j {
                let pm = p_moment(h, j - h, k - j);
                if pm == 0.0 {
                    continue;
                }
                let inv = 1.0 / (factorial(h) * factorial(j - h));
                for i in 0..nh {
                    let t = hg.points[i];
                    rhs_h[i] += sign * inv * pm * t[0].powi(h as i32) * t[1].powi((j - h) as i32);
                }
            }
        }
        let mut datum_sum = 0.0;
        for l in 0..=k {
            datum_sum += inner_product(l, k - l);
        }
        for i in 0..nh {
            rhs_h[i] += u_sharp_a[k][i] - datum_sum;
        }
        th_h.push(ws.hole.solve_double_layer(&rhs_h)?);
    }

    // derived traces, normal derivatives, and scalar sequences
    let mut sol_trace = Vec::with_capacity(order + 1);
    let mut sol_dnu = Vec::with_capacity(order + 1);
    let mut aux_trace = Vec::with_capacity(order + 1);
    let mut aux_dnu = Vec::with_capacity(order + 1);
    let mut datum_means = Vec::with_capacity(order + 1);
    let mut denom_means = Vec::with_capacity(order + 1);

    for k in 0..=order {
        // polynomial part of the k-th solution term (degree k-1)
        let mut poly_u = Poly2::zero(k.saturating_sub(1));
        if k >= 1 {
            for j in 0..k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 }; // (-1)^j
                for h in 0..=j {
                    let kappa = k - j;
                    let pm: f64 = (0..no)
                        .map(|l| {
                            let g = grad_fundamental_deriv(h, j - h, og.points[l]);
                            let nu = og.normals[l];
                            og.weights[l] * th_o[kappa][l] * (nu[0] * g[0] + nu[1] * g[1])
                        })
                        .sum();
                    poly_u.add_coeff(h, j - h, sign * pm / (factorial(h) * factorial(j - h)));
                }
            }
        }
        // polynomial part of the k-th logarithmic-unit term (degree k)
        let mut poly_v = Poly2::zero(k);
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for h in 0..=j {
                let kappa = k - j;
                let sm: f64 = (0..no)
                    .map(|l| {
                        og.weights[l] * rho_o[kappa][l] * fundamental_deriv(h, j - h, og.points[l])
                    })
                    .sum();
                poly_v.add_coeff(h, j - h, sign * sm / (factorial(h) * factorial(j - h)));
            }
        }

        let poly_u_vals = ws.hole.values(&poly_u);
        let poly_v_vals = ws.hole.values(&poly_v);
        let (pu_dx, pu_dy) = (poly_u.dx(), poly_u.dy());
        let (pv_dx, pv_dy) = (poly_v.dx(), poly_v.dy());

        let trace_u = if k == 0 {
            DVector::zeros(nh)
        } else {
            &poly_u_vals + ws.hole.neg_exterior_double_layer_trace(&th_h[k])
        };
        let dnu_u = if k == 0 {
            DVector::zeros(nh)
        } else {
            let maue = ws.hole.double_layer_dnu(&th_h[k]);
            DVector::from_iterator(
                nh,
                (0..nh).map(|i| {
                    let p = hg.points[i];
                    let nu = hg.normals[i];
                    nu[0] * pu_dx.eval(p) + nu[1] * pu_dy.eval(p) - maue[i]
                }),
            )
        };
        let trace_v = &poly_v_vals + &ws.hole.v * &rho_h[k];
        let sl_dnu = ws.hole.single_layer_exterior_dnu(&rho_h[k]);
        let dnu_v = DVector::from_iterator(
            nh,
            (0..nh).map(|i| {
                let p = hg.points[i];
                let nu = hg.normals[i];
                nu[0] * pv_dx.eval(p) + nu[1] * pv_dy.eval(p) + sl_dnu[i]
            }),
        );

        let g_k: f64 = (0..=k).map(|l| inner_product(l, k - l)).sum();
        let r_k = hg.integrate(trace_v.as_slice()) / hg.length();

        sol_trace.push(trace_u);
        sol_dnu.push(dnu_u);
        aux_trace.push(trace_v);
        aux_dnu.push(dnu_v);
        datum_means.push(g_k);
        denom_means.push(r_k);
    }

    Ok(DensitySeries {
        order,
        rho_outer: rho_o,
        rho_hole: rho_h,
        theta_outer: th_o,
        theta_hole: th_h,
        sol_trace,
        sol_dnu,
        aux_trace,
        aux_dnu,
        datum_means,
        denom_means,
        u_sharp_a,
        germ_a: germ_a.clone(),
    })
}

/// The constant r0 from the two auxiliary harmonic problems: interior
/// Dirichlet in the outer domain with datum S, and the bounded exterior
/// problem on the hole with datum S; `r0 = lim H_i - H_o(0)`.
pub fn r0(ws: &CapacityWorkspace) -> Result<f64> {
    let og = &ws.outer;
    let datum_o = DVector::from_iterator(og.n, og.points.iter().map(|&p| fundamental(p)));
    let psi = ws.solve_dl_outer(&datum_o)?;
    let h_o_origin = double_layer_eval(og, &psi, [0.0, 0.0]);
    let hg = &ws.hole.grid;
    let datum_h = DVector::from_iterator(hg.n, hg.points.iter().map(|&p| fundamental(p)));
    let (_, limit) = ws.hole.solve_exterior(&datum_h)?;
    Ok(limit - h_o_origin)
}

/// Coefficient table of the capacity series
/// `Cap = sum_n eps^n sum_{l <= n+1} c_(n,l) / (r0 + log|eps|/2pi)^l`.
pub struct CapacityExpansion {
    pub r0: f64,
    pub order: usize,
    /// `coeffs[n][l]` for `0 <= l <= n+1`.
    pub coeffs: Vec<Vec<f64>>,
    /// Largest epsilon of a dyadic sweep on which consecutive truncations
    /// agree to 1%; `None` when the order is too low to compare.
    pub eps_valid: Option<f64>,
    /// Set when assembling a coefficient lost more than three digits to
    /// cancellation.
    pub cancellation_flag: bool,
}

pub fn series_coefficients(
    ws: &CapacityWorkspace,
    series: &DensitySeries,
    germ_b: &AnalyticGerm,
) -> Result<CapacityExpansion> {
    if germ_b.degree() < series.order {
        return Err(Error::DegreeTooLow {
            have: germ_b.degree(),
            need: series.order,
        });
    }
    let hg = &ws.hole.grid;
    let nh = hg.n;
    let order = series.order;
    let r0c = series.denom_means[0];

    let u_sharp_b: Vec<DVector<f64>> = (0..=order)
        .map(|k| ws.hole.values(&germ_b.homogeneous_part(k)))
        .collect();

    // u~_k = sum_l dnu_u[l] u^b_{#,k-l},  g~_k = sum_l g_l u^b_{#,k-l}
    let mut u_tilde: Vec<DVector<f64>> = Vec::with_capacity(order + 1);
    let mut g_tilde: Vec<DVector<f64>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut u = DVector::zeros(nh);
        let mut g = DVector::zeros(nh);
        for l in 0..=k {
            for i in 0..nh {
                u[i] += series.sol_dnu[l][i] * u_sharp_b[k - l][i];
                g[i] += series.datum_means[l] * u_sharp_b[k - l][i];
            }
        }
        u_tilde.push(u);
        g_tilde.push(g);
    }
    // a~_n = sum_k g~_{n-k} v~_k with v~_k the aux normal derivative
    let mut a_tilde: Vec<DVector<f64>> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut a = DVector::zeros(nh);
        for k in 0..=n {
            for i in 0..nh {
                a[i] += g_tilde[n - k][i] * series.aux_dnu[k][i];
            }
        }
        a_tilde.push(a);
    }

    // compositions: e[l][k] = sum over beta in (N*)^l with |beta| = k of
    // prod r_{beta_h}
    let mut e = vec![vec![0.0; order + 1]; order + 1];
    if order >= 1 {
        for k in 1..=order {
            e[1][k] = series.denom_means[k];
        }
        for l in 2..=order {
            for k in l..=order {
                let mut s = 0.0;
                for m in 1..=(k - l + 1) {
                    s += series.denom_means[m] * e[l - 1][k - m];
                }
                e[l][k] = s;
            }
        }
    }

    // xi_n: area integrals of germ gradients over the hole shape
    let mut xi = vec![0.0; order + 1];
    for (n, xi_n) in xi.iter_mut().enumerate().skip(2) {
        let mut s = 0.0;
        for l in 0..=(n - 2) {
            let pa = series.germ_a.homogeneous_part(l + 1);
            let pb = germ_b.homogeneous_part(n - 1 - l);
            s += ws.hole.dirichlet_product(&pa, &pb);
        }
        *xi_n = s;
    }

    let integrate = |v: &DVector<f64>| hg.integrate(v.as_slice());

    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    let mut cancellation = false;
    let scale = a_tilde
        .iter()
        .map(|a| integrate(&a.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for n in 0..=order {
        let mut row = Vec::with_capacity(n + 2);
        row.push(-integrate(&u_tilde[n]) + xi[n]);
        row.push(-integrate(&a_tilde[n]));
        for l in 2..=(n + 1) {
            let mut lam = DVector::zeros(nh);
            let mut magnitude = 0.0;
            for k in (l - 1)..=n {
                let w = e[l - 1][k];
                if w != 0.0 {
                    lam += w * &a_tilde[n - k];
                    magnitude += w.abs() * integrate(&a_tilde[n - k].abs());
                }
            }
            let sign = if (l - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let c = -sign * integrate(&lam);
            if magnitude > 1e-8 * scale && c.abs() < 1e-3 * magnitude {
                cancellation = true;
            }
            row.push(c);
        }
        coeffs.push(row);
    }

    let mut expansion = CapacityExpansion {
        r0: r0c,
        order,
        coeffs,
        eps_valid: None,
        cancellation_flag: cancellation,
    };
    if order >= 1 {
        let mut best: Option<f64> = None;
        for j in 1..=24 {
            let eps = 0.5f64.powi(j);
            if eps >= ws.eps0 {
                continue;
            }
            let full = eval_series(&expansion, eps, order, order + 1);
            let prev = eval_series(&expansion, eps, order - 1, order + 1);
            if full != 0.0 && ((full - prev) / full).abs() <= 0.01 {
                best = Some(eps);
                break;
            }
        }
        expansion.eps_valid = best;
    }
    Ok(expansion)
}

/// Partial sum of the capacity series at `eps`, truncated at `n_max` in the
/// power index and `l_max` in the logarithmic index.
pub fn eval_series(exp: &CapacityExpansion, eps: f64, n_max: usize, l_max: usize) -> f64 {
    let base = exp.r0 + eps.abs().ln() / (2.0 * PI);
    let mut total = 0.0;
    for n in 0..=n_max.min(exp.order) {
        let mut inner = 0.0;
        for (l, &c) in exp.coeffs[n].iter().enumerate().take(l_max.min(n + 1) + 1) {
            inner += c / base.powi(l as i32);
        }
        total += inner * eps.powi(n as i32);
    }
    total
}

// ---------------------------------------------------------------------------
// Exterior solutions and the energy form Q
// ---------------------------------------------------------------------------

/// Bounded exterior harmonic extension of a homogeneous boundary datum,
/// represented as a zero-mean single layer plus a constant.
pub struct ExteriorSolution {
    pub density: DVector<f64>,
    /// Value at infinity.
    pub limit: f64,
    datum: DVector<f64>,
}

/// Solve the bounded exterior Dirichlet problem with datum `u_sharp` (a
/// homogeneous harmonic polynomial) on the hole boundary.
pub fn exterior_solution(hole: &HoleOperators, u_sharp: &Poly2) -> Result<ExteriorSolution> {
    let lap = u_sharp.laplacian().max_abs_coeff();
    let norm = u_sharp.max_abs_coeff().max(1e-300);
    if lap > 1e-10 * norm {
        return Err(Error::NonHarmonic(lap / norm));
    }
    let datum = hole.values(u_sharp);
    let (density, limit) = hole.solve_exterior(&datum)?;
    Ok(ExteriorSolution {
        density,
        limit,
        datum,
    })
}

impl ExteriorSolution {
    /// Value at an exterior point.
    pub fn eval(&self, hole: &HoleOperators, x: [f64; 2]) -> f64 {
        single_layer_eval(&hole.grid, &self.density, x) + self.limit
    }

    /// Exterior Dirichlet energy paired against another exterior solution:
    /// `int_{R^2 minus hole} grad u . grad v = -int dnu(u) v dsigma`.
    pub fn pair_energy(&self, hole: &HoleOperators, other: &ExteriorSolution) -> f64 {
        let dnu = hole.single_layer_exterior_dnu(&self.density);
        -(0..hole.grid.n)
            .map(|i| dnu[i] * other.datum[i] * hole.grid.weights[i])
            .sum::<f64>()
    }

    pub fn energy(&self, hole: &HoleOperators) -> f64 {
        self.pair_energy(hole, self)
    }
}

/// The energy form `Q(u, v)` built from the principal parts of two germs
/// vanishing at the origin: exterior energy of the bounded extensions plus
/// the interior Dirichlet pairing of the principal parts.
pub fn q_form(hole: &HoleOperators, germ_a: &AnalyticGerm, germ_b: &AnalyticGerm) -> Result<f64> {
    if germ_a.vanishing_order() == 0 || germ_b.vanishing_order() == 0 {
        return Err(Error::Domain(
            "the energy form requires both germs to vanish at the origin".into(),
        ));
    }
    let pa = germ_a.principal_part();
    let pb = germ_b.principal_part();
    let ua = exterior_solution(hole, &pa)?;
    let ub = exterior_solution(hole, &pb)?;
    Ok(ua.pair_energy(hole, &ub) + hole.dirichlet_product(&pa, &pb))
}

/// Leading block of the capacity expansion under vanishing assumptions:
/// power `kappa(a) + kappa(b)`, coefficient `Q(a, b)`, and the numerator of
/// the first logarithmic correction.
pub struct VanishingExpansion {
    pub power: usize,
    pub q_coefficient: f64,
    pub log_numerator: f64,
    pub r0: f64,
}

impl VanishingExpansion {
    pub fn eval(&self, eps: f64) -> f64 {
        eps.powi(self.power as i32)
            * (self.q_coefficient + self.log_numerator / (self.r0 + eps.abs().ln() / (2.0 * PI)))
    }
}

pub fn vanishing_expansion(
    ws: &CapacityWorkspace,
    germ_a: &AnalyticGerm,
    germ_b: &AnalyticGerm,
) -> Result<VanishingExpansion> {
    let ka = germ_a.vanishing_order();
    let kb = germ_b.vanishing_order();
    if ka == 0 || kb == 0 {
        return Err(Error::Domain(
            "vanishing expansion requires both germs to vanish at the origin".into(),
        ));
    }
    let pa = germ_a.principal_part();
    let pb = germ_b.principal_part();
    let ua = exterior_solution(&ws.hole, &pa)?;
    let ub = exterior_solution(&ws.hole, &pb)?;
    let q = ua.pair_energy(&ws.hole, &ub) + ws.hole.dirichlet_product(&pa, &pb);
    Ok(VanishingExpansion {
        power: ka + kb,
        q_coefficient: q,
        log_numerator: -ua.limit * ub.limit,
        r0: r0(ws)?,
    })
}

// ---------------------------------------------------------------------------
// L2 pairing of capacitary potentials over a disk outer domain
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `int_Omega V_i V_j dx` for the capacitary potentials of the given solves,
/// by polar quadrature over a disk outer domain.  Inside the scaled hole the
/// potential equals the germ itself.
pub fn potential_l2_matrix(
    ws: &CapacityWorkspace,
    sols: &[&DensitySolution],
    germs: &[&AnalyticGerm],
) -> Result<DMatrix<f64>> {
    let (radius, center) = match ws.outer.curve().shape() {
        ShapeInfo::Circle { radius, center } => (*radius, *center),
        _ => {
            return Err(Error::Domain(
                "L2 pairing of potentials is implemented for disk outer domains only".into(),
            ))
        }
    };
    assert_eq!(sols.len(), germs.len());
    let m = sols.len();
    let eps = sols[0].eps;
    assert!(sols.iter().all(|s| s.eps == eps));
    let hole_reach = eps * ws.hole.grid.curve().max_radius();

    let (rn, rw) = gauss_legendre(40);
    let n_ang = 128;
    let mut values = vec![Vec::new(); m];
    let mut weights = Vec::new();
    for (ri, &rnode) in rn.iter().enumerate() {
        let r = 0.5 * radius * (rnode + 1.0);
        let wr = 0.5 * radius * rw[ri] * r * (2.0 * PI / n_ang as f64);
        for a in 0..n_ang {
            let th = 2.0 * PI * a as f64 / n_ang as f64;
            let x = [center[0] + r * th.cos(), center[1] + r * th.sin()];
            let inside_hole = x[0].hypot(x[1]) <= hole_reach
                && ws.hole.grid.curve().contains([x[0] / eps, x[1] / eps]);
            for i in 0..m {
                let v = if inside_hole {
                    germs[i].eval(x)
                } else {
                    potential_value(ws, sols[i], x)
                };
                values[i].push(v);
            }
            weights.push(wr);
        }
    }
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let s: f64 = values[i]
                .iter()
                .zip(&values[j])
                .zip(&weights)
                .map(|((a, b), w)| a * b * w)
                .sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(out)
}
