//! The acceptance-criteria suite behind `validate`: every criterion runs at
//! its stated tolerance and reports one pass/fail line with measured values.

use crate::capacity::{
    direct_capacity, potential_l2_matrix, q_form, series_coefficients, series_densities,
    solve_densities, CapacityWorkspace, HoleOperators,
};
use crate::eigenbasis::{eigenspace_at_index, germ_at, order_decomposition};
use crate::error::Result;
use crate::geometry::ClosedCurve;
use crate::poly::{polar_sine_germ, AnalyticGerm};
use crate::reference::{concentric_roots, concentric_spectrum, eccentric_branches_near};
use crate::runner::loglog_slope;
use crate::splitting::{
    elliptic_m_with_constants, predict_branches, small_ev_check, SmallEvReport,
};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Deliberate corruption hooks for fault-injection tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturb the closed-form elliptic constant; the oracle criterion must
    /// then fail.
    EllipticCk,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub details: Vec<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub level: String,
    pub seed: u64,
    pub all_pass: bool,
    pub total_seconds: f64,
    pub results: Vec<CriterionResult>,
}

fn random_germ(rng: &mut ChaCha8Rng, degree: usize, kappa: usize) -> AnalyticGerm {
    loop {
        let mut coeffs = Vec::new();
        for d in kappa..=degree {
            for j in 0..=d {
                coeffs.push((d - j, j, rng.gen_range(-1.0..1.0f64)));
            }
        }
        let g = AnalyticGerm::new(degree, &coeffs).unwrap();
        if g.vanishing_order() == kappa {
            return g;
        }
    }
}

struct Ctx {
    level: Level,
    seed: u64,
    fault: Option<Fault>,
}

fn c1_concentric_exactness(_ctx: &Ctx) -> (bool, Vec<String>) {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let ws = CapacityWorkspace::new(
        &ClosedCurve::circle(1.0).unwrap(),
        &ClosedCurve::circle(1.0).unwrap(),
        256,
    )
    .unwrap();
    let one = AnalyticGerm::constant(1.0);
    for &eps in &[1e-1, 1e-2, 1e-3, 1e-4] {
        let cap = direct_capacity(&ws, &one, &one, eps).unwrap();
        let exact = 2.0 * PI / eps.ln().abs();
        let rel = ((cap - exact) / exact).abs();
        details.push(format!("eps {eps:.0e}: rel error {rel:.3e} (tol 1e-6)"));
        pass &= rel <= 1e-6;
    }
    let secs = start.elapsed().as_secs_f64();
    details.push(format!("runtime {secs:.2}s (tol 5s)"));
    pass &= secs <= 5.0;
    (pass, details)
}

fn c2_series_leading_terms(ctx: &Ctx) -> (bool, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(2));
    let mut pass = true;
    let mut details = Vec::new();
    let ws = CapacityWorkspace::new(
        &ClosedCurve::circle(1.0).unwrap(),
        &ClosedCurve::ellipse(1.5, 0.7).unwrap(),
        256,
    )
    .unwrap();
    let mut worst00 = 0.0f64;
    let mut worst01 = 0.0f64;
    for _ in 0..5 {
        let a = random_germ(&mut rng, 3, 0);
        let b = random_germ(&mut rng, 3, 0);
        let s = series_densities(&ws, &a, 1).unwrap();
        let exp = series_coefficients(&ws, &s, &b).unwrap();
        worst00 = worst00.max(exp.coeffs[0][0].abs());
        worst01 = worst01.max((exp.coeffs[0][1] + a.value_at_origin() * b.value_at_origin()).abs());
    }
    details.push(format!("|c_(0,0)| worst {worst00:.3e} (tol 1e-10)"));
    details.push(format!(
        "|c_(0,1) + u(0)v(0)| worst {worst01:.3e} (tol 1e-9)"
    ));
    pass &= worst00 <= 1e-10 && worst01 <= 1e-9;

    // order-one pairs: c_(n,l) = 0 through n = 1, and c_(2,0) = Q(u,v)
    let a = random_germ(&mut rng, 3, 1);
    let b = random_germ(&mut rng, 3, 1);
    let s = series_densities(&ws, &a, 2).unwrap();
    let exp = series_coefficients(&ws, &s, &b).unwrap();
    let mut low = 0.0f64;
    for n in 0..=1usize {
        for &c in &exp.coeffs[n] {
            low = low.max(c.abs());
        }
    }
    // vanishing principal parts here are degree-1, hence harmonic
    let q = q_form(&ws.hole, &a, &b).unwrap();
    let relq = ((exp.coeffs[2][0] - q) / q).abs();
    details.push(format!(
        "order-1 pair: worst |c_(n<=1,l)| {low:.3e} (tol 1e-9)"
    ));
    details.push(format!("c_(2,0) vs energy form rel {relq:.3e} (tol 1e-7)"));
    pass &= low <= 1e-9 && relq <= 1e-7;
    (pass, details)
}

fn c3_rates(_ctx: &Ctx) -> (bool, Vec<String>) {
    let mut pass = true;
    let mut details = Vec::new();
    let ws = CapacityWorkspace::new(
        &ClosedCurve::circle(1.0).unwrap(),
        &ClosedCurve::circle(1.0).unwrap(),
        256,
    )
    .unwrap();
    let eps_list: Vec<f64> = (0..=10).map(|j| 0.1 * 0.5f64.powi(j)).collect();

    // non-vanishing pair: 1/|log eps| structure
    let a = AnalyticGerm::new(2, &[(0, 0, 0.9), (1, 0, 0.2), (0, 2, -0.3)]).unwrap();
    let b = AnalyticGerm::new(2, &[(0, 0, -1.1), (0, 1, 0.4)]).unwrap();
    let caps: Vec<f64> = eps_list
        .iter()
        .map(|&e| direct_capacity(&ws, &a, &b, e).unwrap())
        .collect();
    // slope of log|Cap| against log(1/|log eps|) is 1 for a pure log law
    let xs: Vec<f64> = eps_list.iter().map(|&e| 1.0 / e.ln().abs()).collect();
    let slope_log = loglog_slope(&xs, &caps);
    details.push(format!(
        "kappa 0: slope vs 1/|log eps| = {slope_log:.4} (tol |s-1| <= 0.05)"
    ));
    pass &= (slope_log - 1.0).abs() <= 0.05;
    let eps_ref = 1e-4;
    let cap_ref = direct_capacity(&ws, &a, &b, eps_ref).unwrap();
    let lead = 2.0 * PI * a.value_at_origin() * b.value_at_origin() / eps_ref.ln().abs();
    let ratio = cap_ref / lead;
    details.push(format!(
        "kappa 0 ratio to leading term at 1e-4: {ratio:.4} (tol 5%)"
    ));
    pass &= (ratio - 1.0).abs() <= 0.05;

    for k in 1..=2usize {
        let g = polar_sine_germ(k, 1.0, 0.4).pad_to_degree(k + 1);
        let caps: Vec<f64> = eps_list
            .iter()
            .map(|&e| direct_capacity(&ws, &g, &g, e).unwrap())
            .collect();
        let slope = loglog_slope(&eps_list, &caps);
        details.push(format!("kappa {k}: slope {slope:.4} (tol 2k +- 0.03)"));
        pass &= (slope - 2.0 * k as f64).abs() <= 0.03;
    }
    (pass, details)
}

fn c4_disk_closed_form(ctx: &Ctx) -> (bool, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(4));
    let mut pass = true;
    let mut details = Vec::new();
    let hole = HoleOperators::new(&ClosedCurve::circle(1.0).unwrap(), 256).unwrap();
    for k in 1..=3usize {
        let mut worst = 0.0f64;
        for _ in 0..3 {
            let (ba, bb) = (rng.gen_range(0.5..1.5f64), rng.gen_range(0.5..1.5f64));
            let (pa, pb) = (
                rng.gen_range(-PI / (2.0 * k as f64)..PI / (2.0 * k as f64)),
                rng.gen_range(-PI / (2.0 * k as f64)..PI / (2.0 * k as f64)),
            );
            let q = q_form(
                &hole,
                &polar_sine_germ(k, ba, pa),
                &polar_sine_germ(k, bb, pb),
            )
            .unwrap();
            let exact = 2.0 * PI * k as f64 * ba * bb * (k as f64 * (pa - pb)).cos();
            worst = worst.max(((q - exact) / exact).abs());
        }
        details.push(format!("k = {k}: worst rel error {worst:.3e} (tol 1e-7)"));
        pass &= worst <= 1e-7;
    }
    (pass, details)
}

fn c5_elliptic_oracle(ctx: &Ctx) -> (bool, Vec<String>) {
    let mut pass = true;
    let mut details = Vec::new();
    let (a, b) = (1.5, 0.7);
    let hole = HoleOperators::new(&ClosedCurve::ellipse(a, b).unwrap(), 256).unwrap();
    let ck_override = match ctx.fault {
        Some(Fault::EllipticCk) => Some(crate::splitting::elliptic_c_constant(1) * 1.02),
        None => None,
    };
    for k in 1..=3usize {
        let (b1, p1) = (1.1, 0.2);
        let (b2, p2) = (0.8, -0.35);
        let over = if k == 1 { ck_override } else { None };
        let m = elliptic_m_with_constants(a, b, k, (b1, p1), (b2, p2), over).unwrap();
        let g1 = polar_sine_germ(k, b1, p1);
        let g2 = polar_sine_germ(k, b2, p2);
        let oracle = [
            [
                q_form(&hole, &g2, &g2).unwrap(),
                q_form(&hole, &g1, &g2).unwrap(),
            ],
            [
                q_form(&hole, &g1, &g2).unwrap(),
                q_form(&hole, &g1, &g1).unwrap(),
            ],
        ];
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max(((m[i][j] - oracle[i][j]) / oracle[i][j]).abs());
            }
        }
        details.push(format!(
            "k = {k}: worst entry rel error {worst:.3e} (tol 1e-6)"
        ));
        pass &= worst <= 1e-6;
    }
    (pass, details)
}

fn c6_simple_shift(_ctx: &Ctx) -> (bool, Vec<String>) {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let j01 = crate::specfun::bessel_j_zero(crate::specfun::BesselOrder::new(0).unwrap(), 1);
    let u0_sq = 1.0 / (PI * crate::specfun::jn(1, j01).powi(2));
    let mut prev_dist = f64::INFINITY;
    let mut monotone = true;
    let mut final_ratio = 0.0;
    for &eps in &[1e-2, 1e-3, 1e-4, 1e-5] {
        let lam = concentric_spectrum(eps, 1).unwrap()[0];
        let ratio = (lam - j01 * j01) * eps.ln().abs() / (2.0 * PI * u0_sq);
        let dist = (ratio - 1.0).abs();
        details.push(format!("eps {eps:.0e}: ratio {ratio:.4}"));
        if dist > prev_dist + 1e-12 {
            monotone = false;
        }
        prev_dist = dist;
        final_ratio = ratio;
    }
    pass &= (0.9..=1.1).contains(&final_ratio);
    details.push(format!(
        "ratio at 1e-5 in [0.9, 1.1]: {}",
        (0.9..=1.1).contains(&final_ratio)
    ));
    pass &= monotone;
    details.push(format!("monotone approach to 1: {monotone}"));
    let secs = start.elapsed().as_secs_f64();
    details.push(format!("runtime {secs:.2}s (tol 10s)"));
    pass &= secs <= 10.0;
    (pass, details)
}

fn c7_double_rate_and_prefactor(_ctx: &Ctx) -> (bool, Vec<String>) {
    let mut pass = true;
    let mut details = Vec::new();
    let (lambda, modes) = eigenspace_at_index(2).unwrap();
    let germ = germ_at(&modes[0], [0.0, 0.0], 6).unwrap();
    let hole = HoleOperators::new(&ClosedCurve::circle(1.0).unwrap(), 256).unwrap();
    let mu = q_form(&hole, &germ, &germ).unwrap();
    let eps = 1e-3;
    let root = concentric_roots(1, eps, lambda.sqrt() + 0.5)
        .into_iter()
        .find(|r| (r * r - lambda).abs() < 1.0)
        .expect("annulus root near the double eigenvalue");
    let measured = (root * root - lambda) / (eps * eps);
    let rel = ((measured - mu) / mu).abs();
    details.push(format!(
        "(lambda^eps - lambda)/eps^2 = {measured:.4} vs predicted {mu:.4}, rel {rel:.3e} (tol 5%)"
    ));
    pass &= rel <= 0.05;

    // no splitting: both mirror sectors carry the same root
    let window = (lambda - 0.05, lambda + 10.0 * mu * eps * eps + 0.05);
    let (even, odd) = eccentric_branches_near(eps, [0.0, 0.0], window, 12, 5e-3).unwrap();
    let (re, ro) = (even.first(), odd.first());
    match (re, ro) {
        (Some(&re), Some(&ro)) => {
            let gap = (re - ro).abs();
            details.push(format!(
                "paired sector roots differ by {gap:.3e} (tol 1e-10)"
            ));
            pass &= gap <= 1e-10;
        }
        _ => {
            details.push("missing sector root near the double eigenvalue".into());
            pass = false;
        }
    }
    (pass, details)
}

fn c8_offcenter_splitting(ctx: &Ctx) -> (bool, Vec<String>) {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let x0 = [0.3, 0.2];
    let (lambda, modes) = eigenspace_at_index(2).unwrap();
    let germs: Vec<AnalyticGerm> = modes.iter().map(|m| germ_at(m, x0, 8).unwrap()).collect();
    let decomp = order_decomposition(&germs).unwrap();
    let hole = HoleOperators::new(&ClosedCurve::circle(1.0).unwrap(), 128).unwrap();
    let report = predict_branches(&hole, &decomp, lambda).unwrap();
    // group 0: order 1 (eps^2 rate); group 1: order 0 (log rate)
    let mu_q = report.groups[0].mu[0];
    let mu_log = report.groups[1].mu[0];

    let n_pts = match ctx.level {
        Level::Quick => 5,
        Level::Full => 7,
    };
    let eps_list: Vec<f64> = (0..n_pts)
        .map(|i| 10.0f64.powf(-3.0 - 3.0 * i as f64 / (n_pts as f64 - 1.0)))
        .collect(); // three decades, 1e-3 down to 1e-6
    let mut even_shift = Vec::new();
    let mut odd_shift = Vec::new();
    for &eps in &eps_list {
        let upper = lambda + 1.6 * mu_log / eps.ln().abs() + 0.05;
        let (even, odd) =
            eccentric_branches_near(eps, x0, (lambda - 0.02, upper), 12, 2e-3).unwrap();
        let le = even.first().copied().unwrap_or(f64::NAN);
        let lo = odd.first().copied().unwrap_or(f64::NAN);
        even_shift.push(le - lambda);
        odd_shift.push(lo - lambda);
    }
    // log branch: fit y = c/(L + d) by regressing 1/y on L = |log eps|
    let ls: Vec<f64> = eps_list.iter().map(|&e| e.ln().abs()).collect();
    let n = ls.len() as f64;
    let inv: Vec<f64> = even_shift.iter().map(|&y| 1.0 / y).collect();
    let mx = ls.iter().sum::<f64>() / n;
    let my = inv.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..ls.len() {
        num += (ls[i] - mx) * (inv[i] - my);
        den += (ls[i] - mx) * (ls[i] - mx);
    }
    let beta = num / den;
    let alpha = my - beta * mx;
    let c_fit = 1.0 / beta;
    let mut resid = 0.0f64;
    for i in 0..ls.len() {
        let model = 1.0 / (alpha + beta * ls[i]);
        resid = resid.max(((model - even_shift[i]) / even_shift[i]).abs());
    }
    let c_rel = ((c_fit - mu_log) / mu_log).abs();
    details.push(format!(
        "log branch: fit residual {resid:.3e} (tol 2e-2), c = {c_fit:.4} vs 2 pi u(x0)^2 = {mu_log:.4}, rel {c_rel:.3e} (tol 10%)"
    ));
    pass &= resid <= 0.02 && c_rel <= 0.10;

    // eps^2 branch: prefactor from the upper half of the sweep
    let mut logp = 0.0;
    let mut cnt = 0.0;
    for i in 0..(eps_list.len() / 2 + 1) {
        if odd_shift[i] > 1e-11 {
            logp += (odd_shift[i] / (eps_list[i] * eps_list[i])).ln();
            cnt += 1.0;
        }
    }
    let p_fit = (logp / cnt).exp();
    let p_rel = ((p_fit - mu_q) / mu_q).abs();
    details.push(format!(
        "power branch: prefactor {p_fit:.4} vs predicted {mu_q:.4}, rel {p_rel:.3e} (tol 10%)"
    ));
    pass &= p_rel <= 0.10;
    let secs = start.elapsed().as_secs_f64();
    details.push(format!("runtime {secs:.2}s (tol 60s)"));
    pass &= secs <= 60.0;
    (pass, details)
}

fn c9_small_ev_trials(ctx: &Ctx) -> (bool, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(9));
    let mut pass = true;
    let mut details = Vec::new();
    let dim = 20;
    let m = 2;
    let n_index = 9; // 1-based start of the middle block
    let mut failures = 0usize;
    for _ in 0..1000 {
        let rep = random_small_ev_instance(&mut rng, dim, n_index, m, false);
        if !rep.pass {
            failures += 1;
        }
    }
    details.push(format!(
        "1000 seeded instances: {failures} conclusion failures (tol 0)"
    ));
    pass &= failures == 0;
    // an (H1)-violating instance must be reported as hypothesis failure
    let rep = random_small_ev_instance(&mut rng, dim, n_index, m, true);
    details.push(format!(
        "constructed (H1) violation: hypothesis_violation = {}, pass = {}",
        rep.hypothesis_violation, rep.pass
    ));
    pass &= rep.hypothesis_violation && !rep.pass;
    (pass, details)
}

fn random_small_ev_instance(
    rng: &mut ChaCha8Rng,
    dim: usize,
    n_index: usize,
    m: usize,
    violate_h1: bool,
) -> SmallEvReport {
    // random orthogonal frame from a QR factorization
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0f64));
    let qr = raw.qr();
    let v = qr.q();
    // spectrum: lower block <= -gamma, middle near zero, upper >= gamma
    let gamma = 1.0;
    let mut d = DVector::zeros(dim);
    for i in 0..dim {
        d[i] = if i < n_index - 1 {
            -1.5 - rng.gen_range(0.0..2.0f64)
        } else if i < n_index - 1 + m {
            rng.gen_range(-0.02..0.02f64)
        } else {
            1.5 + rng.gen_range(0.0..2.0f64)
        };
    }
    let q = &v * DMatrix::from_diagonal(&d) * v.transpose();
    // trial space: middle eigenvectors with a small random perturbation
    let eta = 1e-3;
    let mut f = v.columns(n_index - 1, m).into_owned();
    for i in 0..dim {
        for j in 0..m {
            f[(i, j)] += eta * rng.gen_range(-1.0..1.0f64);
        }
    }
    // measured mixed-block norm fixes delta
    let gram = f.transpose() * &f;
    let chol = nalgebra::Cholesky::new(gram).unwrap();
    let f_on = &f * chol.l().transpose().try_inverse().unwrap();
    let measured = (&q * &f_on).svd(false, false).singular_values.max();
    let delta = if violate_h1 {
        gamma
    } else {
        measured * 1.000001 + 1e-14
    };
    small_ev_check(&q, &f, n_index, m, gamma, delta)
}

fn c10_structural_invariants(ctx: &Ctx) -> (bool, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(10));
    let mut pass = true;
    let mut details = Vec::new();
    let ws = CapacityWorkspace::new(
        &ClosedCurve::circle(1.0).unwrap(),
        &ClosedCurve::ellipse(1.5, 0.7).unwrap(),
        256,
    )
    .unwrap();
    let pairs = match ctx.level {
        Level::Quick => 2,
        Level::Full => 3,
    };
    let mut worst_sym = 0.0f64;
    let mut worst_cs = 0.0f64;
    let mut worst_bil = 0.0f64;
    let mut all_positive = true;
    for _ in 0..pairs {
        let a = random_germ(&mut rng, 2, 0);
        let b = random_germ(&mut rng, 2, 0);
        let eps = 0.05;
        let cab = direct_capacity(&ws, &a, &b, eps).unwrap();
        let cba = direct_capacity(&ws, &b, &a, eps).unwrap();
        let caa = direct_capacity(&ws, &a, &a, eps).unwrap();
        let cbb = direct_capacity(&ws, &b, &b, eps).unwrap();
        worst_sym = worst_sym.max((cab - cba).abs());
        all_positive &= caa > 0.0 && cbb > 0.0;
        worst_cs = worst_cs.max(cab * cab - caa * cbb);
        let alpha = rng.gen_range(0.3..1.7f64);
        let combo = AnalyticGerm::linear_combination(&[a.clone(), b.clone()], &[alpha, 1.0]);
        let c = random_germ(&mut rng, 2, 0);
        let lhs = direct_capacity(&ws, &combo, &c, eps).unwrap();
        let rhs = alpha * direct_capacity(&ws, &a, &c, eps).unwrap()
            + direct_capacity(&ws, &b, &c, eps).unwrap();
        worst_bil = worst_bil.max(((lhs - rhs) / rhs).abs());
    }
    details.push(format!(
        "symmetry worst |Cab - Cba| = {worst_sym:.3e} (tol 1e-10)"
    ));
    details.push(format!(
        "Cauchy-Schwarz worst slack = {worst_cs:.3e} (tol 1e-12)"
    ));
    details.push(format!(
        "bilinearity worst rel = {worst_bil:.3e} (tol 1e-7)"
    ));
    details.push(format!("positivity: {all_positive}"));
    pass &= worst_sym <= 1e-10 && worst_cs <= 1e-12 && worst_bil <= 1e-7 && all_positive;

    // order decomposition: uniqueness under re-basis and dimension bounds
    let (_, modes) = eigenspace_at_index(2).unwrap();
    let germs: Vec<AnalyticGerm> = modes
        .iter()
        .map(|m| germ_at(m, [0.3, 0.2], 8).unwrap())
        .collect();
    let dec1 = order_decomposition(&germs).unwrap();
    let t = rng.gen_range(0.0..PI);
    let rot = vec![
        AnalyticGerm::linear_combination(&germs, &[t.cos(), t.sin()]),
        AnalyticGerm::linear_combination(&germs, &[-t.sin(), t.cos()]),
    ];
    let dec2 = order_decomposition(&rot).unwrap();
    let same = dec1.groups.len() == dec2.groups.len()
        && dec1
            .groups
            .iter()
            .zip(&dec2.groups)
            .all(|(g1, g2)| g1.k == g2.k && g1.dim == g2.dim);
    details.push(format!("decomposition invariant under re-basis: {same}"));
    pass &= same;
    let mut bounds_ok = true;
    for index in 1..=6usize {
        let (_, modes) = eigenspace_at_index(index).unwrap();
        for point in [[0.0, 0.0], [0.3, 0.2]] {
            let gs: Vec<AnalyticGerm> = modes
                .iter()
                .map(|mo| germ_at(mo, point, 10).unwrap())
                .collect();
            if let Ok(dec) = order_decomposition(&gs) {
                for g in &dec.groups {
                    bounds_ok &= g.dim <= 2;
                    if g.k == 0 {
                        bounds_ok &= g.dim == 1;
                    }
                }
            }
        }
    }
    details.push(format!(
        "group dimension bounds (<= 2; order 0 simple): {bounds_ok}"
    ));
    pass &= bounds_ok;

    // vanishing of the L2-to-capacity ratio across a 3-decade sweep
    let wc = CapacityWorkspace::new(
        &ClosedCurve::circle(1.0).unwrap(),
        &ClosedCurve::circle(1.0).unwrap(),
        128,
    )
    .unwrap();
    let (_, m1) = eigenspace_at_index(1).unwrap();
    let g1 = germ_at(&m1[0], [0.0, 0.0], 6).unwrap();
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    for &eps in &[1e-1, 1e-2, 1e-3] {
        let sol = solve_densities(&wc, &g1, eps).unwrap();
        let l2 = potential_l2_matrix(&wc, &[&sol], &[&g1]).unwrap()[(0, 0)];
        let cap = direct_capacity(&wc, &g1, &g1, eps).unwrap();
        let ratio = l2 / cap;
        details.push(format!("eps {eps:.0e}: ||V||^2 / Cap = {ratio:.4e}"));
        decreasing &= ratio < prev;
        prev = ratio;
    }
    details.push(format!("ratio decreasing: {decreasing}"));
    pass &= decreasing;
    (pass, details)
}

type CriterionFn = fn(&Ctx) -> (bool, Vec<String>);

const CRITERIA: [(usize, &str, CriterionFn); 10] = [
    (1, "concentric capacity exactness", c1_concentric_exactness),
    (2, "series leading terms", c2_series_leading_terms),
    (3, "capacity rates", c3_rates),
    (4, "disk-hole closed form", c4_disk_closed_form),
    (5, "elliptic closed-form oracle", c5_elliptic_oracle),
    (6, "simple-eigenvalue shift", c6_simple_shift),
    (
        7,
        "double-eigenvalue rate and prefactor",
        c7_double_rate_and_prefactor,
    ),
    (8, "off-center splitting", c8_offcenter_splitting),
    (9, "small-eigenvalue checker", c9_small_ev_trials),
    (10, "structural invariants", c10_structural_invariants),
];

/// Run a single acceptance criterion (1-based id).
pub fn run_criterion(id: usize, level: Level, seed: u64, fault: Option<Fault>) -> CriterionResult {
    let (cid, name, f) = CRITERIA[id - 1];
    let ctx = Ctx { level, seed, fault };
    let start = Instant::now();
    let (pass, details) = f(&ctx);
    CriterionResult {
        id: cid,
        name: name.to_string(),
        pass,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run all acceptance criteria and collect per-criterion results.
pub fn run_all(level: Level, seed: u64, fault: Option<Fault>) -> Result<ValidationSummary> {
    let total_start = Instant::now();
    let mut results = Vec::new();
    for (id, _, _) in CRITERIA {
        results.push(run_criterion(id, level, seed, fault));
    }
    let total_seconds = total_start.elapsed().as_secs_f64();
    let all_pass = results.iter().all(|r| r.pass) && total_seconds <= 300.0;
    Ok(ValidationSummary {
        level: match level {
            Level::Quick => "quick".into(),
            Level::Full => "full".into(),
        },
        seed,
        all_pass,
        total_seconds,
        results,
    })
}

impl ValidationSummary {
    /// One pass/fail line per criterion; `full` adds the runtime.
    pub fn render(&self, level: Level) -> String {
        let mut s = String::new();
        for r in &self.results {
            let status = if r.pass { "pass" } else { "FAIL" };
            match level {
                Level::Full => s.push_str(&format!(
                    "criterion {:2} [{status}] {} ({:.2}s)\n",
                    r.id, r.name, r.seconds
                )),
                Level::Quick => {
                    s.push_str(&format!("criterion {:2} [{status}] {}\n", r.id, r.name))
                }
            }
            for d in &r.details {
                s.push_str(&format!("    {d}\n"));
            }
        }
        s.push_str(&format!(
            "summary: {} ({} criteria, {:.1}s total)\n",
            if self.all_pass {
                "all pass"
            } else {
                "FAILURES"
            },
            self.results.len(),
            self.total_seconds
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_injection_breaks_elliptic_oracle() {
        let ctx = Ctx {
            level: Level::Quick,
            seed: 0,
            fault: Some(Fault::EllipticCk),
        };
        let (pass, _) = c5_elliptic_oracle(&ctx);
        assert!(!pass, "corrupted constant must fail the oracle check");
        let ctx_ok = Ctx {
            level: Level::Quick,
            seed: 0,
            fault: None,
        };
        let (pass_ok, _) = c5_elliptic_oracle(&ctx_ok);
        assert!(pass_ok);
    }

    #[test]
    fn small_ev_trials_are_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..50 {
            let rep = random_small_ev_instance(&mut rng, 14, 6, 2, false);
            assert!(rep.pass, "{rep:?}");
        }
        let bad = random_small_ev_instance(&mut rng, 14, 6, 2, true);
        assert!(bad.hypothesis_violation);
    }
}
