//! Predict how the first double Dirichlet eigenvalue of the unit disk
//! splits when a small round hole is punched at an off-center point, and
//! confirm both branches against the eccentric-annulus reference solver.
//!
//!     cargo run --release --example eigenvalue_splitting

use perfcap::capacity::HoleOperators;
use perfcap::eigenbasis::{eigenspace_at_index, germ_at, order_decomposition};
use perfcap::geometry::ClosedCurve;
use perfcap::reference::eccentric_branches_near;
use perfcap::splitting::predict_branches;

fn main() -> perfcap::Result<()> {
    let x0 = [0.3, 0.2];
    let (lambda, modes) = eigenspace_at_index(2)?; // j_{1,1}^2, multiplicity 2
    println!(
        "unperturbed eigenvalue lambda = {lambda:.12} (multiplicity {})",
        modes.len()
    );

    let germs: Vec<_> = modes
        .iter()
        .map(|m| germ_at(m, x0, 8))
        .collect::<perfcap::Result<Vec<_>>>()?;
    let decomp = order_decomposition(&germs)?;
    println!("order decomposition at x0 = ({}, {}):", x0[0], x0[1]);
    for g in &decomp.groups {
        println!("  vanishing order {} with dimension {}", g.k, g.dim);
    }

    let hole = HoleOperators::new(&ClosedCurve::circle(1.0)?, 128)?;
    let report = predict_branches(&hole, &decomp, lambda)?;
    for (j, g) in report.groups.iter().enumerate() {
        println!(
            "group {j}: order {} -> rate {}, mu = {:?}, split = {}",
            g.k,
            if g.k == 0 {
                "1/|log eps|".to_string()
            } else {
                format!("eps^{}", 2 * g.k)
            },
            g.mu,
            g.split
        );
    }

    println!();
    println!(
        "{:>9} {:>16} {:>16} {:>16} {:>16}",
        "eps", "predicted lo", "reference lo", "predicted hi", "reference hi"
    );
    for &eps in &[1e-2f64, 1e-3, 1e-4] {
        let upper = lambda + 1.6 * report.groups[1].mu[0] / eps.ln().abs() + 0.05;
        let (even, odd) = eccentric_branches_near(eps, x0, (lambda - 0.02, upper), 12, 2e-3)?;
        // the order-1 branch moves as eps^2 (lower), the order-0 as 1/|log eps|
        let pred_lo = report.branch(0, 0, eps);
        let pred_hi = report.branch(1, 0, eps);
        println!(
            "{eps:>9.1e} {pred_lo:>16.10} {:>16.10} {pred_hi:>16.10} {:>16.10}",
            odd[0], even[0]
        );
    }
    println!("(reference: Graf addition-theorem solver for the eccentric annulus)");
    Ok(())
}
