//! Sweep the (u,v)-capacity of a shrinking elliptic hole in the unit disk:
//! direct boundary-integral solves against the series expansion.
//!
//!     cargo run --release --example capacity_sweep

use perfcap::capacity::{
    direct_capacity, eval_series, series_coefficients, series_densities, CapacityWorkspace,
};
use perfcap::geometry::ClosedCurve;
use perfcap::poly::AnalyticGerm;

fn main() -> perfcap::Result<()> {
    let omega = ClosedCurve::circle(1.0)?;
    let hole = ClosedCurve::ellipse(1.5, 0.7)?;
    let ws = CapacityWorkspace::new(&omega, &hole, 256)?;

    // u^a = 1 + x1/2, u^b = 1 - x2 (analytic data, nonvanishing at 0)
    let germ_a = AnalyticGerm::new(3, &[(0, 0, 1.0), (1, 0, 0.5)])?;
    let germ_b = AnalyticGerm::new(3, &[(0, 0, 1.0), (0, 1, -1.0)])?;

    let series = series_densities(&ws, &germ_a, 3)?;
    let expansion = series_coefficients(&ws, &series, &germ_b)?;
    println!(
        "r0 = {:.12}  (log-capacity shift of the geometry)",
        expansion.r0
    );
    if let Some(ev) = expansion.eps_valid {
        println!("empirical validity radius of the series: eps <= {ev:.4}");
    }
    println!();
    println!(
        "{:>10}  {:>22}  {:>22}  {:>10}",
        "eps", "direct", "series(3)", "rel gap"
    );
    for j in 1..=6 {
        let eps = 10f64.powi(-j);
        let direct = direct_capacity(&ws, &germ_a, &germ_b, eps)?;
        let series_val = eval_series(&expansion, eps, 3, 4);
        println!(
            "{eps:>10.1e}  {direct:>22.15e}  {series_val:>22.15e}  {:>10.2e}",
            ((series_val - direct) / direct).abs()
        );
    }
    Ok(())
}
