//! Print the coefficient table c_(n,l) of the capacity series
//!
//!     Cap(eps) = sum_n eps^n sum_{l <= n+1} c_(n,l) / (r0 + log|eps|/2pi)^l
//!
//! for a germ pair vanishing to first order, where the leading block reduces
//! to the energy form of the principal parts.
//!
//!     cargo run --release --example series_expansion

use perfcap::capacity::{q_form, series_coefficients, series_densities, CapacityWorkspace};
use perfcap::geometry::ClosedCurve;
use perfcap::poly::polar_sine_germ;

fn main() -> perfcap::Result<()> {
    let omega = ClosedCurve::circle(1.0)?;
    let hole = ClosedCurve::ellipse(1.5, 0.7)?;
    let ws = CapacityWorkspace::new(&omega, &hole, 256)?;

    // two order-one germs: r sin(t + phi) with different phases
    let germ_a = polar_sine_germ(1, 1.0, 0.3).pad_to_degree(4);
    let germ_b = polar_sine_germ(1, 0.8, -0.2).pad_to_degree(4);

    let series = series_densities(&ws, &germ_a, 4)?;
    let expansion = series_coefficients(&ws, &series, &germ_b)?;

    println!("r0 = {:.12}", expansion.r0);
    println!("cancellation flag: {}", expansion.cancellation_flag);
    println!();
    println!("{:>3} {:>3} {:>24}", "n", "l", "c_(n,l)");
    for (n, row) in expansion.coeffs.iter().enumerate() {
        for (l, c) in row.iter().enumerate() {
            println!("{n:>3} {l:>3} {c:>24.15e}");
        }
    }

    let q = q_form(&ws.hole, &germ_a, &germ_b)?;
    println!();
    println!("energy form Q(u,v)        = {q:.15e}");
    println!(
        "leading coefficient c_(2,0) = {:.15e}",
        expansion.coeffs[2][0]
    );
    println!("(the two agree: orders below kappa(u)+kappa(v) vanish)");
    Ok(())
}
