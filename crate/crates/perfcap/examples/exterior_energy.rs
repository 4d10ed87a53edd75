//! Bounded exterior harmonic extensions and the energy form Q built from
//! principal parts; on a round hole everything is available in closed form.
//!
//!     cargo run --release --example exterior_energy

use perfcap::capacity::{exterior_solution, q_form, HoleOperators};
use perfcap::geometry::ClosedCurve;
use perfcap::poly::polar_sine_germ;
use std::f64::consts::PI;

fn main() -> perfcap::Result<()> {
    let disk = HoleOperators::new(&ClosedCurve::circle(1.0)?, 128)?;
    println!("round hole, datum r^k sin(k t): energy pi k, zero limit at infinity");
    for k in 1..=4usize {
        let g = polar_sine_germ(k, 1.0, 0.0);
        let u = exterior_solution(&disk, &g.principal_part())?;
        println!(
            "  k = {k}: energy = {:>12.8} (pi k = {:>12.8}), limit = {:+.2e}",
            u.energy(&disk),
            PI * k as f64,
            u.limit
        );
    }

    let ellipse = HoleOperators::new(&ClosedCurve::ellipse(1.5, 0.7)?, 192)?;
    println!();
    println!("elliptic hole: even orders acquire a nonzero value at infinity");
    for k in 1..=4usize {
        let g = polar_sine_germ(k, 1.0, 0.1);
        let u = exterior_solution(&ellipse, &g.principal_part())?;
        println!(
            "  k = {k}: energy = {:>12.8}, limit = {:+.6e}",
            u.energy(&ellipse),
            u.limit
        );
    }

    println!();
    let a = polar_sine_germ(1, 1.0, 0.4);
    let b = polar_sine_germ(1, 1.0, 0.4 + PI / 2.0);
    println!(
        "q_form of perpendicular order-1 parts on the ellipse: {:+.6e}",
        q_form(&ellipse, &a, &b)?
    );
    println!("(nonzero off the round case: elliptic holes can split such pairs)");
    Ok(())
}
