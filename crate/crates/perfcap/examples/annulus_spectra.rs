//! Reference spectra of annular domains: concentric eigenvalues through
//! Bessel cross-products and eccentric ones through the addition theorem.
//!
//!     cargo run --release --example annulus_spectra

use perfcap::reference::{concentric_capacity, concentric_modes, eccentric_spectrum};

fn main() -> perfcap::Result<()> {
    let eps = 0.1;
    println!("concentric annulus, hole radius {eps}:");
    for m in concentric_modes(eps, 8)? {
        println!(
            "  lambda = {:>14.8}  angular order {}  multiplicity {}",
            m.lambda, m.k, m.multiplicity
        );
    }
    println!(
        "standard capacity of the hole: {:.10}",
        concentric_capacity(eps)
    );

    println!();
    let x0 = [0.3, 0.0];
    println!(
        "eccentric annulus, hole radius {eps} at ({}, {}):",
        x0[0], x0[1]
    );
    let spec = eccentric_spectrum(eps, x0, 8, 12)?;
    for (i, l) in spec.eigenvalues.iter().enumerate() {
        println!("  lambda_{} = {l:>14.8}", i + 1);
    }
    println!(
        "truncation self-check: doubling the order moves roots by {:.2e}",
        spec.truncation_shift
    );
    for w in &spec.warnings {
        println!("warning: {w}");
    }
    println!("(the concentric double eigenvalues split once the hole is off-center)");
    Ok(())
}
