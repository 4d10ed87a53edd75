//! Dirichlet eigenpairs of the unit disk, their Taylor germs at interior
//! points, and the order decomposition of an eigenspace.
//!
//!     cargo run --release --example disk_modes

use perfcap::eigenbasis::{
    disk_spectrum, eigenspace_at_index, germ_at, order_decomposition, polar_principal,
};

fn main() -> perfcap::Result<()> {
    println!("first Dirichlet eigenvalues of the unit disk:");
    for (i, m) in disk_spectrum(10)?.iter().enumerate() {
        println!(
            "  lambda_{:<2} = {:>14.8}  (k = {}, radial {}, {:?})",
            i + 1,
            m.lambda,
            m.k,
            m.n,
            m.parity
        );
    }

    let (lambda, modes) = eigenspace_at_index(2)?;
    println!();
    println!("eigenspace of lambda = {lambda:.8}:");
    for x0 in [[0.0, 0.0], [0.3, 0.2]] {
        let germs: Vec<_> = modes
            .iter()
            .map(|m| germ_at(m, x0, 8))
            .collect::<perfcap::Result<Vec<_>>>()?;
        let dec = order_decomposition(&germs)?;
        println!("  at x0 = ({}, {}):", x0[0], x0[1]);
        for g in &dec.groups {
            let p = polar_principal(&g.germs[0])?;
            println!(
                "    order {} (dim {}), principal part beta = {:.6}, phi = {:.6}",
                g.k, g.dim, p.beta, p.phi
            );
        }
    }
    println!();
    println!("at the center both germs vanish to order 1; at a generic point");
    println!("the eigenspace splits into a non-vanishing and an order-1 part.");
    Ok(())
}
