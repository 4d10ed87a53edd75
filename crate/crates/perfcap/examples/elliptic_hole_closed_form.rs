//! The closed-form limiting matrix for elliptic holes against the
//! boundary-integral energy form, and the no-splitting condition for round
//! holes.
//!
//!     cargo run --release --example elliptic_hole_closed_form

use perfcap::capacity::{q_form, HoleOperators};
use perfcap::geometry::ClosedCurve;
use perfcap::poly::polar_sine_germ;
use perfcap::splitting::{elliptic_c_constant, elliptic_m, elliptic_q_constant};
use std::f64::consts::PI;

fn main() -> perfcap::Result<()> {
    let (a, b) = (1.5, 0.7);
    let hole = HoleOperators::new(&ClosedCurve::ellipse(a, b)?, 192)?;

    println!("elliptic hole with semi-axes ({a}, {b}):");
    for k in 1..=3usize {
        println!(
            "  k = {k}: C_k = {:.12}, Q_k(a,b) = {:.12}",
            elliptic_c_constant(k),
            elliptic_q_constant(k, a, b)
        );
    }

    let (b1, p1) = (1.0, 0.35);
    let (b2, p2) = (0.9, -0.15);
    println!();
    println!("closed form vs boundary-integral oracle (k = 2, phases {p1}, {p2}):");
    let k = 2;
    let m = elliptic_m(a, b, k, (b1, p1), (b2, p2))?;
    let g1 = polar_sine_germ(k, b1, p1);
    let g2 = polar_sine_germ(k, b2, p2);
    let oracle = [
        [q_form(&hole, &g2, &g2)?, q_form(&hole, &g1, &g2)?],
        [q_form(&hole, &g1, &g2)?, q_form(&hole, &g1, &g1)?],
    ];
    for i in 0..2 {
        for j in 0..2 {
            println!(
                "  M[{i}][{j}] = {:>18.12}   oracle {:>18.12}   rel {:.2e}",
                m[i][j],
                oracle[i][j],
                ((m[i][j] - oracle[i][j]) / oracle[i][j]).abs()
            );
        }
    }

    println!();
    println!("round-hole limit b -> a reproduces 2 pi k a^(2k) and the");
    println!("perpendicular-phase no-splitting condition:");
    let beta = 1.0;
    let m_disk = elliptic_m(1.0, 1.0 - 1e-12, 1, (beta, 0.0), (beta, PI / 2.0))?;
    println!(
        "  k = 1, phases 0 and pi/2: M = [[{:.6}, {:.6}], [{:.6}, {:.6}]]",
        m_disk[0][0], m_disk[0][1], m_disk[1][0], m_disk[1][1]
    );
    println!("  (equal diagonal, vanishing off-diagonal: the branches do not split)");
    Ok(())
}
