//! The abstract small-eigenvalue estimate on a concrete matrix: eigenvalues
//! of a quadratic form tested against an almost-invariant subspace stay
//! within 4 delta^2 / gamma of the true ones.
//!
//!     cargo run --release --example small_eigenvalue_lemma

use nalgebra::{DMatrix, DVector};
use perfcap::splitting::small_ev_check;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let dim = 16;
    let (n_index, m) = (7usize, 2usize);

    // random orthogonal frame and a spectrum with a gap around zero
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0f64));
    let v = raw.qr().q();
    let mut d = DVector::zeros(dim);
    for i in 0..dim {
        d[i] = if i < n_index - 1 {
            -2.0 - i as f64
        } else if i < n_index - 1 + m {
            0.01 * (i as f64 - 6.5)
        } else {
            2.0 + i as f64
        };
    }
    let q = &v * DMatrix::from_diagonal(&d) * v.transpose();

    // trial space: the middle eigenvectors, slightly rotated
    let eta = 5e-3;
    let mut f = v.columns(n_index - 1, m).into_owned();
    for i in 0..dim {
        for j in 0..m {
            f[(i, j)] += eta * rng.gen_range(-1.0..1.0f64);
        }
    }

    // measure the mixed-block norm, then check the estimate with that delta
    let gram = f.transpose() * &f;
    let f_on = &f
        * nalgebra::Cholesky::new(gram)
            .unwrap()
            .l()
            .transpose()
            .try_inverse()
            .unwrap();
    let delta = (&q * &f_on).svd(false, false).singular_values.max() * 1.01;

    let report = small_ev_check(&q, &f, n_index, m, 1.0, delta);
    println!(
        "gamma = {}, measured delta = {:.4e}",
        report.gamma, report.measured_delta
    );
    println!(
        "hypotheses: H1 = {}, H2 = {}, H3 = {}",
        report.h1, report.h2, report.h3
    );
    println!(
        "eigenvalue bound 4 delta^2 / gamma = {:.4e}",
        report.eigenvalue_bound
    );
    for (i, dev) in report.deviations.iter().enumerate() {
        println!("  |nu_{} - xi_{}| = {:.4e}", n_index + i, i + 1, dev);
    }
    println!(
        "projection deviation {:.4e} <= bound {:.4e}",
        report.projection_deviation, report.projection_bound
    );
    println!("pass: {}", report.pass);
}
