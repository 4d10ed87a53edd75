//! Bessel functions of the first and second kind for integer orders, and
//! their positive zeros.
//!
//! `J_k` is evaluated by the ascending power series for small argument and by
//! backward (Miller-type) recurrence with series normalization elsewhere, so
//! a single code path covers every order up to [`MAX_ORDER`] on `[0, 100]`
//! and beyond.  `Y_0`, `Y_1` use the logarithmic series near the origin and a
//! Neumann-type expansion in `J_{2k}` for larger argument; higher orders
//! follow by forward recurrence, which is stable because `Y` grows with the
//! order.  Zeros are bracketed by a scan (consecutive zeros of `J_k` are
//! separated by at least pi) and refined by bisection.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest supported angular index.
pub const MAX_ORDER: u32 = 32;

/// Angular index of a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BesselOrder(u32);

impl BesselOrder {
    pub fn new(k: u32) -> Result<Self> {
        if k > MAX_ORDER {
            return Err(Error::Domain(format!(
                "Bessel order {k} exceeds supported maximum {MAX_ORDER}"
            )));
        }
        Ok(BesselOrder(k))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// J_k(x) for k within [`MAX_ORDER`]; requires `x >= 0`.
pub fn bessel_j(k: BesselOrder, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j requires x >= 0");
    jn(k.0 as i64, x)
}

/// Y_k(x) for k within [`MAX_ORDER`]; `x <= 0` is a domain error.
pub fn bessel_y(k: BesselOrder, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("bessel_y requires x > 0, got {x}")));
    }
    Ok(yn(k.0 as i64, x))
}

/// n-th positive zero of J_k, refined to ~1e-13 absolute.
pub fn bessel_j_zero(k: BesselOrder, n: u32) -> f64 {
    assert!(n >= 1, "zero index is 1-based");
    jn_zeros(k.0, n)[n as usize - 1]
}

/// First `n` positive zeros of J_k.
pub fn jn_zeros(k: u32, n: u32) -> Vec<f64> {
    let kf = k as f64;
    // J_k > 0 on (0, j_{k,1}); the first zero lies above k and consecutive
    // zeros are separated by at least pi, so a 0.5-step scan cannot skip one.
    let mut zeros = Vec::with_capacity(n as usize);
    let mut x = if k == 0 { 1e-4 } else { kf };
    let mut fx = jn(k as i64, x);
    let step = 0.5;
    while zeros.len() < n as usize {
        let x1 = x + step;
        let fx1 = jn(k as i64, x1);
        if fx == 0.0 {
            zeros.push(x);
        } else if fx * fx1 < 0.0 {
            zeros.push(bisect(|t| jn(k as i64, t), x, x1));
        }
        x = x1;
        fx = fx1;
    }
    zeros
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-14 * m.abs().max(1.0) {
            return m;
        }
        let fm = f(m);
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// J_n(x) for any integer order (negative orders via J_{-n} = (-1)^n J_n).
pub(crate) fn jn(n: i64, x: f64) -> f64 {
    let (k, sign) = if n < 0 {
        ((-n) as u32, if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n as u32, 1.0)
    };
    sign * jn_nonneg(k, x)
}

fn jn_nonneg(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x <= 2.0 {
        j_series(k, x)
    } else {
        let all = jn_all(k, x);
        all[k as usize]
    }
}

/// Ascending power series; accurate for small argument.
fn j_series(k: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // t0 = (x/2)^k / k!
    let mut t = 1.0;
    for m in 1..=k {
        t *= half / m as f64;
    }
    let q = half * half;
    let mut sum = t;
    for m in 1..60 {
        t *= -q / (m as f64 * (m as f64 + k as f64));
        sum += t;
        if t.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// All of J_0(x)..J_kmax(x) by backward recurrence with normalization
/// J_0 + 2 J_2 + 2 J_4 + ... = 1.
pub(crate) fn jn_all(kmax: u32, x: f64) -> Vec<f64> {
    assert!(x > 0.0);
    let start = (kmax as usize).max(x.ceil() as usize) + 96;
    let mut b = vec![0.0f64; start + 2];
    b[start + 1] = 0.0;
    b[start] = 1e-280;
    let mut m = start;
    while m >= 1 {
        b[m - 1] = (2.0 * m as f64 / x) * b[m] - b[m + 1];
        if b[m - 1].abs() > 1e250 {
            let s = 1e-250;
            for v in b[m - 1..].iter_mut() {
                *v *= s;
            }
        }
        m -= 1;
    }
    let mut norm = b[0];
    let mut i = 2;
    while i <= start {
        norm += 2.0 * b[i];
        i += 2;
    }
    let inv = 1.0 / norm;
    b.truncate(kmax as usize + 1);
    for v in b.iter_mut() {
        *v *= inv;
    }
    b
}

/// Y_n(x) for any integer order, x > 0.
pub(crate) fn yn(n: i64, x: f64) -> f64 {
    let (k, sign) = if n < 0 {
        ((-n) as u32, if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n as u32, 1.0)
    };
    sign * yn_nonneg(k, x)
}

fn yn_nonneg(k: u32, x: f64) -> f64 {
    let (y0, y1) = y01(x);
    if k == 0 {
        return y0;
    }
    if k == 1 {
        return y1;
    }
    // Forward recurrence: stable since |Y_k| grows with k.
    let mut ym = y0;
    let mut yc = y1;
    for m in 1..k {
        let yn = (2.0 * m as f64 / x) * yc - ym;
        ym = yc;
        yc = yn;
    }
    yc
}

fn y01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        (y0_series(x), y1_series(x))
    } else {
        y01_neumann(x)
    }
}

/// Logarithmic series for Y_0, small argument.
fn y0_series(x: f64) -> f64 {
    let j0 = j_series(0, x);
    let q = 0.25 * x * x;
    let mut term = 1.0; // (x^2/4)^m / (m!)^2 at m = 0
    let mut h = 0.0; // harmonic number H_m
    let mut sum = 0.0;
    for m in 1..60 {
        term *= q / (m as f64 * m as f64);
        h += 1.0 / m as f64;
        let add = if m % 2 == 1 { term * h } else { -term * h };
        sum += add;
        if term * h < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j0 + sum)
}

/// Logarithmic series for Y_1, small argument.
fn y1_series(x: f64) -> f64 {
    let j1 = j_series(1, x);
    let q = 0.25 * x * x;
    // sum over m of (H_m + H_{m+1}) (-q)^m / (m! (m+1)!)
    let mut term = 1.0;
    let mut hm = 0.0;
    let mut hm1 = 1.0;
    let mut sum = term * (hm + hm1);
    for m in 1..60 {
        term *= -q / (m as f64 * (m as f64 + 1.0));
        hm += 1.0 / m as f64;
        hm1 += 1.0 / (m as f64 + 1.0);
        let add = term * (hm + hm1);
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    (2.0 / PI) * ((0.5 * x).ln() * j1)
        - 2.0 / (PI * x)
        - (x / (2.0 * PI)) * (sum - 2.0 * EULER_GAMMA * jser_aux(q))
}

/// Auxiliary sum (x/2) * sum (-q)^m/(m!(m+1)!) = J_1(x) / (x/2) scaled; used
/// to fold the -2*gamma part of psi(m+1)+psi(m+2) back onto J_1.
fn jser_aux(q: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = term;
    for m in 1..60 {
        term *= -q / (m as f64 * (m as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// Neumann-type expansions valid away from the origin:
/// Y_0 = (2/pi)[(ln(x/2)+gamma) J_0 + 2 sum_{k>=1} (-1)^{k+1} J_{2k}/k],
/// Y_1 = -Y_0' written out in J_{2m+1}.
fn y01_neumann(x: f64) -> (f64, f64) {
    let kmax = (x.ceil() as u32) + 70;
    let j = jn_all(kmax, x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;

    let mut s0 = 0.0;
    let mut k = 1usize;
    while 2 * k <= kmax as usize {
        let t = j[2 * k] / k as f64;
        s0 += if k % 2 == 1 { t } else { -t };
        k += 1;
    }
    let y0 = (2.0 / PI) * (lg * j[0] + 2.0 * s0);

    let mut s1 = 0.0;
    let mut m = 1usize;
    while 2 * m < kmax as usize {
        let c = (2 * m + 1) as f64 / (m as f64 * (m as f64 + 1.0));
        let t = c * j[2 * m + 1];
        s1 += if m % 2 == 1 { t } else { -t };
        m += 1;
    }
    let y1 = (2.0 / PI) * (lg * j[1] - j[0] / x - j[1] + s1);
    (y0, y1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ord(k: u32) -> BesselOrder {
        BesselOrder::new(k).unwrap()
    }

    #[test]
    fn j_at_origin() {
        assert_eq!(bessel_j(ord(0), 0.0), 1.0);
        assert_eq!(bessel_j(ord(1), 0.0), 0.0);
        assert_eq!(bessel_j(ord(7), 0.0), 0.0);
    }

    #[test]
    fn j0_first_zero_value() {
        // bisection on the power series of J_0, independent of jn_all
        let z = bisect(|x| j_series(0, x), 2.0, 3.0);
        assert_abs_diff_eq!(z, 2.404825557695773, epsilon = 1e-12);
        assert!(bessel_j(ord(0), 2.404825557695773).abs() < 1e-10);
    }

    #[test]
    fn series_and_miller_agree_in_overlap() {
        for &x in &[2.0, 2.5, 3.0, 5.0, 8.0] {
            for k in 0..6u32 {
                let a = j_series(k, x);
                let b = jn_all(k, x)[k as usize];
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn recurrence_consistency() {
        // J_{k-1}(x) + J_{k+1}(x) = (2k/x) J_k(x)
        let mut x = 0.5;
        while x <= 50.0 {
            for k in 1..=5u32 {
                let jm = bessel_j(ord(k - 1), x);
                let jc = bessel_j(ord(k), x);
                let jp = bessel_j(ord(k + 1), x);
                assert_abs_diff_eq!(jm + jp, 2.0 * k as f64 / x * jc, epsilon = 1e-9);
            }
            x += 1.37;
        }
    }

    #[test]
    fn y0_log_divergence() {
        assert!(bessel_y(ord(0), 1e-6).unwrap() < -8.0);
        assert!(bessel_y(ord(0), 0.0).is_err());
        assert!(bessel_y(ord(2), -1.0).is_err());
    }

    #[test]
    fn wronskian_identity() {
        // J_{k+1}(x) Y_k(x) - J_k(x) Y_{k+1}(x) = 2/(pi x)
        for &x in &[0.7, 1.9, 2.1, 3.7, 10.0, 37.5, 80.0] {
            for k in 0..=6u32 {
                let w = bessel_j(ord(k + 1), x) * bessel_y(ord(k), x).unwrap()
                    - bessel_j(ord(k), x) * bessel_y(ord(k + 1), x).unwrap();
                assert_relative_eq!(w, 2.0 / (PI * x), max_relative = 1e-10);
            }
        }
        // the specific instance x = 3.7, k = 2 at absolute tolerance
        let w = bessel_j(ord(3), 3.7) * bessel_y(ord(2), 3.7).unwrap()
            - bessel_j(ord(2), 3.7) * bessel_y(ord(3), 3.7).unwrap();
        assert_abs_diff_eq!(w, 2.0 / (PI * 3.7), epsilon = 1e-10);
    }

    #[test]
    fn y1_matches_large_argument_form() {
        // sqrt(2/(pi x)) sin(x - 3 pi/4) approximates Y_1 to O(1/x)
        let x = 10.0;
        let asym = (2.0 / (PI * x)).sqrt() * (x - 0.75 * PI).sin();
        assert_abs_diff_eq!(bessel_y(ord(1), x).unwrap(), asym, epsilon = 2e-2);
    }

    #[test]
    fn first_zeros() {
        assert_abs_diff_eq!(bessel_j_zero(ord(0), 1), 2.404825557695773, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j_zero(ord(1), 1), 3.831705970207512, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j_zero(ord(0), 2), 5.520078110286311, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j_zero(ord(2), 1), 5.135622301840683, epsilon = 1e-10);
    }

    #[test]
    fn zeros_are_zeros_with_sign_change() {
        for k in 0..=4u32 {
            for n in 1..=4u32 {
                let z = bessel_j_zero(ord(k), n);
                assert!(bessel_j(ord(k), z).abs() <= 1e-10);
                let lo = bessel_j(ord(k), z - 1e-8);
                let hi = bessel_j(ord(k), z + 1e-8);
                assert!(lo * hi < 0.0, "no sign change at j_{{{k},{n}}}");
            }
        }
    }

    #[test]
    fn zero_interlacing() {
        for k in 0..=3u32 {
            for n in 1..=3u32 {
                let a = bessel_j_zero(ord(k), n);
                let b = bessel_j_zero(ord(k + 1), n);
                let c = bessel_j_zero(ord(k), n + 1);
                assert!(a < b && b < c, "interlacing failed at k={k}, n={n}");
            }
        }
    }

    #[test]
    fn y_small_and_neumann_branches_agree() {
        // the two evaluation paths overlap near x = 2
        for &x in &[1.9, 1.99, 2.0] {
            let (y0s, y1s) = (y0_series(x), y1_series(x));
            let (y0n, y1n) = y01_neumann(x);
            assert_abs_diff_eq!(y0s, y0n, epsilon = 1e-12);
            assert_abs_diff_eq!(y1s, y1n, epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_order_reflection() {
        let x = 4.2;
        assert_abs_diff_eq!(jn(-3, x), -jn(3, x), epsilon = 1e-15);
        assert_abs_diff_eq!(jn(-4, x), jn(4, x), epsilon = 1e-15);
        assert_abs_diff_eq!(yn(-3, x), -yn(3, x), epsilon = 1e-15);
    }

    #[test]
    fn order_cap_enforced() {
        assert!(BesselOrder::new(MAX_ORDER).is_ok());
        assert!(BesselOrder::new(MAX_ORDER + 1).is_err());
    }
}
