//! Dense bivariate polynomials and analytic germs (truncated Taylor data of
//! a function at the origin).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on total degree; germ products and antiderivatives stay below it.
pub const MAX_TOTAL_DEGREE: usize = 40;

/// Polynomial in two variables stored by graded triangular index:
/// the coefficient of `x1^h x2^j` sits at `(h+j)(h+j+1)/2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

fn tri_index(h: usize, j: usize) -> usize {
    let d = h + j;
    d * (d + 1) / 2 + j
}

fn tri_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

impl Poly2 {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= MAX_TOTAL_DEGREE, "polynomial degree too large");
        Poly2 {
            degree,
            coeffs: vec![0.0; tri_len(degree)],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Poly2::zero(0);
        p.coeffs[0] = c;
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, h: usize, j: usize) -> f64 {
        if h + j > self.degree {
            0.0
        } else {
            self.coeffs[tri_index(h, j)]
        }
    }

    pub fn set_coeff(&mut self, h: usize, j: usize, v: f64) {
        assert!(h + j <= self.degree);
        self.coeffs[tri_index(h, j)] = v;
    }

    pub fn add_coeff(&mut self, h: usize, j: usize, v: f64) {
        assert!(h + j <= self.degree);
        self.coeffs[tri_index(h, j)] += v;
    }

    /// Iterate over (h, j, coefficient) with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |d| {
            (0..=d).filter_map(move |j| {
                let h = d - j;
                let c = self.coeffs[tri_index(h, j)];
                (c != 0.0).then_some((h, j, c))
            })
        })
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        // Horner in total degree would need factored form; direct powers are
        // adequate at the degrees used here.
        let mut xp = vec![1.0; self.degree + 1];
        let mut yp = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            xp[i] = xp[i - 1] * x[0];
            yp[i] = yp[i - 1] * x[1];
        }
        let mut s = 0.0;
        for d in 0..=self.degree {
            for j in 0..=d {
                let h = d - j;
                let c = self.coeffs[tri_index(h, j)];
                if c != 0.0 {
                    s += c * xp[h] * yp[j];
                }
            }
        }
        s
    }

    pub fn dx(&self) -> Poly2 {
        let deg = self.degree.saturating_sub(1);
        let mut out = Poly2::zero(deg);
        for (h, j, c) in self.terms() {
            if h >= 1 {
                out.add_coeff(h - 1, j, c * h as f64);
            }
        }
        out
    }

    pub fn dy(&self) -> Poly2 {
        let deg = self.degree.saturating_sub(1);
        let mut out = Poly2::zero(deg);
        for (h, j, c) in self.terms() {
            if j >= 1 {
                out.add_coeff(h, j - 1, c * j as f64);
            }
        }
        out
    }

    pub fn laplacian(&self) -> Poly2 {
        let mut out = self.dx().dx();
        let dyy = self.dy().dy();
        for (h, j, c) in dyy.terms() {
            out.add_coeff(h, j, c);
        }
        out
    }

    /// Antiderivative in the first variable (vanishing at x1 = 0).
    pub fn antiderivative_x(&self) -> Poly2 {
        let mut out = Poly2::zero(self.degree + 1);
        for (h, j, c) in self.terms() {
            out.add_coeff(h + 1, j, c / (h as f64 + 1.0));
        }
        out
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero(self.degree + other.degree);
        for (h1, j1, c1) in self.terms() {
            for (h2, j2, c2) in other.terms() {
                out.add_coeff(h1 + h2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero(self.degree.max(other.degree));
        for (h, j, c) in self.terms() {
            out.add_coeff(h, j, c);
        }
        for (h, j, c) in other.terms() {
            out.add_coeff(h, j, c);
        }
        out
    }

    /// Homogeneous part of total degree `k`.
    pub fn homogeneous_part(&self, k: usize) -> Poly2 {
        let mut out = Poly2::zero(k.min(self.degree));
        if k > self.degree {
            return out;
        }
        for j in 0..=k {
            let h = k - j;
            let c = self.coeffs[tri_index(h, j)];
            if c != 0.0 {
                out.add_coeff(h, j, c);
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()))
    }

    /// The polynomial `x -> p(s x)`: coefficient of total degree d picks up `s^d`.
    pub fn scale_arguments(&self, s: f64) -> Poly2 {
        let mut out = Poly2::zero(self.degree);
        for (h, j, c) in self.terms() {
            out.add_coeff(h, j, c * s.powi((h + j) as i32));
        }
        out
    }

    /// Largest |coefficient| within the degree-k homogeneous part.
    pub fn homogeneous_norm(&self, k: usize) -> f64 {
        if k > self.degree {
            return 0.0;
        }
        (0..=k)
            .map(|j| self.coeffs[tri_index(k - j, j)].abs())
            .fold(0.0f64, f64::max)
    }
}

/// Taylor data of a function analytic near the origin: `u(x) = sum
/// a_{(h,j)} x1^h x2^j` truncated at `degree`.  `radius` bounds the region
/// on which the truncation is trusted when composed with a scaling.
#[derive(Debug, Clone)]
pub struct AnalyticGerm {
    poly: Poly2,
    radius: f64,
    label: Option<String>,
}

/// JSON schema for a germ: `{"degree": D, "coeffs": [[h, j, value], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GermSpec {
    pub degree: usize,
    pub coeffs: Vec<(usize, usize, f64)>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub label: Option<String>,
}

fn default_radius() -> f64 {
    1.0
}

impl AnalyticGerm {
    pub fn new(degree: usize, coeffs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut poly = Poly2::zero(degree);
        for &(h, j, v) in coeffs {
            if h + j > degree {
                return Err(Error::Config(format!(
                    "germ coefficient ({h},{j}) exceeds stated degree {degree}"
                )));
            }
            poly.add_coeff(h, j, v);
        }
        Ok(AnalyticGerm {
            poly,
            radius: 1.0,
            label: None,
        })
    }

    pub fn from_spec(spec: &GermSpec) -> Result<Self> {
        let mut g = Self::new(spec.degree, &spec.coeffs)?;
        if !(spec.radius > 0.0) {
            return Err(Error::Config("germ radius must be positive".into()));
        }
        g.radius = spec.radius;
        g.label = spec.label.clone();
        Ok(g)
    }

    pub fn from_poly(poly: Poly2) -> Self {
        AnalyticGerm {
            poly,
            radius: 1.0,
            label: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        AnalyticGerm::from_poly(Poly2::constant(c))
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Re-declare the truncation degree (zero-padding); appropriate for
    /// polynomial germs, whose higher Taylor coefficients vanish exactly.
    pub fn pad_to_degree(&self, degree: usize) -> Self {
        let mut poly = Poly2::zero(degree.max(self.degree()));
        for (h, j, c) in self.poly.terms() {
            poly.add_coeff(h, j, c);
        }
        AnalyticGerm {
            poly,
            radius: self.radius,
            label: self.label.clone(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn poly(&self) -> &Poly2 {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn value_at_origin(&self) -> f64 {
        self.poly.coeff(0, 0)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.poly.eval(x)
    }

    pub fn gradient_at(&self, x: [f64; 2]) -> [f64; 2] {
        [self.poly.dx().eval(x), self.poly.dy().eval(x)]
    }

    /// Homogeneous Taylor part of degree `k`, as a polynomial.
    pub fn homogeneous_part(&self, k: usize) -> Poly2 {
        self.poly.homogeneous_part(k)
    }

    /// Order of vanishing: smallest k whose homogeneous part carries a
    /// coefficient above `1e-12` times the overall coefficient scale.
    pub fn vanishing_order(&self) -> usize {
        let norm = self.poly.max_abs_coeff();
        if norm == 0.0 {
            return self.poly.degree() + 1;
        }
        for k in 0..=self.poly.degree() {
            if self.poly.homogeneous_norm(k) > 1e-12 * norm {
                return k;
            }
        }
        self.poly.degree() + 1
    }

    /// Principal part: the homogeneous part at the vanishing order.
    pub fn principal_part(&self) -> Poly2 {
        self.poly.homogeneous_part(self.vanishing_order())
    }

    /// Linear combination of germs with the given coefficients.
    pub fn linear_combination(germs: &[AnalyticGerm], weights: &[f64]) -> AnalyticGerm {
        assert_eq!(germs.len(), weights.len());
        let degree = germs.iter().map(|g| g.degree()).max().unwrap_or(0);
        let mut poly = Poly2::zero(degree);
        let mut radius = f64::INFINITY;
        for (g, &w) in germs.iter().zip(weights) {
            for (h, j, c) in g.poly.terms() {
                poly.add_coeff(h, j, w * c);
            }
            radius = radius.min(g.radius);
        }
        let mut out = AnalyticGerm::from_poly(poly);
        out.radius = if radius.is_finite() { radius } else { 1.0 };
        out
    }
}

/// Harmonic homogeneous germ `beta * r^k sin(k t + k phi)` expressed in
/// Cartesian coordinates (for k = 0 the constant `beta`).
pub fn polar_sine_germ(k: usize, beta: f64, phi: f64) -> AnalyticGerm {
    if k == 0 {
        return AnalyticGerm::constant(beta);
    }
    // beta Im(e^{ik phi} z^k) = beta [cos(k phi) Im z^k + sin(k phi) Re z^k]
    let (re, im) = z_pow_parts(k);
    let g = re
        .scale(beta * (k as f64 * phi).sin())
        .add(&im.scale(beta * (k as f64 * phi).cos()));
    AnalyticGerm::from_poly(g)
}

/// Real and imaginary parts of (x1 + i x2)^k as polynomials.
pub fn z_pow_parts(k: usize) -> (Poly2, Poly2) {
    let mut re = Poly2::zero(k);
    let mut im = Poly2::zero(k);
    let mut binom = 1.0f64;
    for j in 0..=k {
        // coefficient of x1^{k-j} x2^j is binom(k,j) i^j
        match j % 4 {
            0 => re.add_coeff(k - j, j, binom),
            1 => im.add_coeff(k - j, j, binom),
            2 => re.add_coeff(k - j, j, -binom),
            _ => im.add_coeff(k - j, j, -binom),
        }
        binom = binom * (k - j) as f64 / (j as f64 + 1.0);
    }
    (re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_and_derivatives() {
        // p = 1 + 2 x1 + 3 x1 x2^2
        let p = AnalyticGerm::new(3, &[(0, 0, 1.0), (1, 0, 2.0), (1, 2, 3.0)]).unwrap();
        let x = [0.7, -1.3];
        assert_abs_diff_eq!(
            p.eval(x),
            1.0 + 2.0 * 0.7 + 3.0 * 0.7 * 1.69,
            epsilon = 1e-14
        );
        let g = p.gradient_at(x);
        assert_abs_diff_eq!(g[0], 2.0 + 3.0 * 1.69, epsilon = 1e-14);
        assert_abs_diff_eq!(g[1], 3.0 * 0.7 * 2.0 * -1.3, epsilon = 1e-14);
    }

    #[test]
    fn vanishing_order_detection() {
        let g = AnalyticGerm::new(3, &[(2, 0, 1.0), (0, 2, -1.0), (3, 0, 0.5)]).unwrap();
        assert_eq!(g.vanishing_order(), 2);
        let c = AnalyticGerm::constant(4.0);
        assert_eq!(c.vanishing_order(), 0);
        // numerically negligible low-order noise is ignored
        let noisy = AnalyticGerm::new(2, &[(0, 0, 1e-15), (1, 0, 1.0)]).unwrap();
        assert_eq!(noisy.vanishing_order(), 1);
    }

    #[test]
    fn polar_sine_germ_matches_polar_form() {
        let k = 3;
        let (beta, phi) = (1.7, 0.23);
        let g = polar_sine_germ(k, beta, phi);
        for i in 0..12 {
            let t = 0.5 + i as f64;
            let r = 0.83;
            let x = [r * t.cos(), r * t.sin()];
            let expect = beta * r.powi(k as i32) * (k as f64 * (t + phi)).sin();
            assert_abs_diff_eq!(g.eval(x), expect, epsilon = 1e-13);
        }
        // harmonic
        assert!(g.poly().laplacian().max_abs_coeff() < 1e-12);
    }

    #[test]
    fn antiderivative_inverts_dx() {
        let p = AnalyticGerm::new(4, &[(2, 1, 1.5), (0, 4, -2.0), (1, 0, 3.0)]).unwrap();
        let back = p.poly().antiderivative_x().dx();
        for (h, j, c) in p.poly().terms() {
            assert_abs_diff_eq!(back.coeff(h, j), c, epsilon = 1e-14);
        }
    }
}
