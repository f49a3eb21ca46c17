//! Dense bivariate polynomials in the monomial basis.
//!
//! Coefficients are stored in graded order: `1, x, y, x², xy, y², x³, ...`, so
//! the monomial `x^a y^b` lives at `index(a, b)`.

use std::ops::{Add, Mul, Sub};

/// Number of monomials of total degree `<= n`.
pub const fn dim(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Position of `x^a y^b` in graded order.
pub const fn index(a: usize, b: usize) -> usize {
    let t = a + b;
    t * (t + 1) / 2 + b
}

/// Exponent pairs `(a, b)` in graded order up to total degree `n`.
pub fn exponents(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=n).flat_map(|t| (0..=t).map(move |b| (t - b, b)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; dim(degree)],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    /// The polynomial `y`.
    pub fn y() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn monomial(a: usize, b: usize, c: f64) -> Self {
        let mut p = Self::zeros(a + b);
        p.coeffs[index(a, b)] = c;
        p
    }

    /// Build from graded-order coefficients; the degree is inferred from the length.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let mut degree = 0;
        while dim(degree) < coeffs.len() {
            degree += 1;
        }
        assert_eq!(
            dim(degree),
            coeffs.len(),
            "coefficient count is not a triangular number"
        );
        Self { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coeffs[index(a, b)]
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, c: f64) {
        if a + b > self.degree {
            self.raise_degree(a + b);
        }
        self.coeffs[index(a, b)] = c;
    }

    fn raise_degree(&mut self, degree: usize) {
        if degree > self.degree {
            self.coeffs.resize(dim(degree), 0.0);
            self.degree = degree;
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner-free evaluation with running powers; degrees here stay small.
        let mut xp = vec![1.0; self.degree + 1];
        let mut yp = vec![1.0; self.degree + 1];
        for k in 1..=self.degree {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        exponents(self.degree)
            .zip(&self.coeffs)
            .map(|((a, b), c)| c * xp[a] * yp[b])
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zeros(self.degree.saturating_sub(1));
        for ((a, b), c) in exponents(self.degree).zip(&self.coeffs) {
            if a > 0 {
                out.coeffs[index(a - 1, b)] += a as f64 * c;
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zeros(self.degree.saturating_sub(1));
        for ((a, b), c) in exponents(self.degree).zip(&self.coeffs) {
            if b > 0 {
                out.coeffs[index(a, b - 1)] += b as f64 * c;
            }
        }
        out
    }

    /// Returns `q(x, y) = p(l[0][0] x + l[0][1] y, l[1][0] x + l[1][1] y)`.
    pub fn substitute_linear(&self, l: [[f64; 2]; 2]) -> Self {
        let u = Self::from_coeffs(vec![0.0, l[0][0], l[0][1]]);
        let v = Self::from_coeffs(vec![0.0, l[1][0], l[1][1]]);
        let mut upow = vec![Self::constant(1.0)];
        let mut vpow = vec![Self::constant(1.0)];
        for k in 1..=self.degree {
            upow.push(&upow[k - 1] * &u);
            vpow.push(&vpow[k - 1] * &v);
        }
        let mut out = Self::zeros(self.degree);
        for ((a, b), c) in exponents(self.degree).zip(&self.coeffs) {
            if *c != 0.0 {
                out = &out + &(&upow[a] * &vpow[b]).scale(*c);
            }
        }
        out.raise_degree(self.degree);
        out
    }

    /// Part of total degree exactly `i`, as a polynomial of degree `i`.
    pub fn homogeneous_part(&self, i: usize) -> Self {
        let mut out = Self::zeros(i);
        if i <= self.degree {
            for b in 0..=i {
                out.coeffs[index(i - b, b)] = self.coeffs[index(i - b, b)];
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        out.raise_degree(rhs.degree);
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o += r;
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zeros(self.degree + rhs.degree);
        for ((a1, b1), c1) in exponents(self.degree).zip(&self.coeffs) {
            if *c1 == 0.0 {
                continue;
            }
            for ((a2, b2), c2) in exponents(rhs.degree).zip(&rhs.coeffs) {
                out.coeffs[index(a1 + a2, b1 + b2)] += c1 * c2;
            }
        }
        out
    }
}
