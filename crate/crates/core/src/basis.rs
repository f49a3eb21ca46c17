//! Element and edge polynomial bases.
//!
//! Element functions are built once on the reference triangle, orthonormal in
//! `L²` there, and pushed forward affinely with the factor `1/sqrt(det J)`,
//! which keeps them orthonormal in `L²(K)` for every element `K`.

use crate::poly::{dim, exponents, Poly2};
use crate::quadrature::{legendre_values, TriangleRule};

/// Reference centroid; monomials are centred here for conditioning.
const REF_CENTROID: [f64; 2] = [1.0 / 3.0, 1.0 / 3.0];

/// `L²`-orthonormal basis of `P^n` on the reference triangle, expressed in
/// monomials of `(ξ - 1/3, η - 1/3)`.
#[derive(Clone, Debug)]
pub struct ReferenceBasis {
    degree: usize,
    polys: Vec<Poly2>,
    grads: Vec<[Poly2; 2]>,
}

impl ReferenceBasis {
    pub fn new(degree: usize) -> Self {
        let n = dim(degree);
        let rule = TriangleRule::collapsed(degree + 2);
        let shifted: Vec<[f64; 2]> = rule
            .points
            .iter()
            .map(|p| [p[0] - REF_CENTROID[0], p[1] - REF_CENTROID[1]])
            .collect();
        let monomials: Vec<Vec<f64>> = exponents(degree)
            .map(|(a, b)| {
                shifted
                    .iter()
                    .map(|p| p[0].powi(a as i32) * p[1].powi(b as i32))
                    .collect()
            })
            .collect();
        let inner = |f: &[f64], g: &[f64]| -> f64 {
            f.iter()
                .zip(g)
                .zip(&rule.weights)
                .map(|((a, b), w)| a * b * w)
                .sum()
        };
        // modified Gram-Schmidt, applied twice, on values and coefficients together
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for (i, mono) in monomials.into_iter().enumerate() {
            let mut v = mono;
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            for _ in 0..2 {
                for (vj, cj) in values.iter().zip(&coeffs) {
                    let r = inner(&v, vj);
                    v.iter_mut().zip(vj).for_each(|(a, b)| *a -= r * b);
                    c.iter_mut().zip(cj).for_each(|(a, b)| *a -= r * b);
                }
            }
            let norm = inner(&v, &v).sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            c.iter_mut().for_each(|a| *a /= norm);
            values.push(v);
            coeffs.push(c);
        }
        let polys: Vec<Poly2> = coeffs.into_iter().map(Poly2::from_coeffs).collect();
        let grads = polys.iter().map(|p| [p.dx(), p.dy()]).collect();
        Self {
            degree,
            polys,
            grads,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Basis functions as polynomials in `(ξ - 1/3, η - 1/3)`.
    pub fn polys(&self) -> &[Poly2] {
        &self.polys
    }

    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        let (x, y) = (xi[0] - REF_CENTROID[0], xi[1] - REF_CENTROID[1]);
        self.polys.iter().map(|p| p.eval(x, y)).collect()
    }

    pub fn gradients(&self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        let (x, y) = (xi[0] - REF_CENTROID[0], xi[1] - REF_CENTROID[1]);
        self.grads
            .iter()
            .map(|g| [g[0].eval(x, y), g[1].eval(x, y)])
            .collect()
    }

    /// Values and reference gradients tabulated at the given reference points.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        Tabulation {
            values: points.iter().map(|&p| self.values(p)).collect(),
            gradients: points.iter().map(|&p| self.gradients(p)).collect(),
        }
    }
}

/// Reference values/gradients at a fixed point set, indexed `[point][function]`.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<[f64; 2]>>,
}

/// Affine map from the reference triangle onto a physical triangle.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub origin: [f64; 2],
    /// Columns are `p1 - p0` and `p2 - p0`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub inv: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn new(p: &[[f64; 2]; 3]) -> Self {
        let jac = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        Self {
            origin: p[0],
            jac,
            det,
            inv,
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Physical gradient from a reference gradient: `J^{-T} ĝ`.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    /// Scale applied to reference functions to keep them `L²(K)`-orthonormal.
    pub fn value_scale(&self) -> f64 {
        1.0 / self.det.sqrt()
    }
}

/// Physical element basis on one triangle.
#[derive(Clone, Debug)]
pub struct ElementBasis<'a> {
    pub reference: &'a ReferenceBasis,
    pub map: AffineMap,
}

impl<'a> ElementBasis<'a> {
    pub fn new(reference: &'a ReferenceBasis, p: &[[f64; 2]; 3]) -> Self {
        Self {
            reference,
            map: AffineMap::new(p),
        }
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn values(&self, x: [f64; 2]) -> Vec<f64> {
        let s = self.map.value_scale();
        let mut v = self.reference.values(self.map.to_reference(x));
        v.iter_mut().for_each(|a| *a *= s);
        v
    }

    pub fn gradients(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let s = self.map.value_scale();
        self.reference
            .gradients(self.map.to_reference(x))
            .into_iter()
            .map(|g| {
                let g = self.map.push_gradient(g);
                [s * g[0], s * g[1]]
            })
            .collect()
    }

    /// Basis functions as polynomials in `x - x̄_K`.
    pub fn physical_polys(&self) -> Vec<Poly2> {
        let s = self.map.value_scale();
        self.reference
            .polys()
            .iter()
            .map(|p| p.substitute_linear(self.map.inv).scale(s))
            .collect()
    }
}

/// `L²(e)`-orthonormal Legendre functions of degree `<= p` in the edge
/// parameter `t ∈ [0, 1]`, evaluated at `t`.
pub fn edge_basis(p: usize, length: f64, t: f64) -> Vec<f64> {
    let mut v = legendre_values(p, 2.0 * t - 1.0);
    for (k, a) in v.iter_mut().enumerate() {
        *a *= ((2 * k + 1) as f64 / length).sqrt();
    }
    v
}

/// Reference coordinates of local edge `j` (from vertex `j` to `j+1`) at `s`.
pub fn reference_edge_point(j: usize, s: f64) -> [f64; 2] {
    match j {
        0 => [s, 0.0],
        1 => [1.0 - s, s],
        _ => [0.0, 1.0 - s],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SegmentRule;

    fn gram(basis: &ElementBasis, p: &[[f64; 2]; 3]) -> Vec<Vec<f64>> {
        let rule = TriangleRule::collapsed(25);
        let map = AffineMap::new(p);
        let n = basis.len();
        let mut g = vec![vec![0.0; n]; n];
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let v = basis.values(map.to_physical(*xi));
            for i in 0..n {
                for j in 0..n {
                    g[i][j] += w * map.det * v[i] * v[j];
                }
            }
        }
        g
    }

    #[test]
    fn constant_function_value() {
        let r = ReferenceBasis::new(0);
        let p = [[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]];
        let b = ElementBasis::new(&r, &p);
        let v = b.values([0.5, 0.5]);
        assert!((v[0] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_on_stretched_element() {
        for deg in [2, 5] {
            let r = ReferenceBasis::new(deg);
            assert_eq!(r.len(), dim(deg));
            let p = [[0.1, 0.2], [3.0, 0.25], [0.4, 0.23]];
            let b = ElementBasis::new(&r, &p);
            let g = gram(&b, &p);
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-12, "deg {deg} ({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn physical_polys_match_values_and_gradients() {
        let r = ReferenceBasis::new(3);
        let p = [[0.1, 0.2], [1.0, 0.5], [0.3, 0.9]];
        let b = ElementBasis::new(&r, &p);
        let c = [(0.1 + 1.0 + 0.3) / 3.0, (0.2 + 0.5 + 0.9) / 3.0];
        let polys = b.physical_polys();
        let x = [0.45, 0.52];
        let v = b.values(x);
        let g = b.gradients(x);
        for i in 0..r.len() {
            let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
            assert!((polys[i].eval(dx, dy) - v[i]).abs() < 1e-11);
            assert!((polys[i].dx().eval(dx, dy) - g[i][0]).abs() < 1e-10);
            assert!((polys[i].dy().eval(dx, dy) - g[i][1]).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_reproduces_constant() {
        let r = ReferenceBasis::new(3);
        let p = [[0.0, 0.0], [1.0, 0.2], [0.3, 0.7]];
        let b = ElementBasis::new(&r, &p);
        let rule = TriangleRule::collapsed(6);
        let mut c = vec![0.0; r.len()];
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let v = b.values(b.map.to_physical(*xi));
            for i in 0..r.len() {
                c[i] += w * b.map.det * v[i];
            }
        }
        let x = [0.4, 0.3];
        let v = b.values(x);
        let s: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_basis_orthonormal() {
        let h = 0.37;
        let rule = SegmentRule::with_points(8);
        let p = 4;
        let mut g = vec![vec![0.0; p + 1]; p + 1];
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let v = edge_basis(p, h, *t);
            for i in 0..=p {
                for j in 0..=p {
                    g[i][j] += w * h * v[i] * v[j];
                }
            }
        }
        for i in 0..=p {
            for j in 0..=p {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - e).abs() < 1e-12);
            }
        }
        assert_eq!(edge_basis(1, h, 0.3).len(), 2);
        // constants live in the span of the first function
        let v0 = edge_basis(2, h, 0.1)[0];
        assert!((v0 - edge_basis(2, h, 0.9)[0]).abs() < 1e-15);
    }
}
