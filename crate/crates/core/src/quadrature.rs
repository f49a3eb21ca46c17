//! Gauss–Legendre rules on segments and collapsed (Duffy) tensor rules on the
//! reference triangle `(0,0), (1,0), (0,1)`.

use crate::error::{Error, Result};

/// Highest total degree any rule here is asked to integrate exactly.
pub const MAX_DEGREE: usize = 40;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint: P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, d)
}

/// Legendre values `P_0..=P_n` at `x`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        let v = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(v);
    }
    out
}

/// Quadrature on the unit interval `[0, 1]`.
#[derive(Clone, Debug)]
pub struct SegmentRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SegmentRule {
    /// Gauss–Legendre rule exact for polynomials of degree `<= degree`.
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree));
        }
        Ok(Self::with_points(degree / 2 + 1))
    }

    pub fn with_points(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            points: x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Quadrature on the reference triangle; weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed Gauss–Legendre rule exact for total degree `<= degree`.
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree));
        }
        // x = u, y = v (1 - u): the Jacobian adds one degree in u.
        let n = (degree + 2).div_ceil(2);
        let mut rule = Self::collapsed(n);
        rule.degree = degree;
        Ok(rule)
    }

    /// `n × n` collapsed rule (exact to degree `2n - 2`).
    pub fn collapsed(n: usize) -> Self {
        let g = SegmentRule::with_points(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in g.points.iter().zip(&g.weights) {
            for (v, wv) in g.points.iter().zip(&g.weights) {
                points.push([*u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self {
            degree: 2 * n - 2,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Composite rule on `4^levels` congruent sub-triangles.
    pub fn subdivided(&self, levels: usize) -> Self {
        let mut tris = vec![[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(4 * tris.len());
            for t in &tris {
                let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                let (m01, m12, m20) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
                next.push([t[0], m01, m20]);
                next.push([m01, t[1], m12]);
                next.push([m20, m12, t[2]]);
                next.push([m12, m20, m01]);
            }
            tris = next;
        }
        let scale = 0.25f64.powi(levels as i32);
        let mut points = Vec::with_capacity(tris.len() * self.len());
        let mut weights = Vec::with_capacity(tris.len() * self.len());
        for t in &tris {
            for (p, w) in self.points.iter().zip(&self.weights) {
                points.push([
                    t[0][0] + p[0] * (t[1][0] - t[0][0]) + p[1] * (t[2][0] - t[0][0]),
                    t[0][1] + p[0] * (t[1][1] - t[0][1]) + p[1] * (t[2][1] - t[0][1]),
                ]);
                weights.push(w * scale);
            }
        }
        Self {
            degree: self.degree,
            points,
            weights,
        }
    }
}

/// Exact integral of `ξ^a η^b` over the reference triangle: `a! b! / (a + b + 2)!`.
pub fn reference_monomial_integral(a: usize, b: usize) -> f64 {
    let mut r = 1.0;
    // a! b! / (a+b+2)! computed as a product to stay finite for large degrees
    for k in 1..=b {
        r *= k as f64 / (a + k) as f64;
    }
    r / ((a + b + 1) as f64 * (a + b + 2) as f64)
}

const ADAPTIVE_POINTS: usize = 12;
const ADAPTIVE_DEPTH: usize = 30;

/// Adaptive Gauss–Legendre integration of `f` over `[a, b]`.
pub fn adaptive_segment(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let rule = SegmentRule::with_points(ADAPTIVE_POINTS);
    let once = |a: f64, b: f64| -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| w * f(a + t * (b - a)))
            .sum::<f64>()
            * (b - a)
    };
    fn rec(
        once: &dyn Fn(f64, f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (once(a, m), once(m, b));
        if depth == 0 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        rec(once, a, m, l, 0.5 * tol, depth - 1) + rec(once, m, b, r, 0.5 * tol, depth - 1)
    }
    let whole = once(a, b);
    rec(&once, a, b, whole, tol, ADAPTIVE_DEPTH)
}

/// Adaptive tensor Gauss–Legendre integration over a rectangle.
pub fn adaptive_rectangle(f: &dyn Fn([f64; 2]) -> f64, x: [f64; 2], y: [f64; 2], tol: f64) -> f64 {
    let rule = SegmentRule::with_points(ADAPTIVE_POINTS);
    let once = |x: [f64; 2], y: [f64; 2]| -> f64 {
        let mut s = 0.0;
        for (tx, wx) in rule.points.iter().zip(&rule.weights) {
            for (ty, wy) in rule.points.iter().zip(&rule.weights) {
                s += wx * wy * f([x[0] + tx * (x[1] - x[0]), y[0] + ty * (y[1] - y[0])]);
            }
        }
        s * (x[1] - x[0]) * (y[1] - y[0])
    };
    fn rec(
        once: &dyn Fn([f64; 2], [f64; 2]) -> f64,
        x: [f64; 2],
        y: [f64; 2],
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (mx, my) = (0.5 * (x[0] + x[1]), 0.5 * (y[0] + y[1]));
        let quads = [
            ([x[0], mx], [y[0], my]),
            ([mx, x[1]], [y[0], my]),
            ([x[0], mx], [my, y[1]]),
            ([mx, x[1]], [my, y[1]]),
        ];
        let parts = quads.map(|(a, b)| once(a, b));
        let sum: f64 = parts.iter().sum();
        if depth == 0 || (sum - whole).abs() <= tol {
            return sum;
        }
        quads
            .iter()
            .zip(parts)
            .map(|((a, b), p)| rec(once, *a, *b, p, 0.25 * tol, depth - 1))
            .sum()
    }
    let whole = once(x, y);
    rec(&once, x, y, whole, tol, 16)
}
