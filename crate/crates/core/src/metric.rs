//! Symmetric 2×2 tensors and the metric algebra used to describe target
//! element size, stretching and orientation.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Symmetric 2×2 matrix `[[a, b], [b, c]]`, not necessarily definite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    /// `(mean, radius, angle)` with eigenvalues `mean ± radius`; `angle` is the
    /// direction of the eigenvector of `mean + radius`.
    fn spectral(&self) -> (f64, f64, f64) {
        let mean = 0.5 * (self.a + self.c);
        let half = 0.5 * (self.a - self.c);
        let radius = half.hypot(self.b);
        let angle = if radius == 0.0 {
            0.0
        } else {
            0.5 * self.b.atan2(half)
        };
        (mean, radius, angle)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (mean, radius, _) = self.spectral();
        let hi = mean + radius;
        let mut lo = mean - radius;
        // the difference form loses digits for very anisotropic tensors
        if hi > 0.0 && lo > 0.0 {
            lo = self.det() / hi;
        }
        (lo, hi)
    }

    /// Apply `f` to the eigenvalues, keeping the eigenvectors.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (mean, radius, _) = self.spectral();
        let (lo, hi) = self.eigenvalues();
        let (flo, fhi) = (f(lo), f(hi));
        let fmean = 0.5 * (flo + fhi);
        if radius == 0.0 {
            return Self::new(fmean, 0.0, fmean);
        }
        let s = 0.5 * (fhi - flo) / radius;
        Self::new(
            fmean + s * (self.a - mean),
            s * self.b,
            fmean + s * (self.c - mean),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.a, s * self.b, s * self.c)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }

    /// `eᵀ S e`.
    pub fn quad(&self, e: [f64; 2]) -> f64 {
        self.a * e[0] * e[0] + 2.0 * self.b * e[0] * e[1] + self.c * e[1] * e[1]
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

/// Symmetric positive definite metric tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

/// Size/shape/orientation view of a metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricDecomposition {
    /// Reciprocal area scale, `sqrt(det M)`.
    pub density: f64,
    /// Ratio of the ellipse axes, `>= 1`.
    pub aspect_ratio: f64,
    /// Direction of the major axis in `[0, π)`.
    pub orientation: f64,
}

/// Side length scale implied by a unit triangle: `eᵀ M e = 3`.
pub const UNIT_EDGE_SQUARED: f64 = 3.0;
/// Area of a unit triangle under the identity metric, `3√3/4`.
pub const UNIT_TRIANGLE_AREA: f64 = 1.299_038_105_676_658;

impl Metric {
    pub fn new(m11: f64, m12: f64, m22: f64) -> Result<Self> {
        let m = Self { m11, m12, m22 };
        if m.is_spd() {
            Ok(m)
        } else {
            Err(Error::InvalidMetric(format!(
                "not positive definite: [{m11}, {m12}; {m12}, {m22}]"
            )))
        }
    }

    pub fn identity() -> Self {
        Self::isotropic(1.0)
    }

    pub fn isotropic(s: f64) -> Self {
        Self {
            m11: s,
            m12: 0.0,
            m22: s,
        }
    }

    pub fn is_spd(&self) -> bool {
        self.m11.is_finite()
            && self.m12.is_finite()
            && self.m22.is_finite()
            && self.m11 > 0.0
            && self.m22 > 0.0
            && self.m11 * self.m22 - self.m12 * self.m12 > 0.0
    }

    pub fn as_sym(&self) -> Sym2 {
        Sym2::new(self.m11, self.m12, self.m22)
    }

    fn from_sym(s: Sym2) -> Self {
        Self {
            m11: s.a,
            m12: s.b,
            m22: s.c,
        }
    }

    pub fn det(&self) -> f64 {
        self.as_sym().det()
    }

    /// Squared metric length of `e`.
    pub fn quad(&self, e: [f64; 2]) -> f64 {
        self.as_sym().quad(e)
    }

    pub fn length(&self, e: [f64; 2]) -> f64 {
        self.quad(e).max(0.0).sqrt()
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        self.as_sym().eigenvalues()
    }

    pub fn log(&self) -> Sym2 {
        self.as_sym().map_spectrum(f64::ln)
    }

    pub fn exp(s: &Sym2) -> Self {
        Self::from_sym(s.map_spectrum(f64::exp))
    }

    pub fn powf(&self, t: f64) -> Self {
        Self::from_sym(self.as_sym().map_spectrum(|l| l.powf(t)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_sym(self.as_sym().scale(s))
    }

    pub fn decompose(&self) -> Result<MetricDecomposition> {
        if !self.is_spd() {
            return Err(Error::InvalidMetric(format!("{self:?}")));
        }
        let (lo, hi) = self.eigenvalues();
        let (_, radius, angle_hi) = self.as_sym().spectral();
        let mut orientation = if radius <= 1e-15 * hi {
            0.0
        } else {
            angle_hi + 0.5 * PI
        };
        orientation = orientation.rem_euclid(PI);
        if orientation >= PI {
            orientation = 0.0;
        }
        Ok(MetricDecomposition {
            density: (lo * hi).sqrt(),
            aspect_ratio: (hi / lo).sqrt().max(1.0),
            orientation,
        })
    }

    pub fn compose(dec: &MetricDecomposition) -> Result<Self> {
        dec.compose()
    }

    /// Log-Euclidean weighted mean.
    pub fn log_mean(items: &[(Metric, f64)]) -> Result<Self> {
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        if items.is_empty() || total <= 0.0 {
            return Err(Error::InvalidInput("empty metric average".into()));
        }
        let mut acc = Sym2::zero();
        for (m, w) in items {
            acc = acc.add(&m.log().scale(w / total));
        }
        Ok(Self::exp(&acc))
    }

    /// Geometric interpolation `M0^{1-t} M1^t` in the log-Euclidean sense.
    pub fn interpolate(m0: &Metric, m1: &Metric, t: f64) -> Self {
        let l = m0.log().scale(1.0 - t).add(&m1.log().scale(t));
        Self::exp(&l)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.m11, self.m12, self.m22]
    }
}

impl MetricDecomposition {
    pub fn compose(&self) -> Result<Metric> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        if !(self.aspect_ratio >= 1.0 && self.aspect_ratio.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "aspect ratio must be >= 1, got {}",
                self.aspect_ratio
            )));
        }
        let along = self.density / self.aspect_ratio;
        let across = self.density * self.aspect_ratio;
        let (s, c) = self.orientation.sin_cos();
        Ok(Metric {
            m11: along * c * c + across * s * s,
            m12: (along - across) * s * c,
            m22: along * s * s + across * c * c,
        })
    }
}

/// Signed area of the triangle `(p0, p1, p2)`.
pub fn signed_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn bbox_diag_sq(p: &[[f64; 2]; 3]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for q in p {
        for d in 0..2 {
            lo[d] = lo[d].min(q[d]);
            hi[d] = hi[d].max(q[d]);
        }
    }
    (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)
}

fn check_nondegenerate(p: &[[f64; 2]; 3]) -> Result<f64> {
    let area = signed_area(p);
    if !(area.abs() >= 1e-14 * bbox_diag_sq(p)) || !area.is_finite() {
        return Err(Error::Degenerate(format!("area {area:e} for {p:?}")));
    }
    Ok(area)
}

/// The metric for which every edge of the triangle has squared length 3.
pub fn implied_metric(p: &[[f64; 2]; 3]) -> Result<Metric> {
    let area = check_nondegenerate(p)?;
    let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
    let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
    let det = 2.0 * area;
    // inverse of [e1 e2]
    let inv = [[e2[1] / det, -e2[0] / det], [-e1[1] / det, e1[0] / det]];
    // edges of the metric-unit equilateral triangle
    let h = UNIT_EDGE_SQUARED.sqrt();
    let r = [[h, 0.5 * h], [0.0, 1.5]];
    let a = [
        [
            r[0][0] * inv[0][0] + r[0][1] * inv[1][0],
            r[0][0] * inv[0][1] + r[0][1] * inv[1][1],
        ],
        [
            r[1][0] * inv[0][0] + r[1][1] * inv[1][0],
            r[1][0] * inv[0][1] + r[1][1] * inv[1][1],
        ],
    ];
    Metric::new(
        a[0][0] * a[0][0] + a[1][0] * a[1][0],
        a[0][0] * a[0][1] + a[1][0] * a[1][1],
        a[0][1] * a[0][1] + a[1][1] * a[1][1],
    )
}

/// Area and implied density `sqrt(det M)` of a triangle.
pub fn element_area_density(p: &[[f64; 2]; 3]) -> Result<(f64, f64)> {
    let area = check_nondegenerate(p)?;
    let m = implied_metric(p)?;
    Ok((area, m.det().sqrt()))
}

/// Anything that can report a metric at a point of the plane.
pub trait MetricEval {
    fn metric_at(&self, x: [f64; 2]) -> Metric;
}

impl MetricEval for Metric {
    fn metric_at(&self, _x: [f64; 2]) -> Metric {
        *self
    }
}

/// Metric given by a closure.
pub struct FnMetric<F: Fn([f64; 2]) -> Metric>(pub F);

impl<F: Fn([f64; 2]) -> Metric> MetricEval for FnMetric<F> {
    fn metric_at(&self, x: [f64; 2]) -> Metric {
        (self.0)(x)
    }
}

const GL5_NODES: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_5,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332_0,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_5,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_4,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_5,
];

/// Length of the segment `x1 → x2` measured in the metric field.
pub fn riemannian_edge_length(
    field: &(impl MetricEval + ?Sized),
    x1: [f64; 2],
    x2: [f64; 2],
) -> f64 {
    let e = [x2[0] - x1[0], x2[1] - x1[1]];
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(t, w)| {
            let x = [x1[0] + t * e[0], x1[1] + t * e[1]];
            w * field.metric_at(x).length(e)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn equilateral_implies_identity() {
        let s = 3f64.sqrt();
        let p = [[0.0, 0.0], [s, 0.0], [0.5 * s, 1.5]];
        let m = implied_metric(&p).unwrap();
        assert!(close(m.m11, 1.0, 1e-12) && close(m.m22, 1.0, 1e-12) && m.m12.abs() < 1e-12);
        let p2 = p.map(|q| [2.0 * q[0], 2.0 * q[1]]);
        let m2 = implied_metric(&p2).unwrap();
        assert!(close(m2.m11, 0.25, 1e-12) && close(m2.m22, 0.25, 1e-12) && m2.m12.abs() < 1e-12);
    }

    #[test]
    fn degenerate_rejected() {
        let p = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(implied_metric(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn unit_triangle_area() {
        let s = 3f64.sqrt();
        let p = [[0.0, 0.0], [s, 0.0], [0.5 * s, 1.5]];
        let (area, d) = element_area_density(&p).unwrap();
        assert!(close(area, UNIT_TRIANGLE_AREA, 1e-14));
        assert!(close(area * d, UNIT_TRIANGLE_AREA, 1e-12));
        let p2 = p.map(|q| [2.0 * q[0], 2.0 * q[1]]);
        let (_, d2) = element_area_density(&p2).unwrap();
        assert!(close(d2, d / 4.0, 1e-12));
    }

    #[test]
    fn decompose_examples() {
        let d = Metric::identity().decompose().unwrap();
        assert_eq!((d.density, d.aspect_ratio, d.orientation), (1.0, 1.0, 0.0));
        let d = Metric::new(4.0, 0.0, 1.0).unwrap().decompose().unwrap();
        assert!(close(d.density, 2.0, 1e-14) && close(d.aspect_ratio, 2.0, 1e-14));
        // the small eigenvalue (long axis) of diag(4, 1) points along y
        assert!(close(d.orientation, 0.5 * PI, 1e-14));
        assert!(Metric {
            m11: 1.0,
            m12: 2.0,
            m22: 1.0
        }
        .decompose()
        .is_err());
    }

    #[test]
    fn compose_examples() {
        let m = MetricDecomposition {
            density: 1.0,
            aspect_ratio: 1.0,
            orientation: 0.0,
        }
        .compose()
        .unwrap();
        assert_eq!(m, Metric::identity());
        let m = MetricDecomposition {
            density: 2.0,
            aspect_ratio: 2.0,
            orientation: 0.0,
        }
        .compose()
        .unwrap();
        assert!(close(m.m11, 1.0, 1e-15) && close(m.m22, 4.0, 1e-15) && m.m12.abs() < 1e-15);
        assert!(MetricDecomposition {
            density: 0.0,
            aspect_ratio: 1.0,
            orientation: 0.0
        }
        .compose()
        .is_err());
    }

    #[test]
    fn riemannian_length_constant() {
        let l = riemannian_edge_length(&Metric::identity(), [0.0, 0.0], [3.0, 4.0]);
        assert!(close(l, 5.0, 1e-14));
        let m = Metric::new(4.0, 0.0, 1.0).unwrap();
        let l = riemannian_edge_length(&m, [0.5, 0.0], [2.0, 0.0]);
        assert!(close(l, 3.0, 1e-14));
    }

    #[test]
    fn log_mean_symmetric_pair() {
        let c = 7.0;
        let m = Metric::log_mean(&[
            (Metric::isotropic(c), 1.0),
            (Metric::isotropic(1.0 / c), 1.0),
        ])
        .unwrap();
        assert!(close(m.m11, 1.0, 1e-14) && close(m.m22, 1.0, 1e-14) && m.m12.abs() < 1e-14);
        let a = Metric::new(3.0, 1.0, 2.0).unwrap();
        let m = Metric::log_mean(&[(a, 0.3), (a, 2.0)]).unwrap();
        assert!(close(m.m11, 3.0, 1e-13) && close(m.m12, 1.0, 1e-13) && close(m.m22, 2.0, 1e-13));
    }
}
