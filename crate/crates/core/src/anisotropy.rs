//! Directional analysis of the local error density and the choice of element
//! stretching and orientation that minimises the integrated error bound.

use std::f64::consts::PI;

use crate::basis::ElementBasis;
use crate::poly::{exponents, Poly2};

/// Largest ratio between the directional maximum and its orthogonal value.
pub const RHO_MAX: f64 = 1e4;
/// Upper bound of the searched aspect ratio.
pub const BETA_MAX: f64 = 100.0;
/// Components below this fraction of the strongest one are ignored.
pub const DROP_TOL: f64 = 1e-12;
const PROBE_BETA: f64 = 1.01;

const SCAN_SAMPLES: usize = 720;
const THETA_POINTS: usize = 64;
const SEARCH_TOL: f64 = 1e-6;
const MAX_OUTER: usize = 50;

/// Local error density
/// `ψ_v² + |ψ_τ|² + w (|∇ψ_v|² + (∇·ψ_τ)²)` as a polynomial in `x - x̄_K`.
pub fn error_density_poly(basis: &ElementBasis, coeffs: &[f64], derivative_weight: f64) -> Poly2 {
    let polys = basis.reference.polys();
    let m = polys.len();
    let degree = basis.reference.degree();
    let s = basis.map.value_scale();
    let inv = basis.map.inv;
    let combine = |off: usize| {
        let mut p = Poly2::zeros(degree);
        for (i, q) in polys.iter().enumerate() {
            p = &p + &q.scale(s * coeffs[off + i]);
        }
        p
    };
    // products are formed in reference coordinates, mapped once at the end
    let grad = |p: &Poly2| {
        let (a, b) = (p.dx(), p.dy());
        (
            &a.scale(inv[0][0]) + &b.scale(inv[1][0]),
            &a.scale(inv[0][1]) + &b.scale(inv[1][1]),
        )
    };
    let v = combine(0);
    let tx = combine(m);
    let ty = combine(2 * m);
    let (vx, vy) = grad(&v);
    let div = &grad(&tx).0 + &grad(&ty).1;
    let mass = &(&(&v * &v) + &(&tx * &tx)) + &(&ty * &ty);
    let der = &(&(&vx * &vx) + &(&vy * &vy)) + &(&div * &div);
    (&mass + &der.scale(derivative_weight)).substitute_linear(inv)
}

/// Degree-`i` part of a polynomial together with its directional statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousComponent {
    pub order: usize,
    pub poly: Poly2,
    /// Maximum of `|P_i|` on the unit circle.
    pub amplitude: f64,
    /// `|P_i|` in the direction orthogonal to `direction`.
    pub amplitude_orth: f64,
    pub ratio: f64,
    /// Direction of the maximum, in `[0, π)`.
    pub direction: f64,
    pub negligible: bool,
}

/// Split `e` into homogeneous parts of every order `0..=deg e`.
pub fn decompose_homogeneous(e: &Poly2) -> Vec<Poly2> {
    (0..=e.degree()).map(|i| e.homogeneous_part(i)).collect()
}

fn on_circle(p: &Poly2, phi: f64) -> f64 {
    p.eval(phi.cos(), phi.sin()).abs()
}

/// `(A, A⊥, ρ, φ)` of a homogeneous polynomial, or `None` if it vanishes.
pub fn direction_stats(p: &Poly2) -> Option<(f64, f64, f64, f64)> {
    if p.max_abs_coeff() == 0.0 {
        return None;
    }
    let step = PI / SCAN_SAMPLES as f64;
    let (mut best_i, mut best, mut worst) = (0, f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..SCAN_SAMPLES {
        let f = on_circle(p, i as f64 * step);
        if f > best {
            best = f;
            best_i = i;
        }
        worst = worst.min(f);
    }
    if best == 0.0 {
        return None;
    }
    let flat = best - worst <= 1e-12 * best;
    let mut phi = if flat { 0.0 } else { best_i as f64 * step };
    if !flat {
        let (x, fx) = golden_max(|t| on_circle(p, t), phi - step, phi + step, 1e-10);
        if fx > best {
            best = fx;
            phi = x;
        }
    }
    let phi = phi.rem_euclid(PI);
    let phi = if phi >= PI { 0.0 } else { phi };
    let orth = on_circle(p, phi - 0.5 * PI);
    let ratio = if orth > 0.0 {
        (best / orth).clamp(1.0, RHO_MAX)
    } else {
        RHO_MAX
    };
    Some((best, orth, ratio, phi))
}

fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), a, b, tol);
    (x, -v)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Homogeneous decomposition of `e` with statistics for every non-zero part.
pub fn analyse(e: &Poly2) -> Vec<HomogeneousComponent> {
    let parts = decompose_homogeneous(e);
    let mut out: Vec<HomogeneousComponent> = parts
        .into_iter()
        .enumerate()
        .filter_map(|(i, poly)| {
            if i == 0 {
                let a = poly.coeff(0, 0).abs();
                return (a > 0.0).then(|| HomogeneousComponent {
                    order: 0,
                    poly,
                    amplitude: a,
                    amplitude_orth: a,
                    ratio: 1.0,
                    direction: 0.0,
                    negligible: false,
                });
            }
            direction_stats(&poly).map(|(a, ao, r, phi)| HomogeneousComponent {
                order: i,
                poly,
                amplitude: a,
                amplitude_orth: ao,
                ratio: r,
                direction: phi,
                negligible: false,
            })
        })
        .collect();
    let amax = out.iter().map(|c| c.amplitude).fold(0.0, f64::max);
    for c in out.iter_mut() {
        c.negligible = c.amplitude < DROP_TOL * amax;
    }
    out
}

impl HomogeneousComponent {
    /// Build a component directly from statistics (for analysis and tests).
    pub fn from_stats(order: usize, amplitude: f64, ratio: f64, direction: f64) -> Self {
        Self {
            order,
            poly: Poly2::zeros(order),
            amplitude,
            amplitude_orth: amplitude / ratio,
            ratio,
            direction,
            negligible: false,
        }
    }

    /// Right-hand side of the directional bound
    /// `A (xᵀ Q D Qᵀ x)^{i/2}` with `D = diag(1, ρ^{-2/i})`.
    pub fn bound(&self, x: [f64; 2]) -> f64 {
        let i = self.order as f64;
        let (s, c) = self.direction.sin_cos();
        let along = x[0] * c + x[1] * s;
        let across = -x[0] * s + x[1] * c;
        let q = along * along + self.ratio.powf(-2.0 / i) * across * across;
        self.amplitude * q.powf(0.5 * i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisotropyResult {
    pub aspect_ratio: f64,
    /// Major-axis direction of the optimal element, in `[0, π)`.
    pub orientation: f64,
    pub objective: f64,
}

/// Integrated bound over an ellipse of area `π λ`, aspect ratio `β` and
/// major axis `φ`, summed over the even components.
pub fn objective(components: &[HomogeneousComponent], lambda: f64, beta: f64, phi: f64) -> f64 {
    let mut total = 0.0;
    for c in components.iter().filter(|c| is_active(c)) {
        let i = c.order as f64;
        let rho = c.ratio.powf(-2.0 / i);
        let (sd, cd) = (phi - c.direction).sin_cos();
        let m11 = cd * cd + rho * sd * sd;
        let m22 = sd * sd + rho * cd * cd;
        let m12 = -sd * cd * (1.0 - rho);
        let (g11, g12, g22) = (beta * m11, m12, m22 / beta);
        let half = c.order as i32 / 2;
        let mut integral = 0.0;
        for t in theta_table() {
            let g = (g11 * t[0] + g22 * t[1] + g12 * t[2]).max(0.0);
            integral += g.powi(half);
        }
        integral *= 2.0 * PI / THETA_POINTS as f64;
        total += c.amplitude * lambda.powf(0.5 * (i + 2.0)) / (i + 2.0) * integral;
    }
    total
}

/// `(cos²θ, sin²θ, 2 sinθ cosθ)` on the periodic trapezoid nodes.
fn theta_table() -> &'static [[f64; 3]; THETA_POINTS] {
    static TABLE: std::sync::OnceLock<[[f64; 3]; THETA_POINTS]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|k| {
            let (s, c) = (2.0 * PI * k as f64 / THETA_POINTS as f64).sin_cos();
            [c * c, s * s, 2.0 * s * c]
        })
    })
}

fn is_active(c: &HomogeneousComponent) -> bool {
    c.order >= 2 && c.order.is_multiple_of(2) && !c.negligible && c.amplitude > 0.0
}

/// Alternating golden-section search for `(β, φ)`.
pub fn minimize(components: &[HomogeneousComponent], lambda: f64) -> AnisotropyResult {
    if !components.iter().any(is_active) {
        return AnisotropyResult {
            aspect_ratio: 1.0,
            orientation: 0.0,
            objective: 0.0,
        };
    }
    let f = |b: f64, p: f64| objective(components, lambda, b, p);
    // coarse start
    let (mut beta, mut phi, mut best) = (1.0, 0.0, f64::INFINITY);
    for bi in 0..24 {
        let b = BETA_MAX.powf(bi as f64 / 23.0);
        for pi in 0..36 {
            let p = PI * pi as f64 / 36.0;
            let v = f(b, p);
            if v < best {
                (beta, phi, best) = (b, p, v);
            }
        }
    }
    let phi_step = PI / 36.0;
    for _ in 0..MAX_OUTER {
        let (nb, vb) = golden_min(|b| f(b, phi), 1.0, BETA_MAX, SEARCH_TOL);
        let (nb, _) = if f(1.0, phi) <= vb {
            (1.0, f(1.0, phi))
        } else {
            (nb, vb)
        };
        // φ has no effect at β = 1, so steer it with a slightly stretched ellipse
        let bphi = nb.max(PROBE_BETA);
        // scan one period, then refine around the best sample
        let (mut pbest, mut vbest) = (phi, f(bphi, phi));
        for k in 0..36 {
            let p = phi + PI * (k as f64 - 18.0) / 36.0;
            let v = f(bphi, p);
            if v < vbest {
                (pbest, vbest) = (p, v);
            }
        }
        let (np, vp) = golden_min(
            |p| f(bphi, p),
            pbest - phi_step,
            pbest + phi_step,
            SEARCH_TOL,
        );
        let np = if vp <= vbest { np } else { pbest };
        let dphi = {
            let d = (np - phi).rem_euclid(PI);
            d.min(PI - d)
        };
        let dbeta = (nb - beta).abs();
        beta = nb;
        phi = np;
        if dbeta < SEARCH_TOL && dphi < SEARCH_TOL {
            break;
        }
    }
    let mut orientation = phi.rem_euclid(PI);
    if orientation >= PI {
        orientation = 0.0;
    }
    AnisotropyResult {
        aspect_ratio: beta,
        orientation,
        objective: f(beta, orientation),
    }
}

/// All monomials `x^a y^b` of total degree `n`, as exponent pairs.
pub fn homogeneous_exponents(n: usize) -> impl Iterator<Item = (usize, usize)> {
    exponents(n).filter(move |(a, b)| a + b == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(usize, usize, f64)]) -> Poly2 {
        let deg = terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0);
        let mut p = Poly2::zeros(deg);
        for &(a, b, c) in terms {
            p.set_coeff(a, b, c);
        }
        p
    }

    #[test]
    fn radial_quadratic() {
        let (a, ao, r, phi) = direction_stats(&poly(&[(2, 0, 1.0), (0, 2, 1.0)])).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (ao - 1.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn axis_quadratic() {
        let (a, ao, r, phi) = direction_stats(&poly(&[(2, 0, 4.0), (0, 2, 1.0)])).unwrap();
        assert!((a - 4.0).abs() < 1e-12 && (ao - 1.0).abs() < 1e-12 && (r - 4.0).abs() < 1e-12);
        assert!(phi.min(PI - phi) < 1e-9);
    }

    #[test]
    fn decomposition_orders() {
        let e = poly(&[(0, 0, 3.0), (2, 1, 1.0)]);
        let parts = decompose_homogeneous(&e);
        let nonzero: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.max_abs_coeff() > 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero, vec![0, 3]);
    }

    #[test]
    fn isotropic_component_gives_unit_ratio() {
        let c = vec![HomogeneousComponent::from_stats(2, 1.0, 1.0, 0.3)];
        let r = minimize(&c, 0.1);
        assert!((r.aspect_ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn orthogonal_pair_cancels() {
        let c = vec![
            HomogeneousComponent::from_stats(2, 1.0, 4.0, 0.0),
            HomogeneousComponent::from_stats(2, 1.0, 4.0, 0.5 * PI),
        ];
        let r = minimize(&c, 0.1);
        assert!((r.aspect_ratio - 1.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn quadratic_optimum_is_closed_form() {
        // tr(S) = β ρ' + 1/β at the optimal orientation: β = ρ^{1/2}
        let c = vec![HomogeneousComponent::from_stats(2, 1.0, 4.0, 0.0)];
        let r = minimize(&c, 1.0);
        assert!((r.aspect_ratio - 2.0).abs() < 1e-5, "{r:?}");
        assert!((r.orientation - 0.5 * PI).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn no_components_isotropic() {
        let r = minimize(&[], 1.0);
        assert_eq!((r.aspect_ratio, r.orientation), (1.0, 0.0));
    }
}
