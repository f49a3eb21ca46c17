//! Registry of benchmark problems with closed-form solutions and targets.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{Problem, ScalarFn};
use crate::error::{Error, Result};
use crate::mesh::{l_shape, rectangle, Triangulation};
use crate::quadrature::{adaptive_rectangle, adaptive_segment};
use crate::star::Target;

pub type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Physical and shape parameters shared by the cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaseParams {
    pub epsilon: f64,
    /// Steepness of the Gaussian target or the arctangent front.
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    pub xc: f64,
    pub yc: f64,
    pub x1: f64,
    pub x2: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        Self {
            epsilon: 0.005,
            alpha: 1000.0,
            gamma: 2.0,
            theta: 0.5,
            xc: 0.99,
            yc: 0.5,
            x1: 1.0 / 3.0,
            x2: 2.0 / 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    LShape,
}

impl Domain {
    /// Structured starting mesh with `n` cells per unit length.
    pub fn initial_mesh(&self, n: usize) -> Result<Triangulation> {
        match self {
            Self::UnitSquare => rectangle(0.0, 1.0, 0.0, 1.0, n, n),
            Self::LShape => l_shape(n.div_ceil(2).max(1)),
        }
    }
}

#[derive(Clone)]
pub struct TestCase {
    pub name: String,
    pub domain: Domain,
    pub problem: Problem,
    pub exact_u: Option<ScalarFn>,
    pub exact_sigma: Option<VectorFn>,
    pub target: Option<Target>,
    pub exact_target: Option<f64>,
    /// Smallest length scale of the solution, used to refine error quadrature.
    pub feature_scale: f64,
    pub singular_point: Option<[f64; 2]>,
    pub params: CaseParams,
}

impl std::fmt::Debug for TestCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("target", &self.target)
            .field("exact_target", &self.exact_target)
            .field("params", &self.params)
            .finish()
    }
}

pub const CASE_NAMES: [&str; 8] = [
    "boundary-layer",
    "reverse-layer",
    "gaussian",
    "flux",
    "line-singularity",
    "l-shape",
    "polynomial",
    "sine",
];

const TARGET_TOL: f64 = 1e-13;

/// `x − (e^{(x−1)/ε} − e^{−1/ε}) / (1 − e^{−1/ε})` and its first two derivatives.
pub fn layer_profile(x: f64, eps: f64) -> [f64; 3] {
    let d = 1.0 - (-1.0 / eps).exp();
    let e = ((x - 1.0) / eps).exp();
    [
        x - (e - (-1.0 / eps).exp()) / d,
        1.0 - e / (eps * d),
        -e / (eps * eps * d),
    ]
}

fn arctan_profile(t: f64, a: f64, t1: f64, t2: f64) -> [f64; 3] {
    let (p, q) = (a * (t - t1), a * (t2 - t));
    let (dp, dq) = (1.0 + p * p, 1.0 + q * q);
    [
        p.atan() + q.atan(),
        a / dp - a / dq,
        -2.0 * a * a * (p / (dp * dp) + q / (dq * dq)),
    ]
}

fn arc<F: Fn([f64; 2]) -> f64 + Send + Sync + 'static>(f: F) -> ScalarFn {
    Arc::new(f)
}

fn varc<F: Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static>(f: F) -> VectorFn {
    Arc::new(f)
}

/// Product solution `a(x) a(y)` of `−εΔu + β·∇u = s` with `β = (1, 1)`.
fn product_case(
    name: &str,
    profile: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>,
    eps: f64,
    dirichlet_exact: bool,
    feature_scale: f64,
    params: CaseParams,
) -> Result<TestCase> {
    let (pf, ps, pu, pg) = (profile.clone(), profile.clone(), profile.clone(), profile);
    let source = arc(move |x| {
        let (a, b) = (pf(x[0]), pf(x[1]));
        -eps * (a[2] * b[0] + a[0] * b[2]) + a[1] * b[0] + a[0] * b[1]
    });
    let exact_u = arc(move |x| pu(x[0])[0] * pu(x[1])[0]);
    let sigma = varc(move |x| {
        let (a, b) = (ps(x[0]), ps(x[1]));
        [eps * a[1] * b[0], eps * a[0] * b[1]]
    });
    let dirichlet = if dirichlet_exact {
        arc(move |x| pg(x[0])[0] * pg(x[1])[0])
    } else {
        arc(|_| 0.0)
    };
    Ok(TestCase {
        name: name.into(),
        domain: Domain::UnitSquare,
        problem: Problem::new(eps, [1.0, 1.0], source, dirichlet)?,
        exact_u: Some(exact_u),
        exact_sigma: Some(sigma),
        target: None,
        exact_target: None,
        feature_scale,
        singular_point: None,
        params,
    })
}

fn volume_target(case: &mut TestCase, j: ScalarFn) {
    let u = case.exact_u.clone().expect("closed-form solution");
    let jj = j.clone();
    let value = adaptive_rectangle(&move |x| jj(x) * u(x), [0.0, 1.0], [0.0, 1.0], TARGET_TOL);
    case.target = Some(Target::Volume(j));
    case.exact_target = Some(value);
}

/// Look up a case by name.
pub fn case(name: &str, params: &CaseParams) -> Result<TestCase> {
    let p = params.clone();
    let eps = p.epsilon;
    let layer: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync> =
        Arc::new(move |x| layer_profile(x, eps));
    match name {
        "boundary-layer" => product_case(name, layer, eps, false, eps, p),
        "reverse-layer" => {
            let mut c = product_case(name, layer, eps, false, eps, p)?;
            let j =
                arc(move |x| layer_profile(1.0 - x[0], eps)[0] + layer_profile(1.0 - x[1], eps)[0]);
            volume_target(&mut c, j);
            Ok(c)
        }
        "gaussian" => {
            let mut c = product_case(name, layer, eps, false, eps, p.clone())?;
            let (a, xc, yc) = (p.alpha, p.xc, p.yc);
            let j = arc(move |x| (-a * ((x[0] - xc).powi(2) + (x[1] - yc).powi(2))).exp());
            volume_target(&mut c, j);
            c.feature_scale = eps.min(1.0 / a.sqrt());
            Ok(c)
        }
        "flux" => {
            let (a, t1, t2) = (p.alpha, p.x1, p.x2);
            let prof: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync> =
                Arc::new(move |t| arctan_profile(t, a, t1, t2));
            let mut c = product_case(name, prof.clone(), eps, true, 1.0 / a, p)?;
            let right = prof(1.0)[1];
            let flux = adaptive_segment(&|y| eps * right * prof(y)[0], 0.0, 1.0, TARGET_TOL);
            c.target = Some(Target::BoundaryFlux(vec![(2, 1.0)]));
            c.exact_target = Some(flux);
            Ok(c)
        }
        "line-singularity" => line_singularity(p),
        "l-shape" => l_shape_case(p),
        "polynomial" => polynomial_case(p),
        "sine" => sine_case(p),
        _ => Err(Error::Config(format!(
            "unknown case `{name}`; expected one of {}",
            CASE_NAMES.join(", ")
        ))),
    }
}

fn line_singularity(p: CaseParams) -> Result<TestCase> {
    let (g, th) = (p.gamma, p.theta);
    let scale = 2f64.powf(g);
    let u = arc(move |x| {
        let s = x[0] - th * x[1] - 0.5;
        let base = (PI * (x[1] - 0.5)).cos();
        if s > 0.0 {
            base + scale * s.powf(g)
        } else {
            base
        }
    });
    let sigma = varc(move |x| {
        let s = x[0] - th * x[1] - 0.5;
        let dy = -PI * (PI * (x[1] - 0.5)).sin();
        if s > 0.0 {
            let d = scale * g * s.powf(g - 1.0);
            [d, dy - th * d]
        } else {
            [0.0, dy]
        }
    });
    let source = arc(move |x| {
        let s = x[0] - th * x[1] - 0.5;
        let base = PI * PI * (PI * (x[1] - 0.5)).cos();
        if s > 0.0 {
            base - scale * g * (g - 1.0) * (1.0 + th * th) * s.powf(g - 2.0)
        } else {
            base
        }
    });
    Ok(TestCase {
        name: "line-singularity".into(),
        domain: Domain::UnitSquare,
        problem: Problem::poisson(1.0, source, u.clone())?,
        exact_u: Some(u),
        exact_sigma: Some(sigma),
        target: None,
        exact_target: None,
        feature_scale: 0.0,
        singular_point: None,
        params: p,
    })
}

/// Polar angle folded into `[0, 2π)`.
fn angle(x: [f64; 2]) -> f64 {
    x[1].atan2(x[0]).rem_euclid(2.0 * PI)
}

fn l_shape_case(p: CaseParams) -> Result<TestCase> {
    let u = arc(|x| {
        let r = x[0].hypot(x[1]);
        r.powf(2.0 / 3.0) * (2.0 * angle(x) / 3.0).sin()
    });
    let sigma = varc(|x| {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let t = angle(x);
        // ∂r = r^{-1/3} (2/3) sin(2t/3), (1/r)∂t = r^{-1/3} (2/3) cos(2t/3)
        let (dr, dt) = (
            2.0 / 3.0 * r.powf(-1.0 / 3.0) * (2.0 * t / 3.0).sin(),
            2.0 / 3.0 * r.powf(-1.0 / 3.0) * (2.0 * t / 3.0).cos(),
        );
        let (c, s) = (x[0] / r, x[1] / r);
        [c * dr - s * dt, s * dr + c * dt]
    });
    Ok(TestCase {
        name: "l-shape".into(),
        domain: Domain::LShape,
        problem: Problem::poisson(1.0, arc(|_| 0.0), u.clone())?,
        exact_u: Some(u),
        exact_sigma: Some(sigma),
        target: None,
        exact_target: None,
        feature_scale: 0.0,
        singular_point: Some([0.0, 0.0]),
        params: p,
    })
}

/// Quadratic solution of a convection–diffusion problem; reproduced exactly for `p ≥ 2`.
fn polynomial_case(p: CaseParams) -> Result<TestCase> {
    let eps = 1.0;
    let beta = [1.0, 0.5];
    let u = arc(|x| 1.0 + x[0] - 2.0 * x[1] + x[0] * x[0] + 0.5 * x[0] * x[1] - x[1] * x[1]);
    let grad = |x: [f64; 2]| {
        [
            1.0 + 2.0 * x[0] + 0.5 * x[1],
            -2.0 + 0.5 * x[0] - 2.0 * x[1],
        ]
    };
    // harmonic, so only the convection term remains
    let source = arc(move |x| {
        let g = grad(x);
        beta[0] * g[0] + beta[1] * g[1]
    });
    Ok(TestCase {
        name: "polynomial".into(),
        domain: Domain::UnitSquare,
        problem: Problem::new(eps, beta, source, u.clone())?,
        exact_u: Some(u),
        exact_sigma: Some(varc(grad)),
        target: None,
        exact_target: None,
        feature_scale: 0.0,
        singular_point: None,
        params: p,
    })
}

fn sine_case(p: CaseParams) -> Result<TestCase> {
    let w = 2.0 * PI;
    let u = arc(move |x| (w * x[0]).sin() * (w * x[1]).sin());
    let sigma = varc(move |x| {
        [
            w * (w * x[0]).cos() * (w * x[1]).sin(),
            w * (w * x[0]).sin() * (w * x[1]).cos(),
        ]
    });
    let source = arc(move |x| 2.0 * w * w * (w * x[0]).sin() * (w * x[1]).sin());
    Ok(TestCase {
        name: "sine".into(),
        domain: Domain::UnitSquare,
        problem: Problem::poisson(1.0, source, arc(|_| 0.0))?,
        exact_u: Some(u),
        exact_sigma: Some(sigma),
        target: None,
        exact_target: None,
        feature_scale: 0.0,
        singular_point: None,
        params: p,
    })
}
