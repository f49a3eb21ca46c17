//! Goal-oriented estimation: adjoint solve on the primal operator, explicit
//! dual indicator, patch reconstruction of the dual and the dual-weighted
//! residual.

use faer::{Col, Mat};
use rayon::prelude::*;

use crate::assembly::{Discretization, Problem, ScalarFn};
use crate::basis::{edge_basis, AffineMap, ElementBasis};
use crate::error::{check_len, Error, Result};
use crate::mesh::Triangulation;
use crate::poly::{dim, exponents};
use crate::quadrature::SegmentRule;
use crate::solve::DpgSystem;

/// Linear quantity of interest.
#[derive(Clone)]
pub enum Target {
    /// `∫_Ω j u`.
    Volume(ScalarFn),
    /// `Σ_tags w_tag ∫_{Γ_tag} σ·n` with the outward normal.
    BoundaryFlux(Vec<(u32, f64)>),
}

impl std::fmt::Debug for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Volume(_) => f.write_str("Volume(..)"),
            Self::BoundaryFlux(w) => f.debug_tuple("BoundaryFlux").field(w).finish(),
        }
    }
}

impl Target {
    fn flux_weight(&self, tag: u32) -> f64 {
        match self {
            Self::BoundaryFlux(w) => w.iter().filter(|(t, _)| *t == tag).map(|(_, v)| v).sum(),
            Self::Volume(_) => 0.0,
        }
    }

    fn volume_weight(&self, x: [f64; 2]) -> f64 {
        match self {
            Self::Volume(j) => j(x),
            Self::BoundaryFlux(_) => 0.0,
        }
    }
}

/// Adjoint solution: trial-sized `ξ` and enriched test coefficients `ẑ_K`.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub xi: Vec<f64>,
    pub z: Vec<Vec<f64>>,
}

/// Coefficients of the functional on each trial basis function.
pub fn target_vector(
    mesh: &Triangulation,
    disc: &Discretization,
    sys: &DpgSystem,
    target: &Target,
) -> Vec<f64> {
    let dofs = &sys.dofs;
    let mut out = vec![0.0; dofs.len()];
    match target {
        Target::Volume(j) => {
            let n = disc.trial_dim();
            let rule = &disc.volume_rule;
            for k in 0..mesh.num_elements() {
                let basis = ElementBasis::new(&disc.trial, &mesh.element_points(k));
                let off = dofs.u_offset(k);
                for (xi, w) in rule.points.iter().zip(&rule.weights) {
                    let x = basis.map.to_physical(*xi);
                    let jw = j(x) * w * basis.map.det;
                    let phi = basis.values(x);
                    for a in 0..n {
                        out[off + a] += jw * phi[a];
                    }
                }
            }
        }
        Target::BoundaryFlux(_) => {
            let rule = &disc.edge_rule;
            for (eid, e) in mesh.edges().iter().enumerate() {
                let Some(tag) = e.tag else { continue };
                let w = target.flux_weight(tag);
                if w == 0.0 {
                    continue;
                }
                let k = e.elements.0;
                let j = mesh
                    .element_edges(k)
                    .iter()
                    .position(|&x| x == eid)
                    .unwrap();
                let sgn = mesh.edge_signs(k)[j];
                let off = dofs.sigma_hat_offset(eid);
                for (t, wq) in rule.points.iter().zip(&rule.weights) {
                    let mu = edge_basis(disc.space.p, e.length, *t);
                    for (a, m) in mu.iter().enumerate() {
                        out[off + a] += w * sgn * wq * e.length * m;
                    }
                }
            }
        }
    }
    out
}

/// `J(u_h)`.
pub fn evaluate_target(jvec: &[f64], x: &[f64]) -> f64 {
    jvec.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Solve the adjoint problem with the primal normal matrix.
pub fn solve_dual(sys: &mut DpgSystem, jvec: &[f64]) -> Result<DualSolution> {
    check_len(sys.ndof(), jvec.len())?;
    let xi = if jvec.iter().all(|v| *v == 0.0) {
        vec![0.0; jvec.len()]
    } else {
        sys.solve_normal_rhs(jvec)?
    };
    let z = sys
        .blocks
        .par_iter()
        .map(|b| b.unwhiten(&(&b.whitened * b.gather(&xi))))
        .collect();
    Ok(DualSolution { xi, z })
}

/// Values of a test pair `(v, τ)` with derivatives at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TestPairValue {
    pub v: f64,
    pub tau: [f64; 2],
    pub grad_v: [f64; 2],
    pub div_tau: f64,
}

/// Evaluate the test pair with enriched coefficients `c = (v, τx, τy)`.
pub fn eval_test_pair(basis: &ElementBasis, c: &[f64], x: [f64; 2]) -> TestPairValue {
    let m = basis.len();
    let vals = basis.values(x);
    let grads = basis.gradients(x);
    let mut out = TestPairValue::default();
    for i in 0..m {
        out.v += c[i] * vals[i];
        out.tau[0] += c[m + i] * vals[i];
        out.tau[1] += c[2 * m + i] * vals[i];
        out.grad_v[0] += c[i] * grads[i][0];
        out.grad_v[1] += c[i] * grads[i][1];
        out.div_tau += c[m + i] * grads[i][0] + c[2 * m + i] * grads[i][1];
    }
    out
}

/// Data of the adjoint problem on the boundary: `v = g*`.
fn dual_boundary_value(target: &Target, tag: u32) -> f64 {
    -target.flux_weight(tag)
}

/// Explicit dual indicator per element: adjoint residual in `L²(K)` plus
/// scaled jumps of `τ·n` (interior edges) and of `v` (all edges).
pub fn eta_star(
    mesh: &Triangulation,
    disc: &Discretization,
    problem: &Problem,
    target: &Target,
    z: &[Vec<f64>],
) -> Result<Vec<f64>> {
    check_len(mesh.num_elements(), z.len())?;
    let edge_rule = SegmentRule::new(2 * disc.space.test_order() + 1)?;
    let eps = problem.epsilon;
    let beta = problem.beta;
    Ok((0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let basis = ElementBasis::new(&disc.test, &mesh.element_points(k));
            let mut vol = 0.0;
            for (xi, w) in disc
                .volume_rule
                .points
                .iter()
                .zip(&disc.volume_rule.weights)
            {
                let x = basis.map.to_physical(*xi);
                let d = eval_test_pair(&basis, &z[k], x);
                let r1 = [d.tau[0] / eps + d.grad_v[0], d.tau[1] / eps + d.grad_v[1]];
                let r2 = d.div_tau
                    - (beta[0] * d.grad_v[0] + beta[1] * d.grad_v[1])
                    - target.volume_weight(x);
                vol += w * basis.map.det * (r1[0] * r1[0] + r1[1] * r1[1] + r2 * r2);
            }
            let mut jumps = 0.0;
            for (j, &eid) in mesh.element_edges(k).iter().enumerate() {
                let e = &mesh.edges()[eid];
                let pts = mesh.element_points(k);
                let (pa, pb) = (pts[j], pts[(j + 1) % 3]);
                let other = mesh.neighbor(k, j);
                let obasis = other.map(|o| ElementBasis::new(&disc.test, &mesh.element_points(o)));
                let (mut jt, mut jv) = (0.0, 0.0);
                for (s, w) in edge_rule.points.iter().zip(&edge_rule.weights) {
                    let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                    let d = eval_test_pair(&basis, &z[k], x);
                    let n = e.normal;
                    match (other, &obasis) {
                        (Some(o), Some(ob)) => {
                            let q = eval_test_pair(ob, &z[o], x);
                            let dt = (d.tau[0] - q.tau[0]) * n[0] + (d.tau[1] - q.tau[1]) * n[1];
                            let dv = d.v - q.v;
                            jt += w * e.length * dt * dt;
                            jv += w * e.length * dv * dv;
                        }
                        _ => {
                            let dv = d.v - dual_boundary_value(target, e.tag.unwrap_or(0));
                            jv += w * e.length * dv * dv;
                        }
                    }
                }
                jumps += e.length * jt + jv / e.length;
            }
            (vol + jumps).sqrt()
        })
        .collect())
}

/// `η̃_K = η*_K η_K`.
pub fn goal_indicator(eta: &[f64], eta_star: &[f64]) -> Result<Vec<f64>> {
    check_len(eta.len(), eta_star.len())?;
    Ok(eta.iter().zip(eta_star).map(|(a, b)| a * b).collect())
}

/// Neighbourhood used to fit element `k`: the element and its edge neighbours.
fn edge_patch(mesh: &Triangulation, k: usize) -> Vec<usize> {
    let mut p = vec![k];
    p.extend(mesh.neighbors(k).into_iter().flatten());
    p
}

fn vertex_patch(mesh: &Triangulation, vertex_elements: &[Vec<usize>], k: usize) -> Vec<usize> {
    let mut p = vec![k];
    for &v in &mesh.triangles()[k] {
        p.extend_from_slice(&vertex_elements[v]);
    }
    p.sort_unstable();
    p.dedup();
    p
}

/// Least-squares fit over a patch; returns `None` if the design is rank deficient.
fn fit_patch(
    mesh: &Triangulation,
    disc: &Discretization,
    z: &[Vec<f64>],
    k: usize,
    patch: &[usize],
) -> Option<Vec<f64>> {
    let q = disc.space.test_order();
    let nb = dim(q);
    let c = mesh.centroid(k);
    let h = mesh.edges()[mesh.element_edges(k)[0]]
        .length
        .max(mesh.edges()[mesh.element_edges(k)[1]].length)
        .max(mesh.edges()[mesh.element_edges(k)[2]].length);
    let rule = &disc.volume_rule;
    let npts = patch.len() * rule.len();
    if npts < nb {
        return None;
    }
    let exps: Vec<(usize, usize)> = exponents(q).collect();
    let mut design = Mat::<f64>::zeros(npts, nb);
    let mut rhs = Mat::<f64>::zeros(npts, 3);
    let mut row = 0;
    for &o in patch {
        let basis = ElementBasis::new(&disc.test, &mesh.element_points(o));
        for xi in &rule.points {
            let x = basis.map.to_physical(*xi);
            let (dx, dy) = ((x[0] - c[0]) / h, (x[1] - c[1]) / h);
            for (a, &(ea, eb)) in exps.iter().enumerate() {
                design[(row, a)] = dx.powi(ea as i32) * dy.powi(eb as i32);
            }
            let d = eval_test_pair(&basis, &z[o], x);
            rhs[(row, 0)] = d.v;
            rhs[(row, 1)] = d.tau[0];
            rhs[(row, 2)] = d.tau[1];
            row += 1;
        }
    }
    let qr = design.qr();
    let r = qr.R();
    let diag: Vec<f64> = (0..nb).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > 1e-10 * dmax) {
        return None;
    }
    use faer::linalg::solvers::SolveLstsq;
    let sol = qr.solve_lstsq(&rhs);
    // project the fitted polynomials onto the test basis of K
    let basis = ElementBasis::new(&disc.test, &mesh.element_points(k));
    let m = basis.len();
    let mut out = vec![0.0; 3 * m];
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let x = basis.map.to_physical(*xi);
        let (dx, dy) = ((x[0] - c[0]) / h, (x[1] - c[1]) / h);
        let mono: Vec<f64> = exps
            .iter()
            .map(|&(a, b)| dx.powi(a as i32) * dy.powi(b as i32))
            .collect();
        let f: [f64; 3] =
            std::array::from_fn(|comp| (0..nb).map(|a| mono[a] * sol[(a, comp)]).sum());
        let psi = basis.values(x);
        let wq = w * basis.map.det;
        for i in 0..m {
            for comp in 0..3 {
                out[comp * m + i] += wq * f[comp] * psi[i];
            }
        }
    }
    Some(out)
}

/// Per-element enriched dual field fitted on first-level neighbourhoods.
pub fn patch_reconstruct(
    mesh: &Triangulation,
    disc: &Discretization,
    z: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    check_len(mesh.num_elements(), z.len())?;
    let vertex_elements = mesh.vertex_elements();
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let patch = edge_patch(mesh, k);
            if patch.len() < 2 && mesh.num_elements() > 1 {
                return Err(Error::Reconstruction(k));
            }
            fit_patch(mesh, disc, z, k, &patch)
                .or_else(|| fit_patch(mesh, disc, z, k, &vertex_patch(mesh, &vertex_elements, k)))
                .ok_or(Error::Reconstruction(k))
        })
        .collect()
}

/// `|Σ_K (B_K x - l_K) · c_K|` with `c_K` enriched test coefficients.
pub fn dwr_estimate(sys: &DpgSystem, x: &[f64], dual: &[Vec<f64>]) -> Result<f64> {
    check_len(sys.blocks.len(), dual.len())?;
    let total: f64 = sys
        .blocks
        .par_iter()
        .zip(dual.par_iter())
        .map(|(b, c)| {
            // B x - l = L (L⁻¹ B x - L⁻¹ l)
            let r = &b.factor * b.residual(x);
            let c = Col::from_fn(c.len(), |i| c[i]);
            (0..r.nrows()).map(|i| r[i] * c[i]).sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total.abs())
}

/// `L²(K)` projection of a callable test pair onto the enriched basis.
pub fn project_test_pair(
    mesh: &Triangulation,
    disc: &Discretization,
    k: usize,
    f: impl Fn([f64; 2]) -> [f64; 3],
) -> Vec<f64> {
    let map = AffineMap::new(&mesh.element_points(k));
    let basis = ElementBasis::new(&disc.test, &mesh.element_points(k));
    let m = basis.len();
    let mut out = vec![0.0; 3 * m];
    for (xi, w) in disc
        .volume_rule
        .points
        .iter()
        .zip(&disc.volume_rule.weights)
    {
        let x = map.to_physical(*xi);
        let v = f(x);
        let psi = basis.values(x);
        for i in 0..m {
            for c in 0..3 {
                out[c * m + i] += w * map.det * v[c] * psi[i];
            }
        }
    }
    out
}
