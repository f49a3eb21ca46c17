//! Element-local ultra-weak DPG systems for `-ε Δu + ∇·(β u) = s`.
//!
//! Trial variables per element are `σ = ε∇u` and `u`; on the skeleton every
//! edge carries a normal-flux trace `σ̂` and interior edges carry a trace `λ`
//! of `u`. Test functions are pairs `(v, τ)` from an enriched polynomial space.

use std::sync::Arc;

use faer::{Col, Mat};

use crate::basis::{edge_basis, reference_edge_point, AffineMap, ReferenceBasis, Tabulation};
use crate::error::{Error, Result};
use crate::mesh::Triangulation;
use crate::poly::dim;
use crate::quadrature::{SegmentRule, TriangleRule};

pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestNorm {
    /// `‖v‖² + ‖∇v‖² + ‖τ‖² + ‖∇·τ‖²`.
    Standard,
    /// Derivative terms weighted by `sqrt(|K|)`.
    #[default]
    Scaled,
}

impl std::str::FromStr for TestNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "standard_v" => Ok(Self::Standard),
            "scaled" | "scaled_v" => Ok(Self::Scaled),
            _ => Err(Error::Config(format!("unknown norm `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceSpec {
    /// Trial polynomial order.
    pub p: usize,
    /// Test enrichment.
    pub dp: usize,
    pub norm: TestNorm,
}

impl SpaceSpec {
    pub fn new(p: usize, dp: usize, norm: TestNorm) -> Result<Self> {
        if p < 1 || dp < 1 {
            return Err(Error::InvalidInput(format!(
                "need p >= 1 and dp >= 1, got p={p}, dp={dp}"
            )));
        }
        if 2 * (p + dp) + 2 > crate::quadrature::MAX_DEGREE {
            return Err(Error::UnsupportedDegree(2 * (p + dp) + 2));
        }
        Ok(Self { p, dp, norm })
    }

    pub fn test_order(&self) -> usize {
        self.p + self.dp
    }

    pub fn trial_dim(&self) -> usize {
        dim(self.p)
    }

    pub fn test_dim(&self) -> usize {
        dim(self.test_order())
    }

    /// Number of trace functions per edge and variable.
    pub fn trace_dim(&self) -> usize {
        self.p + 1
    }

    /// Weight of the derivative terms in the test norm on an element of area `area`.
    pub fn derivative_weight(&self, area: f64) -> f64 {
        match self.norm {
            TestNorm::Standard => 1.0,
            TestNorm::Scaled => area.sqrt(),
        }
    }
}

/// Coefficients and data of the boundary value problem.
#[derive(Clone)]
pub struct Problem {
    pub epsilon: f64,
    pub beta: [f64; 2],
    pub source: ScalarFn,
    pub dirichlet: ScalarFn,
    pub pure_diffusion: bool,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("epsilon", &self.epsilon)
            .field("beta", &self.beta)
            .field("pure_diffusion", &self.pure_diffusion)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        epsilon: f64,
        beta: [f64; 2],
        source: ScalarFn,
        dirichlet: ScalarFn,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "diffusivity must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            beta,
            source,
            dirichlet,
            pure_diffusion: beta == [0.0, 0.0],
        })
    }

    /// `-ε Δu = s` with the given data.
    pub fn poisson(epsilon: f64, source: ScalarFn, dirichlet: ScalarFn) -> Result<Self> {
        Self::new(epsilon, [0.0, 0.0], source, dirichlet)
    }

    pub fn has_convection(&self) -> bool {
        !self.pure_diffusion && self.beta != [0.0, 0.0]
    }
}

/// Global numbering of trial unknowns.
///
/// Field unknowns come first, element by element, ordered `σx, σy, u`; trace
/// unknowns follow edge by edge, `σ̂` then `λ` (interior edges only).
#[derive(Clone, Debug)]
pub struct DofMap {
    field_dim: usize,
    trace_dim: usize,
    n_elements: usize,
    edge_offsets: Vec<usize>,
    edge_has_lambda: Vec<bool>,
    total: usize,
}

impl DofMap {
    pub fn new(mesh: &Triangulation, space: &SpaceSpec) -> Self {
        let field_dim = 3 * space.trial_dim();
        let trace_dim = space.trace_dim();
        let mut offset = mesh.num_elements() * field_dim;
        let mut edge_offsets = Vec::with_capacity(mesh.num_edges());
        let mut edge_has_lambda = Vec::with_capacity(mesh.num_edges());
        for e in mesh.edges() {
            edge_offsets.push(offset);
            let interior = !e.is_boundary();
            edge_has_lambda.push(interior);
            offset += trace_dim * if interior { 2 } else { 1 };
        }
        Self {
            field_dim,
            trace_dim,
            n_elements: mesh.num_elements(),
            edge_offsets,
            edge_has_lambda,
            total: offset,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn num_field_dofs(&self) -> usize {
        self.n_elements * self.field_dim
    }

    /// First index of the `σx, σy, u` block of element `k`.
    pub fn field_offset(&self, k: usize) -> usize {
        k * self.field_dim
    }

    /// First index of the `u` coefficients of element `k`.
    pub fn u_offset(&self, k: usize) -> usize {
        k * self.field_dim + 2 * self.field_dim / 3
    }

    pub fn sigma_hat_offset(&self, e: usize) -> usize {
        self.edge_offsets[e]
    }

    pub fn lambda_offset(&self, e: usize) -> Option<usize> {
        self.edge_has_lambda[e].then(|| self.edge_offsets[e] + self.trace_dim)
    }

    /// Global indices of the local columns of element `k`.
    pub fn element_dofs(&self, mesh: &Triangulation, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> =
            (self.field_offset(k)..self.field_offset(k) + self.field_dim).collect();
        for e in mesh.element_edges(k) {
            let o = self.edge_offsets[e];
            let n = self.trace_dim * if self.edge_has_lambda[e] { 2 } else { 1 };
            out.extend(o..o + n);
        }
        out
    }
}

/// Dense per-element blocks.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    /// Enriched stiffness, test functions × trial functions.
    pub stiffness: Mat<f64>,
    pub gram: Mat<f64>,
    pub load: Col<f64>,
    pub dofs: Vec<usize>,
}

/// Bases, quadrature and tabulations shared by every element.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub space: SpaceSpec,
    pub trial: ReferenceBasis,
    pub test: ReferenceBasis,
    pub volume_rule: TriangleRule,
    pub edge_rule: SegmentRule,
    trial_tab: Tabulation,
    test_tab: Tabulation,
    /// Test functions on each local edge at the edge rule points.
    test_edge_tab: [Vec<Vec<f64>>; 3],
}

impl Discretization {
    pub fn new(space: SpaceSpec) -> Result<Self> {
        let q = space.test_order();
        let volume_rule = TriangleRule::new(2 * q + 2)?;
        let edge_rule = SegmentRule::new(2 * q + 1)?;
        let trial = ReferenceBasis::new(space.p);
        let test = ReferenceBasis::new(q);
        let trial_tab = trial.tabulate(&volume_rule.points);
        let test_tab = test.tabulate(&volume_rule.points);
        let test_edge_tab = std::array::from_fn(|j| {
            edge_rule
                .points
                .iter()
                .map(|&s| test.values(reference_edge_point(j, s)))
                .collect()
        });
        Ok(Self {
            space,
            trial,
            test,
            volume_rule,
            edge_rule,
            trial_tab,
            test_tab,
            test_edge_tab,
        })
    }

    pub fn trial_dim(&self) -> usize {
        self.trial.len()
    }

    pub fn test_dim(&self) -> usize {
        self.test.len()
    }

    /// Rows of the local system: `v, τx, τy`.
    pub fn num_test(&self) -> usize {
        3 * self.test.len()
    }

    pub fn num_local_trial(&self, mesh: &Triangulation, k: usize) -> usize {
        let t = self.space.trace_dim();
        3 * self.trial.len()
            + mesh
                .element_edges(k)
                .iter()
                .map(|&e| {
                    if mesh.edges()[e].is_boundary() {
                        t
                    } else {
                        2 * t
                    }
                })
                .sum::<usize>()
    }

    /// Physical test values and gradients at the volume points of element `k`.
    pub(crate) fn physical_test(&self, map: &AffineMap) -> (Vec<Vec<f64>>, Vec<Vec<[f64; 2]>>) {
        let s = map.value_scale();
        let vals = self
            .test_tab
            .values
            .iter()
            .map(|row| row.iter().map(|v| s * v).collect())
            .collect();
        let grads = self
            .test_tab
            .gradients
            .iter()
            .map(|row| {
                row.iter()
                    .map(|g| {
                        let g = map.push_gradient(*g);
                        [s * g[0], s * g[1]]
                    })
                    .collect()
            })
            .collect();
        (vals, grads)
    }

    /// Test-space Gram matrix of element `k`.
    pub fn local_gram(&self, mesh: &Triangulation, k: usize) -> Mat<f64> {
        let map = AffineMap::new(&mesh.element_points(k));
        let m = self.test.len();
        let w_der = self.space.derivative_weight(map.area());
        let (vals, grads) = self.physical_test(&map);
        let mut mass = Mat::<f64>::zeros(m, m);
        let mut gxx = Mat::<f64>::zeros(m, m);
        let mut gxy = Mat::<f64>::zeros(m, m);
        let mut gyy = Mat::<f64>::zeros(m, m);
        for (q, wq) in self.volume_rule.weights.iter().enumerate() {
            let w = wq * map.det;
            let (v, g) = (&vals[q], &grads[q]);
            for i in 0..m {
                for j in 0..=i {
                    mass[(i, j)] += w * v[i] * v[j];
                    gxx[(i, j)] += w * g[i][0] * g[j][0];
                    gyy[(i, j)] += w * g[i][1] * g[j][1];
                }
                for j in 0..m {
                    gxy[(i, j)] += w * g[i][0] * g[j][1];
                }
            }
        }
        let mut gram = Mat::<f64>::zeros(3 * m, 3 * m);
        for i in 0..m {
            for j in 0..=i {
                let (mm, xx, yy) = (mass[(i, j)], gxx[(i, j)], gyy[(i, j)]);
                let vv = mm + w_der * (xx + yy);
                let tx = mm + w_der * xx;
                let ty = mm + w_der * yy;
                for (o, val) in [(0, vv), (m, tx), (2 * m, ty)] {
                    gram[(o + i, o + j)] = val;
                    gram[(o + j, o + i)] = val;
                }
            }
            for j in 0..m {
                // (∇·τ, ∇·τ) couples τx and τy through ∂xψ_i ∂yψ_j
                let val = w_der * gxy[(i, j)];
                gram[(m + i, 2 * m + j)] = val;
                gram[(2 * m + j, m + i)] = val;
            }
        }
        gram
    }

    /// Enriched stiffness and load of element `k`.
    pub fn local_stiffness_load(
        &self,
        mesh: &Triangulation,
        problem: &Problem,
        k: usize,
    ) -> Result<(Mat<f64>, Col<f64>)> {
        let pts = mesh.element_points(k);
        let map = AffineMap::new(&pts);
        if !(map.det > 0.0) {
            return Err(Error::Assembly {
                element: k,
                msg: "element is not counterclockwise".into(),
            });
        }
        let m = self.test.len();
        let n = self.trial.len();
        let t = self.space.trace_dim();
        let ncols = self.num_local_trial(mesh, k);
        let mut b = Mat::<f64>::zeros(3 * m, ncols);
        let mut l = Col::<f64>::zeros(3 * m);
        let s = map.value_scale();
        let (tvals, tgrads) = self.physical_test(&map);
        let conv = problem.has_convection();
        let beta = problem.beta;
        let inv_eps = 1.0 / problem.epsilon;
        let (cu, vo, txo, tyo) = (2 * n, 0, m, 2 * m);

        for (q, wq) in self.volume_rule.weights.iter().enumerate() {
            let w = wq * map.det;
            let x = map.to_physical(self.volume_rule.points[q]);
            let src = (problem.source)(x);
            let (psi, dpsi) = (&tvals[q], &tgrads[q]);
            let phi: Vec<f64> = self.trial_tab.values[q].iter().map(|v| s * v).collect();
            for i in 0..m {
                let (gx, gy) = (dpsi[i][0], dpsi[i][1]);
                let bdotg = beta[0] * gx + beta[1] * gy;
                l[vo + i] += w * src * psi[i];
                for j in 0..n {
                    let f = w * phi[j];
                    // (σ, ∇v)
                    b[(vo + i, j)] += f * gx;
                    b[(vo + i, n + j)] += f * gy;
                    if conv {
                        b[(vo + i, cu + j)] -= f * bdotg;
                    }
                    // (σ/ε, τ) + (u, ∇·τ)
                    b[(txo + i, j)] += f * inv_eps * psi[i];
                    b[(tyo + i, n + j)] += f * inv_eps * psi[i];
                    b[(txo + i, cu + j)] += f * gx;
                    b[(tyo + i, cu + j)] += f * gy;
                }
            }
        }

        let tri = mesh.triangles()[k];
        let signs = mesh.edge_signs(k);
        let mut col = 3 * n;
        for (j, &eid) in mesh.element_edges(k).iter().enumerate() {
            let edge = &mesh.edges()[eid];
            let sgn = signs[j];
            let nk = [sgn * edge.normal[0], sgn * edge.normal[1]];
            let bn = beta[0] * nk[0] + beta[1] * nk[1];
            let forward = tri[j] < tri[(j + 1) % 3];
            let h = edge.length;
            let (pa, pb) = (pts[j], pts[(j + 1) % 3]);
            let interior = !edge.is_boundary();
            let (c_hat, c_lam) = (col, col + t);
            for (q, (&sq, &wq)) in self
                .edge_rule
                .points
                .iter()
                .zip(&self.edge_rule.weights)
                .enumerate()
            {
                let w = wq * h;
                let psi: Vec<f64> = self.test_edge_tab[j][q].iter().map(|v| s * v).collect();
                let tp = if forward { sq } else { 1.0 - sq };
                let mu = edge_basis(self.space.p, h, tp);
                if interior {
                    for i in 0..m {
                        for (a, mu_a) in mu.iter().enumerate() {
                            let f = w * mu_a * psi[i];
                            b[(vo + i, c_hat + a)] -= sgn * f;
                            b[(txo + i, c_lam + a)] -= nk[0] * f;
                            b[(tyo + i, c_lam + a)] -= nk[1] * f;
                            if conv {
                                b[(vo + i, c_lam + a)] += bn * f;
                            }
                        }
                    }
                } else {
                    let x = [pa[0] + sq * (pb[0] - pa[0]), pa[1] + sq * (pb[1] - pa[1])];
                    let g = (problem.dirichlet)(x);
                    for i in 0..m {
                        for (a, mu_a) in mu.iter().enumerate() {
                            b[(vo + i, c_hat + a)] -= sgn * w * mu_a * psi[i];
                        }
                        let f = w * g * psi[i];
                        l[txo + i] += nk[0] * f;
                        l[tyo + i] += nk[1] * f;
                        if conv {
                            l[vo + i] -= bn * f;
                        }
                    }
                }
            }
            col += if interior { 2 * t } else { t };
        }
        Ok((b, l))
    }

    pub fn local_system(
        &self,
        mesh: &Triangulation,
        problem: &Problem,
        dofs: &DofMap,
        k: usize,
    ) -> Result<LocalSystem> {
        let (stiffness, load) = self.local_stiffness_load(mesh, problem, k)?;
        Ok(LocalSystem {
            stiffness,
            gram: self.local_gram(mesh, k),
            load,
            dofs: dofs.element_dofs(mesh, k),
        })
    }
}
