//! Global DPG systems: normal equations, discrete least squares, optional
//! static condensation, error representation and conditioning.

use faer::linalg::triangular_solve;
use faer::prelude::*;
use faer::sparse::linalg::solvers::Llt as SparseLlt;
use faer::sparse::{SparseColMat, SymbolicSparseColMat, Triplet};
use faer::{Col, Mat, Par, Side};
use rayon::prelude::*;

use crate::assembly::{Discretization, DofMap, Problem};
use crate::error::{Error, Result};
use crate::mesh::Triangulation;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Sparse Cholesky on `Bᵀ G⁻¹ B`.
    #[default]
    Normal,
    /// Sparse QR on the whitened blocks `L⁻¹ B`.
    Dls,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "dls" => Ok(Self::Dls),
            _ => Err(Error::Config(format!("unknown solver `{s}`"))),
        }
    }
}

/// Element blocks after whitening with the Cholesky factor of the Gram matrix.
#[derive(Clone, Debug)]
pub struct ElementBlock {
    /// Lower Cholesky factor `L` of `G_K`.
    pub factor: Mat<f64>,
    /// `L⁻¹ B_K`.
    pub whitened: Mat<f64>,
    /// `L⁻¹ l_K`.
    pub rhs: Col<f64>,
    pub dofs: Vec<usize>,
}

impl ElementBlock {
    pub fn from_local(
        element: usize,
        gram: &Mat<f64>,
        stiffness: &Mat<f64>,
        load: &Col<f64>,
        dofs: Vec<usize>,
    ) -> Result<Self> {
        let llt = gram.llt(Side::Lower).map_err(|e| Error::Assembly {
            element,
            msg: format!("Gram matrix is not positive definite: {e:?}"),
        })?;
        let factor = llt.L().to_owned();
        let mut whitened = stiffness.clone();
        triangular_solve::solve_lower_triangular_in_place(
            factor.as_ref(),
            whitened.as_mut(),
            Par::Seq,
        );
        let mut rhs = Mat::from_fn(load.nrows(), 1, |i, _| load[i]);
        triangular_solve::solve_lower_triangular_in_place(factor.as_ref(), rhs.as_mut(), Par::Seq);
        Ok(Self {
            factor,
            whitened,
            rhs: Col::from_fn(load.nrows(), |i| rhs[(i, 0)]),
            dofs,
        })
    }

    /// Gather the local trial coefficients from a global vector.
    pub fn gather(&self, x: &[f64]) -> Col<f64> {
        Col::from_fn(self.dofs.len(), |i| x[self.dofs[i]])
    }

    /// Whitened residual `L⁻¹ (B x - l)`.
    pub fn residual(&self, x: &[f64]) -> Col<f64> {
        &self.whitened * self.gather(x) - &self.rhs
    }

    /// Apply `L⁻ᵀ` to a whitened vector, giving enriched test coefficients.
    pub fn unwhiten(&self, r: &Col<f64>) -> Vec<f64> {
        let mut m = Mat::from_fn(r.nrows(), 1, |i, _| r[i]);
        triangular_solve::solve_upper_triangular_in_place(
            self.factor.transpose(),
            m.as_mut(),
            Par::Seq,
        );
        (0..r.nrows()).map(|i| m[(i, 0)]).collect()
    }
}

/// Compressed sparse column storage with a fixed pattern.
#[derive(Clone, Debug)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    /// Pattern covering every dense block `dofs × dofs`.
    pub fn with_block_pattern(n: usize, blocks: &[&[usize]]) -> Self {
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (b, dofs) in blocks.iter().enumerate() {
            for &d in dofs.iter() {
                touching[d].push(b);
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        let mut rows = Vec::new();
        for t in &touching {
            rows.clear();
            for &b in t {
                rows.extend_from_slice(blocks[b]);
            }
            rows.sort_unstable();
            rows.dedup();
            row_idx.extend_from_slice(&rows);
            col_ptr.push(row_idx.len());
        }
        let nnz = row_idx.len();
        Self {
            n,
            col_ptr,
            row_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn add_block(&mut self, dofs: &[usize], block: &Mat<f64>) {
        for (j, &c) in dofs.iter().enumerate() {
            let (lo, hi) = (self.col_ptr[c], self.col_ptr[c + 1]);
            let rows = &self.row_idx[lo..hi];
            for (i, &r) in dofs.iter().enumerate() {
                let pos = lo
                    + rows
                        .binary_search(&r)
                        .expect("entry outside the assembled pattern");
                self.values[pos] += block[(i, j)];
            }
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[p]] += self.values[p] * xc;
            }
        }
        y
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (lo, hi) = (self.col_ptr[c], self.col_ptr[c + 1]);
        match self.row_idx[lo..hi].binary_search(&r) {
            Ok(p) => self.values[lo + p],
            Err(_) => 0.0,
        }
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let sym = SymbolicSparseColMat::new_checked(
            self.n,
            self.n,
            self.col_ptr.clone(),
            None,
            self.row_idx.clone(),
        );
        SparseColMat::new(sym, self.values.clone())
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.n, self.n);
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[p], c)] = self.values[p];
            }
        }
        m
    }

    pub fn factor(&self) -> Result<SparseLlt<usize, f64>> {
        self.to_faer()
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solve(format!("Cholesky factorization failed: {e:?}")))
    }
}

/// Assembled global DPG system.
pub struct DpgSystem {
    pub dofs: DofMap,
    pub blocks: Vec<ElementBlock>,
    /// `Σ_K Bᵀ G⁻¹ B` scattered into global numbering.
    pub matrix: CscMatrix,
    /// `Σ_K Bᵀ G⁻¹ l`.
    pub rhs: Vec<f64>,
    factor: Option<SparseLlt<usize, f64>>,
}

impl std::fmt::Debug for DpgSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DpgSystem")
            .field("ndof", &self.dofs.len())
            .field("nnz", &self.matrix.nnz())
            .finish_non_exhaustive()
    }
}

/// Per-element error representation.
#[derive(Clone, Debug)]
pub struct ErrorRepresentation {
    /// Enriched test coefficients `(v, τx, τy)` of the Riesz representative.
    pub coeffs: Vec<Vec<f64>>,
    /// Local energy error `‖(ψ_v, ψ_τ)‖_{V,K}`.
    pub eta: Vec<f64>,
}

impl ErrorRepresentation {
    pub fn global(&self) -> f64 {
        self.eta.iter().map(|e| e * e).sum::<f64>().sqrt()
    }
}

/// Build all element blocks and the normal-equation matrix.
pub fn assemble(
    mesh: &Triangulation,
    problem: &Problem,
    disc: &Discretization,
) -> Result<DpgSystem> {
    let dofs = DofMap::new(mesh, &disc.space);
    let blocks: Vec<ElementBlock> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let ls = disc.local_system(mesh, problem, &dofs, k)?;
            ElementBlock::from_local(k, &ls.gram, &ls.stiffness, &ls.load, ls.dofs)
        })
        .collect::<Result<_>>()?;
    let (matrix, rhs) = normal_equations(dofs.len(), &blocks);
    Ok(DpgSystem {
        dofs,
        blocks,
        matrix,
        rhs,
        factor: None,
    })
}

fn normal_equations(n: usize, blocks: &[ElementBlock]) -> (CscMatrix, Vec<f64>) {
    let patterns: Vec<&[usize]> = blocks.iter().map(|b| b.dofs.as_slice()).collect();
    let mut matrix = CscMatrix::with_block_pattern(n, &patterns);
    let mut rhs = vec![0.0; n];
    let locals: Vec<(Mat<f64>, Col<f64>)> = blocks
        .par_iter()
        .map(|b| {
            (
                b.whitened.transpose() * &b.whitened,
                b.whitened.transpose() * &b.rhs,
            )
        })
        .collect();
    for (b, (a, r)) in blocks.iter().zip(&locals) {
        matrix.add_block(&b.dofs, a);
        for (i, &d) in b.dofs.iter().enumerate() {
            rhs[d] += r[i];
        }
    }
    (matrix, rhs)
}

fn to_vec(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn col_mat(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

impl DpgSystem {
    pub fn ndof(&self) -> usize {
        self.dofs.len()
    }

    fn normal_factor(&mut self) -> Result<&SparseLlt<usize, f64>> {
        if self.factor.is_none() {
            self.factor = Some(self.matrix.factor()?);
        }
        Ok(self.factor.as_ref().unwrap())
    }

    /// Solve `A x = rhs` with the normal-equation matrix.
    pub fn solve_normal_rhs(&mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_len(self.ndof(), rhs.len())?;
        let f = self.normal_factor()?;
        let x = to_vec(&f.solve(col_mat(rhs)));
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solve("non-finite solution".into()));
        }
        Ok(x)
    }

    /// Primal solve.
    pub fn solve(&mut self, method: SolverKind) -> Result<Vec<f64>> {
        match method {
            SolverKind::Normal => {
                let rhs = self.rhs.clone();
                self.solve_normal_rhs(&rhs)
            }
            SolverKind::Dls => self.solve_least_squares(),
        }
    }

    /// Triplets of the stacked whitened matrix and its right-hand side.
    pub fn least_squares_matrix(&self) -> (SparseColMat<usize, f64>, Vec<f64>) {
        let mut triplets = Vec::new();
        let mut rhs = Vec::new();
        let mut row0 = 0;
        for b in &self.blocks {
            let w = &b.whitened;
            for j in 0..w.ncols() {
                for i in 0..w.nrows() {
                    let v = w[(i, j)];
                    if v != 0.0 {
                        triplets.push(Triplet::new(row0 + i, b.dofs[j], v));
                    }
                }
            }
            rhs.extend((0..b.rhs.nrows()).map(|i| b.rhs[i]));
            row0 += w.nrows();
        }
        let m = SparseColMat::try_new_from_triplets(row0, self.ndof(), &triplets)
            .expect("valid triplets");
        (m, rhs)
    }

    fn solve_least_squares(&self) -> Result<Vec<f64>> {
        let (m, rhs) = self.least_squares_matrix();
        let qr = m
            .sp_qr()
            .map_err(|e| Error::Solve(format!("QR factorization failed: {e:?}")))?;
        let x = qr.solve_lstsq(col_mat(&rhs));
        let x = to_vec(&x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solve("non-finite least-squares solution".into()));
        }
        Ok(x)
    }

    /// Primal solve with element field unknowns eliminated locally.
    pub fn solve_condensed(&self) -> Result<Vec<f64>> {
        let nf = self.dofs.num_field_dofs();
        let nt = self.ndof() - nf;
        struct Local {
            schur: Mat<f64>,
            rhs: Col<f64>,
            trace: Vec<usize>,
            chol: Mat<f64>,
            a_it: Mat<f64>,
            b_i: Col<f64>,
            field: Vec<usize>,
        }
        let locals: Vec<Local> = self
            .blocks
            .par_iter()
            .enumerate()
            .map(|(k, b)| {
                let a = b.whitened.transpose() * &b.whitened;
                let r = b.whitened.transpose() * &b.rhs;
                let ni = b.dofs.iter().take_while(|&&d| d < nf).count();
                let nl = b.dofs.len();
                let a_ii = a.as_ref().submatrix(0, 0, ni, ni).to_owned();
                let a_it = a.as_ref().submatrix(0, ni, ni, nl - ni).to_owned();
                let a_tt = a.as_ref().submatrix(ni, ni, nl - ni, nl - ni).to_owned();
                let b_i = Col::from_fn(ni, |i| r[i]);
                let b_t = Col::from_fn(nl - ni, |i| r[ni + i]);
                let llt = a_ii.llt(Side::Lower).map_err(|e| Error::Assembly {
                    element: k,
                    msg: format!("singular interior block: {e:?}"),
                })?;
                let x_it = llt.solve(&a_it);
                let x_ib = llt.solve(&b_i);
                Ok(Local {
                    schur: &a_tt - a_it.transpose() * &x_it,
                    rhs: &b_t - a_it.transpose() * &x_ib,
                    trace: b.dofs[ni..].iter().map(|d| d - nf).collect(),
                    chol: llt.L().to_owned(),
                    a_it,
                    b_i,
                    field: b.dofs[..ni].to_vec(),
                })
            })
            .collect::<Result<_>>()?;
        let patterns: Vec<&[usize]> = locals.iter().map(|l| l.trace.as_slice()).collect();
        let mut s = CscMatrix::with_block_pattern(nt, &patterns);
        let mut rhs = vec![0.0; nt];
        for l in &locals {
            s.add_block(&l.trace, &l.schur);
            for (i, &d) in l.trace.iter().enumerate() {
                rhs[d] += l.rhs[i];
            }
        }
        let f = s.factor()?;
        let xt = to_vec(&f.solve(col_mat(&rhs)));
        let mut x = vec![0.0; self.ndof()];
        x[nf..].copy_from_slice(&xt);
        let fields: Vec<(Vec<usize>, Vec<f64>)> = locals
            .par_iter()
            .map(|l| {
                let t = Col::from_fn(l.trace.len(), |i| xt[l.trace[i]]);
                let r = &l.b_i - &l.a_it * t;
                let mut m = Mat::from_fn(r.nrows(), 1, |i, _| r[i]);
                triangular_solve::solve_lower_triangular_in_place(
                    l.chol.as_ref(),
                    m.as_mut(),
                    Par::Seq,
                );
                triangular_solve::solve_upper_triangular_in_place(
                    l.chol.transpose(),
                    m.as_mut(),
                    Par::Seq,
                );
                (l.field.clone(), to_vec(&m))
            })
            .collect();
        for (idx, vals) in fields {
            for (i, v) in idx.into_iter().zip(vals) {
                x[i] = v;
            }
        }
        Ok(x)
    }

    /// `ŷ_K = G_K⁻¹ (B_K x - l_K)` and its local test norms.
    pub fn error_representation(&self, x: &[f64]) -> ErrorRepresentation {
        let (coeffs, eta): (Vec<_>, Vec<_>) = self
            .blocks
            .par_iter()
            .map(|b| {
                let r = b.residual(x);
                let eta = r.norm_l2();
                (b.unwhiten(&r), eta)
            })
            .unzip();
        ErrorRepresentation { coeffs, eta }
    }

    /// `Σ_K B_Kᵀ G_K⁻¹ (B_K x - l_K)`, zero at the discrete solution.
    pub fn normal_residual(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndof()];
        for b in &self.blocks {
            let r = b.whitened.transpose() * b.residual(x);
            for (i, &d) in b.dofs.iter().enumerate() {
                out[d] += r[i];
            }
        }
        out
    }

    /// Estimated 2-norm condition number of the matrix the chosen method factors.
    pub fn condition_estimate(&mut self, method: SolverKind) -> Result<f64> {
        let matrix = self.matrix.clone();
        let factor = self.normal_factor()?;
        let k = spd_condition(&matrix, |v| to_vec(&factor.solve(col_mat(v))));
        Ok(match method {
            SolverKind::Normal => k,
            // singular values of the whitened matrix are square roots of
            // the eigenvalues of the normal matrix
            SolverKind::Dls => k.sqrt(),
        })
    }
}

const POWER_ITERATIONS: usize = 50;

fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64) * 0.73).sin())
        .collect();
    normalized(v)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    v
}

/// Largest over smallest eigenvalue of an SPD matrix: power iteration for the
/// top and inverse iteration (through `solve`) for the bottom.
pub fn spd_condition(a: &CscMatrix, solve: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let n = a.n;
    let mut v = start_vector(n);
    let mut lmax = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = a.mul_vec(&v);
        lmax = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        v = normalized(w);
    }
    let mut v = start_vector(n);
    let mut inv_min = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = solve(&v);
        inv_min = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        v = normalized(w);
    }
    lmax * inv_min
}

/// Assemble and solve in one call.
pub fn solve_primal(
    mesh: &Triangulation,
    problem: &Problem,
    disc: &Discretization,
    method: SolverKind,
) -> Result<(DpgSystem, Vec<f64>)> {
    let mut sys = assemble(mesh, problem, disc)?;
    let x = sys.solve(method)?;
    Ok((sys, x))
}

const MAX_ERROR_LEVELS: usize = 5;

/// `(σx, σy, u)` of the discrete solution at `x` inside element `k`.
pub fn eval_fields(
    mesh: &Triangulation,
    disc: &Discretization,
    x: &[f64],
    k: usize,
    point: [f64; 2],
) -> [f64; 3] {
    let dofs_per = 3 * disc.trial_dim();
    let basis = crate::basis::ElementBasis::new(&disc.trial, &mesh.element_points(k));
    let phi = basis.values(point);
    let n = phi.len();
    let off = k * dofs_per;
    std::array::from_fn(|c| (0..n).map(|a| x[off + c * n + a] * phi[a]).sum())
}

/// `L²` errors of `u_h` and `σ_h` against closed forms. Elements much larger
/// than `feature_scale` are integrated on sub-triangles.
pub fn field_errors(
    mesh: &Triangulation,
    disc: &Discretization,
    x: &[f64],
    u: &(dyn Fn([f64; 2]) -> f64 + Sync),
    sigma: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
    feature_scale: f64,
) -> (f64, f64) {
    let base = crate::quadrature::TriangleRule::new((disc.volume_rule.degree + 4).min(40))
        .expect("degree in range");
    let tables: Vec<std::sync::OnceLock<(crate::quadrature::TriangleRule, Vec<Vec<f64>>)>> = (0
        ..=MAX_ERROR_LEVELS)
        .map(|_| std::sync::OnceLock::new())
        .collect();
    let table = |level: usize| {
        tables[level].get_or_init(|| {
            let rule = base.subdivided(level);
            let values = rule.points.iter().map(|&p| disc.trial.values(p)).collect();
            (rule, values)
        })
    };
    let n = disc.trial_dim();
    let parts: Vec<(f64, f64)> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let pts = mesh.element_points(k);
            let diam = (0..3)
                .map(|i| (pts[(i + 1) % 3][0] - pts[i][0]).hypot(pts[(i + 1) % 3][1] - pts[i][1]))
                .fold(0.0, f64::max);
            let levels = if feature_scale > 0.0 {
                (diam / (4.0 * feature_scale))
                    .log2()
                    .ceil()
                    .clamp(0.0, MAX_ERROR_LEVELS as f64) as usize
            } else {
                0
            };
            let (rule, values) = table(levels);
            let map = crate::basis::AffineMap::new(&pts);
            let scale = map.value_scale();
            let off = k * 3 * n;
            let (mut eu, mut es) = (0.0, 0.0);
            for ((xi, w), phi) in rule.points.iter().zip(&rule.weights).zip(values) {
                let p = map.to_physical(*xi);
                let f: [f64; 3] = std::array::from_fn(|c| {
                    scale * (0..n).map(|a| x[off + c * n + a] * phi[a]).sum::<f64>()
                });
                let s = sigma(p);
                let wq = w * map.det;
                eu += wq * (u(p) - f[2]).powi(2);
                es += wq * ((s[0] - f[0]).powi(2) + (s[1] - f[1]).powi(2));
            }
            (eu, es)
        })
        .collect();
    let (eu, es) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    (eu.sqrt(), es.sqrt())
}
