//! The outer adaptation loop, per-cycle records and convergence fits.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::{analyse, error_density_poly, minimize, AnisotropyResult};
use crate::assembly::{Discretization, SpaceSpec};
use crate::basis::ElementBasis;
use crate::cases::TestCase;
use crate::continuous::{plan, predicted_error, AdaptPlan, ALPHA};
use crate::error::{Error, Result};
use crate::field::MetricField;
use crate::mesh::Triangulation;
use crate::remesh::{
    export_external, import_external, remesh, Backend, ExternalFiles, RemeshConfig,
};
use crate::solve::{assemble, field_errors, DpgSystem, SolverKind};
use crate::star::{
    dwr_estimate, eta_star, evaluate_target, goal_indicator, patch_reconstruct, solve_dual,
    target_vector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Solution,
    Goal,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "solution" => Ok(Self::Solution),
            "goal" => Ok(Self::Goal),
            _ => Err(Error::Config(format!("unknown adaptation mode `{s}`"))),
        }
    }
}

/// One row of a study.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub ne: usize,
    pub ndof: usize,
    pub err_l2_u: Option<f64>,
    pub err_l2_sigma: Option<f64>,
    pub energy_error: f64,
    pub e_star: f64,
    pub target_error: Option<f64>,
    pub dwr: Option<f64>,
    pub h_min: f64,
    pub condition: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct StudyRecord {
    pub rows: Vec<CycleRecord>,
}

impl StudyRecord {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| match name {
                "ne" => Some(r.ne as f64),
                "ndof" => Some(r.ndof as f64),
                "err_l2_u" => r.err_l2_u,
                "err_l2_sigma" => r.err_l2_sigma,
                "energy_error" => Some(r.energy_error),
                "e_star" => Some(r.e_star),
                "target_error" => r.target_error,
                "dwr" => r.dwr,
                "h_min" => Some(r.h_min),
                "condition" => r.condition,
                _ => None,
            })
            .collect()
    }

    pub fn ndofs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ndof as f64).collect()
    }
}

#[derive(Clone, Debug)]
pub struct AdaptSettings {
    pub space: SpaceSpec,
    pub cycles: usize,
    /// Complexity used for the first plan.
    pub complexity: f64,
    pub growth: f64,
    pub mode: Mode,
    pub regularize: bool,
    pub solver: SolverKind,
    pub remesh: RemeshConfig,
    pub condition: bool,
    /// Keep every mesh of the sequence in the result.
    pub keep_meshes: bool,
    /// Write meshes, VTK and CSV here when set.
    pub output: Option<PathBuf>,
    /// External generator command for [`Backend::External`].
    pub generator: Option<String>,
}

impl AdaptSettings {
    pub fn new(space: SpaceSpec) -> Self {
        Self {
            space,
            cycles: 10,
            complexity: 32.0,
            growth: crate::continuous::DEFAULT_GROWTH,
            mode: Mode::Solution,
            regularize: false,
            solver: SolverKind::Normal,
            remesh: RemeshConfig::default(),
            condition: false,
            keep_meshes: false,
            output: None,
            generator: None,
        }
    }
}

/// Everything computed on one mesh.
pub struct CycleOutcome {
    pub record: CycleRecord,
    pub system: DpgSystem,
    pub solution: Vec<f64>,
    /// Energy indicator per element.
    pub eta: Vec<f64>,
    /// Indicator that drives the element sizes.
    pub sizing_eta: Vec<f64>,
    pub anisotropy: Vec<AnisotropyResult>,
}

pub struct StudyResult {
    pub record: StudyRecord,
    pub meshes: Vec<Triangulation>,
    pub final_mesh: Triangulation,
    pub plans: Vec<AdaptPlan>,
}

/// Minimum element altitude.
pub fn h_min(mesh: &Triangulation) -> f64 {
    (0..mesh.num_elements())
        .map(|k| mesh.min_altitude(k))
        .fold(f64::INFINITY, f64::min)
}

/// Solve, estimate and analyse on a single mesh.
pub fn run_cycle(
    case: &TestCase,
    mesh: &Triangulation,
    disc: &Discretization,
    settings: &AdaptSettings,
    cycle: usize,
) -> Result<CycleOutcome> {
    let clock = std::time::Instant::now();
    let mut sys = assemble(mesh, &case.problem, disc)?;
    let t_assemble = clock.elapsed();
    let x = sys.solve(settings.solver)?;
    let t_solve = clock.elapsed();
    let rep = sys.error_representation(&x);
    let energy = rep.global();
    let (err_u, err_s) = match (&case.exact_u, &case.exact_sigma) {
        (Some(u), Some(s)) => {
            let (a, b) = field_errors(mesh, disc, &x, u.as_ref(), s.as_ref(), case.feature_scale);
            (Some(a), Some(b))
        }
        _ => (None, None),
    };
    let mut sizing = rep.eta.clone();
    let (mut target_error, mut dwr) = (None, None);
    if let Some(target) = &case.target {
        let jvec = target_vector(mesh, disc, &sys, target);
        let jh = evaluate_target(&jvec, &x);
        target_error = case.exact_target.map(|j| (j - jh).abs());
        let dual = solve_dual(&mut sys, &jvec)?;
        let recon = patch_reconstruct(mesh, disc, &dual.z)?;
        dwr = Some(dwr_estimate(&sys, &x, &recon)?);
        if settings.mode == Mode::Goal {
            let star = eta_star(mesh, disc, &case.problem, target, &dual.z)?;
            sizing = goal_indicator(&rep.eta, &star)?;
        }
    } else if settings.mode == Mode::Goal {
        return Err(Error::Config(format!(
            "case `{}` has no target functional",
            case.name
        )));
    }
    let condition = if settings.condition {
        Some(sys.condition_estimate(settings.solver)?)
    } else {
        None
    };
    let t_estimate = clock.elapsed();
    let p = disc.space.p;
    let anisotropy: Vec<AnisotropyResult> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let basis = ElementBasis::new(&disc.test, &mesh.element_points(k));
            let area = mesh.area(k);
            let e = error_density_poly(&basis, &rep.coeffs[k], disc.space.derivative_weight(area));
            minimize(&analyse(&e), area / ALPHA)
        })
        .collect();
    log::debug!(
        "assemble {:?}, solve {:?}, estimate {:?}, anisotropy {:?}",
        t_assemble,
        t_solve - t_assemble,
        t_estimate - t_solve,
        clock.elapsed() - t_estimate
    );
    let ne = mesh.num_elements();
    let record = CycleRecord {
        cycle,
        ne,
        ndof: sys.ndof(),
        err_l2_u: err_u,
        err_l2_sigma: err_s,
        energy_error: energy,
        // optimal error at the complexity of the current mesh
        e_star: predicted_error(&rep.eta, ALPHA * ne as f64, p),
        target_error,
        dwr,
        h_min: h_min(mesh),
        condition,
    };
    Ok(CycleOutcome {
        record,
        system: sys,
        solution: x,
        eta: rep.eta,
        sizing_eta: sizing,
        anisotropy,
    })
}

/// Run the adaptation loop starting from `initial`.
pub fn adapt_loop(
    case: &TestCase,
    initial: Triangulation,
    settings: &AdaptSettings,
) -> Result<StudyResult> {
    let disc = Discretization::new(settings.space)?;
    let mut mesh = initial;
    let mut complexity = settings.complexity;
    let mut record = StudyRecord::default();
    let mut meshes = Vec::new();
    let mut plans = Vec::new();
    if let Some(dir) = &settings.output {
        std::fs::create_dir_all(dir)?;
    }
    for cycle in 0..settings.cycles {
        let out = run_cycle(case, &mesh, &disc, settings, cycle).map_err(|e| match e {
            Error::Solve(msg) => Error::Solve(format!("cycle {cycle}: {msg}")),
            other => other,
        })?;
        log::info!(
            "cycle {cycle}: ne {} ndof {} energy {:.3e} l2 {:?} target {:?}",
            out.record.ne,
            out.record.ndof,
            out.record.energy_error,
            out.record.err_l2_u,
            out.record.target_error
        );
        let areas: Vec<f64> = (0..mesh.num_elements()).map(|k| mesh.area(k)).collect();
        let pl = plan(
            &areas,
            &out.sizing_eta,
            &out.eta,
            &out.anisotropy,
            complexity,
            settings.space.p,
            settings.regularize,
        )?;
        if let Some(dir) = &settings.output {
            crate::report::write_cycle(dir, cycle, &mesh, &disc, &out, &pl)?;
        }
        record.rows.push(out.record);
        if settings.keep_meshes {
            meshes.push(mesh.clone());
        }
        if cycle + 1 < settings.cycles {
            let field = pl.vertex_field(&mesh)?;
            mesh = remesh_step(&mesh, &field, settings, cycle).map_err(|e| match e {
                Error::Remesh(msg) => Error::Remesh(format!("cycle {cycle}: {msg}")),
                other => other,
            })?;
            complexity *= settings.growth;
        }
        plans.push(pl);
    }
    if let Some(dir) = &settings.output {
        crate::report::write_csv(dir.join("study.csv"), &record)?;
    }
    Ok(StudyResult {
        record,
        meshes,
        final_mesh: mesh,
        plans,
    })
}

fn remesh_step(
    mesh: &Triangulation,
    field: &MetricField,
    settings: &AdaptSettings,
    cycle: usize,
) -> Result<Triangulation> {
    match settings.remesh.backend {
        Backend::Builtin => remesh(mesh, field, &settings.remesh),
        Backend::External => {
            let cmd = settings.generator.as_deref().ok_or_else(|| {
                Error::Config("external remesher selected without a generator command".into())
            })?;
            let dir = match &settings.output {
                Some(d) => d.join(format!("external_{cycle:03}")),
                None => std::env::temp_dir()
                    .join(format!("dpg-adapt-{}-{cycle:03}", std::process::id())),
            };
            let files = export_external(mesh, field, &dir)?;
            run_generator(cmd, &files)?;
            import_external(&files)
        }
    }
}

/// Invoke `cmd <mesh> <sol> <output>` through the shell.
pub fn run_generator(cmd: &str, files: &ExternalFiles) -> Result<()> {
    let status = std::process::Command::new("sh")
        .arg("-c")
        .arg(format!(
            "{cmd} \"{}\" \"{}\" \"{}\"",
            files.mesh.display(),
            files.metric.display(),
            files.output.display()
        ))
        .status()
        .map_err(|e| Error::Remesh(format!("cannot run generator: {e}")))?;
    if !status.success() {
        return Err(Error::Remesh(format!("generator exited with {status}")));
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log √ndof` over the last `window`
/// entries, with the coefficient of determination.
pub fn rate_fit(ndof: &[f64], values: &[f64], window: usize) -> Result<(f64, f64)> {
    crate::error::check_len(ndof.len(), values.len())?;
    if window < 2 || values.len() < window {
        return Err(Error::InvalidInput(format!(
            "need at least {window} (>= 2) entries, got {}",
            values.len()
        )));
    }
    let start = values.len() - window;
    let mut xs = Vec::with_capacity(window);
    let mut ys = Vec::with_capacity(window);
    for i in start..values.len() {
        if !(values[i] > 0.0 && ndof[i] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "non-positive value at entry {i}"
            )));
        }
        xs.push(0.5 * ndof[i].ln());
        ys.push(values[i].ln());
    }
    Ok(linear_fit(&xs, &ys))
}

/// Least-squares slope and R² of `log y` against `log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    crate::error::check_len(x.len(), y.len())?;
    if x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput(
            "need at least two positive pairs".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly))
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, r2)
}

/// Slope of `log √|K|` against `log r`, with `r` the centroid distance to `point`.
pub fn grading_fit(mesh: &Triangulation, point: [f64; 2]) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..mesh.num_elements() {
        let c = mesh.centroid(k);
        let r = (c[0] - point[0]).hypot(c[1] - point[1]);
        if r > 1e-8 {
            xs.push(r.ln());
            ys.push(0.5 * mesh.area(k).ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InvalidInput(
            "too few elements for a grading fit".into(),
        ));
    }
    Ok(linear_fit(&xs, &ys).0)
}
