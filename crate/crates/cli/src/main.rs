use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpg_adapt::assembly::{Discretization, TestNorm};
use dpg_adapt::cases::case;
use dpg_adapt::config::RunConfig;
use dpg_adapt::field::MetricField;
use dpg_adapt::mesh::{read_mesh, read_metric, write_mesh, Triangulation};
use dpg_adapt::remesh::{export_external, import_external, remesh, Backend};
use dpg_adapt::report::{csv_string, write_csv};
use dpg_adapt::solve::SolverKind;
use dpg_adapt::study::{adapt_loop, run_cycle, run_generator, Mode, StudyRecord};
use dpg_adapt::Error;

#[derive(Parser)]
#[command(
    name = "dpg-adapt",
    version,
    about = "Adaptive DPG solver with metric-based remeshing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once on the starting mesh.
    Solve(Common),
    /// Run the adaptation loop.
    Adapt(Common),
    /// Run the adaptation loop for several polynomial orders.
    Study {
        #[command(flatten)]
        common: Common,
        /// Orders to sweep.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
    },
    /// Build a metric-conforming mesh from a mesh and a vertex metric file.
    Remesh {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "builtin")]
        remesher: Backend,
        /// External generator command, called as `cmd <mesh> <sol> <out>`.
        #[arg(long)]
        generator: Option<String>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key-value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    dp: Option<usize>,
    #[arg(long)]
    norm: Option<TestNorm>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    n0: Option<f64>,
    #[arg(long)]
    growth: Option<f64>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    regularize: bool,
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    remesher: Option<Backend>,
    /// Cells per unit length of the starting mesh.
    #[arg(long)]
    divisions: Option<usize>,
    /// Starting mesh file instead of the structured mesh.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    condition: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> dpg_adapt::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.case {
            c.case = v.clone();
        }
        macro_rules! take {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$g = v; })* };
        }
        take!(p => p, dp => dp, norm => norm, cycles => cycles, n0 => n0, growth => growth,
              mode => mode, solver => solver, remesher => remesher, divisions => initial_divisions);
        c.regularize |= self.regularize;
        c.condition |= self.condition;
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        Ok(c)
    }

    fn start_mesh(
        &self,
        cfg: &RunConfig,
        domain: dpg_adapt::cases::Domain,
    ) -> dpg_adapt::Result<Triangulation> {
        match &self.mesh {
            Some(p) => read_mesh(p),
            None => domain.initial_mesh(cfg.initial_divisions),
        }
    }
}

fn run_adapt(common: &Common, cfg: &RunConfig) -> dpg_adapt::Result<StudyRecord> {
    let tc = case(&cfg.case, &cfg.case_params())?;
    let mesh = common.start_mesh(cfg, tc.domain)?;
    let settings = cfg.settings()?;
    Ok(adapt_loop(&tc, mesh, &settings)?.record)
}

fn run(cli: Cli) -> dpg_adapt::Result<()> {
    match cli.command {
        Command::Solve(common) => {
            let cfg = common.resolve()?;
            let tc = case(&cfg.case, &cfg.case_params())?;
            let mesh = common.start_mesh(&cfg, tc.domain)?;
            let settings = cfg.settings()?;
            let disc = Discretization::new(settings.space)?;
            let out = run_cycle(&tc, &mesh, &disc, &settings, 0)?;
            let rec = StudyRecord {
                rows: vec![out.record],
            };
            if let Some(dir) = &cfg.out {
                std::fs::create_dir_all(dir)?;
                write_csv(dir.join("solve.csv"), &rec)?;
            }
            print!("{}", csv_string(&rec));
        }
        Command::Adapt(common) => {
            let cfg = common.resolve()?;
            print!("{}", csv_string(&run_adapt(&common, &cfg)?));
        }
        Command::Study { common, orders } => {
            let base = common.resolve()?;
            for p in orders {
                let mut cfg = base.clone();
                cfg.p = p;
                cfg.out = base.out.as_ref().map(|d| d.join(format!("p{p}")));
                let rec = run_adapt(&common, &cfg)?;
                println!("# p = {p}");
                print!("{}", csv_string(&rec));
            }
        }
        Command::Remesh {
            mesh,
            metric,
            out,
            remesher,
            generator,
        } => {
            let m = read_mesh(&mesh)?;
            let field = MetricField::new(read_metric(&metric)?)?;
            let result = match remesher {
                Backend::Builtin => remesh(&m, &field, &Default::default())?,
                Backend::External => {
                    let cmd = generator.ok_or_else(|| {
                        Error::Config("--generator is required with the external remesher".into())
                    })?;
                    let dir = out
                        .parent()
                        .map(|p| p.join("external"))
                        .unwrap_or_else(|| "external".into());
                    let files = export_external(&m, &field, dir)?;
                    run_generator(&cmd, &files)?;
                    import_external(&files)?
                }
            };
            write_mesh(&result, &out)?;
            eprintln!("{} -> {} elements", m.num_elements(), result.num_elements());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Remesh(_) => 4,
        Error::Solve(_) | Error::Assembly { .. } | Error::Reconstruction(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
