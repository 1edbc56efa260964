//! Argument parsing and the `second`, `first` and `verify` commands.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use pleig_core::eigensolver::{second_eigenpair, EigenOptions};
use pleig_core::graph::{build_epsilon_graph, cut_metrics, graph_second_eigenpair, threshold_cut, EdgeWeights};
use pleig_core::mesh::Mesh;
use pleig_core::pde_solver::{first_eigenpair, BoundaryCondition, SolverConfig};

use crate::error::{exit, CliError, Result};
use crate::formats::{read_points_csv, write_field_csv, write_labels_csv, write_point_field_csv, write_text};
use crate::report::{to_json, FirstReport, SecondReport};
use crate::synth::planted_blobs;
use crate::verify;

/// Second eigenpair of the p-Laplacian on intervals, rectangles and graphs.
#[derive(Debug, Parser)]
#[command(name = "pleig", version, about)]
pub struct Cli {
    /// Command to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Top-level commands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Second eigenpair by the bipartition inverse power iteration.
    #[command(subcommand)]
    Second(SecondDomain),
    /// First Dirichlet eigenpair by the inverse power method.
    #[command(subcommand)]
    First(FirstDomain),
    /// Run a built-in verification suite.
    Verify(VerifyArgs),
}

/// Domains of the `second` command.
#[derive(Debug, Subcommand)]
pub enum SecondDomain {
    /// Interval (a, b).
    Interval {
        #[command(flatten)]
        interval: IntervalArgs,
        #[command(flatten)]
        bc: BcArg,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Rectangle (x0, x1) × (y0, y1).
    Rect {
        #[command(flatten)]
        rect: RectArgs,
        #[command(flatten)]
        bc: BcArg,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// ε-graph on a point cloud.
    Graph {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
}

/// Domains of the `first` command.
#[derive(Debug, Subcommand)]
pub enum FirstDomain {
    /// Interval (a, b).
    Interval {
        #[command(flatten)]
        interval: IntervalArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Rectangle (x0, x1) × (y0, y1).
    Rect {
        #[command(flatten)]
        rect: RectArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
}

/// Interval geometry.
#[derive(Debug, Args)]
pub struct IntervalArgs {
    /// Left end.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Right end.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Number of cells.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
}

/// Rectangle geometry.
#[derive(Debug, Args)]
pub struct RectArgs {
    /// Left edge.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Right edge.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub x1: f64,
    /// Bottom edge.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub y0: f64,
    /// Top edge.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub y1: f64,
    /// Cells along x.
    #[arg(long, default_value_t = 200)]
    pub nx: usize,
    /// Cells along y.
    #[arg(long, default_value_t = 200)]
    pub ny: usize,
}

/// Boundary condition flag.
#[derive(Debug, Args)]
pub struct BcArg {
    /// Boundary condition.
    #[arg(long, value_enum, default_value_t = Bc::Dirichlet)]
    pub bc: Bc,
}

/// Boundary condition names on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bc {
    /// `u = 0` on the boundary.
    Dirichlet,
    /// Zero conormal flux on the boundary.
    Neumann,
}

impl From<Bc> for BoundaryCondition {
    fn from(bc: Bc) -> Self {
        match bc {
            Bc::Dirichlet => BoundaryCondition::Dirichlet,
            Bc::Neumann => BoundaryCondition::Neumann,
        }
    }
}

/// Point cloud and graph construction.
#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
pub struct GraphArgs {
    /// CSV file with rows `x[,y[,z]]`.
    #[arg(long, group = "source")]
    pub points: Option<PathBuf>,
    /// Use N seeded points in two separated unit-square blobs instead of a file.
    #[arg(long, value_name = "N", group = "source")]
    pub planted: Option<usize>,
    /// Connection radius.
    #[arg(long)]
    pub eps: f64,
    /// Edge weights.
    #[arg(long, value_enum, default_value_t = Weights::Unit)]
    pub weights: Weights,
    /// Gaussian kernel width, required with `--weights gauss`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Seed of the synthetic point generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write `index,label` rows of the thresholded cut.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
}

/// Edge weight names on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    /// All weights 1.
    Unit,
    /// `exp(−d² / (2σ²))`.
    Gauss,
}

/// Solver settings and outputs shared by the solve commands.
#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Exponent p.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Relative tolerance of the outer iteration.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Iteration cap of the outer iteration.
    #[arg(long, default_value_t = 200)]
    pub max_outer: usize,
    /// Regularization ε of the linearized weight (default 1e-8 / diameter on meshes, 1e-14 on graphs).
    #[arg(long)]
    pub eps_reg: Option<f64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Write the eigenfunction as CSV.
    #[arg(long, value_name = "PATH")]
    pub field: Option<PathBuf>,
}

impl SolveArgs {
    fn options(&self) -> Result<EigenOptions> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.max_outer == 0 {
            return Err(CliError::Usage("--max-outer must be positive".into()));
        }
        Ok(EigenOptions { outer_tol: self.tol, max_outer: self.max_outer })
    }

    fn config(&self, mesh: Option<&Mesh>) -> SolverConfig {
        let mut cfg = match mesh {
            Some(m) => SolverConfig::for_mesh(self.p, m),
            None => SolverConfig::for_graph(self.p),
        };
        if let Some(eps) = self.eps_reg {
            cfg.eps_reg = eps;
        }
        cfg
    }

    fn emit_report(&self, json: &str, summary: &str) -> Result<()> {
        match &self.report {
            Some(path) => {
                write_text(path, json)?;
                println!("{summary}");
            }
            None => print!("{json}"),
        }
        Ok(())
    }
}

/// `verify` arguments.
#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name: 1d-closed-form, square-p2, neumann-p2, graph-fiedler or graph-rcc.
    #[arg(long)]
    pub suite: String,
    /// Exponents of the 1d-closed-form suite.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Seed of the random graphs in the graph-fiedler suite.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

impl IntervalArgs {
    fn mesh(&self) -> Result<Mesh> {
        Ok(Mesh::interval(self.a, self.b, self.n)?)
    }
}

impl RectArgs {
    fn mesh(&self) -> Result<Mesh> {
        Ok(Mesh::rectangle(self.x0, self.x1, self.y0, self.y1, self.nx, self.ny)?)
    }
}

fn converged_code(converged: bool) -> i32 {
    if converged {
        exit::SUCCESS
    } else {
        exit::NOT_CONVERGED
    }
}

fn run_second_mesh(mesh: &Mesh, bc: Bc, solve: &SolveArgs) -> Result<i32> {
    let options = solve.options()?;
    let r = second_eigenpair(mesh, bc.into(), &solve.config(Some(mesh)), &options)?;
    if let Some(path) = &solve.field {
        write_field_csv(path, &r.u2)?;
    }
    let summary = format!("lambda2 = {:.12e} after {} iterations (converged: {})", r.lambda2, r.iterations, r.converged);
    solve.emit_report(&to_json(&SecondReport::from_mesh(&r)), &summary)?;
    Ok(converged_code(r.converged))
}

fn load_points(graph: &GraphArgs) -> Result<Vec<Vec<f64>>> {
    match (&graph.points, graph.planted) {
        (Some(path), _) => read_points_csv(path),
        (None, Some(n)) => Ok(planted_blobs(n, graph.seed).0),
        (None, None) => Err(CliError::Usage("one of --points or --planted is required".into())),
    }
}

fn run_second_graph(graph: &GraphArgs, solve: &SolveArgs) -> Result<i32> {
    let options = solve.options()?;
    let weights = match (graph.weights, graph.sigma) {
        (Weights::Unit, _) => EdgeWeights::Unit,
        (Weights::Gauss, Some(sigma)) => EdgeWeights::Gaussian { sigma },
        (Weights::Gauss, None) => return Err(CliError::Usage("--weights gauss needs --sigma".into())),
    };
    let points = load_points(graph)?;
    let g = build_epsilon_graph(&points, graph.eps, weights)?;
    let r = graph_second_eigenpair(&g, &solve.config(None), &options)?;
    let in_c = threshold_cut(&r.f).ok();
    let cut = in_c.as_deref().map(|c| cut_metrics(&g, c)).transpose()?;
    if let Some(path) = &solve.field {
        write_point_field_csv(path, &points, &r.f)?;
    }
    if let Some(path) = &graph.labels {
        let in_c = in_c.as_deref().ok_or_else(|| CliError::Usage("the iterate has one sign, no cut to label".into()))?;
        write_labels_csv(path, in_c)?;
    }
    let mut summary = format!("lambda2 = {:.12e} after {} iterations (converged: {})", r.lambda2, r.iterations, r.converged);
    if let Some(m) = &cut {
        summary.push_str(&format!(", rcc {:.6e}, ncc {:.6e}", m.rcc, m.ncc));
    }
    solve.emit_report(&to_json(&SecondReport::from_graph(&r, &g, cut.as_ref())), &summary)?;
    Ok(converged_code(r.converged))
}

fn run_first(mesh: &Mesh, solve: &SolveArgs) -> Result<i32> {
    let options = solve.options()?;
    let r = first_eigenpair(mesh, &solve.config(Some(mesh)), &options)?;
    if let Some(path) = &solve.field {
        write_field_csv(path, &r.w1)?;
    }
    let summary = format!("lambda1 = {:.12e} after {} iterations", r.lambda1, r.iterations);
    solve.emit_report(&to_json(&FirstReport::new(&r, solve.p)), &summary)?;
    Ok(exit::SUCCESS)
}

fn run_verify(args: &VerifyArgs) -> Result<i32> {
    if !verify::SUITES.contains(&args.suite.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown suite {:?}; expected one of {}",
            args.suite,
            verify::SUITES.join(", ")
        )));
    }
    if !args.p.is_empty() && args.suite != "1d-closed-form" {
        return Err(CliError::Usage(format!("--p does not apply to suite {}", args.suite)));
    }
    let checks = match args.suite.as_str() {
        "1d-closed-form" => {
            let ps = if args.p.is_empty() { verify::DEFAULT_SWEEP.to_vec() } else { args.p.clone() };
            verify::closed_form_1d(&ps)?
        }
        "square-p2" => verify::square_p2()?,
        "neumann-p2" => verify::neumann_p2()?,
        "graph-fiedler" => verify::graph_fiedler(args.seed)?,
        _ => verify::graph_rcc()?,
    };
    print!("{}", verify::render_table(&args.suite, &checks));
    Ok(if checks.iter().all(|c| c.passed) { exit::SUCCESS } else { exit::CHECK_FAILED })
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Second(SecondDomain::Interval { interval, bc, solve }) => {
            run_second_mesh(&interval.mesh()?, bc.bc, solve)
        }
        Command::Second(SecondDomain::Rect { rect, bc, solve }) => run_second_mesh(&rect.mesh()?, bc.bc, solve),
        Command::Second(SecondDomain::Graph { graph, solve }) => run_second_graph(graph, solve),
        Command::First(FirstDomain::Interval { interval, solve }) => run_first(&interval.mesh()?, solve),
        Command::First(FirstDomain::Rect { rect, solve }) => run_first(&rect.mesh()?, solve),
        Command::Verify(args) => run_verify(args),
    }
}

/// Parses `args` (program name first), runs the command, reports errors on
/// standard error and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::BAD_INPUT } else { exit::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Log level selected by `PLEIG_LOG`: `quiet`, `info` or `debug`. Unset or
/// empty means warnings only; any other value is reported and ignored.
pub fn log_level(value: Option<&str>) -> (log::LevelFilter, Option<String>) {
    match value.map(str::trim) {
        None | Some("") => (log::LevelFilter::Warn, None),
        Some("quiet") => (log::LevelFilter::Off, None),
        Some("info") => (log::LevelFilter::Info, None),
        Some("debug") => (log::LevelFilter::Debug, None),
        Some(other) => (
            log::LevelFilter::Warn,
            Some(format!("ignoring PLEIG_LOG={other:?}; expected quiet, info or debug")),
        ),
    }
}

/// Installs the stderr logger configured by `PLEIG_LOG`.
pub fn init_logging() {
    let value = std::env::var("PLEIG_LOG").ok();
    let (level, warning) = log_level(value.as_deref());
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
    if let Some(w) = warning {
        log::warn!("{w}");
    }
}
