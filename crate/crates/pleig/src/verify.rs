//! Built-in verification suites, each comparing solver output with an
//! independent reference value.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use pleig_core::eigensolver::{second_eigenpair, EigenOptions};
use pleig_core::graph::{
    brute_force_rcc, build_epsilon_graph, cut_metrics, graph_second_eigenpair, threshold_cut, EdgeWeights, Graph,
};
use pleig_core::mesh::Mesh;
use pleig_core::pde_solver::{BoundaryCondition, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// Names accepted by `verify --suite`.
pub const SUITES: [&str; 5] = ["1d-closed-form", "square-p2", "neumann-p2", "graph-fiedler", "graph-rcc"];

/// Exponents of the closed-form sweep when none are given.
pub const DEFAULT_SWEEP: [f64; 4] = [1.5, 2.0, 3.0, 5.0];

/// Outcome of one comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// What was compared.
    pub name: String,
    /// Solver output.
    pub measured: f64,
    /// Reference value.
    pub reference: f64,
    /// Error in the sense of `relative`.
    pub error: f64,
    /// Largest admissible error.
    pub tolerance: f64,
    /// `error` is relative to `reference` rather than absolute.
    pub relative: bool,
    /// The run converged and `error ≤ tolerance`.
    pub passed: bool,
    /// Failure message when the solver returned an error.
    pub note: Option<String>,
}

impl Check {
    fn compare(name: String, measured: f64, reference: f64, tolerance: f64, relative: bool, converged: bool) -> Self {
        let error = if relative { (measured / reference - 1.0).abs() } else { (measured - reference).abs() };
        let passed = converged && error <= tolerance;
        let note = (!converged).then(|| "not converged".to_string());
        Self { name, measured, reference, error, tolerance, relative, passed, note }
    }

    fn failed(name: String, reference: f64, tolerance: f64, relative: bool, message: String) -> Self {
        Self {
            name,
            measured: f64::NAN,
            reference,
            error: f64::NAN,
            tolerance,
            relative,
            passed: false,
            note: Some(message),
        }
    }
}

/// `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

/// Second Dirichlet eigenvalue of the 1D p-Laplacian on an interval of the
/// given length: `(p − 1)(2π_p / length)^p`.
pub fn closed_form_interval(p: f64, length: f64) -> f64 {
    (p - 1.0) * (2.0 * pi_p(p) / length).powf(p)
}

fn mesh_check(name: String, mesh: &Mesh, p: f64, bc: BoundaryCondition, reference: f64, tol: f64, relative: bool) -> Check {
    let cfg = SolverConfig::for_mesh(p, mesh);
    match second_eigenpair(mesh, bc, &cfg, &EigenOptions::default()) {
        Ok(r) => Check::compare(name, r.lambda2, reference, tol, relative, r.converged),
        Err(e) => Check::failed(name, reference, tol, relative, e.to_string()),
    }
}

/// Interval (−2, 2) with 2000 cells, Dirichlet, against the closed form,
/// relative tolerance 1 %.
pub fn closed_form_1d(ps: &[f64]) -> Result<Vec<Check>> {
    let mesh = Mesh::interval(-2.0, 2.0, 2000)?;
    Ok(ps
        .iter()
        .map(|&p| {
            let name = format!("interval p={p}");
            mesh_check(name, &mesh, p, BoundaryCondition::Dirichlet, closed_form_interval(p, 4.0), 1e-2, true)
        })
        .collect())
}

/// Dirichlet square (−2, 2)² with 200×200 cells at p = 2 against `5π²/16`,
/// absolute tolerance 0.002.
pub fn square_p2() -> Result<Vec<Check>> {
    let mesh = Mesh::rectangle(-2.0, 2.0, -2.0, 2.0, 200, 200)?;
    let reference = 5.0 * PI * PI / 16.0;
    Ok(vec![mesh_check("dirichlet square 200x200".into(), &mesh, 2.0, BoundaryCondition::Dirichlet, reference, 2e-3, false)])
}

/// Neumann square (−2, 2)² with 128×128 cells at p = 2 against `π²/16`,
/// relative tolerance 1 %.
pub fn neumann_p2() -> Result<Vec<Check>> {
    let mesh = Mesh::rectangle(-2.0, 2.0, -2.0, 2.0, 128, 128)?;
    let reference = PI * PI / 16.0;
    Ok(vec![mesh_check("neumann square 128x128".into(), &mesh, 2.0, BoundaryCondition::Neumann, reference, 1e-2, true)])
}

/// Second smallest eigenvalue of the weighted graph Laplacian by a dense
/// symmetric eigensolve.
pub fn dense_fiedler_value(g: &Graph) -> f64 {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (i, j, w) in g.edges() {
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    let mut ev: Vec<f64> = l.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

fn random_connected_graph(rng: &mut ChaCha8Rng) -> Result<Graph> {
    loop {
        let n = rng.random_range(5..=12);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let g = build_epsilon_graph(&pts, 0.55, EdgeWeights::Gaussian { sigma: 0.4 })?;
        if g.is_connected() {
            return Ok(g);
        }
    }
}

fn fiedler_options() -> (SolverConfig, EigenOptions) {
    (SolverConfig::for_graph(2.0), EigenOptions { outer_tol: 1e-12, max_outer: 2000 })
}

/// Ten seeded random connected ε-graphs with 5 to 12 nodes at p = 2 against
/// the dense Fiedler value, relative tolerance 1e-4.
pub fn graph_fiedler(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cfg, opts) = fiedler_options();
    let mut checks = Vec::new();
    for k in 0..10 {
        let g = random_connected_graph(&mut rng)?;
        let reference = dense_fiedler_value(&g);
        let name = format!("random graph {k} (n={})", g.n());
        checks.push(match graph_second_eigenpair(&g, &cfg, &opts) {
            Ok(r) => Check::compare(name, r.lambda2, reference, 1e-4, true, r.converged),
            Err(e) => Check::failed(name, reference, 1e-4, true, e.to_string()),
        });
    }
    Ok(checks)
}

/// Two unit-weight 4-cliques joined by the edge (3, 4).
pub fn bridged_cliques() -> Result<Graph> {
    let mut edges = Vec::new();
    for block in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((block + i, block + j, 1.0));
            }
        }
    }
    edges.push((3, 4, 1.0));
    Ok(Graph::from_edges(8, &edges)?)
}

/// Unit-weight path on `n` nodes.
pub fn path_graph(n: usize) -> Result<Graph> {
    let edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    Ok(Graph::from_edges(n, &edges)?)
}

/// Thresholded ratio Cheeger cut against the brute-force optimum on small
/// fixtures, absolute tolerance 1e-12.
pub fn graph_rcc() -> Result<Vec<Check>> {
    let fixtures = [
        ("bridged cliques p=2", bridged_cliques()?, 2.0),
        ("bridged cliques p=1.5", bridged_cliques()?, 1.5),
        ("path of 6 nodes p=2", path_graph(6)?, 2.0),
    ];
    let opts = fiedler_options().1;
    let mut checks = Vec::new();
    for (name, g, p) in fixtures {
        let (reference, _) = brute_force_rcc(&g)?;
        let run = graph_second_eigenpair(&g, &SolverConfig::for_graph(p), &opts).and_then(|r| {
            let cut = cut_metrics(&g, &threshold_cut(&r.f)?)?;
            Ok((cut.rcc, r.converged))
        });
        checks.push(match run {
            Ok((rcc, converged)) => Check::compare(name.into(), rcc, reference, 1e-12, false, converged),
            Err(e) => Check::failed(name.into(), reference, 1e-12, false, e.to_string()),
        });
    }
    Ok(checks)
}

/// Renders the checks as an aligned table followed by a summary line.
pub fn render_table(suite: &str, checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max("check".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>22}  {:>22}  {:>9}  {:>8}  {:>4}  result",
        "check", "measured", "reference", "error", "tol", "kind"
    );
    for c in checks {
        let _ = write!(
            out,
            "{:<width$}  {:>22.15e}  {:>22.15e}  {:>9.2e}  {:>8.1e}  {:>4}  {}",
            c.name,
            c.measured,
            c.reference,
            c.error,
            c.tolerance,
            if c.relative { "rel" } else { "abs" },
            if c.passed { "PASS" } else { "FAIL" }
        );
        if let Some(note) = &c.note {
            let _ = write!(out, " ({note})");
        }
        out.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(out, "suite {suite}: {} of {} checks passed", checks.len() - failed, checks.len());
    out
}
