//! JSON run reports.
//!
//! Keys appear in a fixed order and floats are written with 17 significant
//! digits, so identical runs give byte-identical reports.

use std::io;

use pleig_core::eigensolver::{EigenReport, InvariantKind, InvariantViolation};
use pleig_core::graph::{CutMetrics, Graph, GraphEigenReport};
use pleig_core::mesh::{Domain, Mesh};
use pleig_core::pde_solver::FirstEigenpair;
use serde::Serialize;
use serde_json::ser::Formatter;

/// One recorded invariant violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    /// Outer iteration.
    pub iteration: usize,
    /// `rayleigh_bound`, `lower_bound` or `part_identity`.
    pub kind: &'static str,
    /// Signed margin or identity error.
    pub margin: f64,
}

impl From<&InvariantViolation> for ViolationRecord {
    fn from(v: &InvariantViolation) -> Self {
        let kind = match v.kind {
            InvariantKind::RayleighBound => "rayleigh_bound",
            InvariantKind::LowerBound => "lower_bound",
            InvariantKind::PartIdentity => "part_identity",
        };
        Self { iteration: v.iteration, kind, margin: v.margin }
    }
}

/// Domain and resolution of a mesh run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshInfo {
    /// `interval` or `rectangle`.
    pub kind: &'static str,
    /// `[a, b]` or `[x0, x1, y0, y1]`.
    pub bounds: Vec<f64>,
    /// `[n]` or `[nx, ny]`.
    pub resolution: Vec<usize>,
}

impl From<&Mesh> for MeshInfo {
    fn from(mesh: &Mesh) -> Self {
        let (nx, ny) = mesh.resolution();
        match mesh.domain() {
            Domain::Interval { a, b } => Self { kind: "interval", bounds: vec![a, b], resolution: vec![nx] },
            Domain::Rectangle { x0, x1, y0, y1 } => {
                Self { kind: "rectangle", bounds: vec![x0, x1, y0, y1], resolution: vec![nx, ny] }
            }
        }
    }
}

/// Size of a graph run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphInfo {
    /// Nodes.
    pub n: usize,
    /// Undirected edges.
    pub edges: usize,
    /// Connection radius, absent for graphs given by edge lists.
    pub eps: Option<f64>,
    /// Whether the graph has a single component.
    pub connected: bool,
}

/// Cheeger ratios of the thresholded cut.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutInfo {
    /// Ratio Cheeger cut.
    pub rcc: f64,
    /// Normalized Cheeger cut.
    pub ncc: f64,
}

impl From<&CutMetrics> for CutInfo {
    fn from(m: &CutMetrics) -> Self {
        Self { rcc: m.rcc, ncc: m.ncc }
    }
}

/// Report of a second-eigenpair run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondReport {
    /// Exponent.
    pub p: f64,
    /// `dirichlet` or `neumann`; null for graphs.
    pub bc: Option<&'static str>,
    /// Second eigenvalue estimate.
    pub lambda2: f64,
    /// Rayleigh quotient of the final iterate.
    pub rayleigh: f64,
    /// `λ₊` per iteration.
    pub lambda_plus_history: Vec<f64>,
    /// `λ₋` per iteration.
    pub lambda_minus_history: Vec<f64>,
    /// Outer iterations.
    pub iterations: usize,
    /// Whether the stopping rule was met.
    pub converged: bool,
    /// Failed per-iteration checks.
    pub invariant_violations: Vec<ViolationRecord>,
    /// Present for mesh runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshInfo>,
    /// Present for graph runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphInfo>,
    /// Present for graph runs whose iterate changes sign.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut: Option<CutInfo>,
}

impl SecondReport {
    /// Report of a mesh run.
    pub fn from_mesh(r: &EigenReport<'_>) -> Self {
        Self {
            p: r.p,
            bc: Some(r.bc.as_str()),
            lambda2: r.lambda2,
            rayleigh: r.rayleigh,
            lambda_plus_history: r.lambda_plus_history.clone(),
            lambda_minus_history: r.lambda_minus_history.clone(),
            iterations: r.iterations,
            converged: r.converged,
            invariant_violations: r.invariant_violations.iter().map(Into::into).collect(),
            mesh: Some(r.u2.mesh().into()),
            graph: None,
            cut: None,
        }
    }

    /// Report of a graph run.
    pub fn from_graph(r: &GraphEigenReport, g: &Graph, cut: Option<&CutMetrics>) -> Self {
        Self {
            p: r.p,
            bc: None,
            lambda2: r.lambda2,
            rayleigh: r.lambda2,
            lambda_plus_history: r.lambda_plus_history.clone(),
            lambda_minus_history: r.lambda_minus_history.clone(),
            iterations: r.iterations,
            converged: r.converged,
            invariant_violations: r.invariant_violations.iter().map(Into::into).collect(),
            mesh: None,
            graph: Some(GraphInfo { n: g.n(), edges: g.edge_count(), eps: g.eps(), connected: g.is_connected() }),
            cut: cut.map(Into::into),
        }
    }
}

/// Report of a first-eigenpair run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstReport {
    /// Exponent.
    pub p: f64,
    /// Always `dirichlet`.
    pub bc: &'static str,
    /// First eigenvalue estimate.
    pub lambda1: f64,
    /// Inverse power iterations.
    pub iterations: usize,
    /// Domain and resolution.
    pub mesh: MeshInfo,
}

impl FirstReport {
    /// Report of a first-eigenpair run with exponent `p`.
    pub fn new(r: &FirstEigenpair<'_>, p: f64) -> Self {
        Self { p, bc: "dirichlet", lambda1: r.lambda1, iterations: r.iterations, mesh: r.w1.mesh().into() }
    }
}

/// Compact JSON with every float written as `{:.16e}`.
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a report as one line of JSON followed by a newline.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    report.serialize(&mut ser).expect("reports contain only serializable fields");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
