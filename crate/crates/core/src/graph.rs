//! Graph p-Laplacian: ε-graphs from point clouds, the p-Dirichlet energy
//! `Q_p(f) = ½ Σ_{i,j} w_ij |f_i − f_j|^p`, a second-eigenvector iteration,
//! threshold cuts and Cheeger cut scores.
//!
//! The eigen-iteration mirrors the continuous one: every step solves
//! `(Δ_p f)_i = g_i` with node 0 pinned by the same descent solver (edges play
//! the role of elements) and shifts the result so that `Σ_i φ_p(f_i) = 0`.
//! The load is `g = R_p(f) φ_p(f)` for the normalized iterate `f`, less its
//! mean so that the pinned problem is solvable; an exact eigenvector
//! reproduces itself. Normalizing the two signed parts separately, as on
//! meshes, would couple them through the edges that cross the cut and move
//! the fixed point off the eigenvector. The constant first eigenvector is
//! already removed by the mean shift, so no balancing is needed.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Redundant whenever `std` is linked into the build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::descent::{self, GradientForm, Problem};
use crate::eigensolver::{zero_p_mean_offset, EigenOptions, InvariantKind, InvariantViolation};
use crate::pde_solver::SolverConfig;
use crate::{phi_p, Error, Result};

const EDGE_GRADIENTS: [[f64; 2]; 2] = [[1.0, 0.0], [-1.0, 0.0]];

/// Weighted undirected graph with symmetric CSR adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    weight: Vec<f64>,
    degrees: Vec<f64>,
    node_mass: Vec<f64>,
    // edges with i < j, flattened as [i, j, i, j, ...]
    edge_nodes: Vec<usize>,
    edge_weight: Vec<f64>,
    components: Vec<usize>,
    component_count: usize,
    eps: Option<f64>,
}

impl Graph {
    /// Builds a graph from undirected edges `(i, j, w)`. Repeated pairs add
    /// their weights; zero weights are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one node".into()));
        }
        let mut list: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self loop at node {i}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) has weight {w}")));
            }
            if w > 0.0 {
                list.push((i.min(j), i.max(j), w));
            }
        }
        list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(list.len());
        for e in list {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
                _ => merged.push(e),
            }
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(i, j, _) in &merged {
            row_ptr[i + 1] += 1;
            row_ptr[j + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut fill = row_ptr.clone();
        let mut col = vec![0usize; row_ptr[n]];
        let mut weight = vec![0.0; row_ptr[n]];
        for &(i, j, w) in &merged {
            col[fill[i]] = j;
            weight[fill[i]] = w;
            fill[i] += 1;
            col[fill[j]] = i;
            weight[fill[j]] = w;
            fill[j] += 1;
        }
        for i in 0..n {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            let mut row: Vec<(usize, f64)> = col[lo..hi].iter().copied().zip(weight[lo..hi].iter().copied()).collect();
            row.sort_by_key(|e| e.0);
            for (k, (c, w)) in row.into_iter().enumerate() {
                col[lo + k] = c;
                weight[lo + k] = w;
            }
        }
        let degrees = (0..n).map(|i| weight[row_ptr[i]..row_ptr[i + 1]].iter().sum()).collect();
        let mut graph = Self {
            n,
            row_ptr,
            col,
            weight,
            degrees,
            node_mass: vec![1.0; n],
            edge_nodes: merged.iter().flat_map(|e| [e.0, e.1]).collect(),
            edge_weight: merged.iter().map(|e| e.2).collect(),
            components: Vec::new(),
            component_count: 0,
            eps: None,
        };
        graph.label_components();
        Ok(graph)
    }

    fn label_components(&mut self) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for (j, _) in self.neighbors(i) {
                    if label[j] == usize::MAX {
                        label[j] = count;
                        queue.push_back(j);
                    }
                }
            }
            count += 1;
        }
        self.components = label;
        self.component_count = count;
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edge_weight.len()
    }

    /// Undirected edges `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edge_nodes.chunks_exact(2).zip(&self.edge_weight).map(|(e, &w)| (e[0], e[1], w))
    }

    /// Neighbours of `i` with edge weights, in increasing order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col[lo..hi].iter().copied().zip(self.weight[lo..hi].iter().copied())
    }

    /// `w_ij`, zero if there is no edge.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col[lo..hi].binary_search(&j).map_or(0.0, |k| self.weight[lo + k])
    }

    /// `d_i = Σ_j w_ij`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Per-node weight of the `ℓ^p` norms (all ones).
    pub fn node_mass(&self) -> &[f64] {
        &self.node_mass
    }

    /// Connected component of every node, numbered from 0 in order of first node.
    pub fn component_labels(&self) -> &[usize] {
        &self.components
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// `false` when the graph has several components. The second eigenvector
    /// of such a graph is an indicator of a component.
    pub fn is_connected(&self) -> bool {
        self.component_count == 1
    }

    /// Neighbourhood radius when built by [`build_epsilon_graph`].
    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "vector of length {} on a graph with {} nodes",
                f.len(),
                self.n
            )));
        }
        Ok(())
    }
}

impl GradientForm for Graph {
    fn node_count(&self) -> usize {
        self.n
    }

    fn cell_count(&self) -> usize {
        self.edge_weight.len()
    }

    fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.edge_nodes[2 * c..2 * c + 2]
    }

    fn cell_gradients(&self, _c: usize) -> &[[f64; 2]] {
        &EDGE_GRADIENTS
    }

    fn cell_measure(&self, c: usize) -> f64 {
        self.edge_weight[c]
    }

    fn node_mass(&self) -> &[f64] {
        &self.node_mass
    }
}

/// Edge weights of an ε-graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWeights {
    /// `w_ij = 1`.
    Unit,
    /// `w_ij = exp(−‖x_i − x_j‖² / (2σ²))`.
    Gaussian {
        /// Kernel width σ.
        sigma: f64,
    },
}

/// Connects every pair of distinct points with `0 < ‖x_i − x_j‖ ≤ eps`.
///
/// All points must have the same dimension. A disconnected result is
/// reported through [`Graph::is_connected`], not as an error.
pub fn build_epsilon_graph<P: AsRef<[f64]>>(points: &[P], eps: f64, weights: EdgeWeights) -> Result<Graph> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if points.len() < 2 {
        return Err(Error::InvalidParameter("at least two points are required".into()));
    }
    if let EdgeWeights::Gaussian { sigma } = weights {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
    }
    let dim = points[0].as_ref().len();
    if dim == 0 || points.iter().any(|x| x.as_ref().len() != dim) {
        return Err(Error::InvalidParameter("points must share a positive dimension".into()));
    }
    let mut edges = Vec::new();
    for i in 0..points.len() {
        let xi = points[i].as_ref();
        for (j, xj) in points.iter().enumerate().skip(i + 1) {
            let d2: f64 = xi.iter().zip(xj.as_ref()).map(|(a, b)| (a - b) * (a - b)).sum();
            let d = d2.sqrt();
            if d > 0.0 && d <= eps {
                let w = match weights {
                    EdgeWeights::Unit => 1.0,
                    EdgeWeights::Gaussian { sigma } => (-d2 / (2.0 * sigma * sigma)).exp(),
                };
                edges.push((i, j, w));
            }
        }
    }
    let mut g = Graph::from_edges(points.len(), &edges)?;
    g.eps = Some(eps);
    if !g.is_connected() {
        log::warn!("epsilon graph has {} connected components", g.component_count());
    }
    Ok(g)
}

/// `(Δ_p f)_i = Σ_j w_ij φ_p(f_i − f_j)`.
pub fn apply_p_laplacian(g: &Graph, f: &[f64], p: f64) -> Result<Vec<f64>> {
    g.check_len(f)?;
    Ok((0..g.n).map(|i| g.neighbors(i).map(|(j, w)| w * phi_p(f[i] - f[j], p)).sum()).collect())
}

/// `Q_p(f) = ½ Σ_{i,j} w_ij |f_i − f_j|^p`.
pub fn p_dirichlet_energy(g: &Graph, f: &[f64], p: f64) -> Result<f64> {
    g.check_len(f)?;
    Ok(descent::grad_energy(g, f, p))
}

/// `R_p(f) = Q_p(f) / Σ_i |f_i|^p`. Fails on the zero vector.
pub fn rayleigh_graph(g: &Graph, f: &[f64], p: f64) -> Result<f64> {
    let q = p_dirichlet_energy(g, f, p)?;
    let norm = lp_pow(f, p);
    if !(norm > 0.0) {
        return Err(Error::DegenerateField("Rayleigh quotient of the zero vector"));
    }
    Ok(q / norm)
}

fn lp_pow(f: &[f64], p: f64) -> f64 {
    f.iter().map(|v| v.abs().powf(p)).sum()
}

/// Output of [`graph_second_eigenpair`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEigenReport {
    /// Exponent.
    pub p: f64,
    /// `R_p(f)` of the final iterate.
    pub lambda2: f64,
    /// Final iterate, with `Σ_i φ_p(f_i) = 0` and `‖f‖_p = 1`.
    pub f: Vec<f64>,
    /// `R_p(f^k)` for the start and every iterate.
    pub rayleigh_history: Vec<f64>,
    /// `⟨f₊, Δ_p f⟩ / ‖f₊‖_p^p` for the start and every iterate.
    pub lambda_plus_history: Vec<f64>,
    /// `−⟨f₋, Δ_p f⟩ / ‖f₋‖_p^p` for the start and every iterate.
    pub lambda_minus_history: Vec<f64>,
    /// Outer iterations performed.
    pub iterations: usize,
    /// The relative change of `R_p` fell below the tolerance.
    pub converged: bool,
    /// Iterates with `R_p(f^k) > max(λ₊^{k−1}, λ₋^{k−1}) + 1e-8`.
    pub invariant_violations: Vec<InvariantViolation>,
    /// The graph is disconnected and `f` is a component indicator.
    pub disconnected: bool,
}

/// Part energies `λ± = ±⟨f±, Δ_p f⟩ / ‖f±‖_p^p`. Their average weighted by
/// `‖f±‖_p^p` is `R_p(f)`.
fn part_lambdas(g: &Graph, f: &[f64], p: f64) -> Result<(f64, f64)> {
    let lap = apply_p_laplacian(g, f, p)?;
    let (mut num_p, mut num_m, mut den_p, mut den_m) = (0.0, 0.0, 0.0, 0.0);
    for (&v, &l) in f.iter().zip(&lap) {
        if v > 0.0 {
            num_p += v * l;
            den_p += v.powf(p);
        } else if v < 0.0 {
            num_m += v * l;
            den_m += (-v).powf(p);
        }
    }
    if !(den_p > 0.0) {
        return Err(Error::PartitionCollapse { iteration: 0, side: "positive" });
    }
    if !(den_m > 0.0) {
        return Err(Error::PartitionCollapse { iteration: 0, side: "negative" });
    }
    Ok((num_p / den_p, num_m / den_m))
}

fn shift_and_normalize(f: &mut [f64], p: f64) -> Result<()> {
    let c = zero_p_mean_offset(f, &vec![1.0; f.len()], p);
    f.iter_mut().for_each(|v| *v -= c);
    let norm = lp_pow(f, p).powf(1.0 / p);
    if !(norm > 0.0) {
        return Err(Error::DegenerateField("iterate vanished"));
    }
    f.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

fn bfs_hops(g: &Graph, start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for (j, _) in g.neighbors(i) {
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    dist
}

fn farthest(dist: &[usize]) -> usize {
    let mut best = 0;
    for (i, &d) in dist.iter().enumerate() {
        if d != usize::MAX && d > dist[best] {
            best = i;
        }
    }
    best
}

/// Deterministic start: `f_i = hop(a, i) − hop(b, i)` for two far apart
/// nodes `a`, `b` (found by two breadth-first sweeps from node 0).
pub fn initial_guess(g: &Graph) -> Vec<f64> {
    let a = farthest(&bfs_hops(g, 0));
    let da = bfs_hops(g, a);
    let b = farthest(&da);
    let db = bfs_hops(g, b);
    da.iter().zip(&db).map(|(&x, &y)| x as f64 - y as f64).collect()
}

/// Second eigenpair from [`initial_guess`].
pub fn graph_second_eigenpair(g: &Graph, config: &SolverConfig, options: &EigenOptions) -> Result<GraphEigenReport> {
    graph_second_eigenpair_from(g, &initial_guess(g), config, options)
}

/// Second eigenpair of the graph p-Laplacian from a sign-changing start `f0`.
///
/// For a disconnected graph no iteration is run: the result takes one sign on
/// the component of node 0 and the other elsewhere, with `lambda2 = 0`.
pub fn graph_second_eigenpair_from(
    g: &Graph,
    f0: &[f64],
    config: &SolverConfig,
    options: &EigenOptions,
) -> Result<GraphEigenReport> {
    config.validate()?;
    crate::check_exponent(config.p)?;
    g.check_len(f0)?;
    let p = config.p;
    if g.n < 2 {
        return Err(Error::InvalidParameter("graph needs at least two nodes".into()));
    }
    let mut report = GraphEigenReport {
        p,
        lambda2: f64::NAN,
        f: Vec::new(),
        rayleigh_history: Vec::new(),
        lambda_plus_history: Vec::new(),
        lambda_minus_history: Vec::new(),
        iterations: 0,
        converged: false,
        invariant_violations: Vec::new(),
        disconnected: !g.is_connected(),
    };
    if report.disconnected {
        let mut f: Vec<f64> = g.component_labels().iter().map(|&c| if c == 0 { 1.0 } else { -1.0 }).collect();
        shift_and_normalize(&mut f, p)?;
        report.lambda2 = rayleigh_graph(g, &f, p)?;
        report.rayleigh_history.push(report.lambda2);
        report.f = f;
        report.converged = true;
        return Ok(report);
    }

    let mut f = f0.to_vec();
    shift_and_normalize(&mut f, p)?;
    let mut rayleigh = rayleigh_graph(g, &f, p)?;
    let (mut lp, mut lm) = part_lambdas(g, &f, p)?;
    report.rayleigh_history.push(rayleigh);
    report.lambda_plus_history.push(lp);
    report.lambda_minus_history.push(lm);

    let mut fixed = vec![false; g.n];
    fixed[0] = true;
    for k in 1..=options.max_outer {
        let mut load: Vec<f64> = f.iter().map(|&v| rayleigh * phi_p(v, p)).collect();
        let mean = load.iter().sum::<f64>() / g.n as f64;
        load.iter_mut().for_each(|v| *v -= mean);
        let (mut next, solve) = Problem::new(g, &load, &fixed).minimize(f.clone(), config)?;
        if !crate::descent::inner_solve_usable(&solve, config.outer_tol) {
            return Err(Error::InnerNotConverged {
                iteration: k,
                residual: solve.residual_history.last().copied().unwrap_or(f64::NAN),
            });
        }
        shift_and_normalize(&mut next, p)?;
        let next_rayleigh = rayleigh_graph(g, &next, p)?;
        let (next_lp, next_lm) = part_lambdas(g, &next, p).map_err(|e| match e {
            Error::PartitionCollapse { side, .. } => Error::PartitionCollapse { iteration: k, side },
            other => other,
        })?;
        let bound = lp.max(lm);
        let margin = bound + 1e-8 * bound.max(1.0) - next_rayleigh;
        if margin < 0.0 {
            report.invariant_violations.push(InvariantViolation {
                iteration: k,
                kind: InvariantKind::RayleighBound,
                margin,
            });
        }
        log::debug!("graph iteration {k}: rayleigh {next_rayleigh:.12e} ({} descent steps)", solve.iterations);
        let change = (next_rayleigh - rayleigh).abs();
        f = next;
        rayleigh = next_rayleigh;
        lp = next_lp;
        lm = next_lm;
        report.rayleigh_history.push(rayleigh);
        report.lambda_plus_history.push(lp);
        report.lambda_minus_history.push(lm);
        report.iterations = k;
        if change <= options.outer_tol * rayleigh.max(f64::MIN_POSITIVE) {
            report.converged = true;
            break;
        }
    }
    report.lambda2 = rayleigh;
    report.f = f;
    log::info!(
        "graph lambda2 = {:.12e} after {} iterations (converged: {})",
        report.lambda2,
        report.iterations,
        report.converged
    );
    Ok(report)
}

/// Membership of `C = { i : f_i > 0 }`; zeros go to the complement.
/// Fails if `C` or its complement is empty.
pub fn threshold_cut(f: &[f64]) -> Result<Vec<bool>> {
    let c: Vec<bool> = f.iter().map(|&v| v > 0.0).collect();
    if c.iter().all(|&x| x) || c.iter().all(|&x| !x) {
        return Err(Error::DegenerateField("threshold cut needs both signs"));
    }
    Ok(c)
}

/// Cut weight and Cheeger ratios of a bipartition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutMetrics {
    /// `Σ_{i∈C, j∉C} w_ij`.
    pub cut_value: f64,
    /// `cut / min(|C|, |Cᶜ|)`.
    pub rcc: f64,
    /// `cut / min(vol C, vol Cᶜ)`, and 0 when no edge crosses the cut.
    pub ncc: f64,
    /// `(|C|, |Cᶜ|)`.
    pub side_sizes: (usize, usize),
    /// `(vol C, vol Cᶜ)` with `vol C = Σ_{i∈C} d_i`.
    pub side_volumes: (f64, f64),
}

/// Scores the bipartition given by the membership mask `in_c`.
pub fn cut_metrics(g: &Graph, in_c: &[bool]) -> Result<CutMetrics> {
    if in_c.len() != g.n {
        return Err(Error::InvalidParameter(format!("mask of length {} for {} nodes", in_c.len(), g.n)));
    }
    let size = in_c.iter().filter(|&&x| x).count();
    if size == 0 || size == g.n {
        return Err(Error::InvalidParameter("cut side must be a nonempty proper subset".into()));
    }
    let cut_value = g.edges().filter(|&(i, j, _)| in_c[i] != in_c[j]).fold(0.0, |acc, (_, _, w)| acc + w);
    let vol_c: f64 = g.degrees.iter().zip(in_c).filter(|(_, &x)| x).map(|(d, _)| d).sum();
    let vol_total: f64 = g.degrees.iter().sum();
    let vol_rest = vol_total - vol_c;
    let min_vol = vol_c.min(vol_rest);
    Ok(CutMetrics {
        cut_value,
        rcc: cut_value / size.min(g.n - size) as f64,
        ncc: if cut_value > 0.0 { cut_value / min_vol } else { 0.0 },
        side_sizes: (size, g.n - size),
        side_volumes: (vol_c, vol_rest),
    })
}

/// Largest graph accepted by [`brute_force_rcc`].
pub const BRUTE_FORCE_MAX_NODES: usize = 20;

/// Optimal ratio Cheeger cut by enumerating all `2^{n−1} − 1` bipartitions.
/// The last node is always in the complement; the first optimum found wins.
pub fn brute_force_rcc(g: &Graph) -> Result<(f64, Vec<bool>)> {
    let n = g.n;
    if n < 2 || n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "brute force needs 2 <= n <= {BRUTE_FORCE_MAX_NODES}, got {n}"
        )));
    }
    let edges: Vec<(usize, usize, f64)> = g.edges().collect();
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1u32..(1u32 << (n - 1)) {
        let inside = |i: usize| i < n - 1 && mask >> i & 1 == 1;
        let cut: f64 = edges.iter().filter(|&&(i, j, _)| inside(i) != inside(j)).map(|e| e.2).sum();
        let size = mask.count_ones() as usize;
        let rcc = cut / size.min(n - size) as f64;
        if rcc < best.0 {
            best = (rcc, mask);
        }
    }
    let c = (0..n).map(|i| i < n - 1 && best.1 >> i & 1 == 1).collect();
    Ok((best.0, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> Graph {
        Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    #[test]
    fn epsilon_graph_on_a_line() {
        let pts = [[0.0], [0.03], [0.2]];
        let g = build_epsilon_graph(&pts, 0.05, EdgeWeights::Unit).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);
        assert_eq!(g.degrees(), &[1.0, 1.0, 0.0]);
        assert!(!g.is_connected());
        assert_eq!(g.eps(), Some(0.05));
    }

    #[test]
    fn epsilon_graph_square_excludes_diagonals() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let g = build_epsilon_graph(&pts, 1.0, EdgeWeights::Unit).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.degrees(), &[2.0; 4]);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn gaussian_weight_at_radius() {
        let pts = [[0.0, 0.0], [0.3, 0.4]];
        let g = build_epsilon_graph(&pts, 0.5, EdgeWeights::Gaussian { sigma: 0.5 }).unwrap();
        assert!((g.weight(0, 1) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(g.weight(0, 1), g.weight(1, 0));
    }

    #[test]
    fn epsilon_graph_rejects_bad_input() {
        assert!(build_epsilon_graph(&[[0.0], [1.0]], 0.0, EdgeWeights::Unit).is_err());
        assert!(build_epsilon_graph(&[[0.0]], 1.0, EdgeWeights::Unit).is_err());
        let ragged: [&[f64]; 2] = [&[0.0], &[0.0, 1.0]];
        assert!(build_epsilon_graph(&ragged, 1.0, EdgeWeights::Unit).is_err());
        assert!(Graph::from_edges(3, &[(0, 0, 1.0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let g = path4();
        assert_eq!(apply_p_laplacian(&g, &[1.0, 0.0, 0.0, 0.0], 2.0).unwrap(), vec![1.0, -1.0, 0.0, 0.0]);
        assert!(apply_p_laplacian(&g, &[3.0; 4], 3.5).unwrap().iter().all(|&v| v == 0.0));
        assert!(apply_p_laplacian(&g, &[1.0; 3], 2.0).is_err());
    }

    #[test]
    fn rayleigh_examples() {
        let g = path4();
        let f = [1.0, 1.0, -1.0, -1.0];
        assert!((rayleigh_graph(&g, &f, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let scaled: Vec<f64> = f.iter().map(|v| -3.7 * v).collect();
        assert!((rayleigh_graph(&g, &scaled, 3.0).unwrap() - rayleigh_graph(&g, &f, 3.0).unwrap()).abs() < 1e-14);
        assert_eq!(rayleigh_graph(&g, &[2.0; 4], 2.0).unwrap(), 0.0);
        assert!(matches!(rayleigh_graph(&g, &[0.0; 4], 2.0), Err(Error::DegenerateField(_))));
    }

    #[test]
    fn cut_examples() {
        let g = path4();
        let m = cut_metrics(&g, &[true, true, false, false]).unwrap();
        assert_eq!(m.cut_value, 1.0);
        assert_eq!(m.rcc, 0.5);
        assert!((m.ncc - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.side_volumes, (3.0, 3.0));
        assert!(cut_metrics(&g, &[false; 4]).is_err());
        assert!(cut_metrics(&g, &[true; 4]).is_err());

        let isolated = Graph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        let m = cut_metrics(&isolated, &[false, false, true]).unwrap();
        assert!(m.cut_value == 0.0 && m.cut_value.is_sign_positive());
        assert_eq!((m.rcc, m.ncc), (0.0, 0.0));

        let (rcc, c) = brute_force_rcc(&g).unwrap();
        assert_eq!(rcc, 0.5);
        assert!(c == vec![true, true, false, false] || c == vec![false, false, true, true]);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_cut(&[0.5, 0.2, -0.1, -0.7]).unwrap(), vec![true, true, false, false]);
        assert_eq!(threshold_cut(&[0.5, 0.0, -0.1]).unwrap(), vec![true, false, false]);
        assert!(threshold_cut(&[1.0, 2.0]).is_err());
        assert!(threshold_cut(&[-1.0, 0.0]).is_err());
    }

    #[test]
    fn brute_force_size_limit() {
        let edges: Vec<_> = (0..20).map(|i| (i, i + 1, 1.0)).collect();
        let g = Graph::from_edges(21, &edges).unwrap();
        assert!(brute_force_rcc(&g).is_err());
    }

    #[test]
    fn path_fiedler_value() {
        let g = path4();
        let opts = EigenOptions { outer_tol: 1e-12, max_outer: 500 };
        let rep = graph_second_eigenpair(&g, &SolverConfig::for_graph(2.0), &opts).unwrap();
        assert!(rep.converged);
        assert!((rep.lambda2 - (2.0 - 2f64.sqrt())).abs() < 1e-6, "{}", rep.lambda2);
        assert!(rep.invariant_violations.is_empty());
        assert!(rep.f.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn disconnected_graph_gives_component_indicator() {
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let rep = graph_second_eigenpair(&g, &SolverConfig::for_graph(3.0), &EigenOptions::default()).unwrap();
        assert!(rep.disconnected);
        assert_eq!(rep.lambda2, 0.0);
        assert_eq!(threshold_cut(&rep.f).unwrap(), vec![true, true, false, false]);
    }
}
