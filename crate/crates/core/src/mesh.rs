//! Structured P1 meshes on intervals and rectangles, and the nodal field
//! calculus used by the solvers.
//!
//! All `|u|^p` integrals use lumped (nodal) quadrature: node `i` carries the
//! mass `m_i = Σ_{T ∋ i} |T| / (d + 1)`. Gradient integrals are exact since
//! P1 gradients are constant per element.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Redundant whenever `std` is linked into the build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::descent::GradientForm;
use crate::{Error, Result};

/// The computational domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Open interval `(a, b)`.
    Interval {
        /// Left end.
        a: f64,
        /// Right end.
        b: f64,
    },
    /// Axis-aligned rectangle `(x0, x1) × (y0, y1)`.
    Rectangle {
        /// Lower x bound.
        x0: f64,
        /// Upper x bound.
        x1: f64,
        /// Lower y bound.
        y0: f64,
        /// Upper y bound.
        y1: f64,
    },
}

impl Domain {
    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Length or area.
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
        }
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0).hypot(y1 - y0),
        }
    }
}

/// A simplicial P1 mesh (segments in 1D, triangles in 2D).
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Mesh {
    domain: Domain,
    resolution: (usize, usize),
    nodes: Vec<[f64; 2]>,
    // dim + 1 node indices per element, flattened.
    connectivity: Vec<usize>,
    // dim + 1 basis gradients per element, flattened.
    basis_gradients: Vec<[f64; 2]>,
    element_measure: Vec<f64>,
    boundary_mask: Vec<bool>,
    lumped_mass: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh of `(a, b)` with `n_cells` segments.
    pub fn interval(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMesh(format!("interval ({a}, {b}) is empty")));
        }
        if n_cells < 2 {
            return Err(Error::InvalidMesh(format!("n_cells = {n_cells}, need at least 2")));
        }
        let n = n_cells;
        let nodes: Vec<[f64; 2]> = (0..=n)
            .map(|i| [a + (b - a) * (i as f64) / (n as f64), 0.0])
            .collect();
        let mut connectivity = Vec::with_capacity(2 * n);
        let mut basis_gradients = Vec::with_capacity(2 * n);
        let mut element_measure = Vec::with_capacity(n);
        for e in 0..n {
            let h = nodes[e + 1][0] - nodes[e][0];
            connectivity.extend_from_slice(&[e, e + 1]);
            basis_gradients.extend_from_slice(&[[-1.0 / h, 0.0], [1.0 / h, 0.0]]);
            element_measure.push(h);
        }
        let mut boundary_mask = vec![false; n + 1];
        boundary_mask[0] = true;
        boundary_mask[n] = true;
        Ok(Self::finish(
            Domain::Interval { a, b },
            (n, 0),
            nodes,
            connectivity,
            basis_gradients,
            element_measure,
            boundary_mask,
        ))
    }

    /// Uniform `nx × ny` grid on the rectangle, each cell split along its
    /// lower-left to upper-right diagonal.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
        if !(finite && x0 < x1 && y0 < y1) {
            return Err(Error::InvalidMesh(format!(
                "rectangle ({x0}, {x1}) x ({y0}, {y1}) is degenerate"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidMesh(format!("resolution {nx} x {ny}, need at least 2 x 2")));
        }
        let stride = nx + 1;
        let mut nodes = Vec::with_capacity(stride * (ny + 1));
        let mut boundary_mask = Vec::with_capacity(stride * (ny + 1));
        for j in 0..=ny {
            let y = y0 + (y1 - y0) * (j as f64) / (ny as f64);
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * (i as f64) / (nx as f64);
                nodes.push([x, y]);
                boundary_mask.push(i == 0 || i == nx || j == 0 || j == ny);
            }
        }

        let n_el = 2 * nx * ny;
        let mut connectivity = Vec::with_capacity(3 * n_el);
        let mut basis_gradients = Vec::with_capacity(3 * n_el);
        let mut element_measure = Vec::with_capacity(n_el);
        for j in 0..ny {
            for i in 0..nx {
                let n00 = j * stride + i;
                let n10 = n00 + 1;
                let n01 = n00 + stride;
                let n11 = n01 + 1;
                for tri in [[n00, n10, n11], [n00, n11, n01]] {
                    let (grads, area) = p1_gradients(tri.map(|k| nodes[k]));
                    connectivity.extend_from_slice(&tri);
                    basis_gradients.extend_from_slice(&grads);
                    element_measure.push(area);
                }
            }
        }
        Ok(Self::finish(
            Domain::Rectangle { x0, x1, y0, y1 },
            (nx, ny),
            nodes,
            connectivity,
            basis_gradients,
            element_measure,
            boundary_mask,
        ))
    }

    fn finish(
        domain: Domain,
        resolution: (usize, usize),
        nodes: Vec<[f64; 2]>,
        connectivity: Vec<usize>,
        basis_gradients: Vec<[f64; 2]>,
        element_measure: Vec<f64>,
        boundary_mask: Vec<bool>,
    ) -> Self {
        let k = domain.dim() + 1;
        let mut lumped_mass = vec![0.0; nodes.len()];
        for (e, &measure) in element_measure.iter().enumerate() {
            for &node in &connectivity[k * e..k * (e + 1)] {
                lumped_mass[node] += measure / k as f64;
            }
        }
        Self {
            domain,
            resolution,
            nodes,
            connectivity,
            basis_gradients,
            element_measure,
            boundary_mask,
            lumped_mass,
        }
    }

    /// The domain this mesh discretizes.
    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `(n_cells, 0)` for intervals, `(nx, ny)` for rectangles.
    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of elements.
    pub fn element_count(&self) -> usize {
        self.element_measure.len()
    }

    /// Node coordinates; `y = 0` in 1D.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Node indices of element `e`.
    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim() + 1;
        &self.connectivity[k * e..k * (e + 1)]
    }

    /// Gradients of the local basis functions on element `e`, in the order of
    /// [`Mesh::element`].
    pub fn basis_gradients(&self, e: usize) -> &[[f64; 2]] {
        let k = self.dim() + 1;
        &self.basis_gradients[k * e..k * (e + 1)]
    }

    /// Length or area of every element.
    pub fn element_measure(&self) -> &[f64] {
        &self.element_measure
    }

    /// `true` at nodes on the boundary.
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    /// Lumped mass `m_i` of every node.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped_mass
    }

    /// `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.domain.measure()
    }

    /// Signed area of a triangle (2D) or length of a segment (1D).
    pub fn signed_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        let p = |k: usize| self.nodes[el[k]];
        match self.dim() {
            1 => p(1)[0] - p(0)[0],
            _ => {
                let (a, b, c) = (p(0), p(1), p(2));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }
}

/// Basis gradients and area of a triangle with counter-clockwise vertices.
fn p1_gradients(v: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [[x0, y0], [x1, y1], [x2, y2]] = v;
    let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    let grads = [
        [(y1 - y2) / det, (x2 - x1) / det],
        [(y2 - y0) / det, (x0 - x2) / det],
        [(y0 - y1) / det, (x1 - x0) / det],
    ];
    (grads, 0.5 * det)
}

impl GradientForm for Mesh {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn cell_count(&self) -> usize {
        self.element_measure.len()
    }

    fn cell_nodes(&self, c: usize) -> &[usize] {
        self.element(c)
    }

    fn cell_gradients(&self, c: usize) -> &[[f64; 2]] {
        self.basis_gradients(c)
    }

    fn cell_measure(&self, c: usize) -> f64 {
        self.element_measure[c]
    }

    fn node_mass(&self) -> &[f64] {
        &self.lumped_mass
    }
}

/// Nodal coefficients of a continuous piecewise linear function on a [`Mesh`].
#[derive(Debug, Clone)]
pub struct ScalarField<'m> {
    mesh: &'m Mesh,
    values: Vec<f64>,
}

impl PartialEq for ScalarField<'_> {
    fn eq(&self, other: &Self) -> bool {
        core::ptr::eq(self.mesh, other.mesh) && self.values == other.values
    }
}

impl<'m> ScalarField<'m> {
    /// Wraps nodal values; the length must match the node count.
    pub fn new(mesh: &'m Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { mesh, values })
    }

    /// The zero field.
    pub fn zeros(mesh: &'m Mesh) -> Self {
        Self { mesh, values: vec![0.0; mesh.node_count()] }
    }

    /// Nodal interpolant of `f(x, y)` (`y = 0` in 1D).
    pub fn from_fn(mesh: &'m Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh.nodes().iter().map(|&[x, y]| f(x, y)).collect();
        Self { mesh, values }
    }

    /// The mesh.
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    /// Nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable nodal values.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Consumes the field, returning its values.
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { mesh: self.mesh, values }
    }

    pub(crate) fn ensure_same_mesh(&self, other: &ScalarField<'_>) -> Result<()> {
        if core::ptr::eq(self.mesh, other.mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// `c · u`.
    pub fn scaled(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    /// `true` if the field vanishes at every boundary node.
    pub fn is_dirichlet_admissible(&self) -> bool {
        self.values
            .iter()
            .zip(self.mesh.boundary_mask())
            .all(|(&v, &b)| !b || v == 0.0)
    }

    /// Euclidean norm of the (constant) gradient on every element.
    pub fn grad_norms(&self) -> Vec<f64> {
        (0..self.mesh.element_count())
            .map(|e| crate::descent::cell_gradient(self.mesh, e, &self.values))
            .map(|g| g[0].hypot(g[1]))
            .collect()
    }

    /// `(Σ_i m_i |u_i|^p)^{1/p}`.
    pub fn norm_p(&self, p: f64) -> f64 {
        self.integral_abs_pow(p).powf(1.0 / p)
    }

    /// `Σ_i m_i |u_i|^p`, the lumped `∫|u|^p`.
    pub fn integral_abs_pow(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(self.mesh.lumped_mass())
            .map(|(v, m)| m * v.abs().powf(p))
            .sum()
    }

    /// `∫ |∇u|^p`, exact for P1.
    pub fn grad_energy(&self, p: f64) -> f64 {
        crate::descent::grad_energy(self.mesh, &self.values, p)
    }

    /// Lumped inner product `Σ_i m_i u_i v_i`.
    pub fn lumped_dot(&self, other: &ScalarField<'_>) -> Result<f64> {
        self.ensure_same_mesh(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.mesh.lumped_mass())
            .map(|((a, b), m)| m * a * b)
            .sum())
    }

    /// Nodal positive and negative parts, `u = u₊ − u₋`.
    pub fn split_parts(&self) -> (Self, Self) {
        let plus = self.values.iter().map(|&v| v.max(0.0)).collect();
        let minus = self.values.iter().map(|&v| (-v).max(0.0)).collect();
        (self.with_values(plus), self.with_values(minus))
    }

    /// `u / ‖u‖_p`.
    pub fn normalize_p(&self, p: f64) -> Result<Self> {
        let norm = self.norm_p(p);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateField("cannot normalize a zero field"));
        }
        Ok(self.scaled(1.0 / norm))
    }

    /// `self − other`.
    pub fn sub(&self, other: &ScalarField<'_>) -> Result<Self> {
        self.ensure_same_mesh(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat() -> Mesh {
        Mesh::interval(0.0, 1.0, 2).unwrap()
    }

    #[test]
    fn interval_nodes_and_measures() {
        let m = Mesh::interval(0.0, 1.0, 4).unwrap();
        let xs: Vec<f64> = m.nodes().iter().map(|n| n[0]).collect();
        assert_eq!(xs, [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.element_count(), 4);
        assert!(m.element_measure().iter().all(|&h| h == 0.25));
        assert_eq!(m.boundary_mask(), &[true, false, false, false, true]);
    }

    #[test]
    fn interval_lumped_mass_sums_to_length() {
        let m = Mesh::interval(-2.0, 2.0, 8).unwrap();
        let total: f64 = m.lumped_mass().iter().sum();
        assert!((total - 4.0).abs() < 1e-12 * 4.0);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Mesh::interval(1.0, 1.0, 4).is_err());
        assert!(Mesh::interval(0.0, 1.0, 1).is_err());
        assert!(Mesh::rectangle(0.0, 1.0, 2.0, 2.0, 4, 4).is_err());
        assert!(Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 1, 4).is_err());
        assert!(Mesh::interval(f64::NAN, 1.0, 4).is_err());
    }

    #[test]
    fn rectangle_counts_and_areas() {
        let m = Mesh::rectangle(0.0, 2.0, 0.0, 2.0, 2, 2).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.element_count(), 8);
        assert!(m.element_measure().iter().all(|&a| (a - 0.5).abs() < 1e-15));
        assert!((0..8).all(|e| m.signed_measure(e) > 0.0));
        // only the centre node is interior
        let interior: Vec<usize> = (0..9).filter(|&i| !m.boundary_mask()[i]).collect();
        assert_eq!(interior, [4]);
    }

    #[test]
    fn rectangle_measure_and_mass() {
        let m = Mesh::rectangle(-2.0, 2.0, -2.0, 2.0, 7, 5).unwrap();
        let area: f64 = m.element_measure().iter().sum();
        let mass: f64 = m.lumped_mass().iter().sum();
        assert!((area - 16.0).abs() < 1e-12 * 16.0);
        assert!((mass - 16.0).abs() < 1e-12 * 16.0);
    }

    #[test]
    fn corner_hat_gradients_are_axis_aligned() {
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        // node 0 is the corner (0, 0); both triangles of the first cell touch it
        for e in 0..m.element_count() {
            if let Some(local) = m.element(e).iter().position(|&n| n == 0) {
                let g = m.basis_gradients(e)[local];
                let (big, small) = if g[0].abs() > g[1].abs() { (g[0], g[1]) } else { (g[1], g[0]) };
                assert!((big.abs() - 2.0).abs() < 1e-14, "{g:?}");
                assert_eq!(small, 0.0);
            }
        }
    }

    #[test]
    fn basis_gradients_partition_of_unity() {
        let m = Mesh::rectangle(-1.0, 3.0, 0.5, 2.0, 6, 9).unwrap();
        for e in 0..m.element_count() {
            let s = m.basis_gradients(e).iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
            assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12);
        }
        let m = Mesh::interval(0.0, 3.0, 7).unwrap();
        for e in 0..m.element_count() {
            let s: f64 = m.basis_gradients(e).iter().map(|g| g[0]).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn grad_norms_examples() {
        let m = hat();
        let u = ScalarField::new(&m, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(u.grad_norms(), [2.0, 2.0]);
        let c = ScalarField::new(&m, vec![3.0, 3.0, 3.0]).unwrap();
        assert_eq!(c.grad_norms(), [0.0, 0.0]);
        let m8 = Mesh::interval(0.0, 1.0, 8).unwrap();
        let x = ScalarField::from_fn(&m8, |x, _| x);
        assert!(x.grad_norms().iter().all(|g| (g - 1.0).abs() < 1e-13));
    }

    #[test]
    fn norms_and_energy_examples() {
        let m = Mesh::interval(0.0, 1.0, 10).unwrap();
        let one = ScalarField::from_fn(&m, |_, _| 1.0);
        assert!((one.norm_p(3.0) - 1.0).abs() < 1e-14);
        let h = hat();
        let u = ScalarField::new(&h, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((u.grad_energy(2.0) - 4.0).abs() < 1e-14);
        let x = ScalarField::from_fn(&m, |x, _| x);
        assert!((x.grad_energy(2.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn split_parts_examples() {
        let m = hat();
        let u = ScalarField::new(&m, vec![-1.0, 0.0, 2.0]).unwrap();
        let (plus, minus) = u.split_parts();
        assert_eq!(plus.values(), [0.0, 0.0, 2.0]);
        assert_eq!(minus.values(), [1.0, 0.0, 0.0]);
        let pos = ScalarField::new(&m, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(pos.split_parts().1.values().iter().all(|&v| v == 0.0));

        let sym = Mesh::interval(-1.0, 1.0, 10).unwrap();
        let odd = ScalarField::from_fn(&sym, |x, _| x * x * x - 0.3 * x);
        let (plus, minus) = odd.split_parts();
        assert!((plus.norm_p(2.5) - minus.norm_p(2.5)).abs() < 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let m = Mesh::interval(0.0, 1.0, 6).unwrap();
        let two = ScalarField::from_fn(&m, |_, _| 2.0);
        let n = two.normalize_p(2.0).unwrap();
        assert!(n.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(ScalarField::zeros(&m).normalize_p(2.0).is_err());

        // lumped norm of the hat on two cells: m = (1/4, 1/2, 1/4), so ‖hat‖₂ = sqrt(1/2)
        let h = hat();
        let u = ScalarField::new(&h, vec![0.0, 1.0, 0.0]).unwrap();
        let n = u.normalize_p(2.0).unwrap();
        assert!((n.values()[1] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let m = hat();
        assert_eq!(ScalarField::new(&m, vec![0.0; 4]), Err(Error::MeshMismatch));
        let other = hat();
        let a = ScalarField::zeros(&m);
        let b = ScalarField::zeros(&other);
        assert!(a.lumped_dot(&b).is_err());
    }

    #[test]
    fn dirichlet_admissibility() {
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let bubble = ScalarField::from_fn(&m, |x, y| x * (1.0 - x) * y * (1.0 - y));
        assert!(bubble.is_dirichlet_admissible());
        assert!(!ScalarField::from_fn(&m, |_, _| 1.0).is_dirichlet_admissible());
    }

    #[test]
    fn sine_energy_converges_at_second_order() {
        let exact = core::f64::consts::PI.powi(2) / 2.0;
        let err = |n: usize| {
            let m = Mesh::interval(0.0, 1.0, n).unwrap();
            let u = ScalarField::from_fn(&m, |x, _| (core::f64::consts::PI * x).sin());
            (u.grad_energy(2.0) - exact).abs()
        };
        let (e1, e2, e3) = (err(16), err(32), err(64));
        assert!((e1 / e2).log2() > 1.9 && (e2 / e3).log2() > 1.9, "{e1} {e2} {e3}");
    }
}
