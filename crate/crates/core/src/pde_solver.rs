//! p-Poisson solves `−Δ_p u = f` on a [`Mesh`] with Dirichlet or Neumann
//! boundary conditions, and an inverse power routine for the first
//! Dirichlet eigenpair.
//!
//! The solver minimizes `E(u) = (1/p)∫|∇u|^p − ∫ f u` by descent: every step
//! takes the residual `R`, solves the linearized problem
//! `∫ (ε + |∇u|)^{p−2} ∇w·∇φ = ∫ R φ` for a direction `w`, and picks the
//! step length by a line search on `E(u + αw)`. For `p = 2` with `ε = 0` one
//! step with `α = 1` is the exact linear solve.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Redundant whenever `std` is linked into the build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::descent::{self, Problem};
use crate::eigensolver::{p_mean_shift, EigenOptions};
use crate::mesh::{Domain, Mesh, ScalarField};
use crate::{Error, Result};

/// Boundary condition of the p-Laplace problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `u = 0` on `∂Ω`.
    Dirichlet,
    /// `|∇u|^{p−2} ∂_ν u = 0` on `∂Ω`.
    Neumann,
}

impl BoundaryCondition {
    /// Lowercase name, as used in reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }
}

/// Linear solver for the linearized system in each descent step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Banded LDLᵀ when the half-bandwidth is at most 8 (1D meshes), CG otherwise.
    #[default]
    Auto,
    /// Jacobi-preconditioned conjugate gradient.
    ConjugateGradient,
    /// Banded LDLᵀ, whatever the bandwidth.
    Banded,
}

/// Parameters of the descent solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Exponent `p > 1`.
    pub p: f64,
    /// Regularization `ε` in the linearized weight `(ε + |∇u|)^{p−2}`.
    pub eps_reg: f64,
    /// Bounds `(w_min, w_max)` the weight is clamped to.
    pub weight_clamp: (f64, f64),
    /// Target for the relative residual `‖R‖_* / ‖m f‖_*`.
    pub outer_tol: f64,
    /// Maximum number of descent steps.
    pub max_outer: usize,
    /// Relative residual target of the inner CG solve.
    pub cg_tol: f64,
    /// CG iteration budget.
    pub cg_max_iter: usize,
    /// Upper end of the line-search interval.
    pub alpha_max: f64,
    /// Linear solver for the search direction.
    pub linear_solver: LinearSolver,
    /// On interval meshes, start the descent from the flux-integrated
    /// solution instead of the given guess.
    pub interval_flux_start: bool,
}

impl SolverConfig {
    /// Defaults for exponent `p` on a domain of unit diameter.
    ///
    /// `alpha_max` is `2` for `p ≥ 2` and `2 / (p − 1)` below, since the
    /// weighted direction is shorter than the Newton step by a factor
    /// `p − 1` there.
    pub fn new(p: f64) -> Self {
        Self {
            p,
            eps_reg: 1e-8,
            weight_clamp: (1e-10, 1e10),
            outer_tol: 1e-10,
            max_outer: 200,
            cg_tol: 1e-12,
            cg_max_iter: 50_000,
            alpha_max: 2.0 * (1.0 / (p - 1.0)).max(1.0),
            linear_solver: LinearSolver::Auto,
            interval_flux_start: true,
        }
    }

    /// Defaults with `ε = 1e-8 / diam(Ω)`.
    pub fn for_mesh(p: f64, mesh: &Mesh) -> Self {
        Self { eps_reg: 1e-8 / mesh.domain().diameter(), ..Self::new(p) }
    }

    /// Defaults for graph iterates, with `ε = 1e-14`.
    ///
    /// Graph iterates have unit ℓ^p norm over all nodes and are nearly
    /// constant on well-separated clusters, so edge differences far below
    /// `1e-8` are common; a larger `ε` would dominate their weights.
    pub fn for_graph(p: f64) -> Self {
        Self { eps_reg: 1e-14, ..Self::new(p) }
    }

    /// Checks the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("{what} in {self:?}")));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad("p must be > 1");
        }
        let (lo, hi) = self.weight_clamp;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("weight clamp must satisfy 0 < w_min <= w_max");
        }
        if !(self.eps_reg >= 0.0) {
            return bad("eps_reg must be >= 0");
        }
        if !(self.outer_tol > 0.0 && self.cg_tol > 0.0 && self.alpha_max > 0.0) {
            return bad("tolerances and alpha_max must be positive");
        }
        if self.cg_max_iter == 0 {
            return bad("cg_max_iter must be positive");
        }
        Ok(())
    }
}

/// History of a p-Poisson solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Accepted descent steps.
    pub iterations: usize,
    /// Relative residual before each step, and after the last one.
    pub residual_history: Vec<f64>,
    /// Energy before the first step and after every accepted step. Updates
    /// are accumulated from the cancellation-free step decrements, so the
    /// sequence is non-increasing.
    pub energy_history: Vec<f64>,
    /// The residual target was reached.
    pub converged: bool,
    /// The line search stopped finding a decrease before the target.
    pub stagnated: bool,
}

/// One descent step.
#[derive(Debug, Clone)]
pub struct DescentStep<'m> {
    /// `u + α w`.
    pub u: ScalarField<'m>,
    /// Accepted step length.
    pub alpha: f64,
    /// `E(u + α w)`.
    pub energy: f64,
    /// `Σ_i R_i w_i`, positive for a descent direction.
    pub slope: f64,
}

fn fixed_nodes(mesh: &Mesh, bc: BoundaryCondition) -> Vec<bool> {
    match bc {
        BoundaryCondition::Dirichlet => mesh.boundary_mask().to_vec(),
        BoundaryCondition::Neumann => {
            let mut fixed = vec![false; mesh.node_count()];
            fixed[0] = true;
            fixed
        }
    }
}

/// `E(u) = (1/p)∫|∇u|^p − Σ_i m_i f_i u_i`.
pub fn energy(u: &ScalarField<'_>, f: &ScalarField<'_>, p: f64) -> Result<f64> {
    u.ensure_same_mesh(f)?;
    Ok(descent::energy(u.mesh(), u.values(), f.values(), p))
}

/// Nodal weak residual `R_i = m_i f_i − Σ_e |e| |∇u|^{p−2} ∇u·∇φ_i`.
///
/// Boundary entries are zero for Dirichlet problems.
pub fn residual<'m>(
    u: &ScalarField<'m>,
    f: &ScalarField<'_>,
    p: f64,
    bc: BoundaryCondition,
) -> Result<ScalarField<'m>> {
    u.ensure_same_mesh(f)?;
    let fixed = match bc {
        BoundaryCondition::Dirichlet => u.mesh().boundary_mask().to_vec(),
        BoundaryCondition::Neumann => vec![false; u.mesh().node_count()],
    };
    Ok(u.with_values(descent::residual(u.mesh(), u.values(), f.values(), p, &fixed)))
}

/// Gâteaux derivative of [`energy`] at `u` along `v`.
pub fn energy_derivative(u: &ScalarField<'_>, v: &ScalarField<'_>, f: &ScalarField<'_>, p: f64) -> Result<f64> {
    u.ensure_same_mesh(v)?;
    u.ensure_same_mesh(f)?;
    let flux = descent::flux(u.mesh(), u.values(), p);
    let stiff: f64 = flux.iter().zip(v.values()).map(|(a, b)| a * b).sum();
    Ok(stiff - descent::load_dot(u.mesh(), f.values(), v.values()))
}

/// One weighted-linearization descent step from `u`.
///
/// Fails with [`Error::Stagnation`] if no step along the direction lowers
/// the energy, and with [`Error::CgNotConverged`] if the linear solve fails.
pub fn descent_step<'m>(
    u: &ScalarField<'m>,
    f: &ScalarField<'_>,
    bc: BoundaryCondition,
    config: &SolverConfig,
) -> Result<DescentStep<'m>> {
    config.validate()?;
    u.ensure_same_mesh(f)?;
    let mesh = u.mesh();
    let fixed = fixed_nodes(mesh, bc);
    let mut problem = Problem::new(mesh, f.values(), &fixed);
    let r = problem.residual(u.values(), config.p);
    let e0 = problem.energy(u.values(), config.p);
    let step = problem.step(u.values(), &r, config)?;
    Ok(DescentStep {
        u: u.with_values(step.u),
        alpha: step.alpha,
        energy: e0 + step.energy_change,
        slope: step.slope,
    })
}

/// Solves `−Δ_p u = f`, `u = 0` on `∂Ω`, starting from `u = 0`.
pub fn solve_p_poisson_dirichlet<'m>(
    f: &ScalarField<'m>,
    config: &SolverConfig,
) -> Result<(ScalarField<'m>, SolveReport)> {
    solve_p_poisson(f, None, BoundaryCondition::Dirichlet, config)
}

/// Solves `−Δ_p u = f` with natural boundary conditions, starting from `u = 0`.
///
/// The load must satisfy `|Σ m_i f_i| ≤ 1e-10 Σ m_i |f_i|`. The system is
/// solved with node 0 pinned and the result shifted to zero p-mean.
pub fn solve_p_poisson_neumann<'m>(
    f: &ScalarField<'m>,
    config: &SolverConfig,
) -> Result<(ScalarField<'m>, SolveReport)> {
    solve_p_poisson(f, None, BoundaryCondition::Neumann, config)
}

/// Solves `−Δ_p u = f` from an initial guess (zero if `None`).
///
/// Dirichlet guesses are zeroed on the boundary. Neumann solves keep the
/// guess value at node 0 fixed, then shift the result to zero p-mean. A run
/// that ends before the residual target is returned with
/// `report.converged = false`.
pub fn solve_p_poisson<'m>(
    f: &ScalarField<'m>,
    initial: Option<&ScalarField<'_>>,
    bc: BoundaryCondition,
    config: &SolverConfig,
) -> Result<(ScalarField<'m>, SolveReport)> {
    config.validate()?;
    let mesh = f.mesh();
    let mut u0 = match initial {
        Some(u) => {
            f.ensure_same_mesh(u)?;
            u.values().to_vec()
        }
        None => vec![0.0; mesh.node_count()],
    };
    if bc == BoundaryCondition::Neumann {
        let defect = descent::load_dot(mesh, f.values(), &vec![1.0; mesh.node_count()]);
        let size: f64 = mesh.lumped_mass().iter().zip(f.values()).map(|(m, v)| m * v.abs()).sum();
        if defect.abs() > 1e-10 * size {
            return Err(Error::IncompatibleLoad { defect, tolerance: 1e-10 * size });
        }
    }
    let fixed = fixed_nodes(mesh, bc);
    if bc == BoundaryCondition::Dirichlet {
        for (v, &b) in u0.iter_mut().zip(&fixed) {
            if b {
                *v = 0.0;
            }
        }
    }
    if config.interval_flux_start {
        if let Some(u) = interval_flux_solution(mesh, f.values(), bc, u0[0], config.p) {
            u0 = u;
        }
    }
    let (u, report) = Problem::new(mesh, f.values(), &fixed).minimize(u0, config)?;
    let u = f.with_values(u);
    let u = match bc {
        BoundaryCondition::Dirichlet => u,
        BoundaryCondition::Neumann => p_mean_shift(&u, config.p),
    };
    Ok((u, report))
}

/// Discrete solution on an interval mesh from the element fluxes.
///
/// On an interval the nodal equations read `q_{e−1} − q_e = m_i f_i` for the
/// element fluxes `q_e = |u'_e|^{p−2} u'_e`, so the fluxes are cumulative
/// sums of the load up to one constant. Dirichlet problems fix that constant
/// by bisection on `Σ_e |e| φ_{p'}(q_e) = 0`, and the element where `q_e`
/// is closest to zero takes the slope that closes `u(b) = 0`; Neumann problems start from
/// `q_0 = −m_0 f_0`. The slopes `φ_{p'}(q_e)` are then integrated from `u_0`.
/// Returns `None` for rectangle meshes.
fn interval_flux_solution(mesh: &Mesh, f: &[f64], bc: BoundaryCondition, u_start: f64, p: f64) -> Option<Vec<f64>> {
    if !matches!(mesh.domain(), Domain::Interval { .. }) {
        return None;
    }
    let mass = mesh.lumped_mass();
    let h = mesh.element_measure();
    let cells = h.len();
    let inv = 1.0 / (p - 1.0);
    let slope = |q: f64| q.abs().powf(inv).copysign(q);
    // q_e = c − s_e with s_0 = 0 and s_e = Σ_{k=1..e} m_k f_k
    let mut s = Vec::with_capacity(cells);
    let mut acc = 0.0;
    s.push(0.0);
    for k in 1..cells {
        acc += mass[k] * f[k];
        s.push(acc);
    }
    let c = match bc {
        BoundaryCondition::Neumann => -mass[0] * f[0],
        BoundaryCondition::Dirichlet => {
            let rise = |c: f64| -> f64 { s.iter().zip(h).map(|(se, he)| he * slope(c - se)).sum() };
            let mut lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let mut hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if rise(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let mut slopes: Vec<f64> = s.iter().map(|se| slope(c - se)).collect();
    if bc == BoundaryCondition::Dirichlet {
        // φ_{p'} is steep at zero, so the element where the flux changes sign
        // takes whatever slope closes u(b) = 0.
        let pivot = (0..cells)
            .min_by(|&i, &j| (c - s[i]).abs().total_cmp(&(c - s[j]).abs()))
            .unwrap_or(0);
        let rest: f64 = (0..cells).filter(|&e| e != pivot).map(|e| h[e] * slopes[e]).sum();
        slopes[pivot] = -rest / h[pivot];
    }
    let mut u = Vec::with_capacity(cells + 1);
    let start = if bc == BoundaryCondition::Dirichlet { 0.0 } else { u_start };
    u.push(start);
    for e in 0..cells {
        let next = u[e] + h[e] * slopes[e];
        u.push(next);
    }
    if bc == BoundaryCondition::Dirichlet {
        u[cells] = 0.0;
    }
    u.iter().all(|v| v.is_finite()).then_some(u)
}

/// First Dirichlet eigenpair by the inverse power method.
#[derive(Debug, Clone)]
pub struct FirstEigenpair<'m> {
    /// `λ₁ = ∫|∇w₁|^p` with `‖w₁‖_p = 1`.
    pub lambda1: f64,
    /// Nonnegative normalized eigenfunction.
    pub w1: ScalarField<'m>,
    /// Inverse power iterations performed.
    pub iterations: usize,
}

/// First Dirichlet eigenpair: iterates `v ← solve(λ φ_p(ṽ))`, normalizing in
/// `L^p` every step, until the relative change of `λ₁` is below
/// `options.outer_tol`.
///
/// Starts from the product of half-period sines, which is positive inside.
pub fn first_eigenpair<'m>(
    mesh: &'m Mesh,
    config: &SolverConfig,
    options: &EigenOptions,
) -> Result<FirstEigenpair<'m>> {
    config.validate()?;
    crate::check_exponent(config.p)?;
    let p = config.p;
    let pi = core::f64::consts::PI;
    let mut v = match mesh.domain() {
        Domain::Interval { a, b } => ScalarField::from_fn(mesh, |x, _| (pi * (x - a) / (b - a)).sin()),
        Domain::Rectangle { x0, x1, y0, y1 } => ScalarField::from_fn(mesh, |x, y| {
            (pi * (x - x0) / (x1 - x0)).sin() * (pi * (y - y0) / (y1 - y0)).sin()
        }),
    };
    for (val, &b) in v.values_mut().iter_mut().zip(mesh.boundary_mask()) {
        if b {
            *val = 0.0;
        }
    }
    let mut v = v.normalize_p(p)?;
    let mut lambda = v.grad_energy(p);
    for it in 1..=options.max_outer {
        let f = v.with_values(v.values().iter().map(|&t| lambda * crate::phi_p(t, p)).collect());
        let (next, report) = solve_p_poisson(&f, Some(&v), BoundaryCondition::Dirichlet, config)?;
        if !report.converged {
            return Err(Error::InnerNotConverged {
                iteration: it,
                residual: report.residual_history.last().copied().unwrap_or(f64::NAN),
            });
        }
        v = next.normalize_p(p)?;
        let next_lambda = v.grad_energy(p);
        let change = (next_lambda - lambda).abs();
        lambda = next_lambda;
        log::debug!("first eigenpair {it}: lambda1 {lambda:.12e}");
        if change <= options.outer_tol * lambda {
            if v.values().iter().sum::<f64>() < 0.0 {
                v = v.scaled(-1.0);
            }
            return Ok(FirstEigenpair { lambda1: lambda, w1: v, iterations: it });
        }
    }
    Err(Error::NotConverged { iterations: options.max_outer })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field<'m>(mesh: &'m Mesh, f: impl Fn(f64) -> f64) -> ScalarField<'m> {
        ScalarField::from_fn(mesh, |x, _| f(x))
    }

    #[test]
    fn energy_examples() {
        let m = Mesh::interval(0.0, 1.0, 2).unwrap();
        let zero = ScalarField::zeros(&m);
        let f = field(&m, |x| 1.0 + x);
        assert_eq!(energy(&zero, &f, 3.0).unwrap(), 0.0);
        let hat = ScalarField::new(&m, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((energy(&hat, &zero, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let m = Mesh::interval(0.0, 1.0, 16).unwrap();
        let x = field(&m, |x| x);
        let z = ScalarField::zeros(&m);
        assert!((energy(&x, &z, 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn residual_at_zero_is_the_lumped_load() {
        let m = Mesh::interval(0.0, 1.0, 8).unwrap();
        let f = field(&m, |x| (3.0 * x).cos());
        let r = residual(&ScalarField::zeros(&m), &f, 2.5, BoundaryCondition::Dirichlet).unwrap();
        for i in 1..8 {
            assert!((r.values()[i] - m.lumped_mass()[i] * f.values()[i]).abs() < 1e-15);
        }
        assert_eq!(r.values()[0], 0.0);
        assert_eq!(r.values()[8], 0.0);
    }

    #[test]
    fn residual_of_quadratic_interpolant_is_small() {
        // the 3-point stencil is exact on quadratics, so the interior residual vanishes
        let m = Mesh::interval(0.0, 1.0, 32).unwrap();
        let u = field(&m, |x| 0.5 * x * (1.0 - x));
        let f = field(&m, |_| 1.0);
        let r = residual(&u, &f, 2.0, BoundaryCondition::Dirichlet).unwrap();
        let h: f64 = 1.0 / 32.0;
        for (i, v) in r.values().iter().enumerate() {
            assert!(v.abs() <= h * h * m.lumped_mass()[i] + 1e-15);
        }
    }

    #[test]
    fn linear_case_is_one_newton_step() {
        let m = Mesh::interval(0.0, 1.0, 64).unwrap();
        let f = field(&m, |_| 1.0);
        let cfg = SolverConfig { eps_reg: 0.0, ..SolverConfig::new(2.0) };
        let step = descent_step(&ScalarField::zeros(&m), &f, BoundaryCondition::Dirichlet, &cfg).unwrap();
        assert!((step.alpha - 1.0).abs() < 1e-7, "alpha {}", step.alpha);
        assert!(step.slope > 0.0);
        for (x, u) in m.nodes().iter().zip(step.u.values()) {
            assert!((u - 0.5 * x[0] * (1.0 - x[0])).abs() < 1e-8);
        }
    }

    #[test]
    fn dirichlet_p2_matches_parabola() {
        let m = Mesh::interval(0.0, 1.0, 128).unwrap();
        let f = field(&m, |_| 1.0);
        let (u, rep) = solve_p_poisson_dirichlet(&f, &SolverConfig::for_mesh(2.0, &m)).unwrap();
        assert!(rep.converged);
        let err = m
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(x, u)| (u - 0.5 * x[0] * (1.0 - x[0])).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-4, "{err}");
        let max = u.values().iter().copied().fold(f64::MIN, f64::max);
        assert!((max - 0.125).abs() <= 1e-4);
    }

    #[test]
    fn dirichlet_p3_midpoint() {
        let m = Mesh::interval(0.0, 1.0, 128).unwrap();
        let f = field(&m, |_| 1.0);
        for flux_start in [false, true] {
            let cfg = SolverConfig { interval_flux_start: flux_start, ..SolverConfig::for_mesh(3.0, &m) };
            let (u, rep) = solve_p_poisson_dirichlet(&f, &cfg).unwrap();
            assert!(rep.converged, "{:?}", rep.residual_history);
            let mid = u.values()[64];
            let exact = 2.0 / 3.0 * 0.5f64.powf(1.5);
            assert!((mid - exact).abs() <= 2e-3, "{mid} vs {exact}");
            assert!(rep.energy_history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn interval_flux_solution_has_small_residual() {
        let m = Mesh::interval(-1.0, 2.0, 400).unwrap();
        let f = field(&m, |x| (2.0 * x).sin() + 0.3);
        for p in [1.5, 2.0, 4.0, 30.0] {
            let u = interval_flux_solution(&m, f.values(), BoundaryCondition::Dirichlet, 0.0, p).unwrap();
            let r = descent::residual(&m, &u, f.values(), p, m.boundary_mask());
            let scale: f64 = m.lumped_mass().iter().zip(f.values()).map(|(a, b)| (a * b).abs()).sum();
            let worst = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(worst <= 1e-9 * scale, "p {p}: {worst}");
        }
    }

    #[test]
    fn zero_load_gives_zero() {
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let f = ScalarField::zeros(&m);
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let (u, rep) = solve_p_poisson(&f, None, bc, &SolverConfig::new(3.0)).unwrap();
            assert!(rep.converged);
            assert!(u.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn neumann_rejects_incompatible_load() {
        let m = Mesh::interval(0.0, 1.0, 16).unwrap();
        let f = field(&m, |_| 1.0);
        assert!(matches!(
            solve_p_poisson_neumann(&f, &SolverConfig::new(2.0)),
            Err(Error::IncompatibleLoad { .. })
        ));
    }

    #[test]
    fn neumann_cosine() {
        let pi = core::f64::consts::PI;
        let err = |n: usize| {
            let m = Mesh::interval(0.0, 1.0, n).unwrap();
            let f = field(&m, |x| (pi * x).cos());
            let (u, rep) = solve_p_poisson_neumann(&f, &SolverConfig::new(2.0)).unwrap();
            assert!(rep.converged);
            assert!(crate::eigensolver::p_mean(&u, 2.0).abs() <= 1e-10);
            m.nodes()
                .iter()
                .zip(u.values())
                .map(|(x, u)| (u - (pi * x[0]).cos() / (pi * pi)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 1e-3);
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn p4_energy_strictly_decreases() {
        let m = Mesh::interval(0.0, 1.0, 64).unwrap();
        let f = field(&m, |_| 1.0);
        let cfg = SolverConfig { interval_flux_start: false, ..SolverConfig::for_mesh(4.0, &m) };
        let (_, rep) = solve_p_poisson_dirichlet(&f, &cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations > 1);
        assert!(rep.energy_history.windows(2).all(|w| w[1] < w[0]), "{:?}", rep.energy_history);
    }

    #[test]
    fn tracked_energy_matches_direct_evaluation() {
        let m = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 12, 12).unwrap();
        let f = ScalarField::from_fn(&m, |x, y| 1.0 + x * y);
        let (u, rep) = solve_p_poisson_dirichlet(&f, &SolverConfig::for_mesh(3.0, &m)).unwrap();
        let direct = energy(&u, &f, 3.0).unwrap();
        let tracked = *rep.energy_history.last().unwrap();
        assert!((direct - tracked).abs() <= 1e-12 * direct.abs(), "{direct} {tracked}");
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(2.0).validate().is_ok());
        assert!(SolverConfig::new(1.0).validate().is_err());
        let cfg = SolverConfig { weight_clamp: (1.0, 0.5), ..SolverConfig::new(2.0) };
        assert!(cfg.validate().is_err());
        assert!(SolverConfig::new(1.25).alpha_max == 8.0);
        assert!(SolverConfig::new(3.0).alpha_max == 2.0);
    }

    #[test]
    fn first_eigenpair_interval() {
        let m = Mesh::interval(0.0, 1.0, 512).unwrap();
        let cfg = SolverConfig::for_mesh(2.0, &m);
        let res = first_eigenpair(&m, &cfg, &EigenOptions::default()).unwrap();
        let pi2 = core::f64::consts::PI.powi(2);
        assert!((res.lambda1 / pi2 - 1.0).abs() < 0.005);
        assert!(res.w1.values().iter().all(|&v| v >= -1e-12));
    }
}
