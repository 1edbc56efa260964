//! Bipartition inverse power iteration for the second p-Laplace eigenpair.
//!
//! An iterate `u` is split into its positive and negative parts, each
//! normalized in `L^p` to `ũ±`. One step solves
//!
//! ```text
//! −Δ_p u' = λ₊ ũ₊^{p−1} − λ₋ ũ₋^{p−1}
//! ```
//!
//! with the chosen boundary condition, from the warm start `ũ₊ − ũ₋`.
//! Normalizing the parts separately keeps both nodal domains at equal weight,
//! so the iteration does not drift towards the one-signed first eigenfunction.
//! The part energies `λ±` are measured in weak form against the whole
//! iterate (see [`BipartitionState::from_field`]). Under Neumann conditions
//! the load is made compatible (zero lumped mean) and the solution is shifted
//! to zero p-mean.
//!
//! The run stops once both part energies settle and the eigen residual of
//! `ũ₊ − ũ₋` is small (or no longer shrinking); then `λ₂ = max(λ₊, λ₋)`.

use alloc::vec::Vec;

// Redundant whenever `std` is linked into the build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::descent;
use crate::mesh::{Domain, Mesh, ScalarField};
use crate::pde_solver::{solve_p_poisson, BoundaryCondition, SolverConfig};
use crate::{phi_p, Error, Result};

/// Stopping rule of the outer (eigen) iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative change of `λ±` below which the iteration stops.
    pub outer_tol: f64,
    /// Iteration cap.
    pub max_outer: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { outer_tol: 1e-6, max_outer: 200 }
    }
}

/// `(1/|Ω|) Σ_i m_i |u_i|^{p−2} u_i`.
pub fn p_mean(u: &ScalarField<'_>, p: f64) -> f64 {
    let mesh = u.mesh();
    let s: f64 = u
        .values()
        .iter()
        .zip(mesh.lumped_mass())
        .map(|(&v, m)| m * phi_p(v, p))
        .sum();
    s / mesh.measure()
}

/// The constant `c` with `mean_p(u − c) = 0`, found by bisection on
/// `[min u, max u]` (the p-mean of `u − c` is decreasing in `c`).
pub fn p_mean_offset(u: &ScalarField<'_>, p: f64) -> f64 {
    zero_p_mean_offset(u.values(), u.mesh().lumped_mass(), p)
}

/// Bisection for `Σ_i m_i φ_p(v_i − c) = 0` on `[min v, max v]`.
pub(crate) fn zero_p_mean_offset(vals: &[f64], mass: &[f64], p: f64) -> f64 {
    let mut lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return lo;
    }
    let g = |c: f64| -> f64 { vals.iter().zip(mass).map(|(&v, m)| m * phi_p(v - c, p)).sum() };
    let (mut g_lo, mut g_hi) = (g(lo), g(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if g_mid > 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    if g_lo.abs() <= g_hi.abs() {
        lo
    } else {
        hi
    }
}

/// `u − c` with zero p-mean. A constant field maps to zero.
pub fn p_mean_shift<'m>(u: &ScalarField<'m>, p: f64) -> ScalarField<'m> {
    let c = p_mean_offset(u, p);
    let mut out = u.clone();
    let constant = u.values().iter().all(|&v| v == u.values()[0]);
    for v in out.values_mut() {
        *v = if constant { 0.0 } else { *v - c };
    }
    out
}

/// One iterate of the bipartition scheme.
#[derive(Debug, Clone)]
pub struct BipartitionState<'m> {
    /// The field the parts were taken from (a solve output, before normalization).
    pub u: ScalarField<'m>,
    /// `ũ₊ = u₊ / ‖u₊‖_p`.
    pub u_plus: ScalarField<'m>,
    /// `ũ₋ = u₋ / ‖u₋‖_p`.
    pub u_minus: ScalarField<'m>,
    /// `⟨u₊, −Δ_p u⟩ / ‖u₊‖_p^p`, the energy of the positive part.
    pub lambda_plus: f64,
    /// `⟨u₋, Δ_p u⟩ / ‖u₋‖_p^p`, the energy of the negative part.
    pub lambda_minus: f64,
    /// `∫|∇u|^p / ∫|u|^p`.
    pub rayleigh: f64,
    /// `(‖u₊‖_p, ‖u₋‖_p)` before normalization.
    pub part_norms: (f64, f64),
    /// `‖u₊‖_p / ‖u₋‖_p` before normalization.
    pub part_norm_ratio: f64,
    /// Exponent the state was built with.
    pub p: f64,
}

impl<'m> BipartitionState<'m> {
    /// Splits `u` and normalizes both parts. Fails with
    /// [`Error::PartitionCollapse`] (iteration 0) if a part vanishes.
    ///
    /// The part energies are measured against the discrete operator applied
    /// to the whole of `u`, so that `λ₊‖u₊‖^p + λ₋‖u₋‖^p = ∫|∇u|^p` holds
    /// exactly. Evaluating `∫|∇ũ±|^p` instead drops the cross terms of the
    /// elements cut by the nodal line.
    pub fn from_field(u: ScalarField<'m>, p: f64) -> Result<Self> {
        let (plus, minus) = u.split_parts();
        let (np, nm) = (plus.norm_p(p), minus.norm_p(p));
        if !(np > 0.0) {
            return Err(Error::PartitionCollapse { iteration: 0, side: "positive" });
        }
        if !(nm > 0.0) {
            return Err(Error::PartitionCollapse { iteration: 0, side: "negative" });
        }
        let flux = descent::flux(u.mesh(), u.values(), p);
        let dot = |v: &ScalarField<'_>| -> f64 { flux.iter().zip(v.values()).map(|(a, b)| a * b).sum() };
        let lambda_plus = dot(&plus) / np.powf(p);
        let lambda_minus = -dot(&minus) / nm.powf(p);
        let rayleigh = u.grad_energy(p) / u.integral_abs_pow(p);
        Ok(Self {
            u_plus: plus.scaled(1.0 / np),
            u_minus: minus.scaled(1.0 / nm),
            u,
            lambda_plus,
            lambda_minus,
            rayleigh,
            part_norms: (np, nm),
            part_norm_ratio: np / nm,
            p,
        })
    }

    /// `ũ₊ − ũ₋`.
    pub fn normalized(&self) -> ScalarField<'m> {
        self.u_plus.sub(&self.u_minus).expect("parts share the mesh")
    }

    /// `ũ₊ − ũ₋`, the current eigenfunction estimate.
    pub fn eigenfunction(&self) -> ScalarField<'m> {
        self.normalized()
    }

    /// `max(λ₊, λ₋)`.
    pub fn max_lambda(&self) -> f64 {
        self.lambda_plus.max(self.lambda_minus)
    }

    /// Relative errors of the lumped identities that hold for normalized,
    /// disjoint parts:
    /// `∫|ũ₊ − ũ₋|^p = ∫ũ₊^p + ∫ũ₋^p`,
    /// `∫|λ₊ũ₊ − λ₋ũ₋|^p = λ₊^p + λ₋^p` and
    /// `∫|f|^{p/(p−1)} = λ₊^{p/(p−1)} + λ₋^{p/(p−1)}` for `f` from [`build_rhs`].
    pub fn identity_errors(&self) -> [f64; 3] {
        let p = self.p;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        let (mp, mm) = (self.lambda_plus, self.lambda_minus);
        let whole = self.normalized().integral_abs_pow(p);
        let parts = self.u_plus.integral_abs_pow(p) + self.u_minus.integral_abs_pow(p);
        let scaled = self.u_plus.scaled(mp).sub(&self.u_minus.scaled(mm)).expect("same mesh");
        let q = p / (p - 1.0);
        let rhs = build_rhs(self);
        [
            rel(whole, parts),
            rel(scaled.integral_abs_pow(p), mp.powf(p) + mm.powf(p)),
            rel(rhs.integral_abs_pow(q), mp.powf(q) + mm.powf(q)),
        ]
    }
}

/// `f_i = λ₊ (ũ₊,i)^{p−1} − λ₋ (ũ₋,i)^{p−1}`.
pub fn build_rhs<'m>(state: &BipartitionState<'m>) -> ScalarField<'m> {
    let (mp, mm) = (state.lambda_plus, state.lambda_minus);
    let e = state.p - 1.0;
    let values = state
        .u_plus
        .values()
        .iter()
        .zip(state.u_minus.values())
        .map(|(&a, &b)| mp * a.powf(e) - mm * b.powf(e))
        .collect();
    state.u.with_values(values)
}

/// Starting bipartition from the second Laplace eigenfunction.
///
/// Dirichlet: `sin(2π(x−a)/(b−a))` on intervals, and on rectangles the
/// product of a full-period sine along the longer side with a half-period
/// sine along the other. Neumann: a half-period cosine along the longer side,
/// shifted to zero p-mean.
pub fn init_guess(mesh: &Mesh, p: f64, bc: BoundaryCondition) -> Result<BipartitionState<'_>> {
    let pi = core::f64::consts::PI;
    let u = match (mesh.domain(), bc) {
        (Domain::Interval { a, b }, BoundaryCondition::Dirichlet) => {
            ScalarField::from_fn(mesh, |x, _| (2.0 * pi * (x - a) / (b - a)).sin())
        }
        (Domain::Interval { a, b }, BoundaryCondition::Neumann) => {
            ScalarField::from_fn(mesh, |x, _| (pi * (x - a) / (b - a)).cos())
        }
        (Domain::Rectangle { x0, x1, y0, y1 }, bc) => {
            let (lx, ly) = (x1 - x0, y1 - y0);
            let x_long = lx >= ly;
            ScalarField::from_fn(mesh, |x, y| {
                let (s, t) = ((x - x0) / lx, (y - y0) / ly);
                let (long, short) = if x_long { (s, t) } else { (t, s) };
                match bc {
                    BoundaryCondition::Dirichlet => (2.0 * pi * long).sin() * (pi * short).sin(),
                    BoundaryCondition::Neumann => (pi * long).cos(),
                }
            })
        }
    };
    let u = match bc {
        BoundaryCondition::Dirichlet => {
            let mut u = u;
            for (v, &b) in u.values_mut().iter_mut().zip(mesh.boundary_mask()) {
                if b {
                    *v = 0.0;
                }
            }
            u
        }
        BoundaryCondition::Neumann => p_mean_shift(&u, p),
    };
    BipartitionState::from_field(u, p).map_err(|_| {
        Error::InvalidMesh(alloc::format!(
            "resolution {:?} cannot resolve a sign change of the initial guess",
            mesh.resolution()
        ))
    })
}

/// Which invariant an iterate violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    /// `λ^k ≤ max(λ₊^{k−1}, λ₋^{k−1})`.
    RayleighBound,
    /// `‖u^k‖_p ≥ 2^{−(p−1)/p}`.
    LowerBound,
    /// One of the lumped part identities.
    PartIdentity,
}

/// A recorded invariant violation; the iteration continues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantViolation {
    /// Outer iteration.
    pub iteration: usize,
    /// Violated invariant.
    pub kind: InvariantKind,
    /// Signed margin (negative means violated) or identity error.
    pub margin: f64,
}

/// Per-iteration checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiagnostics {
    /// Outer iteration (1-based).
    pub iteration: usize,
    /// `λ^k`, the Rayleigh quotient of the solve output.
    pub rayleigh: f64,
    /// `max(λ₊^{k−1}, λ₋^{k−1})`.
    pub prev_max_lambda: f64,
    /// `prev_max_lambda (1 + 1e-8) − λ^k`.
    pub rayleigh_margin: f64,
    /// `‖u^k‖_p` before normalization.
    pub pre_norm: f64,
    /// `2^{−(p−1)/p}`.
    pub lower_bound: f64,
    /// `pre_norm − lower_bound (1 − 1e-8)`.
    pub lower_bound_margin: f64,
    /// Relative errors from [`BipartitionState::identity_errors`] on the new state.
    pub identity_errors: [f64; 3],
    /// `|λ₊ − λ₋|`.
    pub lambda_gap: f64,
    /// `‖u₊‖_p / ‖u₋‖_p` before normalization.
    pub part_norm_ratio: f64,
    /// p-mean of the solve output (after the shift under Neumann conditions).
    pub p_mean: f64,
    /// [`eigen_residual`] of `ũ₊ − ũ₋` with `λ = max(λ₊, λ₋)`, filled in by
    /// [`iterate`] (NaN from [`check_iteration_invariants`], which does not
    /// know the boundary condition).
    pub eigen_residual: f64,
}

/// Relative tolerance on the part identities.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Compares consecutive iterates against the monotonicity and lower bounds.
pub fn check_iteration_invariants(
    prev: &BipartitionState<'_>,
    next: &BipartitionState<'_>,
    p: f64,
) -> IterationDiagnostics {
    let prev_max = prev.max_lambda();
    let pre_norm = next.u.norm_p(p);
    let lower_bound = 2f64.powf(-(p - 1.0) / p);
    IterationDiagnostics {
        iteration: 0,
        rayleigh: next.rayleigh,
        prev_max_lambda: prev_max,
        rayleigh_margin: prev_max * (1.0 + 1e-8) - next.rayleigh,
        pre_norm,
        lower_bound,
        lower_bound_margin: pre_norm - lower_bound * (1.0 - 1e-8),
        identity_errors: next.identity_errors(),
        lambda_gap: (next.lambda_plus - next.lambda_minus).abs(),
        part_norm_ratio: next.part_norm_ratio,
        p_mean: p_mean(&next.u, p),
        eigen_residual: f64::NAN,
    }
}

impl IterationDiagnostics {
    fn violations(&self) -> impl Iterator<Item = InvariantViolation> + '_ {
        let it = self.iteration;
        let bound = (self.rayleigh_margin < 0.0).then_some(InvariantViolation {
            iteration: it,
            kind: InvariantKind::RayleighBound,
            margin: self.rayleigh_margin,
        });
        let lower = (self.lower_bound_margin < 0.0).then_some(InvariantViolation {
            iteration: it,
            kind: InvariantKind::LowerBound,
            margin: self.lower_bound_margin,
        });
        let worst = self.identity_errors.iter().copied().fold(0.0, f64::max);
        let ident = (worst > IDENTITY_TOL).then_some(InvariantViolation {
            iteration: it,
            kind: InvariantKind::PartIdentity,
            margin: worst,
        });
        bound.into_iter().chain(lower).chain(ident)
    }
}

/// Result of the second-eigenpair iteration.
#[derive(Debug, Clone)]
pub struct EigenReport<'m> {
    /// Exponent.
    pub p: f64,
    /// Boundary condition.
    pub bc: BoundaryCondition,
    /// `max(λ₊, λ₋)` at the final iterate.
    pub lambda2: f64,
    /// Rayleigh quotient of `u2`.
    pub rayleigh: f64,
    /// `λ₊` after every iteration.
    pub lambda_plus_history: Vec<f64>,
    /// `λ₋` after every iteration.
    pub lambda_minus_history: Vec<f64>,
    /// Rayleigh quotient of every solve output.
    pub rayleigh_history: Vec<f64>,
    /// Iterations performed.
    pub iterations: usize,
    /// Both `λ±` settled before `max_outer`, and the eigen residual is below
    /// `10 outer_tol λ₂` or has stopped shrinking by 10 % per iteration.
    pub converged: bool,
    /// `ũ₊ − ũ₋` at the final iterate.
    pub u2: ScalarField<'m>,
    /// Per-iteration checks.
    pub diagnostics: Vec<IterationDiagnostics>,
    /// Failed checks, if any.
    pub invariant_violations: Vec<InvariantViolation>,
    /// Lumped dual norm of the eigen-equation residual of `u2` with `λ = lambda2`.
    pub eigen_residual: f64,
}

/// Dual norm of `−Δ_p u − λ |u|^{p−2} u` over the unconstrained nodes.
pub fn eigen_residual(u: &ScalarField<'_>, lambda: f64, p: f64, bc: BoundaryCondition) -> f64 {
    let mesh = u.mesh();
    let flux = descent::flux(mesh, u.values(), p);
    flux.iter()
        .zip(u.values())
        .zip(mesh.lumped_mass())
        .zip(mesh.boundary_mask())
        .filter(|(_, &b)| !(b && bc == BoundaryCondition::Dirichlet))
        .map(|(((&k, &v), &m), _)| {
            let r = k - lambda * m * phi_p(v, p);
            r * r / m
        })
        .sum::<f64>()
        .sqrt()
}

/// Runs the bipartition iteration from `state`.
///
/// Partition collapse and inner solver failures are errors; reaching
/// `max_outer` returns a report with `converged = false`.
pub fn iterate<'m>(
    state: BipartitionState<'m>,
    bc: BoundaryCondition,
    config: &SolverConfig,
    options: &EigenOptions,
) -> Result<EigenReport<'m>> {
    config.validate()?;
    crate::check_exponent(config.p)?;
    let p = config.p;
    let mesh = state.u.mesh();
    let mut state = state;
    let mut report = EigenReport {
        p,
        bc,
        lambda2: state.max_lambda(),
        rayleigh: state.rayleigh,
        lambda_plus_history: Vec::new(),
        lambda_minus_history: Vec::new(),
        rayleigh_history: Vec::new(),
        iterations: 0,
        converged: false,
        u2: state.eigenfunction(),
        diagnostics: Vec::new(),
        invariant_violations: Vec::new(),
        eigen_residual: f64::NAN,
    };
    let mut prev_residual = f64::INFINITY;
    for k in 1..=options.max_outer {
        let mut f = build_rhs(&state);
        if bc == BoundaryCondition::Neumann {
            let mean = descent::load_dot(mesh, f.values(), &alloc::vec![1.0; mesh.node_count()])
                / mesh.measure();
            f.values_mut().iter_mut().for_each(|v| *v -= mean);
        }
        let warm = state.eigenfunction();
        let (u, solve) = solve_p_poisson(&f, Some(&warm), bc, config)?;
        if !crate::descent::inner_solve_usable(&solve, config.outer_tol) {
            return Err(Error::InnerNotConverged {
                iteration: k,
                residual: solve.residual_history.last().copied().unwrap_or(f64::NAN),
            });
        }
        let next = BipartitionState::from_field(u, p).map_err(|e| match e {
            Error::PartitionCollapse { side, .. } => Error::PartitionCollapse { iteration: k, side },
            other => other,
        })?;
        let mut diag = check_iteration_invariants(&state, &next, p);
        diag.iteration = k;
        diag.eigen_residual = eigen_residual(&next.normalized(), next.max_lambda(), p, bc);
        let residual_done = diag.eigen_residual <= 10.0 * options.outer_tol * next.max_lambda()
            || diag.eigen_residual >= 0.9 * prev_residual;
        prev_residual = diag.eigen_residual;
        report.invariant_violations.extend(diag.violations());
        report.diagnostics.push(diag);
        report.lambda_plus_history.push(next.lambda_plus);
        report.lambda_minus_history.push(next.lambda_minus);
        report.rayleigh_history.push(next.rayleigh);
        report.iterations = k;

        let settled = |new: f64, old: f64| (new - old).abs() < options.outer_tol * old.max(1.0);
        let done = settled(next.lambda_plus, state.lambda_plus)
            && settled(next.lambda_minus, state.lambda_minus)
            && residual_done;
        log::debug!(
            "iteration {k}: lambda+ {:.12e} lambda- {:.12e} rayleigh {:.12e} ({} descent steps)",
            next.lambda_plus,
            next.lambda_minus,
            next.rayleigh,
            solve.iterations
        );
        state = next;
        if done {
            report.converged = true;
            break;
        }
    }
    let u2 = state.eigenfunction();
    report.lambda2 = state.max_lambda();
    report.rayleigh = u2.grad_energy(p) / u2.integral_abs_pow(p);
    report.eigen_residual = eigen_residual(&u2, report.lambda2, p, bc);
    report.u2 = u2;
    log::info!(
        "lambda2 = {:.12e} after {} iterations (converged: {})",
        report.lambda2,
        report.iterations,
        report.converged
    );
    Ok(report)
}

/// [`init_guess`] followed by [`iterate`].
pub fn second_eigenpair<'m>(
    mesh: &'m Mesh,
    bc: BoundaryCondition,
    config: &SolverConfig,
    options: &EigenOptions,
) -> Result<EigenReport<'m>> {
    crate::check_exponent(config.p)?;
    let state = init_guess(mesh, config.p, bc)?;
    iterate(state, bc, config, options)
}
