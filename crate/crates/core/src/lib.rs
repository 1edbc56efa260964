//! Second eigenvalue and eigenfunction of the p-Laplace operator.
//!
//! The crate approximates `λ₂` for `-Δ_p u = λ |u|^{p-2} u` on intervals and
//! rectangles (Dirichlet or Neumann boundary) with P1 finite elements, and the
//! analogous problem for the unnormalized graph p-Laplacian. The eigen
//! iteration is an inverse power method that tracks the positive and negative
//! parts of the iterate separately: each step solves a p-Poisson problem whose
//! load is built from the two normalized parts and their energies `λ₊`, `λ₋`.
//!
//! Modules:
//!
//! - [`mesh`]: structured P1 meshes and the nodal field calculus.
//! - [`pde_solver`]: p-Poisson solves by weighted-linearization descent.
//! - [`eigensolver`]: the bipartition iteration for the continuous problem.
//! - [`graph`]: ε-graphs, graph p-Laplacian, Cheeger cut scoring.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

mod descent;
mod error;
mod sparse;

pub mod eigensolver;
pub mod graph;
pub mod mesh;
pub mod pde_solver;

pub use error::{Error, Result};

// Redundant whenever `std` is linked into the build.
#[allow(unused_imports)]
use num_traits::Float;

/// `φ_p(t) = |t|^{p-1} sign(t)`, with `φ_p(0) = 0`.
#[inline]
pub fn phi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

/// Lowest exponent accepted by the eigen iterations.
pub const P_MIN: f64 = 1.05;
/// Highest exponent accepted by the eigen iterations.
pub const P_MAX: f64 = 200.0;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(P_MIN..=P_MAX).contains(&p) {
        return Err(Error::InvalidParameter(alloc::format!(
            "p = {p} outside the supported range [{P_MIN}, {P_MAX}]"
        )));
    }
    Ok(())
}
