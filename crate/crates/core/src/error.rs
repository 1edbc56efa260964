use alloc::string::String;

/// Errors raised by the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Geometry or resolution that cannot form a mesh.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A field that must be nonzero (normalization, Rayleigh quotient) was zero.
    #[error("degenerate field: {0}")]
    DegenerateField(&'static str),

    /// Two fields or a field and a mesh do not belong together.
    #[error("field does not live on the expected mesh")]
    MeshMismatch,

    /// A Neumann load violates `Σ m_i f_i = 0`.
    #[error("incompatible Neumann load: lumped integral {defect:e} exceeds tolerance {tolerance:e}")]
    IncompatibleLoad {
        /// `Σ m_i f_i`.
        defect: f64,
        /// Admissible magnitude.
        tolerance: f64,
    },

    /// Conjugate gradient exhausted its iteration budget.
    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged {
        /// Iterations performed.
        iterations: usize,
        /// Final relative residual.
        residual: f64,
    },

    /// The line search found no step that lowers the energy.
    #[error("line search found no energy decrease")]
    Stagnation,

    /// An inner p-Poisson solve stopped before reaching its residual target.
    #[error("p-Poisson solve did not converge at outer iteration {iteration} (relative residual {residual:e})")]
    InnerNotConverged {
        /// Outer (eigen) iteration in which the solve failed.
        iteration: usize,
        /// Relative residual reached.
        residual: f64,
    },

    /// One of the two nodal parts vanished after a solve.
    #[error("partition collapse at iteration {iteration}: the {side} part vanished")]
    PartitionCollapse {
        /// Outer iteration.
        iteration: usize,
        /// `"positive"` or `"negative"`.
        side: &'static str,
    },

    /// The eigen iteration hit `max_outer`.
    #[error("eigen iteration did not converge in {iterations} iterations")]
    NotConverged {
        /// Iterations performed.
        iterations: usize,
    },
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;
