use thiserror::Error;

/// Errors raised by the lattice laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid physical constants: {0}")]
    InvalidConstants(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("axis {axis} out of range for a {dim}-dimensional lattice")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("density {value:e} at site {site} is below the floor {floor:e}")]
    DensityBelowFloor { site: usize, value: f64, floor: f64 },

    #[error("non-positive density {value:e} at site {site}")]
    NonpositiveDensity { site: usize, value: f64 },

    #[error("phase winding {winding} detected around {location}")]
    WindingDetected { location: String, winding: i64 },

    #[error("unknown functional-derivative slot: {0}")]
    UnknownSlot(String),

    #[error("generic density `{name}` is sensitive to undeclared argument `{slot}`")]
    UndeclaredDependency { name: String, slot: &'static str },

    #[error("integrability condition violated: {detail} (max {max_abs:e} > tolerance {tol:e})")]
    ConditionViolated { detail: String, max_abs: f64, tol: f64 },

    #[error("generator depends on the phase; the route-A inverse S([rho],[s],A) is unavailable")]
    InversionUnavailable,

    #[error("non-finite value at site {site} after step {step}")]
    NonFiniteDetected { step: u64, site: usize },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    StabilityGuard { dt: f64, limit: f64 },

    #[error("elliptic solve failed: {0}")]
    SolverFailure(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
