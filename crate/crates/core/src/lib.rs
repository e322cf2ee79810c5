//! Numerical laboratory for the logarithmic Laplacian: pointwise evaluation
//! by singular-integral quadrature, a Fourier-side oracle, a damped Dirichlet
//! solver on box-truncated coercive epigraphs, the first eigenpair on a unit
//! ball, and executable moving-plane diagnostics (plane sweep, antisymmetric
//! and ball maximum principles, boundary quotient, comparison construction).

// validation guards are written `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod gridio;
pub mod harness;
pub mod numfmt;
pub mod operator;
pub mod problems;
mod quad;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{classify, kernel_distance_pair, reflect, Epigraph, RegionLabel, UniformGrid};
pub use operator::{
    apply_log_laplacian, apply_log_laplacian_at, apply_principal_part, apply_principal_part_at,
    fourier_oracle, slab_kernel_mass, GridFunction, KernelPlan, RadialProfile,
};
pub use problems::{
    check_assumptions, lipschitz_quotient, manufactured_monotone, AssumptionReport, CoefficientA,
    NonlinearityF, ProblemSpec,
};
pub use solver::{eigen_smallest, residual, solve_dirichlet, solve_fixed_rhs, EigenPair, SolveConfig, SolveReport};
pub use special::{constants_for, digamma, gamma_fn, Constants};
