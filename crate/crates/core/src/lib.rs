//! Discontinuous Galerkin time integration for second-order linear systems
//! `M ü + D u̇ + A u = f`.
//!
//! Two slab-by-slab schemes are provided: [`dg2`] discretizes the
//! second-order system directly, [`dg1`] works on the first-order
//! reformulation `u̇ = v` and reduces each slab to a Schur complement on the
//! velocity block. [`metrics`] measures errors in the energy seminorms the
//! schemes are stable in.

mod assembly;
pub mod basis;
pub mod dg1;
pub mod dg2;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;

pub use basis::{
    build_basis, gauss_rule, local_matrices_l, local_matrices_n, project, LocalMatricesL,
    LocalMatricesN, QuadratureRule, SlabBasis,
};
pub use dg1::{march_dg1, Dg1SlabSystem, Dg1Solver};
pub use dg2::{march_dg2, Dg2SlabSystem, Dg2Solver};
pub use error::{Error, Result};
pub use linalg::{condition_number, DenseMatrix, DenseVector, LuFactorization, Norm};
pub use metrics::{fit_slope, ErrorField, ErrorRecord, SlopeFit, Weight};
pub use model::{
    CaseTag, ManufacturedProblem, SecondOrderSystem, Side, TimeField, TimeFn, TimeMesh, Trajectory,
};
