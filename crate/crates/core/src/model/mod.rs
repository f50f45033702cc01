//! Problem definitions: the second-order system, time meshes, piecewise
//! polynomial trajectories, manufactured problems and matrix ingestion.

mod matrix_market;
mod mesh;
mod problems;
mod system;
mod trajectory;

pub use matrix_market::{load_matrix_market, parse_matrix_market, write_matrix_market, format_matrix_market};
pub use mesh::TimeMesh;
pub use problems::{
    make_fd_acoustic, make_oscillator, make_poroelastic_like, ManufacturedProblem, PoroelasticLike,
    TIME_FREQUENCY,
};
pub use system::{CaseTag, Forcing, SecondOrderSystem, TimeFn};
pub use trajectory::{Side, TimeField, Trajectory};
