//! Piecewise-constant functions on the Gaussian grid and the maximal
//! operators evaluated on them.
//!
//! Every operator takes the integrals `∫_{R'} |f|` of the input over grid
//! cubes; heat-type operators pair them with the kernel at the cube
//! centre, adapted operators with the kernel extrema over the cube pair.

mod classical;
mod far;
mod function;
mod heat;
mod time;

use thiserror::Error;

use crate::grid::{GCube, GridError};
use crate::kernel::KernelError;
use crate::profile::ProfileError;

pub use classical::{
    candidate_cubes, maximal_classical, maximal_classical_with, maximal_generic, maximal_local,
    maximal_theta, maximal_theta_with, CubeFamily, LocalBase,
};
pub use far::{far_time_candidates, log_maximal_far_adapted, maximal_far_adapted};
pub use function::GridFunction;
pub use heat::{heat_maximal, log_heat_maximal, HeatVariant};
pub use time::TimeGrid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("negative average {value} on cube {cube}")]
    NegativeValue { cube: GCube, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
