//! Lagrange-projection discontinuous Galerkin solver for the one-dimensional
//! isentropic Euler equations with a power-law pressure.
//!
//! Each stage splits the update into an implicit acoustic step, solved in
//! characteristic variables of a relaxation model, and an explicit upwind
//! transport step, followed by positivity and energy limiters. High order in
//! time comes from SSP Runge-Kutta combinations of such stages.

pub mod acoustic;
pub mod basis;
pub mod error;
pub mod field;
pub mod integrator;
pub mod limiter;
pub mod linsolve;
pub mod thermo;
pub mod transport;
pub mod verify;

pub use acoustic::{riemann_star, select_a, solve_acoustic_step, AcousticResult, StarState};
pub use basis::{gauss_lobatto, Basis};
pub use error::{LpdgError, Result};
pub use field::{
    project_initial, Boundary, CharacteristicTriple, ConservedState, InitialCondition, LagrangeState, Mesh,
    RiemannData, SolutionField,
};
pub use integrator::{
    advance, advance_with, compute_dt, lpdg_stage, rk_step, take_step, RkScheme, SolverConfig, StageReport, UpdateForm,
    StepReport,
};
pub use limiter::{LimiterConfig, MeanReference};
pub use thermo::GasModel;
