//! Modes, symmetric mode sets, coefficient fields and the Galerkin vector field.

pub mod cvec;
mod field;
pub mod grid;
mod mode;
mod modeset;
pub mod nonlinear;

pub use cvec::{leray_project, CVec};
pub use field::{ForceField, PhysicsParams, SpectralField, INVARIANT_TOL};
pub use grid::{advection_grid, alias_free_resolution, nonlinear_term_grid};
pub use mode::{Dim, Mode};
pub use modeset::{ModeSet, Shape};
pub use nonlinear::{
    enstrophy, enstrophy_rate, force_enstrophy_norm, nonlinear_at, nonlinear_term,
    pressure_coefficients, rhs, rhs_at, rhs_with_plan, ConvolutionPlan,
};
