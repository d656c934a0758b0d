//! Time integration of Galerkin projections, Jacobians and log norms, and
//! the experiments built on them.

mod experiments;
mod integrate;
mod jacobian;

pub use experiments::{
    difference_bound, enstrophy_inequality_check, galerkin_difference_experiment, growth_factor,
    lipschitz_experiment, projection_defect, DifferenceReport, EnstrophyCheck, LipschitzReport,
    SEPARATION_FLOOR, ZERO_RATE,
};
pub use integrate::{integrate, project, IntegratorConfig, Scheme, Stepper, Trajectory, DRIFT_TOL};
pub use jacobian::{
    condition_d_bound, jacobian, jacobian_in, lognorm_bounds, lognorm_euclidean, lognorm_gershgorin,
    LogNormBound, LogNormMethod, RealCoordinates,
};
