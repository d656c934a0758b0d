//! File formats and the `galerkin-trap` command-line runner on top of
//! `galerkin-core`.
//!
//! Exit codes: 0 on success, 1 on usage, input or numerical errors, 2 when a
//! certificate fails.

pub mod cli;
pub mod commands;
pub mod fields;
pub mod manifest;
pub mod recipe;

pub use cli::{run, Cli, Command, EXIT_CERTIFICATION_FAILED, EXIT_ERROR, EXIT_OK, THREADS_ENV};
pub use commands::{certify_parallel, trajectory_csv, Outcome};
pub use fields::{field_to_csv, field_to_json, load_field, load_force, load_init, save_field, FieldError};
pub use manifest::RunManifest;
pub use recipe::{load_region, parse_region, RegionFile, RegionRecipe};
