//! Coefficient data: gridded Lamé fields, constant general systems, and the
//! ess-inf/ess-sup and BMO estimators.

mod bmo;
mod field;
mod system;

pub use bmo::{bmo_seminorm, bmo_seminorm_cells, CellField};
pub use field::{ess_bounds, gamma_field, CoefficientField, EssBounds, Grid2, ScalarGrid};
pub use system::GeneralSystem;
