//! Point-evaluable fields on flat coordinate patches, differential forms and quadrature.

mod field;
mod forms;
mod quadrature;
mod spacetime;
mod tabulated;

pub use field::{central_difference, FieldFn, DEFAULT_STEP};
pub use forms::{
    exterior_d, form_rank, wedge_power, wedge_power_nonzero, FormRank, OneForm, PointForm, TwoForm,
};
pub use quadrature::{gauss_legendre, lattice_integral, sphere_flux, Grid};
pub use spacetime::{Chart, Spacetime};
pub use tabulated::{matrix_from_json, matrix_to_json, MatrixJson, Tabulated};
