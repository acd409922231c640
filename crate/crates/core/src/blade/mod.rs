//! Frames, rotating blades, shape operators and their curvature.

mod canonical;
mod decompose;
mod frame;
mod shape;

pub use canonical::{canonical_frame, canonical_frame_field, cartan_rotation, OVERLAP_FLOOR};
pub use decompose::{
    check_unitary_pair, complement_at, complement_frame, shape_gauge_decompose, DecompositionResiduals,
    ShapeGaugeDecomposition,
};
pub use frame::{extract_potential, extract_potential_with, Frame};
pub use shape::{
    blade_curvature, blade_from_frame, lifted_covariant_derivative, lifted_covariant_derivative_matrix,
    lifted_covariant_derivative_projector, lifted_derivative_field, shape_identity_residual, shape_operator,
    BladeCurvature, BladeDefects, CurvatureRoutes, RotatingBlade, ShapeOperator,
};

#[cfg(test)]
mod tests;
