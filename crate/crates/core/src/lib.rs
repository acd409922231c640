//! Rotating blades and shape operators for `U(n)` gauge fields.
//!
//! A gauge potential `A_mu` is represented by an `N x n` frame `V` with
//! orthonormal columns solving `V^dag d_mu V = i A_mu`. The gauge-invariant
//! reflection `R = 2 V V^dag - I` (the rotating blade) and its shape operator
//! `S_mu = -(i/2) R d_mu R` carry the same curvature as `A`, without the
//! `U(n)` gauge freedom.

pub mod blade;
pub mod config;
pub mod darboux;
pub mod dynamics;
pub mod em;
pub mod embedded;
pub mod error;
pub mod fields;
pub mod gauge;
pub mod numerics;
pub mod scenario;
pub mod smooth;
pub mod suite;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use numerics::CMatrix;
