use crate::error::{Error, Result};
use crate::fields::FieldFn;
use crate::numerics::{c, hermitian_eigenvalues, hermitian_function, identity, CMatrix};

use super::frame::Frame;
use super::shape::RotatingBlade;

/// Smallest admissible cosine of a principal angle.
pub const OVERLAP_FLOOR: f64 = 1e-8;

/// `V_can = P V0 (V0^dag P V0)^{-1/2}`, the image of `V0` under the direct rotation onto `range(P)`.
pub fn canonical_frame(p: &CMatrix, v0: &CMatrix) -> Result<CMatrix> {
    if p.nrows() != v0.nrows() || !p.is_square() {
        return Err(Error::Dimension("projector and reference frame sizes differ".into()));
    }
    let pv = p * v0;
    let gram = v0.adjoint() * &pv;
    let gram = (&gram + gram.adjoint()) * c(0.5, 0.0);
    let min = hermitian_eigenvalues(&gram)?.into_iter().fold(f64::INFINITY, f64::min);
    let min_overlap = min.max(0.0).sqrt();
    if min_overlap < OVERLAP_FLOOR {
        return Err(Error::OutOfChart { min_overlap });
    }
    Ok(pv * hermitian_function(&gram, |l| c(l.powf(-0.5), 0.0))?)
}

/// The Cartan factor `U1 = (I + R R0)(2I + R R0 + R0 R)^{-1/2}`.
///
/// `U1 R0 = R0 U1^dag`, and `U1 V0` equals [`canonical_frame`].
pub fn cartan_rotation(r: &CMatrix, r0: &CMatrix) -> Result<CMatrix> {
    if r.shape() != r0.shape() || !r.is_square() {
        return Err(Error::Dimension("blades must be square and of equal size".into()));
    }
    let big_n = r.nrows();
    let w = r * r0;
    let m = identity(big_n) * c(2.0, 0.0) + &w + w.adjoint();
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    let min = hermitian_eigenvalues(&m)?.into_iter().fold(f64::INFINITY, f64::min);
    // eigenvalues are 4 cos^2 of the principal angles
    let min_overlap = (min.max(0.0) / 4.0).sqrt();
    if min_overlap < OVERLAP_FLOOR {
        return Err(Error::OutOfChart { min_overlap });
    }
    Ok((identity(big_n) + w) * hermitian_function(&m, |l| c(l.powf(-0.5), 0.0))?)
}

/// Gauge-fixed frame field `x -> canonical_frame(P(x), V0)`.
pub fn canonical_frame_field(r: &RotatingBlade, v0: &CMatrix) -> Result<Frame> {
    if v0.nrows() != r.big_n() {
        return Err(Error::Dimension("reference frame has the wrong number of rows".into()));
    }
    let (blade, reference) = (r.clone(), v0.clone());
    let field = FieldFn::new(r.dim(), v0.shape(), move |x| canonical_frame(&blade.projector(x)?, &reference))
        .with_step(r.field().step());
    Frame::new(r.spacetime().clone(), field)
}
