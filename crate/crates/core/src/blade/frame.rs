use crate::error::{Error, Result};
use crate::fields::{FieldFn, Spacetime};
use crate::gauge::{GaugeMap, GaugePotential, MatterField};
use crate::numerics::{c, isometry_defect, max_abs_diff, CMatrix, I};

const ORTHONORMALITY_TOL: f64 = 1e-10;

/// `N x n` matrix field with orthonormal columns.
#[derive(Debug, Clone)]
pub struct Frame {
    spacetime: Spacetime,
    v: FieldFn,
}

impl Frame {
    pub fn new(spacetime: Spacetime, v: FieldFn) -> Result<Self> {
        let (big_n, n) = v.shape();
        if n == 0 || n > big_n {
            return Err(Error::Dimension(format!("frame needs 1 <= n <= N, got N = {big_n}, n = {n}")));
        }
        if v.dim() != spacetime.dim() {
            return Err(Error::Dimension("frame and spacetime dimensions differ".into()));
        }
        Ok(Frame { spacetime, v })
    }

    /// Ambient dimension `N`.
    pub fn big_n(&self) -> usize {
        self.v.shape().0
    }

    /// Blade dimension `n`.
    pub fn n(&self) -> usize {
        self.v.shape().1
    }

    pub fn spacetime(&self) -> &Spacetime {
        &self.spacetime
    }

    pub fn dim(&self) -> usize {
        self.spacetime.dim()
    }

    pub fn field(&self) -> &FieldFn {
        &self.v
    }

    /// `V(x)`, rejected when `V^dag V` deviates from the identity by more than `1e-10`.
    pub fn value(&self, x: &[f64]) -> Result<CMatrix> {
        let v = self.v.eval(x)?;
        let defect = isometry_defect(&v);
        if defect > ORTHONORMALITY_TOL {
            return Err(Error::Domain(format!(
                "frame columns not orthonormal at {x:?} (defect {defect:.3e})"
            )));
        }
        Ok(v)
    }

    pub fn partial(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        self.v.partial(x, mu)
    }

    pub fn partial2(&self, x: &[f64], mu: usize, nu: usize) -> Result<CMatrix> {
        self.v.partial2(x, mu, nu)
    }

    /// `V' = V u^dag`, the frame of the gauge-transformed potential.
    pub fn gauge_transformed(&self, u: &GaugeMap) -> Result<Frame> {
        if u.n() != self.n() {
            return Err(Error::Dimension("gauge map rank differs from frame rank".into()));
        }
        let uf = u.field();
        let analytic1 = self.v.has_analytic_deriv() && uf.has_analytic_deriv();
        let analytic2 = analytic1 && self.v.has_analytic_deriv2() && uf.has_analytic_deriv2();
        let (v0, u0) = (self.v.clone(), u.clone());
        let (v1, u1) = (self.v.clone(), uf.clone());
        let (v2, u2) = (self.v.clone(), uf.clone());
        let field = FieldFn::new(self.dim(), self.v.shape(), move |x| {
            Ok(v0.eval(x)? * u0.value(x)?.adjoint())
        })
        .with_deriv_if(analytic1, move |x, mu| {
            Ok(v1.partial(x, mu)? * u1.eval(x)?.adjoint() + v1.eval(x)? * u1.partial(x, mu)?.adjoint())
        })
        .with_deriv2_if(analytic2, move |x, mu, nu| {
            Ok(v2.partial2(x, mu, nu)? * u2.eval(x)?.adjoint()
                + v2.partial(x, mu)? * u2.partial(x, nu)?.adjoint()
                + v2.partial(x, nu)? * u2.partial(x, mu)?.adjoint()
                + v2.eval(x)? * u2.partial2(x, mu, nu)?.adjoint())
        })
        .with_step(self.v.step());
        Frame::new(self.spacetime.clone(), field)
    }

    /// Lifted matter field `Psi = V psi`.
    pub fn lift(&self, psi: &MatterField) -> Result<FieldFn> {
        if psi.n() != self.n() {
            return Err(Error::Dimension("matter field rank differs from frame rank".into()));
        }
        let analytic = self.v.has_analytic_deriv() && psi.field().has_analytic_deriv();
        let (v0, p0, v1, p1) = (self.v.clone(), psi.clone(), self.v.clone(), psi.clone());
        Ok(FieldFn::new(self.dim(), (self.big_n(), 1), move |x| Ok(v0.eval(x)? * p0.eval(x)?))
            .with_deriv_if(analytic, move |x, mu| {
                Ok(v1.partial(x, mu)? * p1.eval(x)? + v1.eval(x)? * p1.field().partial(x, mu)?)
            })
            .with_step(self.v.step()))
    }
}

/// `A_mu = -i V^dag d_mu V`, symmetrized.
///
/// An anti-Hermitian defect larger than `tolerance` (broken orthonormality or a
/// too coarse finite-difference step) is reported as an inconsistency.
pub fn extract_potential_with(v: &Frame, tolerance: f64) -> Result<GaugePotential> {
    let n = v.n();
    let d = v.dim();
    let analytic = v.field().has_analytic_deriv() && v.field().has_analytic_deriv2();
    let components = (0..d)
        .map(|mu| {
            let (f0, f1) = (v.clone(), v.clone());
            FieldFn::new(d, (n, n), move |x| {
                let raw = f0.value(x)?.adjoint() * f0.partial(x, mu)? * (-I);
                let defect = max_abs_diff(&raw, &raw.adjoint()) * 0.5;
                if defect > tolerance {
                    return Err(Error::inconsistency(
                        format!("frame potential Hermiticity at {x:?}"),
                        defect,
                        tolerance,
                    ));
                }
                Ok((&raw + raw.adjoint()) * c(0.5, 0.0))
            })
            .with_deriv_if(analytic, move |x, nu| {
                let vv = f1.field().eval(x)?;
                let raw = (f1.partial(x, nu)?.adjoint() * f1.partial(x, mu)?
                    + vv.adjoint() * f1.partial2(x, mu, nu)?)
                    * (-I);
                Ok((&raw + raw.adjoint()) * c(0.5, 0.0))
            })
            .with_step(v.field().step())
        })
        .collect();
    GaugePotential::new(v.spacetime().clone(), components)
}

/// [`extract_potential_with`] at the default `1e-6` Hermiticity tolerance.
pub fn extract_potential(v: &Frame) -> Result<GaugePotential> {
    extract_potential_with(v, crate::Tolerances::default().frame_hermiticity)
}
