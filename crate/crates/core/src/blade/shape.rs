use crate::error::{Error, Result};
use crate::fields::{FieldFn, Spacetime, TwoForm};
use crate::numerics::{c, commutator, identity, max_abs, max_abs_diff, trace, CMatrix, I};

use super::frame::Frame;

/// Gauge-invariant reflection `R = 2 V V^dag - I` onto the frame's subspace.
#[derive(Debug, Clone)]
pub struct RotatingBlade {
    spacetime: Spacetime,
    r: FieldFn,
}

/// Deviations of a blade value from the reflection invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeDefects {
    pub hermiticity: f64,
    pub involution: f64,
    /// `|tr R - (2n - N)|`.
    pub trace: f64,
}

impl BladeDefects {
    pub fn max(&self) -> f64 {
        self.hermiticity.max(self.involution).max(self.trace)
    }
}

impl RotatingBlade {
    pub fn new(spacetime: Spacetime, r: FieldFn) -> Result<Self> {
        let (a, b) = r.shape();
        if a != b {
            return Err(Error::Dimension("rotating blade must be square".into()));
        }
        Ok(RotatingBlade { spacetime, r })
    }

    pub fn big_n(&self) -> usize {
        self.r.shape().0
    }

    pub fn dim(&self) -> usize {
        self.spacetime.dim()
    }

    pub fn spacetime(&self) -> &Spacetime {
        &self.spacetime
    }

    pub fn field(&self) -> &FieldFn {
        &self.r
    }

    pub fn value(&self, x: &[f64]) -> Result<CMatrix> {
        self.r.eval(x)
    }

    pub fn partial(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        self.r.partial(x, mu)
    }

    /// `P = (R + I) / 2`.
    pub fn projector(&self, x: &[f64]) -> Result<CMatrix> {
        Ok((self.value(x)? + identity(self.big_n())) * c(0.5, 0.0))
    }

    pub fn projector_partial(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        Ok(self.partial(x, mu)? * c(0.5, 0.0))
    }

    /// Blade dimension `n = (tr R + N) / 2`, rounded.
    pub fn rank_at(&self, x: &[f64]) -> Result<usize> {
        let t = trace(&self.value(x)?).re;
        Ok(((t + self.big_n() as f64) / 2.0).round().max(0.0) as usize)
    }

    pub fn defects(&self, x: &[f64], n: usize) -> Result<BladeDefects> {
        let r = self.value(x)?;
        let big_n = self.big_n();
        Ok(BladeDefects {
            hermiticity: max_abs_diff(&r, &r.adjoint()),
            involution: max_abs_diff(&(&r * &r), &identity(big_n)),
            trace: (trace(&r) - c(2.0 * n as f64 - big_n as f64, 0.0)).norm(),
        })
    }

    /// `S_mu(x) = -(i/2) R d_mu R`.
    pub fn shape_at(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        Ok(self.value(x)? * self.partial(x, mu)? * (-0.5 * I))
    }
}

/// `R = 2 V V^dag - I`, with analytic derivatives whenever the frame has them.
pub fn blade_from_frame(v: &Frame) -> RotatingBlade {
    let big_n = v.big_n();
    let f = v.field();
    let (f0, f1, f2) = (v.clone(), f.clone(), f.clone());
    let r = FieldFn::new(v.dim(), (big_n, big_n), move |x| {
        let vv = f0.value(x)?;
        Ok(&vv * vv.adjoint() * c(2.0, 0.0) - identity(big_n))
    })
    .with_deriv_if(f.has_analytic_deriv(), move |x, mu| {
        let (vv, dv) = (f1.eval(x)?, f1.partial(x, mu)?);
        Ok((&dv * vv.adjoint() + &vv * dv.adjoint()) * c(2.0, 0.0))
    })
    .with_deriv2_if(f.has_analytic_deriv() && f.has_analytic_deriv2(), move |x, mu, nu| {
        let vv = f2.eval(x)?;
        let (dm, dn, dmn) = (f2.partial(x, mu)?, f2.partial(x, nu)?, f2.partial2(x, mu, nu)?);
        Ok((&dmn * vv.adjoint() + &dm * dn.adjoint() + &dn * dm.adjoint() + &vv * dmn.adjoint())
            * c(2.0, 0.0))
    })
    .with_step(f.step());
    RotatingBlade {
        spacetime: v.spacetime().clone(),
        r,
    }
}

/// `S_mu = -(i/2) R d_mu R`, Hermitian and anticommuting with `R`.
#[derive(Debug, Clone)]
pub struct ShapeOperator {
    spacetime: Spacetime,
    components: Vec<FieldFn>,
}

impl ShapeOperator {
    pub fn component(&self, mu: usize) -> &FieldFn {
        &self.components[mu]
    }

    pub fn dim(&self) -> usize {
        self.spacetime.dim()
    }

    pub fn spacetime(&self) -> &Spacetime {
        &self.spacetime
    }

    pub fn eval(&self, mu: usize, x: &[f64]) -> Result<CMatrix> {
        self.components[mu].eval(x)
    }

    /// `d_nu S_mu`.
    pub fn partial(&self, mu: usize, x: &[f64], nu: usize) -> Result<CMatrix> {
        self.components[mu].partial(x, nu)
    }

    /// Shape operator built from arbitrary Hermitian fields (no blade behind it).
    pub fn from_components(spacetime: Spacetime, components: Vec<FieldFn>) -> Result<Self> {
        if components.len() != spacetime.dim() {
            return Err(Error::Dimension("one shape component per axis".into()));
        }
        Ok(ShapeOperator {
            spacetime,
            components,
        })
    }
}

pub fn shape_operator(r: &RotatingBlade) -> ShapeOperator {
    let big_n = r.big_n();
    let analytic = r.r.has_analytic_deriv() && r.r.has_analytic_deriv2();
    let components = (0..r.dim())
        .map(|mu| {
            let (a, b) = (r.clone(), r.clone());
            FieldFn::new(r.dim(), (big_n, big_n), move |x| a.shape_at(x, mu))
                .with_deriv_if(analytic, move |x, nu| {
                    let rv = b.value(x)?;
                    Ok((b.partial(x, nu)? * b.partial(x, mu)? + rv * b.r.partial2(x, mu, nu)?)
                        * (-0.5 * I))
                })
                .with_step(r.r.step())
        })
        .collect();
    ShapeOperator {
        spacetime: r.spacetime.clone(),
        components,
    }
}

/// `D_mu Psi = d_mu Psi + i S_mu Psi` for a `C^N`-valued field.
pub fn lifted_covariant_derivative(r: &RotatingBlade, psi: &FieldFn, mu: usize, x: &[f64]) -> Result<CMatrix> {
    if psi.shape().0 != r.big_n() {
        return Err(Error::Dimension("lifted field must have N rows".into()));
    }
    Ok(psi.partial(x, mu)? + r.shape_at(x, mu)? * psi.eval(x)? * I)
}

/// Projector form `P d_mu (P Psi) + P_perp d_mu (P_perp Psi)` of the lifted derivative.
pub fn lifted_covariant_derivative_projector(
    r: &RotatingBlade,
    psi: &FieldFn,
    mu: usize,
    x: &[f64],
) -> Result<CMatrix> {
    let p = r.projector(x)?;
    let q = identity(r.big_n()) - &p;
    let dp = r.projector_partial(x, mu)?;
    let (v, dv) = (psi.eval(x)?, psi.partial(x, mu)?);
    // d(P Psi) = dP Psi + P dPsi and d(P_perp Psi) = -dP Psi + P_perp dPsi
    Ok(&p * (&dp * &v + &p * &dv) + &q * (-(&dp * &v) + &q * &dv))
}

/// `D_mu M = d_mu M + i [S_mu, M]` for an `N x N` matrix field.
pub fn lifted_covariant_derivative_matrix(r: &RotatingBlade, m: &FieldFn, mu: usize, x: &[f64]) -> Result<CMatrix> {
    Ok(m.partial(x, mu)? + commutator(&r.shape_at(x, mu)?, &m.eval(x)?)? * I)
}

/// `D_nu Psi` as a field, with analytic derivatives when blade and field allow it.
pub fn lifted_derivative_field(r: &RotatingBlade, psi: &FieldFn, nu: usize) -> FieldFn {
    let s = shape_operator(r);
    let analytic = psi.has_analytic_deriv() && psi.has_analytic_deriv2() && s.component(nu).has_analytic_deriv();
    let (r0, p0) = (r.clone(), psi.clone());
    let (s1, p1) = (s, psi.clone());
    FieldFn::new(psi.dim(), psi.shape(), move |x| lifted_covariant_derivative(&r0, &p0, nu, x))
        .with_deriv_if(analytic, move |x, mu| {
            let sn = s1.component(nu);
            Ok(p1.partial2(x, nu, mu)?
                + (sn.partial(x, mu)? * p1.eval(x)? + sn.eval(x)? * p1.partial(x, mu)?) * I)
        })
        .with_step(psi.step())
}

/// `d_mu S_nu - d_nu S_mu + 2i [S_mu, S_nu]`; vanishes for shape operators of genuine blades.
pub fn shape_identity_residual(s: &ShapeOperator, mu: usize, nu: usize, x: &[f64]) -> Result<CMatrix> {
    let (sm, sn) = (s.eval(mu, x)?, s.eval(nu, x)?);
    Ok(s.partial(nu, x, mu)? - s.partial(mu, x, nu)? + commutator(&sm, &sn)? * (2.0 * I))
}

/// The four curvature expressions at one point.
#[derive(Debug, Clone)]
pub struct CurvatureRoutes {
    /// `-i [D_mu, D_nu]` applied to the constant basis vectors.
    pub probe: CMatrix,
    /// `-i [S_mu, S_nu]`.
    pub shape: CMatrix,
    /// `-(i/4) [d_mu R, d_nu R]`.
    pub blade: CMatrix,
    /// `-i [d_mu P, d_nu P]`.
    pub projector: CMatrix,
}

impl CurvatureRoutes {
    pub fn max_discrepancy(&self) -> f64 {
        let all = [&self.probe, &self.shape, &self.blade, &self.projector];
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                worst = worst.max(max_abs_diff(all[i], all[j]));
            }
        }
        worst
    }
}

/// Curvature `Omega_{mu nu}` of the lifted derivative.
#[derive(Debug, Clone)]
pub struct BladeCurvature {
    blade: RotatingBlade,
    shape: ShapeOperator,
    tolerance: f64,
}

pub fn blade_curvature(r: &RotatingBlade) -> BladeCurvature {
    BladeCurvature {
        blade: r.clone(),
        shape: shape_operator(r),
        tolerance: crate::Tolerances::default().fd(),
    }
}

impl BladeCurvature {
    /// Tolerance for the four-way consistency check in [`BladeCurvature::eval`].
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn blade(&self) -> &RotatingBlade {
        &self.blade
    }

    pub fn shape(&self) -> &ShapeOperator {
        &self.shape
    }

    /// `-i [S_mu, S_nu]` without the cross-check.
    pub fn shape_form(&self, x: &[f64], mu: usize, nu: usize) -> Result<CMatrix> {
        Ok(commutator(&self.shape.eval(mu, x)?, &self.shape.eval(nu, x)?)? * (-I))
    }

    pub fn routes(&self, x: &[f64], mu: usize, nu: usize) -> Result<CurvatureRoutes> {
        let big_n = self.blade.big_n();
        let d = self.blade.dim();
        let mut probe = CMatrix::zeros(big_n, big_n);
        for j in 0..big_n {
            let mut e = CMatrix::zeros(big_n, 1);
            e[(j, 0)] = c(1.0, 0.0);
            let basis = FieldFn::constant(d, e).with_step(self.blade.r.step());
            let dn = lifted_derivative_field(&self.blade, &basis, nu);
            let dm = lifted_derivative_field(&self.blade, &basis, mu);
            let col = (lifted_covariant_derivative(&self.blade, &dn, mu, x)?
                - lifted_covariant_derivative(&self.blade, &dm, nu, x)?)
                * (-I);
            probe.set_column(j, &col.column(0));
        }
        let (drm, drn) = (self.blade.partial(x, mu)?, self.blade.partial(x, nu)?);
        let (dpm, dpn) = (self.blade.projector_partial(x, mu)?, self.blade.projector_partial(x, nu)?);
        Ok(CurvatureRoutes {
            probe,
            shape: self.shape_form(x, mu, nu)?,
            blade: commutator(&drm, &drn)? * (-0.25 * I),
            projector: commutator(&dpm, &dpn)? * (-I),
        })
    }

    /// `Omega_{mu nu}(x)` in the `[S, S]` form, after checking all four routes agree.
    pub fn eval(&self, x: &[f64], mu: usize, nu: usize) -> Result<CMatrix> {
        let routes = self.routes(x, mu, nu)?;
        let gap = routes.max_discrepancy();
        if gap > self.tolerance {
            return Err(Error::inconsistency(
                format!("curvature routes disagree at {x:?} ({mu}, {nu})"),
                gap,
                self.tolerance,
            ));
        }
        Ok(routes.shape)
    }

    /// The `[S, S]` form as a 2-form field (unchecked; derivatives analytic when `S` has them).
    pub fn form(&self) -> TwoForm {
        let big_n = self.blade.big_n();
        let d = self.blade.dim();
        let analytic = (0..d).all(|m| self.shape.component(m).has_analytic_deriv());
        let step = self.blade.r.step();
        TwoForm::from_fn(self.blade.spacetime.clone(), (big_n, big_n), |mu, nu| {
            let (s0, s1) = (self.shape.clone(), self.shape.clone());
            FieldFn::new(d, (big_n, big_n), move |x| {
                Ok(commutator(&s0.eval(mu, x)?, &s0.eval(nu, x)?)? * (-I))
            })
            .with_deriv_if(analytic, move |x, rho| {
                let (sm, sn) = (s1.eval(mu, x)?, s1.eval(nu, x)?);
                let (dsm, dsn) = (s1.partial(mu, x, rho)?, s1.partial(nu, x, rho)?);
                Ok((commutator(&dsm, &sn)? + commutator(&sm, &dsn)?) * (-I))
            })
            .with_step(step)
        })
    }

    /// `max |[R, Omega]|` and `max |R Omega R - Omega|` style block check at `x`.
    pub fn block_defect(&self, x: &[f64], mu: usize, nu: usize) -> Result<f64> {
        let r = self.blade.value(x)?;
        let om = self.shape_form(x, mu, nu)?;
        Ok(max_abs(&commutator(&r, &om)?))
    }
}
