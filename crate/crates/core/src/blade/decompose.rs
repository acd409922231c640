use crate::error::{Error, Result};
use crate::fields::FieldFn;
use crate::gauge::{field_strength, FieldStrength, GaugePotential};
use crate::numerics::{block_diag, c, hstack, isometry_defect, max_abs_diff, CMatrix, I};

use super::frame::{extract_potential, Frame};
use super::shape::{blade_curvature, blade_from_frame, BladeCurvature, RotatingBlade, ShapeOperator};

const PIVOT: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-10;

/// Orthonormal basis of the complement of `range(v)`.
///
/// For `N = 2, n = 1` this is `(-conj v_2, conj v_1)`, which is smooth
/// everywhere. Otherwise Gram-Schmidt runs over the standard basis vectors in
/// order, skipping those whose residual norm falls below `1e-8`.
pub fn complement_at(v: &CMatrix) -> Result<CMatrix> {
    let (big_n, n) = v.shape();
    if n >= big_n {
        return Err(Error::Dimension("blade fills the ambient space, no complement".into()));
    }
    if big_n == 2 && n == 1 {
        let mut w = CMatrix::zeros(2, 1);
        w[(0, 0)] = -v[(1, 0)].conj();
        w[(1, 0)] = v[(0, 0)].conj();
        return Ok(w);
    }
    let mut basis: Vec<CMatrix> = (0..n).map(|j| v.columns(j, 1).into_owned()).collect();
    let mut out = Vec::with_capacity(big_n - n);
    for k in 0..big_n {
        if out.len() == big_n - n {
            break;
        }
        let mut e = CMatrix::zeros(big_n, 1);
        e[(k, 0)] = c(1.0, 0.0);
        // two passes keep the residual orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let proj = (b.adjoint() * &e)[(0, 0)];
                e -= b * proj;
            }
        }
        let norm = e.norm();
        if norm > PIVOT {
            e /= c(norm, 0.0);
            basis.push(e.clone());
            out.push(e);
        }
    }
    if out.len() != big_n - n {
        return Err(Error::Domain("frame columns are linearly dependent".into()));
    }
    let mut w = CMatrix::zeros(big_n, big_n - n);
    for (j, col) in out.iter().enumerate() {
        w.set_column(j, &col.column(0));
    }
    Ok(w)
}

/// Complement frame `W` as a field.
pub fn complement_frame(v: &Frame) -> Result<Frame> {
    let (big_n, n) = (v.big_n(), v.n());
    if n >= big_n {
        return Err(Error::Dimension("blade fills the ambient space, no complement".into()));
    }
    let f = v.field();
    let analytic = big_n == 2 && n == 1 && f.has_analytic_deriv();
    let swap = |m: CMatrix| {
        let mut w = CMatrix::zeros(2, 1);
        w[(0, 0)] = -m[(1, 0)].conj();
        w[(1, 0)] = m[(0, 0)].conj();
        w
    };
    let (v0, f1, f2) = (v.clone(), f.clone(), f.clone());
    let w = FieldFn::new(v.dim(), (big_n, big_n - n), move |x| complement_at(&v0.value(x)?))
        .with_deriv_if(analytic, move |x, mu| Ok(swap(f1.partial(x, mu)?)))
        .with_deriv2_if(analytic && f.has_analytic_deriv2(), move |x, mu, nu| {
            Ok(swap(f2.partial2(x, mu, nu)?))
        })
        .with_step(f.step());
    Frame::new(v.spacetime().clone(), w)
}

/// Residuals of the shape-gauge decomposition at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionResiduals {
    pub unitarity: f64,
    /// `S_mu` against `U (A + C) U^dag - i U d_mu U^dag`.
    pub shape: f64,
    /// `Omega` against `U (F + G) U^dag`.
    pub curvature: f64,
    /// `F - V^dag Omega V`.
    pub f_projection: f64,
    /// `G - W^dag Omega W`.
    pub g_projection: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        [self.unitarity, self.shape, self.curvature, self.f_projection, self.g_projection]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `U = (V, W)` split of the shape operator into `A` and the complementary connection `C`.
#[derive(Debug, Clone)]
pub struct ShapeGaugeDecomposition {
    v: Frame,
    w: Frame,
    a: GaugePotential,
    c: GaugePotential,
    f: FieldStrength,
    g: FieldStrength,
    curvature: BladeCurvature,
}

impl ShapeGaugeDecomposition {
    pub fn potential(&self) -> &GaugePotential {
        &self.a
    }

    /// `C_mu = -i W^dag d_mu W`.
    pub fn complementary(&self) -> &GaugePotential {
        &self.c
    }

    pub fn field_strength(&self) -> &FieldStrength {
        &self.f
    }

    /// Field strength `G` of `C`.
    pub fn complementary_strength(&self) -> &FieldStrength {
        &self.g
    }

    pub fn blade(&self) -> &RotatingBlade {
        self.curvature.blade()
    }

    pub fn shape(&self) -> &ShapeOperator {
        self.curvature.shape()
    }

    pub fn unitary(&self, x: &[f64]) -> Result<CMatrix> {
        hstack(&self.v.value(x)?, &self.w.value(x)?)
    }

    pub fn residuals(&self, x: &[f64]) -> Result<DecompositionResiduals> {
        let d = self.v.dim();
        let u = self.unitary(x)?;
        let (vv, ww) = (self.v.value(x)?, self.w.value(x)?);
        let mut out = DecompositionResiduals {
            unitarity: isometry_defect(&u),
            shape: 0.0,
            curvature: 0.0,
            f_projection: 0.0,
            g_projection: 0.0,
        };
        for mu in 0..d {
            let du = hstack(&self.v.partial(x, mu)?, &self.w.partial(x, mu)?)?;
            let diag = block_diag(&self.a.eval(mu, x)?, &self.c.eval(mu, x)?);
            let recon = &u * diag * u.adjoint() - &u * du.adjoint() * I;
            out.shape = out.shape.max(max_abs_diff(&self.shape().eval(mu, x)?, &recon));
            for nu in (mu + 1)..d {
                let omega = self.curvature.shape_form(x, mu, nu)?;
                let (f, g) = (self.f.eval(mu, nu, x)?, self.g.eval(mu, nu, x)?);
                let recon = &u * block_diag(&f, &g) * u.adjoint();
                out.curvature = out.curvature.max(max_abs_diff(&omega, &recon));
                out.f_projection = out.f_projection.max(max_abs_diff(&f, &(vv.adjoint() * &omega * &vv)));
                out.g_projection = out.g_projection.max(max_abs_diff(&g, &(ww.adjoint() * &omega * &ww)));
            }
        }
        Ok(out)
    }

    /// [`ShapeGaugeDecomposition::residuals`], failing when any exceeds `tolerance`.
    pub fn verify_at(&self, x: &[f64], tolerance: f64) -> Result<DecompositionResiduals> {
        let r = self.residuals(x)?;
        if r.max() > tolerance {
            return Err(Error::inconsistency(
                format!("shape-gauge reconstruction at {x:?}"),
                r.max(),
                tolerance,
            ));
        }
        Ok(r)
    }
}

pub fn shape_gauge_decompose(v: &Frame, w: &Frame) -> Result<ShapeGaugeDecomposition> {
    if v.big_n() != w.big_n() || v.n() + w.n() != v.big_n() {
        return Err(Error::Dimension("(V, W) must be square".into()));
    }
    if v.dim() != w.dim() {
        return Err(Error::Dimension("frame and complement dimensions differ".into()));
    }
    let a = extract_potential(v)?;
    let cc = extract_potential(w)?;
    let f = field_strength(&a);
    let g = field_strength(&cc);
    let curvature = blade_curvature(&blade_from_frame(v));
    Ok(ShapeGaugeDecomposition {
        v: v.clone(),
        w: w.clone(),
        a,
        c: cc,
        f,
        g,
        curvature,
    })
}

/// Unitarity check of `(V, W)` at a single point.
pub fn check_unitary_pair(v: &CMatrix, w: &CMatrix) -> Result<f64> {
    let defect = isometry_defect(&hstack(v, w)?);
    if defect > UNITARITY_TOL {
        return Err(Error::Domain(format!("(V, W) not unitary (defect {defect:.3e})")));
    }
    Ok(defect)
}
