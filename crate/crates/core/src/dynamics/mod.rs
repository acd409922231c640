//! Actions and equation-of-motion residuals.

mod flow;
mod report;

pub use flow::{sigma_flow, FlowOutcome, SigmaLattice};
pub use report::{ResidualEntry, ResidualReport};

use crate::blade::{blade_curvature, blade_from_frame, extract_potential, Frame, RotatingBlade};
use crate::em::{em_frame, EmFrameParams};
use crate::error::{Error, Result};
use crate::fields::{lattice_integral, FieldFn, Grid, Spacetime};
use crate::gauge::{field_strength, FieldStrength, GaugePotential};
use crate::numerics::{c, commutator, trace, CMatrix, I};

fn ym_residual_with(a: &GaugePotential, f: &FieldStrength, nu: usize, x: &[f64]) -> Result<CMatrix> {
    let st = a.spacetime();
    let mut out = CMatrix::zeros(a.n(), a.n());
    for mu in 0..a.dim() {
        let term = f.partial(mu, nu, x, mu)? + commutator(&a.eval(mu, x)?, &f.eval(mu, nu, x)?)? * I;
        out += term * c(st.sign(mu), 0.0);
    }
    Ok(out)
}

/// `D^mu F_{mu nu}` with the index raised by the metric.
pub fn ym_residual(a: &GaugePotential, nu: usize, x: &[f64]) -> Result<CMatrix> {
    ym_residual_with(a, &field_strength(a), nu, x)
}

/// `-1/4 Tr(F_{mu nu} F^{mu nu})` at `x`.
pub fn ym_density(a: &GaugePotential, x: &[f64]) -> Result<f64> {
    let f = field_strength(a);
    let st = a.spacetime();
    let mut total = 0.0;
    for mu in 0..a.dim() {
        for nu in (mu + 1)..a.dim() {
            let fm = f.eval(mu, nu, x)?;
            // both orderings of the index pair contribute equally
            total += 2.0 * st.sign(mu) * st.sign(nu) * trace(&(&fm * &fm)).re;
        }
    }
    Ok(-0.25 * total)
}

pub fn ym_action(a: &GaugePotential, grid: &Grid) -> Result<f64> {
    let a = a.clone();
    lattice_integral(&FieldFn::try_scalar(grid.dim(), move |x| ym_density(&a, x)), grid)
}

/// `-1/4 Tr(d_mu R d^mu R)` at `x`.
pub fn sigma_density(r: &RotatingBlade, x: &[f64]) -> Result<f64> {
    let st = r.spacetime();
    let mut total = 0.0;
    for mu in 0..r.dim() {
        let d = r.partial(x, mu)?;
        total += st.sign(mu) * trace(&(&d * &d)).re;
    }
    Ok(-0.25 * total)
}

pub fn sigma_action(r: &RotatingBlade, grid: &Grid) -> Result<f64> {
    let r = r.clone();
    lattice_integral(&FieldFn::try_scalar(grid.dim(), move |x| sigma_density(&r, x)), grid)
}

/// `sum_nu d^nu (V (D^mu F_{mu nu}) V^dag)`, the equation of motion of the action
/// written in terms of `V`. Needs third derivatives of `V`, so the outer
/// derivative is a finite difference.
pub fn modified_eom_residual(v: &Frame, x: &[f64]) -> Result<CMatrix> {
    let a = extract_potential(v)?;
    let f = field_strength(&a);
    let st = v.spacetime().clone();
    let big_n = v.big_n();
    let mut out = CMatrix::zeros(big_n, big_n);
    for nu in 0..v.dim() {
        let (vv, aa, ff) = (v.clone(), a.clone(), f.clone());
        let m = FieldFn::new(v.dim(), (big_n, big_n), move |y| {
            let frame = vv.value(y)?;
            Ok(&frame * ym_residual_with(&aa, &ff, nu, y)? * frame.adjoint())
        })
        .with_step(v.field().step());
        out += m.partial(x, nu)? * c(st.sign(nu), 0.0);
    }
    Ok(out)
}

/// `sum_nu (d^mu F_{mu nu}) d^nu R` for an electromagnetic frame.
pub fn maxwell_mod_residual(spacetime: &Spacetime, params: &EmFrameParams, x: &[f64]) -> Result<CMatrix> {
    let v = em_frame(spacetime.clone(), params)?;
    let a = extract_potential(&v)?;
    let r = blade_from_frame(&v);
    let mut out = CMatrix::zeros(2, 2);
    for nu in 0..spacetime.dim() {
        let j = ym_residual(&a, nu, x)?[(0, 0)];
        out += r.partial(x, nu)? * (j * spacetime.sign(nu));
    }
    Ok(out)
}

/// `P D^mu Omega_{mu nu}` with `D_mu M = d_mu M + i [S_mu, M]`.
pub fn shape_gauge_ym_residual(v: &Frame, nu: usize, x: &[f64]) -> Result<CMatrix> {
    let blade = blade_from_frame(v);
    let curv = blade_curvature(&blade);
    let omega = curv.form();
    let st = v.spacetime();
    let mut out = CMatrix::zeros(v.big_n(), v.big_n());
    for mu in 0..v.dim() {
        let s = curv.shape().eval(mu, x)?;
        let term = omega.partial(mu, nu, x, mu)? + commutator(&s, &omega.eval(mu, nu, x)?)? * I;
        out += term * c(st.sign(mu), 0.0);
    }
    Ok(blade.projector(x)? * out)
}

/// `sum_mu d^mu S_mu`.
pub fn sigma_eom_residual(r: &RotatingBlade, x: &[f64]) -> Result<CMatrix> {
    let s = crate::blade::shape_operator(r);
    let st = r.spacetime();
    let mut out = CMatrix::zeros(r.big_n(), r.big_n());
    for mu in 0..r.dim() {
        out += s.partial(mu, x, mu)? * c(st.sign(mu), 0.0);
    }
    Ok(out)
}

/// Which residual to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Ym,
    Modified,
    Maxmod,
    Shape,
    Sigma,
}

impl Equation {
    /// Index handling printed in report headers.
    pub fn index_note(self) -> &'static str {
        match self {
            Equation::Ym => "free index nu; mu summed with metric signs",
            Equation::Modified => "nu summed with metric signs (divergence); N x N residual",
            Equation::Maxmod => "nu summed with metric signs; 2 x 2 residual",
            Equation::Shape => "free index nu; projected by P",
            Equation::Sigma => "mu summed with metric signs",
        }
    }

    pub fn has_free_index(self) -> bool {
        matches!(self, Equation::Ym | Equation::Shape)
    }
}

impl std::str::FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ym" => Equation::Ym,
            "modified" => Equation::Modified,
            "maxmod" => Equation::Maxmod,
            "shape" => Equation::Shape,
            "sigma" => Equation::Sigma,
            other => return Err(Error::Parameter(format!("unknown equation '{other}'"))),
        })
    }
}

#[cfg(test)]
mod tests;
