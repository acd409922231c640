//! The `N = 2`, `n = 1` electromagnetic case.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::blade::{blade_from_frame, Frame, RotatingBlade};
use crate::error::{Error, Result};
use crate::fields::{sphere_flux, FieldFn, Spacetime, TwoForm};
use crate::gauge::{field_strength, scalar, GaugePotential};
use crate::numerics::{c, max_abs_diff, CMatrix};

/// Smallest distance in `theta` from the pole a monopole patch excludes.
pub const POLE_GUARD: f64 = 1e-6;

/// `V = (e^{i alpha} cos rho, e^{i beta} sin rho)`.
#[derive(Debug, Clone)]
pub struct EmFrameParams {
    pub alpha: FieldFn,
    pub beta: FieldFn,
    pub rho: FieldFn,
}

impl EmFrameParams {
    pub fn new(alpha: FieldFn, beta: FieldFn, rho: FieldFn) -> Result<Self> {
        let d = alpha.dim();
        for f in [&alpha, &beta, &rho] {
            if f.shape() != (1, 1) || f.dim() != d {
                return Err(Error::Dimension("frame parameters must be scalars on one spacetime".into()));
            }
        }
        Ok(EmFrameParams { alpha, beta, rho })
    }

    pub fn constant(dim: usize, alpha: f64, beta: f64, rho: f64) -> Self {
        let k = |v: f64| FieldFn::constant(dim, scalar(v));
        EmFrameParams {
            alpha: k(alpha),
            beta: k(beta),
            rho: k(rho),
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    fn all(&self, pred: impl Fn(&FieldFn) -> bool) -> bool {
        pred(&self.alpha) && pred(&self.beta) && pred(&self.rho)
    }

    /// `(alpha, beta, rho)` at `x`.
    pub fn values(&self, x: &[f64]) -> Result<(f64, f64, f64)> {
        Ok((self.alpha.eval_real(x)?, self.beta.eval_real(x)?, self.rho.eval_real(x)?))
    }

    /// Closed-form blade with diagonal `(cos 2rho, -cos 2rho)` and phase `e^{i(alpha - beta)}`.
    pub fn blade_at(&self, x: &[f64]) -> Result<CMatrix> {
        let (a, b, r) = self.values(x)?;
        Ok(em_blade(a - b, r))
    }

    /// `cos^2 rho d_mu alpha + sin^2 rho d_mu beta`.
    pub fn potential_at(&self, x: &[f64], mu: usize) -> Result<f64> {
        let r = self.rho.eval_real(x)?;
        Ok(r.cos().powi(2) * self.alpha.partial_real(x, mu)? + r.sin().powi(2) * self.beta.partial_real(x, mu)?)
    }
}

pub(crate) fn em_blade(phase: f64, rho: f64) -> CMatrix {
    let (s, co) = ((2.0 * rho).sin(), (2.0 * rho).cos());
    let e = c(0.0, phase).exp();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), e * s, e.conj() * s, c(-co, 0.0)])
}

/// Derivatives of `e^{i phi} a(rho)`; `amp` holds `a, a', a''` at the current `rho`.
struct PhaseAmp<'a> {
    phase: &'a FieldFn,
    rho: &'a FieldFn,
    amp: fn(f64) -> [f64; 3],
}

impl PhaseAmp<'_> {
    fn value(&self, x: &[f64]) -> Result<num_complex::Complex64> {
        let a = (self.amp)(self.rho.eval_real(x)?);
        Ok(c(0.0, self.phase.eval_real(x)?).exp() * a[0])
    }

    fn partial(&self, x: &[f64], mu: usize) -> Result<num_complex::Complex64> {
        let a = (self.amp)(self.rho.eval_real(x)?);
        let e = c(0.0, self.phase.eval_real(x)?).exp();
        Ok(e * (c(0.0, self.phase.partial_real(x, mu)?) * a[0] + a[1] * self.rho.partial_real(x, mu)?))
    }

    fn partial2(&self, x: &[f64], mu: usize, nu: usize) -> Result<num_complex::Complex64> {
        let a = (self.amp)(self.rho.eval_real(x)?);
        let e = c(0.0, self.phase.eval_real(x)?).exp();
        let (pm, pn) = (self.phase.partial_real(x, mu)?, self.phase.partial_real(x, nu)?);
        let (rm, rn) = (self.rho.partial_real(x, mu)?, self.rho.partial_real(x, nu)?);
        let pmn = self.phase.partial2(x, mu, nu)?[(0, 0)].re;
        let rmn = self.rho.partial2(x, mu, nu)?[(0, 0)].re;
        let inner = c(0.0, pn) * (c(0.0, pm) * a[0] + a[1] * rm)
            + c(0.0, pmn) * a[0]
            + c(0.0, pm) * a[1] * rn
            + a[2] * rn * rm
            + a[1] * rmn;
        Ok(e * inner)
    }
}

fn cos_amp(r: f64) -> [f64; 3] {
    [r.cos(), -r.sin(), -r.cos()]
}

fn sin_amp(r: f64) -> [f64; 3] {
    [r.sin(), r.cos(), -r.sin()]
}

/// Frame field of the parameters, with analytic derivatives when the parameters have them.
pub fn em_frame(spacetime: Spacetime, params: &EmFrameParams) -> Result<Frame> {
    if params.dim() != spacetime.dim() {
        return Err(Error::Dimension("parameters and spacetime dimensions differ".into()));
    }
    Frame::new(spacetime, em_column(params))
}

/// The `2 x 1` column `(e^{i alpha} cos rho, e^{i beta} sin rho)` as a field.
pub(crate) fn em_column(params: &EmFrameParams) -> FieldFn {
    let analytic1 = params.all(FieldFn::has_analytic_deriv);
    let analytic2 = analytic1 && params.all(FieldFn::has_analytic_deriv2);
    let column = |p: &EmFrameParams, f: &dyn Fn(&PhaseAmp) -> Result<num_complex::Complex64>| -> Result<CMatrix> {
        let top = PhaseAmp { phase: &p.alpha, rho: &p.rho, amp: cos_amp };
        let bottom = PhaseAmp { phase: &p.beta, rho: &p.rho, amp: sin_amp };
        Ok(CMatrix::from_column_slice(2, 1, &[f(&top)?, f(&bottom)?]))
    };
    let (p0, p1, p2) = (params.clone(), params.clone(), params.clone());
    FieldFn::new(params.dim(), (2, 1), move |x| column(&p0, &|t| t.value(x)))
        .with_deriv_if(analytic1, move |x, mu| column(&p1, &|t| t.partial(x, mu)))
        .with_deriv2_if(analytic2, move |x, mu, nu| column(&p2, &|t| t.partial2(x, mu, nu)))
        .with_step(params.rho.step())
}

/// `|cos^2 rho d_mu alpha + sin^2 rho d_mu beta - A_mu|` at `x`.
pub fn em_potential_residual(params: &EmFrameParams, a: &GaugePotential, mu: usize, x: &[f64]) -> Result<f64> {
    if a.n() != 1 {
        return Err(Error::Dimension("electromagnetic potential must be U(1)".into()));
    }
    Ok((params.potential_at(x, mu)? - a.eval(mu, x)?[(0, 0)].re).abs())
}

/// `A = cos^2 rho d alpha + sin^2 rho d beta` as a potential.
pub fn em_potential(spacetime: Spacetime, params: &EmFrameParams) -> Result<GaugePotential> {
    let d = spacetime.dim();
    let components = (0..d)
        .map(|mu| {
            let p = params.clone();
            FieldFn::try_scalar(d, move |x| p.potential_at(x, mu)).with_step(params.rho.step())
        })
        .collect();
    GaugePotential::new(spacetime, components)
}

/// `F = d(cos^2 rho) ^ d(alpha - beta)`.
pub fn em_faraday(spacetime: Spacetime, params: &EmFrameParams) -> TwoForm {
    let d = spacetime.dim();
    let step = params.rho.step();
    TwoForm::from_fn(spacetime, (1, 1), |mu, nu| {
        let p = params.clone();
        FieldFn::try_scalar(d, move |x| {
            let dr = -(2.0 * p.rho.eval_real(x)?).sin();
            let g = |m: usize| -> Result<f64> { Ok(p.alpha.partial_real(x, m)? - p.beta.partial_real(x, m)?) };
            Ok(dr * (p.rho.partial_real(x, mu)? * g(nu)? - p.rho.partial_real(x, nu)? * g(mu)?))
        })
        .with_step(step)
    })
}

fn linear(coeffs: &[f64], shift: f64) -> FieldFn {
    let d = coeffs.len();
    let (k0, k1) = (coeffs.to_vec(), coeffs.to_vec());
    FieldFn::scalar(d, move |x| k0.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + shift)
        .with_deriv(move |_, mu| Ok(scalar(k1[mu])))
        .with_deriv2(|_, _, _| Ok(scalar(0.0)))
}

/// `alpha = n.x`, `beta = -n.x`, `rho = k.x / 2 - pi/4` for `A_mu = n_mu sin(k.x)`.
pub fn plane_wave_params(k: &[f64], n: &[f64]) -> Result<EmFrameParams> {
    if k.len() != n.len() {
        return Err(Error::Dimension("k and n must have the same length".into()));
    }
    let neg: Vec<f64> = n.iter().map(|v| -v).collect();
    let half: Vec<f64> = k.iter().map(|v| 0.5 * v).collect();
    EmFrameParams::new(linear(n, 0.0), linear(&neg, 0.0), linear(&half, -FRAC_PI_4))
}

/// Coordinate patch of the monopole potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Patch {
    /// Regular at the north pole, excludes `theta = pi`.
    Plus,
    /// Regular at the south pole, excludes `theta = 0`.
    Minus,
}

impl Patch {
    pub fn sign(self) -> f64 {
        match self {
            Patch::Plus => 1.0,
            Patch::Minus => -1.0,
        }
    }

    fn check(self, x: &[f64]) -> Result<()> {
        let theta = x[1];
        let bad = match self {
            Patch::Plus => theta > PI - POLE_GUARD,
            Patch::Minus => theta < POLE_GUARD,
        };
        if bad {
            return Err(Error::Chart(format!("theta = {theta} lies at the excluded pole of the {self:?} patch")));
        }
        Ok(())
    }
}

/// Guarded scalar on the spherical chart given by value, gradient and Hessian closures.
fn patch_scalar(
    patch: Patch,
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    grad: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static,
    hess: impl Fn(&[f64], usize, usize) -> f64 + Send + Sync + 'static,
) -> FieldFn {
    FieldFn::try_scalar(3, move |x| {
        patch.check(x)?;
        Ok(f(x))
    })
    .with_deriv(move |x, mu| {
        patch.check(x)?;
        Ok(scalar(grad(x, mu)))
    })
    .with_deriv2(move |x, mu, nu| {
        patch.check(x)?;
        Ok(scalar(hess(x, mu, nu)))
    })
}

/// `A = g(+-1 - cos theta) d phi` on the spherical chart `(r, theta, phi)`.
pub fn monopole_potential(g: f64, patch: Patch) -> Result<GaugePotential> {
    let s = patch.sign();
    let zero = || patch_scalar(patch, |_| 0.0, |_, _| 0.0, |_, _, _| 0.0);
    let a_phi = patch_scalar(
        patch,
        move |x| g * (s - x[1].cos()),
        move |x, mu| if mu == 1 { g * x[1].sin() } else { 0.0 },
        move |x, mu, nu| if mu == 1 && nu == 1 { g * x[1].cos() } else { 0.0 },
    );
    GaugePotential::new(Spacetime::spherical(), vec![zero(), zero(), a_phi])
}

/// `(alpha, beta)` = `(0, 2g phi)` on the plus patch, `(-2g phi, 0)` on the minus one; `rho = theta / 2`.
pub fn monopole_params(g: f64, patch: Patch) -> EmFrameParams {
    let phi_term = |coeff: f64| {
        patch_scalar(
            patch,
            move |x| coeff * x[2],
            move |_, mu| if mu == 2 { coeff } else { 0.0 },
            |_, _, _| 0.0,
        )
    };
    let (alpha, beta) = match patch {
        Patch::Plus => (phi_term(0.0), phi_term(2.0 * g)),
        Patch::Minus => (phi_term(-2.0 * g), phi_term(0.0)),
    };
    let rho = patch_scalar(patch, |x| 0.5 * x[1], |_, mu| if mu == 1 { 0.5 } else { 0.0 }, |_, _, _| 0.0);
    EmFrameParams { alpha, beta, rho }
}

/// Monopole of strength `g` seen from one patch.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MonopoleScenario {
    pub g: f64,
    pub patch: Patch,
}

impl MonopoleScenario {
    pub fn new(g: f64, patch: Patch) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::Parameter("monopole strength must be finite".into()));
        }
        Ok(MonopoleScenario { g, patch })
    }

    pub fn spacetime(&self) -> Spacetime {
        Spacetime::spherical()
    }

    pub fn potential(&self) -> Result<GaugePotential> {
        monopole_potential(self.g, self.patch)
    }

    pub fn params(&self) -> EmFrameParams {
        monopole_params(self.g, self.patch)
    }

    pub fn frame(&self) -> Result<Frame> {
        em_frame(self.spacetime(), &self.params())
    }

    /// Flux of `F` through the unit sphere, `4 pi g` in exact arithmetic.
    pub fn flux(&self, order: usize) -> Result<f64> {
        sphere_flux(field_strength(&self.potential()?).two_form(), 1.0, order)
    }
}

/// Cartesian field `B = g x / r^3`.
pub fn monopole_b_field(g: f64, x: [f64; 3]) -> Result<[f64; 3]> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return Err(Error::Domain("monopole field is singular at the origin".into()));
    }
    let k = g / (r * r * r);
    Ok([k * x[0], k * x[1], k * x[2]])
}

/// Glued monopole blade on the Euclidean `(theta, phi)` plane, for lattice work on the angular sector.
pub fn monopole_angular_blade(g: f64) -> Result<RotatingBlade> {
    let r = FieldFn::new(2, (2, 2), move |x| Ok(em_blade(-2.0 * g * x[1], 0.5 * x[0])));
    RotatingBlade::new(Spacetime::euclidean(2), r)
}

/// Result of gluing the two monopole patches into one blade.
#[derive(Debug, Clone)]
pub struct MonopoleGlue {
    /// `R = [[cos theta, e^{-2ig phi} sin theta], [c.c., -cos theta]]`, defined for every `theta`.
    pub blade: RotatingBlade,
    /// `max |R+ - R-|` over the sampled overlap.
    pub overlap_defect: f64,
    /// `max |R(theta, 2 pi) - R(theta, 0)|`.
    pub periodicity_defect: f64,
    pub single_valued: bool,
}

const GLUE_TOL: f64 = 1e-10;
const GLUE_THETA_SAMPLES: usize = 32;

pub fn monopole_blade_glue(g: f64) -> Result<MonopoleGlue> {
    let st = Spacetime::spherical();
    let plus = blade_from_frame(&em_frame(st.clone(), &monopole_params(g, Patch::Plus))?);
    let minus = blade_from_frame(&em_frame(st.clone(), &monopole_params(g, Patch::Minus))?);
    let glued = FieldFn::new(3, (2, 2), move |x| Ok(em_blade(-2.0 * g * x[2], 0.5 * x[1])));
    let blade = RotatingBlade::new(st, glued)?;
    let mut overlap_defect: f64 = 0.0;
    let mut periodicity_defect: f64 = 0.0;
    for i in 0..GLUE_THETA_SAMPLES {
        // stay a guard width inside the band so rounding cannot reach either pole
        let theta = 2.0 * POLE_GUARD + (PI - 4.0 * POLE_GUARD) * i as f64 / (GLUE_THETA_SAMPLES - 1) as f64;
        for phi in [0.0, 1.0, 2.5, 4.0, 2.0 * PI] {
            let x = [1.0, theta, phi];
            overlap_defect = overlap_defect.max(max_abs_diff(&plus.value(&x)?, &minus.value(&x)?));
            overlap_defect = overlap_defect.max(max_abs_diff(&plus.value(&x)?, &blade.value(&x)?));
        }
        let start = blade.value(&[1.0, theta, 0.0])?;
        let end = blade.value(&[1.0, theta, 2.0 * PI])?;
        periodicity_defect = periodicity_defect.max(max_abs_diff(&start, &end));
    }
    Ok(MonopoleGlue {
        blade,
        overlap_defect,
        periodicity_defect,
        single_valued: overlap_defect <= GLUE_TOL && periodicity_defect <= GLUE_TOL,
    })
}
