//! `U(n)` gauge potentials, field strengths, covariant derivatives and gauge maps.
//!
//! The coupling constant is absorbed into `A`: `D_mu psi = d_mu psi + i A_mu psi`.

use crate::error::{Error, Result};
use crate::fields::{FieldFn, OneForm, Spacetime, TwoForm};
use crate::numerics::{c, commutator, hermitian_part, max_abs_diff, isometry_defect, CMatrix, I};

const HERMITICITY_WARN: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-10;

fn hermitize(raw: CMatrix) -> CMatrix {
    let h = (&raw + raw.adjoint()) * c(0.5, 0.0);
    let defect = max_abs_diff(&raw, &h);
    if defect > HERMITICITY_WARN {
        log::warn!("gauge potential component symmetrized (correction {defect:.3e})");
    }
    h
}

/// `A = A_mu dx^mu` with Hermitian `n x n` components.
#[derive(Debug, Clone)]
pub struct GaugePotential {
    n: usize,
    form: OneForm,
}

impl GaugePotential {
    /// Components are symmetrized on evaluation; a correction above `1e-8` is logged.
    pub fn new(spacetime: Spacetime, components: Vec<FieldFn>) -> Result<Self> {
        let n = components.first().map_or(0, |f| f.shape().0);
        if components.iter().any(|f| f.shape() != (n, n)) {
            return Err(Error::Dimension("gauge potential components must be square n x n".into()));
        }
        let wrapped = components
            .into_iter()
            .map(|f| {
                let raw = f.clone();
                let herm = f.map_linear((n, n), |m| (&m + m.adjoint()) * c(0.5, 0.0));
                // values pass through the warning path, derivatives through the plain projection
                let step = f.step();
                let mut g = FieldFn::new(f.dim(), (n, n), move |x| Ok(hermitize(raw.eval(x)?)))
                    .with_step(step);
                if herm.has_analytic_deriv() {
                    let h1 = herm.clone();
                    g = g.with_deriv(move |x, mu| h1.partial(x, mu));
                }
                if herm.has_analytic_deriv2() {
                    g = g.with_deriv2(move |x, mu, nu| herm.partial2(x, mu, nu));
                }
                g
            })
            .collect();
        Ok(GaugePotential {
            n,
            form: OneForm::new(spacetime, wrapped)?,
        })
    }

    pub fn zero(spacetime: Spacetime, n: usize) -> Self {
        let d = spacetime.dim();
        GaugePotential {
            n,
            form: OneForm::new(spacetime, vec![FieldFn::zero(d, (n, n)); d])
                .expect("zero components are consistent"),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn spacetime(&self) -> &Spacetime {
        self.form.spacetime()
    }

    pub fn component(&self, mu: usize) -> &FieldFn {
        self.form.component(mu)
    }

    pub fn components(&self) -> &[FieldFn] {
        self.form.components()
    }

    pub fn one_form(&self) -> &OneForm {
        &self.form
    }

    pub fn eval(&self, mu: usize, x: &[f64]) -> Result<CMatrix> {
        self.form.component(mu).eval(x)
    }

    /// `d_nu A_mu`.
    pub fn partial(&self, mu: usize, x: &[f64], nu: usize) -> Result<CMatrix> {
        self.form.component(mu).partial(x, nu)
    }

    fn has_analytic(&self, order: usize) -> bool {
        self.components().iter().all(|f| match order {
            1 => f.has_analytic_deriv(),
            _ => f.has_analytic_deriv2(),
        })
    }
}

/// `F_{mu nu}`, antisymmetric by storage.
#[derive(Debug, Clone)]
pub struct FieldStrength {
    n: usize,
    form: TwoForm,
}

impl FieldStrength {
    pub fn new(n: usize, form: TwoForm) -> Result<Self> {
        if form.value_shape() != (n, n) {
            return Err(Error::Dimension("field strength components must be n x n".into()));
        }
        Ok(FieldStrength { n, form })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn spacetime(&self) -> &Spacetime {
        self.form.spacetime()
    }

    pub fn two_form(&self) -> &TwoForm {
        &self.form
    }

    pub fn eval(&self, mu: usize, nu: usize, x: &[f64]) -> Result<CMatrix> {
        self.form.eval(mu, nu, x)
    }

    /// `d_rho F_{mu nu}`.
    pub fn partial(&self, mu: usize, nu: usize, x: &[f64], rho: usize) -> Result<CMatrix> {
        self.form.partial(mu, nu, x, rho)
    }
}

/// `C^n`-valued matter field, stored as an `n x 1` column.
#[derive(Debug, Clone)]
pub struct MatterField {
    psi: FieldFn,
}

impl MatterField {
    pub fn new(psi: FieldFn) -> Result<Self> {
        if psi.shape().1 != 1 {
            return Err(Error::Dimension("matter field must be a column vector".into()));
        }
        Ok(MatterField { psi })
    }

    pub fn n(&self) -> usize {
        self.psi.shape().0
    }

    pub fn field(&self) -> &FieldFn {
        &self.psi
    }

    pub fn eval(&self, x: &[f64]) -> Result<CMatrix> {
        self.psi.eval(x)
    }
}

/// `U(n)`-valued gauge transformation. Unitarity is checked on every evaluation.
#[derive(Debug, Clone)]
pub struct GaugeMap {
    u: FieldFn,
}

impl GaugeMap {
    pub fn new(u: FieldFn) -> Result<Self> {
        let (r, cols) = u.shape();
        if r != cols {
            return Err(Error::Dimension("gauge map must be square".into()));
        }
        Ok(GaugeMap { u })
    }

    pub fn n(&self) -> usize {
        self.u.shape().0
    }

    pub fn field(&self) -> &FieldFn {
        &self.u
    }

    pub fn value(&self, x: &[f64]) -> Result<CMatrix> {
        let u = self.u.eval(x)?;
        let defect = isometry_defect(&u);
        if defect > UNITARITY_TOL {
            return Err(Error::Domain(format!(
                "gauge map not unitary at {x:?} (defect {defect:.3e})"
            )));
        }
        Ok(u)
    }

    pub fn partial(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        self.u.partial(x, mu)
    }
}

/// `D_mu psi = d_mu psi + i A_mu psi`.
pub fn covariant_derivative(a: &GaugePotential, psi: &MatterField, mu: usize, x: &[f64]) -> Result<CMatrix> {
    if psi.n() != a.n() {
        return Err(Error::Dimension("matter field and potential ranks differ".into()));
    }
    Ok(psi.psi.partial(x, mu)? + a.eval(mu, x)? * psi.eval(x)? * I)
}

/// `D_mu M = d_mu M + i [A_mu, M]` for matrix-valued `M`.
pub fn covariant_derivative_matrix(a: &GaugePotential, m: &FieldFn, mu: usize, x: &[f64]) -> Result<CMatrix> {
    if m.shape() != (a.n(), a.n()) {
        return Err(Error::Dimension("matrix field must be n x n".into()));
    }
    Ok(m.partial(x, mu)? + commutator(&a.eval(mu, x)?, &m.eval(x)?)? * I)
}

/// `F_{mu nu} = d_mu A_nu - d_nu A_mu + i [A_mu, A_nu]`.
///
/// Derivatives of `F` are analytic when `A` carries analytic second derivatives.
pub fn field_strength(a: &GaugePotential) -> FieldStrength {
    let n = a.n();
    let d = a.dim();
    let analytic = a.has_analytic(1) && a.has_analytic(2);
    let step = a.component(0).step();
    let form = TwoForm::from_fn(a.spacetime().clone(), (n, n), |mu, nu| {
        let (p, q) = (a.clone(), a.clone());
        FieldFn::new(d, (n, n), move |x| {
            let (am, an) = (p.eval(mu, x)?, p.eval(nu, x)?);
            Ok(p.partial(nu, x, mu)? - p.partial(mu, x, nu)? + commutator(&am, &an)? * I)
        })
        .with_deriv_if(analytic, move |x, rho| {
            let (am, an) = (q.eval(mu, x)?, q.eval(nu, x)?);
            let (dam, dan) = (q.partial(mu, x, rho)?, q.partial(nu, x, rho)?);
            let second = q.component(nu).partial2(x, mu, rho)? - q.component(mu).partial2(x, nu, rho)?;
            Ok(second + (commutator(&dam, &an)? + commutator(&am, &dan)?) * I)
        })
        .with_step(step)
    });
    FieldStrength { n, form }
}

/// `A'_mu = u A_mu u^dag - i u d_mu u^dag`.
pub fn gauge_transform(a: &GaugePotential, u: &GaugeMap) -> Result<GaugePotential> {
    if u.n() != a.n() {
        return Err(Error::Dimension("gauge map and potential ranks differ".into()));
    }
    let n = a.n();
    let d = a.dim();
    let analytic = a.has_analytic(1) && u.u.has_analytic_deriv2();
    let components = (0..d)
        .map(|mu| {
            let (a1, u1) = (a.clone(), u.clone());
            let (a2, u2) = (a.clone(), u.clone());
            FieldFn::new(d, (n, n), move |x| {
                let uu = u1.value(x)?;
                let du = u1.partial(x, mu)?;
                Ok(&uu * a1.eval(mu, x)? * uu.adjoint() - &uu * du.adjoint() * I)
            })
            .with_deriv_if(analytic, move |x, nu| {
                let uu = u2.value(x)?;
                let (dmu, dnu) = (u2.partial(x, mu)?, u2.partial(x, nu)?);
                let d2 = u2.u.partial2(x, mu, nu)?;
                let am = a2.eval(mu, x)?;
                let dam = a2.partial(mu, x, nu)?;
                Ok(&dnu * &am * uu.adjoint() + &uu * dam * uu.adjoint() + &uu * am * dnu.adjoint()
                    - (dnu * dmu.adjoint() + &uu * d2.adjoint()) * I)
            })
            .with_step(a.component(mu).step())
        })
        .collect();
    GaugePotential::new(a.spacetime().clone(), components)
}

/// `F' = u F u^dag`.
pub fn gauge_transform_f(f: &FieldStrength, u: &GaugeMap) -> Result<FieldStrength> {
    if u.n() != f.n() {
        return Err(Error::Dimension("gauge map and field strength ranks differ".into()));
    }
    let n = f.n();
    let d = f.dim();
    let form = TwoForm::from_fn(f.spacetime().clone(), (n, n), |mu, nu| {
        let (f1, u1) = (f.clone(), u.clone());
        let (f2, u2) = (f.clone(), u.clone());
        let analytic = f.form.field(mu, nu).is_some_and(|(g, _)| g.has_analytic_deriv())
            && u.u.has_analytic_deriv();
        FieldFn::new(d, (n, n), move |x| {
            let uu = u1.value(x)?;
            Ok(&uu * f1.eval(mu, nu, x)? * uu.adjoint())
        })
        .with_deriv_if(analytic, move |x, rho| {
            let uu = u2.value(x)?;
            let du = u2.partial(x, rho)?;
            let fv = f2.eval(mu, nu, x)?;
            Ok(&du * &fv * uu.adjoint()
                + &uu * f2.partial(mu, nu, x, rho)? * uu.adjoint()
                + &uu * fv * du.adjoint())
        })
    });
    FieldStrength::new(n, form)
}

/// `psi' = u psi`.
pub fn gauge_transform_psi(psi: &MatterField, u: &GaugeMap) -> Result<MatterField> {
    if u.n() != psi.n() {
        return Err(Error::Dimension("gauge map and matter field ranks differ".into()));
    }
    let (p1, u1, p2, u2) = (psi.clone(), u.clone(), psi.clone(), u.clone());
    let analytic = psi.psi.has_analytic_deriv() && u.u.has_analytic_deriv();
    MatterField::new(
        FieldFn::new(psi.psi.dim(), psi.psi.shape(), move |x| Ok(u1.value(x)? * p1.eval(x)?))
            .with_deriv_if(analytic, move |x, mu| {
                Ok(u2.partial(x, mu)? * p2.eval(x)? + u2.value(x)? * p2.psi.partial(x, mu)?)
            }),
    )
}

/// Hermitian part check used by consumers that build potentials by hand.
pub fn hermiticity_defect_at(a: &GaugePotential, x: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for mu in 0..a.dim() {
        let v = a.eval(mu, x)?;
        worst = worst.max(max_abs_diff(&v, &hermitian_part(&v)?));
    }
    Ok(worst)
}

/// Abelian plane wave `A_mu = n_mu sin(k_nu x^nu)` (covariant components, no metric in `k.x`).
pub fn plane_wave_potential(spacetime: Spacetime, k: &[f64], pol: &[f64]) -> Result<GaugePotential> {
    let d = spacetime.dim();
    if k.len() != d || pol.len() != d {
        return Err(Error::Dimension(format!("plane wave needs {d}-vectors k and n")));
    }
    let phase = move |k: &[f64], x: &[f64]| k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let components = (0..d)
        .map(|mu| {
            let (k0, k1, k2) = (k.to_vec(), k.to_vec(), k.to_vec());
            let nm = pol[mu];
            FieldFn::scalar(d, move |x| nm * phase(&k0, x).sin())
                .with_deriv(move |x, nu| Ok(scalar(nm * k1[nu] * phase(&k1, x).cos())))
                .with_deriv2(move |x, nu, rho| {
                    Ok(scalar(-nm * k2[nu] * k2[rho] * phase(&k2, x).sin()))
                })
        })
        .collect();
    GaugePotential::new(spacetime, components)
}

/// Abelian constant magnetic field `A = B x^1 dx^2`, so `F_12 = B`.
pub fn constant_f_potential(spacetime: Spacetime, b: f64) -> Result<GaugePotential> {
    let d = spacetime.dim();
    if d < 3 {
        return Err(Error::Dimension("constant field needs d >= 3".into()));
    }
    let mut components = vec![FieldFn::zero(d, (1, 1)); d];
    components[2] = FieldFn::scalar(d, move |x| b * x[1])
        .with_deriv(move |_, nu| Ok(scalar(if nu == 1 { b } else { 0.0 })))
        .with_deriv2(|_, _, _| Ok(scalar(0.0)));
    GaugePotential::new(spacetime, components)
}

/// Pure gauge `A_mu = -i u d_mu u^dag`.
pub fn pure_gauge(spacetime: Spacetime, u: &GaugeMap) -> Result<GaugePotential> {
    gauge_transform(&GaugePotential::zero(spacetime, u.n()), u)
}

pub(crate) fn scalar(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, c(v, 0.0))
}
