use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{c, CMatrix};

type EvalFn = dyn Fn(&[f64]) -> Result<CMatrix> + Send + Sync;
type DerivFn = dyn Fn(&[f64], usize) -> Result<CMatrix> + Send + Sync;
type Deriv2Fn = dyn Fn(&[f64], usize, usize) -> Result<CMatrix> + Send + Sync;

pub const DEFAULT_STEP: f64 = 1e-3;

/// A matrix-valued function on a `dim`-dimensional coordinate patch.
///
/// Scalars are `1 x 1`, vectors `n x 1`. Derivatives come from the optional
/// analytic closures when present and from central differences with step
/// `step` otherwise. Second derivatives without an analytic closure are
/// central differences of the first derivative, i.e. nested stencils.
#[derive(Clone)]
pub struct FieldFn {
    dim: usize,
    rows: usize,
    cols: usize,
    eval: Arc<EvalFn>,
    deriv: Option<Arc<DerivFn>>,
    deriv2: Option<Arc<Deriv2Fn>>,
    step: f64,
}

impl fmt::Debug for FieldFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldFn")
            .field("dim", &self.dim)
            .field("shape", &(self.rows, self.cols))
            .field("analytic_deriv", &self.deriv.is_some())
            .field("analytic_deriv2", &self.deriv2.is_some())
            .field("step", &self.step)
            .finish()
    }
}

pub(crate) fn shifted(x: &[f64], mu: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[mu] += delta;
    y
}

/// `(f(x + h e_mu) - f(x - h e_mu)) / 2h`.
pub fn central_difference<F>(f: F, x: &[f64], mu: usize, h: f64) -> Result<CMatrix>
where
    F: Fn(&[f64]) -> Result<CMatrix>,
{
    let plus = f(&shifted(x, mu, h))?;
    let minus = f(&shifted(x, mu, -h))?;
    if plus.shape() != minus.shape() {
        return Err(Error::Dimension("stencil values differ in shape".into()));
    }
    Ok((plus - minus) * c(0.5 / h, 0.0))
}

impl FieldFn {
    pub fn new<F>(dim: usize, shape: (usize, usize), eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<CMatrix> + Send + Sync + 'static,
    {
        FieldFn {
            dim,
            rows: shape.0,
            cols: shape.1,
            eval: Arc::new(eval),
            deriv: None,
            deriv2: None,
            step: DEFAULT_STEP,
        }
    }

    /// Real scalar field.
    pub fn scalar<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FieldFn::new(dim, (1, 1), move |x| Ok(CMatrix::from_element(1, 1, c(f(x), 0.0))))
    }

    /// Real scalar field whose evaluation may fail.
    pub fn try_scalar<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        FieldFn::new(dim, (1, 1), move |x| Ok(CMatrix::from_element(1, 1, c(f(x)?, 0.0))))
    }

    pub fn constant(dim: usize, value: CMatrix) -> Self {
        let shape = value.shape();
        let zero = CMatrix::zeros(shape.0, shape.1);
        let zero2 = zero.clone();
        FieldFn::new(dim, shape, move |_| Ok(value.clone()))
            .with_deriv(move |_, _| Ok(zero.clone()))
            .with_deriv2(move |_, _, _| Ok(zero2.clone()))
    }

    pub fn zero(dim: usize, shape: (usize, usize)) -> Self {
        FieldFn::constant(dim, CMatrix::zeros(shape.0, shape.1))
    }

    pub fn with_deriv<F>(mut self, deriv: F) -> Self
    where
        F: Fn(&[f64], usize) -> Result<CMatrix> + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn with_deriv2<F>(mut self, deriv2: F) -> Self
    where
        F: Fn(&[f64], usize, usize) -> Result<CMatrix> + Send + Sync + 'static,
    {
        self.deriv2 = Some(Arc::new(deriv2));
        self
    }

    /// Attaches `deriv` only when `enabled`; lets callers propagate analyticity.
    pub fn with_deriv_if<F>(self, enabled: bool, deriv: F) -> Self
    where
        F: Fn(&[f64], usize) -> Result<CMatrix> + Send + Sync + 'static,
    {
        if enabled {
            self.with_deriv(deriv)
        } else {
            self
        }
    }

    pub fn with_deriv2_if<F>(self, enabled: bool, deriv2: F) -> Self
    where
        F: Fn(&[f64], usize, usize) -> Result<CMatrix> + Send + Sync + 'static,
    {
        if enabled {
            self.with_deriv2(deriv2)
        } else {
            self
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    /// Drops the analytic derivatives so every derivative goes through finite differences.
    pub fn finite_difference_only(mut self) -> Self {
        self.deriv = None;
        self.deriv2 = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn has_analytic_deriv2(&self) -> bool {
        self.deriv2.is_some()
    }

    fn check(&self, x: &[f64], value: CMatrix, what: &str) -> Result<CMatrix> {
        if value.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension(format!(
                "{what} returned {:?}, field declares {:?}",
                value.shape(),
                (self.rows, self.cols)
            )));
        }
        if !crate::numerics::is_finite(&value) {
            return Err(Error::NonFinite(format!("{what} at {x:?}")));
        }
        Ok(value)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, field expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn check_axis(&self, mu: usize) -> Result<()> {
        if mu >= self.dim {
            return Err(Error::Dimension(format!("axis {mu} >= dimension {}", self.dim)));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<CMatrix> {
        self.check_point(x)?;
        let v = (self.eval)(x)?;
        self.check(x, v, "evaluation")
    }

    /// Real part of a scalar field.
    pub fn eval_real(&self, x: &[f64]) -> Result<f64> {
        if self.shape() != (1, 1) {
            return Err(Error::Dimension("eval_real on a non-scalar field".into()));
        }
        Ok(self.eval(x)?[(0, 0)].re)
    }

    /// `d f / d x^mu` at `x`.
    pub fn partial(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        self.check_point(x)?;
        self.check_axis(mu)?;
        let v = match &self.deriv {
            Some(d) => d(x, mu)?,
            None => central_difference(|y| (self.eval)(y), x, mu, self.step)?,
        };
        self.check(x, v, "derivative")
    }

    pub fn partial_real(&self, x: &[f64], mu: usize) -> Result<f64> {
        Ok(self.partial(x, mu)?[(0, 0)].re)
    }

    /// `d^2 f / d x^mu d x^nu` at `x`.
    pub fn partial2(&self, x: &[f64], mu: usize, nu: usize) -> Result<CMatrix> {
        self.check_point(x)?;
        self.check_axis(mu)?;
        self.check_axis(nu)?;
        let v = match &self.deriv2 {
            Some(d2) => d2(x, mu, nu)?,
            None => central_difference(|y| self.partial(y, mu), x, nu, self.step)?,
        };
        self.check(x, v, "second derivative")
    }

    /// Gradient of a real scalar field.
    pub fn gradient_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.dim).map(|mu| self.partial_real(x, mu)).collect()
    }

    /// Applies a real-linear map to the values; analytic derivatives are mapped alongside.
    pub fn map_linear<F>(&self, shape: (usize, usize), map: F) -> FieldFn
    where
        F: Fn(CMatrix) -> CMatrix + Send + Sync + 'static,
    {
        let map = Arc::new(map);
        let (f, g, h) = (self.clone(), self.clone(), self.clone());
        let (m1, m2, m3) = (map.clone(), map.clone(), map);
        FieldFn::new(self.dim, shape, move |x| Ok(m1(f.eval(x)?)))
            .with_deriv_if(self.has_analytic_deriv(), move |x, mu| Ok(m2(g.partial(x, mu)?)))
            .with_deriv2_if(self.has_analytic_deriv2(), move |x, mu, nu| {
                Ok(m3(h.partial2(x, mu, nu)?))
            })
            .with_step(self.step)
    }

    /// `d_mu f` as a field of its own. Analytic when `f` has an analytic second derivative.
    pub fn partial_field(&self, mu: usize) -> FieldFn {
        let f = self.clone();
        let g = self.clone();
        FieldFn::new(self.dim, self.shape(), move |x| f.partial(x, mu))
            .with_deriv_if(self.has_analytic_deriv2(), move |x, nu| g.partial2(x, mu, nu))
            .with_step(self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_dot(k: [f64; 4]) -> FieldFn {
        FieldFn::scalar(4, move |x| (0..4).map(|i| k[i] * x[i]).sum::<f64>().sin())
    }

    #[test]
    fn linear_function_has_unit_slope() {
        let f = FieldFn::scalar(4, |x| x[1]);
        let x = [0.3, -2.0, 1.0, 5.0];
        assert!((f.partial_real(&x, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(f.partial_real(&x, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sin_derivative_matches_closed_form() {
        let k = [0.7, -1.1, 0.4, 2.0];
        let f = sin_dot(k);
        let x = [0.1, 0.2, -0.3, 0.4];
        let phase: f64 = (0..4).map(|i| k[i] * x[i]).sum();
        for (mu, km) in k.iter().enumerate() {
            let exact = km * phase.cos();
            let err = (f.partial_real(&x, mu).unwrap() - exact).abs();
            assert!(err < 1e-5, "mu={mu} err={err}");
        }
    }

    #[test]
    fn central_difference_is_second_order() {
        let k = [0.7, -1.1, 0.4, 2.0];
        let x = [0.1, 0.2, -0.3, 0.4];
        let phase: f64 = (0..4).map(|i| k[i] * x[i]).sum();
        let exact = k[3] * phase.cos();
        let err = |h: f64| (sin_dot(k).with_step(h).partial_real(&x, 3).unwrap() - exact).abs();
        let ratio = err(0.02) / err(0.01);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn second_derivative_is_symmetric() {
        let f = FieldFn::scalar(2, |x| (x[0] * x[1]).sin() + x[0].exp() * x[1].cos());
        let x = [0.3, 0.8];
        let a = f.partial2(&x, 0, 1).unwrap()[(0, 0)].re;
        let b = f.partial2(&x, 1, 0).unwrap()[(0, 0)].re;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn evaluation_errors_propagate() {
        let f = FieldFn::try_scalar(1, |x| {
            if x[0] > 0.0 {
                Err(Error::Domain("positive".into()))
            } else {
                Ok(x[0])
            }
        });
        assert!(f.partial(&[0.0], 0).is_err());
        assert!(f.eval(&[-1.0]).is_ok());
        assert!(matches!(f.eval(&[1.0, 2.0]), Err(Error::Dimension(_))));
        assert!(matches!(f.partial(&[-1.0], 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let f = FieldFn::scalar(1, |x| 1.0 / x[0]);
        assert!(matches!(f.eval(&[0.0]), Err(Error::NonFinite(_))));
    }
}
