//! Real embedded manifolds `f: R^d -> R^N`.
//!
//! The tangent projector `P`, the reflection `R = 2P - I` and the shape
//! operator `S_mu = (1/2) R d_mu R` are the real counterparts of the blade
//! machinery; curvature and Riemann components come from first derivatives
//! of `R` alone.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Metric condition number above which the chart counts as degenerate.
pub const MAX_CONDITION: f64 = 1e8;

type PointFn = Arc<dyn Fn(&[f64]) -> RVector + Send + Sync>;
type JacFn = Arc<dyn Fn(&[f64]) -> RMatrix + Send + Sync>;
type HessFn = Arc<dyn Fn(&[f64], usize) -> RMatrix + Send + Sync>;

/// A smooth map from a `d`-dimensional chart into `R^N`.
///
/// Tangent vectors and their derivatives are analytic when supplied and
/// central differences otherwise.
#[derive(Clone)]
pub struct Embedding {
    name: String,
    d: usize,
    big_n: usize,
    f: PointFn,
    jac: Option<JacFn>,
    hess: Option<HessFn>,
    step: f64,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("Embedding")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("N", &self.big_n)
            .field("analytic_tangents", &self.jac.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .finish()
    }
}

impl Embedding {
    pub fn new<F>(name: impl Into<String>, d: usize, big_n: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> RVector + Send + Sync + 'static,
    {
        if d == 0 || big_n <= d {
            return Err(Error::Dimension(format!(
                "embedding needs 0 < d < N, got d = {d}, N = {big_n}"
            )));
        }
        Ok(Embedding {
            name: name.into(),
            d,
            big_n,
            f: Arc::new(f),
            jac: None,
            hess: None,
            step: Tolerances::default().fd_step,
        })
    }

    /// Analytic tangent matrix `F = (f_0, ..., f_{d-1})`, `N x d`.
    pub fn with_tangents<F>(mut self, jac: F) -> Self
    where
        F: Fn(&[f64]) -> RMatrix + Send + Sync + 'static,
    {
        self.jac = Some(Arc::new(jac));
        self
    }

    /// Analytic `d_mu F`, `N x d`.
    pub fn with_hessian<F>(mut self, hess: F) -> Self
    where
        F: Fn(&[f64], usize) -> RMatrix + Send + Sync + 'static,
    {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    /// Drops analytic derivatives, leaving central differences.
    pub fn finite_difference_only(mut self) -> Self {
        self.jac = None;
        self.hess = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ambient_dim(&self) -> usize {
        self.big_n
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, embedding chart has {}",
                x.len(),
                self.d
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {x:?}")));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<RVector> {
        self.check_point(x)?;
        Ok((self.f)(x))
    }

    /// Tangent matrix `F` with columns `f_mu = d_mu f`.
    pub fn tangents(&self, x: &[f64]) -> Result<RMatrix> {
        self.check_point(x)?;
        if let Some(jac) = &self.jac {
            return Ok(jac(x));
        }
        let mut out = RMatrix::zeros(self.big_n, self.d);
        for mu in 0..self.d {
            out.set_column(mu, &central(|y| (self.f)(y), x, mu, self.step));
        }
        Ok(out)
    }

    /// `d_mu F`.
    pub fn tangents_partial(&self, x: &[f64], mu: usize) -> Result<RMatrix> {
        self.check_point(x)?;
        self.check_index(mu)?;
        if let Some(hess) = &self.hess {
            return Ok(hess(x, mu));
        }
        let h = self.step;
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[mu] += h;
        minus[mu] -= h;
        Ok((self.tangents(&plus)? - self.tangents(&minus)?) / (2.0 * h))
    }

    fn check_index(&self, mu: usize) -> Result<()> {
        if mu >= self.d {
            return Err(Error::Dimension(format!("index {mu} out of range for d = {}", self.d)));
        }
        Ok(())
    }

    /// Induced metric `g_{mu nu} = f_mu . f_nu`.
    pub fn induced_metric(&self, x: &[f64]) -> Result<RMatrix> {
        let f = self.tangents(x)?;
        let g = f.transpose() * &f;
        let eig = g.clone().symmetric_eigenvalues();
        let max = eig.max();
        let min = eig.min();
        if min.is_nan() || min <= 0.0 || max / min > MAX_CONDITION {
            return Err(Error::Chart(format!(
                "degenerate chart at {x:?}: metric condition number {:.3e}",
                if min > 0.0 { max / min } else { f64::INFINITY }
            )));
        }
        Ok(g)
    }

    fn metric_inverse(&self, x: &[f64]) -> Result<(RMatrix, RMatrix)> {
        let f = self.tangents(x)?;
        let g = self.induced_metric(x)?;
        let ginv = g
            .cholesky()
            .ok_or_else(|| Error::Chart(format!("metric not positive definite at {x:?}")))?
            .inverse();
        Ok((f, ginv))
    }

    /// Tangent projector `P = F (F^T F)^{-1} F^T`.
    pub fn projector(&self, x: &[f64]) -> Result<RMatrix> {
        let (f, ginv) = self.metric_inverse(x)?;
        Ok(&f * ginv * f.transpose())
    }

    pub fn projector_partial(&self, x: &[f64], mu: usize) -> Result<RMatrix> {
        let (f, ginv) = self.metric_inverse(x)?;
        let df = self.tangents_partial(x, mu)?;
        let dg = df.transpose() * &f + f.transpose() * &df;
        let dginv = -(&ginv * dg * &ginv);
        Ok(&df * &ginv * f.transpose() + &f * dginv * f.transpose() + &f * &ginv * df.transpose())
    }

    /// Reflection through the tangent plane, `R = 2P - I`.
    pub fn blade(&self, x: &[f64]) -> Result<RMatrix> {
        Ok(self.projector(x)? * 2.0 - RMatrix::identity(self.big_n, self.big_n))
    }

    pub fn blade_partial(&self, x: &[f64], mu: usize) -> Result<RMatrix> {
        Ok(self.projector_partial(x, mu)? * 2.0)
    }

    /// Shape operator `S_mu = (1/2) R d_mu R`.
    pub fn shape(&self, x: &[f64], mu: usize) -> Result<RMatrix> {
        Ok(self.blade(x)? * self.blade_partial(x, mu)? * 0.5)
    }

    /// `d_nu S_mu` by central differences.
    pub fn shape_partial(&self, x: &[f64], mu: usize, nu: usize) -> Result<RMatrix> {
        self.check_index(nu)?;
        let h = self.step;
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[nu] += h;
        minus[nu] -= h;
        Ok((self.shape(&plus, mu)? - self.shape(&minus, mu)?) / (2.0 * h))
    }

    /// Max-abs residual of `d_mu S_nu - d_nu S_mu + 2 [S_mu, S_nu]`.
    pub fn shape_identity_residual(&self, x: &[f64], mu: usize, nu: usize) -> Result<f64> {
        let s_mu = self.shape(x, mu)?;
        let s_nu = self.shape(x, nu)?;
        let lhs = self.shape_partial(x, nu, mu)? - self.shape_partial(x, mu, nu)?
            + (&s_mu * &s_nu - &s_nu * &s_mu) * 2.0;
        Ok(lhs.amax())
    }

    /// Both curvature expressions, `-[S_mu, S_nu]` and `(1/4)[d_mu R, d_nu R]`.
    pub fn curvature_routes(&self, x: &[f64], mu: usize, nu: usize) -> Result<(RMatrix, RMatrix)> {
        let s_mu = self.shape(x, mu)?;
        let s_nu = self.shape(x, nu)?;
        let shape = -(&s_mu * &s_nu - &s_nu * &s_mu);
        let dr_mu = self.blade_partial(x, mu)?;
        let dr_nu = self.blade_partial(x, nu)?;
        let blade = (&dr_mu * &dr_nu - &dr_nu * &dr_mu) * 0.25;
        Ok((shape, blade))
    }

    /// Curvature `Omega_{mu nu}`, cross-checked between both expressions.
    pub fn curvature(&self, x: &[f64], mu: usize, nu: usize) -> Result<RMatrix> {
        let (shape, blade) = self.curvature_routes(x, mu, nu)?;
        let tol = Tolerances::default().fd();
        let gap = (&shape - &blade).amax();
        if gap > tol {
            return Err(Error::inconsistency("embedded curvature cross-check", gap, tol));
        }
        Ok(blade)
    }

    /// `R_{rho sigma mu nu} = f_rho . (Omega_{mu nu} f_sigma)`.
    pub fn riemann_component(&self, x: &[f64], rho: usize, sigma: usize, mu: usize, nu: usize) -> Result<f64> {
        self.check_index(rho)?;
        self.check_index(sigma)?;
        let f = self.tangents(x)?;
        let omega = self.curvature(x, mu, nu)?;
        Ok(f.column(rho).dot(&(omega * f.column(sigma))))
    }

    /// Gauss curvature `R_{0101} / det g` of a surface.
    pub fn gauss_curvature(&self, x: &[f64]) -> Result<f64> {
        if self.d != 2 {
            return Err(Error::Dimension(format!(
                "Gauss curvature needs a surface, chart has d = {}",
                self.d
            )));
        }
        let g = self.induced_metric(x)?;
        Ok(self.riemann_component(x, 0, 1, 0, 1)? / g.determinant())
    }

    /// Covariant derivative `D_mu v = d_mu v + S_mu v` of an ambient vector field.
    pub fn covariant_derivative<V>(&self, v: V, x: &[f64], mu: usize) -> Result<RVector>
    where
        V: Fn(&[f64]) -> RVector,
    {
        self.check_point(x)?;
        self.check_index(mu)?;
        let dv = central(&v, x, mu, self.step);
        Ok(dv + self.shape(x, mu)? * v(x))
    }

    /// Normal part `|P_perp D_mu v|` of the covariant derivative of the
    /// tangent field `v = F c`.
    pub fn tangent_covariance_defect<C>(&self, coeffs: C, x: &[f64], mu: usize) -> Result<f64>
    where
        C: Fn(&[f64]) -> RVector,
    {
        let field = |y: &[f64]| -> RVector {
            match self.tangents(y) {
                Ok(f) => f * coeffs(y),
                Err(_) => RVector::from_element(self.big_n, f64::NAN),
            }
        };
        let dv = self.covariant_derivative(field, x, mu)?;
        let p = self.projector(x)?;
        let defect = (&dv - p * &dv).amax();
        if !defect.is_finite() {
            return Err(Error::NonFinite("tangent covariant derivative".into()));
        }
        Ok(defect)
    }

    pub fn curvature_row(&self, x: &[f64]) -> Result<CurvatureRow> {
        let g = self.induced_metric(x)?;
        let mut shape_residual = 0.0f64;
        let mut route_gap = 0.0f64;
        for mu in 0..self.d {
            for nu in (mu + 1)..self.d {
                shape_residual = shape_residual.max(self.shape_identity_residual(x, mu, nu)?);
                let (a, b) = self.curvature_routes(x, mu, nu)?;
                route_gap = route_gap.max((a - b).amax());
            }
        }
        let (riemann_0101, gauss) = if self.d == 2 {
            let r = self.riemann_component(x, 0, 1, 0, 1)?;
            (Some(r), Some(r / g.determinant()))
        } else {
            (None, None)
        };
        Ok(CurvatureRow {
            point: x.to_vec(),
            metric_det: g.determinant(),
            riemann_0101,
            gauss,
            shape_residual,
            route_gap,
        })
    }
}

fn central<V>(v: V, x: &[f64], mu: usize, h: f64) -> RVector
where
    V: Fn(&[f64]) -> RVector,
{
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[mu] += h;
    minus[mu] -= h;
    (v(&plus) - v(&minus)) / (2.0 * h)
}

/// One row of a curvature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRow {
    pub point: Vec<f64>,
    pub metric_det: f64,
    pub riemann_0101: Option<f64>,
    pub gauss: Option<f64>,
    /// Max residual of the shape identity over index pairs.
    pub shape_residual: f64,
    /// Max gap between the two curvature expressions.
    pub route_gap: f64,
}

/// Flat plane `(u, v) -> (u, v, 0)`.
pub fn plane() -> Embedding {
    Embedding::new("plane", 2, 3, |x| RVector::from_vec(vec![x[0], x[1], 0.0]))
        .expect("valid dimensions")
        .with_tangents(|_| RMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]))
        .with_hessian(|_, _| RMatrix::zeros(3, 2))
}

/// Sphere of radius `a` in the `(theta, phi)` chart.
pub fn sphere(a: f64) -> Result<Embedding> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Parameter(format!("sphere radius must be positive, got {a}")));
    }
    let e = Embedding::new("sphere", 2, 3, move |x| {
        let (st, ct) = x[0].sin_cos();
        let (sp, cp) = x[1].sin_cos();
        RVector::from_vec(vec![a * st * cp, a * st * sp, a * ct])
    })?
    .with_tangents(move |x| {
        let (st, ct) = x[0].sin_cos();
        let (sp, cp) = x[1].sin_cos();
        RMatrix::from_row_slice(3, 2, &[a * ct * cp, -a * st * sp, a * ct * sp, a * st * cp, -a * st, 0.0])
    })
    .with_hessian(move |x, mu| {
        let (st, ct) = x[0].sin_cos();
        let (sp, cp) = x[1].sin_cos();
        let rows = if mu == 0 {
            [-st * cp, -ct * sp, -st * sp, ct * cp, -ct, 0.0]
        } else {
            [-ct * sp, -st * cp, ct * cp, -st * sp, 0.0, 0.0]
        };
        RMatrix::from_row_slice(3, 2, &rows) * a
    });
    Ok(e)
}

/// Unit cylinder `(u, v) -> (cos u, sin u, v)`.
pub fn cylinder() -> Embedding {
    Embedding::new("cylinder", 2, 3, |x| RVector::from_vec(vec![x[0].cos(), x[0].sin(), x[1]]))
        .expect("valid dimensions")
        .with_tangents(|x| {
            let (s, c) = x[0].sin_cos();
            RMatrix::from_row_slice(3, 2, &[-s, 0.0, c, 0.0, 0.0, 1.0])
        })
        .with_hessian(|x, mu| {
            let (s, c) = x[0].sin_cos();
            if mu == 0 {
                RMatrix::from_row_slice(3, 2, &[-c, 0.0, -s, 0.0, 0.0, 0.0])
            } else {
                RMatrix::zeros(3, 2)
            }
        })
}

/// Torus with major radius `big_r` and minor radius `r`, chart `(u, v)`
/// with `u` around the axis and `v` around the tube.
pub fn torus(big_r: f64, r: f64) -> Result<Embedding> {
    if !(r > 0.0 && big_r > r && big_r.is_finite()) {
        return Err(Error::Parameter(format!(
            "torus needs 0 < r < R, got R = {big_r}, r = {r}"
        )));
    }
    let e = Embedding::new("torus", 2, 3, move |x| {
        let (su, cu) = x[0].sin_cos();
        let (sv, cv) = x[1].sin_cos();
        let w = big_r + r * cv;
        RVector::from_vec(vec![w * cu, w * su, r * sv])
    })?
    .with_tangents(move |x| {
        let (su, cu) = x[0].sin_cos();
        let (sv, cv) = x[1].sin_cos();
        let w = big_r + r * cv;
        RMatrix::from_row_slice(3, 2, &[-w * su, -r * sv * cu, w * cu, -r * sv * su, 0.0, r * cv])
    })
    .with_hessian(move |x, mu| {
        let (su, cu) = x[0].sin_cos();
        let (sv, cv) = x[1].sin_cos();
        let w = big_r + r * cv;
        let rows = if mu == 0 {
            [-w * cu, r * sv * su, -w * su, -r * sv * cu, 0.0, 0.0]
        } else {
            [r * sv * su, -r * cv * cu, -r * sv * cu, -r * cv * su, 0.0, -r * sv]
        };
        RMatrix::from_row_slice(3, 2, &rows)
    });
    Ok(e)
}

/// Seeded graph embedding `x -> (x, h_1(x), ..., h_m(x))` with each `h_j` a
/// short sum of sines. The metric is `I + J^T J`, never degenerate.
pub fn random_smooth(d: usize, extra: usize, seed: u64) -> Result<Embedding> {
    if d == 0 || extra == 0 {
        return Err(Error::Parameter("random embedding needs d > 0 and extra > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const TERMS: usize = 3;
    let mut waves: Vec<Vec<(f64, Vec<f64>, f64)>> = Vec::with_capacity(extra);
    for _ in 0..extra {
        let terms = (0..TERMS)
            .map(|_| {
                let amp = rng.random_range(-0.6..0.6);
                let q = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
                (amp, q, rng.random_range(0.0..TAU))
            })
            .collect();
        waves.push(terms);
    }
    let waves = Arc::new(waves);
    let big_n = d + extra;
    let arg = |q: &[f64], ph: f64, x: &[f64]| q.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + ph;

    let w0 = Arc::clone(&waves);
    let w1 = Arc::clone(&waves);
    let w2 = waves;
    let e = Embedding::new(format!("random_smooth({seed})"), d, big_n, move |x| {
        let mut out = RVector::zeros(big_n);
        for (i, xi) in x.iter().enumerate() {
            out[i] = *xi;
        }
        for (j, terms) in w0.iter().enumerate() {
            out[d + j] = terms.iter().map(|(a, q, ph)| a * arg(q, *ph, x).sin()).sum();
        }
        out
    })?
    .with_tangents(move |x| {
        let mut out = RMatrix::zeros(big_n, d);
        for i in 0..d {
            out[(i, i)] = 1.0;
        }
        for (j, terms) in w1.iter().enumerate() {
            for (a, q, ph) in terms {
                let c = arg(q, *ph, x).cos();
                for mu in 0..d {
                    out[(d + j, mu)] += a * q[mu] * c;
                }
            }
        }
        out
    })
    .with_hessian(move |x, mu| {
        let mut out = RMatrix::zeros(big_n, d);
        for (j, terms) in w2.iter().enumerate() {
            for (a, q, ph) in terms {
                let s = arg(q, *ph, x).sin();
                for nu in 0..d {
                    out[(d + j, nu)] -= a * q[mu] * q[nu] * s;
                }
            }
        }
        out
    });
    Ok(e)
}

/// Builtin surfaces by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum Surface {
    Plane,
    Sphere { a: f64 },
    Cylinder,
    Torus { big_r: f64, r: f64 },
}

impl Surface {
    pub fn embedding(&self) -> Result<Embedding> {
        match *self {
            Surface::Plane => Ok(plane()),
            Surface::Sphere { a } => sphere(a),
            Surface::Cylinder => Ok(cylinder()),
            Surface::Torus { big_r, r } => torus(big_r, r),
        }
    }
}
