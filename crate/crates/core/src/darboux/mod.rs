//! Frames for abelian potentials from Darboux pairs `A = sum_k pi_k d phi_k`.

mod expr;

pub use expr::{Expr, Func};

use serde::{Deserialize, Serialize};

use crate::blade::{extract_potential, Frame};
use crate::em::{em_column, EmFrameParams};
use crate::error::{Error, Result};
use crate::fields::{form_rank, FieldFn, Spacetime, Tabulated};
use crate::gauge::{scalar, GaugePotential};
use crate::numerics::{c, max_abs_diff, CMatrix};

/// `|pi_k|` above this counts as near the branch point of `arccos`.
pub const NEAR_SINGULAR: f64 = 1.0 - 1e-9;

/// Darboux pairs `(pi_k, phi_k)` on a spacetime.
#[derive(Debug, Clone)]
pub struct DarbouxData {
    spacetime: Spacetime,
    pairs: Vec<(FieldFn, FieldFn)>,
}

impl DarbouxData {
    pub fn new(spacetime: Spacetime, pairs: Vec<(FieldFn, FieldFn)>) -> Result<Self> {
        let d = spacetime.dim();
        for (pi, phi) in &pairs {
            if pi.shape() != (1, 1) || phi.shape() != (1, 1) || pi.dim() != d || phi.dim() != d {
                return Err(Error::Dimension("Darboux functions must be scalars on the spacetime".into()));
            }
        }
        Ok(DarbouxData { spacetime, pairs })
    }

    pub fn spacetime(&self) -> &Spacetime {
        &self.spacetime
    }

    pub fn pairs(&self) -> &[(FieldFn, FieldFn)] {
        &self.pairs
    }

    /// Rank `r` implied by the number of pairs.
    pub fn expected_rank(&self) -> Option<usize> {
        self.pairs.len().checked_sub(1)
    }

    /// Ambient dimension `N = 2(r + 1)` of the frame.
    pub fn big_n(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Checks `|pi_k| <= 1` at the samples and warns when the gradients are dependent.
    pub fn check(&self, samples: &[Vec<f64>]) -> Result<DarbouxCheck> {
        let d = self.spacetime.dim();
        let mut max_abs_pi: f64 = 0.0;
        let mut dependent_points = 0;
        for x in samples {
            for (k, (pi, _)) in self.pairs.iter().enumerate() {
                let v = pi.eval_real(x)?;
                if v.abs() > 1.0 {
                    return Err(out_of_range(k, x, v));
                }
                max_abs_pi = max_abs_pi.max(v.abs());
            }
            let rows = 2 * self.pairs.len();
            if rows == 0 {
                continue;
            }
            let mut grads = nalgebra::DMatrix::<f64>::zeros(rows, d);
            for (k, (pi, phi)) in self.pairs.iter().enumerate() {
                for mu in 0..d {
                    grads[(2 * k, mu)] = pi.partial_real(x, mu)?;
                    grads[(2 * k + 1, mu)] = phi.partial_real(x, mu)?;
                }
            }
            let sv = grads.singular_values();
            let top = sv.max();
            let rank = sv.iter().filter(|s| **s > 1e-8 * top.max(1.0)).count();
            if rank < rows {
                dependent_points += 1;
            }
        }
        if dependent_points > 0 {
            log::warn!("Darboux functions are dependent at {dependent_points} of {} samples", samples.len());
        }
        Ok(DarbouxCheck {
            max_abs_pi,
            dependent_points,
        })
    }
}

/// Outcome of [`DarbouxData::check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxCheck {
    pub max_abs_pi: f64,
    /// Samples where the `2(r + 1)` gradients are linearly dependent.
    pub dependent_points: usize,
}

fn out_of_range(k: usize, x: &[f64], v: f64) -> Error {
    Error::Domain(format!("|pi_{k}| = {:.6} > 1 at {x:?}", v.abs()))
}

/// `A_mu = sum_k pi_k d_mu phi_k`.
pub fn darboux_potential(data: &DarbouxData) -> Result<GaugePotential> {
    let d = data.spacetime.dim();
    let components = (0..d)
        .map(|mu| {
            let (p0, p1) = (data.pairs.clone(), data.pairs.clone());
            let analytic = data
                .pairs
                .iter()
                .all(|(a, b)| a.has_analytic_deriv() && b.has_analytic_deriv() && b.has_analytic_deriv2());
            FieldFn::try_scalar(d, move |x| {
                p0.iter()
                    .map(|(pi, phi)| Ok(pi.eval_real(x)? * phi.partial_real(x, mu)?))
                    .sum()
            })
            .with_deriv_if(analytic, move |x, nu| {
                let mut total = 0.0;
                for (pi, phi) in &p1 {
                    total += pi.partial_real(x, nu)? * phi.partial_real(x, mu)?
                        + pi.eval_real(x)? * phi.partial2(x, mu, nu)?[(0, 0)].re;
                }
                Ok(scalar(total))
            })
        })
        .collect();
    GaugePotential::new(data.spacetime.clone(), components)
}

/// `rho = arccos(pi) / 2` with the chain rule applied, failing where `|pi| > 1`.
fn half_arccos(k: usize, pi: FieldFn) -> FieldFn {
    let d = pi.dim();
    let analytic1 = pi.has_analytic_deriv();
    let analytic2 = analytic1 && pi.has_analytic_deriv2();
    let step = pi.step();
    let (p0, p1, p2) = (pi.clone(), pi.clone(), pi);
    let value = move |p: &FieldFn, x: &[f64]| -> Result<f64> {
        let v = p.eval_real(x)?;
        if v.abs() > 1.0 {
            return Err(out_of_range(k, x, v));
        }
        Ok(v)
    };
    FieldFn::try_scalar(d, move |x| Ok(0.5 * value(&p0, x)?.acos()))
        .with_deriv_if(analytic1, move |x, mu| {
            let v = value(&p1, x)?;
            Ok(scalar(-0.5 * p1.partial_real(x, mu)? / (1.0 - v * v).sqrt()))
        })
        .with_deriv2_if(analytic2, move |x, mu, nu| {
            let v = value(&p2, x)?;
            let s = 1.0 - v * v;
            let (pm, pn) = (p2.partial_real(x, mu)?, p2.partial_real(x, nu)?);
            let pmn = p2.partial2(x, mu, nu)?[(0, 0)].re;
            Ok(scalar(-0.5 * (pmn / s.sqrt() + v * pm * pn / s.powf(1.5))))
        })
        .with_step(step)
}

/// `c * f` keeping analytic derivatives.
fn scaled(f: &FieldFn, k: f64) -> FieldFn {
    f.map_linear((1, 1), move |m| m * c(k, 0.0))
}

/// Frame with `N = 2(r + 1)` solving `V^dag d_mu V = i A_mu` for the Darboux potential.
///
/// Block `k` is `(e^{i a_k} cos rho_k, e^{-i a_k} sin rho_k)` with `a_k = (r + 1) phi_k`
/// and `rho_k = arccos(pi_k) / 2`; the whole column is scaled by `1/sqrt(r + 1)`.
pub fn darboux_frame(data: &DarbouxData) -> Result<Frame> {
    let blocks = data.pairs.len();
    if blocks == 0 {
        return Err(Error::Dimension("no Darboux pairs, nothing to build a frame from".into()));
    }
    let weight = blocks as f64;
    let columns: Vec<FieldFn> = data
        .pairs
        .iter()
        .enumerate()
        .map(|(k, (pi, phi))| {
            let params = EmFrameParams {
                alpha: scaled(phi, weight),
                beta: scaled(phi, -weight),
                rho: half_arccos(k, pi.clone()),
            };
            em_column(&params)
        })
        .collect();
    let d = data.spacetime.dim();
    let norm = c(weight.sqrt().recip(), 0.0);
    let analytic1 = columns.iter().all(FieldFn::has_analytic_deriv);
    let analytic2 = analytic1 && columns.iter().all(FieldFn::has_analytic_deriv2);
    let big_n = 2 * blocks;
    let stack = move |cols: &[FieldFn], f: &dyn Fn(&FieldFn) -> Result<CMatrix>| -> Result<CMatrix> {
        let mut out = CMatrix::zeros(big_n, 1);
        for (k, col) in cols.iter().enumerate() {
            let v = f(col)?;
            out[(2 * k, 0)] = v[(0, 0)] * norm;
            out[(2 * k + 1, 0)] = v[(1, 0)] * norm;
        }
        Ok(out)
    };
    let (c0, c1, c2) = (columns.clone(), columns.clone(), columns);
    let v = FieldFn::new(d, (big_n, 1), move |x| stack(&c0, &|f| f.eval(x)))
        .with_deriv_if(analytic1, move |x, mu| stack(&c1, &|f| f.partial(x, mu)))
        .with_deriv2_if(analytic2, move |x, mu, nu| stack(&c2, &|f| f.partial2(x, mu, nu)));
    Frame::new(data.spacetime.clone(), v)
}

/// Smooth orthonormal complement `W` of [`darboux_frame`], with `N - 1` columns.
///
/// With unit blocks `u_k`, the columns are `(-conj u_k1, conj u_k0)` in block `k`,
/// then `sum_k h_mk u_k` for the Helmert rows `h_m` orthogonal to `(1, .., 1)`.
/// `W` is real-linear in `V`, so its derivatives are those of `V` mapped the same way.
pub fn darboux_complement(data: &DarbouxData) -> Result<Frame> {
    let v = darboux_frame(data)?;
    let blocks = data.pairs.len();
    let big_n = 2 * blocks;
    let s = (blocks as f64).sqrt();
    let helmert: Vec<Vec<f64>> = (1..blocks)
        .map(|m| {
            let norm = ((m * (m + 1)) as f64).sqrt();
            (0..blocks)
                .map(|k| match k.cmp(&m) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(m as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect();
    let map = move |col: &CMatrix| -> CMatrix {
        let mut w = CMatrix::zeros(big_n, big_n - 1);
        for k in 0..blocks {
            w[(2 * k, k)] = -col[(2 * k + 1, 0)].conj() * s;
            w[(2 * k + 1, k)] = col[(2 * k, 0)].conj() * s;
        }
        for (m, row) in helmert.iter().enumerate() {
            for (k, h) in row.iter().enumerate() {
                w[(2 * k, blocks + m)] = col[(2 * k, 0)] * (h * s);
                w[(2 * k + 1, blocks + m)] = col[(2 * k + 1, 0)] * (h * s);
            }
        }
        w
    };
    let field = v.field().clone();
    let (analytic1, analytic2) = (field.has_analytic_deriv(), field.has_analytic_deriv2());
    let (f0, f1, f2) = (field.clone(), field.clone(), field);
    let (m0, m1, m2) = (map.clone(), map.clone(), map);
    let w = FieldFn::new(data.spacetime.dim(), (big_n, big_n - 1), move |x| Ok(m0(&f0.eval(x)?)))
        .with_deriv_if(analytic1, move |x, mu| Ok(m1(&f1.partial(x, mu)?)))
        .with_deriv2_if(analytic2, move |x, mu, nu| Ok(m2(&f2.partial2(x, mu, nu)?)));
    Frame::new(data.spacetime.clone(), w)
}

/// Measured 1-form rank of the Darboux potential, which must equal `pairs - 1`.
pub fn verify_rank(data: &DarbouxData, samples: &[Vec<f64>], tolerance: f64) -> Result<usize> {
    let d = data.spacetime.dim();
    let expected = data
        .expected_rank()
        .ok_or_else(|| Error::Rank("no Darboux pairs, rank undefined".into()))?;
    if 2 * expected >= d {
        return Err(Error::Rank(format!("rank {expected} needs 2r < d = {d}")));
    }
    let measured = form_rank(darboux_potential(data)?.one_form(), samples, tolerance)?.rank;
    if measured != expected {
        return Err(Error::RankMismatch { expected, measured });
    }
    Ok(measured)
}

/// Frame residual summary over sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxReport {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub measured_rank: Option<usize>,
    pub max_residual: f64,
    pub near_singular_points: Vec<Vec<f64>>,
}

/// Residual `|extract_potential(darboux_frame) - darboux_potential|` over the samples.
///
/// Points with some `|pi_k| > 1 - 1e-9` are reported rather than evaluated.
pub fn darboux_report(data: &DarbouxData, samples: &[Vec<f64>], rank_tolerance: f64) -> Result<DarbouxReport> {
    let frame = darboux_frame(data)?;
    let from_frame = extract_potential(&frame)?;
    let direct = darboux_potential(data)?;
    let mut near_singular_points = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut regular = Vec::new();
    for x in samples {
        let mut near = false;
        for (k, (pi, _)) in data.pairs.iter().enumerate() {
            let v = pi.eval_real(x)?;
            if v.abs() > 1.0 {
                return Err(out_of_range(k, x, v));
            }
            near |= v.abs() > NEAR_SINGULAR;
        }
        if near {
            near_singular_points.push(x.clone());
            continue;
        }
        regular.push(x.clone());
        for mu in 0..data.spacetime.dim() {
            max_residual = max_residual.max(max_abs_diff(&from_frame.eval(mu, x)?, &direct.eval(mu, x)?));
        }
    }
    let measured_rank = if regular.is_empty() {
        None
    } else {
        Some(form_rank(direct.one_form(), &regular, rank_tolerance)?.rank)
    };
    Ok(DarbouxReport {
        big_n: data.big_n(),
        measured_rank,
        max_residual,
        near_singular_points,
    })
}

/// A scalar given as an expression or as grid samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Expr(String),
    Grid(ScalarGrid),
}

/// Scalar samples on a regular grid, interpolated multilinearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
    /// Row-major values, last axis fastest.
    pub values: Vec<f64>,
}

impl ScalarSpec {
    pub fn into_field(self, dim: usize) -> Result<FieldFn> {
        match self {
            ScalarSpec::Expr(src) => Expr::parse(&src)?.into_field(dim),
            ScalarSpec::Grid(g) => {
                if g.lower.len() != dim {
                    return Err(Error::Dimension(format!("grid is {}-dimensional, expected {dim}", g.lower.len())));
                }
                Tabulated {
                    lower: g.lower,
                    upper: g.upper,
                    points: g.points,
                    samples: g.values.into_iter().map(|v| vec![vec![[v, 0.0]]]).collect(),
                }
                .into_field()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub pi: ScalarSpec,
    pub phi: ScalarSpec,
}

/// Box on which `|pi_k| <= 1` is asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Scenario file form of [`DarbouxData`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarbouxSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub pairs: Vec<PairSpec>,
    #[serde(default)]
    pub domain: Option<DomainBox>,
}

fn default_dim() -> usize {
    4
}

impl DarbouxSpec {
    pub fn into_data(self) -> Result<DarbouxData> {
        let st = Spacetime::minkowski(self.dim);
        let pairs = self
            .pairs
            .into_iter()
            .map(|p| Ok((p.pi.into_field(self.dim)?, p.phi.into_field(self.dim)?)))
            .collect::<Result<Vec<_>>>()?;
        DarbouxData::new(st, pairs)
    }
}
