//! Differential forms evaluated componentwise in a coordinate basis.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::field::FieldFn;
use super::spacetime::Spacetime;
use crate::error::{Error, Result};
use crate::numerics::{c, CMatrix};

/// A 1-form `A = A_mu dx^mu` with scalar or matrix components.
#[derive(Debug, Clone)]
pub struct OneForm {
    spacetime: Spacetime,
    components: Vec<FieldFn>,
}

impl OneForm {
    pub fn new(spacetime: Spacetime, components: Vec<FieldFn>) -> Result<Self> {
        let d = spacetime.dim();
        if components.len() != d {
            return Err(Error::Dimension(format!(
                "1-form needs {d} components, got {}",
                components.len()
            )));
        }
        if let Some(first) = components.first() {
            let shape = first.shape();
            if components.iter().any(|f| f.shape() != shape || f.dim() != d) {
                return Err(Error::Dimension("1-form components disagree in shape".into()));
            }
        }
        Ok(OneForm {
            spacetime,
            components,
        })
    }

    pub fn spacetime(&self) -> &Spacetime {
        &self.spacetime
    }

    pub fn dim(&self) -> usize {
        self.spacetime.dim()
    }

    pub fn component(&self, mu: usize) -> &FieldFn {
        &self.components[mu]
    }

    pub fn components(&self) -> &[FieldFn] {
        &self.components
    }

    pub fn value_shape(&self) -> (usize, usize) {
        self.components[0].shape()
    }

    /// Scalar components at `x` as a degree-1 point form.
    pub fn at(&self, x: &[f64]) -> Result<PointForm> {
        let mut form = PointForm::zero(self.dim(), 1);
        for (mu, f) in self.components.iter().enumerate() {
            form.set(&[mu], scalar_value(&f.eval(x)?)?);
        }
        Ok(form)
    }
}

fn scalar_value(m: &CMatrix) -> Result<Complex64> {
    if m.shape() != (1, 1) {
        return Err(Error::Dimension(format!(
            "wedge products need scalar components, got {:?}",
            m.shape()
        )));
    }
    Ok(m[(0, 0)])
}

/// Index of the pair `(mu, nu)`, `mu < nu`, in row-major upper-triangle order.
fn pair_index(d: usize, mu: usize, nu: usize) -> usize {
    mu * d - mu * (mu + 1) / 2 + (nu - mu - 1)
}

/// A 2-form stored by its upper triangle; `omega_{nu mu} = -omega_{mu nu}` by construction.
#[derive(Debug, Clone)]
pub struct TwoForm {
    spacetime: Spacetime,
    shape: (usize, usize),
    upper: Vec<FieldFn>,
}

impl TwoForm {
    /// Builds the form from `component(mu, nu)` for every `mu < nu`.
    pub fn from_fn(
        spacetime: Spacetime,
        shape: (usize, usize),
        mut component: impl FnMut(usize, usize) -> FieldFn,
    ) -> Self {
        let d = spacetime.dim();
        let mut upper = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
        for mu in 0..d {
            for nu in (mu + 1)..d {
                upper.push(component(mu, nu));
            }
        }
        TwoForm {
            spacetime,
            shape,
            upper,
        }
    }

    pub fn spacetime(&self) -> &Spacetime {
        &self.spacetime
    }

    pub fn dim(&self) -> usize {
        self.spacetime.dim()
    }

    pub fn value_shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Stored field for `mu < nu`, with the sign to apply for the requested order.
    pub fn field(&self, mu: usize, nu: usize) -> Option<(&FieldFn, f64)> {
        match mu.cmp(&nu) {
            std::cmp::Ordering::Less => Some((&self.upper[pair_index(self.dim(), mu, nu)], 1.0)),
            std::cmp::Ordering::Greater => {
                Some((&self.upper[pair_index(self.dim(), nu, mu)], -1.0))
            }
            std::cmp::Ordering::Equal => None,
        }
    }

    /// `omega_{mu nu}(x)`.
    pub fn eval(&self, mu: usize, nu: usize, x: &[f64]) -> Result<CMatrix> {
        let d = self.dim();
        if mu >= d || nu >= d {
            return Err(Error::Dimension(format!("index ({mu}, {nu}) out of range for d = {d}")));
        }
        match self.field(mu, nu) {
            Some((f, s)) => Ok(f.eval(x)? * c(s, 0.0)),
            None => Ok(CMatrix::zeros(self.shape.0, self.shape.1)),
        }
    }

    /// `d_rho omega_{mu nu}(x)`.
    pub fn partial(&self, mu: usize, nu: usize, x: &[f64], rho: usize) -> Result<CMatrix> {
        match self.field(mu, nu) {
            Some((f, s)) => Ok(f.partial(x, rho)? * c(s, 0.0)),
            None => Ok(CMatrix::zeros(self.shape.0, self.shape.1)),
        }
    }

    pub fn at(&self, x: &[f64]) -> Result<PointForm> {
        let d = self.dim();
        let mut form = PointForm::zero(d, 2);
        for mu in 0..d {
            for nu in (mu + 1)..d {
                form.set(&[mu, nu], scalar_value(&self.eval(mu, nu, x)?)?);
            }
        }
        Ok(form)
    }
}

/// `(dA)_{mu nu} = d_mu A_nu - d_nu A_mu`.
pub fn exterior_d(a: &OneForm) -> TwoForm {
    let analytic = a.components.iter().all(FieldFn::has_analytic_deriv2);
    let d = a.dim();
    let shape = a.value_shape();
    let step = a.components[0].step();
    TwoForm::from_fn(a.spacetime.clone(), shape, |mu, nu| {
        let (am, an) = (a.components[mu].clone(), a.components[nu].clone());
        let (bm, bn) = (am.clone(), an.clone());
        FieldFn::new(d, shape, move |x| Ok(an.partial(x, mu)? - am.partial(x, nu)?))
            .with_deriv_if(analytic, move |x, rho| {
                Ok(bn.partial2(x, mu, rho)? - bm.partial2(x, nu, rho)?)
            })
            .with_step(step)
    })
}

/// A differential form of fixed degree evaluated at one point.
///
/// Components are stored for strictly increasing index tuples; any other
/// ordering is recovered with the sign of the sorting permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointForm {
    dim: usize,
    degree: usize,
    components: BTreeMap<Vec<usize>, Complex64>,
}

/// Sorts `idx` and returns the permutation sign, or `None` on a repeated index.
fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len().saturating_sub(1 + i) {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// All permutations of `0..n` with their signs.
fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut out = Vec::new();
    for (perm, sign) in signed_permutations(n - 1) {
        // inserting n-1 at position k from the right adds k transpositions
        for k in 0..n {
            let mut p = perm.clone();
            p.insert(n - 1 - k, n - 1);
            out.push((p, if k % 2 == 0 { sign } else { -sign }));
        }
    }
    out
}

fn increasing_tuples(d: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, p, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl PointForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        PointForm {
            dim,
            degree,
            components: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sets the component for any index ordering (antisymmetry is applied).
    pub fn set(&mut self, idx: &[usize], value: Complex64) {
        assert_eq!(idx.len(), self.degree, "index length must equal the degree");
        if let Some((sorted, sign)) = sort_with_sign(idx) {
            self.components.insert(sorted, value * sign);
        }
    }

    /// Component for any index ordering; zero on repeated indices.
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        match sort_with_sign(idx) {
            Some((sorted, sign)) => self
                .components
                .get(&sorted)
                .map_or(c(0.0, 0.0), |v| v * sign),
            None => c(0.0, 0.0),
        }
    }

    /// Wedge product by full antisymmetrization:
    /// `(a ^ b)_I = 1/(p! q!) sum_sigma sgn(sigma) a_{sigma(I)[..p]} b_{sigma(I)[p..]}`.
    pub fn wedge(&self, other: &PointForm) -> Result<PointForm> {
        if self.dim != other.dim {
            return Err(Error::Dimension("wedge of forms on different dimensions".into()));
        }
        let (p, q) = (self.degree, other.degree);
        let mut out = PointForm::zero(self.dim, p + q);
        if p + q > self.dim {
            return Ok(out);
        }
        let perms = signed_permutations(p + q);
        let norm = 1.0 / (factorial(p) * factorial(q));
        for tuple in increasing_tuples(self.dim, p + q) {
            let mut acc = c(0.0, 0.0);
            for (perm, sign) in &perms {
                let permuted: Vec<usize> = perm.iter().map(|&i| tuple[i]).collect();
                acc += self.get(&permuted[..p]) * other.get(&permuted[p..]) * *sign;
            }
            out.components.insert(tuple, acc * norm);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.values().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `A ^ (dA)^r` at a point.
pub fn wedge_power(a: &PointForm, da: &PointForm, r: usize) -> Result<PointForm> {
    let mut acc = a.clone();
    for _ in 0..r {
        acc = acc.wedge(da)?;
    }
    Ok(acc)
}

/// True when `A ^ (dA)^r` exceeds `tol` in any component at any sample point.
pub fn wedge_power_nonzero(
    a: &OneForm,
    da: &TwoForm,
    r: usize,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<bool> {
    let d = a.dim();
    if 2 * r + 1 > d {
        return Err(Error::Rank(format!("A ^ (dA)^{r} is a {}-form on d = {d}", 2 * r + 1)));
    }
    for x in samples {
        if wedge_power(&a.at(x)?, &da.at(x)?, r)?.max_abs() > tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Result of [`form_rank`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormRank {
    /// Maximum over samples.
    pub rank: usize,
    pub per_sample: Vec<usize>,
    /// False when samples disagree, e.g. a sample sits on a degenerate locus.
    pub constant: bool,
}

impl FormRank {
    /// Converts a non-constant rank into [`Error::RankNotConstant`].
    pub fn require_constant(&self) -> Result<usize> {
        let min = self.per_sample.iter().copied().min().unwrap_or(self.rank);
        if self.constant {
            Ok(self.rank)
        } else {
            Err(Error::RankNotConstant { min, max: self.rank })
        }
    }
}

/// Rank of a scalar 1-form: the largest `r` with `A ^ (dA)^r != 0`.
///
/// Samples must avoid measure-zero loci where the rank drops (for instance
/// the zeros of `A`); that is the caller's responsibility.
pub fn form_rank(a: &OneForm, samples: &[Vec<f64>], tol: f64) -> Result<FormRank> {
    let da = exterior_d(a);
    let d = a.dim();
    let max_r = (d - 1) / 2;
    let mut per_sample = Vec::with_capacity(samples.len());
    for x in samples {
        let (ax, dax) = (a.at(x)?, da.at(x)?);
        let mut rank = 0;
        let mut power = ax.clone();
        for r in 1..=max_r {
            power = power.wedge(&dax)?;
            if power.max_abs() > tol {
                rank = r;
            } else {
                break;
            }
        }
        per_sample.push(rank);
    }
    let rank = per_sample.iter().copied().max().unwrap_or(0);
    let constant = per_sample.iter().all(|&r| r == rank);
    Ok(FormRank {
        rank,
        per_sample,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_form(st: Spacetime, comps: Vec<FieldFn>) -> OneForm {
        OneForm::new(st, comps).unwrap()
    }

    fn samples() -> Vec<Vec<f64>> {
        vec![
            vec![0.3, -0.7, 0.9, 0.2],
            vec![-0.5, 0.4, 0.1, -0.8],
            vec![0.6, 0.6, -0.4, 0.35],
        ]
    }

    /// Shuffle formula: sum over splits of I into J (first p) and K with the shuffle sign.
    fn shuffle_wedge(a: &PointForm, b: &PointForm) -> PointForm {
        let (p, q) = (a.degree(), b.degree());
        let mut out = PointForm::zero(a.dim(), p + q);
        for tuple in increasing_tuples(a.dim(), p + q) {
            let mut acc = c(0.0, 0.0);
            for j in increasing_tuples(p + q, p) {
                let k: Vec<usize> = (0..p + q).filter(|i| !j.contains(i)).collect();
                let order: Vec<usize> = j.iter().chain(k.iter()).copied().collect();
                let (_, sign) = sort_with_sign(&order).unwrap();
                let jj: Vec<usize> = j.iter().map(|&i| tuple[i]).collect();
                let kk: Vec<usize> = k.iter().map(|&i| tuple[i]).collect();
                acc += a.get(&jj) * b.get(&kk) * sign;
            }
            out.set(&tuple, acc);
        }
        out
    }

    #[test]
    fn permutation_signs() {
        let perms = signed_permutations(3);
        assert_eq!(perms.len(), 6);
        for (p, s) in perms {
            assert_eq!(sort_with_sign(&p).unwrap().1, s);
        }
    }

    #[test]
    fn wedge_matches_shuffle_formula() {
        let mut a = PointForm::zero(4, 1);
        let mut b = PointForm::zero(4, 2);
        for (i, v) in [0.3, -1.0, 2.0, 0.5].iter().enumerate() {
            a.set(&[i], c(*v, 0.1 * i as f64));
        }
        let mut k = 1.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                b.set(&[i, j], c(k, -0.5 * k));
                k += 0.7;
            }
        }
        let w = a.wedge(&b).unwrap();
        let oracle = shuffle_wedge(&a, &b);
        for t in increasing_tuples(4, 3) {
            assert!((w.get(&t) - oracle.get(&t)).norm() < 1e-14);
        }
        let ww = b.wedge(&b).unwrap();
        let oracle2 = shuffle_wedge(&b, &b);
        assert!((ww.get(&[0, 1, 2, 3]) - oracle2.get(&[0, 1, 2, 3])).norm() < 1e-14);
    }

    #[test]
    fn exact_form_is_closed() {
        let st = Spacetime::minkowski(4);
        let f = FieldFn::scalar(4, |x| (x[0] * x[1]).sin() + x[2] * x[3] * x[3]);
        let a = scalar_form(st, (0..4).map(|mu| f.partial_field(mu)).collect());
        let da = exterior_d(&a);
        for x in samples() {
            for mu in 0..4 {
                for nu in 0..4 {
                    assert!(da.eval(mu, nu, &x).unwrap()[(0, 0)].norm() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn exterior_d_of_x0_dx1() {
        let st = Spacetime::minkowski(4);
        let mut comps = vec![FieldFn::scalar(4, |_| 0.0); 4];
        comps[1] = FieldFn::scalar(4, |x| x[0]);
        let da = exterior_d(&scalar_form(st, comps));
        let x = [0.2, 0.1, 0.0, -0.3];
        assert!((da.eval(0, 1, &x).unwrap()[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!((da.eval(1, 0, &x).unwrap()[(0, 0)].re + 1.0).abs() < 1e-10);
        assert!(da.eval(2, 3, &x).unwrap()[(0, 0)].norm() < 1e-10);
    }

    #[test]
    fn two_pair_darboux_form_has_rank_one() {
        let st = Spacetime::minkowski(4);
        let comps = vec![
            FieldFn::scalar(4, |_| 0.0),
            FieldFn::scalar(4, |x| x[0]),
            FieldFn::scalar(4, |_| 0.0),
            FieldFn::scalar(4, |x| x[2]),
        ];
        let a = scalar_form(st, comps);
        let da = exterior_d(&a);
        assert!(wedge_power_nonzero(&a, &da, 1, &samples(), 1e-6).unwrap());
        let rank = form_rank(&a, &samples(), 1e-6).unwrap();
        assert_eq!(rank.rank, 1);
        assert!(rank.constant);
        assert!(matches!(
            wedge_power_nonzero(&a, &da, 2, &samples(), 1e-6),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn exact_and_zero_forms_have_rank_zero() {
        let st = Spacetime::minkowski(4);
        let f = FieldFn::scalar(4, |x| x[0] * x[1] + x[3].sin());
        let exact = scalar_form(st.clone(), (0..4).map(|mu| f.partial_field(mu)).collect());
        assert_eq!(form_rank(&exact, &samples(), 1e-6).unwrap().rank, 0);
        let zero = scalar_form(st, vec![FieldFn::scalar(4, |_| 0.0); 4]);
        assert_eq!(form_rank(&zero, &samples(), 1e-6).unwrap().rank, 0);
    }

    #[test]
    fn rank_not_constant_is_reported() {
        let st = Spacetime::minkowski(4);
        let comps = vec![
            FieldFn::scalar(4, |_| 0.0),
            FieldFn::scalar(4, |x| x[0]),
            FieldFn::scalar(4, |_| 0.0),
            FieldFn::scalar(4, |x| x[2]),
        ];
        let a = scalar_form(st, comps);
        // A ^ dA = x0 dx1^dx2^dx3 + x2 dx0^dx1^dx3 vanishes at the origin
        let pts = vec![vec![0.0; 4], vec![0.5, 0.1, 0.5, 0.1]];
        let rank = form_rank(&a, &pts, 1e-6).unwrap();
        assert_eq!(rank.rank, 1);
        assert!(!rank.constant);
        assert!(matches!(rank.require_constant(), Err(Error::RankNotConstant { .. })));
    }
}
