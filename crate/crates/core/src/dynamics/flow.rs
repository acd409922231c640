use rayon::prelude::*;

use crate::blade::RotatingBlade;
use crate::error::{Error, Result};
use crate::numerics::{c, commutator, identity, max_abs_diff, trace, unitary_exp, CMatrix, I};

const MAX_RISES: usize = 10;

/// Blade values on a regular lattice, for the Euclidean sigma-model flow.
///
/// Non-periodic axes have Dirichlet boundaries: sites on their first and last
/// layer never move. Node `i` of an axis sits at `lower + i a`, with
/// `a = (upper - lower) / (points - 1)`, or `/ points` when the axis is periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaLattice {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: Vec<usize>,
    periodic: Vec<bool>,
    sites: Vec<CMatrix>,
}

impl SigmaLattice {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        points: Vec<usize>,
        periodic: Vec<bool>,
        sites: Vec<CMatrix>,
    ) -> Result<Self> {
        validate_axes(&lower, &upper, &points, &periodic)?;
        let total: usize = points.iter().product();
        if sites.len() != total {
            return Err(Error::Dimension(format!("{} sites for a lattice of {total}", sites.len())));
        }
        let shape = sites[0].shape();
        if shape.0 != shape.1 || sites.iter().any(|s| s.shape() != shape) {
            return Err(Error::Dimension("lattice sites must be square matrices of one size".into()));
        }
        Ok(SigmaLattice {
            lower,
            upper,
            points,
            periodic,
            sites,
        })
    }

    /// Samples a blade field at the lattice nodes.
    pub fn from_blade(
        blade: &RotatingBlade,
        lower: Vec<f64>,
        upper: Vec<f64>,
        points: Vec<usize>,
        periodic: Vec<bool>,
    ) -> Result<Self> {
        validate_axes(&lower, &upper, &points, &periodic)?;
        if lower.len() != blade.dim() {
            return Err(Error::Dimension("lattice and blade dimensions differ".into()));
        }
        let mut lat = SigmaLattice {
            lower,
            upper,
            points,
            periodic,
            sites: vec![],
        };
        lat.sites = (0..lat.len()).into_par_iter().map(|k| blade.value(&lat.coords(k))).collect::<Result<_>>()?;
        Ok(lat)
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn sites(&self) -> &[CMatrix] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &CMatrix {
        &self.sites[k]
    }

    pub fn spacing(&self, mu: usize) -> f64 {
        let n = self.points[mu] as f64;
        let span = self.upper[mu] - self.lower[mu];
        if self.periodic[mu] {
            span / n
        } else {
            span / (n - 1.0)
        }
    }

    fn volume(&self) -> f64 {
        (0..self.dim()).map(|mu| self.spacing(mu)).product()
    }

    fn index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for mu in (0..self.dim()).rev() {
            idx[mu] = k % self.points[mu];
            k /= self.points[mu];
        }
        idx
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.points).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn coords(&self, k: usize) -> Vec<f64> {
        self.index(k)
            .iter()
            .enumerate()
            .map(|(mu, &i)| self.lower[mu] + i as f64 * self.spacing(mu))
            .collect()
    }

    fn neighbor(&self, k: usize, mu: usize, forward: bool) -> Option<usize> {
        let mut idx = self.index(k);
        let n = self.points[mu];
        idx[mu] = match (forward, idx[mu]) {
            (true, i) if i + 1 < n => i + 1,
            (true, _) if self.periodic[mu] => 0,
            (false, 0) if self.periodic[mu] => n - 1,
            (false, 0) => return None,
            (false, i) => i - 1,
            _ => return None,
        };
        Some(self.flat(&idx))
    }

    /// Dirichlet sites, which the flow keeps fixed.
    pub fn is_fixed(&self, k: usize) -> bool {
        let idx = self.index(k);
        (0..self.dim()).any(|mu| !self.periodic[mu] && (idx[mu] == 0 || idx[mu] + 1 == self.points[mu]))
    }

    /// Central difference `(R(k + mu) - R(k - mu)) / 2a`, where both neighbours exist.
    fn central(&self, k: usize, mu: usize) -> Option<CMatrix> {
        let (p, m) = (self.neighbor(k, mu, true)?, self.neighbor(k, mu, false)?);
        Some((&self.sites[p] - &self.sites[m]) * c(0.5 / self.spacing(mu), 0.0))
    }

    /// Euclidean lattice action `1/4 sum_k sum_mu Tr(D_mu R)^2 a^d`.
    pub fn action(&self) -> f64 {
        let vol = self.volume();
        let per_site: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                (0..self.dim())
                    .filter_map(|mu| self.central(k, mu))
                    .map(|d| trace(&(&d * &d)).re)
                    .sum::<f64>()
            })
            .collect();
        0.25 * vol * per_site.iter().sum::<f64>()
    }

    /// Hermitian `G_k` with `dS = sum_k Tr(G_k dB_k)` for `dR_k = i [dB_k, R_k]`, every site included.
    pub fn gradient(&self) -> Vec<CMatrix> {
        let vol = self.volume();
        let big_n = self.sites[0].nrows();
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let mut q = CMatrix::zeros(big_n, big_n);
                for mu in 0..self.dim() {
                    let scale = 0.5 / self.spacing(mu);
                    if let Some(d) = self.neighbor(k, mu, false).and_then(|m| self.central(m, mu)) {
                        q += d * c(scale, 0.0);
                    }
                    if let Some(d) = self.neighbor(k, mu, true).and_then(|p| self.central(p, mu)) {
                        q -= d * c(scale, 0.0);
                    }
                }
                let g = commutator(&self.sites[k], &q).expect("square sites") * (0.5 * vol * I);
                (&g + g.adjoint()) * c(0.5, 0.0)
            })
            .collect()
    }

    /// `R_k -> e^{i t B_k} R_k e^{-i t B_k}` at every site.
    pub fn conjugated(&self, generators: &[CMatrix], t: f64) -> Result<SigmaLattice> {
        if generators.len() != self.len() {
            return Err(Error::Dimension("one generator per site".into()));
        }
        let sites = self
            .sites
            .par_iter()
            .zip(generators)
            .map(|(r, b)| {
                let u = unitary_exp(b, t)?;
                Ok(&u * r * u.adjoint())
            })
            .collect::<Result<_>>()?;
        Ok(SigmaLattice {
            sites,
            ..self.clone()
        })
    }

    /// One descent step `R -> e^{-i eta G} R e^{i eta G}` on the free sites.
    pub fn step(&self, eta: f64) -> Result<SigmaLattice> {
        let mut grad = self.gradient();
        for (k, g) in grad.iter_mut().enumerate() {
            if self.is_fixed(k) {
                g.fill(c(0.0, 0.0));
            }
        }
        self.conjugated(&grad, -eta)
    }

    /// Largest `|R^2 - I|` and `|R - R^dag|` over the sites.
    pub fn invariant_defect(&self) -> f64 {
        let big_n = self.sites[0].nrows();
        self.sites
            .iter()
            .map(|r| max_abs_diff(&(r * r), &identity(big_n)).max(max_abs_diff(r, &r.adjoint())))
            .fold(0.0, f64::max)
    }
}

fn validate_axes(lower: &[f64], upper: &[f64], points: &[usize], periodic: &[bool]) -> Result<()> {
    let d = lower.len();
    if upper.len() != d || points.len() != d || periodic.len() != d || d == 0 {
        return Err(Error::Dimension("lattice bounds, points and periodicity must agree".into()));
    }
    for mu in 0..d {
        let need = if periodic[mu] { 3 } else { 2 };
        if points[mu] < need {
            return Err(Error::Parameter(format!("axis {mu} needs at least {need} points")));
        }
        let width = upper[mu] - lower[mu];
        if width.is_nan() || width <= 0.0 {
            return Err(Error::Parameter(format!("axis {mu} has an empty range")));
        }
    }
    Ok(())
}

/// Final lattice and the action after every step (index 0 is the start).
#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub lattice: SigmaLattice,
    pub actions: Vec<f64>,
}

/// Gradient descent of the lattice sigma-model action.
///
/// Fails with [`Error::Divergence`] once the action has stayed above its
/// running minimum for ten consecutive steps. The lattice action is bounded,
/// so an oversized step oscillates rather than growing without limit.
pub fn sigma_flow(start: &SigmaLattice, steps: usize, eta: f64) -> Result<FlowOutcome> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Parameter(format!("step size {eta} must be positive")));
    }
    let mut lattice = start.clone();
    let mut actions = Vec::with_capacity(steps + 1);
    actions.push(lattice.action());
    let mut rises = 0;
    let mut best = actions[0];
    for step in 1..=steps {
        lattice = lattice.step(eta)?;
        let s = lattice.action();
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("action after step {step}")));
        }
        rises = if s > best { rises + 1 } else { 0 };
        best = best.min(s);
        actions.push(s);
        if rises >= MAX_RISES {
            return Err(Error::Divergence { steps: step, eta });
        }
        log::debug!("sigma flow step {step}: action {s:.12e}");
    }
    Ok(FlowOutcome { lattice, actions })
}
