//! Seeded smooth unitary, frame and potential fields with exact first and
//! second derivatives, used as generic test inputs.
//!
//! A smooth unitary is an ordered product of one-parameter subgroups,
//! `U(x) = prod_j exp(i theta_j(x) H_j) . U_0`, whose derivatives follow from
//! the product rule because each factor commutes with its own generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::FieldFn;
use crate::numerics::{c, hermitian_function, random_hermitian_with, CMatrix, I};

/// Scalar phase of one factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    /// `theta = x^mu`.
    Coordinate(usize),
    /// `theta = amplitude * sin(k . x + offset)` (plain sum, no metric).
    SinDot {
        k: Vec<f64>,
        offset: f64,
        amplitude: f64,
    },
}

impl Phase {
    fn arg(k: &[f64], offset: f64, x: &[f64]) -> f64 {
        k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + offset
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Phase::Coordinate(mu) => x[*mu],
            Phase::SinDot { k, offset, amplitude } => amplitude * Self::arg(k, *offset, x).sin(),
        }
    }

    pub fn grad(&self, x: &[f64], mu: usize) -> f64 {
        match self {
            Phase::Coordinate(a) => f64::from(u8::from(*a == mu)),
            Phase::SinDot { k, offset, amplitude } => {
                amplitude * k[mu] * Self::arg(k, *offset, x).cos()
            }
        }
    }

    pub fn hess(&self, x: &[f64], mu: usize, nu: usize) -> f64 {
        match self {
            Phase::Coordinate(_) => 0.0,
            Phase::SinDot { k, offset, amplitude } => {
                -amplitude * k[mu] * k[nu] * Self::arg(k, *offset, x).sin()
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Factor {
    generator: CMatrix,
    generator_sq: CMatrix,
    phase: Phase,
}

impl Factor {
    fn exp(&self, x: &[f64]) -> CMatrix {
        let t = self.phase.value(x);
        hermitian_function(&self.generator, |lam| num_complex::Complex64::from_polar(1.0, t * lam))
            .expect("generators are square")
    }
}

/// `prod_j exp(i theta_j(x) H_j) . right`.
#[derive(Debug, Clone)]
pub struct ExpProduct {
    factors: Vec<Factor>,
    right: CMatrix,
}

impl ExpProduct {
    pub fn new(terms: Vec<(CMatrix, Phase)>, right: CMatrix) -> Self {
        let factors = terms
            .into_iter()
            .map(|(generator, phase)| Factor {
                generator_sq: &generator * &generator,
                generator,
                phase,
            })
            .collect();
        ExpProduct { factors, right }
    }

    fn chain(&self, mats: &[CMatrix]) -> CMatrix {
        let mut acc = mats[0].clone();
        for m in &mats[1..] {
            acc *= m;
        }
        acc * &self.right
    }

    pub fn value(&self, x: &[f64]) -> CMatrix {
        if self.factors.is_empty() {
            return self.right.clone();
        }
        let e: Vec<CMatrix> = self.factors.iter().map(|f| f.exp(x)).collect();
        self.chain(&e)
    }

    fn first(&self, f: &Factor, e: &CMatrix, x: &[f64], mu: usize) -> CMatrix {
        &f.generator * e * (I * f.phase.grad(x, mu))
    }

    pub fn partial(&self, x: &[f64], mu: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.right.nrows(), self.right.ncols());
        if self.factors.is_empty() {
            return out;
        }
        let e: Vec<CMatrix> = self.factors.iter().map(|f| f.exp(x)).collect();
        for (j, f) in self.factors.iter().enumerate() {
            let mut mats = e.clone();
            mats[j] = self.first(f, &e[j], x, mu);
            out += self.chain(&mats);
        }
        out
    }

    pub fn partial2(&self, x: &[f64], mu: usize, nu: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.right.nrows(), self.right.ncols());
        if self.factors.is_empty() {
            return out;
        }
        let e: Vec<CMatrix> = self.factors.iter().map(|f| f.exp(x)).collect();
        for (j, f) in self.factors.iter().enumerate() {
            for (k, g) in self.factors.iter().enumerate() {
                let mut mats = e.clone();
                if j == k {
                    let p = &f.phase;
                    mats[j] = (&f.generator * (I * p.hess(x, mu, nu))
                        - &f.generator_sq * c(p.grad(x, mu) * p.grad(x, nu), 0.0))
                        * &e[j];
                } else {
                    mats[j] = self.first(f, &e[j], x, mu);
                    mats[k] = self.first(g, &e[k], x, nu);
                }
                out += self.chain(&mats);
            }
        }
        out
    }

    pub fn into_field(self, dim: usize) -> FieldFn {
        let shape = self.right.shape();
        let (a, b, c2) = (self.clone(), self.clone(), self);
        FieldFn::new(dim, shape, move |x| Ok(a.value(x)))
            .with_deriv(move |x, mu| Ok(b.partial(x, mu)))
            .with_deriv2(move |x, mu, nu| Ok(c2.partial2(x, mu, nu)))
    }
}

/// Generator norm scale of the seeded smooth fields; keeps FD errors small.
pub const DEFAULT_SCALE: f64 = 0.5;

fn random_unitary_product(size: usize, dim: usize, rng: &mut ChaCha8Rng, scale: f64) -> Vec<(CMatrix, Phase)> {
    let mut terms: Vec<(CMatrix, Phase)> = (0..dim)
        .map(|mu| (random_hermitian_with(rng, size) * c(scale, 0.0), Phase::Coordinate(mu)))
        .collect();
    let k: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let offset = rng.random_range(0.0..std::f64::consts::TAU);
    terms.push((
        random_hermitian_with(rng, size) * c(scale, 0.0),
        Phase::SinDot {
            k,
            offset,
            amplitude: 1.0,
        },
    ));
    terms
}

fn random_base(size: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let h = random_hermitian_with(rng, size);
    hermitian_function(&h, |lam| num_complex::Complex64::from_polar(1.0, std::f64::consts::PI * lam))
        .expect("square")
}

/// Smooth `U(size)`-valued field on `dim` coordinates.
pub fn random_smooth_unitary(size: usize, dim: usize, seed: u64) -> ExpProduct {
    random_smooth_unitary_scaled(size, dim, seed, DEFAULT_SCALE)
}

pub fn random_smooth_unitary_scaled(size: usize, dim: usize, seed: u64, scale: f64) -> ExpProduct {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = random_unitary_product(size, dim, &mut rng, scale);
    let base = random_base(size, &mut rng);
    ExpProduct::new(terms, base)
}

/// Smooth frame `V = U(x) V_0` and its complement `W = U(x) W_0`, both with exact derivatives.
pub fn random_smooth_frame_pair(big_n: usize, n: usize, dim: usize, seed: u64) -> (ExpProduct, ExpProduct) {
    let u = random_smooth_unitary(big_n, dim, seed);
    let v0 = &u.right * CMatrix::identity(big_n, n);
    let w0 = u.right.columns(n, big_n - n).into_owned();
    (
        ExpProduct::new(
            u.factors.iter().map(|f| (f.generator.clone(), f.phase.clone())).collect(),
            v0,
        ),
        ExpProduct::new(
            u.factors.into_iter().map(|f| (f.generator, f.phase)).collect(),
            w0,
        ),
    )
}

/// Smooth Hermitian field `H_0 + sin(k . x + offset) H_1` with exact derivatives.
pub fn random_smooth_hermitian(n: usize, dim: usize, seed: u64) -> FieldFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = random_hermitian_with(&mut rng, n);
    let h1 = random_hermitian_with(&mut rng, n);
    let k: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let offset = rng.random_range(0.0..std::f64::consts::TAU);
    let phase = Phase::SinDot {
        k,
        offset,
        amplitude: 1.0,
    };
    let (p1, p2) = (phase.clone(), phase.clone());
    let (h1a, h1b) = (h1.clone(), h1.clone());
    FieldFn::new(dim, (n, n), move |x| Ok(&h0 + &h1 * c(phase.value(x), 0.0)))
        .with_deriv(move |x, mu| Ok(&h1a * c(p1.grad(x, mu), 0.0)))
        .with_deriv2(move |x, mu, nu| Ok(&h1b * c(p2.hess(x, mu, nu), 0.0)))
}
