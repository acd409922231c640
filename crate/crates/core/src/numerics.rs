//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. The helpers here add the
//! handful of operations the gauge code needs (commutators, Hermitian
//! functional calculus, seeded random generators) with explicit shape checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

fn same_shape(a: &CMatrix, b: &CMatrix, op: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "{op}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::Dimension(format!(
            "matmul: {:?} x {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a * b)
}

pub fn add(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    same_shape(a, b, "add")?;
    Ok(a + b)
}

pub fn scale(a: &CMatrix, s: Complex64) -> CMatrix {
    a * s
}

/// `MN - NM`.
pub fn commutator(m: &CMatrix, n: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() || m.shape() != n.shape() {
        return Err(Error::Dimension(format!(
            "commutator: {:?} vs {:?}",
            m.shape(),
            n.shape()
        )));
    }
    Ok(m * n - n * m)
}

pub fn anticommutator(m: &CMatrix, n: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() || m.shape() != n.shape() {
        return Err(Error::Dimension(format!(
            "anticommutator: {:?} vs {:?}",
            m.shape(),
            n.shape()
        )));
    }
    Ok(m * n + n * m)
}

/// `(M + M^dag) / 2`.
pub fn hermitian_part(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("hermitian_part: {:?}", m.shape())));
    }
    Ok((m + m.adjoint()) * c(0.5, 0.0))
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-abs distance between two matrices, or infinity on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `max |M^dag M - I|`.
pub fn isometry_defect(m: &CMatrix) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &identity(m.ncols()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: CMatrix, origin: &str) -> Result<CMatrix> {
    if is_finite(&m) {
        Ok(m)
    } else {
        Err(Error::NonFinite(origin.to_string()))
    }
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Applies a scalar function to a Hermitian matrix through its eigendecomposition.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("hermitian_function: {:?}", h.shape())));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(h.clone());
    }
    let eig = hermitian_part(h)?.symmetric_eigen();
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let fj = f(*lam);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    Ok(scaled * q.adjoint())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = hermitian_part(h)?.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// `exp(i t H)` for Hermitian `H`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("unitary_exp: {:?}", h.shape())));
    }
    let defect = hermiticity_defect(h);
    if defect > 1e-10 {
        return Err(Error::Domain(format!(
            "unitary_exp: argument not Hermitian (defect {defect:.3e})"
        )));
    }
    hermitian_function(h, |lam| Complex64::from_polar(1.0, t * lam))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hermitian matrix with entries uniform in the unit box, deterministic in `seed`.
pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    random_hermitian_with(&mut rng(seed), n)
}

pub fn random_hermitian_with<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let mut m = zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Random unitary `exp(i pi H)` with `H` from [`random_hermitian`].
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let h = random_hermitian(n, seed);
    unitary_exp(&h, std::f64::consts::PI).expect("random Hermitian is Hermitian")
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `diag(A, B)`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

/// `(A | B)` side by side.
pub fn hstack(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "hstack: {:?} | {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut m = zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    Ok(m)
}

/// Reference frame `(I_n, 0)^T` of size `big_n x n`.
pub fn reference_frame(big_n: usize, n: usize) -> CMatrix {
    CMatrix::identity(big_n, n)
}

/// `diag(I_n, -I_{N-n})`.
pub fn reference_blade(big_n: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(big_n, big_n, |i, j| {
        if i != j {
            c(0.0, 0.0)
        } else if i < n {
            c(1.0, 0.0)
        } else {
            c(-1.0, 0.0)
        }
    })
}
