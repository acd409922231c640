//! Intrinsic curvature of a 2D metric from Christoffel symbols.
//!
//! Five-point stencils throughout; nothing here knows about embeddings.

use nalgebra::DMatrix;

const H: f64 = 1e-3;

fn stencil<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], mu: usize) -> f64 {
    let at = |t: f64| {
        let mut y = x.to_vec();
        y[mu] += t;
        f(&y)
    };
    (-at(2.0 * H) + 8.0 * at(H) - 8.0 * at(-H) + at(-2.0 * H)) / (12.0 * H)
}

/// `Gamma^rho_{mu nu}`.
pub fn gamma<G: Fn(&[f64]) -> DMatrix<f64>>(g: &G, x: &[f64], rho: usize, mu: usize, nu: usize) -> f64 {
    let ginv = g(x).try_inverse().expect("metric is invertible");
    let dg = |a: usize, b: usize, l: usize| stencil(|y| g(y)[(a, b)], x, l);
    (0..2)
        .map(|l| 0.5 * ginv[(rho, l)] * (dg(l, nu, mu) + dg(l, mu, nu) - dg(mu, nu, l)))
        .sum()
}

/// `R_{rho sigma mu nu}`, lowered from
/// `R^rho_{sigma mu nu} = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma} + G^rho_{mu l} G^l_{nu sigma} - G^rho_{nu l} G^l_{mu sigma}`.
pub fn riemann<G: Fn(&[f64]) -> DMatrix<f64>>(g: &G, x: &[f64], rho: usize, sigma: usize, mu: usize, nu: usize) -> f64 {
    let upper = |r: usize| -> f64 {
        let mut v = stencil(|y| gamma(g, y, r, nu, sigma), x, mu) - stencil(|y| gamma(g, y, r, mu, sigma), x, nu);
        for l in 0..2 {
            v += gamma(g, x, r, mu, l) * gamma(g, x, l, nu, sigma) - gamma(g, x, r, nu, l) * gamma(g, x, l, mu, sigma);
        }
        v
    };
    let gx = g(x);
    (0..2).map(|l| gx[(rho, l)] * upper(l)).sum()
}

/// `K = R_{0101} / det g`.
pub fn gauss<G: Fn(&[f64]) -> DMatrix<f64>>(g: &G, x: &[f64]) -> f64 {
    riemann(g, x, 0, 1, 0, 1) / g(x).determinant()
}
