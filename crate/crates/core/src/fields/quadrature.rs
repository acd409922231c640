use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::FieldFn;
use super::forms::TwoForm;
use super::spacetime::Chart;
use crate::error::{Error, Result};

/// Axis-aligned box split into uniform cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        let grid = Grid { lower, upper, cells };
        grid.validate()?;
        Ok(grid)
    }

    /// Same extent and cell count on every axis.
    pub fn cube(dim: usize, lower: f64, upper: f64, cells: usize) -> Self {
        Grid {
            lower: vec![lower; dim],
            upper: vec![upper; dim],
            cells: vec![cells; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 || self.upper.len() != d || self.cells.len() != d {
            return Err(Error::Config("grid axes must have matching, nonzero lengths".into()));
        }
        if self.cells.contains(&0) {
            return Err(Error::Config("grid needs at least one cell per axis".into()));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && u > l))
        {
            return Err(Error::Config("grid extents must be finite with upper > lower".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (self.upper[i] - self.lower[i]) / self.cells[i] as f64)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    /// Centre of cell number `k` in row-major order (last axis fastest).
    pub fn cell_center(&self, mut k: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut x = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let i = k % self.cells[axis];
            k /= self.cells[axis];
            x[axis] = self.lower[axis] + (i as f64 + 0.5) * h[axis];
        }
        x
    }

    pub fn cell_centers(&self) -> Vec<Vec<f64>> {
        (0..self.num_cells()).map(|k| self.cell_center(k)).collect()
    }
}

/// Midpoint rule for a real scalar field.
///
/// Cells are evaluated in parallel and summed in a fixed order, so the
/// result does not depend on the thread count.
pub fn lattice_integral(f: &FieldFn, grid: &Grid) -> Result<f64> {
    grid.validate()?;
    if f.dim() != grid.dim() {
        return Err(Error::Dimension(format!(
            "field has dimension {}, grid {}",
            f.dim(),
            grid.dim()
        )));
    }
    let values: Vec<f64> = (0..grid.num_cells())
        .into_par_iter()
        .map(|k| f.eval_real(&grid.cell_center(k)))
        .collect::<Result<_>>()?;
    Ok(values.iter().sum::<f64>() * grid.cell_volume())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integral of `F_{theta phi}` over the sphere of the given radius.
///
/// Gauss-Legendre of `order` nodes in theta times a `2 * order` point
/// trapezoid rule in phi (spectrally accurate for periodic integrands).
pub fn sphere_flux(f: &TwoForm, radius: f64, order: usize) -> Result<f64> {
    if order < 2 {
        return Err(Error::Parameter(format!("quadrature order {order} < 2")));
    }
    if f.spacetime().chart() != Chart::Spherical3d {
        return Err(Error::Chart("sphere_flux needs a spherical (r, theta, phi) chart".into()));
    }
    let (nodes, weights) = gauss_legendre(order);
    let n_phi = 2 * order;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut total = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let theta = 0.5 * PI * (t + 1.0);
        let mut ring = 0.0;
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            ring += f.eval(1, 2, &[radius, theta, phi])?[(0, 0)].re;
        }
        total += 0.5 * PI * w * ring * dphi;
    }
    Ok(total)
}
