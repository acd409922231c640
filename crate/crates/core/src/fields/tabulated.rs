use serde::{Deserialize, Serialize};

use super::field::FieldFn;
use crate::error::{Error, Result};
use crate::numerics::{c, CMatrix};

/// Complex matrix in JSON: rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_json(m: &MatrixJson) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Config("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Samples of a matrix field on a regular lattice of nodes (row-major, last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tabulated {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
    pub samples: Vec<MatrixJson>,
}

impl Tabulated {
    /// Multilinear interpolant. Queries outside the box are a domain error.
    pub fn into_field(self) -> Result<FieldFn> {
        let d = self.points.len();
        if d == 0 || self.lower.len() != d || self.upper.len() != d {
            return Err(Error::Config("tabulated axes must have matching lengths".into()));
        }
        if self.points.iter().any(|&p| p < 2) {
            return Err(Error::Config("tabulated fields need at least two nodes per axis".into()));
        }
        let total: usize = self.points.iter().product();
        if self.samples.len() != total {
            return Err(Error::Config(format!(
                "expected {total} samples, found {}",
                self.samples.len()
            )));
        }
        let values: Vec<CMatrix> = self.samples.iter().map(matrix_from_json).collect::<Result<_>>()?;
        let shape = values[0].shape();
        if values.iter().any(|v| v.shape() != shape) {
            return Err(Error::Config("tabulated samples differ in shape".into()));
        }
        let Tabulated {
            lower,
            upper,
            points,
            ..
        } = self;
        Ok(FieldFn::new(d, shape, move |x| {
            let mut base = vec![0usize; d];
            let mut frac = vec![0.0; d];
            for a in 0..d {
                let h = (upper[a] - lower[a]) / (points[a] - 1) as f64;
                let t = (x[a] - lower[a]) / h;
                if !(-1e-12..=(points[a] - 1) as f64 + 1e-12).contains(&t) {
                    return Err(Error::Domain(format!(
                        "coordinate {a} = {} outside tabulated range [{}, {}]",
                        x[a], lower[a], upper[a]
                    )));
                }
                let i = (t.floor().max(0.0) as usize).min(points[a] - 2);
                base[a] = i;
                frac[a] = t - i as f64;
            }
            let mut acc = CMatrix::zeros(shape.0, shape.1);
            for corner in 0..(1usize << d) {
                let mut weight = 1.0;
                let mut index = 0;
                for a in 0..d {
                    let bit = (corner >> a) & 1;
                    weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                    index = index * points[a] + base[a] + bit;
                }
                if weight != 0.0 {
                    acc += &values[index] * c(weight, 0.0);
                }
            }
            Ok(acc)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_linear_data() {
        let mut samples = Vec::new();
        for i in 0..3 {
            for j in 0..4 {
                let (x, y) = (i as f64 * 0.5, j as f64 / 3.0);
                samples.push(vec![vec![[2.0 * x - y, x + y]]]);
            }
        }
        let tab = Tabulated {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            points: vec![3, 4],
            samples,
        };
        let f = tab.into_field().unwrap();
        let v = f.eval(&[0.3, 0.7]).unwrap()[(0, 0)];
        assert!((v.re - (0.6 - 0.7)).abs() < 1e-12);
        assert!((v.im - 1.0).abs() < 1e-12);
        assert!(matches!(f.eval(&[1.5, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_count_is_checked() {
        let tab = Tabulated {
            lower: vec![0.0],
            upper: vec![1.0],
            points: vec![3],
            samples: vec![vec![vec![[0.0, 0.0]]]; 2],
        };
        assert!(tab.into_field().is_err());
    }
}
