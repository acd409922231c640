use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate chart of a flat spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Cartesian,
    /// `(r, theta, phi)`; used only for the monopole and its sphere integrals.
    Spherical3d,
}

/// Flat spacetime with a diagonal metric of signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spacetime {
    signature: Vec<f64>,
    chart: Chart,
}

impl Spacetime {
    pub fn new(signature: Vec<f64>, chart: Chart) -> Result<Self> {
        if signature.is_empty() {
            return Err(Error::Parameter("spacetime dimension must be positive".into()));
        }
        if let Some(s) = signature.iter().find(|s| **s != 1.0 && **s != -1.0) {
            return Err(Error::Parameter(format!("signature entry {s} is not +1 or -1")));
        }
        if chart == Chart::Spherical3d && signature.len() != 3 {
            return Err(Error::Parameter("spherical chart requires d = 3".into()));
        }
        Ok(Spacetime { signature, chart })
    }

    /// `(+1, -1, ..., -1)`.
    pub fn minkowski(d: usize) -> Self {
        let mut signature = vec![-1.0; d.max(1)];
        signature[0] = 1.0;
        Spacetime {
            signature,
            chart: Chart::Cartesian,
        }
    }

    pub fn euclidean(d: usize) -> Self {
        Spacetime {
            signature: vec![1.0; d.max(1)],
            chart: Chart::Cartesian,
        }
    }

    /// Spatial slice `(r, theta, phi)` of Minkowski space; all three signs are `-1`.
    pub fn spherical() -> Self {
        Spacetime {
            signature: vec![-1.0; 3],
            chart: Chart::Spherical3d,
        }
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn signature(&self) -> &[f64] {
        &self.signature
    }

    /// Metric sign `eta^{mu mu}`.
    pub fn sign(&self, mu: usize) -> f64 {
        self.signature[mu]
    }

    /// Raises (or lowers) an index; the diagonal metric makes this a sign flip.
    pub fn raise(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.signature).map(|(a, s)| a * s).collect()
    }

    /// `a_mu b^mu`.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.signature)
            .map(|((x, y), s)| x * y * s)
            .sum()
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, spacetime has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

impl Default for Spacetime {
    fn default() -> Self {
        Spacetime::minkowski(4)
    }
}
