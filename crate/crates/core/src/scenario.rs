//! Named and file-backed field configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blade::{blade_from_frame, extract_potential, Frame, RotatingBlade};
use crate::darboux::{darboux_frame, darboux_potential, DarbouxSpec};
use crate::dynamics::{
    maxwell_mod_residual, modified_eom_residual, shape_gauge_ym_residual, sigma_eom_residual, ym_residual, Equation,
    ResidualEntry, ResidualReport,
};
use crate::em::{em_frame, monopole_angular_blade, monopole_params, monopole_potential, plane_wave_params, EmFrameParams, Patch};
use crate::error::{Error, Result};
use crate::fields::{matrix_to_json, MatrixJson, Spacetime, Tabulated};
use crate::gauge::{constant_f_potential, plane_wave_potential, pure_gauge, GaugeMap, GaugePotential};
use crate::numerics::{max_abs, CMatrix};
use crate::smooth::{random_smooth_frame_pair, random_smooth_unitary};

fn default_dim() -> usize {
    4
}

fn default_big_n() -> usize {
    4
}

fn default_n() -> usize {
    2
}

fn default_patch() -> Patch {
    Patch::Plus
}

/// Scenario file contents, tagged by `"scenario"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// `A_mu = n_mu sin(k.x)` on Minkowski space.
    PlaneWave { k: Vec<f64>, n: Vec<f64> },
    /// Monopole frame on one patch of the `(r, theta, phi)` chart.
    Monopole {
        g: f64,
        #[serde(default = "default_patch")]
        patch: Patch,
    },
    MonopolePlus { g: f64 },
    MonopoleMinus { g: f64 },
    /// Glued monopole blade on the Euclidean `(theta, phi)` plane.
    MonopoleAngular { g: f64 },
    /// `A = -i u d u^dag` for a seeded smooth `U(n)` map.
    PureGauge {
        #[serde(default = "default_n")]
        n: usize,
        seed: u64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Constant magnetic field `F_12 = b`.
    #[serde(rename = "constant_F")]
    ConstantF {
        b: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Darboux(DarbouxSpec),
    /// Seeded smooth `N x n` frame.
    RandomSmooth {
        seed: u64,
        #[serde(default = "default_big_n")]
        big_n: usize,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Potential components sampled on a lattice, Minkowski signature.
    TabulatedPotential { components: Vec<Tabulated> },
    /// Frame `V` sampled on a lattice, Minkowski signature.
    TabulatedFrame { frame: Tabulated },
}

/// What a scenario provides. Missing pieces are derived where possible:
/// potential and blade from a frame.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spacetime: Spacetime,
    potential: Option<GaugePotential>,
    frame: Option<Frame>,
    blade: Option<RotatingBlade>,
    em: Option<EmFrameParams>,
}

impl Scenario {
    fn empty(name: &str, spacetime: Spacetime) -> Self {
        Scenario {
            name: name.into(),
            spacetime,
            potential: None,
            frame: None,
            blade: None,
            em: None,
        }
    }

    fn missing(&self, what: &str) -> Error {
        Error::Config(format!("scenario '{}' provides no {what}", self.name))
    }

    pub fn potential(&self) -> Result<GaugePotential> {
        if let Some(a) = &self.potential {
            return Ok(a.clone());
        }
        extract_potential(self.frame.as_ref().ok_or_else(|| self.missing("gauge potential"))?)
    }

    pub fn frame(&self) -> Result<Frame> {
        self.frame.clone().ok_or_else(|| self.missing("frame"))
    }

    pub fn blade(&self) -> Result<RotatingBlade> {
        if let Some(r) = &self.blade {
            return Ok(r.clone());
        }
        Ok(blade_from_frame(self.frame.as_ref().ok_or_else(|| self.missing("blade"))?))
    }

    pub fn em_params(&self) -> Result<EmFrameParams> {
        self.em.clone().ok_or_else(|| self.missing("electromagnetic frame parameters"))
    }

    pub fn dim(&self) -> usize {
        self.spacetime.dim()
    }
}

fn em_scenario(name: &str, st: Spacetime, params: EmFrameParams, potential: Option<GaugePotential>) -> Result<Scenario> {
    let mut s = Scenario::empty(name, st.clone());
    s.frame = Some(em_frame(st, &params)?);
    s.em = Some(params);
    s.potential = potential;
    Ok(s)
}

impl ScenarioSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioSpec::PlaneWave { .. } => "plane_wave",
            ScenarioSpec::Monopole { .. } => "monopole",
            ScenarioSpec::MonopolePlus { .. } => "monopole_plus",
            ScenarioSpec::MonopoleMinus { .. } => "monopole_minus",
            ScenarioSpec::MonopoleAngular { .. } => "monopole_angular",
            ScenarioSpec::PureGauge { .. } => "pure_gauge",
            ScenarioSpec::ConstantF { .. } => "constant_F",
            ScenarioSpec::Darboux(_) => "darboux",
            ScenarioSpec::RandomSmooth { .. } => "random_smooth",
            ScenarioSpec::TabulatedPotential { .. } => "tabulated_potential",
            ScenarioSpec::TabulatedFrame { .. } => "tabulated_frame",
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        let name = self.name();
        match self {
            ScenarioSpec::PlaneWave { k, n } => {
                let st = Spacetime::minkowski(k.len());
                let a = plane_wave_potential(st.clone(), k, n)?;
                em_scenario(name, st, plane_wave_params(k, n)?, Some(a))
            }
            ScenarioSpec::Monopole { g, patch } => monopole(name, *g, *patch),
            ScenarioSpec::MonopolePlus { g } => monopole(name, *g, Patch::Plus),
            ScenarioSpec::MonopoleMinus { g } => monopole(name, *g, Patch::Minus),
            ScenarioSpec::MonopoleAngular { g } => {
                let blade = monopole_angular_blade(*g)?;
                let mut s = Scenario::empty(name, blade.spacetime().clone());
                s.blade = Some(blade);
                Ok(s)
            }
            ScenarioSpec::PureGauge { n, seed, dim } => {
                if *n == 0 || *dim == 0 {
                    return Err(Error::Config("pure_gauge needs n > 0 and dim > 0".into()));
                }
                let st = Spacetime::minkowski(*dim);
                let u = GaugeMap::new(random_smooth_unitary(*n, *dim, *seed).into_field(*dim))?;
                let mut s = Scenario::empty(name, st.clone());
                s.potential = Some(pure_gauge(st.clone(), &u)?);
                // V = u^dag solves V^dag dV = i A
                let udag = u.field().map_linear((*n, *n), |m| m.adjoint());
                s.frame = Some(Frame::new(st, udag)?);
                Ok(s)
            }
            ScenarioSpec::ConstantF { b, dim } => {
                let st = Spacetime::minkowski(*dim);
                let mut s = Scenario::empty(name, st.clone());
                s.potential = Some(constant_f_potential(st, *b)?);
                Ok(s)
            }
            ScenarioSpec::Darboux(spec) => {
                let data = spec.clone().into_data()?;
                let mut s = Scenario::empty(name, data.spacetime().clone());
                s.frame = Some(darboux_frame(&data)?);
                s.potential = Some(darboux_potential(&data)?);
                Ok(s)
            }
            ScenarioSpec::RandomSmooth { seed, big_n, n, dim } => {
                if *n == 0 || n >= big_n || *dim == 0 {
                    return Err(Error::Config(format!("random_smooth needs 0 < n < N, got n = {n}, N = {big_n}")));
                }
                let st = Spacetime::minkowski(*dim);
                let (v, _) = random_smooth_frame_pair(*big_n, *n, *dim, *seed);
                let mut s = Scenario::empty(name, st.clone());
                s.frame = Some(Frame::new(st, v.into_field(*dim))?);
                Ok(s)
            }
            ScenarioSpec::TabulatedPotential { components } => {
                let dim = components.len();
                let fields = components.iter().cloned().map(Tabulated::into_field).collect::<Result<Vec<_>>>()?;
                if fields.iter().any(|f| f.dim() != dim) {
                    return Err(Error::Config(format!("tabulated potential needs {dim}-dimensional components")));
                }
                let st = Spacetime::minkowski(dim);
                let mut s = Scenario::empty(name, st.clone());
                s.potential = Some(GaugePotential::new(st, fields)?);
                Ok(s)
            }
            ScenarioSpec::TabulatedFrame { frame } => {
                let field = frame.clone().into_field()?;
                let st = Spacetime::minkowski(field.dim());
                let mut s = Scenario::empty(name, st.clone());
                s.frame = Some(Frame::new(st, field)?);
                Ok(s)
            }
        }
    }
}

fn monopole(name: &str, g: f64, patch: Patch) -> Result<Scenario> {
    if !g.is_finite() {
        return Err(Error::Parameter("monopole strength must be finite".into()));
    }
    em_scenario(name, Spacetime::spherical(), monopole_params(g, patch), Some(monopole_potential(g, patch)?))
}

/// Residual at a point, for one free index when the equation has one.
type PointResidual = Box<dyn Fn(&[f64], Option<usize>) -> Result<CMatrix> + Sync>;

/// Residual norms (max-abs entry) of `eq` at `points`, evaluated in parallel.
pub fn residuals(scenario: &Scenario, eq: Equation, points: &[Vec<f64>]) -> Result<ResidualReport> {
    for x in points {
        scenario.spacetime.check_point(x)?;
    }
    let dim = scenario.dim();
    let indices: Vec<Option<usize>> = if eq.has_free_index() {
        (0..dim).map(Some).collect()
    } else {
        vec![None]
    };
    let jobs: Vec<(&Vec<f64>, Option<usize>)> =
        points.iter().flat_map(|x| indices.iter().map(move |&i| (x, i))).collect();
    let eval: PointResidual = match eq {
        Equation::Ym => {
            let a = scenario.potential()?;
            Box::new(move |x, nu| ym_residual(&a, nu.unwrap_or(0), x))
        }
        Equation::Modified => {
            let v = scenario.frame()?;
            Box::new(move |x, _| modified_eom_residual(&v, x))
        }
        Equation::Maxmod => {
            let p = scenario.em_params()?;
            let st = scenario.spacetime.clone();
            Box::new(move |x, _| maxwell_mod_residual(&st, &p, x))
        }
        Equation::Shape => {
            let v = scenario.frame()?;
            Box::new(move |x, nu| shape_gauge_ym_residual(&v, nu.unwrap_or(0), x))
        }
        Equation::Sigma => {
            let r = scenario.blade()?;
            Box::new(move |x, _| sigma_eom_residual(&r, x))
        }
    };
    let entries = jobs
        .par_iter()
        .map(|(x, i)| {
            Ok(ResidualEntry {
                point: x.to_vec(),
                index: *i,
                norm: max_abs(&eval(x, *i)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::new(eq_name(eq), eq.index_note(), entries))
}

fn eq_name(eq: Equation) -> &'static str {
    match eq {
        Equation::Ym => "ym",
        Equation::Modified => "modified",
        Equation::Maxmod => "maxmod",
        Equation::Shape => "shape",
        Equation::Sigma => "sigma",
    }
}

/// One entry of a blade dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BladeSample {
    pub point: Vec<f64>,
    pub r: MatrixJson,
}

pub fn blade_dump(blade: &RotatingBlade, points: &[Vec<f64>]) -> Result<Vec<BladeSample>> {
    points
        .iter()
        .map(|x| {
            Ok(BladeSample {
                point: x.clone(),
                r: matrix_to_json(&blade.value(x)?),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ScenarioSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn builtin_names_parse() {
        let cases = [
            r#"{"scenario":"plane_wave","k":[1,0,0,1],"n":[0,1,0,0]}"#,
            r#"{"scenario":"monopole","g":0.5}"#,
            r#"{"scenario":"monopole_plus","g":0.5}"#,
            r#"{"scenario":"monopole_minus","g":1}"#,
            r#"{"scenario":"monopole_angular","g":0.5}"#,
            r#"{"scenario":"pure_gauge","seed":3}"#,
            r#"{"scenario":"constant_F","b":2}"#,
            r#"{"scenario":"darboux","pairs":[{"pi":"0.5*sin(x1)","phi":"x2"}]}"#,
            r#"{"scenario":"random_smooth","seed":7}"#,
        ];
        for c in cases {
            let s = spec(c);
            let built = s.build().unwrap();
            assert_eq!(built.name, s.name());
        }
        assert!(serde_json::from_str::<ScenarioSpec>(r#"{"scenario":"plane_wave","k":[1],"n":[1],"x":1}"#).is_err());
    }

    #[test]
    fn plane_wave_frame_and_potential_agree() {
        let s = spec(r#"{"scenario":"plane_wave","k":[1,0,0,1],"n":[0,1,0,0]}"#).build().unwrap();
        let from_frame = extract_potential(&s.frame().unwrap()).unwrap();
        let direct = s.potential().unwrap();
        let x = [0.3, -0.2, 0.5, 0.1];
        for mu in 0..4 {
            let gap = max_abs(&(from_frame.eval(mu, &x).unwrap() - direct.eval(mu, &x).unwrap()));
            assert!(gap < 1e-9, "{gap}");
        }
    }

    #[test]
    fn pure_gauge_frame_reproduces_potential() {
        let s = spec(r#"{"scenario":"pure_gauge","n":2,"seed":11}"#).build().unwrap();
        let from_frame = extract_potential(&s.frame().unwrap()).unwrap();
        let direct = s.potential().unwrap();
        let x = [0.1, 0.2, -0.4, 0.3];
        for mu in 0..4 {
            assert!(max_abs(&(from_frame.eval(mu, &x).unwrap() - direct.eval(mu, &x).unwrap())) < 1e-9);
        }
    }

    #[test]
    fn vacuum_residuals_vanish() {
        let s = spec(r#"{"scenario":"pure_gauge","seed":5}"#).build().unwrap();
        let pts = vec![vec![0.1, 0.0, 0.2, -0.1], vec![-0.3, 0.4, 0.0, 0.2]];
        let rep = residuals(&s, Equation::Ym, &pts).unwrap();
        assert_eq!(rep.entries.len(), 8);
        assert_eq!(rep.samples, 2);
        assert!(rep.max < 1e-9, "{}", rep.max);
    }

    #[test]
    fn missing_pieces_are_config_errors() {
        let s = spec(r#"{"scenario":"constant_F","b":1}"#).build().unwrap();
        assert!(matches!(s.frame(), Err(Error::Config(_))));
        assert!(matches!(residuals(&s, Equation::Sigma, &[vec![0.0; 4]]), Err(Error::Config(_))));
        assert!(matches!(residuals(&s, Equation::Ym, &[vec![0.0; 3]]), Err(Error::Dimension(_))));
    }

    #[test]
    fn blade_dump_round_trips() {
        let s = spec(r#"{"scenario":"random_smooth","seed":2,"big_n":3,"n":1}"#).build().unwrap();
        let dump = blade_dump(&s.blade().unwrap(), &[vec![0.0; 4]]).unwrap();
        let text = serde_json::to_string(&dump).unwrap();
        let back: Vec<BladeSample> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dump);
        assert_eq!(back[0].r.len(), 3);
    }
}
