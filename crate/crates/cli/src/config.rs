//! Run configuration: file contents merged with command-line flags.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use bladegauge::dynamics::Equation;
use bladegauge::em::Patch;
use bladegauge::fields::{Chart, Grid};
use bladegauge::scenario::ScenarioSpec;
use bladegauge::suite::darboux_fixture;
use bladegauge::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::{Failure, Outcome};
use crate::schema::{validate, Schema};

pub const MAXWELL_K: [f64; 4] = [1.0, 0.0, 0.0, 1.0];
pub const MAXWELL_N: [f64; 4] = [0.0, 1.0, 0.0, 0.0];
pub const DEFAULT_G: f64 = 0.5;

/// A builtin name as typed on the command line, or a scenario object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Name(String),
    Inline(ScenarioSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<Equation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    // output locations do not change results, so reports leave them out
    #[serde(default, skip_serializing)]
    pub outputs: Outputs,
}

pub fn read_json(path: &Path) -> Outcome<Value> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: malformed JSON: {e}", path.display())))
}

/// Parses `value` after validating it against `schema`.
pub fn decode<T: serde::de::DeserializeOwned>(schema: Schema, value: Value, origin: &str) -> Outcome<T> {
    validate(schema, &value, origin)?;
    serde_json::from_value(value).map_err(|e| Failure::Usage(format!("{origin}: {e}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Outcome<Self> {
        let value = read_json(path)?;
        decode(Schema::Config, value, &path.display().to_string())
    }

    fn k(&self) -> Vec<f64> {
        self.k.clone().unwrap_or_else(|| MAXWELL_K.to_vec())
    }

    fn n(&self) -> Vec<f64> {
        self.n.clone().unwrap_or_else(|| MAXWELL_N.to_vec())
    }

    fn g(&self) -> f64 {
        self.g.unwrap_or(DEFAULT_G)
    }

    /// Resolves the scenario to a concrete specification.
    pub fn scenario_spec(&self) -> Outcome<ScenarioSpec> {
        match &self.scenario {
            None => Err(Failure::Usage("no scenario given (use --scenario)".into())),
            Some(ScenarioRef::Inline(spec)) => Ok(spec.clone()),
            Some(ScenarioRef::Name(name)) => self.named(name),
        }
    }

    fn named(&self, name: &str) -> Outcome<ScenarioSpec> {
        let path = Path::new(name);
        if path.is_file() {
            return decode(Schema::Scenario, read_json(path)?, name);
        }
        let (base, arg) = split_call(name)?;
        let seed = arg.unwrap_or(self.seed);
        let spec = match base {
            "planewave" | "plane_wave" => ScenarioSpec::PlaneWave { k: self.k(), n: self.n() },
            "monopole" => ScenarioSpec::Monopole {
                g: self.g(),
                patch: Patch::Plus,
            },
            "monopole_plus" => ScenarioSpec::MonopolePlus { g: self.g() },
            "monopole_minus" => ScenarioSpec::MonopoleMinus { g: self.g() },
            "monopole_angular" => ScenarioSpec::MonopoleAngular { g: self.g() },
            "pure_gauge" => ScenarioSpec::PureGauge { n: 2, seed, dim: 4 },
            "constant_F" | "constant_f" => ScenarioSpec::ConstantF { b: 1.0, dim: 4 },
            "darboux" => ScenarioSpec::Darboux(darboux_fixture()),
            "random_smooth" => ScenarioSpec::RandomSmooth {
                seed,
                big_n: 4,
                n: 2,
                dim: 4,
            },
            _ => {
                return Err(Failure::Usage(format!(
                    "unknown scenario '{name}': expected an existing JSON file or one of planewave, monopole, \
                     monopole_plus, monopole_minus, monopole_angular, pure_gauge, constant_F, darboux, random_smooth"
                )))
            }
        };
        if arg.is_some() && !matches!(base, "pure_gauge" | "random_smooth") {
            return Err(Failure::Usage(format!("scenario '{base}' takes no seed argument")));
        }
        Ok(spec)
    }
}

/// `name(seed)` into `("name", Some(seed))`.
fn split_call(name: &str) -> Outcome<(&str, Option<u64>)> {
    let Some(open) = name.find('(') else {
        return Ok((name, None));
    };
    let inner = name[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Failure::Usage(format!("unbalanced parenthesis in '{name}'")))?;
    let seed = inner
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("seed '{inner}' in '{name}' is not a non-negative integer")))?;
    Ok((&name[..open], Some(seed)))
}

/// A comma-separated list of reals given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f64>);

pub fn parse_vector(src: &str) -> Result<Vector, String> {
    src.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()
        .map(Vector)
}

/// Grid from inline JSON, a JSON file, or `lo:hi:cells` per axis (one axis is
/// broadcast to all `dim` axes).
pub fn parse_grid(src: &str, dim: usize) -> Outcome<Grid> {
    let trimmed = src.trim();
    let value = if trimmed.starts_with('{') {
        Some(serde_json::from_str(trimmed).map_err(|e| Failure::Usage(format!("--grid: malformed JSON: {e}")))?)
    } else if Path::new(trimmed).is_file() {
        Some(read_json(Path::new(trimmed))?)
    } else {
        None
    };
    let grid: Grid = match value {
        Some(v) => decode(Schema::Grid, v, "--grid")?,
        None => {
            let axes = trimmed
                .split(',')
                .map(|axis| {
                    let parts: Vec<&str> = axis.split(':').collect();
                    let bad = || Failure::Usage(format!("--grid axis '{axis}' is not lo:hi:cells"));
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
                    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
                    let cells: usize = parts[2].trim().parse().map_err(|_| bad())?;
                    Ok((lo, hi, cells))
                })
                .collect::<Outcome<Vec<_>>>()?;
            let axes = if axes.len() == 1 { vec![axes[0]; dim] } else { axes };
            Grid {
                lower: axes.iter().map(|a| a.0).collect(),
                upper: axes.iter().map(|a| a.1).collect(),
                cells: axes.iter().map(|a| a.2).collect(),
            }
        }
    };
    grid.validate()?;
    if grid.dim() != dim {
        return Err(Failure::Usage(format!("--grid is {}-dimensional, scenario needs {dim}", grid.dim())));
    }
    Ok(grid)
}

/// Sample box used when no grid is given.
pub fn default_grid(spec: &ScenarioSpec, chart: Chart, dim: usize) -> Grid {
    match (spec, chart) {
        (_, Chart::Spherical3d) => Grid {
            lower: vec![0.8, 0.3, 0.0],
            upper: vec![1.2, PI - 0.3, 2.0 * PI],
            cells: vec![1, 4, 4],
        },
        (ScenarioSpec::MonopoleAngular { .. }, _) => Grid {
            lower: vec![0.5, 0.0],
            upper: vec![PI - 0.5, 2.0 * PI],
            cells: vec![4, 4],
        },
        _ => Grid::cube(dim, -0.5, 0.5, 2),
    }
}
