use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use bladegauge::blade::RotatingBlade;
use bladegauge::darboux::{darboux_report, DarbouxReport, DarbouxSpec};
use bladegauge::dynamics::{sigma_flow as run_flow, Equation, SigmaLattice};
use bladegauge::embedded::Surface;
use bladegauge::fields::{matrix_from_json, matrix_to_json, MatrixJson};
use bladegauge::gauge::hermiticity_defect_at;
use bladegauge::scenario::{residuals as eval_residuals, BladeSample, ScenarioSpec};
use bladegauge::suite::{
    blade_checks, box_points, darboux_suite, default_suite, embedded_suite, monopole_suite, planewave_suite, Check,
    VerifyReport,
};
use bladegauge::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{decode, default_grid, parse_grid, read_json, RunConfig, ScenarioRef, DEFAULT_G, MAXWELL_K, MAXWELL_N};
use crate::failure::{Failure, Outcome};
use crate::output::{emit, emit_json, Envelope};
use crate::schema::Schema;
use crate::{ScenarioFlags, SurfaceName};

/// Config file (if any) with command-line flags layered on top.
fn merged(flags: &ScenarioFlags) -> Outcome<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &flags.scenario {
        cfg.scenario = Some(ScenarioRef::Name(s.clone()));
    }
    if let Some(k) = &flags.k {
        cfg.k = Some(k.0.clone());
    }
    if let Some(n) = &flags.n {
        cfg.n = Some(n.0.clone());
    }
    if flags.g.is_some() {
        cfg.g = flags.g;
    }
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if cfg.tolerances.fd_step != bladegauge::fields::DEFAULT_STEP {
        return Err(Failure::Usage(format!(
            "fd_step is fixed at {} in this version",
            bladegauge::fields::DEFAULT_STEP
        )));
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct VerifyResult {
    passed: bool,
    failures: Vec<String>,
    #[serde(flatten)]
    report: VerifyReport,
}

pub fn verify(flags: &ScenarioFlags, out: Option<&Path>) -> Outcome<()> {
    let mut cfg = merged(flags)?;
    let tol = cfg.tolerances;
    let name = match &cfg.scenario {
        None => "all".to_string(),
        Some(ScenarioRef::Name(n)) => n.clone(),
        Some(ScenarioRef::Inline(_)) => String::new(),
    };
    let report = match name.as_str() {
        "all" => {
            cfg.scenario = Some(ScenarioRef::Name(name.clone()));
            default_suite(&tol)?
        }
        "planewave" | "plane_wave" => {
            let (k, n) = (cfg.k.get_or_insert(MAXWELL_K.to_vec()).clone(), cfg.n.get_or_insert(MAXWELL_N.to_vec()).clone());
            planewave_suite(&k, &n, &tol)?
        }
        "monopole" => monopole_suite(*cfg.g.get_or_insert(DEFAULT_G), &tol)?,
        "embedded" => {
            let mut rep = embedded_suite(Surface::Sphere { a: 1.0 }, &tol)?;
            rep.merge(embedded_suite(Surface::Torus { big_r: 2.0, r: 0.5 }, &tol)?);
            rep
        }
        _ => {
            let spec = cfg.scenario_spec()?;
            cfg.scenario = Some(ScenarioRef::Inline(spec.clone()));
            spec_suite(&spec, &tol, cfg.seed)?
        }
    };
    let failures: Vec<String> = report.failures().into_iter().map(String::from).collect();
    let result = VerifyResult {
        passed: failures.is_empty(),
        failures: failures.clone(),
        report,
    };
    let dest = out.or(cfg.outputs.report.as_deref()).map(Path::to_path_buf);
    emit_json(dest.as_deref(), &Envelope::new("verify", &cfg, result))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join(", ")))
    }
}

/// Checks for an arbitrary scenario, chosen by what it provides.
fn spec_suite(spec: &ScenarioSpec, tol: &Tolerances, seed: u64) -> Outcome<VerifyReport> {
    match spec {
        ScenarioSpec::PlaneWave { k, n } => return Ok(planewave_suite(k, n, tol)?),
        ScenarioSpec::Monopole { g, .. } | ScenarioSpec::MonopolePlus { g } | ScenarioSpec::MonopoleMinus { g } => {
            return Ok(monopole_suite(*g, tol)?)
        }
        ScenarioSpec::Darboux(d) => return Ok(darboux_suite(d, tol)?),
        _ => {}
    }
    let scenario = spec.build()?;
    let label = spec.name();
    let points = match spec {
        ScenarioSpec::MonopoleAngular { .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..6)
                .map(|_| vec![rng.random_range(0.3..PI - 0.3), rng.random_range(0.0..2.0 * PI)])
                .collect()
        }
        _ => box_points(scenario.dim(), 6, 0.8, seed),
    };
    if let Ok(frame) = scenario.frame() {
        return Ok(blade_checks(label, &frame, &points, tol, seed)?);
    }
    let mut rep = VerifyReport::default();
    if let Ok(blade) = scenario.blade() {
        rep.checks.push(Check::at_most(format!("{label}/blade_algebra"), blade_algebra(&blade, &points)?, tol.analytic));
    }
    if let Ok(a) = scenario.potential() {
        let mut herm: f64 = 0.0;
        for x in &points {
            herm = herm.max(hermiticity_defect_at(&a, x)?);
        }
        rep.checks.push(Check::at_most(format!("{label}/potential_hermitian"), herm, tol.algebraic));
        let ym = eval_residuals(&scenario, Equation::Ym, &points)?;
        rep.residuals.insert("ym".into(), ym.max);
    }
    Ok(rep)
}

fn blade_algebra(blade: &RotatingBlade, points: &[Vec<f64>]) -> Outcome<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let n = blade.rank_at(x)?;
        worst = worst.max(blade.defects(x, n)?.max());
    }
    Ok(worst)
}

#[derive(Serialize)]
struct ResidualsConfig<'a> {
    scenario: &'a ScenarioSpec,
    equation: Equation,
    grid: &'a bladegauge::fields::Grid,
    tolerances: Tolerances,
    seed: u64,
}

#[derive(Serialize)]
struct ResidualsSummary<'a> {
    equation: &'a str,
    index_note: &'a str,
    samples: usize,
    max: f64,
    mean: f64,
    threshold: f64,
    within_tolerance: bool,
}

pub fn residuals(
    flags: &ScenarioFlags,
    eq: Option<&str>,
    grid: Option<&str>,
    csv: Option<&Path>,
    out: Option<&Path>,
    check: bool,
) -> Outcome<()> {
    let cfg = merged(flags)?;
    let equation = match eq {
        Some(src) => src.parse::<Equation>()?,
        None => cfg
            .equation
            .ok_or_else(|| Failure::Usage("no equation given (use --eq ym|modified|maxmod|shape|sigma)".into()))?,
    };
    let spec = cfg.scenario_spec()?;
    let scenario = spec.build()?;
    let grid = match grid {
        Some(src) => parse_grid(src, scenario.dim())?,
        None => match &cfg.grid {
            Some(g) => {
                g.validate()?;
                g.clone()
            }
            None => default_grid(&spec, scenario.spacetime.chart(), scenario.dim()),
        },
    };
    let report = eval_residuals(&scenario, equation, &grid.cell_centers())?;
    let tol = cfg.tolerances;
    let threshold = if equation == Equation::Modified { tol.nested_fd() } else { tol.fd() };
    let csv_dest = csv.or(cfg.outputs.csv.as_deref());
    if let Some(path) = csv_dest {
        emit(Some(path), &report.to_csv())?;
    }
    let summary = ResidualsSummary {
        equation: &report.equation,
        index_note: &report.index_note,
        samples: report.samples,
        max: report.max,
        mean: report.mean,
        threshold,
        within_tolerance: report.max <= threshold,
    };
    let config = ResidualsConfig {
        scenario: &spec,
        equation,
        grid: &grid,
        tolerances: tol,
        seed: cfg.seed,
    };
    emit_json(out.or(cfg.outputs.report.as_deref()), &Envelope::new("residuals", config, summary))?;
    if check && report.max > threshold {
        return Err(Failure::Check(format!(
            "{} residual {:e} exceeds {threshold:e}",
            report.equation, report.max
        )));
    }
    Ok(())
}

/// Initial sigma-model field: a scenario blade sampled on the lattice, or explicit sites.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaInit {
    #[serde(default)]
    scenario: Option<ScenarioSpec>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: Vec<usize>,
    periodic: Vec<bool>,
    #[serde(default)]
    sites: Option<Vec<MatrixJson>>,
}

#[derive(Serialize)]
struct FlowConfig<'a> {
    init: &'a Value,
    steps: usize,
    eta: f64,
}

#[derive(Serialize)]
struct FlowTrace {
    sites: usize,
    initial_action: f64,
    final_action: f64,
    monotone: bool,
    invariant_defect: f64,
    actions: Vec<f64>,
}

pub fn sigma_flow(init: &Path, steps: usize, eta: f64, trace: Option<&Path>, dump: Option<&Path>) -> Outcome<()> {
    let value = read_json(init)?;
    let spec: SigmaInit = decode(Schema::SigmaInit, value.clone(), &init.display().to_string())?;
    let lattice = match (spec.scenario, spec.sites) {
        (Some(s), None) => {
            let blade = s.build()?.blade()?;
            SigmaLattice::from_blade(&blade, spec.lower, spec.upper, spec.points, spec.periodic)?
        }
        (None, Some(sites)) => {
            let sites = sites.iter().map(matrix_from_json).collect::<Result<Vec<_>, _>>()?;
            SigmaLattice::new(spec.lower, spec.upper, spec.points, spec.periodic, sites)?
        }
        _ => return Err(Failure::Usage("initial field needs exactly one of 'scenario' and 'sites'".into())),
    };
    let outcome = run_flow(&lattice, steps, eta)?;
    let actions = outcome.actions;
    let monotone = actions.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
    let result = FlowTrace {
        sites: outcome.lattice.len(),
        initial_action: actions[0],
        final_action: *actions.last().expect("trace starts with the initial action"),
        monotone,
        invariant_defect: outcome.lattice.invariant_defect(),
        actions,
    };
    if let Some(path) = dump {
        let samples: Vec<BladeSample> = (0..outcome.lattice.len())
            .map(|k| BladeSample {
                point: outcome.lattice.coords(k),
                r: matrix_to_json(outcome.lattice.site(k)),
            })
            .collect();
        emit_json(Some(path), &samples)?;
    }
    let config = FlowConfig {
        init: &value,
        steps,
        eta,
    };
    emit_json(trace, &Envelope::new("sigma-flow", config, result))
}

#[derive(Serialize)]
struct DarbouxConfig<'a> {
    input: &'a DarbouxSpec,
    samples: usize,
    seed: u64,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct DarbouxResult {
    #[serde(flatten)]
    report: DarbouxReport,
    expected_rank: Option<usize>,
    threshold: f64,
    passed: bool,
}

pub fn darboux(input: &Path, samples: usize, seed: u64, out: Option<&Path>) -> Outcome<()> {
    let spec: DarbouxSpec = decode(Schema::Darboux, read_json(input)?, &input.display().to_string())?;
    if samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let data = spec.clone().into_data()?;
    let points: Vec<Vec<f64>> = match &spec.domain {
        Some(b) => {
            if b.lower.len() != spec.dim || b.upper.len() != spec.dim || b.lower.iter().zip(&b.upper).any(|(l, u)| l >= u) {
                return Err(Failure::Usage(format!("domain must be a {}-dimensional box with lower < upper", spec.dim)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| b.lower.iter().zip(&b.upper).map(|(l, u)| rng.random_range(*l..*u)).collect())
                .collect()
        }
        None => box_points(spec.dim, samples, 0.8, seed),
    };
    let tol = Tolerances::default();
    let report = darboux_report(&data, &points, tol.wedge_zero)?;
    let expected_rank = data.expected_rank();
    let rank_ok = match (expected_rank, report.measured_rank) {
        (Some(e), Some(m)) => e == m,
        _ => true,
    };
    let threshold = tol.fd();
    let passed = report.max_residual <= threshold && rank_ok;
    let summary = format!(
        "darboux residual {:e} (threshold {threshold:e}), rank {:?} vs expected {:?}",
        report.max_residual, report.measured_rank, expected_rank
    );
    let config = DarbouxConfig {
        input: &spec,
        samples,
        seed,
        tolerances: tol,
    };
    let result = DarbouxResult {
        report,
        expected_rank,
        threshold,
        passed,
    };
    emit_json(out, &Envelope::new("darboux", config, result))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(summary))
    }
}

pub fn embedded(surface: SurfaceName, a: f64, major: f64, minor: f64, points: usize, out: Option<&Path>) -> Outcome<()> {
    if points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let surface = match surface {
        SurfaceName::Plane => Surface::Plane,
        SurfaceName::Sphere => Surface::Sphere { a },
        SurfaceName::Cylinder => Surface::Cylinder,
        SurfaceName::Torus => Surface::Torus { big_r: major, r: minor },
    };
    let e = surface.embedding()?;
    // the sphere chart degenerates at the poles
    let (lo, hi) = match surface {
        Surface::Sphere { .. } => (0.2, PI - 0.2),
        _ => (0.0, 2.0 * PI * (points - 1) as f64 / points as f64),
    };
    let mut csv = String::from("u,v,metric_det,riemann_0101,gauss,shape_residual,route_gap\n");
    for i in 0..points {
        let u = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        for j in 0..points {
            let v = 2.0 * PI * j as f64 / points as f64;
            let row = e.curvature_row(&[u, v])?;
            let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            writeln!(
                csv,
                "{u:e},{v:e},{:e},{},{},{:e},{:e}",
                row.metric_det,
                opt(row.riemann_0101),
                opt(row.gauss),
                row.shape_residual,
                row.route_gap
            )
            .expect("writing to a String cannot fail");
        }
    }
    emit(out, &csv)
}
