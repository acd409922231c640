//! Identity checks over whole scenarios, with measured values and thresholds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blade::{blade_curvature, blade_from_frame, extract_potential, lifted_covariant_derivative_matrix, Frame};
use crate::config::Tolerances;
use crate::darboux::{darboux_report, DarbouxSpec};
use crate::dynamics::{maxwell_mod_residual, modified_eom_residual, ym_residual};
use crate::em::{em_faraday, em_potential_residual, monopole_blade_glue, plane_wave_params, MonopoleScenario, Patch};
use crate::embedded::Surface;
use crate::error::Result;
use crate::fields::Spacetime;
use crate::gauge::{field_strength, plane_wave_potential, GaugeMap};
use crate::numerics::{anticommutator, max_abs, max_abs_diff};
use crate::smooth::{random_smooth_frame_pair, random_smooth_unitary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A negative control that failed, as it should.
    ExpectedFail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub status: Status,
}

impl Check {
    /// Passes when `measured <= threshold`.
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let status = if measured <= threshold { Status::Pass } else { Status::Fail };
        Check {
            name: name.into(),
            measured,
            threshold,
            status,
        }
    }

    /// Passes when `observed` holds; a miss is expected when `expected` is false.
    pub fn expectation(name: impl Into<String>, observed: bool, expected: bool) -> Self {
        let status = match (observed, expected) {
            (true, true) => Status::Pass,
            (false, false) => Status::ExpectedFail,
            _ => Status::Fail,
        };
        Check {
            name: name.into(),
            measured: if observed { 1.0 } else { 0.0 },
            threshold: 1.0,
            status,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Largest residual per equation.
    pub residuals: BTreeMap<String, f64>,
    pub flux: Option<f64>,
    pub single_valued: Option<bool>,
    pub quantization_satisfied: Option<bool>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn merge(&mut self, other: VerifyReport) {
        self.checks.extend(other.checks);
        self.residuals.extend(other.residuals);
        self.flux = other.flux.or(self.flux);
        self.single_valued = other.single_valued.or(self.single_valued);
        self.quantization_satisfied = other.quantization_satisfied.or(self.quantization_satisfied);
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }
}

/// Seeded points in `[-w, w]^d`.
pub fn box_points(dim: usize, count: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-half_width..half_width)).collect())
        .collect()
}

/// Seeded points `(r, theta, phi)` away from both poles.
pub fn sphere_points(count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            vec![
                rng.random_range(0.5..2.0),
                rng.random_range(0.3..PI - 0.3),
                rng.random_range(0.0..2.0 * PI),
            ]
        })
        .collect()
}

/// Blade identities, four-way curvature, projection to `F` and gauge invariance.
pub fn blade_checks(label: &str, v: &Frame, points: &[Vec<f64>], tol: &Tolerances, seed: u64) -> Result<VerifyReport> {
    let analytic = v.field().has_analytic_deriv2();
    let deriv_tol = if analytic { tol.analytic } else { tol.fd() };
    let r = blade_from_frame(v);
    let curv = blade_curvature(&r).with_tolerance(tol.fd());
    let f = field_strength(&extract_potential(v)?);
    let u = GaugeMap::new(random_smooth_unitary(v.n(), v.dim(), seed).into_field(v.dim()))?;
    let rotated = blade_from_frame(&v.gauge_transformed(&u)?);
    let dim = v.dim();

    let (mut alg, mut anti, mut constancy, mut routes, mut proj, mut gauge) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for x in points {
        alg = alg.max(r.defects(x, v.n())?.max());
        gauge = gauge.max(max_abs_diff(&r.value(x)?, &rotated.value(x)?));
        let frame = v.value(x)?;
        for mu in 0..dim {
            let s = curv.shape().eval(mu, x)?;
            anti = anti.max(max_abs(&anticommutator(&r.value(x)?, &s)?));
            constancy = constancy.max(max_abs(&lifted_covariant_derivative_matrix(&r, r.field(), mu, x)?));
            gauge = gauge.max(max_abs_diff(&s, &rotated.shape_at(x, mu)?));
            for nu in (mu + 1)..dim {
                let all = curv.routes(x, mu, nu)?;
                routes = routes.max(all.max_discrepancy());
                let reduced = frame.adjoint() * &all.blade * &frame;
                proj = proj.max(max_abs_diff(&reduced, &f.eval(mu, nu, x)?));
            }
        }
    }
    let mut rep = VerifyReport::default();
    rep.push(Check::at_most(format!("{label}/blade_algebra"), alg, tol.analytic));
    rep.push(Check::at_most(format!("{label}/shape_anticommutes"), anti, deriv_tol));
    rep.push(Check::at_most(format!("{label}/blade_covariantly_constant"), constancy, deriv_tol));
    rep.push(Check::at_most(format!("{label}/curvature_four_way"), routes, tol.fd()));
    rep.push(Check::at_most(format!("{label}/curvature_projects_to_F"), proj, tol.fd()));
    rep.push(Check::at_most(format!("{label}/gauge_invariance"), gauge, deriv_tol));
    Ok(rep)
}

fn mink(a: &[f64], b: &[f64]) -> f64 {
    Spacetime::minkowski(a.len()).dot(a, b)
}

/// Plane wave `A = n sin(k.x)` through its frame.
pub fn planewave_suite(k: &[f64], n: &[f64], tol: &Tolerances) -> Result<VerifyReport> {
    let st = Spacetime::minkowski(k.len());
    let params = plane_wave_params(k, n)?;
    let v = crate::em::em_frame(st.clone(), &params)?;
    let a = plane_wave_potential(st.clone(), k, n)?;
    let points = box_points(k.len(), 6, 1.0, 17);
    let mut rep = blade_checks("planewave", &v, &points, tol, 3)?;

    let faraday = em_faraday(st.clone(), &params);
    let (mut veq, mut ym, mut maxmod, mut modified, mut ff) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for x in &points {
        for mu in 0..k.len() {
            veq = veq.max(em_potential_residual(&params, &a, mu, x)?);
            ym = ym.max(max_abs(&ym_residual(&a, mu, x)?));
        }
        maxmod = maxmod.max(max_abs(&maxwell_mod_residual(&st, &params, x)?));
        modified = modified.max(max_abs(&modified_eom_residual(&v, x)?));
        let pf = faraday.at(x)?;
        ff = ff.max(pf.wedge(&pf)?.max_abs());
    }
    rep.push(Check::at_most("planewave/frame_equation", veq, tol.fd()));
    rep.push(Check::at_most("planewave/F_wedge_F", ff, tol.algebraic));

    let maxwell = mink(k, k).abs() <= 1e-12 && mink(k, n).abs() <= 1e-12;
    let condition = (mink(k, k) * mink(n, n) - mink(k, n).powi(2)).abs() <= 1e-12;
    if maxwell {
        rep.push(Check::at_most("planewave/maxwell_residual", ym, tol.fd()));
    }
    rep.push(Check::expectation("planewave/maxmod_condition", maxmod <= tol.fd(), condition));
    rep.push(Check::expectation("planewave/modified_eom", modified <= tol.nested_fd(), condition));
    rep.residuals.insert("frame_equation".into(), veq);
    rep.residuals.insert("ym".into(), ym);
    rep.residuals.insert("maxmod".into(), maxmod);
    rep.residuals.insert("modified".into(), modified);
    Ok(rep)
}

/// Whether `2g` is an integer.
pub fn quantized(g: f64) -> bool {
    ((2.0 * g) - (2.0 * g).round()).abs() <= 1e-12
}

/// Monopole of strength `g`: both patches, flux, gluing and quantization.
pub fn monopole_suite(g: f64, tol: &Tolerances) -> Result<VerifyReport> {
    let points = sphere_points(6, 19);
    let mut rep = VerifyReport::default();
    let mut veq: f64 = 0.0;
    for patch in [Patch::Plus, Patch::Minus] {
        let m = MonopoleScenario::new(g, patch)?;
        let label = format!("monopole_{patch:?}").to_lowercase();
        rep.merge(blade_checks(&label, &m.frame()?, &points, tol, 5)?);
        let (p, a) = (m.params(), m.potential()?);
        for x in &points {
            for mu in 0..3 {
                veq = veq.max(em_potential_residual(&p, &a, mu, x)?);
            }
        }
    }
    rep.push(Check::at_most("monopole/frame_equation", veq, tol.fd()));
    rep.residuals.insert("frame_equation".into(), veq);

    const FLUX_ORDER: usize = 16;
    let flux = MonopoleScenario::new(g, Patch::Plus)?.flux(FLUX_ORDER)?;
    let want = 4.0 * PI * g;
    let rel = if want == 0.0 { flux.abs() } else { ((flux - want) / want).abs() };
    rep.push(Check::at_most("monopole/flux_4_pi_g", rel, 5e-3));
    rep.flux = Some(flux);

    let glue = monopole_blade_glue(g)?;
    rep.push(Check::at_most("monopole/patch_overlap", glue.overlap_defect, tol.algebraic));
    let q = quantized(g);
    rep.push(Check::expectation("monopole/single_valued", glue.single_valued, q));
    rep.single_valued = Some(glue.single_valued);
    rep.quantization_satisfied = Some(q);
    Ok(rep)
}

/// Darboux frame residual and rank.
pub fn darboux_suite(spec: &DarbouxSpec, tol: &Tolerances) -> Result<VerifyReport> {
    let data = spec.clone().into_data()?;
    let points = match &spec.domain {
        Some(b) => {
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            (0..20)
                .map(|_| b.lower.iter().zip(&b.upper).map(|(l, u)| rng.random_range(*l..*u)).collect())
                .collect()
        }
        None => box_points(spec.dim, 20, 0.8, 23),
    };
    let report = darboux_report(&data, &points, tol.wedge_zero)?;
    let mut rep = VerifyReport::default();
    rep.push(Check::at_most("darboux/frame_equation", report.max_residual, tol.fd()));
    if let (Some(expected), Some(measured)) = (data.expected_rank(), report.measured_rank) {
        rep.push(Check::at_most("darboux/rank_matches", (expected as f64 - measured as f64).abs(), 0.0));
    }
    rep.residuals.insert("darboux".into(), report.max_residual);
    Ok(rep)
}

/// Gauss curvature against the closed form, shape identity and curvature cross-check.
pub fn embedded_suite(surface: Surface, tol: &Tolerances) -> Result<VerifyReport> {
    let e = surface.embedding()?;
    let expected = |x: &[f64]| -> f64 {
        match surface {
            Surface::Plane | Surface::Cylinder => 0.0,
            Surface::Sphere { a } => 1.0 / (a * a),
            Surface::Torus { big_r, r } => x[1].cos() / (r * (big_r + r * x[1].cos())),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let (mut gauss, mut shape, mut routes) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..12 {
        let x = [rng.random_range(0.3..PI - 0.3), rng.random_range(0.0..2.0 * PI)];
        let row = e.curvature_row(&x)?;
        gauss = gauss.max((row.gauss.unwrap_or(0.0) - expected(&x)).abs());
        shape = shape.max(row.shape_residual);
        routes = routes.max(row.route_gap);
    }
    let name = e.name().to_string();
    let mut rep = VerifyReport::default();
    rep.push(Check::at_most(format!("embedded_{name}/gauss_curvature"), gauss, 1e-6));
    rep.push(Check::at_most(format!("embedded_{name}/shape_identity"), shape, tol.fd()));
    rep.push(Check::at_most(format!("embedded_{name}/curvature_cross_check"), routes, tol.fd()));
    Ok(rep)
}

/// Two-pair Darboux fixture with a non-decomposable field strength.
pub fn darboux_fixture() -> DarbouxSpec {
    serde_json::from_value(serde_json::json!({
        "pairs": [
            {"pi": "0.8 * sin(x0 + x2)", "phi": "x1 - 0.5 * x3"},
            {"pi": "0.5 * x2 * cos(x1)", "phi": "x3 + x0^2"}
        ]
    }))
    .expect("fixture is valid")
}

/// Every module's identities on the builtin fixtures.
pub fn default_suite(tol: &Tolerances) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let st = Spacetime::minkowski(4);
    let points = box_points(4, 4, 1.0, 31);
    for (big_n, n, seed) in [(2, 1, 1u64), (4, 1, 2), (4, 2, 3)] {
        let (v, _) = random_smooth_frame_pair(big_n, n, 4, seed);
        let v = Frame::new(st.clone(), v.into_field(4))?;
        rep.merge(blade_checks(&format!("random_N{big_n}_n{n}"), &v, &points, tol, seed + 100)?);
    }
    rep.merge(planewave_suite(&[1.0, 0.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 0.0], tol)?);
    rep.merge(monopole_suite(0.5, tol)?);
    rep.merge(darboux_suite(&darboux_fixture(), tol)?);
    rep.merge(embedded_suite(Surface::Sphere { a: 1.0 }, tol)?);
    rep.merge(embedded_suite(Surface::Torus { big_r: 2.0, r: 0.7 }, tol)?);
    Ok(rep)
}
