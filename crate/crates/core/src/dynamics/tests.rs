use super::*;
use crate::blade::complement_frame;
use crate::em::{monopole_angular_blade, monopole_params, plane_wave_params, Patch};
use crate::gauge::{constant_f_potential, gauge_transform, plane_wave_potential, GaugeMap};
use crate::numerics::{max_abs, max_abs_diff, random_hermitian, reference_frame};
use crate::smooth::{random_smooth_frame_pair, random_smooth_hermitian, random_smooth_unitary};
use crate::Tolerances;
use std::f64::consts::PI;

const MAXWELL: ([f64; 4], [f64; 4]) = ([1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 0.0]);
const WEAK: ([f64; 4], [f64; 4]) = ([0.0, 0.0, 1.0, 0.0], [1.0, 1.0, 0.0, 0.0]);
const VIOLATING: ([f64; 4], [f64; 4]) = ([0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0]);

fn fd() -> f64 {
    Tolerances::default().fd()
}

fn nested() -> f64 {
    Tolerances::default().nested_fd()
}

fn points() -> Vec<Vec<f64>> {
    vec![vec![0.3, -0.2, 0.5, 0.1], vec![-0.7, 0.4, 0.2, 0.9], vec![1.1, 0.6, -0.8, -0.3]]
}

fn mink(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

fn wave_frame(k: &[f64], n: &[f64]) -> Frame {
    em_frame(Spacetime::minkowski(4), &plane_wave_params(k, n).unwrap()).unwrap()
}

#[test]
fn vacuum_has_no_residuals() {
    let st = Spacetime::minkowski(4);
    let a = GaugePotential::zero(st.clone(), 2);
    let v = Frame::new(st.clone(), FieldFn::constant(4, reference_frame(3, 1))).unwrap();
    let r = blade_from_frame(&v);
    for x in points() {
        for nu in 0..4 {
            assert_eq!(max_abs(&ym_residual(&a, nu, &x).unwrap()), 0.0);
            assert_eq!(max_abs(&shape_gauge_ym_residual(&v, nu, &x).unwrap()), 0.0);
        }
        assert_eq!(max_abs(&modified_eom_residual(&v, &x).unwrap()), 0.0);
        assert_eq!(max_abs(&sigma_eom_residual(&r, &x).unwrap()), 0.0);
        assert_eq!(ym_density(&a, &x).unwrap(), 0.0);
        assert_eq!(sigma_density(&r, &x).unwrap(), 0.0);
    }
}

#[test]
fn plane_wave_yang_mills_residual() {
    let st = Spacetime::minkowski(4);
    for (k, n) in [MAXWELL, WEAK, VIOLATING, ([0.3, -1.1, 0.4, 0.7], [0.5, 0.2, -0.8, 1.3])] {
        let a = plane_wave_potential(st.clone(), &k, &n).unwrap();
        let numeric = GaugePotential::new(
            st.clone(),
            a.components().iter().map(|f| f.clone().finite_difference_only()).collect(),
        )
        .unwrap();
        for x in points() {
            let phase: f64 = k.iter().zip(&x).map(|(a, b)| a * b).sum();
            for nu in 0..4 {
                // d^mu F_{mu nu} = -((k.k) n_nu - (k.n) k_nu) sin(k.x)
                let want = -(mink(&k, &k) * n[nu] - mink(&k, &n) * k[nu]) * phase.sin();
                let got = ym_residual(&a, nu, &x).unwrap()[(0, 0)];
                assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-15);
                let got = ym_residual(&numeric, nu, &x).unwrap()[(0, 0)];
                assert!((got.re - want).abs() < nested());
            }
        }
    }
}

#[test]
fn constant_magnetic_field_action() {
    let b = 1.7;
    let st = Spacetime::minkowski(4);
    let a = constant_f_potential(st, b).unwrap();
    // -1/4 * 2 * F_12 F^12 with F^12 = (-1)(-1) F_12
    assert!((ym_density(&a, &[0.1, 0.2, 0.3, 0.4]).unwrap() + 0.5 * b * b).abs() < 1e-12);
    let grid = Grid::new(vec![0.0; 4], vec![1.0, 2.0, 1.0, 0.5], vec![3, 3, 3, 3]).unwrap();
    let want = -0.5 * b * b * 1.0;
    let got = ym_action(&a, &grid).unwrap();
    assert!(((got - want) / want).abs() < 1e-2, "{got} vs {want}");
}

#[test]
fn action_is_gauge_invariant() {
    let st = Spacetime::minkowski(4);
    let comps = (0..4).map(|m| random_smooth_hermitian(2, 4, 40 + m)).collect();
    let a = GaugePotential::new(st, comps).unwrap();
    let u = GaugeMap::new(random_smooth_unitary(2, 4, 50).into_field(4)).unwrap();
    let b = gauge_transform(&a, &u).unwrap();
    for x in points() {
        let (da, db) = (ym_density(&a, &x).unwrap(), ym_density(&b, &x).unwrap());
        assert!((da - db).abs() < 1e-9 * (1.0 + da.abs()));
    }
    let grid = Grid::cube(4, -0.5, 0.5, 2);
    let (sa, sb) = (ym_action(&a, &grid).unwrap(), ym_action(&b, &grid).unwrap());
    assert!((sa - sb).abs() < 1e-9 * (1.0 + sa.abs()));
}

#[test]
fn sigma_action_two_paths() {
    let m = crate::em::MonopoleScenario::new(0.5, Patch::Plus).unwrap();
    let v = m.frame().unwrap();
    let exact = blade_from_frame(&v);
    let numeric = RotatingBlade::new(v.spacetime().clone(), exact.field().clone().finite_difference_only()).unwrap();
    let grid = Grid::new(vec![0.9, 0.6, 0.0], vec![1.1, PI - 0.6, 2.0 * PI], vec![1, 16, 16]).unwrap();
    let (se, sn) = (sigma_action(&exact, &grid).unwrap(), sigma_action(&numeric, &grid).unwrap());
    assert!(se.abs() > 0.1);
    assert!(((se - sn) / se).abs() < fd(), "{se} {sn}");
    // spatial signs are negative, so -1/4 sum_mu (-1) Tr(dR dR) > 0
    assert!(se > 0.0);
}

#[test]
fn modified_equation_admits_more_solutions() {
    for (k, n) in [MAXWELL, WEAK] {
        let v = wave_frame(&k, &n);
        let a = extract_potential(&v).unwrap();
        for x in points() {
            assert!(max_abs(&modified_eom_residual(&v, &x).unwrap()) < nested());
        }
        let ym = (0..4).map(|nu| max_abs(&ym_residual(&a, nu, &points()[0]).unwrap())).fold(0.0, f64::max);
        if (k, n) == MAXWELL {
            assert!(ym < fd());
        } else {
            assert!(ym > 0.1, "{ym}");
        }
    }
    let v = wave_frame(&VIOLATING.0, &VIOLATING.1);
    assert!(max_abs(&modified_eom_residual(&v, &points()[0]).unwrap()) > 0.1);
}

#[test]
fn modified_residual_converges_at_second_order() {
    // successive differences of a second-order estimate shrink by four per halving
    let v = wave_frame(&VIOLATING.0, &VIOLATING.1);
    let at = |h: f64| {
        let f = Frame::new(v.spacetime().clone(), v.field().clone().with_step(h)).unwrap();
        modified_eom_residual(&f, &points()[1]).unwrap()
    };
    let (r1, r2, r3) = (at(0.08), at(0.04), at(0.02));
    let ratio = max_abs(&(&r1 - &r2)) / max_abs(&(&r2 - &r3));
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn maxwell_mod_condition_design() {
    let st = Spacetime::minkowski(4);
    let cases = [
        (MAXWELL, true),
        (WEAK, true),
        (VIOLATING, false),
        (([0.5, 0.2, 0.0, 0.0], [0.0, 0.0, 1.0, 0.3]), false),
    ];
    for ((k, n), satisfied) in cases {
        let condition = mink(&k, &k) * mink(&n, &n) - mink(&k, &n).powi(2);
        assert_eq!(condition.abs() <= 1e-12, satisfied);
        let p = plane_wave_params(&k, &n).unwrap();
        for x in points() {
            let res = maxwell_mod_residual(&st, &p, &x).unwrap();
            let phase: f64 = k.iter().zip(&x).map(|(a, b)| a * b).sum();
            let rho = 0.5 * phase - PI / 4.0;
            // d^nu R picks up d(alpha - beta) = 2n and d rho = k/2
            let want = 2.0 * phase.sin().abs() * condition.abs() * (2.0 * rho).sin().abs();
            assert!((max_abs(&res) - want).abs() < fd(), "{} vs {want}", max_abs(&res));
            if satisfied {
                assert!(max_abs(&res) < fd());
            }
        }
    }
}

#[test]
fn shape_gauge_equation_projects_to_yang_mills() {
    let st = Spacetime::minkowski(4);
    let (vf, _) = random_smooth_frame_pair(3, 2, 4, 61);
    let random = Frame::new(st, vf.into_field(4)).unwrap();
    for v in [random, wave_frame(&MAXWELL.0, &MAXWELL.1), wave_frame(&VIOLATING.0, &VIOLATING.1)] {
        let a = extract_potential(&v).unwrap();
        for x in points() {
            let frame = v.value(&x).unwrap();
            for nu in 0..4 {
                let res = shape_gauge_ym_residual(&v, nu, &x).unwrap();
                let ym = ym_residual(&a, nu, &x).unwrap();
                assert!(max_abs_diff(&(frame.adjoint() * &res * &frame), &ym) < 10.0 * fd());
                // the projected residual lives in the blade: P res = res
                assert!(max_abs_diff(&(&frame * frame.adjoint() * &res), &res) < 1e-12);
            }
        }
    }
    let maxwell = wave_frame(&MAXWELL.0, &MAXWELL.1);
    let bad = wave_frame(&VIOLATING.0, &VIOLATING.1);
    let x = &points()[0];
    let worst = |v: &Frame| (0..4).map(|nu| max_abs(&shape_gauge_ym_residual(v, nu, x).unwrap())).fold(0.0, f64::max);
    assert!(worst(&maxwell) < 10.0 * fd());
    assert!(worst(&bad) > 0.1);
    let w = complement_frame(&maxwell).unwrap();
    assert_eq!(w.big_n(), 2);
}

#[test]
fn sigma_residual_two_paths() {
    let m = crate::em::MonopoleScenario::new(0.5, Patch::Plus).unwrap();
    let exact = blade_from_frame(&m.frame().unwrap());
    let numeric = blade_from_frame(
        &Frame::new(Spacetime::spherical(), m.frame().unwrap().field().clone().finite_difference_only()).unwrap(),
    );
    let x = [1.0, 1.1, 0.4];
    let (a, b) = (sigma_eom_residual(&exact, &x).unwrap(), sigma_eom_residual(&numeric, &x).unwrap());
    assert!(max_abs(&a) > 0.1);
    assert!(max_abs_diff(&a, &b) < nested());
    let _ = monopole_params(0.5, Patch::Plus);
}

fn band(g: f64, nt: usize, np: usize) -> SigmaLattice {
    SigmaLattice::from_blade(
        &monopole_angular_blade(g).unwrap(),
        vec![0.5, 0.0],
        vec![PI - 0.5, 2.0 * PI],
        vec![nt, np],
        vec![false, true],
    )
    .unwrap()
}

#[test]
fn lattice_gradient_matches_difference_quotient() {
    let lat = band(0.5, 7, 8);
    let grad = lat.gradient();
    for seed in 0..3 {
        let dirs: Vec<CMatrix> = (0..lat.len()).map(|k| random_hermitian(2, 1000 * seed + k as u64)).collect();
        let analytic: f64 = grad.iter().zip(&dirs).map(|(g, b)| trace(&(g * b)).re).sum();
        let eps = 1e-5;
        let (up, down) = (lat.conjugated(&dirs, eps).unwrap(), lat.conjugated(&dirs, -eps).unwrap());
        let quotient = (up.action() - down.action()) / (2.0 * eps);
        assert!(((analytic - quotient) / quotient).abs() < 1e-6, "{analytic} {quotient}");
    }
}

#[test]
fn constant_lattice_is_a_fixed_point() {
    let r = crate::numerics::reference_blade(3, 1);
    let lat = SigmaLattice::new(vec![0.0; 2], vec![1.0; 2], vec![4, 5], vec![false, true], vec![r; 20]).unwrap();
    assert_eq!(lat.action(), 0.0);
    let out = sigma_flow(&lat, 5, 0.1).unwrap();
    assert_eq!(out.lattice, lat);
    assert!(out.actions.iter().all(|s| *s == 0.0));
}

#[test]
fn monopole_band_flow_descends() {
    let lat = band(0.5, 12, 16);
    let out = sigma_flow(&lat, 500, 0.05).unwrap();
    assert_eq!(out.actions.len(), 501);
    for w in out.actions.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
    assert!(out.actions[500] < out.actions[0]);
    assert!(out.lattice.invariant_defect() < 1e-12);
    for k in 0..lat.len() {
        if lat.is_fixed(k) {
            assert_eq!(out.lattice.site(k), lat.site(k));
        }
    }
}

#[test]
fn oversized_steps_diverge() {
    let lat = band(0.5, 8, 8);
    match sigma_flow(&lat, 200, 50.0) {
        Err(Error::Divergence { eta, .. }) => assert_eq!(eta, 50.0),
        other => panic!("{:?}", other.map(|o| o.actions)),
    }
    assert!(sigma_flow(&lat, 1, -1.0).is_err());
}

#[test]
fn lattice_validation() {
    let r = crate::numerics::reference_blade(2, 1);
    assert!(SigmaLattice::new(vec![0.0], vec![1.0], vec![3], vec![false], vec![r.clone(); 2]).is_err());
    assert!(SigmaLattice::new(vec![0.0], vec![1.0], vec![2], vec![true], vec![r.clone(); 2]).is_err());
    assert!(SigmaLattice::new(vec![1.0], vec![1.0], vec![3], vec![false], vec![r; 3]).is_err());
}

#[test]
fn equations_parse() {
    assert_eq!("maxmod".parse::<Equation>().unwrap(), Equation::Maxmod);
    assert!("maxwell".parse::<Equation>().is_err());
}
