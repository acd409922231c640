use super::*;
use crate::fields::{FieldFn, Spacetime};
use crate::gauge::{covariant_derivative, gauge_transform, GaugeMap, MatterField};
use crate::numerics::{
    c, commutator, hermitian_function, identity, max_abs, max_abs_diff, random_hermitian, reference_blade,
    reference_frame, unitary_exp, CMatrix, I,
};
use crate::smooth::{random_smooth_frame_pair, random_smooth_hermitian, random_smooth_unitary};
use crate::{Error, Tolerances};
use proptest::prelude::*;

const ANALYTIC: f64 = 1e-9;

fn fd() -> f64 {
    Tolerances::default().fd()
}

fn points() -> Vec<Vec<f64>> {
    vec![
        vec![0.1, -0.2, 0.3, 0.05],
        vec![-0.4, 0.25, 0.1, 0.6],
        vec![0.7, 0.1, -0.5, -0.2],
    ]
}

fn random_frames(big_n: usize, n: usize, seed: u64) -> (Frame, Frame) {
    let (v, w) = random_smooth_frame_pair(big_n, n, 4, seed);
    let st = Spacetime::minkowski(4);
    (
        Frame::new(st.clone(), v.into_field(4)).unwrap(),
        Frame::new(st, w.into_field(4)).unwrap(),
    )
}

/// `V = (e^{i alpha} cos rho, e^{i beta} sin rho)` with simple parameter functions.
fn em_frame() -> Frame {
    let f = FieldFn::new(4, (2, 1), |x| {
        let (alpha, beta, rho) = (x[1] + 0.5 * x[3], 0.3 * x[2] - x[0], 0.4 + 0.2 * x[0].sin());
        let mut v = CMatrix::zeros(2, 1);
        v[(0, 0)] = c(0.0, alpha).exp() * rho.cos();
        v[(1, 0)] = c(0.0, beta).exp() * rho.sin();
        Ok(v)
    });
    Frame::new(Spacetime::minkowski(4), f).unwrap()
}

#[test]
fn constant_frame_is_flat() {
    let st = Spacetime::minkowski(4);
    let v = Frame::new(st, FieldFn::constant(4, reference_frame(3, 1))).unwrap();
    let x = [0.2, 0.1, -0.3, 0.4];
    let a = extract_potential(&v).unwrap();
    let r = blade_from_frame(&v);
    assert!(max_abs_diff(&r.value(&x).unwrap(), &reference_blade(3, 1)) < 1e-15);
    let curv = blade_curvature(&r);
    for mu in 0..4 {
        assert_eq!(max_abs(&a.eval(mu, &x).unwrap()), 0.0);
        assert_eq!(max_abs(&curv.shape().eval(mu, &x).unwrap()), 0.0);
        for nu in 0..4 {
            assert_eq!(max_abs(&curv.eval(&x, mu, nu).unwrap()), 0.0);
        }
    }
}

#[test]
fn blade_invariants_hold_for_random_frames() {
    for (seed, (big_n, n)) in [(1u64, (3, 1)), (2, (4, 2)), (3, (5, 3))] {
        let (v, _) = random_frames(big_n, n, seed);
        let r = blade_from_frame(&v);
        for x in points() {
            let d = r.defects(&x, n).unwrap();
            assert!(d.hermiticity < 1e-10 && d.involution < 1e-10 && d.trace < 1e-8, "{d:?}");
            assert_eq!(r.rank_at(&x).unwrap(), n);
        }
    }
}

#[test]
fn blade_and_shape_are_gauge_invariant() {
    let (v, _) = random_frames(4, 2, 11);
    let u = GaugeMap::new(random_smooth_unitary(2, 4, 12).into_field(4)).unwrap();
    let vu = v.gauge_transformed(&u).unwrap();
    let (c1, c2) = (blade_curvature(&blade_from_frame(&v)), blade_curvature(&blade_from_frame(&vu)));
    for x in points() {
        assert!(max_abs_diff(&c1.blade().value(&x).unwrap(), &c2.blade().value(&x).unwrap()) < ANALYTIC);
        assert!(max_abs_diff(&c1.blade().projector(&x).unwrap(), &c2.blade().projector(&x).unwrap()) < ANALYTIC);
        for mu in 0..4 {
            assert!(max_abs_diff(&c1.shape().eval(mu, &x).unwrap(), &c2.shape().eval(mu, &x).unwrap()) < ANALYTIC);
            for nu in (mu + 1)..4 {
                let (o1, o2) = (c1.shape_form(&x, mu, nu).unwrap(), c2.shape_form(&x, mu, nu).unwrap());
                assert!(max_abs_diff(&o1, &o2) < ANALYTIC);
            }
        }
    }
}

#[test]
fn gauge_transformed_frame_gives_transformed_potential() {
    let (v, _) = random_frames(3, 2, 21);
    let u = GaugeMap::new(random_smooth_unitary(2, 4, 22).into_field(4)).unwrap();
    let a = extract_potential(&v).unwrap();
    let expected = gauge_transform(&a, &u).unwrap();
    let got = extract_potential(&v.gauge_transformed(&u).unwrap()).unwrap();
    for x in points() {
        for mu in 0..4 {
            assert!(max_abs_diff(&got.eval(mu, &x).unwrap(), &expected.eval(mu, &x).unwrap()) < ANALYTIC);
        }
    }
}

#[test]
fn lifted_field_is_invariant() {
    let (v, _) = random_frames(3, 2, 31);
    let u = GaugeMap::new(random_smooth_unitary(2, 4, 32).into_field(4)).unwrap();
    let psi = MatterField::new(FieldFn::new(4, (2, 1), |x| {
        Ok(CMatrix::from_column_slice(2, 1, &[c(x[0].cos(), x[1]), c(0.3, -x[2])]))
    }))
    .unwrap();
    let lhs = v.lift(&psi).unwrap();
    let psi_u = crate::gauge::gauge_transform_psi(&psi, &u).unwrap();
    let rhs = v.gauge_transformed(&u).unwrap().lift(&psi_u).unwrap();
    for x in points() {
        assert!(max_abs_diff(&lhs.eval(&x).unwrap(), &rhs.eval(&x).unwrap()) < 1e-12);
    }
}

#[test]
fn four_curvature_routes_agree() {
    let (v, _) = random_frames(4, 2, 41);
    let analytic = blade_curvature(&blade_from_frame(&v));
    let fd_frame = Frame::new(v.spacetime().clone(), v.field().clone().finite_difference_only()).unwrap();
    let numeric = blade_curvature(&blade_from_frame(&fd_frame));
    for x in points() {
        for mu in 0..4 {
            for nu in 0..4 {
                let routes = analytic.routes(&x, mu, nu).unwrap();
                assert!(routes.max_discrepancy() < ANALYTIC, "{}", routes.max_discrepancy());
                let routes = numeric.routes(&x, mu, nu).unwrap();
                assert!(routes.max_discrepancy() < 10.0 * fd(), "{}", routes.max_discrepancy());
                numeric.eval(&x, mu, nu).unwrap();
            }
        }
    }
}

#[test]
fn curvature_projects_to_field_strength() {
    let (v, _) = random_frames(3, 1, 51);
    let f = crate::gauge::field_strength(&extract_potential(&v).unwrap());
    let curv = blade_curvature(&blade_from_frame(&v));
    for x in points() {
        let vv = v.value(&x).unwrap();
        let r = curv.blade().value(&x).unwrap();
        for mu in 0..4 {
            let s = curv.shape().eval(mu, &x).unwrap();
            assert!(max_abs(&(&r * &s * &r + &s)) < ANALYTIC);
            for nu in 0..4 {
                let om = curv.shape_form(&x, mu, nu).unwrap();
                let proj = vv.adjoint() * &om * &vv;
                assert!(max_abs_diff(&proj, &f.eval(mu, nu, &x).unwrap()) < ANALYTIC);
                assert!(max_abs_diff(&(&r * &om * &r), &om) < ANALYTIC);
                assert!(curv.block_defect(&x, mu, nu).unwrap() < ANALYTIC);
                let om2 = curv.shape_form(&x, nu, mu).unwrap();
                assert!(max_abs(&(&om + &om2)) < 1e-14);
            }
        }
    }
}

#[test]
fn inconsistent_curvature_is_reported() {
    let (v, _) = random_frames(3, 1, 52);
    let fd_frame = Frame::new(v.spacetime().clone(), v.field().clone().finite_difference_only().with_step(0.2))
        .unwrap();
    let curv = blade_curvature(&blade_from_frame(&fd_frame)).with_tolerance(1e-12);
    let err = curv.eval(&points()[0], 0, 1).unwrap_err();
    assert!(matches!(err, Error::Inconsistency { .. }));
}

#[test]
fn lifted_derivative_matches_reduced_one() {
    let (v, _) = random_frames(3, 2, 61);
    let a = extract_potential(&v).unwrap();
    let r = blade_from_frame(&v);
    let psi = MatterField::new(FieldFn::new(4, (2, 1), |x| {
        Ok(CMatrix::from_column_slice(2, 1, &[c(x[1].sin(), 0.2), c(x[0] * x[3], -x[2])]))
    }))
    .unwrap();
    let lifted = v.lift(&psi).unwrap();
    for x in points() {
        for mu in 0..4 {
            let big = lifted_covariant_derivative(&r, &lifted, mu, &x).unwrap();
            let small = v.value(&x).unwrap() * covariant_derivative(&a, &psi, mu, &x).unwrap();
            assert!(max_abs_diff(&big, &small) < fd(), "{}", max_abs_diff(&big, &small));
            let proj = lifted_covariant_derivative_projector(&r, &lifted, mu, &x).unwrap();
            assert!(max_abs_diff(&big, &proj) < fd());
            let dr = lifted_covariant_derivative_matrix(&r, r.field(), mu, &x).unwrap();
            assert!(max_abs(&dr) < ANALYTIC);
        }
    }
}

#[test]
fn constant_fields_have_zero_lifted_derivative() {
    let st = Spacetime::euclidean(2);
    let r = RotatingBlade::new(st, FieldFn::constant(2, reference_blade(3, 1))).unwrap();
    let psi = FieldFn::constant(2, CMatrix::from_element(3, 1, c(1.0, 2.0)));
    assert_eq!(max_abs(&lifted_covariant_derivative(&r, &psi, 1, &[0.3, 0.4]).unwrap()), 0.0);
}

#[test]
fn shape_identity_holds_for_blades_only() {
    let (v, _) = random_frames(4, 1, 71);
    let s = shape_operator(&blade_from_frame(&v));
    let fd_frame = Frame::new(v.spacetime().clone(), v.field().clone().finite_difference_only()).unwrap();
    let s_fd = shape_operator(&blade_from_frame(&fd_frame));
    let st = Spacetime::minkowski(4);
    let fake = ShapeOperator::from_components(st, (0..4).map(|m| random_smooth_hermitian(4, 4, 100 + m)).collect())
        .unwrap();
    let mut control: f64 = 0.0;
    for x in points() {
        for mu in 0..4 {
            for nu in 0..4 {
                assert!(max_abs(&shape_identity_residual(&s, mu, nu, &x).unwrap()) < ANALYTIC);
                assert!(max_abs(&shape_identity_residual(&s_fd, mu, nu, &x).unwrap()) < 10.0 * fd());
                control = control.max(max_abs(&shape_identity_residual(&fake, mu, nu, &x).unwrap()));
            }
        }
    }
    assert!(control > 1e-2, "{control}");
}

#[test]
fn shape_matches_direct_difference() {
    let v = em_frame();
    let s = shape_operator(&blade_from_frame(&v));
    let x = [0.3, 0.2, -0.1, 0.4];
    let h = 1e-4;
    let r = |y: &[f64]| {
        let vv = v.value(y).unwrap();
        &vv * vv.adjoint() * c(2.0, 0.0) - identity(2)
    };
    for mu in 0..4 {
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[mu] += h;
        xm[mu] -= h;
        let dr = (r(&xp) - r(&xm)) / c(2.0 * h, 0.0);
        let expected = r(&x) * dr * (-0.5 * I);
        assert!(max_abs_diff(&s.eval(mu, &x).unwrap(), &expected) < 1e-6);
    }
}

#[test]
fn complement_of_reference_frame() {
    let w = complement_at(&reference_frame(4, 2)).unwrap();
    let mut expected = CMatrix::zeros(4, 2);
    expected[(2, 0)] = c(1.0, 0.0);
    expected[(3, 1)] = c(1.0, 0.0);
    assert!(max_abs_diff(&w, &expected) < 1e-15);
    assert!(complement_at(&identity(3)).is_err());
}

#[test]
fn em_complement_reverses_the_potential() {
    let v = em_frame();
    let w = complement_frame(&v).unwrap();
    let dec = shape_gauge_decompose(&v, &w).unwrap();
    for x in points() {
        let vv = v.value(&x).unwrap();
        let (alpha, beta) = (vv[(0, 0)].arg(), vv[(1, 0)].arg());
        let (cr, sr) = (vv[(0, 0)].norm(), vv[(1, 0)].norm());
        let ww = w.value(&x).unwrap();
        assert!((ww[(0, 0)] - c(0.0, -beta).exp() * (-sr)).norm() < 1e-14);
        assert!((ww[(1, 0)] - c(0.0, -alpha).exp() * cr).norm() < 1e-14);
        for mu in 0..4 {
            let (a, cc) = (dec.potential().eval(mu, &x).unwrap(), dec.complementary().eval(mu, &x).unwrap());
            assert!(max_abs(&(a + cc)) < fd());
            for nu in 0..4 {
                let (f, g) = (
                    dec.field_strength().eval(mu, nu, &x).unwrap(),
                    dec.complementary_strength().eval(mu, nu, &x).unwrap(),
                );
                assert!(max_abs(&(f + g)) < 100.0 * fd());
            }
        }
        dec.verify_at(&x, 100.0 * fd()).unwrap();
    }
}

#[test]
fn decomposition_reconstructs_shape_and_curvature() {
    let (v, w) = random_frames(4, 2, 81);
    let dec = shape_gauge_decompose(&v, &w).unwrap();
    for x in points() {
        let r = dec.verify_at(&x, ANALYTIC).unwrap();
        assert!(r.unitarity < 1e-10);
        let vv = v.value(&x).unwrap();
        let ww = w.value(&x).unwrap();
        check_unitary_pair(&vv, &ww).unwrap();
    }
    // the deterministic completion is only piecewise smooth, so differences are numerical
    let v = Frame::new(v.spacetime().clone(), v.field().clone().with_step(1e-4)).unwrap();
    let gs = complement_frame(&v).unwrap();
    let dec = shape_gauge_decompose(&v, &gs).unwrap();
    for x in points() {
        dec.verify_at(&x, 100.0 * fd()).unwrap();
    }
}

#[test]
fn constant_pair_decomposes_trivially() {
    let st = Spacetime::euclidean(3);
    let v = Frame::new(st.clone(), FieldFn::constant(3, reference_frame(3, 1))).unwrap();
    let w = complement_frame(&v).unwrap();
    let dec = shape_gauge_decompose(&v, &w).unwrap();
    let x = [0.1, 0.2, 0.3];
    for mu in 0..3 {
        assert_eq!(max_abs(&dec.shape().eval(mu, &x).unwrap()), 0.0);
        assert_eq!(max_abs(&dec.complementary().eval(mu, &x).unwrap()), 0.0);
    }
}

#[test]
fn canonical_frame_of_reference_is_reference() {
    let v0 = reference_frame(4, 2);
    let p0 = (reference_blade(4, 2) + identity(4)) * c(0.5, 0.0);
    assert!(max_abs_diff(&canonical_frame(&p0, &v0).unwrap(), &v0) < 1e-14);
}

#[test]
fn orthogonal_subspace_is_out_of_chart() {
    let v0 = reference_frame(2, 1);
    let mut p = CMatrix::zeros(2, 2);
    p[(1, 1)] = c(1.0, 0.0);
    assert!(matches!(canonical_frame(&p, &v0), Err(Error::OutOfChart { .. })));
    let r = p * c(2.0, 0.0) - identity(2);
    assert!(matches!(cartan_rotation(&r, &reference_blade(2, 1)), Err(Error::OutOfChart { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_frame_spans_the_blade(seed in 0u64..10_000) {
        let (big_n, n) = (4, 2);
        let h = random_hermitian(big_n, seed) * c(0.3, 0.0);
        let u = unitary_exp(&h, 1.0).unwrap();
        let v = &u * reference_frame(big_n, n);
        let r = &v * v.adjoint() * c(2.0, 0.0) - identity(big_n);
        let p = (&r + identity(big_n)) * c(0.5, 0.0);
        let v0 = reference_frame(big_n, n);
        let vc = canonical_frame(&p, &v0).unwrap();
        let rc = &vc * vc.adjoint() * c(2.0, 0.0) - identity(big_n);
        prop_assert!(max_abs_diff(&rc, &r) < 1e-10);
        // V = V_can u for the unitary u = V_can^dag V
        let g = vc.adjoint() * &v;
        prop_assert!(max_abs_diff(&(g.adjoint() * &g), &identity(n)) < 1e-10);
        prop_assert!(max_abs_diff(&(&vc * &g), &v) < 1e-10);
        let r0 = reference_blade(big_n, n);
        let u1 = cartan_rotation(&r, &r0).unwrap();
        prop_assert!(max_abs_diff(&(u1.adjoint() * &u1), &identity(big_n)) < 1e-10);
        prop_assert!(max_abs_diff(&(&u1 * &r0), &(&r0 * u1.adjoint())) < 1e-10);
        prop_assert!(max_abs_diff(&(&u1 * &v0), &vc) < 1e-10);
    }

    #[test]
    fn complement_completes_to_a_unitary(seed in 0u64..10_000, n in 1usize..4) {
        let h = random_hermitian(4, seed);
        let v = unitary_exp(&h, 1.0).unwrap() * reference_frame(4, n);
        let w = complement_at(&v).unwrap();
        prop_assert!(check_unitary_pair(&v, &w).is_ok());
    }
}

#[test]
fn canonical_gauge_potential_matches_cartan_factor() {
    let v = em_frame();
    let r = blade_from_frame(&v);
    let v0 = reference_frame(2, 1);
    let r0 = reference_blade(2, 1);
    let can = canonical_frame_field(&r, &v0).unwrap();
    let a = extract_potential(&can).unwrap();
    let blade = r.clone();
    let u1 = FieldFn::new(4, (2, 2), move |x| cartan_rotation(&blade.value(x)?, &r0));
    for x in points() {
        for mu in 0..4 {
            let (u, du) = (u1.eval(&x).unwrap(), u1.partial(&x, mu).unwrap());
            let ia = v0.adjoint() * u.adjoint() * du * &v0;
            let got = a.eval(mu, &x).unwrap() * I;
            assert!(max_abs_diff(&got, &ia) < 10.0 * fd(), "{}", max_abs_diff(&got, &ia));
        }
    }
}

#[test]
fn shape_gauge_is_not_unique() {
    // U1 = exp(i x0 K) with V0^dag K V0 = 0 leaves A unchanged but rotates the blade
    let st = Spacetime::minkowski(4);
    let v0 = reference_frame(3, 1);
    let mut k = CMatrix::zeros(3, 3);
    k[(0, 1)] = c(0.0, 1.0);
    k[(1, 0)] = c(0.0, -1.0);
    k[(1, 2)] = c(0.5, 0.0);
    k[(2, 1)] = c(0.5, 0.0);
    let kk = k.clone();
    let base = v0.clone();
    let moved = FieldFn::new(4, (3, 1), move |x| {
        Ok(hermitian_function(&kk, |l| c(0.0, l * x[0]).exp())? * &base)
    });
    let v = Frame::new(st.clone(), FieldFn::constant(4, v0)).unwrap();
    let w = Frame::new(st, moved).unwrap();
    let x = [0.7, 0.0, 0.0, 0.0];
    let (a, b) = (extract_potential(&v).unwrap(), extract_potential(&w).unwrap());
    for mu in 0..4 {
        assert!(max_abs_diff(&a.eval(mu, &x).unwrap(), &b.eval(mu, &x).unwrap()) < fd());
    }
    let gap = max_abs_diff(&blade_from_frame(&v).value(&x).unwrap(), &blade_from_frame(&w).value(&x).unwrap());
    assert!(gap > 0.1, "{gap}");
    assert!(max_abs(&commutator(&k, &k).unwrap()) == 0.0);
}

#[test]
fn broken_frame_potential_is_rejected() {
    let st = Spacetime::euclidean(1);
    // columns drift away from orthonormality, yet stay within the evaluation check
    let f = FieldFn::new(1, (2, 1), |x| {
        let mut v = CMatrix::zeros(2, 1);
        v[(0, 0)] = c(1.0 + 1e-11 * x[0], 0.0);
        v[(1, 0)] = c(0.0, 0.0);
        Ok(v)
    })
    .with_deriv(|_, _| Ok(CMatrix::from_column_slice(2, 1, &[c(1e-3, 0.0), c(0.0, 0.0)])));
    let v = Frame::new(st, f).unwrap();
    let a = extract_potential(&v).unwrap();
    assert!(matches!(a.eval(0, &[0.0]), Err(Error::Inconsistency { .. })));
}
